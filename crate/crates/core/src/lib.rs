//! Polar-coded transmission over fading AWGN channels using truncated
//! channel inversion under average and peak power constraints.
//!
//! The crate is organised bottom-up:
//!
//! * [`polar`]: the `u·F^{⊗n}` transform, encoder and successive
//!   cancellation decoder.
//! * [`construction`]: frozen-set selection from the Bhattacharyya recursion.
//! * [`capacity`]: binary-input AWGN capacity, its inverse, and the
//!   rate-optimal design-power search.
//! * [`fading`] and [`power`]: fading distributions and the truncated
//!   inversion policy (thresholds, expended power, erasure probability).
//! * [`channel`]: per-symbol transmitter/channel/receiver simulation and the
//!   equivalent AWGN-plus-erasure cascade.
//! * [`harness`]: deterministic, parallel Monte Carlo campaigns and sweeps.
//! * [`cli`]: the `polarfade` command line tool.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod config;
pub mod construction;
pub mod error;
pub mod fading;
pub mod harness;
pub mod numeric;
pub mod polar;
pub mod power;

pub use error::{Error, Result};
