//! Per-symbol transmitter, fading channel and receiver.
//!
//! With CSI at both ends the receiver knows which slots were skipped, so a
//! coded block sees BPSK at power `P` over AWGN, with each symbol
//! independently erased with probability `ε`. [`cascade_channel`] simulates
//! that equivalent channel directly.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::fading::FadingModel;
use crate::polar::{encode, sc_decode, PolarCode, Soft};
use crate::power::{InversionPolicy, PowerBudget};

/// Transmit power `T` and the real symbol sent in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitDecision {
    pub power: f64,
    pub symbol: f64,
}

impl TransmitDecision {
    pub const SILENT: Self = Self {
        power: 0.0,
        symbol: 0.0,
    };

    pub fn is_silent(&self) -> bool {
        self.power == 0.0
    }
}

/// What the receiver keeps from one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Sample(f64),
    Erased,
}

/// Inverts the gain when `|h| ≥ δ`: `T = P/h²`, symbol `sign(h)·(−1)^bit·√T`.
pub fn transmit_symbol(bit: u8, h: f64, p: f64, policy: &InversionPolicy) -> TransmitDecision {
    if policy.skips(h) {
        return TransmitDecision::SILENT;
    }
    let power = p / (h * h);
    let sign = h.signum() * if bit == 0 { 1.0 } else { -1.0 };
    TransmitDecision {
        power,
        symbol: sign * power.sqrt(),
    }
}

/// `y = h·x + η`, `η ~ N(0, σ²)`. Noise is drawn even for silent slots.
pub fn propagate<R: Rng + ?Sized>(
    decision: &TransmitDecision,
    h: f64,
    sigma2: f64,
    rng: &mut R,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    h * decision.symbol + sigma2.sqrt() * z
}

/// Receiver with CSI: erases skipped slots, otherwise returns the BPSK LLR
/// `2√P·y/σ²` (positive favours bit 0).
pub fn demodulate(
    y: f64,
    h: f64,
    p: f64,
    sigma2: f64,
    policy: &InversionPolicy,
) -> (Observation, Soft) {
    if policy.skips(h) {
        (Observation::Erased, Soft::Erased)
    } else {
        (Observation::Sample(y), Soft::Llr(bpsk_llr(y, p, sigma2)))
    }
}

#[inline]
pub fn bpsk_llr(y: f64, p: f64, sigma2: f64) -> f64 {
    2.0 * p.sqrt() * y / sigma2
}

/// One slot of the full chain. Draw order: gain, then noise.
pub fn observe_symbol<R: Rng + ?Sized>(
    bit: u8,
    budget: &PowerBudget,
    fading: &FadingModel,
    policy: &InversionPolicy,
    rng: &mut R,
) -> (TransmitDecision, Observation, Soft) {
    let h = fading.sample(rng);
    let decision = transmit_symbol(bit, h, budget.p, policy);
    let y = propagate(&decision, h, budget.sigma2, rng);
    let (obs, soft) = demodulate(y, h, budget.p, budget.sigma2, policy);
    (decision, obs, soft)
}

/// Per-block transmitter statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockDiagnostics {
    pub erasures: usize,
    /// Sum of `T` over the block.
    pub energy: f64,
    pub peak_power: f64,
}

/// Encodes, sends each codeword bit through the fading channel, and SC-decodes.
pub fn simulate_block<R: Rng + ?Sized>(
    code: &PolarCode,
    message: &[u8],
    budget: &PowerBudget,
    fading: &FadingModel,
    policy: &InversionPolicy,
    rng: &mut R,
) -> Result<(Vec<u8>, BlockDiagnostics)> {
    let x = encode(message, code)?;
    let mut diag = BlockDiagnostics::default();
    let soft: Vec<Soft> = x
        .iter()
        .map(|&bit| {
            let (decision, obs, soft) = observe_symbol(bit, budget, fading, policy, rng);
            if obs == Observation::Erased {
                diag.erasures += 1;
            }
            diag.energy += decision.power;
            diag.peak_power = diag.peak_power.max(decision.power);
            soft
        })
        .collect();
    let decoded = sc_decode(&soft, code)?;
    Ok((decoded, diag))
}

/// BPSK over AWGN followed by an independent erasure with probability `eps`.
pub fn cascade_channel<R: Rng + ?Sized>(
    bit: u8,
    eps: f64,
    p: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<Observation> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid(format!("eps must lie in [0,1], got {eps}")));
    }
    if rng.random::<f64>() < eps {
        return Ok(Observation::Erased);
    }
    let z: f64 = rng.sample(StandardNormal);
    let x = if bit == 0 { p.sqrt() } else { -p.sqrt() };
    Ok(Observation::Sample(x + sigma2.sqrt() * z))
}
