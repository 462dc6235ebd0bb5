//! Frozen-set selection from Bhattacharyya parameters.
//!
//! The recursion `Z → (Z², 2Z − Z²)` is evaluated in its textbook index
//! order by [`evolve_z`]: the `Z²` child of entry `j` lands at `2j − 1`.
//! In that order the leading binary digit of an index records the first
//! polarization step, with digit 0 meaning the improved (`Z²`) channel. The
//! encoder `x = u·F^{⊗n}` uses the opposite digit convention (the second half
//! of `u` rides the improved channel), so [`bit_channel_z`] reads the evolved
//! vector back to front to express it in encoder coordinates.

use crate::error::{invalid, Result};
use crate::polar::PolarCode;

/// Bhattacharyya parameters of the `2^n` synthesized channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityVector(pub Vec<f64>);

impl ReliabilityVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `Z = e^{−snr}` for BPSK over AWGN at linear SNR `P/σ²`.
pub fn initial_z_awgn(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(invalid(format!("snr must be nonnegative, got {snr}")));
    }
    Ok((-snr).exp())
}

/// Bhattacharyya parameter of AWGN followed by an erasure with probability `eps`.
pub fn initial_z_mixture(snr: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid(format!("eps must lie in [0,1], got {eps}")));
    }
    let z = initial_z_awgn(snr)?;
    Ok(eps + (1.0 - eps) * z)
}

/// Applies the recursion `n` times from `z0`. Entry `j` (0-based) is `Z_{n,j+1}`.
pub fn evolve_z(z0: f64, n: u32) -> Result<ReliabilityVector> {
    if !(0.0..=1.0).contains(&z0) {
        return Err(invalid(format!("z0 must lie in [0,1], got {z0}")));
    }
    if n > 24 {
        return Err(invalid(format!("n={n} too large")));
    }
    let mut z = vec![z0];
    for _ in 0..n {
        z = z.iter().flat_map(|&v| [v * v, 2.0 * v - v * v]).collect();
    }
    Ok(ReliabilityVector(z))
}

/// Bhattacharyya parameters indexed by encoder position `u_i`.
pub fn bit_channel_z(z0: f64, n: u32) -> Result<ReliabilityVector> {
    let mut z = evolve_z(z0, n)?;
    z.0.reverse();
    Ok(z)
}

/// Indices of the `k` smallest entries, ascending; ties go to the smaller index.
pub fn select_info_set(z: &ReliabilityVector, k: usize) -> Result<Vec<usize>> {
    let n = z.len();
    if k > n {
        return Err(invalid(format!("K={k} exceeds N={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z.0[a].total_cmp(&z.0[b]).then(a.cmp(&b)));
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Builds an `(N, K)` code for design SNR `P/σ²`. `eps > 0` selects the
/// erasure-mixture initialization.
pub fn construct(n: usize, k: usize, design_snr: f64, eps: f64) -> Result<PolarCode> {
    if !n.is_power_of_two() {
        return Err(invalid(format!("N={n} is not a power of two")));
    }
    if k > n {
        return Err(invalid(format!("K={k} exceeds N={n}")));
    }
    let log_n = n.trailing_zeros();
    let z0 = initial_z_mixture(design_snr, eps)?;
    // Rank (and break ties) in recursion order, then map to encoder positions.
    let z = evolve_z(z0, log_n)?;
    let mut info: Vec<usize> = select_info_set(&z, k)?
        .into_iter()
        .map(|j| n - 1 - j)
        .collect();
    info.sort_unstable();
    PolarCode::new(log_n, &info, design_snr, eps)
}
