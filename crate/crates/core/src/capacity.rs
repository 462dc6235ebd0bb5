//! Binary-input AWGN capacity and the rate-optimal design power.
//!
//! Rates are in bits. The capacity is evaluated as `h(Y) − ½·log2(2πeσ²)`
//! with `h(Y)` the differential entropy of the two-Gaussian output mixture.

use std::f64::consts::{LN_2, PI};

use crate::error::{invalid, Error, Result};
use crate::fading::FadingModel;
use crate::numeric::{golden_max, integrate};
use crate::power::{erasure_prob, make_policy, PowerBudget};

pub use crate::numeric::QuadratureSpec;

/// Target accuracy of [`solve_design_power`] in bits.
pub const RATE_TOL: f64 = 1e-9;
/// Relative resolution of the design-power search.
pub const POWER_REL_TOL: f64 = 1e-7;

fn check_noise(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(invalid(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    Ok(())
}

fn check_power(p: f64) -> Result<()> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(invalid(format!("power must be nonnegative, got {p}")));
    }
    Ok(())
}

/// Density of `Y = ±√P + N(0, σ²)` with equiprobable signs.
pub fn output_density(y: f64, p: f64, sigma2: f64) -> Result<f64> {
    check_power(p)?;
    check_noise(sigma2)?;
    Ok(mixture_density(y, p.sqrt(), sigma2))
}

#[inline]
fn mixture_density(y: f64, a: f64, sigma2: f64) -> f64 {
    let norm = 0.5 / (2.0 * PI * sigma2).sqrt();
    norm * ((-(y - a).powi(2) / (2.0 * sigma2)).exp() + (-(y + a).powi(2) / (2.0 * sigma2)).exp())
}

/// Output differential entropy `h(Y)` in bits.
pub fn output_entropy(p: f64, sigma2: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_power(p)?;
    check_noise(sigma2)?;
    let a = p.sqrt();
    let half_width = a + quad.range_sigmas * sigma2.sqrt();
    let integrand = |y: f64| {
        let f = mixture_density(y, a, sigma2);
        if f > 0.0 {
            -f * f.ln()
        } else {
            0.0
        }
    };
    // The integrand is even.
    let nats = 2.0 * integrate(integrand, 0.0, half_width, quad)?;
    Ok(nats / LN_2)
}

/// Symmetric capacity of BPSK at power `P` over AWGN with variance `σ²`, clamped to `[0, 1]`.
pub fn bi_awgn_capacity(p: f64, sigma2: f64, quad: &QuadratureSpec) -> Result<f64> {
    let h = output_entropy(p, sigma2, quad)?;
    if p == 0.0 {
        // Y is exactly N(0, σ²).
        return Ok(0.0);
    }
    let noise_entropy = 0.5 * (2.0 * PI * std::f64::consts::E * sigma2).log2();
    Ok((h - noise_entropy).clamp(0.0, 1.0))
}

/// BPSK power achieving `rate` bits per channel use.
pub fn solve_design_power(rate: f64, sigma2: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(invalid(format!("rate must lie in (0,1), got {rate}")));
    }
    check_noise(sigma2)?;
    let mut lo = 0.0;
    let mut hi = sigma2;
    while bi_awgn_capacity(hi, sigma2, quad)? <= rate {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 * sigma2 {
            return Err(Error::Numeric {
                message: format!("no power reaches rate {rate}"),
                achieved: 1.0 - bi_awgn_capacity(hi, sigma2, quad)?,
            });
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let c = bi_awgn_capacity(mid, sigma2, quad)?;
        if (c - rate).abs() <= RATE_TOL || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if c < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// `(1 − ε)·C_AWGN`.
pub fn equivalent_capacity(c_awgn: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c_awgn) || !(0.0..=1.0).contains(&eps) {
        return Err(invalid(format!(
            "capacity {c_awgn} and eps {eps} must lie in [0,1]"
        )));
    }
    Ok((1.0 - eps) * c_awgn)
}

/// What the design-power search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// `(1 − ε)·C_AWGN(P)`, the equivalent-channel capacity.
    #[default]
    Throughput,
    /// `(1 − ε)·h(Y)`, omitting the noise-entropy constant.
    OutputEntropy,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "throughput" => Ok(Objective::Throughput),
            "output_entropy" => Ok(Objective::OutputEntropy),
            other => Err(invalid(format!("unknown objective '{other}'"))),
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Throughput => "throughput",
            Objective::OutputEntropy => "output_entropy",
        })
    }
}

/// Result of the design-power search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptimum {
    pub p_star: f64,
    /// `C_AWGN(P*)`: the code rate to design for.
    pub r_star: f64,
    pub eps_star: f64,
    /// Objective value at `P*`.
    pub objective: f64,
}

/// Evaluates the objective at design power `p`. Returns `(J, ε)`.
#[allow(clippy::too_many_arguments)]
pub fn design_objective(
    objective: Objective,
    p: f64,
    q: f64,
    q_peak: f64,
    sigma2: f64,
    fading: &FadingModel,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let budget = PowerBudget {
        p,
        q,
        q_peak,
        sigma2,
    };
    let policy = make_policy(&budget, fading, quad)?;
    let eps = erasure_prob(policy.delta, fading)?;
    let value = match objective {
        Objective::Throughput => bi_awgn_capacity(p, sigma2, quad)?,
        Objective::OutputEntropy => output_entropy(p, sigma2, quad)?,
    };
    Ok(((1.0 - eps) * value, eps))
}

pub fn optimize_design_power(
    q: f64,
    q_peak: f64,
    sigma2: f64,
    fading: &FadingModel,
    quad: &QuadratureSpec,
) -> Result<DesignOptimum> {
    optimize_design_power_with(Objective::Throughput, q, q_peak, sigma2, fading, quad)
}

/// Maximizes the objective over `P ∈ (0, Q̃]`.
///
/// A doubling scan from `min(Q, Q̃)` brackets the peak on a log-power grid,
/// then golden-section search refines it in `ln P`.
pub fn optimize_design_power_with(
    objective: Objective,
    q: f64,
    q_peak: f64,
    sigma2: f64,
    fading: &FadingModel,
    quad: &QuadratureSpec,
) -> Result<DesignOptimum> {
    if !(q > 0.0) || !q.is_finite() || !(q_peak > 0.0) {
        return Err(invalid(format!("need Q > 0 and Q̃ > 0, got {q}, {q_peak}")));
    }
    check_noise(sigma2)?;
    fading.validate()?;
    let ln_cap = q_peak.ln();
    let eval = |ln_p: f64| -> Result<f64> {
        let ln_p = ln_p.min(ln_cap);
        Ok(design_objective(objective, ln_p.exp(), q, q_peak, sigma2, fading, quad)?.0)
    };

    const STEP: f64 = std::f64::consts::LN_2;
    const MAX_STEPS: usize = 80;
    let start = q.min(q_peak).ln();
    let mut best = (start, eval(start)?);
    // Walk up while the objective improves.
    let mut x = start;
    for _ in 0..MAX_STEPS {
        if x >= ln_cap {
            break;
        }
        let next = (x + STEP).min(ln_cap);
        let v = eval(next)?;
        if v > best.1 {
            best = (next, v);
            x = next;
        } else {
            break;
        }
    }
    if best.0 == start {
        x = start;
        for _ in 0..MAX_STEPS {
            let next = x - STEP;
            let v = eval(next)?;
            if v > best.1 {
                best = (next, v);
                x = next;
            } else {
                break;
            }
        }
    }
    if !(best.1 > 0.0) {
        return Err(Error::Infeasible(format!(
            "objective vanishes for every design power (Q={q}, Q̃={q_peak})"
        )));
    }
    let lo = best.0 - STEP;
    let hi = (best.0 + STEP).min(ln_cap);
    let (ln_p, value) = golden_max(eval, lo, hi, POWER_REL_TOL)?;
    let (ln_p, value) = if value >= best.1 { (ln_p, value) } else { best };
    let p_star = ln_p.min(ln_cap).exp();
    let (objective_value, eps_star) =
        design_objective(objective, p_star, q, q_peak, sigma2, fading, quad)?;
    debug_assert!((objective_value - value).abs() < 1e-12);
    Ok(DesignOptimum {
        p_star,
        r_star: bi_awgn_capacity(p_star, sigma2, quad)?,
        eps_star,
        objective: objective_value,
    })
}
