//! Truncated channel inversion under average and peak power constraints.
//!
//! The transmitter inverts the gain (`T = P/H²`) whenever `|H| ≥ δ` and is
//! silent otherwise. `δ` is the larger of the average-power threshold `δ̄`,
//! where the expected transmit power meets `Q`, and the peak threshold
//! `√(P/Q̃)`.

use crate::error::{invalid, Result};
use crate::fading::FadingModel;
use crate::numeric::{bisect_threshold, integrate, integrate_piecewise, QuadratureSpec};

/// Threshold resolution of the `δ̄` search.
pub const DELTA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    /// Design (received) power `P`.
    pub p: f64,
    /// Average transmit power constraint `Q`.
    pub q: f64,
    /// Peak transmit power constraint `Q̃`; `f64::INFINITY` for none.
    pub q_peak: f64,
    /// Noise variance `σ²`.
    pub sigma2: f64,
}

impl PowerBudget {
    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v > 0.0 && v.is_finite();
        if !finite_pos(self.p)
            || !finite_pos(self.q)
            || !finite_pos(self.sigma2)
            || !(self.q_peak > 0.0)
        {
            return Err(invalid(format!("invalid power budget {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionPolicy {
    /// Final threshold: invert iff `|H| ≥ delta`.
    pub delta: f64,
    pub delta_bar: f64,
    pub delta_peak: f64,
}

impl InversionPolicy {
    /// Policy with an explicit threshold and no decomposition.
    pub fn with_threshold(delta: f64) -> Self {
        Self {
            delta,
            delta_bar: delta,
            delta_peak: 0.0,
        }
    }

    /// Whether the slot with gain `h` is skipped.
    #[inline]
    pub fn skips(&self, h: f64) -> bool {
        h == 0.0 || h.abs() < self.delta
    }
}

/// `∫_{|h| ≥ δ} P/h² dF_H`, or `+∞` when it diverges (only possible at `δ = 0`).
pub fn expended_power(
    p: f64,
    delta: f64,
    fading: &FadingModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid(format!("design power must be positive, got {p}")));
    }
    if !(delta >= 0.0) {
        return Err(invalid(format!(
            "threshold must be nonnegative, got {delta}"
        )));
    }
    fading.validate()?;
    if let Some(r) = fading.abs_atom() {
        return Ok(if r < delta {
            0.0
        } else if r == 0.0 {
            f64::INFINITY
        } else {
            p / (r * r)
        });
    }
    let (support_lo, support_hi) = fading.abs_support();
    let from = delta.max(support_lo);
    if from >= support_hi {
        return Ok(0.0);
    }
    if from > 0.0 {
        return Ok(p * inverse_square_moment(from, fading, quad)?);
    }
    // δ = 0 over a support reaching 0.
    if fading.abs_pdf(0.0) > 0.0 {
        return Ok(f64::INFINITY);
    }
    let scale = fading.abs_scale();
    let near = inverse_square_moment(1e-12 * scale, fading, quad)?;
    let far = inverse_square_moment(1e-6 * scale, fading, quad)?;
    if near - far > 1e-6 * far.max(1.0) {
        return Ok(f64::INFINITY);
    }
    Ok(p * near)
}

/// `E[H^{-2}; |H| ≥ from]` for a continuous `|H|` density, `from > 0`.
///
/// Below the distribution's scale the integral runs in `u = 1/h`, where the
/// integrand `f(1/u)` stays bounded; it is cut into decades so the adaptive
/// rule sees the shape near `u ≈ 1/scale`.
fn inverse_square_moment(from: f64, fading: &FadingModel, quad: &QuadratureSpec) -> Result<f64> {
    let (_, support_hi) = fading.abs_support();
    let scale = fading.abs_scale().min(support_hi);
    let breaks = support_breaks(fading);
    let mut total = 0.0;
    if from < scale {
        let mut pts = vec![1.0 / scale];
        let top = 1.0 / from;
        let mut u = 10.0 / scale;
        while u < top {
            pts.push(u);
            u *= 10.0;
        }
        pts.extend(
            breaks
                .iter()
                .filter(|&&b| b > from && b < scale)
                .map(|&b| 1.0 / b),
        );
        pts.push(top);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        total += integrate_piecewise(|u| fading.abs_pdf(1.0 / u), &pts, quad)?;
    }
    let lo = from.max(scale);
    if lo < support_hi {
        let mut pts = vec![lo];
        pts.extend(breaks.iter().filter(|&&b| b > lo && b < support_hi));
        pts.push(support_hi);
        total += integrate_piecewise(|h| fading.abs_pdf(h) / (h * h), &pts, quad)?;
    }
    Ok(total)
}

fn support_breaks(fading: &FadingModel) -> Vec<f64> {
    match *fading {
        FadingModel::UniformAbs { lo, hi } => vec![lo, hi],
        _ => Vec::new(),
    }
}

/// Smallest `δ̄ ≥ 0` whose expended power does not exceed `Q`.
pub fn solve_delta_bar(
    budget: &PowerBudget,
    fading: &FadingModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    budget.validate()?;
    if expended_power(budget.p, 0.0, fading, quad)? <= budget.q {
        return Ok(0.0);
    }
    let (_, support_hi) = fading.abs_support();
    let hi = 2.0 * support_hi + 1.0;
    bisect_threshold(
        |d| Ok(expended_power(budget.p, d, fading, quad)? <= budget.q),
        0.0,
        hi,
        DELTA_TOL,
    )
}

/// `√(P/Q̃)`, zero without a peak constraint.
pub fn peak_threshold(p: f64, q_peak: f64) -> Result<f64> {
    if !(p > 0.0) || !(q_peak > 0.0) {
        return Err(invalid(format!(
            "peak threshold needs P>0 and Q̃>0, got {p}, {q_peak}"
        )));
    }
    if q_peak.is_infinite() {
        return Ok(0.0);
    }
    Ok((p / q_peak).sqrt())
}

pub fn make_policy(
    budget: &PowerBudget,
    fading: &FadingModel,
    quad: &QuadratureSpec,
) -> Result<InversionPolicy> {
    let delta_bar = solve_delta_bar(budget, fading, quad)?;
    let delta_peak = peak_threshold(budget.p, budget.q_peak)?;
    Ok(InversionPolicy {
        delta: delta_bar.max(delta_peak),
        delta_bar,
        delta_peak,
    })
}

/// Probability that a slot is skipped, `P(|H| < δ)`.
pub fn erasure_prob(delta: f64, fading: &FadingModel) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(invalid(format!(
            "threshold must be nonnegative, got {delta}"
        )));
    }
    fading.validate()?;
    Ok(fading.prob_abs_below(delta))
}

/// Direct integral of `P/h²` over `|h| ≥ δ` in the gain variable, without the
/// `1/h` substitution. Slow near zero; used for cross-checks.
pub fn expended_power_direct(
    p: f64,
    delta: f64,
    fading: &FadingModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let (lo, hi) = fading.abs_support();
    let from = delta.max(lo);
    if from <= 0.0 || from >= hi {
        return expended_power(p, delta, fading, quad);
    }
    Ok(p * integrate(|h| fading.abs_pdf(h) / (h * h), from, hi, quad)?)
}
