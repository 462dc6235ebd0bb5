//! Quadrature, bisection and golden-section search.

use crate::error::{invalid, Error, Result};

/// Settings for the adaptive Simpson integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Integration half-width beyond the constellation point, in noise
    /// standard deviations.
    pub range_sigmas: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 1 << 16,
            range_sigmas: 10.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_subdivisions == 0 || !(self.range_sigmas > 0.0) {
            return Err(invalid(format!("bad quadrature settings {self:?}")));
        }
        Ok(())
    }
}

/// Relative accuracy floor: large integrals are accepted once their error
/// estimate drops below this fraction of the panel value.
const REL_TOL: f64 = 1e-13;
const INITIAL_PANELS: usize = 16;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// The range is first cut into uniform panels, then each panel is bisected
/// until the Richardson error estimate meets its share of `abs_tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("non-finite integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, spec).map(|v| -v);
    }
    let mut stack = Vec::with_capacity(64);
    let width = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = spec.abs_tol / INITIAL_PANELS as f64;
    for p in 0..INITIAL_PANELS {
        let lo = a + width * p as f64;
        let hi = if p + 1 == INITIAL_PANELS {
            b
        } else {
            lo + width
        };
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        stack.push(Panel {
            a: lo,
            b: hi,
            fa,
            fm,
            fb,
            whole: simpson(lo, hi, fa, fm, fb),
            tol: panel_tol,
        });
    }
    let mut total = 0.0;
    let mut splits = 0usize;
    let mut worst_err = 0.0f64;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        if !delta.is_finite() {
            return Err(Error::Numeric {
                message: format!("non-finite integrand near {m}"),
                achieved: f64::INFINITY,
            });
        }
        let tol = p.tol.max(REL_TOL * (left + right).abs());
        let err = delta.abs() / 15.0;
        // Stop on convergence, or when the panel can no longer be split.
        if err <= tol || m <= p.a || m >= p.b || lm <= p.a || rm >= p.b {
            total += left + right + delta / 15.0;
            worst_err = worst_err.max(err);
            continue;
        }
        splits += 1;
        if splits > spec.max_subdivisions {
            return Err(Error::Numeric {
                message: format!(
                    "quadrature did not converge within {} subdivisions",
                    spec.max_subdivisions
                ),
                achieved: err,
            });
        }
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
        });
    }
    Ok(total)
}

/// Integrates over consecutive segments `[points[i], points[i+1]]`.
pub fn integrate_piecewise<F>(f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let segments = points.len().saturating_sub(1).max(1) as f64;
    let seg_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / segments,
        ..*spec
    };
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], &seg_spec))
        .sum()
}

/// Bisection for a predicate that is `false` on `[lo, x*)` and `true` on
/// `[x*, hi]`. Returns an `x` with `pred(x)` true, within `tol` of `x*`.
pub fn bisect_threshold<P>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    P: FnMut(f64) -> Result<bool>,
{
    if !pred(hi)? {
        return Err(invalid(format!(
            "bisection upper end {hi} does not satisfy predicate"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximisation of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}
