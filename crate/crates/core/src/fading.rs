//! Channel-gain distributions `F_H`.

use std::fmt;
use std::str::FromStr;

use libm::{erf, erfc};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Tail probability used to truncate unbounded gain supports.
pub const TAIL_MASS: f64 = 1e-12;

/// i.i.d. per-symbol channel gain distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// Real Gaussian gain `N(0, sigma_h2)`.
    GaussianReal { sigma_h2: f64 },
    /// Nonnegative Rayleigh gain with the given scale.
    Rayleigh { scale: f64 },
    /// Deterministic gain `h0`.
    PointMass { h0: f64 },
    /// `|H|` uniform on `[lo, hi]`, sign `±1` with equal probability.
    UniformAbs { lo: f64, hi: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            FadingModel::GaussianReal { sigma_h2 } => sigma_h2 > 0.0 && sigma_h2.is_finite(),
            FadingModel::Rayleigh { scale } => scale > 0.0 && scale.is_finite(),
            FadingModel::PointMass { h0 } => h0.is_finite(),
            FadingModel::UniformAbs { lo, hi } => lo >= 0.0 && hi > lo && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid fading model {self}")))
        }
    }

    /// Draws one gain. A point mass consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FadingModel::GaussianReal { sigma_h2 } => {
                let z: f64 = rng.sample(StandardNormal);
                sigma_h2.sqrt() * z
            }
            FadingModel::Rayleigh { scale } => {
                let u: f64 = rng.random();
                scale * (-2.0 * (1.0 - u).ln()).sqrt()
            }
            FadingModel::PointMass { h0 } => h0,
            FadingModel::UniformAbs { lo, hi } => {
                let r = lo + (hi - lo) * rng.random::<f64>();
                if rng.random_bool(0.5) {
                    r
                } else {
                    -r
                }
            }
        }
    }

    /// `P(H ≤ h)`.
    pub fn cdf(&self, h: f64) -> f64 {
        match *self {
            FadingModel::GaussianReal { sigma_h2 } => 0.5 * erfc(-h / (2.0 * sigma_h2).sqrt()),
            FadingModel::Rayleigh { scale } => {
                if h <= 0.0 {
                    0.0
                } else {
                    -(-0.5 * (h / scale).powi(2)).exp_m1()
                }
            }
            FadingModel::PointMass { h0 } => f64::from(u8::from(h >= h0)),
            FadingModel::UniformAbs { lo, hi } => {
                let w = hi - lo;
                let half = |r: f64| ((r - lo) / w).clamp(0.0, 1.0);
                if h >= 0.0 {
                    0.5 + 0.5 * half(h)
                } else {
                    0.5 - 0.5 * half(-h)
                }
            }
        }
    }

    /// Density of `H` (continuous part; a point mass has none).
    pub fn pdf(&self, h: f64) -> f64 {
        match *self {
            FadingModel::GaussianReal { sigma_h2 } => {
                (-0.5 * h * h / sigma_h2).exp() / (2.0 * std::f64::consts::PI * sigma_h2).sqrt()
            }
            FadingModel::Rayleigh { scale } => {
                if h < 0.0 {
                    0.0
                } else {
                    h / (scale * scale) * (-0.5 * (h / scale).powi(2)).exp()
                }
            }
            FadingModel::PointMass { .. } => 0.0,
            FadingModel::UniformAbs { lo, hi } => {
                let r = h.abs();
                if r >= lo && r <= hi {
                    0.5 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(|H| < d)`: the fraction of slots skipped at threshold `d`.
    pub fn prob_abs_below(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        match *self {
            FadingModel::GaussianReal { sigma_h2 } => erf(d / (2.0 * sigma_h2).sqrt()),
            FadingModel::Rayleigh { .. } => self.cdf(d),
            FadingModel::PointMass { h0 } => f64::from(u8::from(h0.abs() < d)),
            FadingModel::UniformAbs { lo, hi } => ((d - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Density of `|H|` at `r ≥ 0` (continuous part).
    pub fn abs_pdf(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        match *self {
            FadingModel::GaussianReal { .. } | FadingModel::UniformAbs { .. } => 2.0 * self.pdf(r),
            FadingModel::Rayleigh { .. } => self.pdf(r),
            FadingModel::PointMass { .. } => 0.0,
        }
    }

    /// `|h0|` for a point mass.
    pub fn abs_atom(&self) -> Option<f64> {
        match *self {
            FadingModel::PointMass { h0 } => Some(h0.abs()),
            _ => None,
        }
    }

    /// Support of `|H|`, with unbounded tails cut at `1 − TAIL_MASS`.
    pub fn abs_support(&self) -> (f64, f64) {
        let tail = (-2.0 * TAIL_MASS.ln()).sqrt();
        match *self {
            // P(|Z| > t) ≤ e^{−t²/2}
            FadingModel::GaussianReal { sigma_h2 } => (0.0, sigma_h2.sqrt() * tail),
            FadingModel::Rayleigh { scale } => (0.0, scale * tail),
            FadingModel::PointMass { h0 } => (h0.abs(), h0.abs()),
            FadingModel::UniformAbs { lo, hi } => (lo, hi),
        }
    }

    /// A characteristic magnitude of `|H|`.
    pub fn abs_scale(&self) -> f64 {
        match *self {
            FadingModel::GaussianReal { sigma_h2 } => sigma_h2.sqrt(),
            FadingModel::Rayleigh { scale } => scale,
            FadingModel::PointMass { h0 } => h0.abs(),
            FadingModel::UniformAbs { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// `E[H²]`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            FadingModel::GaussianReal { sigma_h2 } => sigma_h2,
            FadingModel::Rayleigh { scale } => 2.0 * scale * scale,
            FadingModel::PointMass { h0 } => h0 * h0,
            FadingModel::UniformAbs { lo, hi } => (hi.powi(3) - lo.powi(3)) / (3.0 * (hi - lo)),
        }
    }
}

impl fmt::Display for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FadingModel::GaussianReal { sigma_h2 } => write!(f, "gaussian:{sigma_h2}"),
            FadingModel::Rayleigh { scale } => write!(f, "rayleigh:{scale}"),
            FadingModel::PointMass { h0 } => write!(f, "point:{h0}"),
            FadingModel::UniformAbs { lo, hi } => write!(f, "uniform_abs:{lo}:{hi}"),
        }
    }
}

impl FromStr for FadingModel {
    type Err = Error;

    /// Parses `gaussian:<var>`, `rayleigh:<scale>`, `point:<h0>` or
    /// `uniform_abs:<lo>:<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let nums = parts
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| invalid(format!("bad fading parameters in '{s}'")))?;
        let model = match (kind.as_str(), nums.as_slice()) {
            ("gaussian", [v]) => FadingModel::GaussianReal { sigma_h2: *v },
            ("rayleigh", [v]) => FadingModel::Rayleigh { scale: *v },
            ("point", [v]) => FadingModel::PointMass { h0: *v },
            ("uniform_abs", [a, b]) => FadingModel::UniformAbs { lo: *a, hi: *b },
            _ => return Err(invalid(format!("unrecognized fading model '{s}'"))),
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{integrate_piecewise, QuadratureSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn models() -> Vec<FadingModel> {
        vec![
            FadingModel::GaussianReal { sigma_h2: 1.0 },
            FadingModel::GaussianReal { sigma_h2: 0.3 },
            FadingModel::Rayleigh { scale: 0.8 },
            FadingModel::UniformAbs { lo: 1.0, hi: 2.0 },
            FadingModel::UniformAbs { lo: 0.0, hi: 0.5 },
        ]
    }

    #[test]
    fn densities_integrate_to_one() {
        let spec = QuadratureSpec::default();
        for m in models() {
            let (_, hi) = m.abs_support();
            let (lo_s, _) = m.abs_support();
            let pts = [-hi, -lo_s, 0.0, lo_s, hi];
            let mut pts: Vec<f64> = pts.to_vec();
            pts.dedup();
            let total = integrate_piecewise(|h| m.pdf(h), &pts, &spec).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "{m}: {total}");
        }
    }

    #[test]
    fn cdf_is_monotone_with_correct_limits() {
        for m in models()
            .into_iter()
            .chain([FadingModel::PointMass { h0: -0.7 }])
        {
            assert!(m.cdf(-1e6) < 1e-12);
            assert!((m.cdf(1e6) - 1.0).abs() < 1e-12);
            let mut prev = 0.0;
            for i in -400..=400 {
                let c = m.cdf(i as f64 * 0.01);
                assert!(c >= prev - 1e-15, "{m}");
                prev = c;
            }
        }
    }

    #[test]
    fn abs_probability_matches_cdf_difference() {
        for m in models() {
            for d in [0.0, 0.1, 0.5, 1.0, 1.5, 3.0] {
                let via_cdf = m.cdf(d) - m.cdf(-d);
                assert!((m.prob_abs_below(d) - via_cdf).abs() < 1e-12, "{m} at {d}");
            }
        }
    }

    #[test]
    fn point_mass_uses_strict_threshold() {
        let m = FadingModel::PointMass { h0: -2.0 };
        assert_eq!(m.prob_abs_below(2.0), 0.0);
        assert_eq!(m.prob_abs_below(2.0 + 1e-12), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let before: u64 = rng.random();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(m.sample(&mut rng), -2.0);
        assert_eq!(rng.random::<u64>(), before);
    }

    #[test]
    fn sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 400_000;
        for m in models() {
            let s: Vec<f64> = (0..n).map(|_| m.sample(&mut rng)).collect();
            let m2 = s.iter().map(|h| h * h).sum::<f64>() / n as f64;
            let rel = (m2 - m.second_moment()).abs() / m.second_moment();
            assert!(rel < 0.01, "{m}: {m2}");
            let below = s.iter().filter(|h| h.abs() < m.abs_scale()).count() as f64 / n as f64;
            assert!(
                (below - m.prob_abs_below(m.abs_scale())).abs() < 0.005,
                "{m}"
            );
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for m in models()
            .into_iter()
            .chain([FadingModel::PointMass { h0: 1.5 }])
        {
            assert_eq!(m.to_string().parse::<FadingModel>().unwrap(), m);
        }
        assert!("gaussian:-1".parse::<FadingModel>().is_err());
        assert!("nakagami:1".parse::<FadingModel>().is_err());
        assert!("uniform_abs:2:1".parse::<FadingModel>().is_err());
    }
}
