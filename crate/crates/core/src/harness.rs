//! Monte Carlo campaigns and parameter sweeps.
//!
//! Every trial owns a ChaCha8 stream keyed by `(master_seed, point_index)`
//! with the trial index as stream number, so results do not depend on the
//! thread count or on the order in which trials finish. Trials run in
//! fixed-size batches; the early-stopping rule is checked only between
//! batches, which keeps the stopping point deterministic too.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::capacity::{optimize_design_power_with, solve_design_power, Objective, QuadratureSpec};
use crate::channel::simulate_block;
use crate::construction::construct;
use crate::error::{invalid, Error, Result};
use crate::fading::FadingModel;
use crate::polar::PolarCode;
use crate::power::{erasure_prob, make_policy, PowerBudget};

/// Trials evaluated between early-stopping checks.
pub const BATCH_TRIALS: u64 = 256;

/// Frozen-set design used for a BER campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Code designed for the AWGN channel at `P/σ²`.
    Proposed,
    /// Code designed for the AWGN-plus-erasure mixture at `(P/σ², ε)`.
    MixtureDesign,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::MixtureDesign => "mixture",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proposed" => Ok(Scheme::Proposed),
            "mixture" | "mixture_design" => Ok(Scheme::MixtureDesign),
            other => Err(invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// How many trials to run per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialBudget {
    pub min_trials: u64,
    pub max_trials: u64,
    /// Stop once this many bit errors are seen (after `min_trials`).
    pub target_bit_errors: Option<u64>,
}

impl TrialBudget {
    pub fn exactly(trials: u64) -> Self {
        Self {
            min_trials: trials,
            max_trials: trials,
            target_bit_errors: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_trials == 0 || self.max_trials < self.min_trials {
            return Err(invalid(format!("invalid trial counts {self:?}")));
        }
        Ok(())
    }
}

impl Default for TrialBudget {
    fn default() -> Self {
        Self {
            min_trials: 100,
            max_trials: 100_000,
            target_bit_errors: Some(100),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    /// log2 of the blocklength.
    pub log_n: u32,
    /// Design rate; `K = round(rate·N)`.
    pub rate: f64,
    /// Overrides the design power otherwise solved from `rate`.
    pub design_power: Option<f64>,
    pub sigma2: f64,
    /// Average power constraints, strictly increasing.
    pub q_grid: Vec<f64>,
    pub q_peak: f64,
    pub fading: FadingModel,
    /// Gaussian fading variances, one ε(Q) curve each, for the threshold sweep.
    pub sigma_h2_grid: Vec<f64>,
    pub trials: TrialBudget,
    pub master_seed: u64,
    pub schemes: Vec<Scheme>,
    pub objective: Objective,
    pub quad: QuadratureSpec,
    /// Worker threads; 0 uses all logical CPUs. Never affects results.
    pub threads: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            log_n: 10,
            rate: 0.5,
            design_power: None,
            sigma2: 1.0,
            q_grid: vec![5.0, 10.0, 20.0, 50.0, 100.0],
            q_peak: f64::INFINITY,
            fading: FadingModel::GaussianReal { sigma_h2: 1.0 },
            sigma_h2_grid: vec![1.0],
            trials: TrialBudget::default(),
            master_seed: 0,
            schemes: vec![Scheme::Proposed, Scheme::MixtureDesign],
            objective: Objective::Throughput,
            quad: QuadratureSpec::default(),
            threads: 0,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.log_n > 20 {
            return Err(invalid(format!(
                "log2 blocklength {} too large",
                self.log_n
            )));
        }
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(invalid(format!(
                "rate must lie in (0,1), got {}",
                self.rate
            )));
        }
        if !(self.sigma2 > 0.0) || !(self.q_peak > 0.0) {
            return Err(invalid("sigma2 and q_peak must be positive"));
        }
        if let Some(p) = self.design_power {
            if !(p > 0.0) || !p.is_finite() {
                return Err(invalid(format!("design power must be positive, got {p}")));
            }
        }
        if self.q_grid.is_empty() || self.q_grid.iter().any(|&q| !(q > 0.0) || !q.is_finite()) {
            return Err(invalid("q grid must be nonempty and positive"));
        }
        if self.q_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("q grid must be strictly increasing"));
        }
        if self.sigma_h2_grid.iter().any(|&s| !(s > 0.0)) {
            return Err(invalid("sigma_h2 values must be positive"));
        }
        self.fading.validate()?;
        self.trials.validate()?;
        self.quad.validate()
    }

    pub fn blocklength(&self) -> usize {
        1usize << self.log_n
    }

    pub fn dimension(&self) -> usize {
        (self.rate * self.blocklength() as f64).round() as usize
    }

    /// `P` for the configured rate (or the explicit override).
    pub fn resolve_design_power(&self) -> Result<f64> {
        match self.design_power {
            Some(p) => Ok(p),
            None => solve_design_power(self.rate, self.sigma2, &self.quad),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))
    }
}

/// RNG for one trial: seed from `(master_seed, point_index)`, stream = trial.
pub fn trial_rng(master_seed: u64, point_index: u64, trial_index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&point_index.to_le_bytes());
    seed[16..24].copy_from_slice(b"polarfad");
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial_index);
    rng
}

/// Outcome of one simulated block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub block_error: bool,
}

/// Error counts accumulated over trials. Addition is commutative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
}

impl Tally {
    fn add(self, other: Tally) -> Tally {
        Tally {
            trials: self.trials + other.trials,
            bit_errors: self.bit_errors + other.bit_errors,
            block_errors: self.block_errors + other.block_errors,
        }
    }

    fn from_outcome(o: TrialOutcome) -> Tally {
        Tally {
            trials: 1,
            bit_errors: o.bit_errors,
            block_errors: u64::from(o.block_error),
        }
    }
}

/// Runs trials for one grid point until the budget says stop.
pub fn run_point<F>(
    pool: &rayon::ThreadPool,
    master_seed: u64,
    point_index: u64,
    budget: &TrialBudget,
    trial: F,
) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng) -> Result<TrialOutcome> + Sync,
{
    budget.validate()?;
    let mut tally = Tally::default();
    while tally.trials < budget.max_trials {
        let start = tally.trials;
        let end = (start + BATCH_TRIALS).min(budget.max_trials);
        let batch = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(master_seed, point_index, t);
                    trial(&mut rng).map(Tally::from_outcome)
                })
                .try_reduce(Tally::default, |a, b| Ok(a.add(b)))
        })?;
        tally = tally.add(batch);
        let enough_errors = budget
            .target_bit_errors
            .is_some_and(|t| tally.bit_errors >= t);
        if tally.trials >= budget.min_trials && enough_errors {
            break;
        }
    }
    Ok(tally)
}

/// 95% half-width of the normal approximation to a binomial proportion.
pub fn ci95_halfwidth(successes: u64, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = successes as f64 / total as f64;
    1.96 * (p * (1.0 - p) / total as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub q: f64,
    pub scheme: Scheme,
    pub n: usize,
    pub k: usize,
    pub p_design: f64,
    pub epsilon: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    pub ci95: f64,
}

impl BerPoint {
    fn from_tally(
        q: f64,
        scheme: Scheme,
        code: &PolarCode,
        p_design: f64,
        epsilon: f64,
        t: Tally,
    ) -> Self {
        let bits = t.trials * code.k() as u64;
        let ber = if bits == 0 {
            0.0
        } else {
            t.bit_errors as f64 / bits as f64
        };
        Self {
            q,
            scheme,
            n: code.n(),
            k: code.k(),
            p_design,
            epsilon,
            trials: t.trials,
            bit_errors: t.bit_errors,
            block_errors: t.block_errors,
            ber,
            bler: t.block_errors as f64 / t.trials as f64,
            ci95: ci95_halfwidth(t.bit_errors, bits),
        }
    }

    pub fn ci(&self) -> (f64, f64) {
        (self.ber - self.ci95, self.ber + self.ci95)
    }
}

/// One point of an ε(Q) curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonPoint {
    pub q: f64,
    pub sigma_h2: f64,
    pub p_design: f64,
    pub delta: f64,
    pub epsilon: f64,
}

/// Erasure probability against `Q`, one curve per Gaussian fading variance
/// (or for the configured fading model when no variances are listed).
pub fn sweep_epsilon_vs_q(cfg: &CampaignConfig) -> Result<Vec<EpsilonPoint>> {
    cfg.validate()?;
    let p = cfg.resolve_design_power()?;
    let curves: Vec<(f64, FadingModel)> = if cfg.sigma_h2_grid.is_empty() {
        vec![(cfg.fading.second_moment(), cfg.fading)]
    } else {
        cfg.sigma_h2_grid
            .iter()
            .map(|&s| (s, FadingModel::GaussianReal { sigma_h2: s }))
            .collect()
    };
    let jobs: Vec<(f64, FadingModel, f64)> = curves
        .iter()
        .flat_map(|&(s, f)| cfg.q_grid.iter().map(move |&q| (s, f, q)))
        .collect();
    cfg.pool()?.install(|| {
        jobs.par_iter()
            .map(|&(sigma_h2, fading, q)| {
                let budget = PowerBudget {
                    p,
                    q,
                    q_peak: cfg.q_peak,
                    sigma2: cfg.sigma2,
                };
                let policy = make_policy(&budget, &fading, &cfg.quad)?;
                Ok(EpsilonPoint {
                    q,
                    sigma_h2,
                    p_design: p,
                    delta: policy.delta,
                    epsilon: erasure_prob(policy.delta, &fading)?,
                })
            })
            .collect()
    })
}

/// Builds the frozen set for `scheme` at design SNR `snr` and erasure rate `eps`.
pub fn scheme_code(scheme: Scheme, n: usize, k: usize, snr: f64, eps: f64) -> Result<PolarCode> {
    match scheme {
        Scheme::Proposed => construct(n, k, snr, 0.0),
        Scheme::MixtureDesign => construct(n, k, snr, eps),
    }
}

/// BER against `Q` for each configured scheme. All schemes at a given `Q`
/// share random streams (messages, gains, noise).
pub fn run_ber_campaign(cfg: &CampaignConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    if cfg.schemes.is_empty() {
        return Err(invalid("no schemes configured"));
    }
    let pool = cfg.pool()?;
    let p = cfg.resolve_design_power()?;
    let (n, k) = (cfg.blocklength(), cfg.dimension());
    let snr = p / cfg.sigma2;
    let mut out = Vec::with_capacity(cfg.q_grid.len() * cfg.schemes.len());
    for (qi, &q) in cfg.q_grid.iter().enumerate() {
        let budget = PowerBudget {
            p,
            q,
            q_peak: cfg.q_peak,
            sigma2: cfg.sigma2,
        };
        let policy = make_policy(&budget, &cfg.fading, &cfg.quad)?;
        let eps = erasure_prob(policy.delta, &cfg.fading)?;
        for &scheme in &cfg.schemes {
            let code = scheme_code(scheme, n, k, snr, eps)?;
            let tally = run_point(&pool, cfg.master_seed, qi as u64, &cfg.trials, |rng| {
                let msg: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
                let (dec, _) = simulate_block(&code, &msg, &budget, &cfg.fading, &policy, rng)?;
                let bit_errors = msg.iter().zip(&dec).filter(|(a, b)| a != b).count() as u64;
                Ok(TrialOutcome {
                    bit_errors,
                    block_error: bit_errors > 0,
                })
            })?;
            out.push(BerPoint::from_tally(q, scheme, &code, p, eps, tally));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRatePoint {
    pub q: f64,
    pub p_star: f64,
    pub r_star: f64,
    pub epsilon_star: f64,
}

/// Rate-optimal design per `Q`.
pub fn sweep_optimal_rate(cfg: &CampaignConfig) -> Result<Vec<OptimalRatePoint>> {
    cfg.validate()?;
    cfg.pool()?.install(|| {
        cfg.q_grid
            .par_iter()
            .map(|&q| {
                let opt = optimize_design_power_with(
                    cfg.objective,
                    q,
                    cfg.q_peak,
                    cfg.sigma2,
                    &cfg.fading,
                    &cfg.quad,
                )?;
                Ok(OptimalRatePoint {
                    q,
                    p_star: opt.p_star,
                    r_star: opt.r_star,
                    epsilon_star: opt.eps_star,
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(threads: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
    }

    fn bsc_trial(k: usize, p: f64) -> impl Fn(&mut ChaCha8Rng) -> Result<TrialOutcome> + Sync {
        move |rng| {
            let e = (0..k).filter(|_| rng.random_bool(p)).count() as u64;
            Ok(TrialOutcome {
                bit_errors: e,
                block_error: e > 0,
            })
        }
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: u64 = trial_rng(1, 2, 3).random();
        let b: u64 = trial_rng(1, 2, 3).random();
        let c: u64 = trial_rng(1, 2, 4).random();
        let d: u64 = trial_rng(1, 3, 3).random();
        let e: u64 = trial_rng(2, 2, 3).random();
        assert_eq!(a, b);
        assert!(a != c && a != d && a != e);
    }

    #[test]
    fn tally_is_independent_of_thread_count() {
        let budget = TrialBudget {
            min_trials: 300,
            max_trials: 5000,
            target_bit_errors: Some(500),
        };
        let one = run_point(&pool(1), 9, 0, &budget, bsc_trial(64, 0.01)).unwrap();
        let many = run_point(&pool(8), 9, 0, &budget, bsc_trial(64, 0.01)).unwrap();
        assert_eq!(one, many);
        // stops at a batch boundary once 500 errors are in
        assert_eq!(one.trials % BATCH_TRIALS, 0);
        assert!(one.bit_errors >= 500 && one.trials < 5000);
    }

    #[test]
    fn exact_budget_runs_exactly() {
        let t = run_point(
            &pool(2),
            0,
            0,
            &TrialBudget::exactly(1000),
            bsc_trial(8, 0.5),
        )
        .unwrap();
        assert_eq!(t.trials, 1000);
        assert!(run_point(&pool(1), 0, 0, &TrialBudget::exactly(0), bsc_trial(8, 0.5)).is_err());
    }

    #[test]
    fn ci_covers_rigged_flip_probability() {
        let p = 0.02;
        let k = 100;
        let mut covered = 0;
        for rep in 0..100u64 {
            let t = run_point(
                &pool(4),
                1000 + rep,
                0,
                &TrialBudget::exactly(500),
                bsc_trial(k, p),
            )
            .unwrap();
            let bits = t.trials * k as u64;
            let ber = t.bit_errors as f64 / bits as f64;
            let hw = ci95_halfwidth(t.bit_errors, bits);
            if (ber - p).abs() <= hw {
                covered += 1;
            }
        }
        assert!(covered >= 90, "covered {covered}/100");
    }

    #[test]
    fn config_validation() {
        let mut c = CampaignConfig::default();
        assert!(c.validate().is_ok());
        c.q_grid = vec![2.0, 1.0];
        assert!(c.validate().is_err());
        c = CampaignConfig {
            rate: 1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c = CampaignConfig {
            trials: TrialBudget {
                min_trials: 5,
                max_trials: 4,
                target_bit_errors: None,
            },
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn epsilon_sweep_shape() {
        let cfg = CampaignConfig {
            q_grid: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            sigma_h2_grid: vec![0.5, 1.0, 2.0],
            ..Default::default()
        };
        let pts = sweep_epsilon_vs_q(&cfg).unwrap();
        assert_eq!(pts.len(), 21);
        for curve in pts.chunks(7) {
            assert!(curve.windows(2).all(|w| w[1].epsilon <= w[0].epsilon));
        }
        // Larger fading variance means fewer deep fades at every Q.
        for i in 0..7 {
            assert!(pts[14 + i].epsilon < pts[7 + i].epsilon);
            assert!(pts[7 + i].epsilon < pts[i].epsilon);
        }
    }

    #[test]
    fn epsilon_limit_set_by_peak_constraint() {
        let cfg = CampaignConfig {
            q_grid: vec![1e6],
            q_peak: 4.0,
            sigma_h2_grid: vec![1.0],
            ..Default::default()
        };
        let pt = sweep_epsilon_vs_q(&cfg).unwrap()[0];
        let peak = (pt.p_design / 4.0).sqrt();
        assert_eq!(pt.delta, peak);
        let cfg = CampaignConfig {
            q_peak: f64::INFINITY,
            ..cfg
        };
        assert!(sweep_epsilon_vs_q(&cfg).unwrap()[0].epsilon < 1e-5);
    }

    #[test]
    fn small_campaign_is_reproducible() {
        let cfg = CampaignConfig {
            log_n: 6,
            q_grid: vec![5.0, 50.0],
            trials: TrialBudget::exactly(300),
            master_seed: 7,
            threads: 1,
            ..Default::default()
        };
        let a = run_ber_campaign(&cfg).unwrap();
        let b = run_ber_campaign(&CampaignConfig {
            threads: 4,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|p| p.n == 64 && p.k == 32 && p.trials == 300));
    }
}
