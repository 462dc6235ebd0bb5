//! The `polarfade` command line tool.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 for
//! numerical failures and infeasible budgets, 1 for I/O failures on output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::capacity::{
    bi_awgn_capacity, equivalent_capacity, optimize_design_power_with, solve_design_power,
    Objective, QuadratureSpec,
};
use crate::config::{fmt_g12, Figure, SweepConfig};
use crate::construction::construct;
use crate::error::Error;
use crate::fading::FadingModel;
use crate::harness::{run_ber_campaign, sweep_epsilon_vs_q, sweep_optimal_rate, TrialBudget};
use crate::power::{erasure_prob, make_policy, PowerBudget};

/// Environment variable consulted for the master seed when neither the
/// command line nor the config file sets one.
pub const SEED_ENV: &str = "POLARFADE_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "polarfade",
    version,
    about = "Polar codes over fading channels with truncated channel inversion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a polar code and write its information set.
    Construct(ConstructArgs),
    /// Report BI-AWGN capacity, inversion thresholds and erasure probability.
    Capacity(CapacityArgs),
    /// Run a parameter sweep or BER campaign and write CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("dim").required(true).args(["k", "rate"])))]
pub struct ConstructArgs {
    /// log2 of the blocklength.
    #[arg(long)]
    pub n: u32,
    /// Number of information bits.
    #[arg(long)]
    pub k: Option<usize>,
    /// Code rate; K = round(rate·N).
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Design SNR P/σ². Solved from the rate when omitted.
    #[arg(long)]
    pub design_snr: Option<f64>,
    /// Erasure probability for the mixture-channel design.
    #[arg(long, default_value_t = 0.0)]
    pub mixture_eps: f64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("op").required(true).args(["power", "rate"])))]
pub struct CapacityArgs {
    /// Transmit power P.
    #[arg(long)]
    pub power: Option<f64>,
    /// Target rate; P is solved so that C(P) = rate.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Average power constraint Q.
    #[arg(long, alias = "Q")]
    pub q: Option<f64>,
    /// Peak power constraint.
    #[arg(long, alias = "Qpeak", default_value_t = f64::INFINITY)]
    pub qpeak: f64,
    /// Fading law: gaussian:<var>, rayleigh:<scale>, point:<h0>, uniform_abs:<lo>:<hi>.
    #[arg(long, default_value = "gaussian:1")]
    pub fading: FadingModel,
    /// Also search the rate-optimal design power for Q.
    #[arg(long, requires = "q")]
    pub optimize: bool,
    #[arg(long, default_value = "throughput")]
    pub objective: Objective,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// 3: erasure probability, 5: BER campaign, 6: optimal rate.
    #[arg(long)]
    pub figure: Option<Figure>,
    /// Config file; command line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exact number of blocks per point (disables early stopping).
    #[arg(long)]
    pub trials: Option<u64>,
    /// log2 of the blocklength.
    #[arg(long)]
    pub n: Option<u32>,
    /// Worker threads; defaults to all logical CPUs.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) => 2,
            Error::Numeric { .. } | Error::Infeasible(_) => 3,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Capacity(a) => cmd_capacity(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn cmd_construct(a: ConstructArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if a.n > 24 {
        return Err(usage(format!("--n {} is too large", a.n)));
    }
    let n = 1usize << a.n;
    let k = match (a.k, a.rate) {
        (Some(k), None) => k,
        (None, Some(r)) if r > 0.0 && r < 1.0 => (r * n as f64).round() as usize,
        (None, Some(r)) => return Err(usage(format!("--rate must lie in (0,1), got {r}"))),
        _ => return Err(usage("exactly one of --k and --rate is required")),
    };
    let snr = match a.design_snr {
        Some(s) => s,
        None => {
            let r = a.rate.unwrap_or(k as f64 / n as f64);
            if !(r > 0.0 && r < 1.0) {
                return Err(usage(
                    "cannot solve a design SNR for rate 0 or 1; pass --design-snr",
                ));
            }
            solve_design_power(r, a.sigma2, &QuadratureSpec::default())? / a.sigma2
        }
    };
    let code = construct(n, k, snr, a.mixture_eps)?;
    let mut text = format!(
        "N={}\nK={}\ndesign_snr={}\neps={}\n",
        code.n(),
        code.k(),
        fmt_g12(snr),
        fmt_g12(a.mixture_eps)
    );
    for &i in code.info_set() {
        let _ = writeln!(text, "{}", i + 1);
    }
    match &a.output {
        Some(path) => {
            fs::write(path, &text).map_err(|e| io_err(path, e))?;
            let mut config = format!(
                "[construct]\nn = {}\nk = {k}\nsigma2 = {}\ndesign_snr = {snr}\nmixture_eps = {}\n",
                a.n, a.sigma2, a.mixture_eps
            );
            if let Some(r) = a.rate {
                let _ = writeln!(config, "rate = {r}");
            }
            write_manifest(
                &manifest_path(path),
                "construct",
                &config,
                None,
                std::slice::from_ref(path),
                started,
            )?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_capacity(a: CapacityArgs) -> Result<(), CliError> {
    let quad = QuadratureSpec::default();
    let (p, c) = match (a.power, a.rate) {
        (Some(p), None) => (p, bi_awgn_capacity(p, a.sigma2, &quad)?),
        (None, Some(r)) => (solve_design_power(r, a.sigma2, &quad)?, r),
        _ => return Err(usage("exactly one of --power and --rate is required")),
    };
    let mut out = format!(
        "sigma2={}\npower={}\nsnr={}\ncapacity={}\n",
        fmt_g12(a.sigma2),
        fmt_g12(p),
        fmt_g12(p / a.sigma2),
        fmt_g12(c)
    );
    if let Some(q) = a.q {
        let budget = PowerBudget {
            p,
            q,
            q_peak: a.qpeak,
            sigma2: a.sigma2,
        };
        let policy = make_policy(&budget, &a.fading, &quad)?;
        let eps = erasure_prob(policy.delta, &a.fading)?;
        let _ = write!(
            out,
            "q={}\nq_peak={}\nfading={}\ndelta_bar={}\ndelta_peak={}\ndelta={}\nepsilon={}\nc_eq={}\n",
            fmt_g12(q),
            fmt_g12(a.qpeak),
            a.fading,
            fmt_g12(policy.delta_bar),
            fmt_g12(policy.delta_peak),
            fmt_g12(policy.delta),
            fmt_g12(eps),
            fmt_g12(equivalent_capacity(c, eps)?)
        );
        if a.optimize {
            let opt =
                optimize_design_power_with(a.objective, q, a.qpeak, a.sigma2, &a.fading, &quad)?;
            let _ = write!(
                out,
                "objective={}\np_star={}\nr_star={}\nepsilon_star={}\nobjective_value={}\n",
                a.objective,
                fmt_g12(opt.p_star),
                fmt_g12(opt.r_star),
                fmt_g12(opt.eps_star),
                fmt_g12(opt.objective)
            );
        }
    }
    print!("{out}");
    Ok(())
}

fn resolve_sweep(a: &SweepArgs) -> Result<SweepConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            SweepConfig::from_text(&text, a.figure)?
        }
        None => SweepConfig::preset(
            a.figure
                .ok_or_else(|| usage("--figure or --config is required"))?,
        ),
    };
    let c = &mut cfg.campaign;
    if let Some(seed) = a.seed {
        c.master_seed = seed;
    } else if !cfg.seed_given {
        if let Ok(s) = std::env::var(SEED_ENV) {
            c.master_seed = s
                .trim()
                .parse()
                .map_err(|_| usage(format!("{SEED_ENV}='{s}' is not an unsigned integer")))?;
        }
    }
    if let Some(t) = a.trials {
        c.trials = TrialBudget::exactly(t);
    }
    if let Some(n) = a.n {
        c.log_n = n;
    }
    if let Some(t) = a.threads {
        c.threads = t;
    }
    c.validate()?;
    Ok(cfg)
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let cfg = resolve_sweep(&a)?;
    let c = &cfg.campaign;
    let mut csv = String::new();
    match cfg.figure {
        Figure::EpsilonVsQ => {
            csv.push_str("q,sigma_h2,p_design,delta,epsilon\n");
            for pt in sweep_epsilon_vs_q(c)? {
                let row = [pt.q, pt.sigma_h2, pt.p_design, pt.delta, pt.epsilon]
                    .map(fmt_g12)
                    .join(",");
                eprintln!("eps_vs_q {row}");
                let _ = writeln!(csv, "{row}");
            }
        }
        Figure::BerVsQ => {
            csv.push_str("q,scheme,n,k,trials,bit_errors,ber,ci95\n");
            for pt in run_ber_campaign(c)? {
                let row = format!(
                    "{},{},{},{},{},{},{},{}",
                    fmt_g12(pt.q),
                    pt.scheme.name(),
                    pt.n,
                    pt.k,
                    pt.trials,
                    pt.bit_errors,
                    fmt_g12(pt.ber),
                    fmt_g12(pt.ci95)
                );
                eprintln!("ber_vs_q {row}");
                let _ = writeln!(csv, "{row}");
            }
        }
        Figure::OptimalRate => {
            csv.push_str("q,p_star,r_star,epsilon_star\n");
            for pt in sweep_optimal_rate(c)? {
                let row = [pt.q, pt.p_star, pt.r_star, pt.epsilon_star]
                    .map(fmt_g12)
                    .join(",");
                eprintln!("r_star_vs_q {row}");
                let _ = writeln!(csv, "{row}");
            }
        }
    }
    fs::create_dir_all(&a.output_dir).map_err(|e| io_err(&a.output_dir, e))?;
    let path = a.output_dir.join(cfg.figure.csv_name());
    fs::write(&path, csv).map_err(|e| io_err(&path, e))?;
    write_manifest(
        &manifest_path(&path),
        "sweep",
        &cfg.to_text(),
        Some(c.master_seed),
        std::slice::from_ref(&path),
        started,
    )?;
    Ok(())
}

/// `out.csv` → `out.manifest`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest")
}

fn write_manifest(
    path: &Path,
    command: &str,
    config: &str,
    seed: Option<u64>,
    outputs: &[PathBuf],
    started: Instant,
) -> Result<(), CliError> {
    let mut text = config.trim_end().to_string();
    let _ = write!(
        text,
        "\n\n[manifest]\ncommand = {command}\nversion = {}\n",
        env!("CARGO_PKG_VERSION")
    );
    if let Some(s) = seed {
        let _ = writeln!(text, "master_seed = {s}");
    }
    let names: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
    let _ = writeln!(text, "outputs = {}", names.join(", "));
    let _ = writeln!(text, "duration_s = {:.3}", started.elapsed().as_secs_f64());
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}
