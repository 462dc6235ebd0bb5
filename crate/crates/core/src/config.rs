//! Flat `key = value` configuration files with `[section]` headers.
//!
//! ```text
//! [run]
//! figure = 5
//! seed = 7
//!
//! [code]
//! n = 10          # log2 of the blocklength
//! rate = 0.5
//!
//! [channel]
//! q_grid = 5, 10, 20, 50, 100
//! fading = gaussian:1
//! ```
//!
//! A `[manifest]` section is accepted and ignored, so a run manifest can be
//! fed back in as a config file.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::capacity::QuadratureSpec;
use crate::error::{invalid, Error, Result};
use crate::harness::{CampaignConfig, Scheme, TrialBudget};

/// Which sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Erasure probability against `Q` (no Monte Carlo).
    EpsilonVsQ,
    /// BER against `Q` for each scheme.
    BerVsQ,
    /// Optimal design rate against `Q`.
    OptimalRate,
}

impl Figure {
    pub fn number(&self) -> u32 {
        match self {
            Figure::EpsilonVsQ => 3,
            Figure::BerVsQ => 5,
            Figure::OptimalRate => 6,
        }
    }

    pub fn csv_name(&self) -> &'static str {
        match self {
            Figure::EpsilonVsQ => "eps_vs_q.csv",
            Figure::BerVsQ => "ber_vs_q.csv",
            Figure::OptimalRate => "r_star_vs_q.csv",
        }
    }

    /// Default parameters for this sweep.
    pub fn preset(&self) -> CampaignConfig {
        let base = CampaignConfig::default();
        match self {
            Figure::EpsilonVsQ => CampaignConfig {
                q_grid: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
                sigma_h2_grid: vec![0.5, 1.0, 2.0],
                ..base
            },
            Figure::BerVsQ => CampaignConfig {
                q_grid: vec![5.0, 10.0, 20.0, 50.0, 100.0],
                ..base
            },
            Figure::OptimalRate => CampaignConfig {
                q_grid: vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0],
                ..base
            },
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "3" => Ok(Figure::EpsilonVsQ),
            "5" => Ok(Figure::BerVsQ),
            "6" => Ok(Figure::OptimalRate),
            other => Err(invalid(format!(
                "unknown figure '{other}', expected 3, 5 or 6"
            ))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits a config file into entries. Blank lines and `#` comments are skipped.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| invalid(format!("line {}: malformed section header", i + 1)))?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("line {}: expected key = value", i + 1)))?;
        out.push(Entry {
            section: section.clone(),
            key: k.trim().to_string(),
            value: v.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

/// A fully resolved sweep: which figure plus every campaign parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub figure: Figure,
    pub campaign: CampaignConfig,
    /// Whether the file set `[run] seed`.
    pub seed_given: bool,
}

impl SweepConfig {
    pub fn preset(figure: Figure) -> Self {
        Self {
            figure,
            campaign: figure.preset(),
            seed_given: false,
        }
    }

    /// Parses a config file. The figure comes from `figure` if given,
    /// otherwise from `[run] figure`; that figure's preset supplies every
    /// key the file leaves out.
    pub fn from_text(text: &str, figure: Option<Figure>) -> Result<Self> {
        let entries = parse_entries(text)?;
        let file_figure = entries
            .iter()
            .find(|e| e.section == "run" && e.key == "figure")
            .map(|e| e.value.parse::<Figure>())
            .transpose()?;
        let figure = figure
            .or(file_figure)
            .ok_or_else(|| invalid("no figure given in config or on the command line"))?;
        let mut cfg = Self::preset(figure);
        for e in &entries {
            cfg.apply(e).map_err(|err| match err {
                Error::InvalidArgument(m) => {
                    invalid(format!("line {}: [{}] {}: {m}", e.line, e.section, e.key))
                }
                other => other,
            })?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, e: &Entry) -> Result<()> {
        let c = &mut self.campaign;
        let v = e.value.as_str();
        match (e.section.as_str(), e.key.as_str()) {
            ("manifest", _) => {}
            ("run", "figure") => {}
            ("run", "seed") => {
                c.master_seed = parse_num(v)?;
                self.seed_given = true;
            }
            ("run", "threads") => c.threads = parse_num(v)?,
            ("code", "n") => c.log_n = parse_num(v)?,
            ("code", "rate") => c.rate = parse_num(v)?,
            ("code", "design_power") => {
                c.design_power = if v == "auto" {
                    None
                } else {
                    Some(parse_num(v)?)
                }
            }
            ("channel", "sigma2") => c.sigma2 = parse_num(v)?,
            ("channel", "q_grid") => c.q_grid = parse_list(v)?,
            ("channel", "q_peak") => c.q_peak = parse_num(v)?,
            ("channel", "fading") => c.fading = v.parse()?,
            ("channel", "sigma_h2_grid") => c.sigma_h2_grid = parse_list(v)?,
            ("campaign", "schemes") => {
                c.schemes = v
                    .split(',')
                    .map(|s| s.parse())
                    .collect::<Result<Vec<Scheme>>>()?
            }
            ("campaign", "min_trials") => c.trials.min_trials = parse_num(v)?,
            ("campaign", "max_trials") => c.trials.max_trials = parse_num(v)?,
            ("campaign", "target_bit_errors") => {
                c.trials.target_bit_errors = if v == "none" {
                    None
                } else {
                    Some(parse_num(v)?)
                }
            }
            ("optimizer", "objective") => c.objective = v.parse()?,
            ("quadrature", "abs_tol") => c.quad.abs_tol = parse_num(v)?,
            ("quadrature", "max_subdivisions") => c.quad.max_subdivisions = parse_num(v)?,
            ("quadrature", "range_sigmas") => c.quad.range_sigmas = parse_num(v)?,
            _ => return Err(invalid("unknown key")),
        }
        Ok(())
    }

    /// Serializes every field; `from_text(to_text())` is the identity.
    pub fn to_text(&self) -> String {
        let c = &self.campaign;
        let list = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let TrialBudget {
            min_trials,
            max_trials,
            target_bit_errors,
        } = c.trials;
        let QuadratureSpec {
            abs_tol,
            max_subdivisions,
            range_sigmas,
        } = c.quad;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "[run]\nfigure = {}\nseed = {}\nthreads = {}\n",
            self.figure, c.master_seed, c.threads
        );
        let _ = writeln!(
            s,
            "[code]\nn = {}\nrate = {}\ndesign_power = {}\n",
            c.log_n,
            c.rate,
            c.design_power.map_or("auto".to_string(), |p| p.to_string())
        );
        let _ = writeln!(
            s,
            "[channel]\nsigma2 = {}\nq_grid = {}\nq_peak = {}\nfading = {}\nsigma_h2_grid = {}\n",
            c.sigma2,
            list(&c.q_grid),
            c.q_peak,
            c.fading,
            list(&c.sigma_h2_grid)
        );
        let schemes: Vec<&str> = c.schemes.iter().map(Scheme::name).collect();
        let _ = writeln!(
            s,
            "[campaign]\nschemes = {}\nmin_trials = {min_trials}\nmax_trials = {max_trials}\ntarget_bit_errors = {}\n",
            schemes.join(", "),
            target_bit_errors.map_or("none".to_string(), |t| t.to_string())
        );
        let _ = writeln!(s, "[optimizer]\nobjective = {}\n", c.objective);
        let _ = writeln!(
            s,
            "[quadrature]\nabs_tol = {abs_tol:e}\nmax_subdivisions = {max_subdivisions}\nrange_sigmas = {range_sigmas}"
        );
        s
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| invalid(format!("cannot parse '{v}'")))
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',').map(parse_num).collect()
}

/// Formats like C's `%.12g`.
pub fn fmt_g12(x: f64) -> String {
    fmt_g(x, 12)
}

/// Formats like C's `%.<prec>g`.
pub fn fmt_g(x: f64, prec: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let prec = prec.max(1);
    let sci = format!("{:.*e}", prec - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= prec as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (prec as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
