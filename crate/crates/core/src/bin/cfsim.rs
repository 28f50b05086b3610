use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cfmimo::harness::{
    run_complexity_report, run_fig1_experiment, run_fig2_experiment, selftest, write_complexity, write_fig1_cdf,
    write_fig1_summary, write_fig2, write_file, ExperimentConfig, SchemeSpec,
};

#[derive(Parser)]
#[command(name = "cfsim", version, about = "Cell-free massive MIMO uplink detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sum-SE CDFs over random network drops.
    Fig1(Common),
    /// Mean SINR versus SNR for MMSE and converged JAPSIC.
    Fig2(Common),
    /// Operation and backhaul counts per scheme.
    Complexity(Common),
    /// Quick built-in consistency checks.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// Config file (key = value, optional [section] headers).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Comma-separated scheme list, e.g. `mf,mmse,japsic-mu:50`.
    #[arg(long)]
    schemes: Option<String>,
    /// Comma-separated theta values; replaces the configured JAPSIC theta variants.
    #[arg(long)]
    theta: Option<String>,
    /// Comma-separated M_u values; replaces the configured JAPSIC M_u variants.
    #[arg(long)]
    mu: Option<String>,
    /// Detection stages L, counting the initial matched filter.
    #[arg(long)]
    stages: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

/// Print a line, ignoring a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("--{flag}: bad value `{s}`: {e}")))
        .collect()
}

/// Swap every scheme matching `is_variant` for `replacement`, at the position
/// of the first match (or at the end).
fn replace_variants(schemes: &mut Vec<SchemeSpec>, is_variant: fn(&SchemeSpec) -> bool, replacement: Vec<SchemeSpec>) {
    let at = schemes.iter().position(is_variant).unwrap_or(schemes.len());
    schemes.retain(|s| !is_variant(s));
    let at = at.min(schemes.len());
    schemes.splice(at..at, replacement);
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse_unvalidated(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.master_seed = seed;
    }
    if let Some(drops) = c.drops {
        cfg.drops = drops;
    }
    if let Some(stages) = c.stages {
        cfg.stages = stages;
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    if let Some(s) = &c.schemes {
        cfg.schemes = parse_list("schemes", s)?;
    }
    if let Some(t) = &c.theta {
        let thetas: Vec<f64> = parse_list("theta", t)?;
        let specs = thetas.into_iter().map(|theta| SchemeSpec::JapsicTheta { theta }).collect();
        replace_variants(&mut cfg.schemes, |s| matches!(s, SchemeSpec::JapsicTheta { .. }), specs);
    }
    if let Some(m) = &c.mu {
        let mus: Vec<usize> = parse_list("mu", m)?;
        let specs = mus.iter().map(|&mu| SchemeSpec::JapsicMu { mu }).collect();
        replace_variants(&mut cfg.schemes, |s| matches!(s, SchemeSpec::JapsicMu { .. }), specs);
        cfg.fig2.mu = mus.clone();
        if let Some(&first) = mus.first() {
            cfg.complexity.mu = first;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Fig1(c) => {
            let cfg = load_config(&c)?;
            let out = run_fig1_experiment(&cfg)?;
            let a = write_file(&c.out_dir, "fig1_cdf.csv", |w| write_fig1_cdf(&out, w))?;
            let b = write_file(&c.out_dir, "fig1_summary.csv", |w| write_fig1_summary(&out, w))?;
            for s in &out.schemes {
                say!("{:<20} median {:>9.3}  mean {:>9.3}  APs/user {:>6.2}", s.spec.label(), s.median_se, s.mean_se, s.mean_aps);
            }
            say!("wrote {} and {}", a.display(), b.display());
        }
        Command::Fig2(c) => {
            let cfg = load_config(&c)?;
            let out = run_fig2_experiment(&cfg)?;
            let path = write_file(&c.out_dir, "fig2_sinr.csv", |w| write_fig2(&out, w))?;
            say!("wrote {} ({} rows)", path.display(), out.rows.len());
        }
        Command::Complexity(c) => {
            let cfg = load_config(&c)?;
            let rows = run_complexity_report(&cfg)?;
            let hash = cfg.hash();
            let path = write_file(&c.out_dir, "complexity.csv", |w| write_complexity(&rows, &hash, cfg.master_seed, w))?;
            for r in &rows {
                say!("{:<14} ops {:>10}  backhaul {:>7} + {}", r.scheme.to_string(), r.ops, r.backhaul_scalars, r.extra_scalars);
            }
            say!("wrote {}", path.display());
        }
        Command::Selftest => {
            let checks = selftest();
            for c in &checks {
                say!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
