//! Experiment configuration, execution and CSV output.

mod cdf;
mod config;
mod experiments;
mod output;

pub use cdf::{cdf_at, compute_cdf, mean, median, CdfPoint};
pub use config::{
    ComplexityConfig, EstimationSetting, ExperimentConfig, Fig2Config, SchemeSpec, SinrMode, ThetaScale,
};
pub use experiments::{
    draw_block, evaluate_block, run_complexity_report, run_drop, run_fig1_experiment, run_fig2_experiment,
    scheme_sinr, BlockOutcome, BlockRealization, ComplexityRow, Fig2Output, Fig2Row, RunOutput, SchemeResult,
};
pub use output::{write_complexity, write_fig1_cdf, write_fig1_summary, write_fig2, write_file};

use crate::metrics::SchemeKind;

/// Outcome of one selftest check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Quick end-to-end checks: reference operation and backhaul counts, and
/// worker-count independence of a small Fig. 1 run.
pub fn selftest() -> Vec<Check> {
    let mut checks = Vec::new();
    let cfg = ExperimentConfig::default();

    let expected = [
        (SchemeKind::MmseSic, 11_284_000),
        (SchemeKind::Mmse, 568_000),
        (SchemeKind::JapsicTheta, 38_000),
        (SchemeKind::JapsicMu, 38_664),
        (SchemeKind::Uc, 2_664),
        (SchemeKind::Mf, 4_000),
    ];
    checks.push(match run_complexity_report(&cfg) {
        Ok(rows) => {
            let bad: Vec<String> = expected
                .iter()
                .filter(|(k, v)| !rows.iter().any(|r| r.scheme == *k && r.ops == *v))
                .map(|(k, v)| format!("{k} != {v}"))
                .collect();
            let backhaul_ok = rows
                .iter()
                .all(|r| r.backhaul_scalars == 20_000 && r.extra_scalars == if r.scheme.is_mmse() { 2_000 } else { 0 });
            Check {
                name: "complexity and backhaul counts",
                passed: bad.is_empty() && backhaul_ok,
                detail: if bad.is_empty() { "reference counts reproduced".into() } else { bad.join("; ") },
            }
        }
        Err(e) => Check { name: "complexity and backhaul counts", passed: false, detail: e.to_string() },
    });

    let small = ExperimentConfig {
        users: 8,
        aps: 16,
        rho: 2,
        tau_c: 40,
        drops: 4,
        blocks_per_drop: 1,
        stages: 3,
        schemes: vec![SchemeSpec::Mf, SchemeSpec::Mmse, SchemeSpec::JapsicMu { mu: 8 }],
        ..cfg
    };
    let runs: Vec<_> = [1, 3]
        .iter()
        .map(|&w| run_fig1_experiment(&ExperimentConfig { workers: w, ..small.clone() }))
        .collect();
    checks.push(match (&runs[0], &runs[1]) {
        (Ok(a), Ok(b)) => {
            let same = a.schemes.iter().zip(&b.schemes).all(|(x, y)| x.samples == y.samples);
            Check {
                name: "determinism across worker counts",
                passed: same,
                detail: format!("{} schemes x {} samples", a.schemes.len(), a.schemes[0].samples.len()),
            }
        }
        (Err(e), _) | (_, Err(e)) => Check { name: "determinism across worker counts", passed: false, detail: e.to_string() },
    });
    checks
}
