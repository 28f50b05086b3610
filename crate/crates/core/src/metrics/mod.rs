//! SINR expressions, sum spectral efficiency, operation counts and backhaul
//! accounting.

mod complexity;
mod sinr;

pub use complexity::{backhaul_count, complexity_count, BackhaulReport, ComplexityInputs, ComplexityReport, SchemeKind};
pub use sinr::{
    empirical_sinr, empirical_sinr_all, mmse_sinr_all, mmse_sinr_subset, per_user, sinr_interference_free,
    sinr_japsic_limit, sinr_mmse_closed, sinr_stage0, sinr_stage_l, sinr_stage_l_with, JapsicLimitForm, MmseForm,
    SinrMethod, SinrReport, StageNumerator,
};

use crate::{Result, SimError};

/// Sentinel for SINRs that are numerically unbounded (noise-free cases).
pub const SINR_CAP: f64 = 1e12;

/// Sum spectral efficiency over a set of realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSe {
    /// `sum_k (1 - tau_p/tau_c) E[log2(1 + SINR_k)]`, bits/s/Hz.
    pub mean: f64,
    /// Sum SE of each realization, for CDFs.
    pub per_realization: Vec<f64>,
}

/// Pre-log factor `1 - tau_p / tau_c`.
pub fn prelog(tau_p: usize, tau_c: usize) -> Result<f64> {
    if tau_p >= tau_c {
        return Err(SimError::config(format!("tau_p ({tau_p}) must be smaller than tau_c ({tau_c})")));
    }
    Ok(1.0 - tau_p as f64 / tau_c as f64)
}

/// Sum SE of one realization from its per-user SINRs.
pub fn realization_se(per_user_sinr: &[f64], prelog: f64) -> f64 {
    per_user_sinr.iter().map(|g| prelog * (1.0 + g).log2()).sum()
}

/// `samples[r][k]` is user `k`'s SINR in realization `r`.
pub fn sum_se(samples: &[Vec<f64>], tau_p: usize, tau_c: usize) -> Result<SumSe> {
    let pre = prelog(tau_p, tau_c)?;
    let per_realization: Vec<f64> = samples.iter().map(|r| realization_se(r, pre)).collect();
    let mean = if per_realization.is_empty() {
        0.0
    } else {
        per_realization.iter().sum::<f64>() / per_realization.len() as f64
    };
    Ok(SumSe { mean, per_realization })
}
