//! Per-detection-cycle operation counts (complex multiplications/divisions,
//! additions ignored) and backhaul signalling.

use std::fmt;
use std::str::FromStr;

use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Mf,
    Uc,
    Mmse,
    MmseSic,
    JapsicTheta,
    JapsicMu,
    /// Genie bound; has no operation count.
    Fic,
}

impl SchemeKind {
    pub const TABULATED: [SchemeKind; 6] = [
        SchemeKind::MmseSic,
        SchemeKind::Mmse,
        SchemeKind::JapsicTheta,
        SchemeKind::JapsicMu,
        SchemeKind::Uc,
        SchemeKind::Mf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Mf => "mf",
            SchemeKind::Uc => "uc",
            SchemeKind::Mmse => "mmse",
            SchemeKind::MmseSic => "mmse-sic",
            SchemeKind::JapsicTheta => "japsic-theta",
            SchemeKind::JapsicMu => "japsic-mu",
            SchemeKind::Fic => "fic",
        }
    }

    pub fn is_mmse(&self) -> bool {
        matches!(self, SchemeKind::Mmse | SchemeKind::MmseSic)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match norm.as_str() {
            "mf" => SchemeKind::Mf,
            "uc" => SchemeKind::Uc,
            "mmse" => SchemeKind::Mmse,
            "mmse-sic" | "mmsesic" => SchemeKind::MmseSic,
            "japsic-theta" | "japsic-θ" => SchemeKind::JapsicTheta,
            "japsic-mu" | "japsic-mu-u" => SchemeKind::JapsicMu,
            "fic" | "f-ic" => SchemeKind::Fic,
            _ => return Err(SimError::UnsupportedScheme(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityInputs {
    pub users: usize,
    pub aps: usize,
    /// Fixed selection size `M_u` (UC, JAPSIC M_u).
    pub mu: usize,
    /// Mean selection size (JAPSIC theta); may be fractional.
    pub mean_aps: f64,
    /// Detection stages including the initial matched filter.
    pub stages: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub scheme: SchemeKind,
    pub inputs: ComplexityInputs,
    pub operation_count: u64,
}

fn ranking_cost(aps: f64) -> f64 {
    if aps > 1.0 {
        aps * aps.log2()
    } else {
        0.0
    }
}

pub fn complexity_count(scheme: SchemeKind, inputs: ComplexityInputs) -> Result<ComplexityReport> {
    let k = inputs.users as f64;
    let m = inputs.aps as f64;
    let mu = inputs.mu as f64;
    let mean = inputs.mean_aps;
    let extra_stages = inputs.stages.saturating_sub(1) as f64;
    if !(mean >= 0.0) {
        return Err(SimError::config(format!("mean selection size must be >= 0, got {mean}")));
    }
    let mmse_core = k * ((m * m + k * m) + m);
    let ops = match scheme {
        SchemeKind::Mmse => k * m + mmse_core,
        SchemeKind::MmseSic => k * m + (k / 2.0) * mmse_core,
        SchemeKind::JapsicTheta => k * mean + extra_stages * 2.0 * k * mean,
        SchemeKind::JapsicMu => k * mu + extra_stages * 2.0 * k * mu + ranking_cost(m),
        SchemeKind::Uc => k * mu + ranking_cost(m),
        SchemeKind::Mf => k * m,
        SchemeKind::Fic => return Err(SimError::UnsupportedScheme("F-IC has no operation count".into())),
    };
    Ok(ComplexityReport { scheme, inputs, operation_count: ops.round() as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackhaulReport {
    pub scheme: SchemeKind,
    /// Complex samples forwarded by all APs per coherence block.
    pub scalars_per_coherence: u64,
    /// Channel statistics MMSE schemes additionally need at the CPU.
    pub extra_stat_scalars: u64,
}

pub fn backhaul_count(scheme: SchemeKind, tau_c: usize, users: usize, aps: usize) -> BackhaulReport {
    let extra = if scheme.is_mmse() { (users * aps / 2) as u64 } else { 0 };
    BackhaulReport { scheme, scalars_per_coherence: (tau_c * aps) as u64, extra_stat_scalars: extra }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ComplexityInputs {
        ComplexityInputs { users: 40, aps: 100, mu: 50, mean_aps: 50.0, stages: 10 }
    }

    fn ops(s: SchemeKind) -> u64 {
        complexity_count(s, reference()).unwrap().operation_count
    }

    #[test]
    fn reference_numbers() {
        assert_eq!(ops(SchemeKind::Mmse), 568_000);
        assert_eq!(ops(SchemeKind::MmseSic), 11_284_000);
        assert_eq!(ops(SchemeKind::JapsicTheta), 38_000);
        assert_eq!(ops(SchemeKind::Mf), 4_000);
        assert_eq!(ops(SchemeKind::JapsicMu), 38_664);
        assert_eq!(ops(SchemeKind::Uc), 2_664);
    }

    #[test]
    fn fic_and_unknown_schemes_are_errors() {
        assert!(complexity_count(SchemeKind::Fic, reference()).is_err());
        assert!(matches!("zf".parse::<SchemeKind>(), Err(SimError::UnsupportedScheme(_))));
        assert_eq!("MMSE_SIC".parse::<SchemeKind>().unwrap(), SchemeKind::MmseSic);
    }

    #[test]
    fn fractional_mean_selection() {
        let inputs = ComplexityInputs { mean_aps: 10.55, ..reference() };
        let r = complexity_count(SchemeKind::JapsicTheta, inputs).unwrap();
        assert_eq!(r.operation_count, (40.0f64 * 10.55 * 19.0).round() as u64);
    }

    #[test]
    fn backhaul_numbers() {
        let j = backhaul_count(SchemeKind::JapsicMu, 200, 40, 100);
        assert_eq!((j.scalars_per_coherence, j.extra_stat_scalars), (20_000, 0));
        let m = backhaul_count(SchemeKind::Mmse, 200, 40, 100);
        assert_eq!((m.scalars_per_coherence, m.extra_stat_scalars), (20_000, 2_000));
        let e = backhaul_count(SchemeKind::Mf, 200, 40, 0);
        assert_eq!((e.scalars_per_coherence, e.extra_stat_scalars), (0, 0));
    }
}
