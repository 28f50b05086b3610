//! Experiment configuration and its text format.
//!
//! The file is flat `key = value` text. `#` starts a comment. Section headers
//! (`[network]`, `[radio]`, ...) group keys for readability; only `[fig2]` and
//! `[complexity]` change meaning, since they hold the parameters of those
//! experiments. An empty file gives the default configuration.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::geometry::{db_to_linear, ApLayout, ShadowCorrelation, SimArea};
use crate::metrics::{JapsicLimitForm, MmseForm, SchemeKind};
use crate::pilots::{EstimationErrorModel, PilotPolicy};
use crate::{Result, SimError};

/// One detection scheme together with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    Mf,
    Uc { mu: usize },
    Mmse,
    MmseSic,
    JapsicMu { mu: usize },
    JapsicTheta { theta: f64 },
    Fic,
}

impl SchemeSpec {
    pub fn kind(&self) -> SchemeKind {
        match self {
            SchemeSpec::Mf => SchemeKind::Mf,
            SchemeSpec::Uc { .. } => SchemeKind::Uc,
            SchemeSpec::Mmse => SchemeKind::Mmse,
            SchemeSpec::MmseSic => SchemeKind::MmseSic,
            SchemeSpec::JapsicMu { .. } => SchemeKind::JapsicMu,
            SchemeSpec::JapsicTheta { .. } => SchemeKind::JapsicTheta,
            SchemeSpec::Fic => SchemeKind::Fic,
        }
    }

    /// Label used in CSV output, e.g. `japsic-mu:50`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Uc { mu } | SchemeSpec::JapsicMu { mu } => write!(f, "{}:{mu}", self.kind()),
            SchemeSpec::JapsicTheta { theta } => write!(f, "{}:{theta}", self.kind()),
            _ => write!(f, "{}", self.kind()),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p.trim())),
            None => (s, None),
        };
        let kind: SchemeKind = name.parse()?;
        let need = |what: &str| SimError::config(format!("scheme `{s}` needs a {what} parameter, e.g. `{name}:50`"));
        let mu = |p: Option<&str>| -> Result<usize> {
            p.ok_or_else(|| need("M_u"))?.parse().map_err(|_| SimError::config(format!("bad M_u in scheme `{s}`")))
        };
        let spec = match kind {
            SchemeKind::Mf => SchemeSpec::Mf,
            SchemeKind::Mmse => SchemeSpec::Mmse,
            SchemeKind::MmseSic => SchemeSpec::MmseSic,
            SchemeKind::Fic => SchemeSpec::Fic,
            SchemeKind::Uc => SchemeSpec::Uc { mu: mu(param)? },
            SchemeKind::JapsicMu => SchemeSpec::JapsicMu { mu: mu(param)? },
            SchemeKind::JapsicTheta => SchemeSpec::JapsicTheta {
                theta: param
                    .ok_or_else(|| need("theta"))?
                    .parse()
                    .map_err(|_| SimError::config(format!("bad theta in scheme `{s}`")))?,
            },
        };
        if !matches!(kind, SchemeKind::Uc | SchemeKind::JapsicMu | SchemeKind::JapsicTheta) && param.is_some() {
            return Err(SimError::config(format!("scheme `{name}` takes no parameter")));
        }
        Ok(spec)
    }
}

/// How the theta threshold is compared against `|g_hat|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaScale {
    /// Relative to each user's strongest estimated link.
    #[default]
    Peak,
    /// Directly against the raw channel gain.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrMode {
    /// Closed-form SINR per realization.
    #[default]
    Formula,
    /// Effective-gain SINR of simulated soft symbols.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimationSetting {
    Contamination,
    /// Fixed error variance, in dB relative to the channel gain unit.
    Fixed { sigma_c_db: f64 },
}

impl EstimationSetting {
    pub fn model(&self) -> EstimationErrorModel {
        match *self {
            EstimationSetting::Contamination => EstimationErrorModel::Contamination,
            EstimationSetting::Fixed { sigma_c_db } => EstimationErrorModel::Fixed { sigma_c_sq: db_to_linear(sigma_c_db) },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Config {
    pub users: usize,
    pub aps: usize,
    pub realizations: usize,
    pub snr_db_min: f64,
    pub snr_db_max: f64,
    pub snr_db_step: f64,
    pub sigma_c_db: Vec<f64>,
    pub mu: Vec<usize>,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Fig2Config {
            users: 80,
            aps: 100,
            realizations: 1000,
            snr_db_min: -30.0,
            snr_db_max: 30.0,
            snr_db_step: 5.0,
            sigma_c_db: vec![-20.0, -10.0],
            mu: vec![10, 50],
        }
    }
}

impl Fig2Config {
    pub fn snr_grid_db(&self) -> Vec<f64> {
        let n = ((self.snr_db_max - self.snr_db_min) / self.snr_db_step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.snr_db_min + i as f64 * self.snr_db_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityConfig {
    pub mu: usize,
    pub mean_aps: f64,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        ComplexityConfig { mu: 50, mean_aps: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub users: usize,
    pub aps: usize,
    pub area: SimArea,
    pub ap_layout: ApLayout,
    pub shadow_correlation: ShadowCorrelation,
    /// Transmit power per user, watts.
    pub p_k: f64,
    pub bandwidth: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub tau_c: usize,
    pub rho: usize,
    pub symbols_per_block: Option<usize>,
    pub estimation: EstimationSetting,
    pub pilot_policy: PilotPolicy,
    pub schemes: Vec<SchemeSpec>,
    /// Detection stages `L`, counting the initial matched filter.
    pub stages: usize,
    pub pic_damping: f64,
    pub theta_scale: ThetaScale,
    pub mmse_form: MmseForm,
    pub japsic_limit_form: JapsicLimitForm,
    pub sinr_mode: SinrMode,
    pub drops: usize,
    pub blocks_per_drop: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub cdf_grid: usize,
    pub fig2: Fig2Config,
    pub complexity: ComplexityConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            users: 40,
            aps: 100,
            area: SimArea::square_km(),
            ap_layout: ApLayout::Random,
            shadow_correlation: ShadowCorrelation::UserDistance,
            p_k: 0.1,
            bandwidth: 2e7,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 5.0,
            tau_c: 200,
            rho: 4,
            symbols_per_block: None,
            estimation: EstimationSetting::Contamination,
            pilot_policy: PilotPolicy::RoundRobin,
            schemes: default_schemes(),
            stages: 10,
            pic_damping: 1.0,
            theta_scale: ThetaScale::Peak,
            mmse_form: MmseForm::Corrected,
            japsic_limit_form: JapsicLimitForm::Aggregate,
            sinr_mode: SinrMode::Formula,
            drops: 50,
            blocks_per_drop: 2,
            master_seed: 1,
            workers: 0,
            cdf_grid: 200,
            fig2: Fig2Config::default(),
            complexity: ComplexityConfig::default(),
        }
    }
}

fn default_schemes() -> Vec<SchemeSpec> {
    vec![
        SchemeSpec::Mf,
        SchemeSpec::Uc { mu: 50 },
        SchemeSpec::Mmse,
        SchemeSpec::MmseSic,
        SchemeSpec::JapsicMu { mu: 10 },
        SchemeSpec::JapsicMu { mu: 50 },
        SchemeSpec::JapsicTheta { theta: 0.01 },
        SchemeSpec::JapsicTheta { theta: 0.0001 },
        SchemeSpec::Fic,
    ]
}

impl ExperimentConfig {
    pub fn tau_p(&self) -> usize {
        self.users / self.rho
    }

    pub fn data_symbols(&self) -> usize {
        self.symbols_per_block.unwrap_or(self.tau_c.saturating_sub(self.tau_p()))
    }

    /// Thermal noise power in watts.
    pub fn noise_power_w(&self) -> f64 {
        let dbm = self.noise_psd_dbm_hz + 10.0 * self.bandwidth.log10() + self.noise_figure_db;
        10f64.powf((dbm - 30.0) / 10.0)
    }

    /// Transmit power over noise power.
    pub fn tx_snr(&self) -> f64 {
        self.p_k / self.noise_power_w()
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("users", self.users),
            ("aps", self.aps),
            ("tau_c", self.tau_c),
            ("rho", self.rho),
            ("stages", self.stages),
            ("drops", self.drops),
            ("blocks_per_drop", self.blocks_per_drop),
            ("cdf_grid", self.cdf_grid),
            ("fig2.users", self.fig2.users),
            ("fig2.aps", self.fig2.aps),
            ("fig2.realizations", self.fig2.realizations),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(SimError::config(format!("{name} must be at least 1")));
        }
        if !self.users.is_multiple_of(self.rho) {
            return Err(SimError::config(format!("tau_p = K/rho must be integral, got K={} rho={}", self.users, self.rho)));
        }
        if self.tau_p() >= self.tau_c {
            return Err(SimError::config(format!("tau_p ({}) must be smaller than tau_c ({})", self.tau_p(), self.tau_c)));
        }
        if self.data_symbols() == 0 {
            return Err(SimError::config("symbols_per_block must be at least 1"));
        }
        self.area.validate()?;
        for (name, v) in [("p_k", self.p_k), ("bandwidth", self.bandwidth)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pic_damping > 0.0 && self.pic_damping <= 1.0) {
            return Err(SimError::config(format!("pic_damping must be in (0, 1], got {}", self.pic_damping)));
        }
        if self.schemes.is_empty() {
            return Err(SimError::config("at least one scheme is required"));
        }
        for s in &self.schemes {
            match *s {
                SchemeSpec::Uc { mu } | SchemeSpec::JapsicMu { mu } if mu == 0 || mu > self.aps => {
                    return Err(SimError::config(format!("{s}: M_u must be in 1..={}", self.aps)));
                }
                SchemeSpec::JapsicTheta { theta } if !(theta >= 0.0 && theta.is_finite()) => {
                    return Err(SimError::config(format!("{s}: theta must be finite and >= 0")));
                }
                _ => {}
            }
        }
        self.estimation.model().validate()?;
        if self.fig2.snr_db_step <= 0.0 || self.fig2.snr_db_max < self.fig2.snr_db_min {
            return Err(SimError::config("fig2 SNR grid needs step > 0 and max >= min"));
        }
        if self.fig2.mu.iter().any(|&m| m == 0 || m > self.fig2.aps) {
            return Err(SimError::config(format!("fig2.mu values must be in 1..={}", self.fig2.aps)));
        }
        if self.fig2.sigma_c_db.is_empty() || self.fig2.mu.is_empty() {
            return Err(SimError::config("fig2 needs at least one sigma_c_db and one mu value"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg = Self::parse_unvalidated(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse without the cross-field checks, for callers that apply further
    /// overrides before validating.
    pub fn parse_unvalidated(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| SimError::config(format!("line {}: {msg}", lineno + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_ascii_lowercase();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(at(format!("unknown section [{name}]")));
                }
                section = name;
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected key = value, got `{line}`")))?;
            let key = key.trim();
            let qualified = match section.as_str() {
                "fig2" | "complexity" => format!("{section}.{key}"),
                _ => key.to_string(),
            };
            cfg.set(&qualified, value.trim()).map_err(|e| at(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Set one field from its textual value. Keys of the `[fig2]` and
    /// `[complexity]` sections are prefixed, e.g. `fig2.users`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "users" => self.users = num(key, value)?,
            "aps" => self.aps = num(key, value)?,
            "area_width" => self.area.width = num(key, value)?,
            "area_height" => self.area.height = num(key, value)?,
            "ap_layout" => {
                self.ap_layout = match value {
                    "random" => ApLayout::Random,
                    "grid" => ApLayout::Grid,
                    _ => return Err(bad(key, value)),
                }
            }
            "shadow_correlation" => {
                self.shadow_correlation = match value {
                    "user-distance" => ShadowCorrelation::UserDistance,
                    "independent" => ShadowCorrelation::Independent,
                    _ => return Err(bad(key, value)),
                }
            }
            "p_k" => self.p_k = num(key, value)?,
            "bandwidth" => self.bandwidth = num(key, value)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = num(key, value)?,
            "noise_figure_db" => self.noise_figure_db = num(key, value)?,
            "tau_c" => self.tau_c = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "symbols_per_block" => {
                self.symbols_per_block = if value == "auto" { None } else { Some(num(key, value)?) }
            }
            "estimation" => {
                self.estimation = match value {
                    "contamination" => EstimationSetting::Contamination,
                    "fixed" => match self.estimation {
                        EstimationSetting::Fixed { .. } => self.estimation,
                        EstimationSetting::Contamination => EstimationSetting::Fixed { sigma_c_db: -20.0 },
                    },
                    _ => return Err(bad(key, value)),
                }
            }
            "sigma_c_db" => {
                let db = num(key, value)?;
                self.estimation = EstimationSetting::Fixed { sigma_c_db: db };
            }
            "pilot_policy" => {
                self.pilot_policy = match value {
                    "round-robin" => PilotPolicy::RoundRobin,
                    "random" => PilotPolicy::Random,
                    _ => return Err(bad(key, value)),
                }
            }
            "schemes" => self.schemes = list(value)?,
            "stages" => self.stages = num(key, value)?,
            "pic_damping" => self.pic_damping = num(key, value)?,
            "theta_scale" => {
                self.theta_scale = match value {
                    "peak" => ThetaScale::Peak,
                    "absolute" => ThetaScale::Absolute,
                    _ => return Err(bad(key, value)),
                }
            }
            "mmse_form" => {
                self.mmse_form = match value {
                    "corrected" => MmseForm::Corrected,
                    "literal" => MmseForm::Literal,
                    _ => return Err(bad(key, value)),
                }
            }
            "japsic_limit_form" => {
                self.japsic_limit_form = match value {
                    "aggregate" => JapsicLimitForm::Aggregate,
                    "per-ap" => JapsicLimitForm::PerAp,
                    _ => return Err(bad(key, value)),
                }
            }
            "sinr_mode" => {
                self.sinr_mode = match value {
                    "formula" => SinrMode::Formula,
                    "empirical" => SinrMode::Empirical,
                    _ => return Err(bad(key, value)),
                }
            }
            "drops" => self.drops = num(key, value)?,
            "blocks_per_drop" => self.blocks_per_drop = num(key, value)?,
            "master_seed" => self.master_seed = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "cdf_grid" => self.cdf_grid = num(key, value)?,
            "fig2.users" => self.fig2.users = num(key, value)?,
            "fig2.aps" => self.fig2.aps = num(key, value)?,
            "fig2.realizations" => self.fig2.realizations = num(key, value)?,
            "fig2.snr_db_min" => self.fig2.snr_db_min = num(key, value)?,
            "fig2.snr_db_max" => self.fig2.snr_db_max = num(key, value)?,
            "fig2.snr_db_step" => self.fig2.snr_db_step = num(key, value)?,
            "fig2.sigma_c_db" => self.fig2.sigma_c_db = list(value)?,
            "fig2.mu" => self.fig2.mu = list(value)?,
            "complexity.mu" => self.complexity.mu = num(key, value)?,
            "complexity.mean_aps" => self.complexity.mean_aps = num(key, value)?,
            _ => return Err(SimError::config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Canonical text form. Parsing it gives back an equal config, and its
    /// SHA-256 identifies the run in CSV headers.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let estimation = match self.estimation {
            EstimationSetting::Contamination => "estimation = contamination\n".to_string(),
            EstimationSetting::Fixed { sigma_c_db } => format!("estimation = fixed\nsigma_c_db = {sigma_c_db}\n"),
        };
        let _ = write!(
            s,
            "[network]\nusers = {}\naps = {}\narea_width = {}\narea_height = {}\nap_layout = {}\nshadow_correlation = {}\n\n",
            self.users,
            self.aps,
            self.area.width,
            self.area.height,
            match self.ap_layout {
                ApLayout::Random => "random",
                ApLayout::Grid => "grid",
            },
            match self.shadow_correlation {
                ShadowCorrelation::UserDistance => "user-distance",
                ShadowCorrelation::Independent => "independent",
            },
        );
        let _ = write!(
            s,
            "[radio]\np_k = {}\nbandwidth = {}\nnoise_psd_dbm_hz = {}\nnoise_figure_db = {}\n\n",
            self.p_k, self.bandwidth, self.noise_psd_dbm_hz, self.noise_figure_db
        );
        let _ = write!(
            s,
            "[frame]\ntau_c = {}\nrho = {}\nsymbols_per_block = {}\n\n",
            self.tau_c,
            self.rho,
            self.symbols_per_block.map_or("auto".to_string(), |v| v.to_string())
        );
        let _ = write!(
            s,
            "[estimation]\n{estimation}pilot_policy = {}\n\n",
            match self.pilot_policy {
                PilotPolicy::RoundRobin => "round-robin",
                PilotPolicy::Random => "random",
            }
        );
        let _ = write!(
            s,
            "[detection]\nschemes = {}\nstages = {}\npic_damping = {}\ntheta_scale = {}\nmmse_form = {}\njapsic_limit_form = {}\nsinr_mode = {}\n\n",
            join(&self.schemes),
            self.stages,
            self.pic_damping,
            match self.theta_scale {
                ThetaScale::Peak => "peak",
                ThetaScale::Absolute => "absolute",
            },
            match self.mmse_form {
                MmseForm::Corrected => "corrected",
                MmseForm::Literal => "literal",
            },
            match self.japsic_limit_form {
                JapsicLimitForm::Aggregate => "aggregate",
                JapsicLimitForm::PerAp => "per-ap",
            },
            match self.sinr_mode {
                SinrMode::Formula => "formula",
                SinrMode::Empirical => "empirical",
            },
        );
        let _ = write!(
            s,
            "[run]\ndrops = {}\nblocks_per_drop = {}\nmaster_seed = {}\nworkers = {}\ncdf_grid = {}\n\n",
            self.drops, self.blocks_per_drop, self.master_seed, self.workers, self.cdf_grid
        );
        let f = &self.fig2;
        let _ = write!(
            s,
            "[fig2]\nusers = {}\naps = {}\nrealizations = {}\nsnr_db_min = {}\nsnr_db_max = {}\nsnr_db_step = {}\nsigma_c_db = {}\nmu = {}\n\n",
            f.users,
            f.aps,
            f.realizations,
            f.snr_db_min,
            f.snr_db_max,
            f.snr_db_step,
            join(&f.sigma_c_db),
            join(&f.mu)
        );
        let _ = write!(s, "[complexity]\nmu = {}\nmean_aps = {}\n", self.complexity.mu, self.complexity.mean_aps);
        s
    }

    /// Hex SHA-256 of [`to_config_string`](Self::to_config_string).
    /// The worker count is left out because it never changes results.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { workers: 0, ..self.clone() }.to_config_string();
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

const SECTIONS: [&str; 8] = ["network", "radio", "frame", "estimation", "detection", "run", "fig2", "complexity"];

fn bad(key: &str, value: &str) -> SimError {
    SimError::config(format!("invalid value `{value}` for `{key}`"))
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|e| SimError::config(format!("bad list entry `{v}`: {e}"))))
        .collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.tau_p(), 10);
        assert_eq!(cfg.data_symbols(), 190);
    }

    #[test]
    fn noise_power_of_defaults() {
        // -174 + 73.01 + 5 dBm
        let cfg = ExperimentConfig::default();
        let dbm = 10.0 * (cfg.noise_power_w() * 1e3).log10();
        assert!((dbm - (-95.9897)).abs() < 1e-3, "{dbm}");
        assert!((cfg.noise_power_w() / 2.518e-13 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = ExperimentConfig {
            estimation: EstimationSetting::Fixed { sigma_c_db: -13.5 },
            symbols_per_block: Some(64),
            schemes: vec![SchemeSpec::JapsicTheta { theta: 0.0001 }, SchemeSpec::Uc { mu: 7 }],
            ..ExperimentConfig::default()
        };
        cfg.fig2.sigma_c_db = vec![-30.0];
        let back = ExperimentConfig::parse(&cfg.to_config_string()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn sections_scope_fig2_keys() {
        let cfg = ExperimentConfig::parse("users = 8\n[fig2]\nusers = 12 # comment\nmu = 5\n[run]\ndrops=3\n").unwrap();
        assert_eq!(cfg.users, 8);
        assert_eq!(cfg.fig2.users, 12);
        assert_eq!(cfg.fig2.mu, vec![5]);
        assert_eq!(cfg.drops, 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("[nope]\n").is_err());
        assert!(ExperimentConfig::parse("colour = red\n").is_err());
        assert!(ExperimentConfig::parse("users = 41\n").is_err(), "K/rho not integral");
        assert!(ExperimentConfig::parse("schemes = zf\n").is_err());
        assert!(ExperimentConfig::parse("schemes = uc\n").is_err(), "missing M_u");
        assert!(ExperimentConfig::parse("schemes = japsic-mu:101\n").is_err());
        assert!(ExperimentConfig::parse("users\n").is_err());
    }

    #[test]
    fn hash_tracks_results_not_workers() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { workers: 8, ..a.clone() };
        let c = ExperimentConfig { master_seed: 2, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn scheme_labels_round_trip() {
        for s in default_schemes() {
            assert_eq!(s.label().parse::<SchemeSpec>().unwrap(), s);
        }
    }

    #[test]
    fn snr_grid() {
        let g = Fig2Config::default().snr_grid_db();
        assert_eq!(g.len(), 13);
        assert_eq!((g[0], g[12]), (-30.0, 30.0));
    }
}
