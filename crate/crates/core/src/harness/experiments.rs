//! Monte-Carlo drivers.
//!
//! Work is split by drop (Fig. 1) or by realization (Fig. 2). Each unit pulls
//! its randomness from streams keyed by its own index, and results are
//! gathered in index order, so the output does not depend on the worker count.

use rayon::prelude::*;

use super::cdf::{compute_cdf, mean, median, CdfPoint};
use super::config::{EstimationSetting, ExperimentConfig, SchemeSpec, SinrMode, ThetaScale};
use crate::geometry::{db_to_linear, generate_network, linear_to_db, realize_channel};
use crate::metrics::{
    backhaul_count, complexity_count, empirical_sinr_all, mmse_sinr_all, mmse_sinr_subset, per_user, prelog,
    realization_se, sinr_interference_free, sinr_japsic_limit, sinr_stage0, sinr_stage_l, ComplexityInputs,
    SchemeKind,
};
use crate::pilots::{assign_pilots, estimate_channels, ChannelEstimate, PilotAssignment, PilotPolicy};
use crate::receivers::{
    aggregate_error, draw_symbols, fic_detect, japsic_detect_with, japsic_mu_select, mf_detect, mmse_detect,
    mmse_sic_detect, sic_order, theta_select_powers, uc_detect, PicOptions, ReceivedBlock, SelectionSet,
};
use crate::rng::{stream, Purpose};
use crate::{CMatrix, Cplx, RMatrix, Result, SimError};

/// Noise power in the normalized units used throughout: every power is
/// divided by the thermal noise power.
const NOISE: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub spec: SchemeSpec,
    /// Sum SE of every evaluated block, in drop/block order.
    pub samples: Vec<f64>,
    pub median_se: f64,
    pub mean_se: f64,
    /// Mean number of APs combined per user.
    pub mean_aps: f64,
    pub cdf: Vec<CdfPoint>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config_hash: String,
    pub seed: u64,
    pub schemes: Vec<SchemeResult>,
    pub aborted_drops: usize,
}

impl RunOutput {
    pub fn scheme(&self, label: &str) -> Option<&SchemeResult> {
        self.schemes.iter().find(|s| s.spec.label() == label)
    }
}

/// One evaluated block: per-scheme sum SE and mean selection size.
#[derive(Debug, Clone)]
pub struct BlockOutcome {
    pub sum_se: Vec<f64>,
    pub mean_aps: Vec<f64>,
}

/// Everything drawn for one coherence block.
#[derive(Debug, Clone)]
pub struct BlockRealization {
    pub g: CMatrix,
    pub estimate: ChannelEstimate,
    pub rx: ReceivedBlock,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::config(format!("cannot start worker pool: {e}")))
}

/// Draw the channel, estimate, symbols and received samples of one block.
pub fn draw_block(
    cfg: &ExperimentConfig,
    beta: &RMatrix,
    pilots: &PilotAssignment,
    drop: u64,
    block: u64,
) -> Result<BlockRealization> {
    let seed = cfg.master_seed;
    let snr = cfg.tx_snr();
    let channel = realize_channel(beta, block as usize, &mut stream(seed, Purpose::Fading, drop, block));
    let estimate = estimate_channels(
        &channel,
        beta,
        pilots,
        cfg.estimation.model(),
        NOISE,
        snr,
        &mut stream(seed, Purpose::Estimation, drop, block),
    )?;
    let s = draw_symbols(cfg.users, cfg.data_symbols(), &mut stream(seed, Purpose::Symbols, drop, block));
    let powers = vec![snr; cfg.users];
    let rx = ReceivedBlock::transmit(&channel.g, s, &powers, NOISE, &mut stream(seed, Purpose::Noise, drop, block))?;
    Ok(BlockRealization { g: channel.g, estimate, rx })
}

fn theta_selection(g_hat: &CMatrix, theta: f64, scale: ThetaScale) -> Result<SelectionSet> {
    let mut power = g_hat.map(|v| v.norm_sqr());
    if scale == ThetaScale::Peak {
        for mut col in power.column_iter_mut() {
            let peak = col.max();
            if peak > 0.0 {
                col /= peak;
            }
        }
    }
    theta_select_powers(&power, theta)
}

fn scaled(g_hat: &CMatrix, powers: &[f64]) -> CMatrix {
    let mut out = g_hat.clone();
    for (mut col, p) in out.column_iter_mut().zip(powers) {
        col *= Cplx::new(p.sqrt(), 0.0);
    }
    out
}

/// Per-user SINR of one scheme on one block, plus the mean selection size.
pub fn scheme_sinr(cfg: &ExperimentConfig, spec: SchemeSpec, b: &BlockRealization) -> Result<(Vec<f64>, f64)> {
    let (g, g_hat, c_var) = (&b.g, &b.estimate.g_hat, &b.estimate.c_var);
    let (y, s_true, powers) = (&b.rx.y, &b.rx.s_true, &b.rx.powers[..]);
    let (aps, users) = g.shape();
    let full = SelectionSet::full(aps, users);
    let pic = PicOptions { stages: cfg.stages - 1, damping: cfg.pic_damping };

    let selection = match spec {
        SchemeSpec::Uc { mu } | SchemeSpec::JapsicMu { mu } => Some(japsic_mu_select(g_hat, mu)?),
        SchemeSpec::JapsicTheta { theta } => Some(theta_selection(g_hat, theta, cfg.theta_scale)?),
        _ => None,
    };
    let mean_aps = selection.as_ref().map_or(aps as f64, SelectionSet::mean_mu);
    let sel = selection.as_ref().unwrap_or(&full);

    let sinr = match cfg.sinr_mode {
        SinrMode::Formula => match spec {
            SchemeSpec::Mf | SchemeSpec::Uc { .. } => {
                per_user(sel, |k, ap| sinr_stage0(g, g_hat, ap, powers, NOISE, k))?
            }
            SchemeSpec::Fic => per_user(sel, |k, ap| sinr_interference_free(g, g_hat, ap, powers, NOISE, k))?,
            SchemeSpec::Mmse => mmse_sinr_all(&scaled(g_hat, powers), &aggregate_error(c_var, powers), NOISE, cfg.mmse_form)?,
            SchemeSpec::MmseSic => {
                let gs = scaled(g_hat, powers);
                let c_diag = aggregate_error(c_var, powers);
                let order = sic_order(g_hat, powers);
                let mut out = vec![0.0; users];
                for j in 0..users {
                    out[order[j]] = mmse_sinr_subset(&gs, &order[j..], &c_diag, NOISE, cfg.mmse_form)?[0];
                }
                out
            }
            SchemeSpec::JapsicMu { .. } | SchemeSpec::JapsicTheta { .. } => {
                if pic.stages == 0 {
                    per_user(sel, |k, ap| sinr_stage0(g, g_hat, ap, powers, NOISE, k))?
                } else {
                    let det = japsic_detect_with(y, g_hat, sel, powers, pic)?;
                    let prev = &det.stages[det.stages.len() - 2];
                    per_user(sel, |k, ap| sinr_stage_l(g, g_hat, ap, powers, NOISE, s_true, prev, k))?
                }
            }
        },
        SinrMode::Empirical => {
            let det = match spec {
                SchemeSpec::Mf => mf_detect(y, g_hat, powers)?,
                SchemeSpec::Uc { mu } => uc_detect(y, g_hat, powers, mu)?,
                SchemeSpec::Mmse => mmse_detect(y, g_hat, c_var, powers, NOISE)?,
                SchemeSpec::MmseSic => mmse_sic_detect(y, g_hat, c_var, powers, NOISE)?,
                SchemeSpec::JapsicMu { .. } | SchemeSpec::JapsicTheta { .. } => {
                    japsic_detect_with(y, g_hat, sel, powers, pic)?
                }
                SchemeSpec::Fic => fic_detect(y, g, g_hat, s_true, powers, None)?,
            };
            empirical_sinr_all(s_true, &det.s_soft)?
        }
    };
    Ok((sinr, mean_aps))
}

/// Evaluate every configured scheme on one block.
pub fn evaluate_block(cfg: &ExperimentConfig, b: &BlockRealization) -> Result<BlockOutcome> {
    let pre = prelog(cfg.tau_p(), cfg.tau_c)?;
    let mut sum_se = Vec::with_capacity(cfg.schemes.len());
    let mut mean_aps = Vec::with_capacity(cfg.schemes.len());
    for &spec in &cfg.schemes {
        let (sinr, aps) = scheme_sinr(cfg, spec, b)?;
        sum_se.push(realization_se(&sinr, pre));
        mean_aps.push(aps);
    }
    Ok(BlockOutcome { sum_se, mean_aps })
}

/// All blocks of one drop.
pub fn run_drop(cfg: &ExperimentConfig, drop: u64) -> Result<Vec<BlockOutcome>> {
    let seed = cfg.master_seed;
    let net = generate_network(
        cfg.area,
        cfg.users,
        cfg.aps,
        cfg.ap_layout,
        cfg.shadow_correlation,
        &mut stream(seed, Purpose::Placement, drop, 0),
        &mut stream(seed, Purpose::Shadowing, drop, 0),
    )?;
    let pilots = assign_pilots(cfg.users, cfg.tau_p(), cfg.pilot_policy, &mut stream(seed, Purpose::Pilots, drop, 0))?;
    (0..cfg.blocks_per_drop as u64)
        .map(|block| evaluate_block(cfg, &draw_block(cfg, &net.beta, &pilots, drop, block)?))
        .collect()
}

/// Sum-SE distributions of every configured scheme over random drops.
pub fn run_fig1_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let per_drop: Vec<Result<Vec<BlockOutcome>>> =
        pool(cfg.workers)?.install(|| (0..cfg.drops as u64).into_par_iter().map(|d| run_drop(cfg, d)).collect());

    let mut aborted = 0;
    let mut blocks = Vec::new();
    for (d, r) in per_drop.into_iter().enumerate() {
        match r {
            Ok(b) => blocks.extend(b),
            Err(e) => {
                log::warn!("drop {d} aborted: {e}");
                aborted += 1;
            }
        }
    }
    if aborted as f64 > 0.01 * cfg.drops as f64 {
        return Err(SimError::TooManyAborts { aborted, total: cfg.drops });
    }
    if blocks.is_empty() {
        return Err(SimError::Domain("no blocks evaluated".into()));
    }

    let schemes = cfg
        .schemes
        .iter()
        .enumerate()
        .map(|(i, &spec)| {
            let samples: Vec<f64> = blocks.iter().map(|b| b.sum_se[i]).collect();
            let aps: Vec<f64> = blocks.iter().map(|b| b.mean_aps[i]).collect();
            let cdf = if samples.len() >= 2 { compute_cdf(&samples, cfg.cdf_grid)? } else { Vec::new() };
            Ok(SchemeResult {
                spec,
                median_se: median(&samples)?,
                mean_se: mean(&samples)?,
                mean_aps: mean(&aps)?,
                samples,
                cdf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput { config_hash: cfg.hash(), seed: cfg.master_seed, schemes, aborted_drops: aborted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Row {
    pub scheme: String,
    pub snr_db: f64,
    pub sigma_c_db: f64,
    pub mean_sinr_db: f64,
}

#[derive(Debug, Clone)]
pub struct Fig2Output {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<Fig2Row>,
}

impl Fig2Output {
    pub fn value(&self, scheme: &str, sigma_c_db: f64, snr_db: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.sigma_c_db == sigma_c_db && r.snr_db == snr_db)
            .map(|r| r.mean_sinr_db)
    }
}

/// Mean closed-form SINR of MMSE and of fully converged JAPSIC over an SNR
/// grid, on i.i.d. unit-variance Rayleigh channels with a fixed estimation
/// error. Every SNR point reuses the same channel realizations.
pub fn run_fig2_experiment(cfg: &ExperimentConfig) -> Result<Fig2Output> {
    cfg.validate()?;
    let f = &cfg.fig2;
    let grid = f.snr_grid_db();
    let labels: Vec<String> = std::iter::once("mmse".to_string())
        .chain(f.mu.iter().map(|mu| SchemeSpec::JapsicMu { mu: *mu }.label()))
        .collect();
    let beta = RMatrix::from_element(f.aps, f.users, 1.0);
    let pilots = assign_pilots(f.users, 1, PilotPolicy::RoundRobin, &mut stream(cfg.master_seed, Purpose::Pilots, 0, 0))?;

    let mut rows = Vec::new();
    for (si, &sigma_c_db) in f.sigma_c_db.iter().enumerate() {
        let model = EstimationSetting::Fixed { sigma_c_db }.model();
        let one = |r: u64| -> Result<Vec<f64>> {
            let channel = realize_channel(&beta, 0, &mut stream(cfg.master_seed, Purpose::Sweep, r, 0));
            let est =
                estimate_channels(&channel, &beta, &pilots, model, NOISE, 1.0, &mut stream(cfg.master_seed, Purpose::Sweep, r, 1 + si as u64))?;
            let selections = f.mu.iter().map(|&mu| japsic_mu_select(&est.g_hat, mu)).collect::<Result<Vec<_>>>()?;
            // Sum over users of the SINR, laid out [snr][scheme].
            let mut acc = Vec::with_capacity(grid.len() * labels.len());
            for &snr_db in &grid {
                let p = db_to_linear(snr_db);
                let powers = vec![p; f.users];
                let gs = scaled(&est.g_hat, &powers);
                let c_scaled = &est.c_var * p;
                acc.push(mmse_sinr_all(&gs, &aggregate_error(&est.c_var, &powers), NOISE, cfg.mmse_form)?.iter().sum());
                for sel in &selections {
                    let v = per_user(sel, |k, ap| sinr_japsic_limit(&gs, &c_scaled, ap, NOISE, k, cfg.japsic_limit_form))?;
                    acc.push(v.iter().sum());
                }
            }
            Ok(acc)
        };
        let per_real: Vec<Vec<f64>> = pool(cfg.workers)?
            .install(|| (0..f.realizations as u64).into_par_iter().map(one).collect::<Result<Vec<_>>>())?;
        let denom = (f.realizations * f.users) as f64;
        for (gi, &snr_db) in grid.iter().enumerate() {
            for (li, label) in labels.iter().enumerate() {
                let idx = gi * labels.len() + li;
                let total: f64 = per_real.iter().map(|v| v[idx]).sum();
                rows.push(Fig2Row {
                    scheme: label.clone(),
                    snr_db,
                    sigma_c_db,
                    mean_sinr_db: linear_to_db(total / denom),
                });
            }
        }
    }
    Ok(Fig2Output { config_hash: cfg.hash(), seed: cfg.master_seed, rows })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityRow {
    pub scheme: SchemeKind,
    pub ops: u64,
    pub backhaul_scalars: u64,
    pub extra_scalars: u64,
}

/// Operation and backhaul counts of every tabulated scheme.
pub fn run_complexity_report(cfg: &ExperimentConfig) -> Result<Vec<ComplexityRow>> {
    let inputs = ComplexityInputs {
        users: cfg.users,
        aps: cfg.aps,
        mu: cfg.complexity.mu,
        mean_aps: cfg.complexity.mean_aps,
        stages: cfg.stages,
    };
    SchemeKind::TABULATED
        .iter()
        .map(|&scheme| {
            let ops = complexity_count(scheme, inputs)?.operation_count;
            let bh = backhaul_count(scheme, cfg.tau_c, cfg.users, cfg.aps);
            Ok(ComplexityRow {
                scheme,
                ops,
                backhaul_scalars: bh.scalars_per_coherence,
                extra_scalars: bh.extra_stat_scalars,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            users: 8,
            aps: 16,
            rho: 2,
            tau_c: 40,
            drops: 3,
            blocks_per_drop: 2,
            stages: 4,
            schemes: "mf, uc:8, mmse, mmse-sic, japsic-mu:8, japsic-theta:0.01, fic"
                .split(',')
                .map(|s| s.trim().parse().unwrap())
                .collect(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn fig1_shapes() {
        let out = run_fig1_experiment(&small()).unwrap();
        assert_eq!(out.schemes.len(), 7);
        for s in &out.schemes {
            assert_eq!(s.samples.len(), 6);
            assert!(s.samples.iter().all(|v| v.is_finite() && *v >= 0.0));
        }
        assert_eq!(out.scheme("mf").unwrap().mean_aps, 16.0);
        assert_eq!(out.scheme("uc:8").unwrap().mean_aps, 8.0);
    }

    #[test]
    fn genie_bound_beats_matched_filter() {
        let out = run_fig1_experiment(&small()).unwrap();
        let (mf, fic) = (out.scheme("mf").unwrap(), out.scheme("fic").unwrap());
        for (a, b) in mf.samples.iter().zip(&fic.samples) {
            assert!(b >= a);
        }
    }

    #[test]
    fn empirical_mode_runs() {
        let cfg = ExperimentConfig { sinr_mode: SinrMode::Empirical, drops: 1, ..small() };
        let out = run_fig1_experiment(&cfg).unwrap();
        assert!(out.schemes.iter().all(|s| s.mean_se > 0.0));
    }

    #[test]
    fn peak_theta_keeps_strongest() {
        let g = CMatrix::from_row_slice(3, 1, &[Cplx::new(1e-6, 0.0), Cplx::new(1e-5, 0.0), Cplx::new(2e-6, 0.0)]);
        let sel = theta_selection(&g, 0.03, ThetaScale::Peak).unwrap();
        assert_eq!(sel.indices[0], vec![1, 2]);
        let abs = theta_selection(&g, 0.03, ThetaScale::Absolute).unwrap();
        assert_eq!(abs.indices[0], vec![1]);
    }

    #[test]
    fn complexity_rows() {
        let rows = run_complexity_report(&ExperimentConfig::default()).unwrap();
        let ops: Vec<u64> = rows.iter().map(|r| r.ops).collect();
        assert_eq!(ops, vec![11_284_000, 568_000, 38_000, 38_664, 2_664, 4_000]);
        assert!(rows.iter().all(|r| r.backhaul_scalars == 20_000));
    }

    #[test]
    fn fig2_small_grid() {
        let mut cfg = ExperimentConfig::default();
        cfg.fig2.users = 6;
        cfg.fig2.aps = 12;
        cfg.fig2.realizations = 4;
        cfg.fig2.mu = vec![4];
        cfg.fig2.snr_db_min = 0.0;
        cfg.fig2.snr_db_max = 10.0;
        let out = run_fig2_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2 * 3 * 2);
        assert!(out.rows.iter().all(|r| r.mean_sinr_db.is_finite()));
        // More SNR never hurts either closed form.
        let a = out.value("japsic-mu:4", -20.0, 0.0).unwrap();
        let b = out.value("japsic-mu:4", -20.0, 10.0).unwrap();
        assert!(b > a);
    }
}
