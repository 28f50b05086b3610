//! JAPSIC: AP selection combined with multistage parallel interference
//! cancellation.
//!
//! Stage 0 is matched filtering over each user's selected APs. Every later
//! stage rebuilds all other users' signals from the previous stage's
//! normalized estimates, subtracts them from the raw data on the target user's
//! selected APs and matched-filters again:
//!
//! ```text
//! Psi_k      = sum_{i != k} sqrt(p_i) s~_i^{l-1} g_hat_{i, iota_k}
//! s_k^l      = g_hat_{k, iota_k}^H (y_{iota_k} - Psi_k)
//! s~_k^l     = s_k^l / (sqrt(p_k) sum_{m in iota_k} |g_hat_{k,m}|^2)
//! ```
//!
//! Since `g_hat_k^H (y - Psi_k) = g_hat_k^H y - sum_i (g_hat_k^H g_hat_i) sqrt(p_i) s~_i`,
//! a stage reduces to one product with the selection-restricted Gram matrix,
//! which [`PicSystem`] precomputes once per block.

use super::{check_dims, combine_row, selected_energy, DetectionResult, SelectionSet};
use crate::{CMatrix, Cplx, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicOptions {
    /// Number of cancellation stages after the initial matched filter.
    pub stages: usize,
    /// Weight of the fresh estimate when blending with the previous stage.
    /// `1.0` is plain PIC.
    pub damping: f64,
}

impl Default for PicOptions {
    fn default() -> Self {
        PicOptions { stages: 10, damping: 1.0 }
    }
}

/// Per-block quantities shared by all stages.
#[derive(Debug, Clone)]
pub struct PicSystem {
    /// `z[(k, t)] = g_hat_{k, iota_k}^H y_{iota_k}(t)`.
    matched: CMatrix,
    /// `gram[(k, i)] = g_hat_{k, iota_k}^H g_hat_{i, iota_k}`; the diagonal holds the selected energy.
    gram: CMatrix,
    /// `sqrt(p_k) E_k`, zero for undetectable users.
    norm: Vec<f64>,
    sqrt_p: Vec<f64>,
}

impl PicSystem {
    pub fn new(y: &CMatrix, g_hat: &CMatrix, selection: &SelectionSet, powers: &[f64]) -> Result<Self> {
        check_dims(y, g_hat, powers)?;
        let (m, k_users) = g_hat.shape();
        selection.validate(m, k_users)?;
        let t = y.ncols();

        let mut matched = CMatrix::zeros(k_users, t);
        let mut gram = CMatrix::zeros(k_users, k_users);
        let mut norm = vec![0.0; k_users];
        let mut row = vec![Cplx::new(0.0, 0.0); t];
        for k in 0..k_users {
            let aps = &selection.indices[k];
            combine_row(g_hat, y, k, aps, &mut row);
            for (ti, v) in row.iter().enumerate() {
                matched[(k, ti)] = *v;
            }
            for i in 0..k_users {
                gram[(k, i)] = aps.iter().map(|&mi| g_hat[(mi, k)].conj() * g_hat[(mi, i)]).sum();
            }
            let energy = selected_energy(g_hat, k, aps);
            if energy > 0.0 && powers[k] > 0.0 {
                norm[k] = powers[k].sqrt() * energy;
            }
        }
        let sqrt_p = powers.iter().map(|p| p.sqrt()).collect();
        Ok(PicSystem { matched, gram, norm, sqrt_p })
    }

    pub fn users(&self) -> usize {
        self.norm.len()
    }

    fn normalize(&self, raw: &CMatrix) -> CMatrix {
        let mut out = raw.clone();
        for (k, &n) in self.norm.iter().enumerate() {
            let mut r = out.row_mut(k);
            if n > 0.0 {
                r /= Cplx::new(n, 0.0);
            } else {
                r.fill(Cplx::new(0.0, 0.0));
            }
        }
        out
    }

    /// Normalized stage-0 (matched filter) estimates.
    pub fn initial(&self) -> CMatrix {
        self.normalize(&self.matched)
    }

    /// One cancellation stage from the previous stage's normalized estimates.
    /// Each user's output depends only on `prev`, never on other outputs of
    /// the same stage.
    pub fn stage(&self, prev: &CMatrix) -> CMatrix {
        let k_users = self.users();
        let mut amp = prev.clone();
        for (k, &a) in self.sqrt_p.iter().enumerate() {
            amp.row_mut(k).scale_mut(a);
        }
        let mut cross = self.gram.clone();
        for k in 0..k_users {
            cross[(k, k)] = Cplx::new(0.0, 0.0);
        }
        let raw = &self.matched - cross * amp;
        self.normalize(&raw)
    }

    pub fn undetectable(&self) -> Vec<bool> {
        self.norm.iter().map(|&n| n == 0.0).collect()
    }
}

/// A single cancellation stage from explicit previous-stage estimates.
pub fn pic_stage(
    y: &CMatrix,
    g_hat: &CMatrix,
    selection: &SelectionSet,
    powers: &[f64],
    prev: &CMatrix,
) -> Result<CMatrix> {
    let sys = PicSystem::new(y, g_hat, selection, powers)?;
    if prev.shape() != (g_hat.ncols(), y.ncols()) {
        return Err(SimError::dim("previous-stage estimates must be K x T"));
    }
    Ok(sys.stage(prev))
}

/// Plain JAPSIC with `stages` cancellation stages.
pub fn japsic_detect(
    y: &CMatrix,
    g_hat: &CMatrix,
    selection: &SelectionSet,
    powers: &[f64],
    stages: usize,
) -> Result<DetectionResult> {
    japsic_detect_with(y, g_hat, selection, powers, PicOptions { stages, damping: 1.0 })
}

pub fn japsic_detect_with(
    y: &CMatrix,
    g_hat: &CMatrix,
    selection: &SelectionSet,
    powers: &[f64],
    opts: PicOptions,
) -> Result<DetectionResult> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(SimError::config(format!("PIC damping must be in (0, 1], got {}", opts.damping)));
    }
    let sys = PicSystem::new(y, g_hat, selection, powers)?;
    let mut stages = Vec::with_capacity(opts.stages + 1);
    stages.push(sys.initial());
    for _ in 0..opts.stages {
        let prev = stages.last().expect("stage 0 is always present");
        let mut next = sys.stage(prev);
        if opts.damping < 1.0 {
            next = next * Cplx::new(opts.damping, 0.0) + prev * Cplx::new(1.0 - opts.damping, 0.0);
        }
        stages.push(next);
    }
    let s_soft = stages.last().cloned().expect("stage 0 is always present");
    Ok(DetectionResult {
        s_soft,
        stages,
        stages_used: opts.stages,
        selection: Some(selection.clone()),
        undetectable: sys.undetectable(),
        per_user_sinr: None,
    })
}
