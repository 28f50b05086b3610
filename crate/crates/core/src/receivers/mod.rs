//! Uplink detection schemes operating on the raw per-AP samples collected at
//! the CPU.
//!
//! All detectors return amplitude-normalized soft symbols, so for a clean
//! channel `s_soft` approaches `s_true`. Powers and noise may be given in any
//! consistent unit; the harness works in SNR units (everything divided by the
//! thermal noise power).

mod linear;
pub mod opcount;
mod pic;
mod selection;

pub use linear::{aggregate_error, mmse_detect, mmse_sic_detect, mmse_weights, sic_order};
pub(crate) use linear::hermitian_solve as linear_solve;
pub use pic::{japsic_detect, japsic_detect_with, pic_stage, PicOptions, PicSystem};
pub use selection::{
    japsic_mu_select, japsic_theta_select, mean_aps_selected, mu_select_powers, theta_select_powers, SelectionSet,
};

use rand::Rng;

use crate::rng::complex_normal;
use crate::{CMatrix, Cplx, Result, SimError};

/// Samples received over one block of data symbols.
#[derive(Debug, Clone)]
pub struct ReceivedBlock {
    /// `M x T`, one column per symbol period.
    pub y: CMatrix,
    /// `K x T` transmitted symbols.
    pub s_true: CMatrix,
    pub powers: Vec<f64>,
}

impl ReceivedBlock {
    /// `y = sum_k sqrt(p_k) g_k s_k + z`, `z ~ CN(0, noise_power)`.
    pub fn transmit<R: Rng + ?Sized>(
        g: &CMatrix,
        s_true: CMatrix,
        powers: &[f64],
        noise_power: f64,
        noise_rng: &mut R,
    ) -> Result<Self> {
        let (m, k) = g.shape();
        if s_true.nrows() != k || powers.len() != k {
            return Err(SimError::dim(format!(
                "channel has {k} users but symbols have {} rows and {} powers were given",
                s_true.nrows(),
                powers.len()
            )));
        }
        let t = s_true.ncols();
        let mut scaled = g.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(powers) {
            col.scale_mut(p.sqrt());
        }
        let mut y = scaled * &s_true;
        if noise_power > 0.0 {
            for ti in 0..t {
                for mi in 0..m {
                    y[(mi, ti)] += complex_normal(noise_rng, noise_power);
                }
            }
        }
        Ok(ReceivedBlock { y, s_true, powers: powers.to_vec() })
    }

    pub fn symbols(&self) -> usize {
        self.y.ncols()
    }
}

/// Unit-power complex Gaussian data symbols, `K x T`.
pub fn draw_symbols<R: Rng + ?Sized>(users: usize, symbols: usize, rng: &mut R) -> CMatrix {
    let mut s = CMatrix::zeros(users, symbols);
    for t in 0..symbols {
        for k in 0..users {
            s[(k, t)] = complex_normal(rng, 1.0);
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// `K x T` normalized soft symbols of the final stage.
    pub s_soft: CMatrix,
    /// Per-stage normalized estimates (stage 0 first). Empty for single-shot schemes.
    pub stages: Vec<CMatrix>,
    pub stages_used: usize,
    pub selection: Option<SelectionSet>,
    /// Users whose combining vector vanished; their soft symbols are zero.
    pub undetectable: Vec<bool>,
    pub per_user_sinr: Option<Vec<f64>>,
}

impl DetectionResult {
    fn single(s_soft: CMatrix, selection: Option<SelectionSet>, undetectable: Vec<bool>) -> Self {
        DetectionResult { s_soft, stages: Vec::new(), stages_used: 0, selection, undetectable, per_user_sinr: None }
    }
}

pub(crate) fn check_dims(y: &CMatrix, g_hat: &CMatrix, powers: &[f64]) -> Result<()> {
    if y.nrows() != g_hat.nrows() {
        return Err(SimError::dim(format!("y has {} rows but g_hat has {} APs", y.nrows(), g_hat.nrows())));
    }
    if powers.len() != g_hat.ncols() {
        return Err(SimError::dim(format!("{} powers for {} users", powers.len(), g_hat.ncols())));
    }
    Ok(())
}

/// Selected-AP channel energy `sum_{m in iota_k} |g_hat_{k,m}|^2`.
pub(crate) fn selected_energy(g_hat: &CMatrix, k: usize, aps: &[usize]) -> f64 {
    aps.iter().map(|&m| g_hat[(m, k)].norm_sqr()).sum()
}

/// Conjugate combining of `data` (rows = APs) over user `k`'s selected APs.
pub(crate) fn combine_row(g_hat: &CMatrix, data: &CMatrix, k: usize, aps: &[usize], out: &mut [Cplx]) {
    for (t, o) in out.iter_mut().enumerate() {
        *o = aps.iter().map(|&m| g_hat[(m, k)].conj() * data[(m, t)]).sum();
    }
}

/// Matched filtering over a selection, normalized by `sqrt(p_k) * E_k`.
pub(crate) fn matched_filter(
    y: &CMatrix,
    g_hat: &CMatrix,
    powers: &[f64],
    selection: &SelectionSet,
) -> (CMatrix, Vec<bool>) {
    let (k_users, t) = (g_hat.ncols(), y.ncols());
    let mut s = CMatrix::zeros(k_users, t);
    let mut undetectable = vec![false; k_users];
    let mut row = vec![Cplx::new(0.0, 0.0); t];
    for k in 0..k_users {
        let aps = &selection.indices[k];
        let energy = selected_energy(g_hat, k, aps);
        if energy <= 0.0 || powers[k] <= 0.0 {
            undetectable[k] = true;
            continue;
        }
        combine_row(g_hat, y, k, aps, &mut row);
        let norm = powers[k].sqrt() * energy;
        for (ti, v) in row.iter().enumerate() {
            s[(k, ti)] = v / norm;
        }
    }
    (s, undetectable)
}

/// Matched filter over all APs.
pub fn mf_detect(y: &CMatrix, g_hat: &CMatrix, powers: &[f64]) -> Result<DetectionResult> {
    check_dims(y, g_hat, powers)?;
    let sel = SelectionSet::full(g_hat.nrows(), g_hat.ncols());
    let (s, undetectable) = matched_filter(y, g_hat, powers, &sel);
    Ok(DetectionResult::single(s, None, undetectable))
}

/// User-centric MF: each user combines only its `mu` strongest APs.
pub fn uc_detect(y: &CMatrix, g_hat: &CMatrix, powers: &[f64], mu: usize) -> Result<DetectionResult> {
    check_dims(y, g_hat, powers)?;
    let sel = japsic_mu_select(g_hat, mu)?;
    let (s, undetectable) = matched_filter(y, g_hat, powers, &sel);
    Ok(DetectionResult::single(s, Some(sel), undetectable))
}

/// Genie-aided full interference cancellation: every other user's true
/// contribution is removed before matched filtering with `g_hat`.
pub fn fic_detect(
    y: &CMatrix,
    g_true: &CMatrix,
    g_hat: &CMatrix,
    s_true: &CMatrix,
    powers: &[f64],
    selection: Option<&SelectionSet>,
) -> Result<DetectionResult> {
    check_dims(y, g_hat, powers)?;
    if g_true.shape() != g_hat.shape() || s_true.shape() != (g_hat.ncols(), y.ncols()) {
        return Err(SimError::dim("F-IC needs matching true channel and symbol matrices"));
    }
    let (m, k_users) = g_true.shape();
    let full = SelectionSet::full(m, k_users);
    let sel = selection.unwrap_or(&full);
    sel.validate(m, k_users)?;

    let mut scaled = g_true.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(powers) {
        col.scale_mut(p.sqrt());
    }
    // Residual after removing everybody; each user's own term is added back.
    let residual = y - &scaled * s_true;

    let t = y.ncols();
    let mut s = CMatrix::zeros(k_users, t);
    let mut undetectable = vec![false; k_users];
    for k in 0..k_users {
        let aps = &sel.indices[k];
        let energy = selected_energy(g_hat, k, aps);
        if energy <= 0.0 || powers[k] <= 0.0 {
            undetectable[k] = true;
            continue;
        }
        let own: Cplx = aps.iter().map(|&mi| g_hat[(mi, k)].conj() * scaled[(mi, k)]).sum();
        let norm = powers[k].sqrt() * energy;
        for ti in 0..t {
            let stat: Cplx = aps.iter().map(|&mi| g_hat[(mi, k)].conj() * residual[(mi, ti)]).sum::<Cplx>()
                + own * s_true[(k, ti)];
            s[(k, ti)] = stat / norm;
        }
    }
    Ok(DetectionResult::single(s, selection.cloned(), undetectable))
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::RMatrix;

    #[test]
    fn mf_identity_channel() {
        let g = CMatrix::from_element(1, 1, Cplx::new(1.0, 0.0));
        let s = CMatrix::from_row_slice(1, 3, &[Cplx::new(1.0, 0.5), Cplx::new(-0.3, 0.0), Cplx::new(0.0, 2.0)]);
        let rx = ReceivedBlock { y: s.clone(), s_true: s.clone(), powers: vec![1.0] };
        let out = mf_detect(&rx.y, &g, &rx.powers).unwrap();
        assert!(max_abs_diff(&out.s_soft, &s) < 1e-15);
    }

    #[test]
    fn mf_two_ap_conjugate_combining() {
        let g = CMatrix::from_column_slice(2, 1, &[Cplx::new(1.0, 0.0), Cplx::new(0.0, 1.0)]);
        let p: f64 = 4.0;
        let sym = Cplx::new(0.7, -0.2);
        let y = &g * Cplx::new(p.sqrt(), 0.0) * sym;
        let raw: Cplx = (0..2).map(|m| g[(m, 0)].conj() * y[(m, 0)]).sum();
        assert!((raw - 2.0 * p.sqrt() * sym).norm() < 1e-12);
        let out = mf_detect(&y, &g, &[p]).unwrap();
        assert!((out.s_soft[(0, 0)] - sym).norm() < 1e-12);
    }

    #[test]
    fn mf_sees_interference() {
        let beta = RMatrix::from_element(4, 2, 1.0);
        let (g, rx) = instance(&beta, 50, 0.0, 3);
        let out = mf_detect(&rx.y, &g, &rx.powers).unwrap();
        assert!(max_abs_diff(&out.s_soft, &rx.s_true) > 1e-3);
    }

    #[test]
    fn mf_zero_channel_is_undetectable() {
        let mut g = CMatrix::from_element(3, 2, Cplx::new(1.0, 0.0));
        g.column_mut(1).fill(Cplx::new(0.0, 0.0));
        let y = CMatrix::from_element(3, 4, Cplx::new(1.0, 0.0));
        let out = mf_detect(&y, &g, &[1.0, 1.0]).unwrap();
        assert_eq!(out.undetectable, vec![false, true]);
        assert!(out.s_soft.row(1).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = CMatrix::zeros(3, 2);
        let y = CMatrix::zeros(4, 1);
        assert!(matches!(mf_detect(&y, &g, &[1.0, 1.0]), Err(SimError::Dimension(_))));
        let y = CMatrix::zeros(3, 1);
        assert!(matches!(mf_detect(&y, &g, &[1.0]), Err(SimError::Dimension(_))));
    }

    #[test]
    fn uc_full_selection_matches_mf() {
        let beta = RMatrix::from_element(6, 3, 1.0);
        let (g, rx) = instance(&beta, 20, 0.1, 4);
        let mf = mf_detect(&rx.y, &g, &rx.powers).unwrap();
        let uc = uc_detect(&rx.y, &g, &rx.powers, 6).unwrap();
        assert!(max_abs_diff(&mf.s_soft, &uc.s_soft) < 1e-12);
    }

    #[test]
    fn uc_single_ap_uses_argmax() {
        let beta = RMatrix::from_element(5, 1, 1.0);
        let (g, rx) = instance(&beta, 4, 0.1, 5);
        let best = (0..5).max_by(|&a, &b| g[(a, 0)].norm_sqr().total_cmp(&g[(b, 0)].norm_sqr())).unwrap();
        let out = uc_detect(&rx.y, &g, &rx.powers, 1).unwrap();
        assert_eq!(out.selection.as_ref().unwrap().indices[0], vec![best]);
        let expect = rx.y[(best, 2)] / g[(best, 0)];
        assert!((out.s_soft[(0, 2)] - expect).norm() < 1e-12);
    }

    #[test]
    fn fic_noiseless_is_exact() {
        let beta = RMatrix::from_element(5, 4, 1.0);
        let (g, rx) = instance(&beta, 30, 0.0, 6);
        let out = fic_detect(&rx.y, &g, &g, &rx.s_true, &rx.powers, None).unwrap();
        assert!(max_abs_diff(&out.s_soft, &rx.s_true) < 1e-12);
    }

    #[test]
    fn fic_single_user_matches_mf() {
        let beta = RMatrix::from_element(5, 1, 1.0);
        let (g, rx) = instance(&beta, 30, 0.5, 7);
        let fic = fic_detect(&rx.y, &g, &g, &rx.s_true, &rx.powers, None).unwrap();
        let mf = mf_detect(&rx.y, &g, &rx.powers).unwrap();
        assert!(max_abs_diff(&fic.s_soft, &mf.s_soft) < 1e-12);
    }
}
