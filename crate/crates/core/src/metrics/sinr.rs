//! Closed-form and empirical per-user SINR.
//!
//! Closed forms take the user's selected AP indices directly. Estimation error
//! is `c = g_hat - g`.

use super::SINR_CAP;
use crate::receivers::SelectionSet;
use crate::{CMatrix, Cplx, RMatrix, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrMethod {
    FormulaStage0,
    FormulaStageL,
    FormulaMmse,
    FormulaJapsicLimit,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub per_user_sinr: Vec<f64>,
    pub method: SinrMethod,
}

impl SinrReport {
    pub fn new(per_user_sinr: Vec<f64>, method: SinrMethod) -> Result<Self> {
        if let Some(v) = per_user_sinr.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(SimError::Numerical(format!("SINR entry {v} is not a finite non-negative value")));
        }
        Ok(SinrReport { per_user_sinr, method })
    }
}

/// Which channel the numerator of the stage-`l` SINR uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StageNumerator {
    /// `p_k |sum g*_k g_k|^2`.
    #[default]
    TrueChannel,
    /// `p_k |sum g_hat*_k g_k|^2`, as in the stage-0 expression.
    Estimate,
}

/// Variant of the closed-form MMSE SINR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MmseForm {
    /// `1 / (1 - x) - 1`.
    #[default]
    Corrected,
    /// `1 / (1 - x)`.
    Literal,
}

/// Denominator of the JAPSIC large-stage limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JapsicLimitForm {
    /// `sigma^2 + sum_i cbar_i`, where `cbar_i` is user `i`'s scaled error
    /// variance averaged over `iota_k` with weights `|g_hat_{k,m}|^2`.
    #[default]
    Aggregate,
    /// `mu_k (sigma^2 + mean_{m in iota_k} c_k,m)`, own error only.
    PerAp,
}

fn check_user(g: &CMatrix, k: usize, aps: &[usize]) -> Result<()> {
    if k >= g.ncols() {
        return Err(SimError::dim(format!("user {k} out of range")));
    }
    if aps.is_empty() {
        return Err(SimError::Domain(format!("user {k} has an empty selection")));
    }
    if let Some(&m) = aps.iter().find(|&&m| m >= g.nrows()) {
        return Err(SimError::Domain(format!("AP index {m} out of range")));
    }
    Ok(())
}

fn inner(a: &CMatrix, ka: usize, b: &CMatrix, kb: usize, aps: &[usize]) -> Cplx {
    aps.iter().map(|&m| a[(m, ka)].conj() * b[(m, kb)]).sum()
}

/// Matched-filter SINR over `aps`:
/// `p_k |g_hat_k^H g_k|^2 / (sum_{i!=k} p_i |g_hat_k^H g_i|^2 + sigma^2 |g_hat_k|^2)`.
pub fn sinr_stage0(g: &CMatrix, g_hat: &CMatrix, aps: &[usize], powers: &[f64], noise: f64, k: usize) -> Result<f64> {
    check_user(g, k, aps)?;
    let signal = powers[k] * inner(g_hat, k, g, k, aps).norm_sqr();
    let mui: f64 =
        (0..g.ncols()).filter(|&i| i != k).map(|i| powers[i] * inner(g_hat, k, g, i, aps).norm_sqr()).sum();
    let energy: f64 = aps.iter().map(|&m| g_hat[(m, k)].norm_sqr()).sum();
    Ok(ratio(signal, mui + noise * energy))
}

/// Matched-filter SINR with other users removed (genie cancellation).
pub fn sinr_interference_free(g: &CMatrix, g_hat: &CMatrix, aps: &[usize], powers: &[f64], noise: f64, k: usize) -> Result<f64> {
    check_user(g, k, aps)?;
    let signal = powers[k] * inner(g_hat, k, g, k, aps).norm_sqr();
    let energy: f64 = aps.iter().map(|&m| g_hat[(m, k)].norm_sqr()).sum();
    Ok(ratio(signal, noise * energy))
}

/// Stage-`l` SINR after cancelling with the stage-`(l-1)` estimates `s_prev`.
///
/// Denominator: interference left by imperfect estimates (averaged over the
/// block's symbols), residual MUI from correlated estimation errors and noise.
#[allow(clippy::too_many_arguments)]
pub fn sinr_stage_l(
    g: &CMatrix,
    g_hat: &CMatrix,
    aps: &[usize],
    powers: &[f64],
    noise: f64,
    s_true: &CMatrix,
    s_prev: &CMatrix,
    k: usize,
) -> Result<f64> {
    sinr_stage_l_with(g, g_hat, aps, powers, noise, s_true, s_prev, k, StageNumerator::TrueChannel)
}

#[allow(clippy::too_many_arguments)]
pub fn sinr_stage_l_with(
    g: &CMatrix,
    g_hat: &CMatrix,
    aps: &[usize],
    powers: &[f64],
    noise: f64,
    s_true: &CMatrix,
    s_prev: &CMatrix,
    k: usize,
    numerator: StageNumerator,
) -> Result<f64> {
    check_user(g, k, aps)?;
    if s_true.shape() != s_prev.shape() || s_true.nrows() != g.ncols() || s_true.ncols() == 0 {
        return Err(SimError::dim("symbol matrices must both be K x T with T >= 1"));
    }
    let t = s_true.ncols() as f64;
    let signal = match numerator {
        StageNumerator::TrueChannel => powers[k] * inner(g, k, g, k, aps).norm_sqr(),
        StageNumerator::Estimate => powers[k] * inner(g_hat, k, g, k, aps).norm_sqr(),
    };
    let err = |m: usize, i: usize| g_hat[(m, i)] - g[(m, i)];
    let mut ic = 0.0;
    let mut rmui = 0.0;
    for i in (0..g.ncols()).filter(|&i| i != k) {
        let residual = (0..s_true.ncols()).map(|ti| (s_true[(i, ti)] - s_prev[(i, ti)]).norm_sqr()).sum::<f64>() / t;
        ic += powers[i] * residual * inner(g, k, g, i, aps).norm_sqr();
        let cc: Cplx = aps.iter().map(|&m| err(m, k).conj() * err(m, i)).sum();
        rmui += powers[k] * cc.norm_sqr();
    }
    let energy: f64 = aps.iter().map(|&m| g_hat[(m, k)].norm_sqr()).sum();
    Ok(ratio(signal, ic + rmui + noise * energy))
}

/// Closed-form MMSE SINR of every user from
/// `x_k = {G^H (sigma^2 I + G G^H + C)^{-1} G}_{k,k}`, with `G` the estimate
/// scaled by `sqrt(p)` and `C = diag(c_diag)`.
pub fn mmse_sinr_all(g_hat_scaled: &CMatrix, c_diag: &[f64], noise: f64, form: MmseForm) -> Result<Vec<f64>> {
    let users: Vec<usize> = (0..g_hat_scaled.ncols()).collect();
    mmse_sinr_subset(g_hat_scaled, &users, c_diag, noise, form)
}

/// As [`mmse_sinr_all`], but only the columns in `users` take part; the
/// result is indexed like `users`.
pub fn mmse_sinr_subset(
    g_hat_scaled: &CMatrix,
    users: &[usize],
    c_diag: &[f64],
    noise: f64,
    form: MmseForm,
) -> Result<Vec<f64>> {
    let m = g_hat_scaled.nrows();
    if c_diag.len() != m {
        return Err(SimError::dim(format!("{} error variances for {m} APs", c_diag.len())));
    }
    if !(noise > 0.0) && c_diag.iter().all(|&c| c <= 0.0) {
        return Err(SimError::config("closed-form MMSE needs noise or error power"));
    }
    let mut sub = CMatrix::zeros(m, users.len());
    for (j, &i) in users.iter().enumerate() {
        sub.set_column(j, &g_hat_scaled.column(i));
    }
    let mut a = &sub * sub.adjoint();
    for mi in 0..m {
        a[(mi, mi)] += Cplx::new(noise + c_diag[mi], 0.0);
    }
    let x = crate::receivers::linear_solve(a, &sub)?;
    Ok((0..users.len())
        .map(|j| {
            let q: Cplx = (0..m).map(|mi| sub[(mi, j)].conj() * x[(mi, j)]).sum();
            mmse_from_quadratic(q.re, form)
        })
        .collect())
}

/// Single-user entry point of the closed-form MMSE SINR.
pub fn sinr_mmse_closed(g_hat_scaled: &CMatrix, c_diag: &[f64], noise: f64, k: usize, form: MmseForm) -> Result<f64> {
    if k >= g_hat_scaled.ncols() {
        return Err(SimError::dim(format!("user {k} out of range")));
    }
    Ok(mmse_sinr_all(g_hat_scaled, c_diag, noise, form)?[k])
}

fn mmse_from_quadratic(x: f64, form: MmseForm) -> f64 {
    if x >= 1.0 {
        log::warn!("MMSE quadratic form {x} >= 1, capping SINR");
        return SINR_CAP;
    }
    let x = x.max(0.0);
    match form {
        MmseForm::Corrected => (1.0 / (1.0 - x) - 1.0).min(SINR_CAP),
        MmseForm::Literal => (1.0 / (1.0 - x)).min(SINR_CAP),
    }
}

/// SINR once all MUI has been cancelled, from scaled estimates and scaled
/// error variances (`c_scaled[(m, i)] = p_i c_var[(m, i)]`).
pub fn sinr_japsic_limit(
    g_hat_scaled: &CMatrix,
    c_scaled: &RMatrix,
    aps: &[usize],
    noise: f64,
    k: usize,
    form: JapsicLimitForm,
) -> Result<f64> {
    check_user(g_hat_scaled, k, aps)?;
    if c_scaled.shape() != g_hat_scaled.shape() {
        return Err(SimError::dim("c_scaled must match g_hat"));
    }
    let weights: Vec<f64> = aps.iter().map(|&m| g_hat_scaled[(m, k)].norm_sqr()).collect();
    let energy: f64 = weights.iter().sum();
    let denom = match form {
        JapsicLimitForm::Aggregate => {
            // `g_hat` is scaled by sqrt(p_k), which cancels in the weighted mean.
            let err: f64 = if energy > 0.0 {
                (0..c_scaled.ncols())
                    .map(|i| aps.iter().zip(&weights).map(|(&m, w)| w * c_scaled[(m, i)]).sum::<f64>() / energy)
                    .sum()
            } else {
                0.0
            };
            noise + err
        }
        JapsicLimitForm::PerAp => {
            let own = aps.iter().map(|&m| c_scaled[(m, k)]).sum::<f64>() / aps.len() as f64;
            aps.len() as f64 * (noise + own)
        }
    };
    Ok(ratio(energy, denom))
}

/// SINR of a stream of soft symbols against the transmitted ones, using the
/// effective-gain split `s_soft = c s_true + e`.
pub fn empirical_sinr(s_true: &[Cplx], s_soft: &[Cplx]) -> Result<f64> {
    if s_true.len() != s_soft.len() || s_true.is_empty() {
        return Err(SimError::dim("empirical SINR needs two equal, non-empty symbol streams"));
    }
    let n = s_true.len() as f64;
    let p_s = s_true.iter().map(|s| s.norm_sqr()).sum::<f64>() / n;
    if p_s <= 0.0 {
        return Err(SimError::Domain("transmitted symbols have zero power".into()));
    }
    let gain = s_true.iter().zip(s_soft).map(|(s, r)| r * s.conj()).sum::<Cplx>() / n / p_s;
    let err = s_true.iter().zip(s_soft).map(|(s, r)| (r - gain * s).norm_sqr()).sum::<f64>() / n;
    Ok(ratio(gain.norm_sqr() * p_s, err))
}

/// Empirical SINR for every user of a detector output.
pub fn empirical_sinr_all(s_true: &CMatrix, s_soft: &CMatrix) -> Result<Vec<f64>> {
    (0..s_true.nrows())
        .map(|k| {
            let a: Vec<Cplx> = s_true.row(k).iter().copied().collect();
            let b: Vec<Cplx> = s_soft.row(k).iter().copied().collect();
            empirical_sinr(&a, &b)
        })
        .collect()
}

/// Formula SINR for every user of a selection, via `f(k, iota_k)`.
pub fn per_user<F>(selection: &SelectionSet, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, &[usize]) -> Result<f64>,
{
    selection.indices.iter().enumerate().map(|(k, aps)| f(k, aps)).collect()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den <= num / SINR_CAP || den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            SINR_CAP
        }
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::receivers::test_support::instance;
    use crate::rng::{complex_normal, stream, Purpose};

    fn c(re: f64) -> Cplx {
        Cplx::new(re, 0.0)
    }

    #[test]
    fn stage0_single_user_collapse() {
        let beta = RMatrix::from_element(5, 1, 1.0);
        let (g, _) = instance(&beta, 1, 0.0, 51);
        let aps = [0, 2, 3];
        let got = sinr_stage0(&g, &g, &aps, &[2.0], 0.5, 0).unwrap();
        let energy: f64 = aps.iter().map(|&m| g[(m, 0)].norm_sqr()).sum();
        assert!((got - 2.0 * energy / 0.5).abs() / got < 1e-12);
    }

    #[test]
    fn stage0_scalar_two_users() {
        let g = CMatrix::from_row_slice(1, 2, &[c(1.0), c(1.0)]);
        let noise = 0.3;
        let got = sinr_stage0(&g, &g, &[0], &[1.0, 1.0], noise, 0).unwrap();
        assert!((got - 1.0 / (1.0 + noise)).abs() < 1e-14);
    }

    #[test]
    fn stage0_empty_selection_errors() {
        let g = CMatrix::from_element(2, 1, c(1.0));
        assert!(sinr_stage0(&g, &g, &[], &[1.0], 1.0, 0).is_err());
    }

    #[test]
    fn stage_l_exact_cancellation() {
        let beta = RMatrix::from_element(4, 3, 1.0);
        let (g, rx) = instance(&beta, 20, 0.0, 52);
        let aps = [0, 1, 3];
        let got = sinr_stage_l(&g, &g, &aps, &rx.powers, 0.7, &rx.s_true, &rx.s_true, 1).unwrap();
        let energy: f64 = aps.iter().map(|&m| g[(m, 1)].norm_sqr()).sum();
        let expect = energy * energy / (0.7 * energy);
        assert!((got - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn stage_l_without_cancellation_is_stage0() {
        // Unit-modulus symbols so the block average of |s|^2 is exactly one.
        let beta = RMatrix::from_element(4, 3, 1.0);
        let (g, _) = instance(&beta, 1, 0.0, 53);
        let s = CMatrix::from_fn(3, 8, |k, t| Cplx::from_polar(1.0, (k * 8 + t) as f64));
        let zero = CMatrix::zeros(3, 8);
        let powers = [1.0, 0.5, 2.0];
        for k in 0..3 {
            let a = sinr_stage_l(&g, &g, &[0, 1, 2, 3], &powers, 0.2, &s, &zero, k).unwrap();
            let b = sinr_stage0(&g, &g, &[0, 1, 2, 3], &powers, 0.2, k).unwrap();
            assert!((a - b).abs() / b < 1e-12);
        }
    }

    #[test]
    fn stage_l_improves_with_better_estimates() {
        let beta = RMatrix::from_element(4, 3, 1.0);
        let (g, rx) = instance(&beta, 30, 0.0, 54);
        let mut rng = stream(1, Purpose::Noise, 0, 0);
        let noise_est = CMatrix::from_fn(3, 30, |_, _| complex_normal(&mut rng, 1.0));
        let coarse = &rx.s_true + &noise_est * c(0.5);
        let fine = &rx.s_true + &noise_est * c(0.1);
        let a = sinr_stage_l(&g, &g, &[0, 1, 2, 3], &rx.powers, 0.1, &rx.s_true, &coarse, 0).unwrap();
        let b = sinr_stage_l(&g, &g, &[0, 1, 2, 3], &rx.powers, 0.1, &rx.s_true, &fine, 0).unwrap();
        assert!(b >= a);
    }

    #[test]
    fn mmse_scalar_corrected() {
        let g = CMatrix::from_element(1, 1, c(1.0));
        let got = sinr_mmse_closed(&g, &[0.0], 1.0, 0, MmseForm::Corrected).unwrap();
        assert!((got - 1.0).abs() < 1e-14);
        let lit = sinr_mmse_closed(&g, &[0.0], 1.0, 0, MmseForm::Literal).unwrap();
        assert!((lit - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mmse_noise_limit() {
        let g = CMatrix::from_element(3, 2, c(1.0));
        let got = mmse_sinr_all(&g, &[0.0; 3], 1e12, MmseForm::Corrected).unwrap();
        assert!(got.iter().all(|&v| v < 1e-10));
    }

    #[test]
    fn japsic_limit_scalar_cases() {
        let g = CMatrix::from_element(1, 1, c(1.0));
        let zero = RMatrix::zeros(1, 1);
        assert!((sinr_japsic_limit(&g, &zero, &[0], 1.0, 0, JapsicLimitForm::Aggregate).unwrap() - 1.0).abs() < 1e-14);
        let equal = RMatrix::from_element(1, 1, 1.0);
        let halved = sinr_japsic_limit(&g, &equal, &[0], 1.0, 0, JapsicLimitForm::Aggregate).unwrap();
        assert!((halved - 0.5).abs() < 1e-14);
        let per_ap = sinr_japsic_limit(&g, &equal, &[0], 1.0, 0, JapsicLimitForm::PerAp).unwrap();
        assert!((per_ap - 0.5).abs() < 1e-14);
    }

    #[test]
    fn japsic_limit_grows_with_selection() {
        let beta = RMatrix::from_element(10, 3, 1.0);
        let (g, _) = instance(&beta, 1, 0.0, 55);
        let cs = RMatrix::from_element(10, 3, 0.05);
        let sel = crate::receivers::japsic_mu_select(&g, 10).unwrap();
        let mut last = 0.0;
        for mu in 1..=10 {
            let v = sinr_japsic_limit(&g, &cs, &sel.indices[0][..mu], 0.3, 0, JapsicLimitForm::Aggregate).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn empirical_examples() {
        let mut rng = stream(7, Purpose::Symbols, 0, 0);
        let n = 100_000;
        let s: Vec<Cplx> = (0..n).map(|_| complex_normal(&mut rng, 1.0)).collect();
        assert_eq!(empirical_sinr(&s, &s).unwrap(), SINR_CAP);

        let noisy: Vec<Cplx> = s.iter().map(|v| v + complex_normal(&mut rng, 1.0)).collect();
        let g = empirical_sinr(&s, &noisy).unwrap();
        assert!((g - 1.0).abs() < 0.05, "{g}");

        let indep: Vec<Cplx> = (0..n).map(|_| complex_normal(&mut rng, 1.0)).collect();
        assert!(empirical_sinr(&s, &indep).unwrap() < 0.01);

        assert!(empirical_sinr(&[c(0.0); 4], &[c(1.0); 4]).is_err());
        assert!(empirical_sinr(&[], &[]).is_err());
    }

    #[test]
    fn report_rejects_invalid_entries() {
        assert!(SinrReport::new(vec![1.0, f64::NAN], SinrMethod::Empirical).is_err());
        assert!(SinrReport::new(vec![-1.0], SinrMethod::Empirical).is_err());
        assert!(SinrReport::new(vec![0.0, 3.0], SinrMethod::FormulaMmse).is_ok());
    }
}
