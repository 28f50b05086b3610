//! MMSE combining and MMSE-SIC.

use nalgebra::Cholesky;

use super::{check_dims, DetectionResult};
use crate::{CMatrix, Cplx, RMatrix, Result, SimError};

/// Per-AP aggregate error power `sum_i p_i c_var[(m, i)]`.
pub fn aggregate_error(c_var: &RMatrix, powers: &[f64]) -> Vec<f64> {
    (0..c_var.nrows()).map(|m| (0..c_var.ncols()).map(|i| powers[i] * c_var[(m, i)]).sum()).collect()
}

/// `sum_{i in users} p_i g_i g_i^H + diag(c_diag) + noise I`.
fn received_covariance(g_hat: &CMatrix, users: &[usize], powers: &[f64], c_diag: &[f64], noise: f64) -> CMatrix {
    let m = g_hat.nrows();
    let mut scaled = CMatrix::zeros(m, users.len());
    for (j, &i) in users.iter().enumerate() {
        scaled.set_column(j, &(g_hat.column(i) * Cplx::new(powers[i].sqrt(), 0.0)));
    }
    let mut a = &scaled * scaled.adjoint();
    for mi in 0..m {
        a[(mi, mi)] += Cplx::new(c_diag[mi] + noise, 0.0);
    }
    a
}

/// Solve `A X = B` for Hermitian positive-definite `A`.
pub(crate) fn hermitian_solve(a: CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.iter().chain(b.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(SimError::Numerical("non-finite entry in MMSE system".into()));
    }
    let chol = Cholesky::new(a).ok_or_else(|| SimError::Numerical("MMSE covariance is not positive definite".into()))?;
    Ok(chol.solve(b))
}

/// MMSE weights for `users`, returned as rows of a `K x M` matrix (zero rows
/// for users outside the set).
fn weights_for(
    g_hat: &CMatrix,
    users: &[usize],
    powers: &[f64],
    c_diag: &[f64],
    noise: f64,
) -> Result<CMatrix> {
    let (m, k) = g_hat.shape();
    let a = received_covariance(g_hat, users, powers, c_diag, noise);
    let mut rhs = CMatrix::zeros(m, users.len());
    for (j, &i) in users.iter().enumerate() {
        rhs.set_column(j, &g_hat.column(i));
    }
    let x = hermitian_solve(a, &rhs)?;
    let mut w = CMatrix::zeros(k, m);
    for (j, &i) in users.iter().enumerate() {
        for mi in 0..m {
            w[(i, mi)] = x[(mi, j)].conj() * powers[i];
        }
    }
    Ok(w)
}

/// `w_k = p_k (sum_i p_i (g_i g_i^H + C_i) + sigma^2 I)^{-1} g_k`, conjugated
/// into row `k` of the returned `K x M` matrix.
pub fn mmse_weights(g_hat: &CMatrix, c_var: &RMatrix, powers: &[f64], noise_power: f64) -> Result<CMatrix> {
    if !(noise_power > 0.0) {
        return Err(SimError::config(format!("MMSE needs a positive noise power, got {noise_power}")));
    }
    if c_var.shape() != g_hat.shape() || powers.len() != g_hat.ncols() {
        return Err(SimError::dim("g_hat, c_var and powers disagree"));
    }
    let users: Vec<usize> = (0..g_hat.ncols()).collect();
    weights_for(g_hat, &users, powers, &aggregate_error(c_var, powers), noise_power)
}

/// Apply row `k` of `w` to the data and normalize by `w_k g_k sqrt(p_k)`.
fn apply_row(w: &CMatrix, g_hat: &CMatrix, y: &CMatrix, powers: &[f64], k: usize, out: &mut CMatrix) -> bool {
    let gain: Cplx = (0..g_hat.nrows()).map(|m| w[(k, m)] * g_hat[(m, k)]).sum::<Cplx>() * powers[k].sqrt();
    if gain.norm() == 0.0 || !gain.re.is_finite() {
        return false;
    }
    for t in 0..y.ncols() {
        let v: Cplx = (0..y.nrows()).map(|m| w[(k, m)] * y[(m, t)]).sum();
        out[(k, t)] = v / gain;
    }
    true
}

pub fn mmse_detect(
    y: &CMatrix,
    g_hat: &CMatrix,
    c_var: &RMatrix,
    powers: &[f64],
    noise_power: f64,
) -> Result<DetectionResult> {
    check_dims(y, g_hat, powers)?;
    let w = mmse_weights(g_hat, c_var, powers, noise_power)?;
    let k_users = g_hat.ncols();
    let mut s = CMatrix::zeros(k_users, y.ncols());
    let undetectable = (0..k_users).map(|k| !apply_row(&w, g_hat, y, powers, k, &mut s)).collect();
    Ok(DetectionResult::single(s, None, undetectable))
}

/// Decoding order for SIC: descending `p_k sum_m |g_hat_{k,m}|^2`, ties to
/// the lower user index.
pub fn sic_order(g_hat: &CMatrix, powers: &[f64]) -> Vec<usize> {
    let energy: Vec<f64> =
        (0..g_hat.ncols()).map(|k| powers[k] * g_hat.column(k).iter().map(|v| v.norm_sqr()).sum::<f64>()).collect();
    let mut order: Vec<usize> = (0..g_hat.ncols()).collect();
    order.sort_by(|&a, &b| energy[b].total_cmp(&energy[a]).then(a.cmp(&b)));
    order
}

/// MMSE with successive cancellation of soft estimates, strongest user first.
///
/// The combiner for each step spans the users not yet decoded; the error
/// covariance of already-cancelled users stays in the model since they were
/// reconstructed with `g_hat`.
pub fn mmse_sic_detect(
    y: &CMatrix,
    g_hat: &CMatrix,
    c_var: &RMatrix,
    powers: &[f64],
    noise_power: f64,
) -> Result<DetectionResult> {
    check_dims(y, g_hat, powers)?;
    if !(noise_power > 0.0) {
        return Err(SimError::config(format!("MMSE needs a positive noise power, got {noise_power}")));
    }
    if c_var.shape() != g_hat.shape() {
        return Err(SimError::dim("g_hat and c_var disagree"));
    }
    let (m, k_users) = g_hat.shape();
    let c_diag = aggregate_error(c_var, powers);
    let order = sic_order(g_hat, powers);
    let mut remaining = order.clone();
    let mut residual = y.clone();
    let mut s = CMatrix::zeros(k_users, y.ncols());
    let mut undetectable = vec![false; k_users];

    for &k in &order {
        let w = weights_for(g_hat, &remaining, powers, &c_diag, noise_power)?;
        if !apply_row(&w, g_hat, &residual, powers, k, &mut s) {
            undetectable[k] = true;
        }
        let amp = Cplx::new(powers[k].sqrt(), 0.0);
        for t in 0..y.ncols() {
            let sym = s[(k, t)] * amp;
            for mi in 0..m {
                residual[(mi, t)] -= g_hat[(mi, k)] * sym;
            }
        }
        remaining.retain(|&u| u != k);
    }
    Ok(DetectionResult::single(s, None, undetectable))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{mf_detect, ReceivedBlock};
    use super::*;
    use crate::rng::{stream, Purpose};

    fn dense_inverse(a: &CMatrix) -> CMatrix {
        a.clone().try_inverse().unwrap()
    }

    #[test]
    fn scalar_weight() {
        let g = CMatrix::from_element(1, 1, Cplx::new(0.6, -0.8) * 2.0);
        let (p, s2) = (3.0, 0.5);
        let w = mmse_weights(&g, &RMatrix::zeros(1, 1), &[p], s2).unwrap();
        let expect = g[(0, 0)].conj() * p / (p * g[(0, 0)].norm_sqr() + s2);
        assert!((w[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn noise_dominated_limit_is_matched_filter() {
        let beta = RMatrix::from_element(4, 2, 1.0);
        let (g, _) = instance(&beta, 1, 0.0, 21);
        let noise = 1e9;
        let w = mmse_weights(&g, &RMatrix::zeros(4, 2), &[1.0, 2.0], noise).unwrap();
        for k in 0..2 {
            let p = [1.0, 2.0][k];
            for m in 0..4 {
                let mf = g[(m, k)].conj() * (p / noise);
                assert!((w[(k, m)] - mf).norm() / mf.norm() < 1e-6);
            }
        }
    }

    #[test]
    fn matches_dense_inverse_oracle() {
        let beta = RMatrix::from_element(4, 2, 1.0);
        let (g, _) = instance(&beta, 1, 0.0, 22);
        let c = RMatrix::from_fn(4, 2, |m, k| 0.01 * (1 + m + 2 * k) as f64);
        let powers = [0.7, 1.9];
        let noise = 0.3;
        let w = mmse_weights(&g, &c, &powers, noise).unwrap();

        // Oracle: build the matrix term by term and invert explicitly.
        let mut a = CMatrix::identity(4, 4) * Cplx::new(noise, 0.0);
        for i in 0..2 {
            let gi = g.column(i).into_owned();
            a += (&gi * gi.adjoint()) * Cplx::new(powers[i], 0.0);
            for m in 0..4 {
                a[(m, m)] += Cplx::new(powers[i] * c[(m, i)], 0.0);
            }
        }
        let inv = dense_inverse(&a);
        for k in 0..2 {
            let wk = (&inv * g.column(k)) * Cplx::new(powers[k], 0.0);
            for m in 0..4 {
                let rel = (w[(k, m)] - wk[m].conj()).norm() / wk[m].norm();
                assert!(rel < 1e-10, "{rel}");
            }
        }
    }

    #[test]
    fn error_variance_deweights_ap() {
        let beta = RMatrix::from_element(3, 2, 1.0);
        let (g, _) = instance(&beta, 1, 0.0, 23);
        let mut c = RMatrix::zeros(3, 2);
        let w0 = mmse_weights(&g, &c, &[1.0, 1.0], 0.1).unwrap();
        c[(1, 0)] = 5.0;
        let w1 = mmse_weights(&g, &c, &[1.0, 1.0], 0.1).unwrap();
        // Compare the AP's share of the combiner.
        let share = |w: &CMatrix| w[(0, 1)].norm() / w.row(0).norm();
        assert!(share(&w1) < share(&w0));
    }

    #[test]
    fn nonpositive_noise_rejected() {
        let g = CMatrix::from_element(1, 1, Cplx::new(1.0, 0.0));
        assert!(mmse_weights(&g, &RMatrix::zeros(1, 1), &[1.0], 0.0).is_err());
    }

    #[test]
    fn nonfinite_input_rejected() {
        let g = CMatrix::from_element(2, 1, Cplx::new(f64::NAN, 0.0));
        assert!(matches!(mmse_weights(&g, &RMatrix::zeros(2, 1), &[1.0], 1.0), Err(SimError::Numerical(_))));
    }

    #[test]
    fn single_user_high_snr() {
        let beta = RMatrix::from_element(4, 1, 1.0);
        let noise = 1e-6;
        let (g, rx) = instance(&beta, 200, noise, 24);
        let out = mmse_detect(&rx.y, &g, &RMatrix::zeros(4, 1), &rx.powers, noise).unwrap();
        let err = (&out.s_soft - &rx.s_true).iter().map(|v| v.norm_sqr()).sum::<f64>() / 200.0;
        let energy: f64 = g.iter().map(|v| v.norm_sqr()).sum();
        assert!(err < 3.0 * noise / energy, "{err}");
    }

    #[test]
    fn orthogonal_users_decouple() {
        let g = CMatrix::from_row_slice(
            4,
            2,
            &[
                Cplx::new(1.0, 0.2),
                Cplx::new(0.0, 0.0),
                Cplx::new(-0.5, 0.4),
                Cplx::new(0.0, 0.0),
                Cplx::new(0.0, 0.0),
                Cplx::new(0.9, -0.1),
                Cplx::new(0.0, 0.0),
                Cplx::new(0.3, 0.3),
            ],
        );
        let s = super::super::draw_symbols(2, 40, &mut stream(1, Purpose::Symbols, 0, 0));
        let rx = ReceivedBlock::transmit(&g, s, &[1.0, 1.0], 0.2, &mut stream(1, Purpose::Noise, 0, 0)).unwrap();
        let joint = mmse_detect(&rx.y, &g, &RMatrix::zeros(4, 2), &rx.powers, 0.2).unwrap();
        for k in 0..2 {
            let gk = g.columns(k, 1).into_owned();
            let alone = mmse_detect(&rx.y, &gk, &RMatrix::zeros(4, 1), &[1.0], 0.2).unwrap();
            let diff = (0..40).map(|t| (joint.s_soft[(k, t)] - alone.s_soft[(0, t)]).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn sic_single_user_matches_mmse() {
        let beta = RMatrix::from_element(5, 1, 1.0);
        let (g, rx) = instance(&beta, 30, 0.3, 25);
        let c = RMatrix::from_element(5, 1, 0.05);
        let a = mmse_detect(&rx.y, &g, &c, &rx.powers, 0.3).unwrap();
        let b = mmse_sic_detect(&rx.y, &g, &c, &rx.powers, 0.3).unwrap();
        assert!(max_abs_diff(&a.s_soft, &b.s_soft) < 1e-12);
    }

    #[test]
    fn sic_cancels_strong_user() {
        let mut beta = RMatrix::from_element(4, 2, 1.0);
        beta.column_mut(1).fill(0.05);
        let noise = 1e-12;
        let (g, rx) = instance(&beta, 100, noise, 26);
        let order = sic_order(&g, &rx.powers);
        assert_eq!(order, vec![0, 1]);

        let out = mmse_sic_detect(&rx.y, &g, &RMatrix::zeros(4, 2), &rx.powers, noise).unwrap();
        // Interference the weak user sees from the strong one, before and after.
        let strong = 0;
        let before: f64 = (0..100)
            .map(|t| (0..4).map(|m| (g[(m, strong)] * rx.s_true[(strong, t)]).norm_sqr()).sum::<f64>())
            .sum();
        let after: f64 = (0..100)
            .map(|t| {
                (0..4)
                    .map(|m| (g[(m, strong)] * (rx.s_true[(strong, t)] - out.s_soft[(strong, t)])).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        assert!(after < 1e-6 * before, "{after} vs {before}");
        assert!(max_abs_diff(&out.s_soft, &rx.s_true) < 1e-3);
    }

    #[test]
    fn sic_order_follows_channels_not_labels() {
        let mut beta = RMatrix::from_element(6, 3, 0.2);
        beta.column_mut(2).fill(3.0);
        let (g, _) = instance(&beta, 1, 0.0, 27);
        let first = sic_order(&g, &[1.0; 3])[0];
        assert_eq!(first, 2);

        let perm = [2usize, 0, 1];
        let permuted = CMatrix::from_fn(6, 3, |m, k| g[(m, perm[k])]);
        let first_permuted = sic_order(&permuted, &[1.0; 3])[0];
        assert_eq!(perm[first_permuted], 2);
    }

    #[test]
    fn mmse_beats_mf_on_mse() {
        let beta = RMatrix::from_element(6, 4, 1.0);
        let noise = 0.1;
        let (g, rx) = instance(&beta, 400, noise, 28);
        let mse = |s: &CMatrix| (s - &rx.s_true).iter().map(|v| v.norm_sqr()).sum::<f64>();
        let mf = mf_detect(&rx.y, &g, &rx.powers).unwrap();
        let mm = mmse_detect(&rx.y, &g, &RMatrix::zeros(6, 4), &rx.powers, noise).unwrap();
        assert!(mse(&mm.s_soft) < mse(&mf.s_soft));
    }
}
