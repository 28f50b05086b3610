//! Instrumented per-symbol detectors that count complex multiplications and
//! divisions, used to cross-check the closed-form operation counts.
//!
//! Channel-dependent quantities that are fixed for a whole coherence block
//! (selected energies, AP ranking) are prepared outside the per-symbol loop.
//! AP ranking is charged `M log2 M` operations once per detection cycle.
//!
//! The counted JAPSIC rebuilds each interferer only on the APs that
//! interferer selected. That is what brings a cancellation stage down to
//! `2 K M` multiplications plus one normalization division per user: one pass
//! reconstructs the total interference at every selected AP, one pass
//! re-combines. With full selection it is identical to
//! [`japsic_detect`](super::japsic_detect).

use super::SelectionSet;
use crate::{CMatrix, Cplx};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub mults: u64,
    pub divs: u64,
    pub ranking: u64,
}

impl OpCounter {
    #[inline]
    fn mul(&mut self, a: Cplx, b: Cplx) -> Cplx {
        self.mults += 1;
        a * b
    }

    #[inline]
    fn div(&mut self, a: Cplx, b: f64) -> Cplx {
        self.divs += 1;
        a / b
    }

    fn charge_ranking(&mut self, aps: usize) {
        if aps > 1 {
            self.ranking += ((aps as f64) * (aps as f64).log2()).round() as u64;
        }
    }

    /// Multiplications plus ranking charge, the quantity tabulated per scheme.
    pub fn table_ops(&self) -> u64 {
        self.mults + self.ranking
    }
}

/// Raw matched-filter statistics for one symbol vector over `selection`.
fn combine(y: &[Cplx], g_hat: &CMatrix, selection: &SelectionSet, ops: &mut OpCounter) -> Vec<Cplx> {
    (0..g_hat.ncols())
        .map(|k| selection.indices[k].iter().map(|&m| ops.mul(g_hat[(m, k)].conj(), y[m])).sum())
        .collect()
}

/// MF over all APs for one symbol period: raw statistics.
pub fn counted_mf(y: &[Cplx], g_hat: &CMatrix, ops: &mut OpCounter) -> Vec<Cplx> {
    combine(y, g_hat, &SelectionSet::full(g_hat.nrows(), g_hat.ncols()), ops)
}

/// UC for one symbol period with a precomputed strongest-AP selection.
pub fn counted_uc(y: &[Cplx], g_hat: &CMatrix, selection: &SelectionSet, ops: &mut OpCounter) -> Vec<Cplx> {
    ops.charge_ranking(g_hat.nrows());
    combine(y, g_hat, selection, ops)
}

/// JAPSIC for one symbol period with `ic_stages` cancellation stages.
/// Returns normalized soft symbols. `ranked` charges the AP sort (M_u variant).
pub fn counted_japsic(
    y: &[Cplx],
    g_hat: &CMatrix,
    selection: &SelectionSet,
    powers: &[f64],
    ic_stages: usize,
    ranked: bool,
    ops: &mut OpCounter,
) -> Vec<Cplx> {
    let (m, k_users) = g_hat.shape();
    if ranked {
        ops.charge_ranking(m);
    }
    // Per-block constants.
    let energy: Vec<f64> =
        (0..k_users).map(|k| selection.indices[k].iter().map(|&mi| g_hat[(mi, k)].norm_sqr()).sum()).collect();
    let norm: Vec<f64> = (0..k_users).map(|k| powers[k].sqrt() * energy[k]).collect();

    let mut raw = combine(y, g_hat, selection, ops);
    for _ in 0..ic_stages {
        // sqrt(p_i) s~_i = raw_i / E_i
        let amp: Vec<Cplx> = (0..k_users).map(|i| ops.div(raw[i], energy[i])).collect();
        let mut rebuilt = vec![Cplx::new(0.0, 0.0); m];
        for (i, aps) in selection.indices.iter().enumerate() {
            for &mi in aps {
                rebuilt[mi] += ops.mul(amp[i], g_hat[(mi, i)]);
            }
        }
        // g_k^H (y - rebuilt) plus the user's own term, which is the previous raw statistic.
        raw = (0..k_users)
            .map(|k| {
                selection.indices[k].iter().map(|&mi| ops.mul(g_hat[(mi, k)].conj(), y[mi] - rebuilt[mi])).sum::<Cplx>()
                    + raw[k]
            })
            .collect();
    }
    (0..k_users).map(|k| ops.div(raw[k], norm[k])).collect()
}
