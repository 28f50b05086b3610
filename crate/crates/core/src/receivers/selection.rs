//! Per-user AP selection: threshold on estimated channel power, or the
//! `M_u` strongest APs.

use crate::{CMatrix, RMatrix, Result, SimError};

/// Selected AP indices `iota_k` for every user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionSet {
    pub indices: Vec<Vec<usize>>,
}

impl SelectionSet {
    /// Every user selects every AP, in AP order.
    pub fn full(aps: usize, users: usize) -> Self {
        SelectionSet { indices: vec![(0..aps).collect(); users] }
    }

    /// `mu_k = |iota_k|`.
    pub fn mu(&self, k: usize) -> usize {
        self.indices[k].len()
    }

    pub fn users(&self) -> usize {
        self.indices.len()
    }

    /// Mean selection size over the users of this set.
    pub fn mean_mu(&self) -> f64 {
        self.indices.iter().map(Vec::len).sum::<usize>() as f64 / self.users().max(1) as f64
    }

    pub fn validate(&self, aps: usize, users: usize) -> Result<()> {
        if self.users() != users {
            return Err(SimError::dim(format!("selection covers {} users, expected {users}", self.users())));
        }
        for (k, idx) in self.indices.iter().enumerate() {
            if idx.is_empty() {
                return Err(SimError::Domain(format!("user {k} has no selected AP")));
            }
            let mut seen = vec![false; aps];
            for &m in idx {
                if m >= aps || std::mem::replace(&mut seen[m], true) {
                    return Err(SimError::Domain(format!("user {k} has invalid or repeated AP index {m}")));
                }
            }
        }
        Ok(())
    }
}

fn powers_of(g_hat: &CMatrix) -> RMatrix {
    g_hat.map(|v| v.norm_sqr())
}

/// Threshold selection on a power matrix (`M x K`). Users left with no AP keep
/// their single strongest one.
pub fn theta_select_powers(power: &RMatrix, theta: f64) -> Result<SelectionSet> {
    if !(theta >= 0.0) {
        return Err(SimError::config(format!("theta must be >= 0, got {theta}")));
    }
    let indices = power
        .column_iter()
        .map(|col| {
            let picked: Vec<usize> = (0..col.len()).filter(|&m| col[m] >= theta).collect();
            if picked.is_empty() {
                vec![argmax(col.iter().copied())]
            } else {
                picked
            }
        })
        .collect();
    Ok(SelectionSet { indices })
}

/// `iota_k = {m : |g_hat_{k,m}|^2 >= theta}`.
pub fn japsic_theta_select(g_hat: &CMatrix, theta: f64) -> Result<SelectionSet> {
    theta_select_powers(&powers_of(g_hat), theta)
}

/// The `mu` largest entries of each column, strongest first; ties go to the
/// lower AP index.
pub fn mu_select_powers(power: &RMatrix, mu: usize) -> Result<SelectionSet> {
    let aps = power.nrows();
    if mu == 0 || mu > aps {
        return Err(SimError::config(format!("M_u must be in 1..={aps}, got {mu}")));
    }
    let indices = power
        .column_iter()
        .map(|col| {
            let mut order: Vec<usize> = (0..aps).collect();
            order.sort_by(|&a, &b| col[b].total_cmp(&col[a]).then(a.cmp(&b)));
            order.truncate(mu);
            order
        })
        .collect();
    Ok(SelectionSet { indices })
}

pub fn japsic_mu_select(g_hat: &CMatrix, mu: usize) -> Result<SelectionSet> {
    mu_select_powers(&powers_of(g_hat), mu)
}

/// Mean number of selected APs per user per block over a run.
pub fn mean_aps_selected<'a, I>(selections: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a SelectionSet>,
{
    let (mut total, mut count) = (0usize, 0usize);
    for sel in selections {
        total += sel.indices.iter().map(Vec::len).sum::<usize>();
        count += sel.users();
    }
    if count == 0 {
        return Err(SimError::Domain("no selections recorded".into()));
    }
    Ok(total as f64 / count as f64)
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}
