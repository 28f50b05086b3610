//! Pilot assignment and the channel-estimate error model.
//!
//! Estimates are modelled as `g_hat = g + c` with `c` zero-mean complex
//! Gaussian and independent of `g`. The per-entry error variance either is a
//! fixed `sigma_c^2`, or follows from MMSE estimation under pilot reuse:
//!
//! ```text
//! gamma = tau_p p_p beta_k^2 / (tau_p p_p sum_{i in P_k} beta_i + sigma_z^2)
//! c_var = beta_k - gamma
//! ```

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::ChannelBlock;
use crate::rng::complex_normal;
use crate::{CMatrix, RMatrix, Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PilotPolicy {
    /// User `k` gets pilot `k mod tau_p`.
    #[default]
    RoundRobin,
    /// Round-robin over a random permutation of the users.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PilotAssignment {
    pub tau_p: usize,
    pub pilot_of: Vec<usize>,
    /// Users sharing each pilot, ascending.
    pub groups: Vec<Vec<usize>>,
}

impl PilotAssignment {
    /// The set `P_k` of users sharing user `k`'s pilot (includes `k`).
    pub fn sharing_set(&self, k: usize) -> &[usize] {
        &self.groups[self.pilot_of[k]]
    }

    pub fn set_size(&self, k: usize) -> usize {
        self.sharing_set(k).len()
    }

    pub fn users(&self) -> usize {
        self.pilot_of.len()
    }
}

pub fn assign_pilots<R: Rng + ?Sized>(
    users: usize,
    tau_p: usize,
    policy: PilotPolicy,
    rng: &mut R,
) -> Result<PilotAssignment> {
    if tau_p == 0 {
        return Err(SimError::config("tau_p must be at least 1"));
    }
    if tau_p > users {
        return Err(SimError::config(format!("tau_p = {tau_p} exceeds the number of users {users}")));
    }
    let mut order: Vec<usize> = (0..users).collect();
    if policy == PilotPolicy::Random {
        order.shuffle(rng);
    }
    let mut pilot_of = vec![0; users];
    for (slot, &k) in order.iter().enumerate() {
        pilot_of[k] = slot % tau_p;
    }
    let mut groups = vec![Vec::new(); tau_p];
    for (k, &p) in pilot_of.iter().enumerate() {
        groups[p].push(k);
    }
    Ok(PilotAssignment { tau_p, pilot_of, groups })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimationErrorModel {
    /// i.i.d. `CN(0, sigma_c_sq)` error on every entry.
    Fixed { sigma_c_sq: f64 },
    /// Error variance from MMSE estimation with pilot contamination.
    Contamination,
}

impl EstimationErrorModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EstimationErrorModel::Fixed { sigma_c_sq } if !(sigma_c_sq >= 0.0) || !sigma_c_sq.is_finite() => {
                Err(SimError::config(format!("sigma_c^2 must be finite and >= 0, got {sigma_c_sq}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub g_hat: CMatrix,
    /// Per-entry error variance, `M x K`.
    pub c_var: RMatrix,
    /// Entries whose computed variance was negative and got clamped to zero.
    pub clamped: usize,
}

/// Error variance matrix under pilot contamination.
pub fn contamination_variance(
    beta: &RMatrix,
    assignment: &PilotAssignment,
    noise_power: f64,
    pilot_power: f64,
) -> (RMatrix, usize) {
    let tau_p = assignment.tau_p as f64;
    let mut clamped = 0;
    let c_var = RMatrix::from_fn(beta.nrows(), beta.ncols(), |m, k| {
        let b = beta[(m, k)];
        let contaminated: f64 = assignment.sharing_set(k).iter().map(|&i| beta[(m, i)]).sum();
        let gamma = tau_p * pilot_power * b * b / (tau_p * pilot_power * contaminated + noise_power);
        let v = b - gamma;
        if v < 0.0 {
            clamped += 1;
            0.0
        } else {
            v
        }
    });
    (c_var, clamped)
}

pub fn estimate_channels<R: Rng + ?Sized>(
    block: &ChannelBlock,
    beta: &RMatrix,
    assignment: &PilotAssignment,
    model: EstimationErrorModel,
    noise_power: f64,
    pilot_power: f64,
    rng: &mut R,
) -> Result<ChannelEstimate> {
    model.validate()?;
    let (m, k) = block.g.shape();
    if beta.shape() != (m, k) || assignment.users() != k {
        return Err(SimError::dim("channel, beta and pilot assignment disagree on M/K"));
    }
    let (c_var, clamped) = match model {
        EstimationErrorModel::Fixed { sigma_c_sq } => (RMatrix::from_element(m, k, sigma_c_sq), 0),
        EstimationErrorModel::Contamination => contamination_variance(beta, assignment, noise_power, pilot_power),
    };
    let mut g_hat = block.g.clone();
    for ki in 0..k {
        for mi in 0..m {
            let v = c_var[(mi, ki)];
            if v > 0.0 {
                g_hat[(mi, ki)] += complex_normal(rng, v);
            }
        }
    }
    Ok(ChannelEstimate { g_hat, c_var, clamped })
}
