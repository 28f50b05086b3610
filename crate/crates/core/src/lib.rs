//! Link-level Monte-Carlo simulator for the uplink of cell-free massive MIMO.
//!
//! The pipeline for one network drop is:
//!
//! 1. [`geometry`] places APs and users, computes large-scale gains with
//!    correlated log-normal shadowing and draws Rayleigh block fading.
//! 2. [`pilots`] assigns pilot sequences and produces channel estimates with an
//!    additive error model.
//! 3. [`receivers`] runs the detection schemes (MF, UC, MMSE, MMSE-SIC, F-IC and
//!    the two JAPSIC variants, which combine AP selection with parallel
//!    interference cancellation).
//! 4. [`metrics`] turns channels and detector outputs into SINRs, sum spectral
//!    efficiency, operation counts and backhaul counts.
//! 5. [`harness`] wires everything into seeded, parallel experiments with CSV
//!    output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod pilots;
pub mod receivers;
pub mod rng;

pub use error::{Result, SimError};

/// Complex baseband sample.
pub type Cplx = num_complex::Complex64;

/// Dense complex matrix. Channel matrices are stored AP-major (`M x K`).
pub type CMatrix = nalgebra::DMatrix<Cplx>;

/// Dense real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;
