//! Counter-based RNG stream derivation.
//!
//! Every random quantity in a run is drawn from a ChaCha stream keyed by
//! `(master seed, purpose, drop index, block index)`. The key is used directly
//! as the 256-bit ChaCha seed, so streams for different coordinates are
//! independent and the output of a block never depends on which worker
//! generated it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Keeping purposes apart means that adding a new
/// consumer never shifts the draws of an existing one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Placement = 1,
    Shadowing = 2,
    Pilots = 3,
    Fading = 4,
    Estimation = 5,
    Symbols = 6,
    Noise = 7,
    Sweep = 8,
}

pub type SimRng = ChaCha8Rng;

/// Derive the stream for one `(purpose, drop, block)` coordinate.
pub fn stream(master_seed: u64, purpose: Purpose, drop: u64, block: u64) -> SimRng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    seed[16..24].copy_from_slice(&drop.to_le_bytes());
    seed[24..].copy_from_slice(&block.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Draw one circularly-symmetric complex Gaussian with the given variance.
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> crate::Cplx {
    use rand_distr::{Distribution, StandardNormal};
    let scale = (variance * 0.5).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    crate::Cplx::new(re * scale, im * scale)
}
