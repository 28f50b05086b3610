#![allow(dead_code)]

use cfmimo::geometry::realize_channel;
use cfmimo::receivers::{draw_symbols, ReceivedBlock};
use cfmimo::rng::{complex_normal, stream, Purpose};
use cfmimo::{CMatrix, RMatrix};

/// Rayleigh channel with gains `beta`, unit-power symbols and the received block.
pub fn instance(beta: &RMatrix, powers: &[f64], symbols: usize, noise: f64, seed: u64) -> (CMatrix, ReceivedBlock) {
    let g = realize_channel(beta, 0, &mut stream(seed, Purpose::Fading, 0, 0)).g;
    let s = draw_symbols(beta.ncols(), symbols, &mut stream(seed, Purpose::Symbols, 0, 0));
    let rx = ReceivedBlock::transmit(&g, s, powers, noise, &mut stream(seed, Purpose::Noise, 0, 0)).unwrap();
    (g, rx)
}

/// `g + c`, `c ~ CN(0, c_var)` entrywise.
pub fn perturb(g: &CMatrix, c_var: &RMatrix, seed: u64) -> CMatrix {
    let mut rng = stream(seed, Purpose::Estimation, 0, 0);
    let mut out = g.clone();
    for k in 0..g.ncols() {
        for m in 0..g.nrows() {
            out[(m, k)] += complex_normal(&mut rng, c_var[(m, k)]);
        }
    }
    out
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    max_abs_diff(a, b) / scale
}
