//! Network geometry, large-scale fading and block Rayleigh fading.
//!
//! Large-scale gains follow the urban-microcell law
//! `beta_dB = -30.5 - 36.7 log10(d / 1 m) + F`, where `F` is log-normal
//! shadowing with a 4 dB standard deviation. Shadowing is correlated across
//! users that are at most 50 m apart with covariance `16 * 2^(-delta / 9 m)`
//! and is drawn independently per AP.

use std::io::Write;

use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::complex_normal;
use crate::{CMatrix, RMatrix, Result, SimError};

/// Shadow fading standard deviation in dB.
pub const SHADOW_STD_DB: f64 = 4.0;
/// Distance over which shadow correlation halves.
pub const SHADOW_HALVING_DISTANCE_M: f64 = 9.0;
/// Users further apart than this have uncorrelated shadowing.
pub const SHADOW_CUTOFF_M: f64 = 50.0;
/// Link distances are clamped to this floor before evaluating path loss.
pub const MIN_DISTANCE_M: f64 = 1.0;

const PATHLOSS_INTERCEPT_DB: f64 = -30.5;
const PATHLOSS_SLOPE_DB: f64 = 36.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimArea {
    pub width: f64,
    pub height: f64,
}

impl SimArea {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let area = SimArea { width, height };
        area.validate()?;
        Ok(area)
    }

    /// The 1 km x 1 km square used by the reference scenario.
    pub fn square_km() -> Self {
        SimArea { width: 1000.0, height: 1000.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            return Err(SimError::config(format!(
                "area must have positive finite dimensions, got {} x {}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// How APs are laid out over the area. Users are always uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApLayout {
    #[default]
    Random,
    /// Square grid, cell centres filled row by row.
    Grid,
}

/// Whether user-side shadow correlation is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShadowCorrelation {
    #[default]
    UserDistance,
    Independent,
}

/// Place `aps` APs and `users` users over `area`. Returns `(ap_positions, user_positions)`.
pub fn place_nodes<R: Rng + ?Sized>(
    area: SimArea,
    users: usize,
    aps: usize,
    layout: ApLayout,
    rng: &mut R,
) -> Result<(Vec<Point>, Vec<Point>)> {
    area.validate()?;
    if users == 0 || aps == 0 {
        return Err(SimError::config(format!("need at least one user and one AP, got K={users}, M={aps}")));
    }
    let uniform = |rng: &mut R| Point::new(rng.random::<f64>() * area.width, rng.random::<f64>() * area.height);

    let ap_positions = match layout {
        ApLayout::Random => (0..aps).map(|_| uniform(rng)).collect(),
        ApLayout::Grid => {
            let cols = (aps as f64).sqrt().ceil() as usize;
            let rows = aps.div_ceil(cols);
            let dx = area.width / cols as f64;
            let dy = area.height / rows as f64;
            (0..aps)
                .map(|i| Point::new((i % cols) as f64 * dx + dx / 2.0, (i / cols) as f64 * dy + dy / 2.0))
                .collect()
        }
    };
    let user_positions = (0..users).map(|_| uniform(rng)).collect();
    Ok((ap_positions, user_positions))
}

/// Distance-dependent path loss in dB, shadowing excluded.
pub fn pathloss_db(distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(SimError::Domain(format!("path loss needs a positive distance, got {distance_m}")));
    }
    Ok(PATHLOSS_INTERCEPT_DB - PATHLOSS_SLOPE_DB * distance_m.log10())
}

/// Distance used for path loss, with the 1 m floor applied.
pub fn link_distance(ap: &Point, user: &Point) -> f64 {
    ap.distance(user).max(MIN_DISTANCE_M)
}

/// Shadow covariance (dB^2) between two users `delta_m` apart.
pub fn shadow_covariance_db2(delta_m: f64) -> f64 {
    if delta_m <= SHADOW_CUTOFF_M {
        SHADOW_STD_DB * SHADOW_STD_DB * 2f64.powf(-delta_m / SHADOW_HALVING_DISTANCE_M)
    } else {
        0.0
    }
}

/// Covariance of the `M x K` shadow field: one `K x K` user covariance shared by
/// every AP, with APs independent of each other.
#[derive(Debug, Clone)]
pub struct ShadowCovariance {
    pub users: RMatrix,
    pub aps: usize,
    /// `factor * factor^T` equals the (repaired) user covariance.
    factor: RMatrix,
    /// Number of negative eigenvalues clipped during PSD repair.
    pub clipped_eigenvalues: usize,
}

impl ShadowCovariance {
    pub fn factor(&self) -> &RMatrix {
        &self.factor
    }
}

pub fn shadow_covariance(user_positions: &[Point], aps: usize, mode: ShadowCorrelation) -> Result<ShadowCovariance> {
    let k = user_positions.len();
    if user_positions.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(SimError::Domain("non-finite user position".into()));
    }
    let var = SHADOW_STD_DB * SHADOW_STD_DB;
    let users = match mode {
        ShadowCorrelation::UserDistance => RMatrix::from_fn(k, k, |a, b| {
            if a == b {
                var
            } else {
                shadow_covariance_db2(user_positions[a].distance(&user_positions[b]))
            }
        }),
        ShadowCorrelation::Independent => RMatrix::from_diagonal_element(k, k, var),
    };
    let (factor, clipped) = psd_factor(&users)?;
    Ok(ShadowCovariance { users, aps, factor, clipped_eigenvalues: clipped })
}

/// Square-root factor of a symmetric matrix after clipping negative eigenvalues.
fn psd_factor(cov: &RMatrix) -> Result<(RMatrix, usize)> {
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(SimError::Numerical("shadow covariance eigen-decomposition failed".into()));
    }
    let clipped = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let mut factor = eig.eigenvectors.clone();
    for (j, r) in roots.iter().enumerate() {
        factor.column_mut(j).scale_mut(*r);
    }
    Ok((factor, clipped))
}

/// Draw one `M x K` shadow field in dB.
pub fn sample_shadowing<R: Rng + ?Sized>(cov: &ShadowCovariance, rng: &mut R) -> RMatrix {
    let k = cov.users.nrows();
    let mut out = RMatrix::zeros(cov.aps, k);
    let mut white = nalgebra::DVector::<f64>::zeros(k);
    for m in 0..cov.aps {
        for w in white.iter_mut() {
            *w = StandardNormal.sample(rng);
        }
        let row = cov.factor() * &white;
        out.row_mut(m).copy_from(&row.transpose());
    }
    out
}

/// One network drop: node positions and large-scale gains.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub ap_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
    /// Linear large-scale gain, `M x K`.
    pub beta: RMatrix,
    /// Shadow fading in dB, `M x K`.
    pub shadow_db: RMatrix,
}

impl NetworkRealization {
    pub fn aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn distance(&self, m: usize, k: usize) -> f64 {
        link_distance(&self.ap_positions[m], &self.user_positions[k])
    }

    /// Build a drop from positions and an already sampled shadow field.
    pub fn from_parts(ap_positions: Vec<Point>, user_positions: Vec<Point>, shadow_db: RMatrix) -> Result<Self> {
        let (m, k) = (ap_positions.len(), user_positions.len());
        if shadow_db.shape() != (m, k) {
            return Err(SimError::dim(format!("shadow field is {:?}, expected ({m}, {k})", shadow_db.shape())));
        }
        let mut beta = RMatrix::zeros(m, k);
        for mi in 0..m {
            for ki in 0..k {
                let pl = pathloss_db(link_distance(&ap_positions[mi], &user_positions[ki]))?;
                beta[(mi, ki)] = db_to_linear(pl + shadow_db[(mi, ki)]);
            }
        }
        Ok(NetworkRealization { ap_positions, user_positions, beta, shadow_db })
    }

    /// Write one row per AP/user link: `m,k,d,beta_db`.
    pub fn write_links_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "m,k,d,beta_db")?;
        for m in 0..self.aps() {
            for k in 0..self.users() {
                writeln!(out, "{m},{k},{:.6},{:.6}", self.distance(m, k), linear_to_db(self.beta[(m, k)]))?;
            }
        }
        Ok(())
    }
}

/// Generate a full drop: placement, shadowing, large-scale gains.
pub fn generate_network<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    area: SimArea,
    users: usize,
    aps: usize,
    layout: ApLayout,
    shadowing: ShadowCorrelation,
    placement_rng: &mut R1,
    shadow_rng: &mut R2,
) -> Result<NetworkRealization> {
    let (ap_positions, user_positions) = place_nodes(area, users, aps, layout, placement_rng)?;
    let cov = shadow_covariance(&user_positions, aps, shadowing)?;
    let shadow_db = sample_shadowing(&cov, shadow_rng);
    NetworkRealization::from_parts(ap_positions, user_positions, shadow_db)
}

/// Channel of one coherence block.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    /// `g[(m, k)] = sqrt(beta[(m, k)]) * h[(m, k)]`.
    pub g: CMatrix,
    pub block_index: usize,
}

/// Draw i.i.d. unit-variance Rayleigh fading and scale by `sqrt(beta)`.
pub fn realize_channel<R: Rng + ?Sized>(beta: &RMatrix, block_index: usize, rng: &mut R) -> ChannelBlock {
    let mut g = CMatrix::zeros(beta.nrows(), beta.ncols());
    // Column-major fill so the draw order is fixed by (k, m).
    for k in 0..beta.ncols() {
        for m in 0..beta.nrows() {
            g[(m, k)] = complex_normal(rng, 1.0) * beta[(m, k)].sqrt();
        }
    }
    ChannelBlock { g, block_index }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
