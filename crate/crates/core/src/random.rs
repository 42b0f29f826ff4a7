//! Seeded Haar-random pure states, induced mixed states and random subspaces.
//!
//! Every sampler is a value: the same `(seed, stream)` pair always yields the
//! same draws, so trials can be run in any order or in parallel.

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cr, CMat, CVec, Real};
use crate::state::{MultipartiteState, PureState, DEFAULT_DIMENSION_CAP};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed plus stream id; the RNG state is derived as `seed ⊕ hash(stream)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededSampler {
    pub seed: u64,
    pub stream: u64,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        SeededSampler { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        SeededSampler { seed, stream }
    }

    /// Independent child stream, e.g. one per trial or per restart.
    pub fn child(&self, index: u64) -> Self {
        SeededSampler { seed: self.seed, stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(1))) }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ splitmix64(self.stream))
    }
}

/// Environment-induced state ρ = tr_{C^s} |ψ⟩⟨ψ| on C^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedStateSpec {
    pub n: usize,
    pub s: usize,
}

impl InducedStateSpec {
    pub fn new(n: usize, s: usize) -> Result<Self> {
        if n == 0 || s == 0 {
            return Err(Error::InvalidArgument(format!("induced state needs n, s >= 1 (got n={n}, s={s})")));
        }
        Ok(InducedStateSpec { n, s })
    }
}

/// Matrix of i.i.d. standard complex Gaussians (unnormalized).
pub fn ginibre<R: Real>(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMat<R> {
    let mut m = CMat::zeros(rows, cols);
    // column-major fill order keeps draws independent of R
    for c in 0..cols {
        for r in 0..rows {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(r, c)] = Complex::new(R::of(re), R::of(im));
        }
    }
    m
}

pub fn haar_vector<R: Real>(dim: usize, rng: &mut impl rand::Rng) -> CVec<R> {
    let g = ginibre::<R>(dim, 1, rng).column(0).into_owned();
    let norm = g.norm();
    g.unscale(norm)
}

/// Haar-random pure state on C^dim.
pub fn haar_pure<R: Real>(dim: usize, sampler: &SeededSampler) -> Result<PureState<R>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("Haar state of dimension 0".into()));
    }
    haar_pure_on(vec![dim], sampler)
}

/// Haar-random pure state on the product space with the given factor dims.
pub fn haar_pure_on<R: Real>(dims: Vec<usize>, sampler: &SeededSampler) -> Result<PureState<R>> {
    let total: usize = dims.iter().product();
    if total == 0 {
        return Err(Error::InvalidArgument("Haar state of dimension 0".into()));
    }
    let v = haar_vector(total, &mut sampler.rng());
    PureState::new(dims, v)
}

/// G/‖G‖_F for an n×s Ginibre G, so that GG† is a normalized induced state.
pub fn induced_factor<R: Real>(n: usize, s: usize, rng: &mut impl rand::Rng) -> CMat<R> {
    let g = ginibre::<R>(n, s, rng);
    let norm = g.norm();
    g.unscale(norm)
}

fn induced_on<R: Real>(dims: Vec<usize>, s: usize, sampler: &SeededSampler) -> MultipartiteState<R> {
    let n: usize = dims.iter().product();
    let g = induced_factor::<R>(n, s, &mut sampler.rng());
    MultipartiteState::from_parts(dims, linalg::hermitize(&(&g * g.adjoint())))
}

/// Sample of μ_{n,s} on C^n.
pub fn induced_state<R: Real>(spec: InducedStateSpec, sampler: &SeededSampler) -> MultipartiteState<R> {
    induced_on(vec![spec.n], spec.s, sampler)
}

/// Induced state on C^d ⊗ C^d with environment C^s.
pub fn induced_bipartite<R: Real>(d: usize, s: usize, sampler: &SeededSampler) -> Result<MultipartiteState<R>> {
    if d < 2 || s == 0 {
        return Err(Error::InvalidArgument(format!("induced bipartite state needs d >= 2, s >= 1 (got d={d}, s={s})")));
    }
    Ok(induced_on(vec![d, d], s, sampler))
}

/// Induced state on (C^d)^{⊗3} with environment C^s.
pub fn random_tripartite_induced<R: Real>(d: usize, s: usize, sampler: &SeededSampler) -> Result<MultipartiteState<R>> {
    random_tripartite_induced_with_cap(d, s, sampler, DEFAULT_DIMENSION_CAP)
}

pub fn random_tripartite_induced_with_cap<R: Real>(
    d: usize,
    s: usize,
    sampler: &SeededSampler,
    cap: usize,
) -> Result<MultipartiteState<R>> {
    if d < 2 || s == 0 {
        return Err(Error::InvalidArgument(format!("tripartite state needs d >= 2, s >= 1 (got d={d}, s={s})")));
    }
    let requested = d.saturating_mul(d).saturating_mul(d);
    if requested > cap {
        return Err(Error::DimensionCap { requested, cap });
    }
    Ok(induced_on(vec![d, d, d], s, sampler))
}

/// Orthonormal basis of a uniformly random `dim`-dimensional subspace of C^ambient.
pub fn random_subspace<R: Real>(ambient: usize, dim: usize, sampler: &SeededSampler) -> Result<Vec<PureState<R>>> {
    if dim > ambient {
        return Err(Error::InvalidArgument(format!("subspace dimension {dim} exceeds ambient dimension {ambient}")));
    }
    let q = orthonormal_columns::<R>(ambient, dim, &mut sampler.rng());
    Ok((0..dim).map(|c| PureState::from_parts(vec![ambient], q.column(c).into_owned())).collect())
}

/// Haar-distributed isometry C^cols → C^rows (QR of Ginibre with phase fix).
pub fn orthonormal_columns<R: Real>(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMat<R> {
    if cols == 0 {
        return CMat::zeros(rows, 0);
    }
    let qr = ginibre::<R>(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..cols {
        let d = r[(c, c)];
        let m = d.norm_sqr().sqrt();
        if m > R::zero() {
            let phase = d / cr(m);
            for i in 0..rows {
                q[(i, c)] *= phase;
            }
        }
    }
    q
}

/// Haar-random n×n unitary.
pub fn random_unitary<R: Real>(n: usize, sampler: &SeededSampler) -> CMat<R> {
    orthonormal_columns(n, n, &mut sampler.rng())
}
