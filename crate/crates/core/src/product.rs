//! Maximization of ⟨x⊗y|H|x⊗y⟩ over product unit vectors.
//!
//! For a state ρ this is M(ρ), the largest overlap with a pure product state.
//! The same routine serves as the linear-minimization oracle of the
//! relative-entropy solver, where H is an arbitrary Hermitian matrix.
//!
//! Each run alternates two exact half-steps: with y fixed the optimal x is
//! the top eigenvector of (I⊗y)†H(I⊗y), and symmetrically for y. The
//! objective therefore never decreases. Runs start from Haar-random vectors
//! and the best local maximum over all restarts is kept, so the returned
//! value is a lower bound on the true maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::random::{haar_vector, SeededSampler};
use crate::scalar::{CMat, CVec, Real};
use crate::state::{CutSpec, MultipartiteState, PureState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSearch {
    pub restarts: usize,
    /// Stop a run once a full sweep gains less than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProductSearch {
    fn default() -> Self {
        ProductSearch { restarts: 64, tol: 1e-10, max_iter: 500 }
    }
}

impl ProductSearch {
    pub fn with_restarts(restarts: usize) -> Self {
        ProductSearch { restarts, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct ProductOverlapResult<R: Real> {
    /// ⟨x⊗y|H|x⊗y⟩ at the best point found.
    pub value: R,
    pub x: PureState<R>,
    pub y: PureState<R>,
    pub restarts_used: usize,
    /// Whether the best run met the gain tolerance before the iteration cap.
    pub converged: bool,
    /// Whether every half-step of every run was non-decreasing.
    pub monotone: bool,
    /// Certified upper bound on the true maximum, when an exhaustive grid was used.
    pub certified_upper: Option<R>,
}

/// (I⊗y)† H (I⊗y), an operator on the first factor.
fn compress_second<R: Real>(h: &CMat<R>, da: usize, db: usize, y: &CVec<R>) -> CMat<R> {
    let mut out = CMat::zeros(da, da);
    for a in 0..da {
        for a2 in 0..da {
            let mut acc = nalgebra::Complex::new(R::zero(), R::zero());
            for b in 0..db {
                let yb = y[b].conj();
                if yb.re == R::zero() && yb.im == R::zero() {
                    continue;
                }
                let row = a * db + b;
                let mut inner = nalgebra::Complex::new(R::zero(), R::zero());
                for b2 in 0..db {
                    inner += h[(row, a2 * db + b2)] * y[b2];
                }
                acc += yb * inner;
            }
            out[(a, a2)] = acc;
        }
    }
    linalg::hermitize(&out)
}

/// (x⊗I)† H (x⊗I), an operator on the second factor.
fn compress_first<R: Real>(h: &CMat<R>, da: usize, db: usize, x: &CVec<R>) -> CMat<R> {
    let mut out = CMat::zeros(db, db);
    for b in 0..db {
        for b2 in 0..db {
            let mut acc = nalgebra::Complex::new(R::zero(), R::zero());
            for a in 0..da {
                let xa = x[a].conj();
                let mut inner = nalgebra::Complex::new(R::zero(), R::zero());
                for a2 in 0..da {
                    inner += h[(a * db + b, a2 * db + b2)] * x[a2];
                }
                acc += xa * inner;
            }
            out[(b, b2)] = acc;
        }
    }
    linalg::hermitize(&out)
}

struct Run<R: Real> {
    value: R,
    x: CVec<R>,
    y: CVec<R>,
    converged: bool,
    monotone: bool,
}

fn ascend<R: Real>(h: &CMat<R>, da: usize, db: usize, y0: CVec<R>, search: &ProductSearch, slack: R) -> Run<R> {
    let mut y = y0;
    let (mut current, mut x) = linalg::top_eigenpair(&compress_second(h, da, db, &y));
    let mut monotone = true;
    let mut converged = false;
    let tol = R::of(search.tol);
    for _ in 0..search.max_iter {
        let (vy, ny) = linalg::top_eigenpair(&compress_first(h, da, db, &x));
        let (vx, nx) = linalg::top_eigenpair(&compress_second(h, da, db, &ny));
        if vy < current - slack || vx < vy - slack {
            monotone = false;
        }
        y = ny;
        x = nx;
        let gain = vx - current;
        current = vx;
        if gain < tol {
            converged = true;
            break;
        }
    }
    let xy = linalg::kron_vec(&x, &y);
    Run { value: linalg::expectation(h, &xy), x, y, converged, monotone }
}

/// Best product form value of a Hermitian `h` on C^da ⊗ C^db.
///
/// `warm_starts` are extra initial vectors for the second factor, tried in
/// addition to `search.restarts` Haar-random ones.
pub fn maximize_product_form<R: Real>(
    h: &CMat<R>,
    da: usize,
    db: usize,
    search: &ProductSearch,
    warm_starts: &[CVec<R>],
    sampler: &SeededSampler,
) -> Result<ProductOverlapResult<R>> {
    if h.nrows() != da * db || h.ncols() != da * db {
        return Err(Error::DimensionMismatch { expected: da * db, found: h.nrows() });
    }
    let norm = linalg::eigvalsh(h).iter().fold(R::zero(), |m, v| m.max(v.abs()));
    let slack = R::tol(1e-12) * norm.max(R::one());
    let mut best: Option<Run<R>> = None;
    let mut monotone = true;
    let mut used = 0;
    let random_starts = (0..search.restarts).map(|r| haar_vector::<R>(db, &mut sampler.child(r as u64).rng()));
    for y0 in warm_starts.iter().cloned().chain(random_starts) {
        used += 1;
        let run = ascend(h, da, db, y0, search, slack);
        monotone &= run.monotone;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::InvalidArgument("product search needs at least one start".into()))?;
    Ok(ProductOverlapResult {
        value: best.value,
        x: PureState::from_parts(vec![da], best.x),
        y: PureState::from_parts(vec![db], best.y),
        restarts_used: used,
        converged: best.converged,
        monotone,
        certified_upper: None,
    })
}

fn require_bipartite<R: Real>(rho: &MultipartiteState<R>, cut: &CutSpec) -> Result<MultipartiteState<R>> {
    if !cut.is_bipartite() {
        return Err(Error::InvalidCut(format!("{cut} is not bipartite")));
    }
    rho.bipartite_view(cut)
}

fn relabel<R: Real>(
    mut result: ProductOverlapResult<R>,
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
) -> ProductOverlapResult<R> {
    let side = |s: &[usize]| s.iter().map(|&i| rho.dims()[i]).collect::<Vec<_>>();
    result.x = PureState::from_parts(side(&cut.side_a), result.x.vector().clone());
    result.y = PureState::from_parts(side(&cut.side_b), result.y.vector().clone());
    result
}

/// M(ρ) = max ⟨x⊗y|ρ|x⊗y⟩ across a bipartite cut, by restarted alternating ascent.
///
/// The value is a lower bound on M(ρ); it is the global maximum only if one
/// of the restarts lands in the right basin.
pub fn max_product_overlap<R: Real>(
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
    search: &ProductSearch,
    sampler: &SeededSampler,
) -> Result<ProductOverlapResult<R>> {
    let view = require_bipartite(rho, cut)?;
    let (da, db) = (view.dims()[0], view.dims()[1]);
    let result = maximize_product_form(view.matrix(), da, db, search, &[], sampler)?;
    Ok(relabel(result, rho, cut))
}

/// Grid resolution of the exhaustive search over a qubit factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitGrid {
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for QubitGrid {
    fn default() -> Self {
        QubitGrid { polar: 256, azimuthal: 512 }
    }
}

impl QubitGrid {
    /// Every unit vector of C² lies within this distance (up to phase) of a grid point.
    pub fn covering_radius(&self) -> f64 {
        std::f64::consts::PI / (4.0 * self.polar as f64) + std::f64::consts::PI / self.azimuthal as f64
    }
}

/// M(ρ) with a certified upper bound, for cuts where one side is a single qubit.
///
/// The qubit factor q(θ, φ) = (cos θ/2, e^{iφ} sin θ/2) is scanned on a grid;
/// for each grid point the other factor is optimized exactly by an
/// eigen-solve. Since q ↦ λ_max((I⊗q)†ρ(I⊗q)) is 2‖ρ‖-Lipschitz, the grid
/// maximum plus 2‖ρ‖·radius bounds M(ρ) from above. The best grid point is
/// then polished by alternating ascent.
pub fn certified_product_overlap<R: Real>(
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
    grid: &QubitGrid,
    search: &ProductSearch,
) -> Result<ProductOverlapResult<R>> {
    let view = require_bipartite(rho, cut)?;
    let (da, db) = (view.dims()[0], view.dims()[1]);
    let (h, other, swapped) = if db == 2 {
        (view.matrix().clone(), da, false)
    } else if da == 2 {
        (view.permute(&[1, 0])?.matrix().clone(), db, true)
    } else {
        return Err(Error::Unsupported(format!("certified product search needs a qubit side (got {da}x{db})")));
    };
    let lambda_max = linalg::eigvalsh(&h)[0].max(R::zero());
    let mut best_val = R::min_value().unwrap_or(-R::one());
    let mut best_q = CVec::zeros(2);
    for i in 0..grid.polar {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / grid.polar as f64;
        for j in 0..grid.azimuthal {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / grid.azimuthal as f64;
            let (s, c) = (theta / 2.0).sin_cos();
            let q = CVec::from_vec(vec![
                nalgebra::Complex::new(R::of(c), R::zero()),
                nalgebra::Complex::new(R::of(s * phi.cos()), R::of(s * phi.sin())),
            ]);
            let v = linalg::eigvalsh(&compress_second(&h, other, 2, &q))[0];
            if v > best_val {
                best_val = v;
                best_q = q;
            }
        }
    }
    let upper = (best_val + R::of(2.0 * grid.covering_radius()) * lambda_max).min(lambda_max);
    let polished = maximize_product_form(
        &h,
        other,
        2,
        &ProductSearch { restarts: 0, ..*search },
        &[best_q],
        &SeededSampler::new(0),
    )?;
    let (x, y) = if swapped { (polished.y, polished.x) } else { (polished.x, polished.y) };
    let result = ProductOverlapResult {
        value: polished.value,
        x,
        y,
        restarts_used: grid.polar * grid.azimuthal,
        converged: polished.converged,
        monotone: polished.monotone,
        certified_upper: Some(upper.max(polished.value)),
    };
    Ok(relabel(result, rho, cut))
}
