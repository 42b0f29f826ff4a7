//! Convex-roof upper bound on the entanglement of formation.
//!
//! Every m-element pure-state decomposition of ρ = Σ_i |v_i⟩⟨v_i| (v_i the
//! eigenvectors scaled by √λ_i) has the form ψ̃_j = Σ_i U_ji v_i for an m×m
//! unitary U. The search minimizes Σ_j p_j S(tr_B φ_j) over U by descent on
//! the unitary group: U ← exp(iηD) U with D a conjugate-gradient direction
//! built from the analytic Hermitian gradient, and the step η halved until
//! the objective drops enough. Any decomposition gives an upper bound, so the
//! result is sound whatever local minimum is reached.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Spectrum, EIGEN_CLIP};
use crate::random::{random_unitary, SeededSampler};
use crate::scalar::{cis, cr, log2, CMat, Real};
use crate::state::{CutSpec, MultipartiteState, PureState};

use super::{require_bipartite_cut, EnsembleDecomposition, MeasureEstimate, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoofSearch {
    /// Number of ensemble members; defaults to rank + 1.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop after several consecutive steps gaining less than this.
    pub tol: f64,
}

impl Default for RoofSearch {
    fn default() -> Self {
        RoofSearch { ensemble_size: None, restarts: 16, max_iter: 2000, tol: 1e-13 }
    }
}

impl RoofSearch {
    pub fn with_restarts(restarts: usize) -> Self {
        RoofSearch { restarts, ..Self::default() }
    }
}

struct Layout {
    da: usize,
    db: usize,
}

impl Layout {
    fn coefficients<R: Real>(&self, row: &[Complex<R>]) -> CMat<R> {
        CMat::from_row_slice(self.da, self.db, row)
    }

    /// Gram matrix on the smaller factor; its spectrum is the Schmidt spectrum.
    fn gram<R: Real>(&self, m: &CMat<R>) -> CMat<R> {
        if self.da <= self.db {
            m * m.adjoint()
        } else {
            m.adjoint() * m
        }
    }
}

/// Unnormalized entropy term p·S(ρ/p) of one member, from its Gram spectrum.
fn member_term<R: Real>(values: &[R]) -> R {
    let p = values.iter().fold(R::zero(), |a, &v| a + v.max(R::zero()));
    if p <= R::zero() {
        return R::zero();
    }
    let clip = R::of(EIGEN_CLIP) * p;
    values.iter().filter(|&&v| v > clip).fold(R::zero(), |acc, &v| acc - v * log2(v / p))
}

fn rows_of<R: Real>(psi: &CMat<R>, j: usize) -> Vec<Complex<R>> {
    psi.row(j).iter().copied().collect()
}

fn objective<R: Real>(psi: &CMat<R>, layout: &Layout) -> R {
    (0..psi.nrows())
        .map(|j| member_term(&linalg::eigvalsh(&layout.gram(&layout.coefficients(&rows_of(psi, j))))))
        .fold(R::zero(), |a, b| a + b)
}

/// Objective and its Hermitian gradient Z with dF = tr(K Z) for U ← exp(iK)U.
fn objective_and_gradient<R: Real>(psi: &CMat<R>, layout: &Layout) -> (R, CMat<R>) {
    let (m, n) = (psi.nrows(), psi.ncols());
    let mut value = R::zero();
    let mut grad_rows = CMat::zeros(m, n);
    for j in 0..m {
        let coeff = layout.coefficients(&rows_of(psi, j));
        let gram = layout.gram(&coeff);
        let spec = Spectrum::of(&gram);
        value += member_term(&spec.values);
        let p = spec.values.iter().fold(R::zero(), |a, &v| a + v.max(R::zero()));
        if p <= R::zero() {
            continue;
        }
        let clip = R::of(EIGEN_CLIP) * p;
        let g = spec.map(|v| if v > clip { -log2(v / p) } else { R::zero() });
        let weighted = if layout.da <= layout.db { &g * &coeff } else { &coeff * &g };
        for a in 0..layout.da {
            for b in 0..layout.db {
                grad_rows[(j, a * layout.db + b)] = weighted[(a, b)];
            }
        }
    }
    let a = psi * grad_rows.adjoint();
    let i = Complex::new(R::zero(), R::one());
    let z = (&a - a.adjoint()) * i;
    (value, linalg::hermitize(&z))
}

struct Descent<R: Real> {
    value: R,
    psi: CMat<R>,
    converged: bool,
}

/// exp(iηD)ψ for Hermitian D.
fn rotate<R: Real>(psi: &CMat<R>, spec: &Spectrum<R>, eta: R) -> CMat<R> {
    let mut scaled = spec.vectors.clone();
    for (c, &dv) in spec.values.iter().enumerate() {
        let phase = cis(eta * dv);
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= phase;
        }
    }
    scaled * spec.vectors.adjoint() * psi
}

fn inner<R: Real>(a: &CMat<R>, b: &CMat<R>) -> R {
    (a * b).trace().re
}

/// Polak-Ribière conjugate gradients on ψ ↦ exp(iK)ψ with Armijo backtracking.
///
/// Directions live in the Lie algebra of left translations, so no vector
/// transport is needed between iterates.
fn descend<R: Real>(mut psi: CMat<R>, layout: &Layout, search: &RoofSearch) -> Descent<R> {
    let (mut value, mut z) = objective_and_gradient(&psi, layout);
    let mut dir = -z.clone();
    let mut step = R::one();
    let tol = R::of(search.tol);
    let min_step = R::of(1e-14);
    let mut stalls = 0;
    let mut converged = false;
    for _ in 0..search.max_iter {
        let gnorm2 = z.norm_squared();
        if gnorm2 < R::of(1e-24) {
            converged = true;
            break;
        }
        let mut slope = inner(&dir, &z);
        if slope >= R::zero() {
            dir = -z.clone();
            slope = -gnorm2;
        }
        let spec = Spectrum::of(&dir);
        let mut accepted = None;
        while step >= min_step {
            let candidate = rotate(&psi, &spec, step);
            let cand_value = objective(&candidate, layout);
            if cand_value <= value + R::of(1e-4) * step * slope {
                accepted = Some((candidate, cand_value));
                break;
            }
            step *= R::of(0.5);
        }
        let Some((candidate, cand_value)) = accepted else {
            converged = true;
            break;
        };
        let gain = value - cand_value;
        psi = candidate;
        let (new_value, new_z) = objective_and_gradient(&psi, layout);
        let beta = (inner(&new_z, &(&new_z - &z)) / gnorm2).max(R::zero());
        dir = &dir * cr(beta) - &new_z;
        value = new_value;
        z = new_z;
        step = (step * R::of(2.0)).min(R::of(16.0));
        if gain < tol {
            stalls += 1;
            if stalls >= 5 {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Descent { value, psi, converged }
}

/// Upper bound on E_F across a bipartite cut from an optimized decomposition.
pub fn ef_convex_roof_upper<R: Real>(
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
    search: &RoofSearch,
    sampler: &SeededSampler,
) -> Result<MeasureEstimate<R>> {
    let view = require_bipartite_cut(rho, cut)?;
    let layout = Layout { da: view.dims()[0], db: view.dims()[1] };
    let n = view.dim();
    let spec = view.spectrum();
    let rank = spec.rank(R::of(EIGEN_CLIP)).max(1);
    let m = search.ensemble_size.unwrap_or(rank + 1);
    if m < rank {
        return Err(Error::EnsembleTooSmall { size: m, rank });
    }
    let mut base = CMat::zeros(m, n);
    for i in 0..rank {
        let w = cr(spec.values[i].max(R::zero()).sqrt());
        for c in 0..n {
            base[(i, c)] = spec.vectors[(c, i)] * w;
        }
    }

    let mut best: Option<Descent<R>> = None;
    let mut all_converged = true;
    for r in 0..search.restarts.max(1) {
        let start = if r == 0 { base.clone() } else { random_unitary::<R>(m, &sampler.child(r as u64)) * &base };
        let run = descend(start, &layout, search);
        all_converged &= run.converged;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");

    let (mut probs, mut states) = (Vec::new(), Vec::new());
    for j in 0..m {
        let row = best.psi.row(j).transpose();
        let p = row.norm_squared();
        if p > R::of(1e-300) {
            probs.push(p);
            states.push(PureState::from_parts(vec![layout.da, layout.db], row.unscale(p.sqrt())));
        }
    }
    let total = probs.iter().fold(R::zero(), |a, &b| a + b);
    for p in &mut probs {
        *p /= total;
    }
    let ensemble = EnsembleDecomposition { probs, states };
    let ceiling = super::normalization_ceiling(rho.dims(), cut);
    let value = best.value / total;
    let mut est = MeasureEstimate::upper(value, 1e-9, "convex-roof-descent")
        .clamped(ceiling)
        .with_witness(Witness::Ensemble(ensemble));
    est.converged = all_converged;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{ef_two_qubit, entropy_of_entanglement};
    use crate::random::{haar_pure_on, induced_bipartite};
    use crate::state::{named, partial_trace};
    use approx::assert_abs_diff_eq;

    fn ab() -> CutSpec {
        CutSpec::bipartite(vec![0], vec![1])
    }

    /// Central differences of the objective along U ← exp(iεK)U.
    #[test]
    fn gradient_matches_finite_differences() {
        let root = SeededSampler::new(41);
        let rho = induced_bipartite::<f64>(2, 3, &root).unwrap();
        let layout = Layout { da: 2, db: 2 };
        let spec = rho.spectrum();
        let mut psi = CMat::zeros(4, 4);
        for i in 0..3 {
            for c in 0..4 {
                psi[(i, c)] = spec.vectors[(c, i)] * cr(spec.values[i].sqrt());
            }
        }
        let psi = random_unitary::<f64>(4, &root.child(1)) * psi;
        let (_, z) = objective_and_gradient(&psi, &layout);
        let k = linalg::hermitize(&crate::random::ginibre::<f64>(4, 4, &mut root.child(2).rng()));
        let h = 1e-6;
        let shift = |eps: f64| {
            let spec = Spectrum::of(&k);
            let mut scaled = spec.vectors.clone();
            for (c, &kv) in spec.values.iter().enumerate() {
                let phase = cis(eps * kv);
                for r in 0..4 {
                    scaled[(r, c)] *= phase;
                }
            }
            objective(&((scaled * spec.vectors.adjoint()) * &psi), &layout)
        };
        let fd = (shift(h) - shift(-h)) / (2.0 * h);
        let analytic = (&k * &z).trace().re;
        assert_abs_diff_eq!(fd, analytic, epsilon = 1e-6);
    }

    #[test]
    fn pure_input_reproduces_entropy_of_entanglement() {
        let root = SeededSampler::new(42);
        let psi = haar_pure_on::<f64>(vec![3, 3], &root).unwrap();
        let exact = entropy_of_entanglement(&psi, &ab()).unwrap().value;
        let est = ef_convex_roof_upper(&psi.density(), &ab(), &RoofSearch::with_restarts(2), &root).unwrap();
        assert_abs_diff_eq!(est.value, exact, epsilon = 1e-6);
    }

    #[test]
    fn separable_mixture_reaches_zero() {
        let root = SeededSampler::new(43);
        let mut parts = Vec::new();
        for t in 0..4 {
            let x = crate::random::haar_pure::<f64>(2, &root.child(2 * t)).unwrap();
            let y = crate::random::haar_pure::<f64>(2, &root.child(2 * t + 1)).unwrap();
            parts.push(x.tensor(&y).density());
        }
        let refs: Vec<(f64, &MultipartiteState<f64>)> =
            parts.iter().zip([0.4, 0.3, 0.2, 0.1]).map(|(s, w)| (w, s)).collect();
        let rho = MultipartiteState::mixture(&refs).unwrap();
        let est = ef_convex_roof_upper(&rho, &ab(), &RoofSearch::with_restarts(16), &root).unwrap();
        assert!(est.value <= 1e-4, "roof value {}", est.value);
    }

    #[test]
    fn witness_reproduces_state_and_value() {
        let root = SeededSampler::new(44);
        let rho = induced_bipartite::<f64>(3, 4, &root).unwrap();
        let est = ef_convex_roof_upper(&rho, &ab(), &RoofSearch::with_restarts(3), &root).unwrap();
        let Some(Witness::Ensemble(ens)) = &est.witness else { panic!("missing witness") };
        ens.check(&rho, 1e-8).unwrap();
        assert_abs_diff_eq!(ens.average_entropy(&ab()).unwrap(), est.value, epsilon = 1e-9);
    }

    #[test]
    fn w_marginal_matches_wootters() {
        let ab_state = partial_trace(&named::w::<f64>().density(), &[0, 1]).unwrap();
        let est =
            ef_convex_roof_upper(&ab_state, &ab(), &RoofSearch::with_restarts(8), &SeededSampler::new(45)).unwrap();
        let exact = ef_two_qubit(&ab_state).unwrap().value;
        assert!(est.value >= exact - 1e-6 && est.value <= exact + 1e-3, "{} vs {}", est.value, exact);
    }

    #[test]
    fn ensemble_smaller_than_rank_is_rejected() {
        let rho = MultipartiteState::<f64>::maximally_mixed(vec![2, 2]).unwrap();
        let search = RoofSearch { ensemble_size: Some(3), ..RoofSearch::default() };
        assert!(matches!(
            ef_convex_roof_upper(&rho, &ab(), &search, &SeededSampler::new(0)),
            Err(Error::EnsembleTooSmall { size: 3, rank: 4 })
        ));
    }
}
