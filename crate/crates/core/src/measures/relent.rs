//! Relative entropy of entanglement: closed-form bounds and a Frank-Wolfe
//! upper bound over explicit mixtures of product states.
//!
//! The solver minimizes F(σ) = −tr ρ log₂ σ over separable σ, so that
//! S(ρ‖σ) = F(σ) − S(ρ). Writing σ = V diag(s) V† and ρ̃ = V†ρV, the gradient
//! is ∇F = −T/ln 2 with T = V (L ∘ ρ̃) V†, where L holds the divided
//! differences of ln on the spectrum of σ. The linear-minimization oracle is
//! therefore the best product state for T, and the Frank-Wolfe gap is
//! (max ⟨x⊗y|T|x⊗y⟩ − tr Tσ)/ln 2. Away steps move weight off the worst
//! active atom. Every step is accepted only if F does not increase.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, Spectrum};
use crate::product::{maximize_product_form, ProductOverlapResult, ProductSearch};
use crate::random::SeededSampler;
use crate::scalar::{cr, log2_usize, CMat, CVec, Real};
use crate::state::{von_neumann_entropy, CutSpec, MultipartiteState, PureState};

use super::{normalization_ceiling, require_bipartite_cut, MeasureEstimate, SeparableMixture, Witness};

/// Eigenvalues of σ at or below this count as zero.
const KERNEL_CLIP: f64 = 1e-14;
/// Weight of ρ on the kernel of σ above which S(ρ‖σ) is infinite.
const SUPPORT_TOL: f64 = 1e-12;

/// −tr ρ log₂ σ, infinite when ρ has weight outside the support of σ.
fn cross_entropy<R: Real>(rho: &CMat<R>, sigma: &Spectrum<R>) -> R {
    let n = sigma.values.len();
    let mut total = R::zero();
    for i in 0..n {
        let v = sigma.vectors.column(i);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        let s = sigma.values[i];
        if s <= R::of(KERNEL_CLIP) {
            if weight > R::of(SUPPORT_TOL) {
                return R::max_value().unwrap_or(R::one() / R::zero());
            }
            continue;
        }
        total -= weight * s.ln();
    }
    total / R::ln_2()
}

/// S(ρ‖σ) = tr ρ log₂ ρ − tr ρ log₂ σ in bits; `R::max_value()` when supp ρ ⊄ supp σ.
pub fn relative_entropy<R: Real>(rho: &MultipartiteState<R>, sigma: &MultipartiteState<R>) -> Result<R> {
    if rho.dim() != sigma.dim() {
        return Err(crate::error::Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let cross = cross_entropy(rho.matrix(), &sigma.spectrum());
    if cross == R::max_value().unwrap_or(R::one() / R::zero()) {
        return Ok(cross);
    }
    Ok((cross - von_neumann_entropy(rho)).max(R::zero()))
}

/// log₂(d_A d_B) − S(ρ).
pub fn er_trivial_upper<R: Real>(rho: &MultipartiteState<R>, cut: &CutSpec) -> Result<MeasureEstimate<R>> {
    let view = require_bipartite_cut(rho, cut)?;
    let value = log2_usize::<R>(view.dim()) - von_neumann_entropy(&view);
    Ok(MeasureEstimate::upper(value, 1e-9, "log-dim-minus-entropy"))
}

/// −log₂ M(ρ) − S(ρ), clamped into the normalization range.
///
/// Sound only when `overlap` carries a certified upper bound on M(ρ), which
/// is then used in place of the search value; otherwise flagged heuristic.
pub fn er_overlap_lower<R: Real>(
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
    overlap: &ProductOverlapResult<R>,
) -> Result<MeasureEstimate<R>> {
    let view = require_bipartite_cut(rho, cut)?;
    let m = overlap.certified_upper.unwrap_or(overlap.value).min(R::one());
    let value = -(m.ln() / R::ln_2()) - von_neumann_entropy(&view);
    Ok(MeasureEstimate::lower(value, 1e-6, "product-overlap")
        .clamped(normalization_ceiling(rho.dims(), cut))
        .heuristic(overlap.certified_upper.is_none()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrankWolfeOptions {
    pub max_iter: usize,
    /// Largest number of product atoms kept in the mixture.
    pub mixture_cap: usize,
    /// Atoms lighter than this are dropped when that does not raise the objective.
    pub prune_below: f64,
    pub gap_tol: f64,
    pub rel_tol: f64,
    /// Random restarts of the product oracle per iteration.
    pub oracle: ProductSearch,
    pub line_search_steps: usize,
    /// Pairwise re-balancing steps among the current atoms after each oracle step.
    pub corrective_steps: usize,
    /// Gradient steps on the atom vectors themselves after each oracle step.
    pub polish_steps: usize,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        FrankWolfeOptions {
            max_iter: 200,
            mixture_cap: 256,
            prune_below: 1e-8,
            gap_tol: 1e-7,
            rel_tol: 1e-6,
            oracle: ProductSearch { restarts: 8, tol: 1e-12, max_iter: 200 },
            line_search_steps: 60,
            corrective_steps: 5,
            polish_steps: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct FrankWolfeRun<R: Real> {
    pub estimate: MeasureEstimate<R>,
    /// Last Frank-Wolfe gap; the optimum lies above value − gap if the oracle was exact.
    pub gap: R,
    pub iterations: usize,
    /// Objective S(ρ‖σ) after every accepted iteration, starting with σ = I/d.
    pub trace: Vec<R>,
    /// Whether every accepted step left the objective non-increasing.
    pub monotone: bool,
}

#[derive(Clone)]
struct Atom<R: Real> {
    x: CVec<R>,
    y: CVec<R>,
    xy: CVec<R>,
}

impl<R: Real> Atom<R> {
    fn new(x: CVec<R>, y: CVec<R>) -> Self {
        let xy = linalg::kron_vec(&x, &y);
        Atom { x, y, xy }
    }
}

struct Mixture<R: Real> {
    weights: Vec<R>,
    atoms: Vec<Atom<R>>,
}

impl<R: Real> Mixture<R> {
    fn density(&self, n: usize) -> CMat<R> {
        let mut m = CMat::zeros(n, n);
        for (w, a) in self.weights.iter().zip(&self.atoms) {
            m += linalg::outer(&a.xy) * cr(*w);
        }
        linalg::hermitize(&m)
    }
}

/// T = V (L ∘ ρ̃) V† and tr Tσ; `None` when ρ leaves the support of σ.
fn gradient_operator<R: Real>(rho: &CMat<R>, sigma: &Spectrum<R>) -> Option<(CMat<R>, R)> {
    let n = sigma.values.len();
    let clip = R::of(KERNEL_CLIP);
    let rt = sigma.vectors.adjoint() * rho * &sigma.vectors;
    for i in 0..n {
        if sigma.values[i] <= clip && rt[(i, i)].re > R::of(SUPPORT_TOL) {
            return None;
        }
    }
    let mut weighted = CMat::zeros(n, n);
    let mut trace = R::zero();
    for i in 0..n {
        let si = sigma.values[i];
        if si <= clip {
            continue;
        }
        for j in 0..n {
            let sj = sigma.values[j];
            if sj <= clip {
                continue;
            }
            let l = if (si - sj).abs() <= R::of(1e-12) * si.max(sj) {
                R::of(2.0) / (si + sj)
            } else {
                (si.ln() - sj.ln()) / (si - sj)
            };
            weighted[(i, j)] = rt[(i, j)] * cr(l);
        }
        trace += rt[(i, i)].re;
    }
    let t = &sigma.vectors * weighted * sigma.vectors.adjoint();
    Some((linalg::hermitize(&t), trace))
}

/// d/dγ of −tr ρ log₂(σ + γΔ), or +∞ when the point is infeasible.
fn slope<R: Real>(rho: &CMat<R>, sigma: &CMat<R>, delta: &CMat<R>) -> R {
    match gradient_operator(rho, &Spectrum::of(sigma)) {
        Some((t, _)) => -(t * delta).trace().re / R::ln_2(),
        None => R::max_value().unwrap_or(R::one()),
    }
}

/// Minimizer of the convex φ(γ) = F(σ + γΔ) on [0, γ_max] by bisection on φ'.
fn line_search<R: Real>(rho: &CMat<R>, sigma: &CMat<R>, delta: &CMat<R>, gamma_max: R, steps: usize) -> R {
    let at = |g: R| sigma + delta * cr(g);
    if slope(rho, &at(gamma_max), delta) <= R::zero() {
        return gamma_max;
    }
    let (mut lo, mut hi) = (R::zero(), gamma_max);
    for _ in 0..steps {
        let mid = (lo + hi) * R::of(0.5);
        if slope(rho, &at(mid), delta) <= R::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn overlap_sq<R: Real>(a: &CVec<R>, b: &CVec<R>) -> R {
    a.dotc(b).norm_sqr()
}

/// Away-step Frank-Wolfe minimization of S(ρ‖σ) over product mixtures σ.
pub fn frank_wolfe<R: Real>(
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
    options: &FrankWolfeOptions,
    sampler: &SeededSampler,
) -> Result<FrankWolfeRun<R>> {
    let view = require_bipartite_cut(rho, cut)?;
    let (da, db) = (view.dims()[0], view.dims()[1]);
    let n = da * db;
    let r = view.matrix();
    let entropy = von_neumann_entropy(&view);
    let unit = |dim: usize, k: usize| {
        let mut v = CVec::zeros(dim);
        v[k] = cr(R::one());
        v
    };

    let mut mix = Mixture { weights: Vec::new(), atoms: Vec::new() };
    for a in 0..da {
        for b in 0..db {
            mix.atoms.push(Atom::new(unit(da, a), unit(db, b)));
            mix.weights.push(R::one() / R::of(n as f64));
        }
    }
    let mut sigma = mix.density(n);
    let mut spec = Spectrum::of(&sigma);
    let mut value = cross_entropy(r, &spec);
    let mut trace = vec![value - entropy];
    let mut monotone = true;
    let mut converged = false;
    let mut gap = R::max_value().unwrap_or(R::one());
    let mut iterations = 0;
    let slack = R::of(1e-12) * value.abs().max(R::one());
    let mut eta = R::one();

    for it in 0..options.max_iter {
        iterations = it + 1;
        let Some((t, t_sigma)) = gradient_operator(r, &spec) else { break };

        let mut order: Vec<usize> = (0..mix.atoms.len()).collect();
        order.sort_by(|&i, &j| mix.weights[j].partial_cmp(&mix.weights[i]).unwrap_or(std::cmp::Ordering::Equal));
        let warm: Vec<CVec<R>> = order.iter().take(8).map(|&i| mix.atoms[i].y.clone()).collect();
        let best = maximize_product_form(&t, da, db, &options.oracle, &warm, &sampler.child(it as u64))?;
        let fw_gap = (best.value - t_sigma) / R::ln_2();
        gap = fw_gap.max(R::zero());
        if gap <= R::of(options.gap_tol) {
            converged = true;
            break;
        }

        let (away_idx, away_val) = mix
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i, linalg::expectation(&t, &a.xy)))
            .fold((0, R::max_value().unwrap_or(R::one())), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
        let away_gap = (t_sigma - away_val) / R::ln_2();

        let candidate = Atom::new(best.x.vector().clone(), best.y.vector().clone());
        let use_away = away_gap > fw_gap && mix.atoms.len() > 1;
        let (delta, gamma_max) = if use_away {
            let w = mix.weights[away_idx];
            (&sigma - linalg::outer(&mix.atoms[away_idx].xy), w / (R::one() - w))
        } else {
            (linalg::outer(&candidate.xy) - &sigma, R::one())
        };
        let gamma = line_search(r, &sigma, &delta, gamma_max, options.line_search_steps);
        if gamma <= R::zero() {
            converged = true;
            break;
        }

        let prev_weights = mix.weights.clone();
        let prev_len = mix.atoms.len();
        if use_away {
            for w in &mut mix.weights {
                *w *= R::one() + gamma;
            }
            mix.weights[away_idx] -= gamma;
        } else {
            for w in &mut mix.weights {
                *w *= R::one() - gamma;
            }
            match mix.atoms.iter().position(|a| overlap_sq(&a.xy, &candidate.xy) > R::one() - R::of(1e-12)) {
                Some(i) => mix.weights[i] += gamma,
                None => {
                    mix.atoms.push(candidate);
                    mix.weights.push(gamma);
                }
            }
        }
        let new_sigma = mix.density(n);
        let new_spec = Spectrum::of(&new_sigma);
        let new_value = cross_entropy(r, &new_spec);
        if new_value > value + slack {
            mix.atoms.truncate(prev_len);
            mix.weights = prev_weights;
            converged = true;
            break;
        }
        let improvement = value - new_value;
        sigma = new_sigma;
        spec = new_spec;
        value = new_value;

        prune(&mut mix, r, n, &mut sigma, &mut spec, &mut value, options, slack);
        let improvement = improvement
            + corrective(&mut mix, r, n, &mut sigma, &mut spec, &mut value, options, slack)
            + polish(&mut mix, r, (da, db), &mut sigma, &mut spec, &mut value, options.polish_steps, &mut eta);
        if value > trace.last().copied().unwrap_or(value) + entropy + slack {
            monotone = false;
        }
        trace.push(value - entropy);
        // E_R ≥ 0, so this is already optimal to within the tolerance.
        if value - entropy <= R::of(options.gap_tol) {
            converged = true;
            break;
        }
        if improvement < R::of(options.rel_tol) * (value - entropy).abs().max(R::of(1e-12)) {
            converged = true;
            break;
        }
    }

    let ceiling = normalization_ceiling(rho.dims(), cut);
    let side = |s: &[usize]| s.iter().map(|&i| rho.dims()[i]).collect::<Vec<_>>();
    let witness = SeparableMixture {
        weights: mix.weights.clone(),
        atoms: mix
            .atoms
            .iter()
            .map(|a| {
                (
                    PureState::from_parts(side(&cut.side_a), a.x.clone()),
                    PureState::from_parts(side(&cut.side_b), a.y.clone()),
                )
            })
            .collect(),
    };
    let mut estimate = MeasureEstimate::upper(value - entropy, 1e-9, "frank-wolfe")
        .clamped(ceiling)
        .with_witness(Witness::Separable(witness));
    estimate.converged = converged;
    Ok(FrankWolfeRun { estimate, gap, iterations, trace, monotone })
}

/// Pairwise steps that move weight from the atom with the smallest
/// ⟨T⟩ to the one with the largest, without calling the product oracle.
/// Only non-increasing steps are kept. Returns the total decrease.
#[allow(clippy::too_many_arguments)]
fn corrective<R: Real>(
    mix: &mut Mixture<R>,
    rho: &CMat<R>,
    n: usize,
    sigma: &mut CMat<R>,
    spec: &mut Spectrum<R>,
    value: &mut R,
    options: &FrankWolfeOptions,
    slack: R,
) -> R {
    let start = *value;
    for _ in 0..options.corrective_steps {
        if mix.atoms.len() < 2 {
            break;
        }
        let Some((t, _)) = gradient_operator(rho, spec) else { break };
        let vals: Vec<R> = mix.atoms.iter().map(|a| linalg::expectation(&t, &a.xy)).collect();
        let pick = |better: fn(R, R) -> bool| {
            (1..vals.len()).fold(0, |best, i| if better(vals[i], vals[best]) { i } else { best })
        };
        let (toward, away) = (pick(|a, b| a > b), pick(|a, b| a < b));
        if (vals[toward] - vals[away]) / R::ln_2() <= R::of(options.gap_tol) {
            break;
        }
        let delta = linalg::outer(&mix.atoms[toward].xy) - linalg::outer(&mix.atoms[away].xy);
        let gamma = line_search(rho, sigma, &delta, mix.weights[away], options.line_search_steps.min(20));
        if gamma <= R::zero() {
            break;
        }
        let mut trial = Mixture { weights: mix.weights.clone(), atoms: mix.atoms.clone() };
        trial.weights[toward] += gamma;
        trial.weights[away] -= gamma;
        let new_sigma = if trial.weights[away] <= R::zero() {
            trial.weights.remove(away);
            trial.atoms.remove(away);
            trial.density(n)
        } else {
            &*sigma + delta * cr(gamma)
        };
        let new_spec = Spectrum::of(&new_sigma);
        let new_value = cross_entropy(rho, &new_spec);
        if new_value > *value + slack {
            break;
        }
        *mix = trial;
        *sigma = new_sigma;
        *spec = new_spec;
        *value = new_value;
    }
    start - *value
}

/// Riemannian gradient steps on every atom |x⟩|y⟩ at once, with step
/// halving until the objective drops. The oracle only finds atoms up to
/// its own tolerance, and near a singular σ that residual misalignment
/// dominates the objective; moving the atoms directly removes it.
/// Returns the total decrease; `eta` carries the step size across calls.
#[allow(clippy::too_many_arguments)]
fn polish<R: Real>(
    mix: &mut Mixture<R>,
    rho: &CMat<R>,
    (da, db): (usize, usize),
    sigma: &mut CMat<R>,
    spec: &mut Spectrum<R>,
    value: &mut R,
    steps: usize,
    eta: &mut R,
) -> R {
    let start = *value;
    let n = da * db;
    for _ in 0..steps {
        let Some((t, _)) = gradient_operator(rho, spec) else { break };
        let grads: Vec<(CVec<R>, CVec<R>)> = mix
            .atoms
            .iter()
            .zip(&mix.weights)
            .map(|(a, &w)| {
                let tv = &t * &a.xy;
                let m = CMat::from_fn(da, db, |i, j| tv[i * db + j]);
                let mut gx = &m * a.y.conjugate() * cr(w);
                let mut gy = m.transpose() * a.x.conjugate() * cr(w);
                gx -= &a.x * a.x.dotc(&gx);
                gy -= &a.y * a.y.dotc(&gy);
                (gx, gy)
            })
            .collect();
        let norm = grads.iter().fold(R::zero(), |acc, (gx, gy)| acc + gx.norm_squared() + gy.norm_squared());
        if norm <= R::of(1e-30) {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let atoms: Vec<Atom<R>> = mix
                .atoms
                .iter()
                .zip(&grads)
                .map(|(a, (gx, gy))| {
                    let x = &a.x + gx * cr(*eta);
                    let y = &a.y + gy * cr(*eta);
                    Atom::new(x.unscale(x.norm()), y.unscale(y.norm()))
                })
                .collect();
            let trial = Mixture { weights: mix.weights.clone(), atoms };
            let trial_sigma = trial.density(n);
            let trial_spec = Spectrum::of(&trial_sigma);
            let trial_value = cross_entropy(rho, &trial_spec);
            if trial_value < *value {
                *mix = trial;
                *sigma = trial_sigma;
                *spec = trial_spec;
                *value = trial_value;
                *eta = (*eta * R::of(2.0)).min(R::of(1e6));
                accepted = true;
                break;
            }
            *eta *= R::of(0.5);
        }
        if !accepted {
            *eta = R::one();
            break;
        }
    }
    start - *value
}

#[allow(clippy::too_many_arguments)]
fn prune<R: Real>(
    mix: &mut Mixture<R>,
    rho: &CMat<R>,
    n: usize,
    sigma: &mut CMat<R>,
    spec: &mut Spectrum<R>,
    value: &mut R,
    options: &FrankWolfeOptions,
    slack: R,
) {
    let light = mix.weights.iter().any(|&w| w < R::of(options.prune_below));
    let over = mix.atoms.len() > options.mixture_cap;
    if !light && !over {
        return;
    }
    let mut keep: Vec<usize> = (0..mix.atoms.len()).filter(|&i| mix.weights[i] >= R::of(options.prune_below)).collect();
    if keep.len() > options.mixture_cap {
        keep.sort_by(|&i, &j| mix.weights[j].partial_cmp(&mix.weights[i]).unwrap_or(std::cmp::Ordering::Equal));
        keep.truncate(options.mixture_cap);
    }
    let total = keep.iter().fold(R::zero(), |acc, &i| acc + mix.weights[i]);
    let weights: Vec<R> = keep.iter().map(|&i| mix.weights[i] / total).collect();
    let atoms: Vec<Atom<R>> = keep.iter().map(|&i| mix.atoms[i].clone()).collect();
    let trial = Mixture { weights, atoms };
    let trial_sigma = trial.density(n);
    let trial_spec = Spectrum::of(&trial_sigma);
    let trial_value = cross_entropy(rho, &trial_spec);
    if trial_value <= *value + slack || over {
        *mix = trial;
        *sigma = trial_sigma;
        *spec = trial_spec;
        *value = trial_value;
    }
}

/// Upper bound on E_R from the Frank-Wolfe solver, with the product mixture as witness.
pub fn er_frank_wolfe_upper<R: Real>(
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
    options: &FrankWolfeOptions,
    sampler: &SeededSampler,
) -> Result<MeasureEstimate<R>> {
    Ok(frank_wolfe(rho, cut, options, sampler)?.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::max_product_overlap;
    use crate::random::{haar_pure, induced_bipartite};
    use crate::state::named;
    use approx::assert_abs_diff_eq;

    fn ab() -> CutSpec {
        CutSpec::bipartite(vec![0], vec![1])
    }

    fn mixture_of_products(d: usize, count: usize, sampler: &SeededSampler) -> MultipartiteState<f64> {
        let mut parts = Vec::new();
        for t in 0..count as u64 {
            let x = haar_pure::<f64>(d, &sampler.child(2 * t)).unwrap();
            let y = haar_pure::<f64>(d, &sampler.child(2 * t + 1)).unwrap();
            parts.push(x.tensor(&y).density());
        }
        let w = 1.0 / count as f64;
        let refs: Vec<(f64, &MultipartiteState<f64>)> = parts.iter().map(|s| (w, s)).collect();
        MultipartiteState::mixture(&refs).unwrap()
    }

    #[test]
    fn relative_entropy_reference_values() {
        let bell = named::bell::<f64>().density();
        let mixed = MultipartiteState::<f64>::maximally_mixed(vec![2, 2]).unwrap();
        assert_abs_diff_eq!(relative_entropy(&bell, &mixed).unwrap(), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(relative_entropy(&mixed, &mixed).unwrap(), 0.0, epsilon = 1e-12);
        let product = PureState::<f64>::basis(vec![2, 2], 0).unwrap().density();
        assert_eq!(relative_entropy(&bell, &product).unwrap(), f64::MAX);
    }

    #[test]
    fn closed_form_bounds_on_reference_states() {
        let bell = named::bell::<f64>().density();
        assert_abs_diff_eq!(er_trivial_upper(&bell, &ab()).unwrap().value, 2.0, epsilon = 1e-10);
        let mixed = MultipartiteState::<f64>::maximally_mixed(vec![3, 3]).unwrap();
        assert!(er_trivial_upper(&mixed, &ab()).unwrap().value.abs() < 1e-10);

        let root = SeededSampler::new(51);
        let overlap = max_product_overlap(&bell, &ab(), &ProductSearch::default(), &root).unwrap();
        let lower = er_overlap_lower(&bell, &ab(), &overlap).unwrap();
        assert_abs_diff_eq!(lower.value, 1.0, epsilon = 1e-6);
        assert!(lower.heuristic);
        let overlap = max_product_overlap(&mixed, &ab(), &ProductSearch::default(), &root).unwrap();
        assert!(er_overlap_lower(&mixed, &ab(), &overlap).unwrap().value < 1e-9);
        let prod = PureState::<f64>::basis(vec![2, 3], 1).unwrap().density();
        let overlap = max_product_overlap(&prod, &ab(), &ProductSearch::default(), &root).unwrap();
        assert!(er_overlap_lower(&prod, &ab(), &overlap).unwrap().value < 1e-9);
    }

    /// The exact gradient against a central difference of the objective.
    #[test]
    fn gradient_matches_finite_differences() {
        let root = SeededSampler::new(52);
        let rho = induced_bipartite::<f64>(3, 5, &root).unwrap();
        let sigma = induced_bipartite::<f64>(3, 12, &root.child(1)).unwrap();
        let omega = mixture_of_products(3, 3, &root.child(2));
        let delta = omega.matrix() - sigma.matrix();
        let h = 1e-5;
        let f = |g: f64| cross_entropy(rho.matrix(), &Spectrum::of(&(sigma.matrix() + &delta * cr(g))));
        let fd = (f(h) - f(-h)) / (2.0 * h);
        assert_abs_diff_eq!(slope(rho.matrix(), sigma.matrix(), &delta), fd, epsilon = 1e-6);
    }

    #[test]
    fn bell_state_converges_to_one() {
        let run =
            frank_wolfe(&named::bell::<f64>().density(), &ab(), &FrankWolfeOptions::default(), &SeededSampler::new(53))
                .unwrap();
        assert!(run.monotone);
        assert_abs_diff_eq!(run.estimate.value, 1.0, epsilon = 0.01);
    }

    #[test]
    fn separable_input_goes_to_zero_and_witness_recomputes() {
        let root = SeededSampler::new(54);
        let rho = mixture_of_products(3, 4, &root);
        let run = frank_wolfe(&rho, &ab(), &FrankWolfeOptions::default(), &root.child(99)).unwrap();
        assert!(run.monotone);
        assert!(run.estimate.value <= 0.01, "value {}", run.estimate.value);
        for w in run.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        let Some(Witness::Separable(sep)) = &run.estimate.witness else { panic!("missing witness") };
        let sigma = sep.density().unwrap();
        let recomputed = relative_entropy(&rho, &sigma).unwrap();
        assert_abs_diff_eq!(recomputed, run.estimate.value, epsilon = 1e-8);
    }

    #[test]
    fn sandwich_on_induced_states() {
        let root = SeededSampler::new(55);
        for t in 0..5 {
            let rho = induced_bipartite::<f64>(3, 5, &root.child(t)).unwrap();
            let overlap = max_product_overlap(&rho, &ab(), &ProductSearch::default(), &root.child(100 + t)).unwrap();
            let lower = er_overlap_lower(&rho, &ab(), &overlap).unwrap().value;
            let fw =
                er_frank_wolfe_upper(&rho, &ab(), &FrankWolfeOptions::default(), &root.child(200 + t)).unwrap().value;
            let triv = er_trivial_upper(&rho, &ab()).unwrap().value;
            assert!(lower <= fw + 1e-6 && fw <= triv + 1e-9, "{lower} {fw} {triv}");
        }
    }
}
