//! Exact entanglement of formation for two qubits via the concurrence.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{Spectrum, EIGEN_CLIP};
use crate::scalar::{log2, CMat, Real};
use crate::state::MultipartiteState;

use super::MeasureEstimate;

fn require_two_qubits<R: Real>(rho: &MultipartiteState<R>) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::Unsupported(format!("two-qubit formula needs dims [2, 2], got {:?}", rho.dims())));
    }
    Ok(())
}

/// h(p) = −p log₂ p − (1−p) log₂(1−p).
pub fn binary_entropy<R: Real>(p: R) -> R {
    let term = |q: R| if q <= R::zero() { R::zero() } else { -q * log2(q) };
    term(p) + term(R::one() - p)
}

/// C(ρ) = max(0, λ₁ − λ₂ − λ₃ − λ₄), λ the square roots of the eigenvalues of
/// √ρ ρ̃ √ρ with ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y), in decreasing order.
///
/// With ρ = W W† the λ are the singular values of Wᵀ(σ_y⊗σ_y)W, which avoids
/// the square root of near-zero eigenvalues on low-rank inputs.
pub fn concurrence<R: Real>(rho: &MultipartiteState<R>) -> Result<R> {
    require_two_qubits(rho)?;
    let zero = Complex::new(R::zero(), R::zero());
    let one = Complex::new(R::one(), R::zero());
    let mut yy = CMat::from_element(4, 4, zero);
    yy[(0, 3)] = -one;
    yy[(1, 2)] = one;
    yy[(2, 1)] = one;
    yy[(3, 0)] = -one;
    let spec = Spectrum::of(rho.matrix());
    let mut w = spec.vectors.clone();
    for (c, &v) in spec.values.iter().enumerate() {
        let scale = if v > R::of(EIGEN_CLIP) { v.sqrt() } else { R::zero() };
        for r in 0..4 {
            w[(r, c)] *= Complex::new(scale, R::zero());
        }
    }
    let tau = w.transpose() * yy * &w;
    let mut lambdas: Vec<R> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(c.max(R::zero()).min(R::one()))
}

/// E_F = h((1 + √(1 − C²))/2).
pub fn ef_from_concurrence<R: Real>(c: R) -> R {
    let c = c.max(R::zero()).min(R::one());
    binary_entropy((R::one() + (R::one() - c * c).max(R::zero()).sqrt()) * R::of(0.5))
}

/// Exact two-qubit entanglement of formation.
pub fn ef_two_qubit<R: Real>(rho: &MultipartiteState<R>) -> Result<MeasureEstimate<R>> {
    let c = concurrence(rho)?;
    Ok(MeasureEstimate::exact(ef_from_concurrence(c), 1e-9, "wootters"))
}

/// Squared concurrence of a two-qubit state.
pub fn tangle_two_qubit<R: Real>(rho: &MultipartiteState<R>) -> Result<MeasureEstimate<R>> {
    let c = concurrence(rho)?;
    Ok(MeasureEstimate::exact(c * c, 1e-9, "concurrence-squared"))
}
