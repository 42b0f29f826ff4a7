use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{log2_usize, Real};
use crate::state::{CutSpec, MultipartiteState, PureState};

use super::MeasureEstimate;

fn check_cut(dims: &[usize], cut: &CutSpec) -> Result<()> {
    if !cut.is_bipartite() {
        return Err(Error::InvalidCut(format!("{cut} is not a bipartite cut")));
    }
    cut.validate(dims.len())
}

/// S(tr_B |ψ⟩⟨ψ|) in bits, computed from the Schmidt spectrum.
pub fn entropy_of_entanglement<R: Real>(psi: &PureState<R>, cut: &CutSpec) -> Result<MeasureEstimate<R>> {
    check_cut(psi.dims(), cut)?;
    let spectrum = psi.schmidt_spectrum(&cut.side_a)?;
    let (da, db) = cut.bipartite_dims(psi.dims());
    let value = linalg::spectrum_entropy(&spectrum).max(R::zero()).min(log2_usize(da.min(db)));
    Ok(MeasureEstimate::exact(value, 1e-9, "entropy-of-entanglement"))
}

/// Entropy of entanglement of a density operator that must be pure.
pub fn entropy_of_entanglement_state<R: Real>(rho: &MultipartiteState<R>, cut: &CutSpec) -> Result<MeasureEstimate<R>> {
    entropy_of_entanglement(&rho.to_pure()?, cut)
}

/// Tangle of a pure state across A:rest, 2(1 − tr ρ_A²); equals 4 det ρ_A for a qubit A.
pub fn tangle_of_pure_cut<R: Real>(psi: &PureState<R>, cut: &CutSpec) -> Result<MeasureEstimate<R>> {
    check_cut(psi.dims(), cut)?;
    let spectrum = psi.schmidt_spectrum(&cut.side_a)?;
    let purity = spectrum.iter().fold(R::zero(), |acc, &p| acc + p * p);
    let value = (R::of(2.0) * (R::one() - purity)).max(R::zero());
    Ok(MeasureEstimate::exact(value, 1e-9, "pure-tangle"))
}
