//! Entanglement-measure estimators with explicit bound semantics.
//!
//! Every estimator returns a [`MeasureEstimate`] tagged exact, upper or
//! lower. Upper bounds on E_F come from explicit ensembles, upper bounds on
//! E_R from explicit separable states, so both carry a witness that can be
//! re-evaluated. Lower bounds that depend on a heuristic inner maximization
//! are flagged `heuristic` and must not be used where soundness matters.

mod estimator;
mod pure;
mod relent;
mod roof;
mod wootters;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{cr, log2_usize, CMat, Real};
use crate::state::{trace_distance, CutSpec, MultipartiteState, PureState};

pub use estimator::{Bracket, Estimator, Measure};
pub use pure::{entropy_of_entanglement, entropy_of_entanglement_state, tangle_of_pure_cut};
pub use relent::{
    er_frank_wolfe_upper, er_overlap_lower, er_trivial_upper, frank_wolfe, relative_entropy, FrankWolfeOptions,
    FrankWolfeRun,
};
pub use roof::{ef_convex_roof_upper, RoofSearch};
pub use wootters::{binary_entropy, concurrence, ef_from_concurrence, ef_two_qubit, tangle_two_qubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Exact => "exact",
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
        })
    }
}

/// Object certifying an upper bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "R: Real")]
pub enum Witness<R: Real> {
    Ensemble(EnsembleDecomposition<R>),
    Separable(SeparableMixture<R>),
}

/// A measure value in bits together with what kind of bound it is.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct MeasureEstimate<R: Real> {
    pub value: R,
    pub kind: BoundKind,
    pub tol: R,
    pub method: String,
    /// The bound relies on an inner optimization that is not globally certified.
    #[serde(default)]
    pub heuristic: bool,
    #[serde(default = "yes")]
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<R>>,
}

fn yes() -> bool {
    true
}

impl<R: Real> MeasureEstimate<R> {
    pub fn exact(value: R, tol: f64, method: impl Into<String>) -> Self {
        Self::new(value, BoundKind::Exact, tol, method)
    }

    pub fn upper(value: R, tol: f64, method: impl Into<String>) -> Self {
        Self::new(value, BoundKind::Upper, tol, method)
    }

    pub fn lower(value: R, tol: f64, method: impl Into<String>) -> Self {
        Self::new(value, BoundKind::Lower, tol, method)
    }

    fn new(value: R, kind: BoundKind, tol: f64, method: impl Into<String>) -> Self {
        MeasureEstimate {
            value,
            kind,
            tol: R::tol(tol),
            method: method.into(),
            heuristic: false,
            converged: true,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Witness<R>) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn heuristic(mut self, flag: bool) -> Self {
        self.heuristic = flag;
        self
    }

    /// Clamps into [0, ceiling], the range allowed by normalization.
    pub fn clamped(mut self, ceiling: R) -> Self {
        self.value = self.value.max(R::zero()).min(ceiling);
        self
    }

    /// Whether this estimate soundly bounds the measure from above.
    pub fn is_certified_upper(&self) -> bool {
        matches!(self.kind, BoundKind::Exact | BoundKind::Upper) && !self.heuristic
    }

    pub fn is_certified_lower(&self) -> bool {
        matches!(self.kind, BoundKind::Exact | BoundKind::Lower) && !self.heuristic
    }
}

/// log₂ min(d_A, d_B), the normalization ceiling of any measure across the cut.
pub fn normalization_ceiling<R: Real>(dims: &[usize], cut: &CutSpec) -> R {
    let (da, db) = cut.bipartite_dims(dims);
    log2_usize(da.min(db))
}

pub(crate) fn require_bipartite_cut<R: Real>(
    rho: &MultipartiteState<R>,
    cut: &CutSpec,
) -> Result<MultipartiteState<R>> {
    if !cut.is_bipartite() {
        return Err(Error::InvalidCut(format!("{cut} is not a bipartite cut")));
    }
    rho.bipartite_view(cut)
}

/// Probability-weighted pure states Σ p_i |φ_i⟩⟨φ_i|.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct EnsembleDecomposition<R: Real> {
    pub probs: Vec<R>,
    pub states: Vec<PureState<R>>,
}

impl<R: Real> EnsembleDecomposition<R> {
    pub fn density(&self) -> Result<MultipartiteState<R>> {
        let first = self.states.first().ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
        let n = first.dim();
        let mut m = CMat::zeros(n, n);
        for (p, s) in self.probs.iter().zip(&self.states) {
            m += linalg::outer(s.vector()) * cr(*p);
        }
        Ok(MultipartiteState::from_parts(first.dims().to_vec(), linalg::hermitize(&m)))
    }

    /// Σ p_i S(tr_B φ_i) across a bipartite cut of the member states.
    pub fn average_entropy(&self, cut: &CutSpec) -> Result<R> {
        let mut total = R::zero();
        for (p, s) in self.probs.iter().zip(&self.states) {
            total += *p * entropy_of_entanglement(s, cut)?.value;
        }
        Ok(total)
    }

    /// Checks the weights and that the ensemble reproduces `target`.
    pub fn check(&self, target: &MultipartiteState<R>, tol: f64) -> Result<R> {
        if self.probs.len() != self.states.len() {
            return Err(Error::InvalidArgument("ensemble weights and states differ in length".into()));
        }
        if self.probs.iter().any(|&p| p < R::zero()) {
            return Err(Error::InvalidArgument("negative ensemble weight".into()));
        }
        let sum = self.probs.iter().fold(R::zero(), |a, &b| a + b);
        if (sum - R::one()).abs() > R::tol(1e-10) {
            return Err(Error::InvalidArgument(format!("ensemble weights sum to {}", sum.to_f64())));
        }
        let dist = trace_distance(&self.density()?, target)?;
        if dist > R::tol(tol) {
            return Err(Error::InvalidArgument(format!("ensemble misses target by {:e}", dist.to_f64())));
        }
        Ok(dist)
    }
}

/// Σ w_i |x_i⟩⟨x_i| ⊗ |y_i⟩⟨y_i|, a separable state in bipartite layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct SeparableMixture<R: Real> {
    pub weights: Vec<R>,
    pub atoms: Vec<(PureState<R>, PureState<R>)>,
}

impl<R: Real> SeparableMixture<R> {
    pub fn density(&self) -> Result<MultipartiteState<R>> {
        let (x0, y0) = self.atoms.first().ok_or_else(|| Error::InvalidArgument("empty separable mixture".into()))?;
        let n = x0.dim() * y0.dim();
        let mut m = CMat::zeros(n, n);
        for (w, (x, y)) in self.weights.iter().zip(&self.atoms) {
            m += linalg::outer(&linalg::kron_vec(x.vector(), y.vector())) * cr(*w);
        }
        Ok(MultipartiteState::from_parts(vec![x0.dim(), y0.dim()], linalg::hermitize(&m)))
    }
}
