//! A single handle for "evaluate measure X on a bipartite cut".
//!
//! [`Estimator::bracket`] returns a lower and an upper estimate. For exact
//! methods both are the same value; otherwise the upper side comes from an
//! explicit witness and the lower side from the product-overlap bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product::{certified_product_overlap, max_product_overlap, ProductSearch, QubitGrid};
use crate::random::SeededSampler;
use crate::scalar::Real;
use crate::state::{CutSpec, MultipartiteState};

use super::{
    ef_convex_roof_upper, ef_two_qubit, entropy_of_entanglement, er_frank_wolfe_upper, er_overlap_lower,
    er_trivial_upper, normalization_ceiling, require_bipartite_cut, tangle_of_pure_cut, tangle_two_qubit,
    FrankWolfeOptions, MeasureEstimate, RoofSearch,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Entropy of entanglement; pure inputs only.
    Ee,
    /// Exact two-qubit entanglement of formation.
    Ef2,
    /// Convex-roof upper bound on E_F.
    EfRoof,
    /// E_F by the best available method: entropy for pure, exact for two qubits, roof otherwise.
    Ef,
    /// Frank-Wolfe upper bound on E_R.
    ErFw,
    /// Closed-form E_R sandwich: overlap lower bound and log-dimension upper bound.
    ErBounds,
    /// Squared concurrence for two qubits, 2(1 − tr ρ_A²) for pure cuts.
    Tangle,
}

impl Measure {
    pub const ALL: [Measure; 7] =
        [Measure::Ee, Measure::Ef2, Measure::EfRoof, Measure::Ef, Measure::ErFw, Measure::ErBounds, Measure::Tangle];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Ee => "ee",
            Measure::Ef2 => "ef2",
            Measure::EfRoof => "ef-roof",
            Measure::Ef => "ef",
            Measure::ErFw => "er-fw",
            Measure::ErBounds => "er-bounds",
            Measure::Tangle => "tangle",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure '{s}'")))
    }
}

/// Lower and upper estimates of one quantity.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "R: Real")]
pub struct Bracket<R: Real> {
    pub lower: MeasureEstimate<R>,
    pub upper: MeasureEstimate<R>,
}

impl<R: Real> Bracket<R> {
    pub fn exact(estimate: MeasureEstimate<R>) -> Self {
        Bracket { lower: estimate.clone(), upper: estimate }
    }

    pub fn is_exact(&self) -> bool {
        self.upper.kind == super::BoundKind::Exact
    }

    pub fn width(&self) -> R {
        (self.upper.value - self.lower.value).max(R::zero())
    }

    /// Single representative value: the exact value, else the upper bound.
    pub fn point(&self) -> R {
        self.upper.value
    }
}

/// Measure choice together with the optimizer settings it needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimator {
    pub measure: Measure,
    pub roof: RoofSearch,
    pub frank_wolfe: FrankWolfeOptions,
    pub product: ProductSearch,
    /// Use the exhaustive qubit grid for the overlap lower bound when a side is a qubit.
    pub certify_overlap: bool,
    pub grid: QubitGrid,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl Estimator {
    pub fn new(measure: Measure, seed: u64) -> Self {
        Estimator {
            measure,
            roof: RoofSearch::default(),
            frank_wolfe: FrankWolfeOptions::default(),
            product: ProductSearch::default(),
            certify_overlap: false,
            grid: QubitGrid::default(),
            seed,
            stream: 0,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.roof.restarts = restarts;
        self.product.restarts = restarts.max(1);
        self
    }

    pub fn certified(mut self, flag: bool) -> Self {
        self.certify_overlap = flag;
        self
    }

    /// Same settings on an independent random stream.
    pub fn with_stream(&self, stream: u64) -> Self {
        Estimator { stream, ..self.clone() }
    }

    fn sampler(&self) -> SeededSampler {
        SeededSampler::with_stream(self.seed, self.stream)
    }

    /// Lower and upper estimates of the measure across a bipartite cut.
    pub fn bracket<R: Real>(&self, rho: &MultipartiteState<R>, cut: &CutSpec) -> Result<Bracket<R>> {
        let view = require_bipartite_cut(rho, cut)?;
        let ab = CutSpec::bipartite(vec![0], vec![1]);
        let pure = view.is_pure();
        let two_qubit = view.dims() == [2, 2];
        let ceiling = normalization_ceiling(rho.dims(), cut);
        let sampler = self.sampler();
        match self.measure {
            Measure::Ee => Ok(Bracket::exact(entropy_of_entanglement(&view.to_pure()?, &ab)?)),
            Measure::Ef2 => Ok(Bracket::exact(ef_two_qubit(&view)?)),
            Measure::Tangle => {
                if pure {
                    Ok(Bracket::exact(tangle_of_pure_cut(&view.to_pure()?, &ab)?))
                } else if two_qubit {
                    Ok(Bracket::exact(tangle_two_qubit(&view)?))
                } else {
                    Err(Error::Unsupported("tangle needs a pure state or two qubits".into()))
                }
            }
            _ if pure => Ok(Bracket::exact(entropy_of_entanglement(&view.to_pure()?, &ab)?)),
            Measure::Ef if two_qubit => Ok(Bracket::exact(ef_two_qubit(&view)?)),
            Measure::Ef | Measure::EfRoof => {
                let upper = ef_convex_roof_upper(&view, &ab, &self.roof, &sampler)?;
                let lower = self.overlap_lower(&view, &ab, &sampler.child(1))?;
                Ok(Bracket { lower, upper })
            }
            Measure::ErFw => {
                let upper = er_frank_wolfe_upper(&view, &ab, &self.frank_wolfe, &sampler)?;
                let lower = self.overlap_lower(&view, &ab, &sampler.child(1))?;
                Ok(Bracket { lower, upper })
            }
            Measure::ErBounds => {
                let upper = er_trivial_upper(&view, &ab)?.clamped(ceiling);
                let lower = self.overlap_lower(&view, &ab, &sampler.child(1))?;
                Ok(Bracket { lower, upper })
            }
        }
    }

    /// −log₂ M − S, which also bounds E_F from below since E_R ≤ E_F.
    fn overlap_lower<R: Real>(
        &self,
        view: &MultipartiteState<R>,
        ab: &CutSpec,
        sampler: &SeededSampler,
    ) -> Result<MeasureEstimate<R>> {
        let qubit_side = view.dims().contains(&2);
        let overlap = if self.certify_overlap && qubit_side {
            certified_product_overlap(view, ab, &self.grid, &self.product)?
        } else {
            max_product_overlap(view, ab, &self.product, sampler)?
        };
        let estimate = er_overlap_lower(view, ab, &overlap)?;
        if estimate.heuristic && estimate.value <= R::zero() {
            return Ok(MeasureEstimate::lower(R::zero(), 0.0, "nonnegativity"));
        }
        Ok(estimate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::induced_bipartite;
    use crate::state::{named, partial_trace};
    use approx::assert_abs_diff_eq;

    fn ab() -> CutSpec {
        CutSpec::bipartite(vec![0], vec![1])
    }

    #[test]
    fn names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
            assert_eq!(serde_json::to_value(m).unwrap(), m.name());
        }
        assert!("bogus".parse::<Measure>().is_err());
    }

    #[test]
    fn pure_inputs_are_exact_for_every_entropic_measure() {
        let w = named::w::<f64>().density();
        let cut = CutSpec::first_vs_rest(3);
        for m in [Measure::Ee, Measure::EfRoof, Measure::Ef, Measure::ErFw, Measure::ErBounds] {
            let b = Estimator::new(m, 1).bracket(&w, &cut).unwrap();
            assert!(b.is_exact(), "{m}");
            assert_abs_diff_eq!(b.point(), 0.918_295_834_054_489_6, epsilon = 1e-9);
        }
        let t = Estimator::new(Measure::Tangle, 1).bracket(&w, &cut).unwrap();
        assert_abs_diff_eq!(t.point(), 8.0 / 9.0, epsilon = 1e-12);
    }

    #[test]
    fn two_qubit_marginals_use_exact_formulas() {
        let marg = partial_trace(&named::w::<f64>().density(), &[0, 1]).unwrap();
        let b = Estimator::new(Measure::Ef, 2).bracket(&marg, &ab()).unwrap();
        assert!(b.is_exact());
        assert_abs_diff_eq!(b.point(), 0.550_047_759_582_757_6, epsilon = 1e-9);
        let t = Estimator::new(Measure::Tangle, 2).bracket(&marg, &ab()).unwrap();
        assert_abs_diff_eq!(t.point(), 4.0 / 9.0, epsilon = 1e-9);
    }

    #[test]
    fn mixed_brackets_are_ordered() {
        let rho = induced_bipartite::<f64>(3, 4, &SeededSampler::new(61)).unwrap();
        for m in [Measure::EfRoof, Measure::ErFw, Measure::ErBounds] {
            let b = Estimator::new(m, 3).with_restarts(4).bracket(&rho, &ab()).unwrap();
            assert!(b.lower.value <= b.upper.value + 1e-6, "{m}: {} > {}", b.lower.value, b.upper.value);
            assert!(b.upper.value <= 3f64.log2() + 1e-12);
        }
        assert!(Estimator::new(Measure::Ee, 0).bracket(&rho, &ab()).is_err());
        assert!(Estimator::new(Measure::Tangle, 0).bracket(&rho, &ab()).is_err());
    }

    #[test]
    fn certified_overlap_on_qubit_cut() {
        let rho = induced_bipartite::<f64>(2, 2, &SeededSampler::new(62)).unwrap();
        let mut est = Estimator::new(Measure::ErBounds, 4).certified(true);
        est.grid = QubitGrid { polar: 64, azimuthal: 128 };
        let b = est.bracket(&rho, &ab()).unwrap();
        assert!(!b.lower.heuristic);
    }
}
