//! Audits of monogamy relations E(A:BC) ≥ f(E(A:B), E(A:C)).
//!
//! A verdict is certified only when every bound it rests on points the
//! right way: a violation needs a certified upper bound on E(A:BC) and
//! certified lower bounds on both marginals, a satisfaction the reverse.
//! Anything else is reported as inconclusive.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Bracket, Estimator};
use crate::random::{random_tripartite_induced, SeededSampler};
use crate::state::{partial_trace, CutSpec, MultipartiteState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionId {
    Max,
    Sum,
    Quadrature,
    DimensionDependentEf,
    DimensionDependentEr,
    Custom,
}

impl FunctionId {
    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Max => "max",
            FunctionId::Sum => "sum",
            FunctionId::Quadrature => "quadrature",
            FunctionId::DimensionDependentEf => "dimension-dependent-ef",
            FunctionId::DimensionDependentEr => "dimension-dependent-er",
            FunctionId::Custom => "custom",
        }
    }

    /// Default power of the correction term in the dimension-dependent forms.
    pub fn default_exponent(self) -> Option<f64> {
        match self {
            FunctionId::DimensionDependentEf => Some(8.0),
            FunctionId::DimensionDependentEr => Some(4.0),
            _ => None,
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(FunctionId::Max),
            "sum" => Ok(FunctionId::Sum),
            "quadrature" => Ok(FunctionId::Quadrature),
            "dimension-dependent-ef" | "dimEF" | "dim-ef" => Ok(FunctionId::DimensionDependentEf),
            "dimension-dependent-er" | "dimER" | "dim-er" => Ok(FunctionId::DimensionDependentEr),
            "custom" => Ok(FunctionId::Custom),
            _ => Err(Error::InvalidArgument(format!("unknown constraint function '{s}'"))),
        }
    }
}

type CustomFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A constraint function f with its named parameters.
///
/// Parameters used by the dimension-dependent forms: `c`, `d_a`, `d_b`,
/// `d_c` and optionally `exponent`.
#[derive(Clone, Serialize, Deserialize)]
pub struct ConstraintFunction {
    pub id: FunctionId,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(skip)]
    custom: Option<CustomFn>,
}

impl fmt::Debug for ConstraintFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintFunction").field("id", &self.id).field("params", &self.params).finish()
    }
}

impl ConstraintFunction {
    pub fn new(id: FunctionId) -> Self {
        ConstraintFunction { id, params: BTreeMap::new(), custom: None }
    }

    pub fn max() -> Self {
        Self::new(FunctionId::Max)
    }

    pub fn sum() -> Self {
        Self::new(FunctionId::Sum)
    }

    pub fn quadrature() -> Self {
        Self::new(FunctionId::Quadrature)
    }

    /// max(x + c·y⁸/(d_A d_C log₂⁸ min(d_A,d_C)), y + c·x⁸/(d_A d_B log₂⁸ min(d_A,d_B))).
    pub fn dimension_dependent_ef(c: f64, d_a: usize, d_b: usize, d_c: usize) -> Self {
        Self::new(FunctionId::DimensionDependentEf).with_dims(c, d_a, d_b, d_c)
    }

    /// The fourth-power analogue of [`Self::dimension_dependent_ef`].
    pub fn dimension_dependent_er(c: f64, d_a: usize, d_b: usize, d_c: usize) -> Self {
        Self::new(FunctionId::DimensionDependentEr).with_dims(c, d_a, d_b, d_c)
    }

    pub fn custom(name: &str, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        let mut out = Self::new(FunctionId::Custom);
        out.params.insert(format!("custom:{name}"), 0.0);
        out.custom = Some(Arc::new(f));
        out
    }

    fn with_dims(self, c: f64, d_a: usize, d_b: usize, d_c: usize) -> Self {
        self.with_param("c", c)
            .with_param("d_a", d_a as f64)
            .with_param("d_b", d_b as f64)
            .with_param("d_c", d_c as f64)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    fn param(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingParameter(format!("{} needs parameter '{name}'", self.id)))
    }

    /// Fills `d_a`, `d_b`, `d_c` from a tripartite cut when not already set.
    pub fn bind_dims(mut self, dims: &[usize], cut: &CutSpec) -> Self {
        let (da, db, dc) = cut.local_dims(dims);
        for (k, v) in [("d_a", da), ("d_b", db), ("d_c", dc)] {
            self.params.entry(k.to_string()).or_insert(v as f64);
        }
        self
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        match self.id {
            FunctionId::Max => Ok(x.max(y)),
            FunctionId::Sum => Ok(x + y),
            FunctionId::Quadrature => Ok(x.hypot(y)),
            FunctionId::DimensionDependentEf | FunctionId::DimensionDependentEr => {
                let c = self.params.get("c").copied().unwrap_or(1.0);
                let (to_x, to_y) = self.corrections(x, y)?;
                Ok((x + c * to_x).max(y + c * to_y))
            }
            FunctionId::Custom => match &self.custom {
                Some(f) => Ok(f(x, y)),
                None => Err(Error::MissingParameter("custom function has no closure (not serializable)".into())),
            },
        }
    }

    /// Correction terms (y^p/(d_A d_C log₂^p min(d_A,d_C)), x^p/(d_A d_B log₂^p min(d_A,d_B)))
    /// of the dimension-dependent forms, before multiplying by c.
    fn corrections(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let p = self.params.get("exponent").copied().or(self.id.default_exponent()).unwrap_or(1.0);
        let (da, db, dc) = (self.param("d_a")?, self.param("d_b")?, self.param("d_c")?);
        let scale = |d_other: f64| -> Result<f64> {
            let m = da.min(d_other);
            if m < 2.0 {
                return Err(Error::InvalidArgument(format!("{} needs local dimensions ≥ 2 (got min {m})", self.id)));
            }
            Ok(da * d_other * m.log2().powf(p))
        };
        Ok((y.max(0.0).powf(p) / scale(dc)?, x.max(0.0).powf(p) / scale(db)?))
    }

    /// Built-in forms are nondecreasing in both arguments; custom ones are probed on the box.
    pub fn is_monotone_on(&self, lo: (f64, f64), hi: (f64, f64)) -> Result<bool> {
        if self.id != FunctionId::Custom {
            return Ok(true);
        }
        const STEPS: usize = 8;
        let at = |i: usize, a: f64, b: f64| a + (b - a) * i as f64 / STEPS as f64;
        for i in 0..=STEPS {
            for j in 0..=STEPS {
                let (x, y) = (at(i, lo.0, hi.0), at(j, lo.1, hi.1));
                let v = self.evaluate(x, y)?;
                if i > 0 && self.evaluate(at(i - 1, lo.0, hi.0), y)? > v + 1e-12 {
                    return Ok(false);
                }
                if j > 0 && self.evaluate(x, at(j - 1, lo.1, hi.1))? > v + 1e-12 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Largest c ≥ 0 for which a dimension-dependent form still satisfies z ≥ f(x, y).
    ///
    /// `None` when even c = 0 fails, i.e. z < max(x, y).
    pub fn largest_admissible_c(&self, z: f64, x: f64, y: f64) -> Result<Option<f64>> {
        if !matches!(self.id, FunctionId::DimensionDependentEf | FunctionId::DimensionDependentEr) {
            return Err(Error::Unsupported(format!("{} has no constant to tune", self.id)));
        }
        if z < x.max(y) {
            return Ok(None);
        }
        let (to_x, to_y) = self.corrections(x, y)?;
        let bound = |room: f64, coef: f64| if coef > 0.0 { room / coef } else { f64::INFINITY };
        Ok(Some(bound(z - x, to_x).min(bound(z - y, to_y))))
    }
}

/// f(x, y) for a constraint function.
pub fn evaluate_f(f: &ConstraintFunction, x: f64, y: f64) -> Result<f64> {
    f.evaluate(x, y)
}

/// Positive grid {step, 2·step, …, max}².
pub fn positive_grid(max: f64, step: f64) -> Vec<(f64, f64)> {
    let n = (max / step).round() as usize;
    let pts: Vec<f64> = (1..=n).map(|i| i as f64 * step).collect();
    pts.iter().flat_map(|&x| pts.iter().map(move |&y| (x, y))).collect()
}

/// Whether f(x, y) > max(x, y) at every grid point.
pub fn strictness_check(f: &ConstraintFunction, grid: &[(f64, f64)]) -> Result<bool> {
    for &(x, y) in grid {
        if f.evaluate(x, y)? <= x.max(y) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether f(x, y) ≥ max(x, y) at every grid point.
pub fn admissibility_check(f: &ConstraintFunction, grid: &[(f64, f64)]) -> Result<bool> {
    for &(x, y) in grid {
        if f.evaluate(x, y)? < x.max(y) - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedViolation,
    CertifiedSatisfaction,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CertifiedViolation => "certified-violation",
            Verdict::CertifiedSatisfaction => "certified-satisfaction",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub measure: String,
    pub e_abc: Option<Bracket<f64>>,
    pub e_ab: Option<Bracket<f64>>,
    pub e_ac: Option<Bracket<f64>>,
    pub f: ConstraintFunction,
    /// e_abc − f(e_ab, e_ac) from point estimates.
    pub slack: Option<f64>,
    pub verdict: Verdict,
    pub provenance: Provenance,
    /// Single-copy values stand in for the regularized measures.
    pub single_copy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Applies the verdict rule to three brackets.
pub fn judge(
    e_abc: &Bracket<f64>,
    e_ab: &Bracket<f64>,
    e_ac: &Bracket<f64>,
    f: &ConstraintFunction,
) -> Result<(f64, Verdict)> {
    let slack = e_abc.point() - f.evaluate(e_ab.point(), e_ac.point())?;
    let monotone = f.is_monotone_on((e_ab.lower.value, e_ac.lower.value), (e_ab.upper.value, e_ac.upper.value))?;

    let violation_tol = e_abc.upper.tol + e_ab.lower.tol + e_ac.lower.tol;
    let violation = monotone
        && e_abc.upper.is_certified_upper()
        && e_ab.lower.is_certified_lower()
        && e_ac.lower.is_certified_lower()
        && e_abc.upper.value < f.evaluate(e_ab.lower.value, e_ac.lower.value)? - violation_tol;
    if violation {
        return Ok((slack, Verdict::CertifiedViolation));
    }

    let satisfaction_tol = e_abc.lower.tol + e_ab.upper.tol + e_ac.upper.tol;
    let satisfaction = monotone
        && e_abc.lower.is_certified_lower()
        && e_ab.upper.is_certified_upper()
        && e_ac.upper.is_certified_upper()
        && e_abc.lower.value + satisfaction_tol >= f.evaluate(e_ab.upper.value, e_ac.upper.value)?;
    let verdict = if satisfaction { Verdict::CertifiedSatisfaction } else { Verdict::Inconclusive };
    Ok((slack, verdict))
}

/// The marginal on sides `x ∪ y` and the cut x : y in its relabeled parties.
fn marginal_with_cut(
    rho: &MultipartiteState<f64>,
    x: &[usize],
    y: &[usize],
) -> Result<(MultipartiteState<f64>, CutSpec)> {
    let mut keep: Vec<usize> = x.iter().chain(y).copied().collect();
    keep.sort_unstable();
    let pos = |i: &usize| keep.iter().position(|k| k == i).expect("kept party");
    let cut = CutSpec::bipartite(x.iter().map(pos).collect(), y.iter().map(pos).collect());
    Ok((partial_trace(rho, &keep)?, cut))
}

/// Evaluates the measure on A:BC, A:B and A:C and applies the verdict rule.
pub fn audit(
    rho: &MultipartiteState<f64>,
    cut: &CutSpec,
    estimator: &Estimator,
    f: &ConstraintFunction,
) -> Result<MonogamyReport> {
    audit_with_provenance(rho, cut, estimator, f, Provenance::default())
}

pub fn audit_with_provenance(
    rho: &MultipartiteState<f64>,
    cut: &CutSpec,
    estimator: &Estimator,
    f: &ConstraintFunction,
    mut provenance: Provenance,
) -> Result<MonogamyReport> {
    let side_c =
        cut.side_c.clone().ok_or_else(|| Error::InvalidCut(format!("audit needs a tripartite cut, got {cut}")))?;
    cut.validate(rho.parties())?;
    let f = f.clone().bind_dims(rho.dims(), cut);
    if provenance.label.is_none() {
        provenance.label = rho.label().map(str::to_string);
    }
    if provenance.seed.is_none() {
        provenance.seed = Some(estimator.seed);
    }

    let mut bc = cut.side_b.clone();
    bc.extend(&side_c);
    let whole = CutSpec::bipartite(cut.side_a.clone(), bc);
    let evaluate = |state: &MultipartiteState<f64>, c: &CutSpec, stream: u64| {
        estimator.with_stream(estimator.stream.wrapping_mul(4).wrapping_add(stream)).bracket(state, c)
    };
    let results = (|| -> Result<(Bracket<f64>, Bracket<f64>, Bracket<f64>)> {
        let e_abc = evaluate(rho, &whole, 1)?;
        let (ab, ab_cut) = marginal_with_cut(rho, &cut.side_a, &cut.side_b)?;
        let e_ab = evaluate(&ab, &ab_cut, 2)?;
        let (ac, ac_cut) = marginal_with_cut(rho, &cut.side_a, &side_c)?;
        let e_ac = evaluate(&ac, &ac_cut, 3)?;
        Ok((e_abc, e_ab, e_ac))
    })();

    let measure = estimator.measure.to_string();
    match results {
        Ok((e_abc, e_ab, e_ac)) => {
            let (slack, verdict) = judge(&e_abc, &e_ab, &e_ac, &f)?;
            Ok(MonogamyReport {
                measure,
                e_abc: Some(e_abc),
                e_ab: Some(e_ab),
                e_ac: Some(e_ac),
                f,
                slack: Some(slack),
                verdict,
                provenance,
                single_copy: true,
                diagnostic: None,
            })
        }
        Err(err) => Ok(MonogamyReport {
            measure,
            e_abc: None,
            e_ab: None,
            e_ac: None,
            f,
            slack: None,
            verdict: Verdict::Inconclusive,
            provenance,
            single_copy: true,
            diagnostic: Some(err.to_string()),
        }),
    }
}

/// Audits with f = sum on `trials` random tripartite induced states.
pub fn nonmonogamy_scan(
    d: usize,
    s: usize,
    trials: usize,
    estimator: &Estimator,
    sampler: &SeededSampler,
) -> Result<Vec<MonogamyReport>> {
    nonmonogamy_scan_with(d, s, trials, estimator, &ConstraintFunction::sum(), sampler)
}

/// [`nonmonogamy_scan`] with an arbitrary constraint function.
///
/// Trials run in parallel; each draws its state and estimator stream from
/// its own child sampler, so the report list does not depend on scheduling.
pub fn nonmonogamy_scan_with(
    d: usize,
    s: usize,
    trials: usize,
    estimator: &Estimator,
    f: &ConstraintFunction,
    sampler: &SeededSampler,
) -> Result<Vec<MonogamyReport>> {
    let cut = CutSpec::tripartite(vec![0], vec![1], vec![2]);
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial = sampler.child(t);
            let rho = random_tripartite_induced::<f64>(d, s, &trial)?;
            let est = estimator.with_stream(trial.child(u64::MAX).stream);
            let provenance =
                Provenance { label: None, seed: Some(sampler.seed), trial: Some(t), d: Some(d), s: Some(s) };
            audit_with_provenance(&rho, &cut, &est, f, provenance)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSummary {
    pub trials: usize,
    pub violations: usize,
    pub satisfactions: usize,
    pub inconclusive: usize,
    pub mean_slack: f64,
    pub min_slack: f64,
    pub max_slack: f64,
    pub mean_e_abc: f64,
    pub mean_e_ab: f64,
    pub mean_e_ac: f64,
}

pub fn summarize(reports: &[MonogamyReport]) -> ScanSummary {
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let slacks: Vec<f64> = reports.iter().filter_map(|r| r.slack).collect();
    let mean = |xs: &[f64]| if xs.is_empty() { f64::NAN } else { xs.iter().sum::<f64>() / xs.len() as f64 };
    let points = |pick: fn(&MonogamyReport) -> Option<&Bracket<f64>>| -> Vec<f64> {
        reports.iter().filter_map(|r| pick(r).map(|b| b.point())).collect()
    };
    ScanSummary {
        trials: reports.len(),
        violations: count(Verdict::CertifiedViolation),
        satisfactions: count(Verdict::CertifiedSatisfaction),
        inconclusive: count(Verdict::Inconclusive),
        mean_slack: mean(&slacks),
        min_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
        max_slack: slacks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_e_abc: mean(&points(|r| r.e_abc.as_ref())),
        mean_e_ab: mean(&points(|r| r.e_ab.as_ref())),
        mean_e_ac: mean(&points(|r| r.e_ac.as_ref())),
    }
}
