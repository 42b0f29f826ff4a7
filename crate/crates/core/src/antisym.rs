//! Antisymmetric states α on (C^d)^⊗n and the chain g_k = E(A₀ : A₁…A_{2^k}).
//!
//! The antisymmetric subspace is spanned by one vector per n-element subset
//! c of {0,…,d−1}: (1/√n!) Σ_π sgn(π) |c_π(1) … c_π(n)⟩. The projector is
//! assembled from these vectors directly, so no permutation matrices are
//! summed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Bracket, Estimator};
use crate::scalar::{cr, CMat, CVec, Real};
use crate::state::{partial_trace, trace_distance, CutSpec, MultipartiteState, DEFAULT_DIMENSION_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntisymSpec {
    pub d: usize,
    pub n: usize,
}

impl AntisymSpec {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidDims(format!("antisymmetric state needs d, n ≥ 1 (got d={d}, n={n})")));
        }
        if n > d {
            return Err(Error::EmptyAntisymmetricSpace { d, n });
        }
        Ok(AntisymSpec { d, n })
    }

    /// Dimension of the antisymmetric subspace, binom(d, n).
    pub fn subspace_dim(&self) -> usize {
        binomial(self.d, self.n)
    }

    /// d^n, or `None` on overflow.
    pub fn total_dim(&self) -> Option<usize> {
        self.d.checked_pow(self.n as u32)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All permutations of 0..n with their signs.
pub fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, i8)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: i8, out: &mut Vec<(Vec<usize>, i8)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            // Choosing the i-th remaining element costs i transpositions.
            let s = if i % 2 == 0 { sign } else { -sign };
            rec(prefix, rest, s, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), 1, &mut out);
    out
}

fn combinations(d: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in start..d {
            cur.push(v);
            rec(v + 1, d, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, n, &mut Vec::new(), &mut out);
    out
}

fn flat_index(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

fn check_cap(spec: &AntisymSpec, cap: usize) -> Result<usize> {
    match spec.total_dim() {
        Some(dim) if dim <= cap => Ok(dim),
        Some(dim) => Err(Error::DimensionCap { requested: dim, cap }),
        None => Err(Error::DimensionCap { requested: usize::MAX, cap }),
    }
}

/// Orthonormal basis of the antisymmetric subspace, one vector per subset.
pub fn antisymmetric_basis<R: Real>(spec: &AntisymSpec) -> Result<Vec<CVec<R>>> {
    let dim = check_cap(spec, DEFAULT_DIMENSION_CAP)?;
    let perms = permutations_with_sign(spec.n);
    let norm = R::one() / R::of(perms.len() as f64).sqrt();
    let mut basis = Vec::new();
    for c in combinations(spec.d, spec.n) {
        let mut v = CVec::zeros(dim);
        let mut digits = vec![0; spec.n];
        for (p, sign) in &perms {
            for (slot, &src) in p.iter().enumerate() {
                digits[slot] = c[src];
            }
            v[flat_index(&digits, spec.d)] = cr(norm * R::of(*sign as f64));
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Unnormalized projector onto the antisymmetric subspace; its trace is binom(d, n).
pub fn antisymmetric_projector<R: Real>(spec: &AntisymSpec) -> Result<CMat<R>> {
    let basis = antisymmetric_basis::<R>(spec)?;
    let dim = basis[0].len();
    let mut p = CMat::zeros(dim, dim);
    for v in &basis {
        p += v * v.adjoint();
    }
    Ok(p)
}

/// α = P_anti / binom(d, n) on n parties of dimension d.
pub fn antisymmetric_state<R: Real>(spec: &AntisymSpec) -> Result<MultipartiteState<R>> {
    let p = antisymmetric_projector::<R>(spec)?;
    let scale = R::one() / R::of(spec.subspace_dim() as f64);
    Ok(MultipartiteState::from_parts(vec![spec.d; spec.n], p * cr(scale)))
}

/// Matrix of the permutation of tensor factors sending party `perm[j]` to slot j.
pub fn permutation_operator<R: Real>(d: usize, perm: &[usize]) -> Result<CMat<R>> {
    let n = perm.len();
    let dim = d
        .checked_pow(n as u32)
        .filter(|&v| v <= DEFAULT_DIMENSION_CAP)
        .ok_or(Error::DimensionCap { requested: d.saturating_pow(n as u32), cap: DEFAULT_DIMENSION_CAP })?;
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
    }
    let mut m = CMat::zeros(dim, dim);
    let mut digits = vec![0; n];
    let mut out = vec![0; n];
    for idx in 0..dim {
        let mut rem = idx;
        for slot in (0..n).rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        for j in 0..n {
            out[j] = digits[perm[j]];
        }
        m[(flat_index(&out, d), idx)] = cr(R::one());
    }
    Ok(m)
}

/// Trace distance between the marginal of α_{A^n} on `keep` and α_{A^k}, k = |keep|.
pub fn verify_marginal_property_on<R: Real>(spec: &AntisymSpec, keep: &[usize]) -> Result<R> {
    if keep.is_empty() || keep.len() > spec.n {
        return Err(Error::InvalidSubsystems(format!("need 1 ≤ k ≤ {} parties, got {keep:?}", spec.n)));
    }
    let alpha = antisymmetric_state::<R>(spec)?;
    let marginal = partial_trace(&alpha, keep)?;
    let target = antisymmetric_state::<R>(&AntisymSpec::new(spec.d, keep.len())?)?;
    trace_distance(&marginal, &target)
}

/// [`verify_marginal_property_on`] for the first k parties.
pub fn verify_marginal_property<R: Real>(spec: &AntisymSpec, k: usize) -> Result<R> {
    let keep: Vec<usize> = (0..k).collect();
    verify_marginal_property_on(spec, &keep)
}

/// How a ratio g_k / g_{k+1} was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioKind {
    /// Both values exact.
    Exact,
    /// Certified lower bound over certified upper bound, so a lower bound on the true ratio.
    Conservative,
    /// Formed from point estimates without a certified direction.
    Heuristic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRecord {
    pub k: usize,
    /// Number of parties 2^k + 1 of the antisymmetric state.
    pub parties: usize,
    pub cut: CutSpec,
    pub g: Bracket<f64>,
    /// g_k / g_{k+1}, absent on the last record or when g_{k+1} vanishes.
    pub ratio: Option<f64>,
    pub ratio_kind: Option<RatioKind>,
}

impl ChainRecord {
    pub fn value(&self) -> f64 {
        self.g.point()
    }
}

fn ratio_between(num: &Bracket<f64>, den: &Bracket<f64>) -> (Option<f64>, Option<RatioKind>) {
    let (value, kind) = if num.is_exact() && den.is_exact() {
        (num.point() / den.point(), RatioKind::Exact)
    } else if num.lower.is_certified_lower() && den.upper.is_certified_upper() {
        (num.lower.value / den.upper.value, RatioKind::Conservative)
    } else {
        (num.point() / den.point(), RatioKind::Heuristic)
    };
    if value.is_finite() {
        (Some(value), Some(kind))
    } else {
        (None, None)
    }
}

fn link_ratios(records: &mut [ChainRecord]) {
    for i in 0..records.len() {
        let (ratio, kind) = match records.get(i + 1) {
            Some(next) => ratio_between(&records[i].g, &next.g),
            None => (None, None),
        };
        records[i].ratio = ratio;
        records[i].ratio_kind = kind;
    }
}

/// Largest k for which α on 2^k + 1 parties exists and fits under the cap.
pub fn largest_feasible_k(d: usize, cap: usize) -> Option<usize> {
    let mut best = None;
    for k in 0..usize::BITS as usize {
        let parties = (1usize << k) + 1;
        if parties > d || d.checked_pow(parties as u32).is_none_or(|v| v > cap) {
            break;
        }
        best = Some(k);
    }
    best
}

/// g_k for k = 0..=max_k on α over 2^k + 1 parties, cut A₀ : rest.
pub fn chain_sequence(d: usize, max_k: usize, estimator: &Estimator) -> Result<Vec<ChainRecord>> {
    let feasible = largest_feasible_k(d, DEFAULT_DIMENSION_CAP);
    if feasible.is_none_or(|k| k < max_k) {
        return Err(Error::InvalidArgument(format!(
            "chain up to k={max_k} infeasible for d={d}; largest feasible k is {}",
            feasible.map_or("none".to_string(), |k| k.to_string())
        )));
    }
    let mut records = Vec::new();
    for k in 0..=max_k {
        let parties = (1usize << k) + 1;
        let alpha = antisymmetric_state::<f64>(&AntisymSpec::new(d, parties)?)?;
        let cut = CutSpec::first_vs_rest(parties);
        let mut g = estimator.bracket(&alpha, &cut)?;
        let ceiling = (d as f64).log2();
        g.lower.value = g.lower.value.min(ceiling);
        g.upper.value = g.upper.value.min(ceiling);
        records.push(ChainRecord { k, parties, cut, g, ratio: None, ratio_kind: None });
    }
    link_ratios(&mut records);
    Ok(records)
}

/// Exact records from given values; used to probe [`pigeonhole_index`].
pub fn chain_from_values(values: &[f64]) -> Vec<ChainRecord> {
    let mut records: Vec<ChainRecord> = values
        .iter()
        .enumerate()
        .map(|(k, &v)| ChainRecord {
            k,
            parties: (1usize << k.min(60)) + 1,
            cut: CutSpec::first_vs_rest((1usize << k.min(60)) + 1),
            g: Bracket::exact(crate::measures::MeasureEstimate::exact(v, 0.0, "given")),
            ratio: None,
            ratio_kind: None,
        })
        .collect();
    link_ratios(&mut records);
    records
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PigeonholeResult {
    pub k_bar: usize,
    pub ratio: f64,
    pub ratio_kind: RatioKind,
    /// 1 − ln(n^{t+1}/c)/n with n the number of ratios.
    pub threshold: f64,
}

/// Threshold 1 − ln(n^{t+1}/c)/n.
pub fn pigeonhole_threshold(n: usize, c: f64, t: f64) -> f64 {
    let n = n as f64;
    1.0 - ((t + 1.0) * n.ln() - c.ln()) / n
}

/// Smallest k̄ with g_k̄ / g_{k̄+1} at or above the threshold.
///
/// With n + 1 records there are n ratios. If none reaches the threshold the
/// result is [`Error::Inconclusive`]: the bounds may simply be too loose.
pub fn pigeonhole_index(records: &[ChainRecord], c: f64, t: f64) -> Result<PigeonholeResult> {
    if records.len() < 2 {
        return Err(Error::InvalidArgument(format!("pigeonhole needs at least 2 records, got {}", records.len())));
    }
    if c <= 0.0 {
        return Err(Error::InvalidArgument("pigeonhole constant c must be positive".into()));
    }
    let n = records.len() - 1;
    let threshold = pigeonhole_threshold(n, c, t);
    records[..n]
        .iter()
        .find_map(|r| match (r.ratio, r.ratio_kind) {
            (Some(ratio), Some(kind)) if ratio >= threshold => {
                Some(PigeonholeResult { k_bar: r.k, ratio, ratio_kind: kind, threshold })
            }
            _ => None,
        })
        .ok_or_else(|| Error::Inconclusive(format!("no ratio reaches the threshold {threshold:.6}")))
}
