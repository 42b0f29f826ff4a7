//! Dense multipartite quantum states.
//!
//! A [`MultipartiteState`] is a density operator on C^{d_0} ⊗ … ⊗ C^{d_{k-1}}
//! stored as a dense complex matrix. Basis indices are row-major over the
//! subsystems: subsystem 0 is the most significant digit. Subsystem order is
//! significant everywhere, and [`partial_trace`] keeps the surviving factors
//! in their original order.

use std::fmt;
use std::path::Path;

use nalgebra::{Complex, ComplexField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Spectrum, EIGEN_CLIP};
use crate::scalar::{cr, log2_usize, CMat, CVec, Real};

/// Largest total dimension accepted by constructions that grow the space.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;
/// Purity below `1 - PURE_TOL` counts as mixed.
pub const PURE_TOL: f64 = 1e-8;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("no subsystems".into()));
    }
    if let Some(pos) = dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidDims(format!("subsystem {pos} has dimension 0")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidDims("total dimension overflows".into()))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// For every full basis index, its index within the kept factors and within
/// the traced-out factors.
fn split_indices(dims: &[usize], keep: &[usize]) -> (Vec<usize>, Vec<usize>, usize, usize) {
    let total: usize = dims.iter().product();
    let full_strides = strides(dims);
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
    let ks = strides(&kept_dims);
    let rs = strides(&rest_dims);
    let mut kept = vec![0; total];
    let mut traced = vec![0; total];
    for full in 0..total {
        let digit = |k: usize| (full / full_strides[k]) % dims[k];
        kept[full] = keep.iter().zip(&ks).map(|(&k, &s)| digit(k) * s).sum();
        traced[full] = rest.iter().zip(&rs).map(|(&k, &s)| digit(k) * s).sum();
    }
    (kept, traced, kept_dims.iter().product(), rest_dims.iter().product())
}

fn normalize_keep(keep: &[usize], parties: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set is empty".into()));
    }
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::InvalidSubsystems(format!("duplicate index in {keep:?}")));
    }
    if let Some(&bad) = sorted.iter().find(|&&k| k >= parties) {
        return Err(Error::InvalidSubsystems(format!("index {bad} out of range for {parties} subsystems")));
    }
    Ok(sorted)
}

/// Map from old basis index to the index after reordering subsystems so that
/// new subsystem `m` is old subsystem `order[m]`.
fn permutation_map(dims: &[usize], order: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() {
        return Err(Error::InvalidSubsystems(format!("order {order:?} does not list all {} subsystems", dims.len())));
    }
    for &o in order {
        if o >= dims.len() || seen[o] {
            return Err(Error::InvalidSubsystems(format!("{order:?} is not a permutation")));
        }
        seen[o] = true;
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let old_strides = strides(dims);
    let new_strides = strides(&new_dims);
    let total: usize = dims.iter().product();
    let map = (0..total)
        .map(|full| order.iter().zip(&new_strides).map(|(&o, &s)| ((full / old_strides[o]) % dims[o]) * s).sum())
        .collect();
    Ok((map, new_dims))
}

/// Density operator on a tensor product of finite-dimensional factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRecord", into = "StateRecord", bound = "R: Real")]
pub struct MultipartiteState<R: Real> {
    dims: Vec<usize>,
    matrix: CMat<R>,
    label: Option<String>,
}

impl<R: Real> MultipartiteState<R> {
    /// Validated constructor.
    pub fn new(dims: Vec<usize>, matrix: CMat<R>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimensionMismatch { expected: total, found: matrix.nrows() });
        }
        let state = MultipartiteState { dims, matrix, label: None };
        state.validate()?;
        Ok(state)
    }

    /// Caller guarantees the invariants; used for outputs of exact operations.
    pub(crate) fn from_parts(dims: Vec<usize>, matrix: CMat<R>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.nrows());
        MultipartiteState { dims, matrix, label: None }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        let m = CMat::from_diagonal_element(total, total, cr(R::one() / R::of(total as f64)));
        Ok(Self::from_parts(dims, m))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(dims: Vec<usize>, probs: &[R]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if probs.len() != total {
            return Err(Error::DimensionMismatch { expected: total, found: probs.len() });
        }
        let m = CMat::from_fn(total, total, |r, c| if r == c { cr(probs[r]) } else { cr(R::zero()) });
        Self::new(dims, m)
    }

    pub fn from_pure(psi: &PureState<R>) -> Self {
        Self::from_parts(psi.dims.clone(), linalg::outer(&psi.vector))
    }

    /// Convex combination Σ w_i ρ_i of states with equal dims.
    pub fn mixture(parts: &[(R, &MultipartiteState<R>)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?.1;
        let n = first.dim();
        let mut m = CMat::zeros(n, n);
        for (w, s) in parts {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch { expected: n, found: s.dim() });
            }
            m += &s.matrix * cr(*w);
        }
        Self::new(first.dims.clone(), m)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &CMat<R> {
        &self.matrix
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.matrix);
        if herm > R::tol(HERMITIAN_TOL) {
            return Err(Error::NotHermitian(herm.to_f64()));
        }
        let tr = linalg::trace(&self.matrix);
        let dev = (tr - cr(R::one())).modulus();
        if dev > R::tol(TRACE_TOL) {
            return Err(Error::TraceNotOne(dev.to_f64()));
        }
        let min = linalg::eigvalsh(&self.matrix).last().copied().unwrap_or(R::zero());
        if min < -R::tol(PSD_TOL) {
            return Err(Error::NotPsd(min.to_f64()));
        }
        Ok(())
    }

    pub fn trace(&self) -> R {
        linalg::trace(&self.matrix).re
    }

    /// tr ρ².
    pub fn purity(&self) -> R {
        self.matrix.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn spectrum(&self) -> Spectrum<R> {
        Spectrum::of(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<R> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Numerical rank at the given eigenvalue threshold.
    pub fn rank(&self, clip: f64) -> usize {
        let c = R::of(clip);
        self.eigenvalues().iter().filter(|&&v| v > c).count()
    }

    pub fn is_pure(&self) -> bool {
        self.purity() >= R::one() - R::tol(PURE_TOL)
    }

    /// The state vector of a rank-one state (global phase fixed by the eigensolver).
    pub fn to_pure(&self) -> Result<PureState<R>> {
        let purity = self.purity();
        if purity < R::one() - R::tol(PURE_TOL) {
            return Err(Error::MixedInput { purity: purity.to_f64() });
        }
        let (_, v) = linalg::top_eigenpair(&self.matrix);
        PureState::normalized(self.dims.clone(), v)
    }

    /// U ρ U†.
    pub fn conjugate(&self, u: &CMat<R>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let m = linalg::hermitize(&(u * &self.matrix * u.adjoint()));
        Ok(Self::from_parts(self.dims.clone(), m))
    }

    /// Reorders subsystems: new subsystem `m` is old subsystem `order[m]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let (map, new_dims) = permutation_map(&self.dims, order)?;
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m[(map[r], map[c])] = self.matrix[(r, c)];
            }
        }
        Ok(MultipartiteState { dims: new_dims, matrix: m, label: self.label.clone() })
    }

    /// Regroups the state as a two-party state with dims `[d_A, d_B]` for a
    /// bipartite cut covering every subsystem.
    pub fn bipartite_view(&self, cut: &CutSpec) -> Result<Self> {
        cut.validate(self.parties())?;
        if !cut.is_bipartite() {
            return Err(Error::InvalidCut("expected a bipartite cut".into()));
        }
        let order: Vec<usize> = cut.side_a.iter().chain(&cut.side_b).copied().collect();
        let (da, db) = cut.bipartite_dims(&self.dims);
        let mut s = self.permute(&order)?;
        s.dims = vec![da, db];
        Ok(s)
    }
}

impl<R: Real> fmt::Display for MultipartiteState<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "state{:?}", self.dims)?;
        if let Some(l) = &self.label {
            write!(f, " ({l})")?;
        }
        Ok(())
    }
}

/// Unit vector on a tensor product space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureRecord", into = "PureRecord", bound = "R: Real")]
pub struct PureState<R: Real> {
    dims: Vec<usize>,
    vector: CVec<R>,
}

impl<R: Real> PureState<R> {
    pub fn new(dims: Vec<usize>, vector: CVec<R>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if vector.len() != total {
            return Err(Error::DimensionMismatch { expected: total, found: vector.len() });
        }
        let dev = (vector.norm() - R::one()).abs();
        if dev > R::tol(NORM_TOL) {
            return Err(Error::NotNormalized(dev.to_f64()));
        }
        Ok(PureState { dims, vector })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(dims: Vec<usize>, vector: CVec<R>) -> Result<Self> {
        let norm = vector.norm();
        if norm <= R::zero() {
            return Err(Error::NotNormalized(1.0));
        }
        Self::new(dims, vector.unscale(norm))
    }

    pub(crate) fn from_parts(dims: Vec<usize>, vector: CVec<R>) -> Self {
        PureState { dims, vector }
    }

    /// Computational basis vector |index⟩.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = check_dims(&dims)?;
        if index >= total {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {total}")));
        }
        let mut v = CVec::zeros(total);
        v[index] = cr(R::one());
        Ok(PureState { dims, vector: v })
    }

    /// Normalizes Σ a_i |i⟩ given real/imaginary amplitude pairs.
    pub fn from_amplitudes(dims: Vec<usize>, amps: &[(f64, f64)]) -> Result<Self> {
        let v = CVec::from_iterator(amps.len(), amps.iter().map(|&(re, im)| Complex::new(R::of(re), R::of(im))));
        Self::normalized(dims, v)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &CVec<R> {
        &self.vector
    }

    pub fn density(&self) -> MultipartiteState<R> {
        MultipartiteState::from_pure(self)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState<R>) -> Complex<R> {
        self.vector.dotc(&other.vector)
    }

    pub fn tensor(&self, other: &PureState<R>) -> PureState<R> {
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        PureState { dims, vector: linalg::kron_vec(&self.vector, &other.vector) }
    }

    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let (map, new_dims) = permutation_map(&self.dims, order)?;
        let mut v = CVec::zeros(self.dim());
        for (old, &new) in map.iter().enumerate() {
            v[new] = self.vector[old];
        }
        Ok(PureState { dims: new_dims, vector: v })
    }

    /// Coefficient matrix M with ψ = Σ M[k,t] |k⟩|t⟩, rows over the kept
    /// factors and columns over the rest.
    pub fn coefficient_matrix(&self, keep: &[usize]) -> Result<CMat<R>> {
        let keep = normalize_keep(keep, self.dims.len())?;
        let (kept, traced, dk, dt) = split_indices(&self.dims, &keep);
        let mut m = CMat::zeros(dk, dt);
        for full in 0..self.dim() {
            m[(kept[full], traced[full])] = self.vector[full];
        }
        Ok(m)
    }

    /// Marginal on the kept subsystems, computed without forming |ψ⟩⟨ψ|.
    pub fn reduced(&self, keep: &[usize]) -> Result<MultipartiteState<R>> {
        let sorted = normalize_keep(keep, self.dims.len())?;
        let m = self.coefficient_matrix(&sorted)?;
        let rho = linalg::hermitize(&(&m * m.adjoint()));
        Ok(MultipartiteState::from_parts(sorted.iter().map(|&k| self.dims[k]).collect(), rho))
    }

    /// Squared Schmidt coefficients across the cut `keep | rest`, descending.
    pub fn schmidt_spectrum(&self, keep: &[usize]) -> Result<Vec<R>> {
        let m = self.coefficient_matrix(keep)?;
        let gram = if m.nrows() <= m.ncols() { &m * m.adjoint() } else { m.adjoint() * &m };
        Ok(linalg::eigvalsh(&gram))
    }
}

/// Bipartition or tripartition of subsystem indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSpec {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_c: Option<Vec<usize>>,
}

impl CutSpec {
    pub fn bipartite(side_a: Vec<usize>, side_b: Vec<usize>) -> Self {
        CutSpec { side_a, side_b, side_c: None }
    }

    pub fn tripartite(side_a: Vec<usize>, side_b: Vec<usize>, side_c: Vec<usize>) -> Self {
        CutSpec { side_a, side_b, side_c: Some(side_c) }
    }

    /// First subsystem against all the others.
    pub fn first_vs_rest(parties: usize) -> Self {
        CutSpec::bipartite(vec![0], (1..parties).collect())
    }

    /// Parses `"0|1"`, `"0|1,2"` or `"0|1|2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let sides: Vec<Vec<usize>> = text
            .split('|')
            .map(|part| {
                part.split(',')
                    .map(|t| t.trim())
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| Error::InvalidCut(format!("bad index `{t}`"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        match sides.len() {
            2 => Ok(CutSpec::bipartite(sides[0].clone(), sides[1].clone())),
            3 => Ok(CutSpec::tripartite(sides[0].clone(), sides[1].clone(), sides[2].clone())),
            n => Err(Error::InvalidCut(format!("expected 2 or 3 sides, found {n}"))),
        }
    }

    pub fn is_bipartite(&self) -> bool {
        self.side_c.is_none()
    }

    /// Disjoint, nonempty sides whose union is every subsystem.
    pub fn validate(&self, parties: usize) -> Result<()> {
        let mut seen = vec![false; parties];
        let sides = [Some(&self.side_a), Some(&self.side_b), self.side_c.as_ref()];
        for side in sides.into_iter().flatten() {
            if side.is_empty() {
                return Err(Error::InvalidCut(format!("{self} has an empty side")));
            }
            for &i in side {
                if i >= parties {
                    return Err(Error::InvalidCut(format!("index {i} out of range for {parties} subsystems")));
                }
                if seen[i] {
                    return Err(Error::InvalidCut(format!("index {i} appears twice in {self}")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidCut(format!("{self} does not cover all {parties} subsystems")));
        }
        Ok(())
    }

    fn side_dim(side: &[usize], dims: &[usize]) -> usize {
        side.iter().map(|&i| dims[i]).product()
    }

    pub fn bipartite_dims(&self, dims: &[usize]) -> (usize, usize) {
        (Self::side_dim(&self.side_a, dims), Self::side_dim(&self.side_b, dims))
    }

    /// (d_A, d_B, d_C), with d_C = 1 for bipartite cuts.
    pub fn local_dims(&self, dims: &[usize]) -> (usize, usize, usize) {
        let dc = self.side_c.as_ref().map_or(1, |c| Self::side_dim(c, dims));
        (Self::side_dim(&self.side_a, dims), Self::side_dim(&self.side_b, dims), dc)
    }
}

impl fmt::Display for CutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &[usize]| s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{}|{}", join(&self.side_a), join(&self.side_b))?;
        if let Some(c) = &self.side_c {
            write!(f, "|{}", join(c))?;
        }
        Ok(())
    }
}

/// ρ_a ⊗ ρ_b, refusing results above [`DEFAULT_DIMENSION_CAP`].
pub fn tensor<R: Real>(a: &MultipartiteState<R>, b: &MultipartiteState<R>) -> Result<MultipartiteState<R>> {
    tensor_with_cap(a, b, DEFAULT_DIMENSION_CAP)
}

pub fn tensor_with_cap<R: Real>(
    a: &MultipartiteState<R>,
    b: &MultipartiteState<R>,
    cap: usize,
) -> Result<MultipartiteState<R>> {
    let requested = a.dim().saturating_mul(b.dim());
    if requested > cap {
        return Err(Error::DimensionCap { requested, cap });
    }
    let dims = a.dims.iter().chain(&b.dims).copied().collect();
    Ok(MultipartiteState::from_parts(dims, a.matrix.kronecker(&b.matrix)))
}

/// Reduced state on the subsystems in `keep`, listed in their original order.
pub fn partial_trace<R: Real>(rho: &MultipartiteState<R>, keep: &[usize]) -> Result<MultipartiteState<R>> {
    let keep = normalize_keep(keep, rho.parties())?;
    let (kept, traced, dk, dt) = split_indices(&rho.dims, &keep);
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    for full in 0..rho.dim() {
        groups[traced[full]].push((kept[full], full));
    }
    let mut out = CMat::zeros(dk, dk);
    for group in &groups {
        for &(kr, r) in group {
            for &(kc, c) in group {
                out[(kr, kc)] += rho.matrix[(r, c)];
            }
        }
    }
    let dims = keep.iter().map(|&k| rho.dims[k]).collect();
    Ok(MultipartiteState::from_parts(dims, linalg::hermitize(&out)))
}

/// S(ρ) = −tr ρ log₂ ρ, clamped to [0, log₂ dim].
pub fn von_neumann_entropy<R: Real>(rho: &MultipartiteState<R>) -> R {
    let s = linalg::spectrum_entropy(&rho.eigenvalues());
    s.max(R::zero()).min(log2_usize(rho.dim()))
}

/// ½‖a − b‖₁.
pub fn trace_distance<R: Real>(a: &MultipartiteState<R>, b: &MultipartiteState<R>) -> Result<R> {
    if a.dims != b.dims {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let diff = &a.matrix - &b.matrix;
    let half_norm = linalg::eigvalsh(&diff).iter().fold(R::zero(), |acc, v| acc + v.abs()) * R::of(0.5);
    Ok(half_norm.min(R::one()))
}

/// A purification on dims `[dim ρ, rank ρ]` whose first marginal is ρ.
pub fn purify<R: Real>(rho: &MultipartiteState<R>) -> PureState<R> {
    let spec = rho.spectrum();
    let n = rho.dim();
    let r = spec.rank(R::of(EIGEN_CLIP)).max(1);
    let mut v = CVec::zeros(n * r);
    for i in 0..r {
        let w = spec.values[i].max(R::zero()).sqrt();
        for a in 0..n {
            v[a * r + i] = spec.vectors[(a, i)] * cr(w);
        }
    }
    let norm = v.norm();
    PureState::from_parts(vec![n, r], v.unscale(norm))
}

/// Serialized form of a density operator: row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl<R: Real> From<MultipartiteState<R>> for StateRecord {
    fn from(s: MultipartiteState<R>) -> Self {
        let n = s.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let z = s.matrix[(r, c)];
                re.push(z.re.to_f64());
                im.push(z.im.to_f64());
            }
        }
        StateRecord { dims: s.dims, re, im, label: s.label }
    }
}

impl<R: Real> TryFrom<StateRecord> for MultipartiteState<R> {
    type Error = Error;

    fn try_from(rec: StateRecord) -> Result<Self> {
        let n = check_dims(&rec.dims)?;
        if rec.re.len() != n * n || rec.im.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: rec.re.len().min(rec.im.len()) });
        }
        let m = CMat::from_fn(n, n, |r, c| Complex::new(R::of(rec.re[r * n + c]), R::of(rec.im[r * n + c])));
        let mut s = MultipartiteState::new(rec.dims, m)?;
        s.label = rec.label;
        Ok(s)
    }
}

/// Serialized form of a state vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PureRecord {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl<R: Real> From<PureState<R>> for PureRecord {
    fn from(p: PureState<R>) -> Self {
        PureRecord {
            re: p.vector.iter().map(|z| z.re.to_f64()).collect(),
            im: p.vector.iter().map(|z| z.im.to_f64()).collect(),
            dims: p.dims,
        }
    }
}

impl<R: Real> TryFrom<PureRecord> for PureState<R> {
    type Error = Error;

    fn try_from(rec: PureRecord) -> Result<Self> {
        if rec.re.len() != rec.im.len() {
            return Err(Error::DimensionMismatch { expected: rec.re.len(), found: rec.im.len() });
        }
        let v = CVec::from_iterator(
            rec.re.len(),
            rec.re.iter().zip(&rec.im).map(|(&a, &b)| Complex::new(R::of(a), R::of(b))),
        );
        PureState::new(rec.dims, v)
    }
}

/// Reads and validates a state from a JSON record file.
pub fn load_state<R: Real>(path: impl AsRef<Path>) -> Result<MultipartiteState<R>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_state<R: Real>(state: &MultipartiteState<R>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(state)?)?;
    Ok(())
}

/// Standard named states used throughout tests and examples.
pub mod named {
    use super::*;

    fn amps<R: Real>(dims: Vec<usize>, entries: &[(usize, f64)]) -> PureState<R> {
        let total: usize = dims.iter().product();
        let mut v = CVec::zeros(total);
        for &(i, a) in entries {
            v[i] = cr(R::of(a));
        }
        let norm = v.norm();
        PureState::from_parts(dims, v.unscale(norm))
    }

    /// (|00⟩ + |11⟩)/√2.
    pub fn bell<R: Real>() -> PureState<R> {
        amps(vec![2, 2], &[(0, 1.0), (3, 1.0)])
    }

    /// (|01⟩ − |10⟩)/√2.
    pub fn singlet<R: Real>() -> PureState<R> {
        amps(vec![2, 2], &[(1, 1.0), (2, -1.0)])
    }

    /// (|000⟩ + |111⟩)/√2.
    pub fn ghz<R: Real>() -> PureState<R> {
        amps(vec![2, 2, 2], &[(0, 1.0), (7, 1.0)])
    }

    /// (|001⟩ + |010⟩ + |100⟩)/√3.
    pub fn w<R: Real>() -> PureState<R> {
        amps(vec![2, 2, 2], &[(1, 1.0), (2, 1.0), (4, 1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    type S = MultipartiteState<f64>;

    fn half_identity() -> S {
        S::maximally_mixed(vec![2]).unwrap()
    }

    #[test]
    fn tensor_of_maximally_mixed_qubits() {
        let t = tensor(&half_identity(), &half_identity()).unwrap();
        assert_eq!(t.dims(), &[2, 2]);
        let expected = S::maximally_mixed(vec![2, 2]).unwrap();
        assert!(trace_distance(&t, &expected).unwrap() < 1e-15);
    }

    #[test]
    fn tensor_of_bell_pairs_stays_pure() {
        let b = bell::<f64>().density();
        let t = tensor(&b, &b).unwrap();
        assert_eq!(t.dims(), &[2, 2, 2, 2]);
        assert_abs_diff_eq!(t.purity(), 1.0, epsilon = 1e-12);
        assert_eq!(t.rank(1e-10), 1);
    }

    #[test]
    fn tensor_respects_cap() {
        let big = S::maximally_mixed(vec![64]).unwrap();
        let err = tensor_with_cap(&big, &big, 1024).unwrap_err();
        assert!(matches!(err, Error::DimensionCap { requested: 4096, cap: 1024 }));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = partial_trace(&bell::<f64>().density(), &[0]).unwrap();
        assert!(trace_distance(&rho, &half_identity()).unwrap() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_empty_and_bad_keep() {
        let b = bell::<f64>().density();
        assert!(matches!(partial_trace(&b, &[]), Err(Error::InvalidSubsystems(_))));
        assert!(partial_trace(&b, &[2]).is_err());
        assert!(partial_trace(&b, &[0, 0]).is_err());
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        let a = S::diagonal(vec![2], &[0.9, 0.1]).unwrap();
        let b = S::maximally_mixed(vec![3]).unwrap();
        let c = S::diagonal(vec![2], &[0.25, 0.75]).unwrap();
        let abc = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let ac = partial_trace(&abc, &[2, 0]).unwrap();
        assert_eq!(ac.dims(), &[2, 2]);
        let expected = tensor(&a, &c).unwrap();
        assert!(trace_distance(&ac, &expected).unwrap() < 1e-14);
    }

    #[test]
    fn pure_reduction_matches_density_reduction() {
        let w = w::<f64>();
        for keep in [vec![0], vec![1, 2], vec![0, 2]] {
            let a = w.reduced(&keep).unwrap();
            let b = partial_trace(&w.density(), &keep).unwrap();
            assert!(trace_distance(&a, &b).unwrap() < 1e-14);
        }
    }

    #[test]
    fn entropy_reference_values() {
        assert_abs_diff_eq!(von_neumann_entropy(&S::maximally_mixed(vec![8]).unwrap()), 3.0, epsilon = 1e-12);
        assert!(von_neumann_entropy(&bell::<f64>().density()).abs() < 1e-9);
        let d = S::diagonal(vec![2], &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&d), 0.918_296, epsilon = 1e-6);
    }

    #[test]
    fn trace_distance_reference_values() {
        let a = bell::<f64>().density();
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
        let z0 = PureState::<f64>::basis(vec![2], 0).unwrap().density();
        let z1 = PureState::<f64>::basis(vec![2], 1).unwrap().density();
        assert_abs_diff_eq!(trace_distance(&z0, &z1).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&half_identity(), &z0).unwrap(), 0.5, epsilon = 1e-14);
        assert!(trace_distance(&z0, &a).is_err());
    }

    #[test]
    fn purification_of_maximally_mixed_qubit() {
        let p = purify(&half_identity());
        assert_eq!(p.dims(), &[2, 2]);
        let back = p.reduced(&[0]).unwrap();
        assert!(trace_distance(&back, &half_identity()).unwrap() < 1e-12);
        assert_abs_diff_eq!(p.schmidt_spectrum(&[0]).unwrap()[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn purification_of_pure_input_uses_trivial_ancilla() {
        let w = w::<f64>();
        let rho = MultipartiteState::new(vec![8], w.density().matrix().clone()).unwrap();
        let p = purify(&rho);
        assert_eq!(p.dims(), &[8, 1]);
        assert_abs_diff_eq!(
            p.inner(&PureState::from_parts(vec![8, 1], w.vector().clone())).norm(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn validation_catches_each_invariant() {
        let bad_trace = CMat::<f64>::identity(2, 2);
        assert!(matches!(S::new(vec![2], bad_trace), Err(Error::TraceNotOne(_))));
        let mut nonherm = CMat::<f64>::identity(2, 2) * cr(0.5);
        nonherm[(0, 1)] = Complex::new(0.1, 0.0);
        assert!(matches!(S::new(vec![2], nonherm), Err(Error::NotHermitian(_))));
        let neg = CMat::<f64>::from_diagonal(&nalgebra::DVector::from_vec(vec![cr(1.5), cr(-0.5)]));
        assert!(matches!(S::new(vec![2], neg), Err(Error::NotPsd(_))));
        assert!(S::new(vec![2, 0], CMat::zeros(0, 0)).is_err());
        assert!(matches!(PureState::<f64>::new(vec![2], CVec::from_element(2, cr(1.0))), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn cut_parsing_and_validation() {
        let c = CutSpec::parse("0|1,2").unwrap();
        assert_eq!(c, CutSpec::bipartite(vec![0], vec![1, 2]));
        assert_eq!(c.to_string(), "0|1,2");
        let t = CutSpec::parse("0|1|2").unwrap();
        assert!(!t.is_bipartite());
        assert!(t.validate(3).is_ok());
        assert!(CutSpec::parse("0|0").unwrap().validate(2).is_err());
        assert!(CutSpec::parse("0|1").unwrap().validate(3).is_err());
        assert!(CutSpec::parse("0").is_err());
        assert!(CutSpec::parse("0|x").is_err());
        assert_eq!(t.local_dims(&[2, 3, 4]), (2, 3, 4));
    }

    #[test]
    fn json_round_trip_validates_on_read() {
        let w = w::<f64>().density().with_label("W");
        let text = serde_json::to_string(&w).unwrap();
        let back: S = serde_json::from_str(&text).unwrap();
        assert_eq!(back.label(), Some("W"));
        assert!(trace_distance(&w, &back).unwrap() < 1e-15);
        let broken = r#"{"dims":[2],"re":[1.0,0.0,0.0,1.0],"im":[0,0,0,0]}"#;
        assert!(serde_json::from_str::<S>(broken).is_err());
    }

    #[test]
    fn single_precision_path() {
        let b = bell::<f32>().density();
        let rho = partial_trace(&b, &[1]).unwrap();
        assert!((von_neumann_entropy(&rho) - 1.0).abs() < 1e-5);
    }
}
