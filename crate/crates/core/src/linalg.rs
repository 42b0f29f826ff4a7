//! Dense Hermitian linear algebra on top of nalgebra.

use nalgebra::{Complex, ComplexField, SymmetricEigen};

use crate::scalar::{cr, log2, CMat, CVec, Real};

/// Eigenvalues below this are treated as exact zeros in entropies and ranks.
pub const EIGEN_CLIP: f64 = 1e-12;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Spectrum<R: Real> {
    pub values: Vec<R>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: CMat<R>,
}

impl<R: Real> Spectrum<R> {
    pub fn of(m: &CMat<R>) -> Self {
        let n = m.nrows();
        let eig = SymmetricEigen::new(hermitize(m));
        let mut order: Vec<usize> = (0..n).collect();
        order
            .sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Spectrum { values, vectors }
    }

    /// V f(Λ) V†.
    pub fn map(&self, f: impl Fn(R) -> R) -> CMat<R> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let fv = cr(f(v));
            for r in 0..n {
                scaled[(r, c)] *= fv;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn rank(&self, clip: R) -> usize {
        self.values.iter().filter(|&&v| v > clip).count()
    }
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn eigvalsh<R: Real>(m: &CMat<R>) -> Vec<R> {
    let mut values = match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = (m[(0, 1)] + m[(1, 0)].conj()) * cr(R::of(0.5));
            let half = (a + d) * R::of(0.5);
            let diff = (a - d) * R::of(0.5);
            let rad = (diff * diff + b.norm_sqr()).sqrt();
            vec![half + rad, half - rad]
        }
        _ => hermitize(m).symmetric_eigenvalues().iter().copied().collect(),
    };
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    values
}

/// (M + M†)/2.
pub fn hermitize<R: Real>(m: &CMat<R>) -> CMat<R> {
    (m + m.adjoint()) * cr(R::of(0.5))
}

/// Largest entrywise modulus of M − M†.
pub fn hermiticity_defect<R: Real>(m: &CMat<R>) -> R {
    let n = m.nrows();
    let mut worst = R::zero();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).modulus();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn trace<R: Real>(m: &CMat<R>) -> Complex<R> {
    m.diagonal().iter().fold(Complex::new(R::zero(), R::zero()), |acc, &z| acc + z)
}

/// Shannon entropy in bits of a spectrum, ignoring values at or below the clip.
pub fn spectrum_entropy<R: Real>(values: &[R]) -> R {
    let clip = R::of(EIGEN_CLIP);
    values.iter().filter(|&&p| p > clip).fold(R::zero(), |acc, &p| acc - p * log2(p))
}

/// Largest eigenvalue and a unit eigenvector.
pub fn top_eigenpair<R: Real>(m: &CMat<R>) -> (R, CVec<R>) {
    let spec = Spectrum::of(m);
    let v = spec.vectors.column(0).into_owned();
    (spec.values[0], v)
}

/// ⟨v|M|v⟩ for Hermitian M (real part).
pub fn expectation<R: Real>(m: &CMat<R>, v: &CVec<R>) -> R {
    v.dotc(&(m * v)).re
}

pub fn outer<R: Real>(v: &CVec<R>) -> CMat<R> {
    v * v.adjoint()
}

/// Kronecker product of two vectors.
pub fn kron_vec<R: Real>(a: &CVec<R>, b: &CVec<R>) -> CVec<R> {
    let nb = b.len();
    CVec::from_fn(a.len() * nb, |i, _| a[i / nb] * b[i % nb])
}
