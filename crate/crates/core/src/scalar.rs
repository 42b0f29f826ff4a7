//! Scalar abstraction shared by every numerical routine.
//!
//! Algorithms are written against [`Real`], which is implemented for `f32`
//! and `f64`. Tolerances in the public contracts are stated for double
//! precision; [`Real::tol`] widens them to what single precision can
//! actually resolve.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use serde::{de::DeserializeOwned, Serialize};

/// Real scalar type usable by the state and estimator code.
pub trait Real: RealField + Copy + Default + Send + Sync + Serialize + DeserializeOwned + 'static {
    /// Smallest tolerance meaningful at this precision.
    const TOL_FLOOR: f64;

    #[inline]
    fn of(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        nalgebra::try_convert::<Self, f64>(self).unwrap_or(f64::NAN)
    }

    /// A double-precision tolerance, widened to this type's floor.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::of(base.max(Self::TOL_FLOOR))
    }
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 0.0;
}

impl Real for f32 {
    const TOL_FLOOR: f64 = 1e-4;
}

pub type C<R> = Complex<R>;
pub type CMat<R> = DMatrix<Complex<R>>;
pub type CVec<R> = DVector<Complex<R>>;

#[inline]
pub(crate) fn cr<R: Real>(x: R) -> C<R> {
    Complex::new(x, R::zero())
}

/// e^{iθ}.
#[inline]
pub(crate) fn cis<R: Real>(theta: R) -> C<R> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub(crate) fn log2<R: Real>(x: R) -> R {
    x.ln() / R::ln_2()
}

#[inline]
pub(crate) fn log2_usize<R: Real>(n: usize) -> R {
    R::of((n as f64).log2())
}
