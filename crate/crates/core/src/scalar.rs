//! The floating-point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

/// A point (or vector) in the plane.
pub type Point<T> = [T; 2];

/// A dense 2×2 matrix stored row-major.
pub type Mat2<T> = [[T; 2]; 2];

#[inline]
pub(crate) fn sub<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn norm<T: Real>(a: Point<T>) -> T {
    a[0].hypot(a[1])
}

#[inline]
pub(crate) fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn mat_vec<T: Real>(m: &Mat2<T>, v: Point<T>) -> Point<T> {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `vᵀ M v`.
#[inline]
pub(crate) fn quad_form<T: Real>(m: &Mat2<T>, v: Point<T>) -> T {
    dot(v, mat_vec(m, v))
}

pub(crate) fn scaled_identity<T: Real>(s: T) -> Mat2<T> {
    [[s, T::zero()], [T::zero(), s]]
}

/// Eigenvalues of a symmetric 2×2 matrix in ascending order.
pub(crate) fn sym_eigenvalues<T: Real>(m: &Mat2<T>) -> (T, T) {
    let half = T::lit(0.5);
    let mean = half * (m[0][0] + m[1][1]);
    let diff = half * (m[0][0] - m[1][1]);
    let off = half * (m[0][1] + m[1][0]);
    let rad = diff.hypot(off);
    (mean - rad, mean + rad)
}
