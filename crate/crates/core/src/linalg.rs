//! Small dense-vector helpers. Everything is `Vec`/slice based; the ambient
//! dimensions in this crate are tiny (1-2 for the bundled objectives), so no
//! linear-algebra dependency is warranted.

use crate::scalar::Scalar;

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Euclidean norm.
pub fn norm<F: Scalar>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Euclidean distance.
pub fn dist<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// `a + alpha * b` as a new vector.
pub fn add_scaled<F: Scalar>(a: &[F], alpha: F, b: &[F]) -> Vec<F> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + alpha * y).collect()
}

/// Elementwise `a - b`.
pub fn sub<F: Scalar>(a: &[F], b: &[F]) -> Vec<F> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<F: Scalar>(alpha: F, a: &[F]) -> Vec<F> {
    a.iter().map(|&x| alpha * x).collect()
}

pub fn all_finite<F: Scalar>(a: &[F]) -> bool {
    a.iter().all(|v| v.is_finite())
}
