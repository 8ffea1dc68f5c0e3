//! Small helpers for complex channel/beam vectors.
//!
//! Channels and beamformers are plain `Vec<Complex64>`; the functions here
//! cover the handful of inner-product and norm operations the rest of the
//! crate needs.

use num_complex::Complex64;

/// A complex coefficient vector (channel or beamformer).
pub type Cvec = Vec<Complex64>;

/// Hermitian inner product `a^H b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm `‖v‖²`.
pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Euclidean norm `‖v‖`.
pub fn norm(v: &[Complex64]) -> f64 {
    norm_sqr(v).sqrt()
}

/// Entrywise sum of two vectors of equal length.
pub fn add(a: &[Complex64], b: &[Complex64]) -> Cvec {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Vector scaled by a real factor.
pub fn scale(s: f64, v: &[Complex64]) -> Cvec {
    v.iter().map(|z| z * s).collect()
}

/// True when every entry is finite in both components.
pub fn is_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
