//! Thin wrappers over `libm` so the whole crate does float math through one
//! deterministic, `no_std`-safe path.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// 2^x - 1 via `expm1`, accurate for small exponents.
#[inline]
pub fn exp2_m1(x: f64) -> f64 {
    libm::expm1(x * core::f64::consts::LN_2)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(base: f64, exponent: f64) -> f64 {
    libm::pow(base, exponent)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Iterated product `base^n`. Exact match for the complementary-probability
/// products the sensing model is defined by; attempt counts stay small, so
/// the O(n) loop is fine.
#[inline]
pub fn powi(base: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= base;
    }
    acc
}
