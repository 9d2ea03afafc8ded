// Scalar math routed through libm so results do not depend on the `std` feature.

use core::f64::consts::PI;

use num_complex::Complex64;

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn cis(x: f64) -> Complex64 {
    Complex64::new(libm::cos(x), libm::sin(x))
}

/// `e^{-2πi num/den}` with the numerator reduced first, which keeps large
/// index products accurate.
#[inline]
pub(crate) fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let r = num % den;
    cis(-2.0 * PI * (r as f64) / (den as f64))
}
