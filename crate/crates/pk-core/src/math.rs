//! Scalar float routines routed through `libm` so the crate builds without
//! `std`.

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Magnitude of `a` with the sign of `b` (Fortran-style `SIGN`).
#[inline]
pub(crate) fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        abs(a)
    } else {
        -abs(a)
    }
}
