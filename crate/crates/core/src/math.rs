//! Float math routed explicitly through `libm`.
//!
//! `no_std` builds have no inherent `f64::ln`/`exp`/..., and builds that
//! happen to link `std` would silently resolve method calls to the platform
//! libm instead. Routing every transcendental through these shims keeps
//! results bit-identical across platforms and link contexts, which the
//! pipeline's byte-determinism guarantees rely on.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Base-2 logarithm, used by the DCG discount.
#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}
