//! Float math shim: standard-library intrinsics when `std` is enabled,
//! `libm` otherwise. Only the functions the crate actually uses.

#![allow(dead_code)]

#[cfg(feature = "std")]
mod imp {
    #[inline(always)]
    pub(crate) fn sin(x: f64) -> f64 {
        x.sin()
    }
    #[inline(always)]
    pub(crate) fn cos(x: f64) -> f64 {
        x.cos()
    }
    #[inline(always)]
    pub(crate) fn tan(x: f64) -> f64 {
        x.tan()
    }
    #[inline(always)]
    pub(crate) fn acos(x: f64) -> f64 {
        x.acos()
    }
    #[inline(always)]
    pub(crate) fn asin(x: f64) -> f64 {
        x.asin()
    }
    #[inline(always)]
    pub(crate) fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline(always)]
    pub(crate) fn cbrt(x: f64) -> f64 {
        x.cbrt()
    }
    #[inline(always)]
    pub(crate) fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline(always)]
    pub(crate) fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline(always)]
    pub(crate) fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline(always)]
    pub(crate) fn powi(x: f64, n: i32) -> f64 {
        x.powi(n)
    }
    #[inline(always)]
    pub(crate) fn abs(x: f64) -> f64 {
        x.abs()
    }
    #[inline(always)]
    pub(crate) fn hypot(x: f64, y: f64) -> f64 {
        x.hypot(y)
    }
    #[inline(always)]
    pub(crate) fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[inline(always)]
    pub(crate) fn ceil(x: f64) -> f64 {
        x.ceil()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline(always)]
    pub(crate) fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[inline(always)]
    pub(crate) fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[inline(always)]
    pub(crate) fn tan(x: f64) -> f64 {
        libm::tan(x)
    }
    #[inline(always)]
    pub(crate) fn acos(x: f64) -> f64 {
        libm::acos(x)
    }
    #[inline(always)]
    pub(crate) fn asin(x: f64) -> f64 {
        libm::asin(x)
    }
    #[inline(always)]
    pub(crate) fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline(always)]
    pub(crate) fn cbrt(x: f64) -> f64 {
        libm::cbrt(x)
    }
    #[inline(always)]
    pub(crate) fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline(always)]
    pub(crate) fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline(always)]
    pub(crate) fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline(always)]
    pub(crate) fn powi(x: f64, n: i32) -> f64 {
        libm::pow(x, n as f64)
    }
    #[inline(always)]
    pub(crate) fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline(always)]
    pub(crate) fn hypot(x: f64, y: f64) -> f64 {
        libm::hypot(x, y)
    }
    #[inline(always)]
    pub(crate) fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline(always)]
    pub(crate) fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
}

pub(crate) use imp::*;
