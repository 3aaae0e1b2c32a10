//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type the engine is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in scalar type")
    }

    /// Lossy conversion used for error messages and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Complex number over the engine's scalar type.
pub type Cx<T> = Complex<T>;

pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

/// Vacuum wavenumber `2π/λ₀` in rad/nm.
pub fn wavenumber<T: Real>(wavelength_nm: T) -> T {
    T::TAU() / wavelength_nm
}

/// Complex division by Smith's method; avoids the overflow of `|b|²` that
/// the textbook formula hits for the large entries of thick absorbing layers.
pub fn cdiv<T: Real>(a: Cx<T>, b: Cx<T>) -> Cx<T> {
    if b.re.abs() >= b.im.abs() {
        let ratio = b.im / b.re;
        let den = b.re + b.im * ratio;
        cx((a.re + a.im * ratio) / den, (a.im - a.re * ratio) / den)
    } else {
        let ratio = b.re / b.im;
        let den = b.re * ratio + b.im;
        cx((a.re * ratio + a.im) / den, (a.im * ratio - a.re) / den)
    }
}
