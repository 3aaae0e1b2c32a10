//! Bracketed one-dimensional maximization: uniform grid scan followed by
//! golden-section refinement inside the winning grid cell pair.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grid points used for bracketing.
pub const GRID_POINTS: usize = 401;
/// Final bracket width in the same unit as the abscissa (nm).
pub const TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<T> {
    pub x: T,
    pub value: T,
}

/// Maximizes `f` on `[lo, hi]`.
///
/// Ties on the grid go to the smallest abscissa, and the refined point is
/// only kept when it strictly improves on the grid winner, so a constant
/// function returns `lo`.
pub fn maximize<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T) -> Result<Maximum<T>> {
    maximize_with(f, lo, hi, GRID_POINTS, T::lit(TOLERANCE))
}

pub fn maximize_with<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, points: usize, tol: T) -> Result<Maximum<T>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Range { lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let points = points.max(3);
    let step = (hi - lo) / T::from_usize(points - 1).expect("grid size fits");
    let at = |i: usize| if i + 1 == points { hi } else { lo + step * T::from_usize(i).expect("index fits") };

    let mut best = Maximum { x: lo, value: f(lo) };
    let mut best_i = 0;
    for i in 1..points {
        let x = at(i);
        let v = f(x);
        if v > best.value {
            best = Maximum { x, value: v };
            best_i = i;
        }
    }

    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(points - 1));
    let ratio = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / T::lit(2.0);
    let v = f(x);
    if v > best.value {
        best = Maximum { x, value: v };
    }
    Ok(best)
}
