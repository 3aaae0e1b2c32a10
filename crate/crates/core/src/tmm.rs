//! Exact transfer-matrix engine.
//!
//! Impedances are normalized to the vacuum impedance, so a medium of index
//! `n` has `η = 1/n`. Layer matrices use exact `cosh`/`sinh` of `γd` with
//! `γ = i·k₀·n`.

use std::ops::Mul;

use crate::error::{Error, Result};
use crate::scalar::{cdiv, cx, wavenumber, Cx, Real};
use crate::search::{self, Maximum};
use crate::stack::{Layer, Medium, Stack};

/// 2×2 two-port matrix; `m12` is an impedance, `m21` an admittance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMatrix<T> {
    pub m11: Cx<T>,
    pub m12: Cx<T>,
    pub m21: Cx<T>,
    pub m22: Cx<T>,
}

impl<T: Real> FMatrix<T> {
    pub fn new(m11: Cx<T>, m12: Cx<T>, m21: Cx<T>, m22: Cx<T>) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        let (one, zero) = (cx(T::one(), T::zero()), cx(T::zero(), T::zero()));
        Self::new(one, zero, zero, one)
    }

    /// Homogeneous slab of complex index `index` and thickness `thickness_nm`.
    pub fn homogeneous(index: Cx<T>, thickness_nm: T, wavelength_nm: T) -> Self {
        let gamma_d = cx(T::zero(), wavenumber(wavelength_nm)) * index * thickness_nm;
        let eta = index.inv();
        let (ch, sh) = (gamma_d.cosh(), gamma_d.sinh());
        Self::new(ch, eta * sh, sh / eta, ch)
    }

    pub fn determinant(&self) -> Cx<T> {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn powi(&self, n: usize) -> Self {
        let mut out = Self::identity();
        let mut base = *self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = out * base;
            }
            base = base * base;
            k >>= 1;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        [
            (self.m11 - other.m11).norm(),
            (self.m12 - other.m12).norm(),
            (self.m21 - other.m21).norm(),
            (self.m22 - other.m22).norm(),
        ]
        .into_iter()
        .fold(T::zero(), T::max)
    }
}

impl<T: Real> Mul for FMatrix<T> {
    type Output = FMatrix<T>;

    fn mul(self, rhs: Self) -> Self {
        FMatrix::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

pub fn layer_fmatrix<T: Real>(layer: &Layer<T>, wavelength_nm: T) -> FMatrix<T> {
    FMatrix::homogeneous(layer.material().index(), layer.thickness(), wavelength_nm)
}

/// Left-to-right product, input side first. Empty input gives the identity.
pub fn chain<T: Real>(matrices: impl IntoIterator<Item = FMatrix<T>>) -> FMatrix<T> {
    matrices.into_iter().fold(FMatrix::identity(), |acc, m| acc * m)
}

pub fn stack_fmatrix<T: Real>(stack: &Stack<T>, wavelength_nm: T) -> FMatrix<T> {
    chain(stack.layers.iter().map(|l| layer_fmatrix(l, wavelength_nm)))
}

/// Reflection/transmission amplitudes and the derived power fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterResult<T> {
    pub r: Cx<T>,
    pub t: Cx<T>,
    pub reflectance: T,
    pub transmittance: T,
    pub absorptance: T,
}

/// Characteristic impedance of a semi-infinite output, zero for a short.
pub fn output_impedance<T: Real>(output: &Medium<T>) -> Cx<T> {
    match output {
        Medium::ExactShort => cx(T::zero(), T::zero()),
        Medium::Material(m) => m.index().inv(),
    }
}

fn check_wavelength<T: Real>(wavelength_nm: T) -> Result<()> {
    if wavelength_nm > T::zero() && wavelength_nm.is_finite() {
        Ok(())
    } else {
        Err(Error::Wavelength(wavelength_nm.as_f64()))
    }
}

/// Scattering of a two-port between input impedance `eta_i` and output
/// impedance `eta_o`. `terminated` suppresses transmission (exact short).
pub fn scatter_fmatrix<T: Real>(f: &FMatrix<T>, eta_i: Cx<T>, eta_o: Cx<T>, terminated: bool) -> ScatterResult<T> {
    let eta_i_conj = eta_i.conj();
    let den = f.m11 * eta_o + f.m12 + f.m21 * eta_i * eta_o + f.m22 * eta_i;
    let r = cdiv(f.m11 * eta_o + f.m12 - f.m21 * eta_i_conj * eta_o - f.m22 * eta_i_conj, den);
    let t = if terminated {
        cx(T::zero(), T::zero())
    } else {
        let scale = (eta_i.re * eta_o.re).max(T::zero()).sqrt();
        cdiv(cx(T::lit(2.0) * scale, T::zero()), den)
    };
    let reflectance = r.norm_sqr();
    let transmittance = t.norm_sqr();
    ScatterResult { r, t, reflectance, transmittance, absorptance: T::one() - reflectance - transmittance }
}

pub fn scatter<T: Real>(stack: &Stack<T>, wavelength_nm: T) -> Result<ScatterResult<T>> {
    check_wavelength(wavelength_nm)?;
    if !stack.input.is_lossless() {
        return Err(Error::LossyInput(stack.input.name().to_string()));
    }
    let f = stack_fmatrix(stack, wavelength_nm);
    let eta_i = stack.input.index().inv();
    let eta_o = output_impedance(&stack.output);
    Ok(scatter_fmatrix(&f, eta_i, eta_o, stack.is_short_terminated()))
}

/// Impedance looking into a stack; `Open` when the load transforms to an
/// open circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Impedance<T> {
    Finite(Cx<T>),
    Open,
}

impl<T: Real> Impedance<T> {
    pub fn norm(&self) -> T {
        match self {
            Impedance::Finite(z) => z.norm(),
            Impedance::Open => T::infinity(),
        }
    }

    pub fn finite(&self) -> Option<Cx<T>> {
        match self {
            Impedance::Finite(z) => Some(*z),
            Impedance::Open => None,
        }
    }
}

/// `(F11·η_o + F12) / (F21·η_o + F22)` for a given load.
pub fn load_impedance<T: Real>(f: &FMatrix<T>, eta_o: Cx<T>) -> Impedance<T> {
    let num = f.m11 * eta_o + f.m12;
    let den = f.m21 * eta_o + f.m22;
    let scale = (f.m11 * eta_o).norm() + f.m12.norm() + (f.m21 * eta_o).norm() + f.m22.norm();
    if den.norm() <= T::lit(8.0) * T::epsilon() * scale {
        Impedance::Open
    } else {
        Impedance::Finite(cdiv(num, den))
    }
}

pub fn input_impedance<T: Real>(stack: &Stack<T>, wavelength_nm: T) -> Impedance<T> {
    load_impedance(&stack_fmatrix(stack, wavelength_nm), output_impedance(&stack.output))
}

/// `|η_in| / η_i`, the impedance-match ratio seen from the input medium.
pub fn impedance_ratio<T: Real>(stack: &Stack<T>, wavelength_nm: T) -> T {
    input_impedance(stack, wavelength_nm).norm() * stack.input.index().re
}

/// Maximizes absorptance over one free thickness of a stack family.
///
/// Grid of [`search::GRID_POINTS`] points plus golden-section refinement to
/// [`search::TOLERANCE`] nm. Stacks that fail to build score `-inf`.
pub fn argmax_absorptance<T: Real, F>(family: F, wavelength_nm: T, lo: T, hi: T) -> Result<Maximum<T>>
where
    F: Fn(T) -> Result<Stack<T>>,
{
    check_wavelength(wavelength_nm)?;
    search::maximize(
        |x| match family(x).and_then(|s| scatter(&s, wavelength_nm)) {
            Ok(res) => res.absorptance,
            Err(_) => T::neg_infinity(),
        },
        lo,
        hi,
    )
}
