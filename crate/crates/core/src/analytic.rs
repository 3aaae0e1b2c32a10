//! Closed-form cavity results from the thin-wire transmission-line model.
//!
//! Imaginary parts enter signed: `Im(ε_w) < 0` for an absorbing wire and
//! `Im(n_m) < 0` for a metal mirror, so for example the mirror term of the
//! single-side dielectric optimum is negative and shortens the spacer below
//! a quarter wave.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{cx, wavenumber, Cx, Real};
use crate::stack::CavityKind;

/// Material context shared by the closed forms.
///
/// `lower_index` is the dielectric between input and wire (double-side
/// cavity). `upper_index` is the dielectric between wire and mirror
/// (single-side spacer, double-side upper layer). `mirror = None` is the
/// ideal conductor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityContext<T> {
    pub wavelength: T,
    pub wire_permittivity: Cx<T>,
    pub input_index: T,
    pub lower_index: T,
    pub upper_index: T,
    pub output_index: T,
    pub mirror: Option<Cx<T>>,
}

impl<T: Real> CavityContext<T> {
    pub fn new(wavelength: T, wire_permittivity: Cx<T>, input_index: T) -> Self {
        Self {
            wavelength,
            wire_permittivity,
            input_index,
            lower_index: T::one(),
            upper_index: T::one(),
            output_index: T::one(),
            mirror: None,
        }
    }

    pub fn with_lower(mut self, n: T) -> Self {
        self.lower_index = n;
        self
    }

    pub fn with_upper(mut self, n: T) -> Self {
        self.upper_index = n;
        self
    }

    pub fn with_output(mut self, n: T) -> Self {
        self.output_index = n;
        self
    }

    pub fn with_mirror(mut self, mirror: Option<Cx<T>>) -> Self {
        self.mirror = mirror;
        self
    }

    pub fn wavenumber(&self) -> T {
        wavenumber(self.wavelength)
    }

    /// `Im(n_m)/|n_m|²`, zero for the ideal conductor.
    fn mirror_term(&self) -> T {
        match self.mirror {
            Some(n) => n.im / n.norm_sqr(),
            None => T::zero(),
        }
    }

    fn eps_abs(&self) -> Result<T> {
        let a = self.wire_permittivity.norm();
        if a > T::zero() {
            Ok(a)
        } else {
            Err(Error::ZeroPermittivity)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumPoint<T> {
    /// Optimal thickness in nm.
    pub thickness: T,
    pub absorptance: T,
    /// Phase detuning from a quarter wave at the optimum, where defined.
    pub detuning: Option<T>,
}

/// Phase detuning `k₀·n·d − π/2` of a dielectric layer.
pub fn detuning<T: Real>(index: T, thickness_nm: T, wavelength_nm: T) -> T {
    wavenumber(wavelength_nm) * index * thickness_nm - T::FRAC_PI_2()
}

/// Inverse of [`detuning`].
pub fn thickness_for_detuning<T: Real>(index: T, detuning: T, wavelength_nm: T) -> T {
    (T::FRAC_PI_2() + detuning) / (wavenumber(wavelength_nm) * index)
}

/// `2·Im(ε_w) / (Im(ε_w) − |ε_w|)`, the peak absorptance shared by all three
/// cavities with an ideal mirror.
pub fn max_absorptance<T: Real>(eps: Cx<T>) -> T {
    let two = T::lit(2.0);
    two * eps.im / (eps.im - eps.norm())
}

/// Peak absorptance once the spacer detuning compensates a real mirror.
pub fn max_absorptance_detuned<T: Real>(eps: Cx<T>) -> T {
    let a = eps.norm();
    let q = T::one() - eps.im / a;
    -T::lit(4.0) * eps.im / (a * q * q)
}

/// Single-side cavity absorptance versus wire thickness (ideal mirror,
/// quarter-wave spacer). Equally the large-N multi-layer cavity result.
pub fn absorptance_ssc<T: Real>(wire_nm: T, ctx: &CavityContext<T>) -> T {
    let k0 = ctx.wavenumber();
    let e = ctx.wire_permittivity;
    let ni = ctx.input_index;
    let num = -T::lit(4.0) * k0 * e.im * ni * wire_nm;
    let a = ni - k0 * e.im * wire_nm;
    let b = k0 * e.re * wire_nm;
    num / (a * a + b * b)
}

pub fn absorptance_mlc<T: Real>(wire_nm: T, ctx: &CavityContext<T>) -> T {
    absorptance_ssc(wire_nm, ctx)
}

/// `d = n_i / (k₀|ε_w|)`.
pub fn wire_optimum_ssc<T: Real>(ctx: &CavityContext<T>) -> Result<OptimumPoint<T>> {
    let a = ctx.eps_abs()?;
    Ok(OptimumPoint {
        thickness: ctx.input_index / (ctx.wavenumber() * a),
        absorptance: max_absorptance(ctx.wire_permittivity),
        detuning: None,
    })
}

pub fn wire_optimum_mlc<T: Real>(ctx: &CavityContext<T>) -> Result<OptimumPoint<T>> {
    wire_optimum_ssc(ctx)
}

/// Single-side absorptance versus spacer detuning, wire fixed at its optimum.
pub fn absorptance_ssc_dielectric<T: Real>(detuning: T, ctx: &CavityContext<T>) -> T {
    let e = ctx.wire_permittivity;
    let a = e.norm();
    let (ni, nc) = (ctx.input_index, ctx.upper_index);
    let q = T::one() - e.im / a;
    let p = e.re / a - nc * nc * ctx.mirror_term() / ni + detuning * nc / ni;
    -T::lit(4.0) * e.im / a / (q * q + p * p)
}

/// Spacer thickness maximizing [`absorptance_ssc_dielectric`].
pub fn dielectric_optimum_ssc<T: Real>(ctx: &CavityContext<T>) -> Result<OptimumPoint<T>> {
    let a = ctx.eps_abs()?;
    let e = ctx.wire_permittivity;
    let (ni, nc) = (ctx.input_index, ctx.upper_index);
    let phase = nc * ctx.mirror_term() - ni * e.re / (nc * a);
    Ok(OptimumPoint {
        thickness: thickness_for_detuning(nc, phase, ctx.wavelength),
        absorptance: max_absorptance_detuned(e),
        detuning: Some(phase),
    })
}

/// Double-side absorptance versus wire thickness (quarter-wave dielectrics,
/// ideal mirror).
pub fn absorptance_dsc<T: Real>(wire_nm: T, ctx: &CavityContext<T>) -> T {
    let e = ctx.wire_permittivity;
    let n1 = ctx.lower_index;
    let x = ctx.wavenumber() * ctx.input_index * wire_nm / (n1 * n1);
    let a = x * e.im - T::one();
    let b = x * e.re;
    -T::lit(4.0) * x * e.im / (a * a + b * b)
}

/// `d = n_c1² / (k₀·n_i·|ε_w|)`.
pub fn wire_optimum_dsc<T: Real>(ctx: &CavityContext<T>) -> Result<OptimumPoint<T>> {
    let a = ctx.eps_abs()?;
    if !(ctx.input_index > T::zero()) {
        return Err(Error::Unsupported("input index must be positive".to_string()));
    }
    let n1 = ctx.lower_index;
    Ok(OptimumPoint {
        thickness: n1 * n1 / (ctx.wavenumber() * ctx.input_index * a),
        absorptance: max_absorptance(ctx.wire_permittivity),
        detuning: None,
    })
}

/// Combined detuning `Δφ_c1 + (n_c2/n_c1)·Δφ_c2` of the two dielectrics.
pub fn dsc_detuning<T: Real>(lower_detuning: T, upper_detuning: T, ctx: &CavityContext<T>) -> T {
    lower_detuning + ctx.upper_index / ctx.lower_index * upper_detuning
}

/// Double-side absorptance versus combined detuning, wire at its optimum.
pub fn absorptance_dsc_dielectric<T: Real>(combined_detuning: T, ctx: &CavityContext<T>) -> T {
    let e = ctx.wire_permittivity;
    let a = e.norm();
    let (ni, n1, n2) = (ctx.input_index, ctx.lower_index, ctx.upper_index);
    let q = T::one() - e.im / a;
    let p = e.re / a + combined_detuning * ni / n1 - n2 * n2 * ni * ctx.mirror_term() / (n1 * n1);
    -T::lit(4.0) * e.im / a / (q * q + p * p)
}

/// Combined-detuning optimum; `thickness` is the upper-layer thickness when
/// the lower layer is held at an exact quarter wave.
pub fn dielectric_optimum_dsc<T: Real>(ctx: &CavityContext<T>) -> Result<OptimumPoint<T>> {
    let a = ctx.eps_abs()?;
    let e = ctx.wire_permittivity;
    let (ni, n1, n2) = (ctx.input_index, ctx.lower_index, ctx.upper_index);
    let combined = -n1 / ni * e.re / a + n2 * n2 * ctx.mirror_term() / n1;
    // lower detuning 0 => upper detuning = (n1/n2)·combined
    let upper = n1 / n2 * combined;
    Ok(OptimumPoint {
        thickness: thickness_for_detuning(n2, upper, ctx.wavelength),
        absorptance: max_absorptance_detuned(e),
        detuning: Some(combined),
    })
}

/// Reflection of the multi-layer cavity with the thin-wire matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlcReflection<T> {
    /// Finite-N reflection coefficient.
    pub full: Cx<T>,
    /// Finite-N transmission coefficient.
    pub transmission: Cx<T>,
    /// Large-N limit `(1 − x)/(1 + x)`, `x = i·k₀·ε_w·d_w/n_i`.
    pub large_n: Cx<T>,
}

pub fn mlc_reflection<T: Real>(
    wire_nm: T,
    periods: usize,
    low_index: T,
    high_index: T,
    ctx: &CavityContext<T>,
) -> Result<MlcReflection<T>> {
    if !(low_index < high_index) {
        return Err(Error::PeriodOrdering {
            low: "c1".to_string(),
            low_index: low_index.as_f64(),
            high: "c2".to_string(),
            high_index: high_index.as_f64(),
        });
    }
    if periods < 1 {
        return Err(Error::Periods { min: 1, got: periods });
    }
    let k0 = ctx.wavenumber();
    let e = ctx.wire_permittivity;
    let power = i32::try_from(periods).map_err(|_| Error::Periods { min: 1, got: periods })?;
    // one period of quarter waves is diag(-n_high/n_low, -n_low/n_high)
    let diag_first = cx((-high_index / low_index).powi(power), T::zero());
    let diag_second = cx((-low_index / high_index).powi(power), T::zero());
    // thin wire: η_w·γ_w·d = i·k₀·d and γ_w·d/η_w = i·k₀·ε_w·d
    let series = cx(T::zero(), k0 * wire_nm);
    let shunt = cx(T::zero(), k0 * wire_nm) * e;
    let (f11, f12, f21, f22) = (diag_first, diag_second * series, diag_first * shunt, diag_second);
    let eta_i = T::one() / ctx.input_index;
    let eta_o = T::one() / ctx.output_index;
    let den = f11 * eta_o + f12 + f21 * eta_i * eta_o + f22 * eta_i;
    let full = (f11 * eta_o + f12 - f21 * eta_i * eta_o - f22 * eta_i) / den;
    let transmission = cx(T::lit(2.0) * (eta_i * eta_o).sqrt(), T::zero()) / den;
    let x = shunt / ctx.input_index;
    let one = cx(T::one(), T::zero());
    Ok(MlcReflection { full, transmission, large_n: (one - x) / (one + x) })
}

/// Thin-wire input impedance (ideal mirror, large N for the multi-layer
/// cavity), normalized to the vacuum impedance.
pub fn analytic_input_impedance<T: Real>(cavity: CavityKind, wire_nm: T, ctx: &CavityContext<T>) -> Result<Cx<T>> {
    if !(wire_nm > T::zero()) {
        return Err(Error::Thickness { what: "wire thickness", value: wire_nm.as_f64() });
    }
    let kd_eps = ctx.wire_permittivity * ctx.wavenumber() * wire_nm;
    let i = cx(T::zero(), T::one());
    Ok(match cavity {
        CavityKind::SingleSide | CavityKind::MultiLayer => (i * kd_eps).inv(),
        CavityKind::DoubleSide => i * kd_eps / (ctx.lower_index * ctx.lower_index),
    })
}

/// The lower dielectric of a double-side cavity viewed as a quarter-wave
/// transformer between the input medium and the wire-plus-mirror load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarterWaveTransformer<T> {
    /// Impedance seen from the lower dielectric into wire and mirror.
    pub load_impedance: Cx<T>,
    /// Required transformer impedance.
    pub impedance: Cx<T>,
    /// Index with `1/n = |η_QWT|`.
    pub index: T,
    /// Wire thickness for which `index` is the transformer index.
    pub implied_wire_thickness: T,
}

pub fn qwt_relations<T: Real>(ctx: &CavityContext<T>, wire_nm: T) -> Result<QuarterWaveTransformer<T>> {
    if !(wire_nm > T::zero()) {
        return Err(Error::Thickness { what: "wire thickness", value: wire_nm.as_f64() });
    }
    let kd_eps = ctx.wire_permittivity * ctx.wavenumber() * wire_nm;
    let load = (cx(T::zero(), T::one()) * kd_eps).inv();
    let eta_i = T::one() / ctx.input_index;
    let impedance = (kd_eps.inv() * eta_i).sqrt();
    let index = T::one() / impedance.norm();
    Ok(QuarterWaveTransformer {
        load_impedance: load,
        impedance,
        index,
        implied_wire_thickness: wire_thickness_for_transformer(index, ctx)?,
    })
}

/// `d_w = n_QWT² / (k₀·n_i·|ε_w|)`.
pub fn wire_thickness_for_transformer<T: Real>(transformer_index: T, ctx: &CavityContext<T>) -> Result<T> {
    let a = ctx.eps_abs()?;
    Ok(transformer_index * transformer_index / (ctx.wavenumber() * ctx.input_index * a))
}

/// Conditions under which the thin-layer formulas are known to drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidityWarning {
    /// Wire thicker than λ₀/50.
    ThickWire { thickness_nm: f64, limit_nm: f64 },
    /// Dielectric detuning beyond 0.5 rad.
    LargeDetuning { detuning_rad: f64 },
}

impl fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityWarning::ThickWire { thickness_nm, limit_nm } => {
                write!(f, "wire thickness {thickness_nm:.3} nm exceeds thin-wire limit {limit_nm:.3} nm")
            }
            ValidityWarning::LargeDetuning { detuning_rad } => {
                write!(f, "dielectric detuning {detuning_rad:.4} rad exceeds 0.5 rad")
            }
        }
    }
}

pub const DETUNING_LIMIT: f64 = 0.5;

pub fn wire_validity<T: Real>(wire_nm: T, wavelength_nm: T) -> Option<ValidityWarning> {
    let limit = wavelength_nm / T::lit(50.0);
    (wire_nm > limit).then(|| ValidityWarning::ThickWire { thickness_nm: wire_nm.as_f64(), limit_nm: limit.as_f64() })
}

pub fn detuning_validity<T: Real>(detuning: T) -> Option<ValidityWarning> {
    (detuning.abs() > T::lit(DETUNING_LIMIT))
        .then(|| ValidityWarning::LargeDetuning { detuning_rad: detuning.as_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{effective_wire_permittivity, permittivity, OpticalConstant};

    const WL: f64 = 1550.0;
    const NBN: (f64, f64) = (4.905, 4.293);
    const AG: (f64, f64) = (0.322, 10.99);

    fn eps_w(fill: f64, slit_index: f64) -> Cx<f64> {
        let metal = permittivity(OpticalConstant::new(NBN.0, NBN.1));
        effective_wire_permittivity(metal, cx(slit_index * slit_index, 0.0), fill).unwrap()
    }

    fn ssc(fill: f64) -> CavityContext<f64> {
        CavityContext::new(WL, eps_w(fill, 1.0), 1.0).with_upper(1.551).with_mirror(Some(cx(AG.0, -AG.1)))
    }

    fn dsc(fill: f64) -> CavityContext<f64> {
        CavityContext::new(WL, eps_w(fill, 1.551), 3.628)
            .with_lower(1.444)
            .with_upper(1.551)
            .with_mirror(Some(cx(AG.0, -AG.1)))
    }

    #[test]
    fn ssc_wire_values() {
        assert!(absorptance_ssc(1e-9, &ssc(0.5)) < 1e-9);
        let a = absorptance_ssc(11.6, &ssc(0.5));
        assert!((a - 0.9938).abs() < 2e-4, "{a}");
        let opt = wire_optimum_ssc(&ssc(0.5)).unwrap();
        assert_eq!(format!("{:.1}", opt.thickness), "11.6");
        assert_eq!(format!("{:.1}", wire_optimum_ssc(&ssc(1.0 / 3.0)).unwrap().thickness), "17.3");
        let at = absorptance_ssc(opt.thickness, &ssc(0.5));
        assert!((at - opt.absorptance).abs() < 1e-12);
        let o4 = wire_optimum_ssc(&ssc(0.4)).unwrap();
        assert!((absorptance_ssc(o4.thickness, &ssc(0.4)) - o4.absorptance).abs() < 1e-12);
        // bare NbN film
        let bare = wire_optimum_ssc(&ssc(1.0)).unwrap();
        assert_eq!(format!("{:.1}", bare.thickness), "5.8");
    }

    #[test]
    fn zero_permittivity_rejected() {
        let ctx = CavityContext::new(WL, cx(0.0, 0.0), 1.0);
        assert_eq!(wire_optimum_ssc(&ctx), Err(Error::ZeroPermittivity));
        assert_eq!(wire_optimum_dsc(&ctx), Err(Error::ZeroPermittivity));
    }

    #[test]
    fn ssc_dielectric_values() {
        let ctx = ssc(0.5);
        let opt = dielectric_optimum_ssc(&ctx).unwrap();
        assert_eq!(opt.thickness.round(), 211.0);
        assert_eq!(dielectric_optimum_ssc(&ssc(1.0 / 3.0)).unwrap().thickness.round(), 209.0);
        let at = absorptance_ssc_dielectric(opt.detuning.unwrap(), &ctx);
        assert!((at - opt.absorptance).abs() < 1e-12);
        assert!(absorptance_ssc_dielectric(0.0, &ctx) < opt.absorptance);

        // literal three-term expression agrees with the detuning route
        let e = ctx.wire_permittivity;
        let k0 = ctx.wavenumber();
        let nm = ctx.mirror.unwrap();
        let literal = WL / (4.0 * 1.551) - e.re / (k0 * 1.551 * 1.551 * e.norm()) + nm.im / (k0 * nm.norm_sqr());
        assert!((literal - opt.thickness).abs() < 1e-9);

        // the Ag mirror term alone shortens the spacer by about 22.4 nm
        let pec = ctx.with_mirror(None);
        let pec_opt = dielectric_optimum_ssc(&pec).unwrap();
        assert_eq!(pec_opt.thickness.round(), 234.0);
        assert!((pec_opt.thickness - opt.thickness - 22.4).abs() < 0.05);

        // ideal mirror: detuning cancels Re(ε)/|ε|, peak is the detuned maximum
        let cancel = -e.re / e.norm() * 1.0 / 1.551;
        assert!((absorptance_ssc_dielectric(cancel, &pec) - max_absorptance_detuned(e)).abs() < 1e-12);
    }

    #[test]
    fn dsc_wire_values() {
        let ctx = dsc(0.5);
        assert!(absorptance_dsc(1e-9, &ctx) < 1e-9);
        let opt = wire_optimum_dsc(&ctx).unwrap();
        assert_eq!(format!("{:.1}", opt.thickness), "6.6");
        assert_eq!(format!("{:.1}", wire_optimum_dsc(&dsc(0.4)).unwrap().thickness), "8.2");
        assert!((absorptance_dsc(opt.thickness, &ctx) - opt.absorptance).abs() < 1e-12);
        assert!(absorptance_dsc(2.0 * opt.thickness, &ctx) < opt.absorptance);
        // ratio to the single-side formula
        let ssc_like = wire_optimum_ssc(&ctx).unwrap();
        let ratio = opt.thickness / ssc_like.thickness;
        assert!((ratio - 1.444f64.powi(2) / 3.628f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn dsc_dielectric_values() {
        let ctx = dsc(0.5);
        let opt = dielectric_optimum_dsc(&ctx).unwrap();
        assert_eq!(opt.thickness.round(), 216.0);
        assert_eq!(dielectric_optimum_dsc(&dsc(1.0 / 3.0)).unwrap().thickness.round(), 213.0);
        let at = absorptance_dsc_dielectric(opt.detuning.unwrap(), &ctx);
        assert!((at - opt.absorptance).abs() < 1e-12);
        assert!(absorptance_dsc_dielectric(0.0, &ctx) < opt.absorptance);

        let pec = dielectric_optimum_dsc(&ctx.with_mirror(None)).unwrap();
        assert_eq!(pec.thickness.round(), 239.0);

        // trades preserving the combined detuning leave the absorptance unchanged
        let (d1, d2, delta) = (0.05, -0.12, 0.03);
        let a = absorptance_dsc_dielectric(dsc_detuning(d1, d2, &ctx), &ctx);
        let b = absorptance_dsc_dielectric(dsc_detuning(d1 + delta * 1.551 / 1.444, d2 - delta, &ctx), &ctx);
        assert!((a - b).abs() < 1e-12);

        // upper thickness from the combined detuning with a quarter-wave lower layer
        let upper = detuning(1.551, opt.thickness, WL);
        assert!((dsc_detuning(0.0, upper, &ctx) - opt.detuning.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn detuning_round_trip() {
        let d = thickness_for_detuning(1.551, -0.2, WL);
        assert!((detuning(1.551, d, WL) + 0.2).abs() < 1e-12);
        assert!(detuning(1.551, WL / (4.0 * 1.551), WL).abs() < 1e-12);
    }

    #[test]
    fn universality_of_peak() {
        for fill in [0.5, 0.4, 1.0 / 3.0] {
            let ctx = ssc(fill).with_lower(1.444).with_upper(1.551);
            let a = wire_optimum_ssc(&ctx).unwrap().absorptance;
            assert_eq!(a.to_bits(), wire_optimum_dsc(&ctx).unwrap().absorptance.to_bits());
            assert_eq!(a.to_bits(), wire_optimum_mlc(&ctx).unwrap().absorptance.to_bits());
        }
    }

    #[test]
    fn stationarity() {
        let h = 1e-4;
        for fill in [0.5, 0.4, 1.0 / 3.0] {
            let c = ssc(fill);
            let d = wire_optimum_ssc(&c).unwrap().thickness;
            let slope = (absorptance_ssc(d + h, &c) - absorptance_ssc(d - h, &c)) / (2.0 * h);
            assert!(slope.abs() < 1e-6, "{slope}");
            let c = dsc(fill);
            let d = wire_optimum_dsc(&c).unwrap().thickness;
            let slope = (absorptance_dsc(d + h, &c) - absorptance_dsc(d - h, &c)) / (2.0 * h);
            assert!(slope.abs() < 1e-6, "{slope}");
        }
    }

    #[test]
    fn quarter_wave_shortfall() {
        for mirror in [cx(AG.0, -AG.1), cx(NBN.0, -NBN.1), cx(0.0, -1000.0)] {
            let c = ssc(0.5).with_mirror(Some(mirror));
            assert!(dielectric_optimum_ssc(&c).unwrap().thickness < WL / (4.0 * 1.551));
            let c = dsc(0.5).with_mirror(Some(mirror));
            assert!(dielectric_optimum_dsc(&c).unwrap().thickness < WL / (4.0 * 1.551));
        }
    }

    #[test]
    fn mlc_reflection_examples() {
        let ctx = ssc(0.5);
        let r = mlc_reflection(1e-9, 50, 1.444, 2.15, &ctx).unwrap();
        assert!((r.large_n - cx(1.0, 0.0)).norm() < 1e-9);
        let d = wire_optimum_mlc(&ctx).unwrap().thickness;
        let r6 = mlc_reflection(d, 6, 1.444, 2.15, &ctx).unwrap();
        assert!((r6.full - r6.large_n).norm() < 1e-2);
        let large = mlc_reflection(d, 40, 1.444, 2.15, &ctx).unwrap();
        assert!((large.full - large.large_n).norm() < 1e-10);
        // |r|² of the large-N limit reproduces the shared absorptance formula
        assert!((1.0 - r6.large_n.norm_sqr() - absorptance_mlc(d, &ctx)).abs() < 1e-12);
        let mags: Vec<f64> = (1..=8).map(|n| mlc_reflection(0.5, n, 1.444, 2.15, &ctx).unwrap().full.norm()).collect();
        assert!(mags.windows(2).all(|w| w[1] > w[0]), "{mags:?}");
        assert!(mlc_reflection(d, 6, 2.15, 1.444, &ctx).is_err());
    }

    #[test]
    fn input_impedance_forms() {
        for (kind, c) in [(CavityKind::SingleSide, ssc(0.5)), (CavityKind::MultiLayer, ssc(0.5))] {
            let d = wire_optimum_ssc(&c).unwrap().thickness;
            let z = analytic_input_impedance(kind, d, &c).unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-12);
            let z2 = analytic_input_impedance(kind, 2.0 * d, &c).unwrap();
            assert!((z2.norm() - 0.5).abs() < 1e-12);
        }
        let c = dsc(0.5);
        let d = wire_optimum_dsc(&c).unwrap().thickness;
        let z = analytic_input_impedance(CavityKind::DoubleSide, d, &c).unwrap();
        assert!((z.norm() - 1.0 / 3.628).abs() < 1e-12);
        assert!(analytic_input_impedance(CavityKind::SingleSide, 0.0, &c).is_err());
    }

    #[test]
    fn transformer_relations() {
        let c = dsc(0.5);
        let d18 = wire_optimum_dsc(&c).unwrap().thickness;
        assert!((wire_thickness_for_transformer(1.444, &c).unwrap() - d18).abs() < 1e-12);
        let q = qwt_relations(&c, 6.6).unwrap();
        assert!((q.impedance.norm() - 1.0 / 1.444).abs() < 5e-3, "{}", q.impedance.norm());
        assert!((q.implied_wire_thickness - 6.6).abs() < 1e-9);
        let q2 = qwt_relations(&c, 13.2).unwrap();
        assert!((q2.impedance.norm() / q.impedance.norm() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn validity_guards() {
        assert!(wire_validity(11.6, WL).is_none());
        assert!(matches!(wire_validity(40.0, WL), Some(ValidityWarning::ThickWire { .. })));
        assert!(detuning_validity(0.3).is_none());
        assert!(detuning_validity(-0.6).is_some());
    }
}
