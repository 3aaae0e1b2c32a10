//! Layered structures and builders for the three cavity geometries.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::materials::{effective_wire_permittivity, Material, MaterialKind};
use crate::scalar::{Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CavityKind {
    /// Wire | dielectric | mirror.
    SingleSide,
    /// Lower dielectric | wire | upper dielectric | mirror.
    DoubleSide,
    /// Wire | (low, high) quarter-wave pairs.
    MultiLayer,
}

impl CavityKind {
    pub const ALL: [CavityKind; 3] = [CavityKind::SingleSide, CavityKind::DoubleSide, CavityKind::MultiLayer];

    pub fn as_str(self) -> &'static str {
        match self {
            CavityKind::SingleSide => "ssc",
            CavityKind::DoubleSide => "dsc",
            CavityKind::MultiLayer => "mlc",
        }
    }
}

impl fmt::Display for CavityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CavityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ssc" => Ok(CavityKind::SingleSide),
            "dsc" => Ok(CavityKind::DoubleSide),
            "mlc" => Ok(CavityKind::MultiLayer),
            other => Err(Error::Config(format!("unknown cavity `{other}` (expected ssc, dsc or mlc)"))),
        }
    }
}

fn check_thickness<T: Real>(what: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Thickness { what, value: value.as_f64() })
    }
}

/// Finite homogeneous layer, thickness in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    material: Material<T>,
    thickness: T,
}

impl<T: Real> Layer<T> {
    pub fn new(material: Material<T>, thickness: T) -> Result<Self> {
        if material.kind() == MaterialKind::PecTerminal {
            return Err(Error::PecLayer(material.name().to_string()));
        }
        check_thickness("layer thickness", thickness)?;
        Ok(Self { material, thickness })
    }

    /// Layer of optical thickness λ₀/4 for a lossless material.
    pub fn quarter_wave(material: Material<T>, wavelength_nm: T) -> Result<Self> {
        let d = quarter_wave_thickness(material.index().re, wavelength_nm);
        Self::new(material, d)
    }

    pub fn material(&self) -> &Material<T> {
        &self.material
    }

    pub fn thickness(&self) -> T {
        self.thickness
    }

    pub fn with_thickness(&self, thickness: T) -> Result<Self> {
        Self::new(self.material.clone(), thickness)
    }
}

/// `λ₀ / (4n)`.
pub fn quarter_wave_thickness<T: Real>(n: T, wavelength_nm: T) -> T {
    wavelength_nm / (T::lit(4.0) * n)
}

/// Semi-infinite output side of a stack.
#[derive(Debug, Clone, PartialEq)]
pub enum Medium<T> {
    Material(Material<T>),
    /// Ideal short (zero impedance), no transmitted power.
    ExactShort,
}

impl<T: Real> Medium<T> {
    pub fn vacuum() -> Self {
        Medium::Material(Material::vacuum())
    }
}

/// Input medium, ordered layers from the input side, output medium.
#[derive(Debug, Clone, PartialEq)]
pub struct Stack<T> {
    pub input: Material<T>,
    pub layers: Vec<Layer<T>>,
    pub output: Medium<T>,
}

impl<T: Real> Stack<T> {
    pub fn new(input: Material<T>, layers: Vec<Layer<T>>, output: Medium<T>) -> Self {
        Self { input, layers, output }
    }

    pub fn is_short_terminated(&self) -> bool {
        matches!(self.output, Medium::ExactShort)
    }
}

/// Patterned wire layer described by its line/slit grating.
#[derive(Debug, Clone, PartialEq)]
pub struct WireGeometry<T> {
    pub line_width: T,
    pub slit_width: T,
    pub wire_material: Material<T>,
    pub slit_material: Material<T>,
    pub thickness: T,
}

/// Line width over line-plus-slit width.
pub fn filling_factor<T: Real>(line_width: T, slit_width: T) -> Result<T> {
    if !(line_width > T::zero() && line_width.is_finite()) {
        return Err(Error::LineWidth(line_width.as_f64()));
    }
    if !(slit_width >= T::zero() && slit_width.is_finite()) {
        return Err(Error::SlitWidth(slit_width.as_f64()));
    }
    Ok(line_width / (line_width + slit_width))
}

impl<T: Real> WireGeometry<T> {
    pub fn new(
        line_width: T,
        slit_width: T,
        wire_material: Material<T>,
        slit_material: Material<T>,
        thickness: T,
    ) -> Result<Self> {
        filling_factor(line_width, slit_width)?;
        Ok(Self { line_width, slit_width, wire_material, slit_material, thickness })
    }

    pub fn filling_factor(&self) -> T {
        filling_factor(self.line_width, self.slit_width).expect("validated at construction")
    }

    pub fn effective_permittivity(&self) -> Cx<T> {
        effective_wire_permittivity(
            self.wire_material.permittivity(),
            self.slit_material.permittivity(),
            self.filling_factor(),
        )
        .expect("filling factor lies in (0, 1]")
    }

    pub fn with_thickness(&self, thickness: T) -> Self {
        Self { thickness, ..self.clone() }
    }

    /// The grating as a homogeneous effective-medium layer.
    pub fn layer(&self) -> Result<Layer<T>> {
        let name = format!(
            "{}/{} f={:.4}",
            self.wire_material.name(),
            self.slit_material.name(),
            self.filling_factor().as_f64()
        );
        let material = Material::from_permittivity(name, MaterialKind::Metal, self.effective_permittivity())?;
        Layer::new(material, self.thickness)
    }
}

/// Mirror closing a cavity.
#[derive(Debug, Clone, PartialEq)]
pub enum Mirror<T> {
    ExactShort,
    Finite(Layer<T>),
}

impl<T: Real> Mirror<T> {
    /// PEC-terminal materials map to the exact short; anything else becomes a
    /// finite layer of `thickness`.
    pub fn from_material(material: Material<T>, thickness: T) -> Result<Self> {
        match material.kind() {
            MaterialKind::PecTerminal => Ok(Mirror::ExactShort),
            _ => Ok(Mirror::Finite(Layer::new(material, thickness)?)),
        }
    }

    /// Complex mirror index, `None` for the exact short.
    pub fn index(&self) -> Option<Cx<T>> {
        match self {
            Mirror::ExactShort => None,
            Mirror::Finite(layer) => Some(layer.material().index()),
        }
    }

    fn close(self, layers: &mut Vec<Layer<T>>, output: Medium<T>) -> Medium<T> {
        match self {
            Mirror::ExactShort => Medium::ExactShort,
            Mirror::Finite(layer) => {
                layers.push(layer);
                output
            }
        }
    }
}

fn require_lossless<T: Real>(material: &Material<T>) -> Result<()> {
    if material.is_lossless() && material.kind() == MaterialKind::Dielectric {
        Ok(())
    } else {
        Err(Error::LossyDielectric(material.name().to_string()))
    }
}

/// input | wire | dielectric(`spacer_nm`) | mirror | output.
pub fn build_ssc<T: Real>(
    wire: &WireGeometry<T>,
    dielectric: &Material<T>,
    spacer_nm: T,
    mirror: Mirror<T>,
    input: Material<T>,
    output: Medium<T>,
) -> Result<Stack<T>> {
    require_lossless(dielectric)?;
    let mut layers = vec![wire.layer()?, Layer::new(dielectric.clone(), spacer_nm)?];
    let output = mirror.close(&mut layers, output);
    Ok(Stack::new(input, layers, output))
}

/// input | lower(`lower_nm`) | wire | upper(`upper_nm`) | mirror | output.
#[allow(clippy::too_many_arguments)]
pub fn build_dsc<T: Real>(
    wire: &WireGeometry<T>,
    lower: &Material<T>,
    lower_nm: T,
    upper: &Material<T>,
    upper_nm: T,
    mirror: Mirror<T>,
    input: Material<T>,
    output: Medium<T>,
) -> Result<Stack<T>> {
    require_lossless(lower)?;
    require_lossless(upper)?;
    let mut layers = vec![Layer::new(lower.clone(), lower_nm)?, wire.layer()?, Layer::new(upper.clone(), upper_nm)?];
    let output = mirror.close(&mut layers, output);
    Ok(Stack::new(input, layers, output))
}

/// input | wire | (low, high)×`periods` | output, every dielectric a quarter wave.
pub fn build_mlc<T: Real>(
    wire: &WireGeometry<T>,
    low: &Material<T>,
    high: &Material<T>,
    periods: usize,
    wavelength_nm: T,
    input: Material<T>,
    output: Medium<T>,
) -> Result<Stack<T>> {
    require_lossless(low)?;
    require_lossless(high)?;
    check_period_ordering(low, high)?;
    if periods < 1 {
        return Err(Error::Periods { min: 1, got: periods });
    }
    let low_layer = Layer::quarter_wave(low.clone(), wavelength_nm)?;
    let high_layer = Layer::quarter_wave(high.clone(), wavelength_nm)?;
    let mut layers = Vec::with_capacity(1 + 2 * periods);
    layers.push(wire.layer()?);
    for _ in 0..periods {
        layers.push(low_layer.clone());
        layers.push(high_layer.clone());
    }
    Ok(Stack::new(input, layers, output))
}

/// The layer touching the wire must have the smaller index.
pub fn check_period_ordering<T: Real>(low: &Material<T>, high: &Material<T>) -> Result<()> {
    let (nl, nh) = (low.index().re, high.index().re);
    if nl < nh {
        Ok(())
    } else {
        Err(Error::PeriodOrdering {
            low: low.name().to_string(),
            low_index: nl.as_f64(),
            high: high.name().to_string(),
            high_index: nh.as_f64(),
        })
    }
}
