//! TOML stack description.
//!
//! ```toml
//! cavity = "dsc"            # ssc | dsc | mlc | custom
//! wavelength_nm = 1550.0
//! input = "Si"
//! lower = "SiO2"            # lower_nm defaults to a quarter wave
//! upper = "SiO"
//! upper_nm = 215.0
//! mirror = "Ag"             # or "pec", "pec-surrogate"
//!
//! [wire]
//! line_nm = 80.0
//! slit_nm = 120.0
//! thickness_nm = 8.2
//! ```
//!
//! A `custom` cavity lists its layers explicitly; the material name `wire`
//! stands for the effective-medium wire layer.
//!
//! ```toml
//! cavity = "custom"
//! [wire]
//! slit_nm = 80.0
//! [[layers]]
//! material = "wire"
//! thickness_nm = 11.6
//! [[layers]]
//! material = "SiO"
//! thickness_nm = 249.9
//! ```

use serde::Deserialize;

use crate::design::{DesignSpec, MirrorChoice, DEFAULT_LINE_NM, DEFAULT_MIRROR_NM, DEFAULT_PERIODS, DEFAULT_SLIT_NM};
use crate::error::{Error, Result};
use crate::materials::MaterialRegistry;
use crate::stack::{CavityKind, Layer, Medium, Stack, WireGeometry};

/// Material name that selects the wire layer inside `[[layers]]`.
pub const WIRE_LAYER: &str = "wire";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSection {
    pub line_nm: Option<f64>,
    pub slit_nm: Option<f64>,
    pub material: Option<String>,
    pub slit_material: Option<String>,
    pub thickness_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerEntry {
    pub material: String,
    pub thickness_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackConfig {
    pub cavity: String,
    pub wavelength_nm: Option<f64>,
    pub input: Option<String>,
    pub output: Option<String>,
    pub wire: Option<WireSection>,
    pub lower: Option<String>,
    pub lower_nm: Option<f64>,
    pub upper: Option<String>,
    pub upper_nm: Option<f64>,
    pub mirror: Option<String>,
    pub mirror_nm: Option<f64>,
    pub periods: Option<usize>,
    #[serde(default)]
    pub layers: Vec<LayerEntry>,
}

impl StackConfig {
    pub fn parse(document: &str) -> Result<Self> {
        let cfg: StackConfig = toml::from_str(document).map_err(|e| Error::Config(e.message().to_string()))?;
        let custom = cfg.is_custom();
        if !custom {
            cfg.cavity.parse::<CavityKind>()?;
        }
        if custom && cfg.layers.is_empty() {
            return Err(Error::Config("custom cavity needs at least one [[layers]] entry".to_string()));
        }
        if !custom && !cfg.layers.is_empty() {
            return Err(Error::Config(format!(
                "[[layers]] is only valid for cavity = \"custom\", not `{}`",
                cfg.cavity
            )));
        }
        Ok(cfg)
    }

    pub fn is_custom(&self) -> bool {
        self.cavity == "custom"
    }

    fn wire_section(&self) -> WireSection {
        self.wire.clone().unwrap_or(WireSection {
            line_nm: None,
            slit_nm: None,
            material: None,
            slit_material: None,
            thickness_nm: None,
        })
    }

    /// Design specification for the named cavities; unset fields take the
    /// reference defaults of that cavity.
    pub fn to_design_spec(&self) -> Result<DesignSpec> {
        if self.is_custom() {
            return Err(Error::Unsupported("a custom stack has no closed-form design".to_string()));
        }
        let mut spec = DesignSpec::new(self.cavity.parse()?);
        let wire = self.wire_section();
        let set = |slot: &mut String, value: &Option<String>| {
            if let Some(v) = value {
                *slot = v.clone();
            }
        };
        set(&mut spec.input, &self.input);
        set(&mut spec.output, &self.output);
        set(&mut spec.lower, &self.lower);
        set(&mut spec.upper, &self.upper);
        set(&mut spec.wire_material, &wire.material);
        spec.slit_material = wire.slit_material;
        spec.line_nm = wire.line_nm.unwrap_or(DEFAULT_LINE_NM);
        spec.slit_nm = wire.slit_nm.unwrap_or(DEFAULT_SLIT_NM);
        if let Some(wl) = self.wavelength_nm {
            spec.wavelength_nm = wl;
        }
        if let Some(m) = &self.mirror {
            spec.mirror = m.parse::<MirrorChoice>()?;
        }
        spec.mirror_nm = self.mirror_nm.unwrap_or(DEFAULT_MIRROR_NM);
        spec.periods = self.periods.unwrap_or(DEFAULT_PERIODS);
        Ok(spec)
    }

    /// Concrete stack. Named cavities need `wire.thickness_nm`; spacer and
    /// lower/upper thicknesses default to a quarter wave.
    pub fn build_stack(&self, registry: &MaterialRegistry<f64>) -> Result<Stack<f64>> {
        if self.is_custom() {
            return self.build_custom(registry);
        }
        let spec = self.to_design_spec()?;
        let cav = spec.resolve(registry)?;
        let wire_nm = self
            .wire_section()
            .thickness_nm
            .ok_or_else(|| Error::Config("wire.thickness_nm is required to build a stack".to_string()))?;
        if self.lower_nm.is_some() && spec.cavity != CavityKind::DoubleSide {
            return Err(Error::Config("lower_nm is only used by dsc".to_string()));
        }
        let upper_nm = self.upper_nm.unwrap_or_else(|| cav.upper_quarter_wave());
        let mut stack = cav.stack(wire_nm, upper_nm)?;
        if let (Some(lower_nm), CavityKind::DoubleSide) = (self.lower_nm, spec.cavity) {
            stack.layers[0] = stack.layers[0].with_thickness(lower_nm)?;
        }
        Ok(stack)
    }

    fn build_custom(&self, registry: &MaterialRegistry<f64>) -> Result<Stack<f64>> {
        let wl = self.wavelength_nm.unwrap_or(crate::design::DEFAULT_WAVELENGTH_NM);
        if !(wl > 0.0 && wl.is_finite()) {
            return Err(Error::Wavelength(wl));
        }
        let get = |name: &str| registry.resolve(name, wl).cloned();
        let section = self.wire_section();
        let wire = WireGeometry::new(
            section.line_nm.unwrap_or(DEFAULT_LINE_NM),
            section.slit_nm.unwrap_or(DEFAULT_SLIT_NM),
            get(section.material.as_deref().unwrap_or("NbN"))?,
            get(section.slit_material.as_deref().unwrap_or("Vacuum"))?,
            section.thickness_nm.unwrap_or(1.0),
        )?;
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, entry) in self.layers.iter().enumerate() {
            let layer = if entry.material == WIRE_LAYER {
                let d = entry
                    .thickness_nm
                    .or(section.thickness_nm)
                    .ok_or_else(|| Error::Config(format!("layer #{i}: wire thickness missing")))?;
                wire.with_thickness(d).layer()?
            } else {
                let material = get(&entry.material)?;
                match entry.thickness_nm {
                    Some(d) => Layer::new(material, d)?,
                    None => Layer::quarter_wave(material, wl)?,
                }
            };
            layers.push(layer);
        }
        let input = get(self.input.as_deref().unwrap_or("Vacuum"))?;
        let output = match self.output.as_deref() {
            Some("pec") => Medium::ExactShort,
            Some(name) => Medium::Material(get(name)?),
            None => Medium::vacuum(),
        };
        Ok(Stack::new(input, layers, output))
    }
}
