//! Optical constants, the built-in material table and the effective-medium
//! permittivity of a patterned wire layer.
//!
//! Sign convention: the complex index is `n = n_re - i·n_im` with
//! `n_im >= 0` for passive media, so permittivities of absorbers have a
//! negative imaginary part.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Real};

/// Complex refractive index stored as `n_re - i·n_im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalConstant<T> {
    pub n_re: T,
    pub n_im: T,
}

impl<T: Real> OpticalConstant<T> {
    pub fn new(n_re: T, n_im: T) -> Self {
        Self { n_re, n_im }
    }

    /// Lossless index.
    pub fn real(n: T) -> Self {
        Self::new(n, T::zero())
    }

    /// The index as a complex number, `n_re - i·n_im`.
    pub fn index(&self) -> Cx<T> {
        cx(self.n_re, -self.n_im)
    }

    pub fn permittivity(&self) -> Cx<T> {
        permittivity(*self)
    }

    pub fn is_lossless(&self) -> bool {
        self.n_im == T::zero()
    }

    pub fn cast<U: Real>(&self) -> OpticalConstant<U> {
        OpticalConstant::new(U::lit(self.n_re.as_f64()), U::lit(self.n_im.as_f64()))
    }
}

/// Relative permittivity `ε = n²`.
pub fn permittivity<T: Real>(n: OpticalConstant<T>) -> Cx<T> {
    let index = n.index();
    index * index
}

/// Inverse of [`permittivity`], on the branch with `Im(n) <= 0`.
pub fn refractive_index<T: Real>(eps: Cx<T>) -> Result<OpticalConstant<T>> {
    if eps.re == T::zero() && eps.im == T::zero() {
        return Err(Error::ZeroPermittivity);
    }
    let mut root = eps.sqrt();
    if root.im > T::zero() {
        root = -root;
    }
    Ok(OpticalConstant::new(root.re, -root.im))
}

/// Linear mixing rule for a subwavelength line/slit grating with the field
/// parallel to the lines: `ε_w = ε_metal·f + ε_slit·(1 - f)`.
pub fn effective_wire_permittivity<T: Real>(metal: Cx<T>, slit: Cx<T>, fill: T) -> Result<Cx<T>> {
    if !(fill >= T::zero() && fill <= T::one()) {
        return Err(Error::FillingFactor(fill.as_f64()));
    }
    Ok(metal * fill + slit * (T::one() - fill))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaterialKind {
    Dielectric,
    Metal,
    /// Ideal conductor. As a mirror it becomes an exact short terminal; inside
    /// a finite layer only its finite surrogate index may be used.
    PecTerminal,
}

impl MaterialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MaterialKind::Dielectric => "dielectric",
            MaterialKind::Metal => "metal",
            MaterialKind::PecTerminal => "pec-terminal",
        }
    }
}

/// A named material with its index and permittivity.
///
/// Both are stored so that a layer built from a mixed permittivity keeps that
/// permittivity bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Material<T> {
    name: String,
    kind: MaterialKind,
    index: OpticalConstant<T>,
    permittivity: Cx<T>,
}

/// Finite index standing in for a perfect conductor.
pub const PEC_SURROGATE_EXTINCTION: f64 = 1000.0;

pub const VACUUM: &str = "Vacuum";

impl<T: Real> Material<T> {
    pub fn new(name: impl Into<String>, kind: MaterialKind, index: OpticalConstant<T>) -> Result<Self> {
        let name = name.into();
        if kind == MaterialKind::Dielectric && !index.is_lossless() {
            return Err(Error::LossyDielectric(name));
        }
        Ok(Self { permittivity: index.permittivity(), name, kind, index })
    }

    /// Builds a material from its permittivity, keeping `eps` verbatim.
    pub fn from_permittivity(name: impl Into<String>, kind: MaterialKind, eps: Cx<T>) -> Result<Self> {
        let index = refractive_index(eps)?;
        let name = name.into();
        if kind == MaterialKind::Dielectric && eps.im != T::zero() {
            return Err(Error::LossyDielectric(name));
        }
        Ok(Self { name, kind, index, permittivity: eps })
    }

    pub fn dielectric(name: impl Into<String>, n: T) -> Self {
        Self::new(name, MaterialKind::Dielectric, OpticalConstant::real(n)).expect("real index is lossless")
    }

    pub fn metal(name: impl Into<String>, n_re: T, n_im: T) -> Self {
        Self::new(name, MaterialKind::Metal, OpticalConstant::new(n_re, n_im)).expect("metal accepts any index")
    }

    /// Perfect conductor marker carrying the `-1000i` surrogate index.
    pub fn pec(name: impl Into<String>) -> Self {
        let index = OpticalConstant::new(T::zero(), T::lit(PEC_SURROGATE_EXTINCTION));
        Self::new(name, MaterialKind::PecTerminal, index).expect("pec accepts any index")
    }

    pub fn vacuum() -> Self {
        Self::dielectric(VACUUM, T::one())
    }

    /// Finite-index stand-in usable as a layer. Non-PEC materials are returned unchanged.
    pub fn surrogate(&self) -> Self {
        match self.kind {
            MaterialKind::PecTerminal => Self {
                name: format!("{}(-{}i)", self.name, PEC_SURROGATE_EXTINCTION),
                kind: MaterialKind::Metal,
                ..self.clone()
            },
            _ => self.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> MaterialKind {
        self.kind
    }

    pub fn optical_constant(&self) -> OpticalConstant<T> {
        self.index
    }

    /// Complex index `n_re - i·n_im`.
    pub fn index(&self) -> Cx<T> {
        self.index.index()
    }

    pub fn permittivity(&self) -> Cx<T> {
        self.permittivity
    }

    pub fn is_lossless(&self) -> bool {
        self.index.is_lossless()
    }

    pub fn cast<U: Real>(&self) -> Material<U> {
        Material {
            name: self.name.clone(),
            kind: self.kind,
            index: self.index.cast(),
            permittivity: cx(U::lit(self.permittivity.re.as_f64()), U::lit(self.permittivity.im.as_f64())),
        }
    }
}

/// Built-in optical constants at 1550 nm: `(name, n_re, n_im, kind)`.
pub const TABLE1: [(&str, f64, f64, MaterialKind); 7] = [
    ("NbN", 4.905, 4.293, MaterialKind::Metal),
    ("Si", 3.628, 0.0, MaterialKind::Dielectric),
    ("SiO", 1.551, 0.0, MaterialKind::Dielectric),
    ("SiO2", 1.444, 0.0, MaterialKind::Dielectric),
    ("Ta2O5", 2.15, 0.0, MaterialKind::Dielectric),
    ("PEC", 0.0, PEC_SURROGATE_EXTINCTION, MaterialKind::PecTerminal),
    ("Ag", 0.322, 10.99, MaterialKind::Metal),
];

/// Name-indexed material table.
///
/// `Vacuum` always resolves but is not stored and cannot be redefined.
/// Entries may carry wavelength-specific overrides, consulted by
/// [`MaterialRegistry::resolve`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialRegistry<T> {
    materials: BTreeMap<String, Material<T>>,
    per_wavelength: BTreeMap<String, Vec<(f64, Material<T>)>>,
    vacuum: Material<T>,
}

impl<T: Real> Default for MaterialRegistry<T> {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl<T: Real> MaterialRegistry<T> {
    pub fn with_defaults() -> Self {
        let mut materials = BTreeMap::new();
        for (name, n_re, n_im, kind) in TABLE1 {
            let index = OpticalConstant::new(T::lit(n_re), T::lit(n_im));
            let material = Material::new(name, kind, index).expect("built-in table is consistent");
            materials.insert(name.to_string(), material);
        }
        Self { materials, per_wavelength: BTreeMap::new(), vacuum: Material::vacuum() }
    }

    /// Adds a material. Redefining an existing name requires `allow_override`.
    pub fn insert(&mut self, material: Material<T>, allow_override: bool) -> Result<()> {
        if material.name() == VACUUM {
            return Err(Error::DuplicateMaterial(VACUUM.to_string()));
        }
        if self.materials.contains_key(material.name()) && !allow_override {
            return Err(Error::DuplicateMaterial(material.name().to_string()));
        }
        self.materials.insert(material.name().to_string(), material);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Material<T>> {
        if name == VACUUM {
            return Ok(&self.vacuum);
        }
        self.materials.get(name).ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    /// Looks up `name`, preferring an override registered for `wavelength_nm`.
    pub fn resolve(&self, name: &str, wavelength_nm: f64) -> Result<&Material<T>> {
        if let Some(list) = self.per_wavelength.get(name) {
            if let Some((_, m)) = list.iter().find(|(wl, _)| (wl - wavelength_nm).abs() <= 1e-9 * wavelength_nm.abs()) {
                return Ok(m);
            }
        }
        self.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        name == VACUUM || self.materials.contains_key(name)
    }

    /// Number of stored materials (implicit vacuum excluded).
    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Material<T>> {
        self.materials.values()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialEntry {
    name: String,
    n_re: f64,
    #[serde(default)]
    n_im: f64,
    kind: MaterialKind,
    #[serde(default, rename = "override")]
    allow_override: bool,
    wavelength_nm: Option<f64>,
}

/// Parses a TOML material document on top of the built-in table.
///
/// ```toml
/// [[materials]]
/// name = "MgF2"
/// n_re = 1.37
/// n_im = 0.0
/// kind = "dielectric"
/// ```
pub fn load_registry<T: Real>(document: &str) -> Result<MaterialRegistry<T>> {
    let mut registry = MaterialRegistry::with_defaults();
    let root: toml::Table = document.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    for key in root.keys() {
        if key != "materials" {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
    }
    let Some(value) = root.get("materials") else {
        return Ok(registry);
    };
    let entries =
        value.as_array().ok_or_else(|| Error::Config("`materials` must be an array of tables".to_string()))?;
    for (i, raw) in entries.iter().enumerate() {
        let label = match raw.get("name").and_then(|n| n.as_str()) {
            Some(name) => format!("#{i} `{name}`"),
            None => format!("#{i}"),
        };
        let entry: MaterialEntry = raw.clone().try_into().map_err(|e: toml::de::Error| Error::MalformedEntry {
            entry: label.clone(),
            reason: e.message().to_string(),
        })?;
        if !entry.n_re.is_finite() || !entry.n_im.is_finite() || entry.n_im < 0.0 {
            return Err(Error::MalformedEntry {
                entry: label,
                reason: "index must be finite with n_im >= 0".to_string(),
            });
        }
        let index = OpticalConstant::new(T::lit(entry.n_re), T::lit(entry.n_im));
        let material = Material::new(entry.name.clone(), entry.kind, index)
            .map_err(|e| Error::MalformedEntry { entry: label.clone(), reason: e.to_string() })?;
        match entry.wavelength_nm {
            Some(wl) => {
                if !(wl > 0.0 && wl.is_finite()) {
                    return Err(Error::MalformedEntry { entry: label, reason: format!("bad wavelength_nm {wl}") });
                }
                if !registry.contains(&entry.name) {
                    return Err(Error::MalformedEntry {
                        entry: label,
                        reason: "wavelength override for a material that is not defined".to_string(),
                    });
                }
                registry.per_wavelength.entry(entry.name).or_default().push((wl, material));
            }
            None => registry.insert(material, entry.allow_override)?,
        }
    }
    Ok(registry)
}
