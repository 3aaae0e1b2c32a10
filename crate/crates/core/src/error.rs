use thiserror::Error;

/// Errors raised by the cavity library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("filling factor {0} outside [0, 1]")]
    FillingFactor(f64),
    #[error("line width must be positive, got {0} nm")]
    LineWidth(f64),
    #[error("slit width must be non-negative, got {0} nm")]
    SlitWidth(f64),
    #[error("{what} must be positive and finite, got {value} nm")]
    Thickness { what: &'static str, value: f64 },
    #[error("wavelength must be positive and finite, got {0} nm")]
    Wavelength(f64),
    #[error("permittivity must be non-zero")]
    ZeroPermittivity,
    #[error("dielectric `{0}` must be lossless (extinction 0)")]
    LossyDielectric(String),
    #[error("input medium `{0}` must be lossless")]
    LossyInput(String),
    #[error("`{0}` is a PEC terminal and cannot be a finite layer; use its -1000i surrogate")]
    PecLayer(String),
    #[error(
        "multi-layer cavity requires the layer next to the wire to have the smaller index: \
         n({low}) = {low_index} must be < n({high}) = {high_index}"
    )]
    PeriodOrdering { low: String, low_index: f64, high: String, high_index: f64 },
    #[error("period count must be at least {min}, got {got}")]
    Periods { min: usize, got: usize },
    #[error("invalid range [{lo}, {hi}]")]
    Range { lo: f64, hi: f64 },
    #[error("invalid step {0}")]
    Step(f64),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("material `{0}` already defined; set `override = true` to replace it")]
    DuplicateMaterial(String),
    #[error("malformed material entry {entry}: {reason}")]
    MalformedEntry { entry: String, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    /// Short stable identifier used as a machine-parseable prefix.
    pub fn code(&self) -> &'static str {
        match self {
            Error::FillingFactor(_) | Error::LineWidth(_) | Error::SlitWidth(_) => "geometry",
            Error::Thickness { .. } => "thickness",
            Error::Wavelength(_) => "wavelength",
            Error::ZeroPermittivity => "permittivity",
            Error::LossyDielectric(_) | Error::LossyInput(_) | Error::PecLayer(_) => "material-kind",
            Error::PeriodOrdering { .. } => "ordering",
            Error::Periods { .. } => "periods",
            Error::Range { .. } | Error::Step(_) => "range",
            Error::UnknownMaterial(_) => "unknown-material",
            Error::DuplicateMaterial(_) => "duplicate-material",
            Error::MalformedEntry { .. } | Error::Config(_) => "config",
            Error::Unsupported(_) => "unsupported",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
