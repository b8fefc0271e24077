use thiserror::Error;

use crate::link::ColourId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A violated invariant on a configuration value or domain type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("at least 1 user is required")]
    NoUsers,
    #[error("wdm_noma requires exactly 4 colour channels, found {0}")]
    ColourCount(usize),
    #[error("colour {0} is listed more than once")]
    DuplicateColour(ColourId),
    #[error("user id `{0}` is not unique")]
    DuplicateUser(String),
    #[error("user id `{0}` is invalid: it must be non-empty and contain no whitespace, commas or quotes")]
    InvalidUserId(String),
    #[error("{field} must be finite")]
    NonFinite { field: String },
    #[error("{field} must be > 0, got {value}")]
    NotPositive { field: String, value: f64 },
    #[error("{field} must be >= 0, got {value}")]
    Negative { field: String, value: f64 },
    #[error("{field} = {value} is outside {range}")]
    OutOfRange {
        field: String,
        value: f64,
        range: &'static str,
    },
    #[error("{field} must be a unit vector, got |n| = {norm}")]
    NotUnit { field: String, norm: f64 },
    #[error("noise model has zero total noise: one of n0, dark current or background power must be > 0")]
    ZeroNoise,
    #[error("user `{0}` coincides with the access point")]
    CoincidentUser(String),
    #[error("sweep start {start} is greater than stop {stop}")]
    SweepOrder { start: f64, stop: f64 },
    #[error("sweep mobile user `{0}` is not a configured user")]
    UnknownMobileUser(String),
    #[error("sweep leaves the room footprint: {axis} = {value} not in [0, {extent}]")]
    SweepOutsideRoom {
        axis: &'static str,
        value: f64,
        extent: f64,
    },
}

impl ValidationError {
    /// Stable snake_case name of the violated invariant.
    pub fn kind(&self) -> &'static str {
        match self {
            ValidationError::NoUsers => "no_users",
            ValidationError::ColourCount(_) => "colour_count",
            ValidationError::DuplicateColour(_) => "duplicate_colour",
            ValidationError::DuplicateUser(_) => "duplicate_user",
            ValidationError::InvalidUserId(_) => "invalid_user_id",
            ValidationError::NonFinite { .. } => "non_finite",
            ValidationError::NotPositive { .. } => "not_positive",
            ValidationError::Negative { .. } => "negative",
            ValidationError::OutOfRange { .. } => "out_of_range",
            ValidationError::NotUnit { .. } => "not_unit",
            ValidationError::ZeroNoise => "zero_noise",
            ValidationError::CoincidentUser(_) => "coincident_user",
            ValidationError::SweepOrder { .. } => "sweep_order",
            ValidationError::UnknownMobileUser(_) => "unknown_mobile_user",
            ValidationError::SweepOutsideRoom { .. } => "sweep_outside_room",
        }
    }

    /// Every variant name, for exhaustive negative testing.
    pub const KINDS: [&'static str; 15] = [
        "no_users",
        "colour_count",
        "duplicate_colour",
        "duplicate_user",
        "invalid_user_id",
        "non_finite",
        "not_positive",
        "negative",
        "out_of_range",
        "not_unit",
        "zero_noise",
        "coincident_user",
        "sweep_order",
        "unknown_mobile_user",
        "sweep_outside_room",
    ];
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("transmitter and receiver positions coincide; link direction undefined")]
    CoincidentEndpoints,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("every channel gain is zero; power allocation is undefined")]
    AllZeroGains,
    #[error("total noise variance is zero; SINR is undefined")]
    ZeroNoise,
    #[error("allocation and gain user sets differ")]
    MismatchedUsers,
    #[error("sweep grid contains no points")]
    EmptySweep,
    #[error(
        "no bandwidth in [{lo_hz}, {hi_hz}] Hz brings both rate extrema within 10x of the targets; \
         best fit B = {best_bandwidth_hz} Hz gives min {achieved_min_bps} bps, max {achieved_max_bps} bps"
    )]
    Bracket {
        lo_hz: f64,
        hi_hz: f64,
        best_bandwidth_hz: f64,
        achieved_min_bps: f64,
        achieved_max_bps: f64,
        residual: f64,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Configuration problems (bad syntax or violated invariants) as opposed to runtime failures.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Validation(_))
    }
}

pub(crate) fn require_finite(field: &str, value: f64) -> Result<f64, ValidationError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ValidationError::NonFinite {
            field: field.to_string(),
        })
    }
}

pub(crate) fn require_positive(field: &str, value: f64) -> Result<f64, ValidationError> {
    require_finite(field, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ValidationError::NotPositive {
            field: field.to_string(),
            value,
        })
    }
}

pub(crate) fn require_non_negative(field: &str, value: f64) -> Result<f64, ValidationError> {
    require_finite(field, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(ValidationError::Negative {
            field: field.to_string(),
            value,
        })
    }
}
