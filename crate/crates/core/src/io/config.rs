//! TOML configuration files.
//!
//! Angles are given in degrees and converted to radians on load. Every field
//! except user ids/positions and the sweep's mobile user has a default; any
//! key not listed here is rejected.

use serde::Deserialize;

use crate::allocation::{AllocationForm, Scheme, UserId};
use crate::channel::{ConcentratorForm, Detector, Emitter, EmitterOptics, ReceiverOptics};
use crate::error::{Error, Result, ValidationError};
use crate::geometry::{Point3, Pose, Room, UnitVector};
use crate::link::{ColourChannel, ColourId, InterferenceMode, NoiseModel};
use crate::scenario::{defaults, AccessPoint, Axis, SweepSpec, Switches, SystemConfig, SystemKind, User, Warning};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub system: SystemKind,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub room: RoomSection,
    #[serde(default)]
    pub access_point: AccessPointSection,
    #[serde(default = "default_colour_sections")]
    pub colours: Vec<ColourSection>,
    #[serde(default)]
    pub users: Vec<UserSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub switches: SwitchesSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoomSection {
    pub width_x_m: f64,
    pub length_y_m: f64,
    pub height_z_m: f64,
    pub comm_plane_z_m: f64,
    pub wall_reflectivity: f64,
}

impl Default for RoomSection {
    fn default() -> Self {
        Self {
            width_x_m: defaults::ROOM_WIDTH_X_M,
            length_y_m: defaults::ROOM_LENGTH_Y_M,
            height_z_m: defaults::ROOM_HEIGHT_Z_M,
            comm_plane_z_m: defaults::COMM_PLANE_Z_M,
            wall_reflectivity: defaults::WALL_REFLECTIVITY,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AccessPointSection {
    pub position: [f64; 3],
    pub normal: [f64; 3],
    pub semi_angle_deg: f64,
    pub efficiency_w_per_a: f64,
    pub total_power_w: f64,
    pub responsivity_a_per_w: Option<f64>,
}

impl Default for AccessPointSection {
    fn default() -> Self {
        Self {
            position: defaults::AP_POSITION,
            normal: [0.0, 0.0, -1.0],
            semi_angle_deg: defaults::SEMI_ANGLE_DEG,
            efficiency_w_per_a: defaults::EFFICIENCY_W_PER_A,
            total_power_w: defaults::TOTAL_POWER_W,
            responsivity_a_per_w: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColourSection {
    pub id: ColourId,
    pub power_w: f64,
    pub responsivity_a_per_w: f64,
}

fn default_colour_sections() -> Vec<ColourSection> {
    defaults::COLOURS
        .iter()
        .map(|(id, p, r)| ColourSection {
            id: id.parse().expect("static colour id"),
            power_w: *p,
            responsivity_a_per_w: *r,
        })
        .collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSection {
    pub id: String,
    pub position: [f64; 3],
    #[serde(default = "up")]
    pub normal: [f64; 3],
    #[serde(default = "area")]
    pub detector_area_m2: f64,
    #[serde(default = "fov")]
    pub fov_deg: f64,
    #[serde(default = "filter")]
    pub filter_gain: f64,
    #[serde(default = "index")]
    pub refractive_index: f64,
}

fn up() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn area() -> f64 {
    defaults::DETECTOR_AREA_M2
}
fn fov() -> f64 {
    defaults::FOV_DEG
}
fn filter() -> f64 {
    defaults::FILTER_GAIN
}
fn index() -> f64 {
    defaults::REFRACTIVE_INDEX
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub n0_a2_per_hz: f64,
    pub bandwidth_hz: f64,
    pub dark_current_a: f64,
    pub background_power_w: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            n0_a2_per_hz: defaults::N0_A2_PER_HZ,
            bandwidth_hz: defaults::BANDWIDTH_HZ,
            dark_current_a: defaults::DARK_CURRENT_A,
            background_power_w: defaults::BACKGROUND_POWER_W,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub mobile_user: String,
    #[serde(default)]
    pub axis: Axis,
    #[serde(default = "sweep_start")]
    pub start_m: f64,
    #[serde(default = "sweep_stop")]
    pub stop_m: f64,
    #[serde(default = "sweep_step")]
    pub step_m: f64,
}

fn sweep_start() -> f64 {
    defaults::SWEEP_START_M
}
fn sweep_stop() -> f64 {
    defaults::SWEEP_STOP_M
}
fn sweep_step() -> f64 {
    defaults::SWEEP_STEP_M
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchesSection {
    pub concentrator_form: ConcentratorForm,
    pub allocation_form: AllocationForm,
    pub interference_mode: InterferenceMode,
}

/// A validated configuration ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub system: SystemConfig,
    pub sweep: SweepSpec,
    pub warnings: Vec<Warning>,
}

fn point(field: &str, [x, y, z]: [f64; 3]) -> Result<Point3, ValidationError> {
    Point3::try_new(field, x, y, z)
}

fn unit(field: &str, v: [f64; 3]) -> Result<UnitVector, ValidationError> {
    UnitVector::try_new(field, point(field, v)?)
}

/// Prefixes the field path of a validation error raised by a shared constructor.
fn in_section(prefix: &str, e: ValidationError) -> ValidationError {
    let join = |field: String| format!("{prefix}.{field}");
    match e {
        ValidationError::NonFinite { field } => ValidationError::NonFinite { field: join(field) },
        ValidationError::NotPositive { field, value } => ValidationError::NotPositive { field: join(field), value },
        ValidationError::Negative { field, value } => ValidationError::Negative { field: join(field), value },
        ValidationError::OutOfRange { field, value, range } => ValidationError::OutOfRange {
            field: join(field),
            value,
            range,
        },
        other => other,
    }
}

impl ConfigFile {
    pub fn into_config(self) -> Result<LoadedConfig, ValidationError> {
        let r = &self.room;
        let room = Room::new(r.width_x_m, r.length_y_m, r.height_z_m, r.comm_plane_z_m, r.wall_reflectivity)?;

        let a = &self.access_point;
        let emitter = Emitter {
            pose: Pose::new(
                point("access_point.position", a.position)?,
                unit("access_point.normal", a.normal)?,
            ),
            optics: EmitterOptics::new(a.semi_angle_deg.to_radians(), a.efficiency_w_per_a)?,
        };
        let colours = self
            .colours
            .iter()
            .map(|c| ColourChannel::new(c.id, c.power_w, c.responsivity_a_per_w))
            .collect::<Result<Vec<_>, _>>()?;
        let access_point = AccessPoint {
            emitter,
            total_power: a.total_power_w,
            mono_responsivity: a.responsivity_a_per_w.unwrap_or(defaults::MONO_RESPONSIVITY_A_PER_W),
            mono_responsivity_assumed: a.responsivity_a_per_w.is_none(),
            colours,
        };

        let users = self
            .users
            .iter()
            .map(|u| {
                let prefix = format!("users.{}", u.id);
                Ok(User {
                    id: UserId::new(u.id.clone()),
                    detector: Detector {
                        pose: Pose::new(
                            point(&format!("{prefix}.position"), u.position)?,
                            unit(&format!("{prefix}.normal"), u.normal)?,
                        ),
                        optics: ReceiverOptics::new(
                            u.detector_area_m2,
                            u.fov_deg.to_radians(),
                            u.filter_gain,
                            u.refractive_index,
                        )
                        .map_err(|e| in_section(&prefix, e))?,
                    },
                })
            })
            .collect::<Result<Vec<_>, ValidationError>>()?;

        let n = &self.noise;
        let noise = NoiseModel::new(n.n0_a2_per_hz, n.bandwidth_hz, n.dark_current_a, n.background_power_w)?;

        let system = SystemConfig {
            room,
            access_point,
            users,
            noise,
            scheme: self.scheme,
            system: self.system,
            switches: Switches {
                concentrator_form: self.switches.concentrator_form,
                allocation_form: self.switches.allocation_form,
                interference_mode: self.switches.interference_mode,
            },
        };
        let warnings = system.validate()?;

        let s = &self.sweep;
        let sweep = SweepSpec::new(UserId::new(s.mobile_user.clone()), s.axis, s.start_m, s.stop_m, s.step_m)?;
        sweep.validate_against(&system)?;

        Ok(LoadedConfig {
            system,
            sweep,
            warnings,
        })
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(file.into_config()?)
}

pub fn load_config(path: &std::path::Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
