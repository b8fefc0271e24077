//! System configuration and the point/sweep/calibration drivers.

mod calibrate;
mod evaluate;
mod sweep;

pub use calibrate::{calibrate_bandwidth, Calibration, CalibrationBracket};
pub use evaluate::{evaluate_point, Band, LinkReport, PointEvaluation};
pub use sweep::{run_sweep, run_sweep_parallel, Axis, SweepPoint, SweepSpec};

use serde::{Deserialize, Serialize};

use crate::allocation::{AllocationForm, Scheme, UserId};
use crate::channel::{ConcentratorForm, Detector, Emitter, EmitterOptics, ReceiverOptics};
use crate::error::{require_positive, ValidationError};
use crate::geometry::{Point3, Pose, Room};
use crate::link::{ColourChannel, ColourId, InterferenceMode, NoiseModel};

/// Default room, optics and noise values.
pub mod defaults {
    pub const ROOM_WIDTH_X_M: f64 = 4.0;
    pub const ROOM_LENGTH_Y_M: f64 = 8.0;
    pub const ROOM_HEIGHT_Z_M: f64 = 3.0;
    pub const COMM_PLANE_Z_M: f64 = 1.0;
    pub const WALL_REFLECTIVITY: f64 = 0.8;

    pub const AP_POSITION: [f64; 3] = [2.0, 5.0, 3.0];
    pub const SEMI_ANGLE_DEG: f64 = 60.0;
    pub const EFFICIENCY_W_PER_A: f64 = 1.0;
    pub const TOTAL_POWER_W: f64 = 1.0;
    /// Single-channel responsivity; borrowed from the red channel.
    pub const MONO_RESPONSIVITY_A_PER_W: f64 = 0.4;

    /// (colour, optical power W, responsivity A/W)
    pub const COLOURS: [(&str, f64, f64); 4] = [("R", 0.8, 0.4), ("Y", 0.5, 0.35), ("G", 0.3, 0.3), ("B", 0.3, 0.2)];

    pub const DETECTOR_AREA_M2: f64 = 1e-4;
    pub const FOV_DEG: f64 = 60.0;
    pub const FILTER_GAIN: f64 = 1.0;
    pub const REFRACTIVE_INDEX: f64 = 1.5;

    pub const N0_A2_PER_HZ: f64 = 1e-15;
    /// Best fit of the default fair NOMA sweep to 0.7/1.4 Gbps inside the
    /// default calibration bracket. The fit is pinned at the bracket's upper
    /// edge: with these optics the per-user rate saturates near 1.5 kbps.
    pub const BANDWIDTH_HZ: f64 = 1e10;
    pub const DARK_CURRENT_A: f64 = 0.0;
    pub const BACKGROUND_POWER_W: f64 = 0.0;

    pub const STATIONARY_USER: [f64; 3] = [1.0, 2.0, 1.0];
    pub const MOBILE_USER_START: [f64; 3] = [2.0, 2.0, 1.0];
    pub const SWEEP_START_M: f64 = 2.0;
    pub const SWEEP_STOP_M: f64 = 8.0;
    pub const SWEEP_STEP_M: f64 = 0.25;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// One wavelength carrying all users.
    #[default]
    Noma,
    /// Four colours, each an independent NOMA instance.
    WdmNoma,
}

impl SystemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemKind::Noma => "noma",
            SystemKind::WdmNoma => "wdm_noma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Switches {
    pub concentrator_form: ConcentratorForm,
    pub allocation_form: AllocationForm,
    pub interference_mode: InterferenceMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessPoint {
    pub emitter: Emitter,
    /// Electrical power of the single NOMA channel, W.
    pub total_power: f64,
    /// Responsivity applied to the single NOMA channel, A/W.
    pub mono_responsivity: f64,
    /// Whether `mono_responsivity` came from the defaults rather than the config.
    pub mono_responsivity_assumed: bool,
    pub colours: Vec<ColourChannel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct User {
    pub id: UserId,
    pub detector: Detector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub room: Room,
    pub access_point: AccessPoint,
    pub users: Vec<User>,
    pub noise: NoiseModel,
    pub scheme: Scheme,
    pub system: SystemKind,
    pub switches: Switches,
}

/// Non-fatal findings from [`SystemConfig::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    OutsideRoom { what: String, position: Point3 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::OutsideRoom { what, position } => write!(
                f,
                "{what} at ({}, {}, {}) lies outside the room",
                position.x, position.y, position.z
            ),
        }
    }
}

pub fn default_colours() -> Vec<ColourChannel> {
    defaults::COLOURS
        .iter()
        .map(|(id, p, r)| ColourChannel::new(id.parse().expect("static colour id"), *p, *r).expect("static colour"))
        .collect()
}

pub fn default_receiver_optics() -> ReceiverOptics {
    ReceiverOptics::new(
        defaults::DETECTOR_AREA_M2,
        defaults::FOV_DEG.to_radians(),
        defaults::FILTER_GAIN,
        defaults::REFRACTIVE_INDEX,
    )
    .expect("default receiver optics are valid")
}

impl SystemConfig {
    /// The two-user room: AP on the ceiling at (2, 5, 3), a stationary user at
    /// (1, 2, 1) and a mobile user starting at (2, 2, 1).
    pub fn paper_default(system: SystemKind, scheme: Scheme) -> Self {
        let [ax, ay, az] = defaults::AP_POSITION;
        let user = |id: &str, [x, y, z]: [f64; 3]| User {
            id: UserId::from(id),
            detector: Detector {
                pose: Pose::facing_up(Point3::new(x, y, z)),
                optics: default_receiver_optics(),
            },
        };
        Self {
            room: Room::new(
                defaults::ROOM_WIDTH_X_M,
                defaults::ROOM_LENGTH_Y_M,
                defaults::ROOM_HEIGHT_Z_M,
                defaults::COMM_PLANE_Z_M,
                defaults::WALL_REFLECTIVITY,
            )
            .expect("default room is valid"),
            access_point: AccessPoint {
                emitter: Emitter {
                    pose: Pose::facing_down(Point3::new(ax, ay, az)),
                    optics: EmitterOptics::new(defaults::SEMI_ANGLE_DEG.to_radians(), defaults::EFFICIENCY_W_PER_A)
                        .expect("default emitter optics are valid"),
                },
                total_power: defaults::TOTAL_POWER_W,
                mono_responsivity: defaults::MONO_RESPONSIVITY_A_PER_W,
                mono_responsivity_assumed: true,
                colours: default_colours(),
            },
            users: vec![
                user("u1", defaults::STATIONARY_USER),
                user("u2", defaults::MOBILE_USER_START),
            ],
            noise: NoiseModel::new(
                defaults::N0_A2_PER_HZ,
                defaults::BANDWIDTH_HZ,
                defaults::DARK_CURRENT_A,
                defaults::BACKGROUND_POWER_W,
            )
            .expect("default noise is valid"),
            scheme,
            system,
            switches: Switches::default(),
        }
    }

    pub fn user(&self, id: &UserId) -> Option<&User> {
        self.users.iter().find(|u| &u.id == id)
    }

    pub fn user_mut(&mut self, id: &UserId) -> Option<&mut User> {
        self.users.iter_mut().find(|u| &u.id == id)
    }

    /// Checks the cross-field invariants. Field-level invariants are enforced
    /// by the domain constructors.
    pub fn validate(&self) -> Result<Vec<Warning>, ValidationError> {
        if self.users.is_empty() {
            return Err(ValidationError::NoUsers);
        }
        for (i, u) in self.users.iter().enumerate() {
            let id = u.id.as_str();
            if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == ',' || c == '"' || c == '\'') {
                return Err(ValidationError::InvalidUserId(id.to_string()));
            }
            if self.users[..i].iter().any(|other| other.id == u.id) {
                return Err(ValidationError::DuplicateUser(id.to_string()));
            }
            if u.detector.pose.position == self.access_point.emitter.pose.position {
                return Err(ValidationError::CoincidentUser(id.to_string()));
            }
        }
        require_positive("access_point.total_power_w", self.access_point.total_power)?;
        require_positive("access_point.responsivity_a_per_w", self.access_point.mono_responsivity)?;
        let colours = &self.access_point.colours;
        for (i, c) in colours.iter().enumerate() {
            if colours[..i].iter().any(|o| o.id == c.id) {
                return Err(ValidationError::DuplicateColour(c.id));
            }
        }
        if self.system == SystemKind::WdmNoma && colours.len() != ColourId::ALL.len() {
            return Err(ValidationError::ColourCount(colours.len()));
        }

        let mut warnings = Vec::new();
        let ap = self.access_point.emitter.pose.position;
        if !self.room.contains(&ap) {
            warnings.push(Warning::OutsideRoom {
                what: "access point".into(),
                position: ap,
            });
        }
        for u in &self.users {
            let p = u.detector.pose.position;
            if !self.room.contains(&p) {
                warnings.push(Warning::OutsideRoom {
                    what: format!("user `{}`", u.id),
                    position: p,
                });
            }
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_cleanly() {
        for system in [SystemKind::Noma, SystemKind::WdmNoma] {
            let cfg = SystemConfig::paper_default(system, Scheme::Fair);
            assert_eq!(cfg.validate().unwrap(), vec![]);
        }
    }

    #[test]
    fn default_colour_table() {
        let c = default_colours();
        let powers: Vec<f64> = c.iter().map(|c| c.optical_power).collect();
        let resp: Vec<f64> = c.iter().map(|c| c.responsivity).collect();
        assert_eq!(powers, vec![0.8, 0.5, 0.3, 0.3]);
        assert_eq!(resp, vec![0.4, 0.35, 0.3, 0.2]);
    }

    #[test]
    fn wdm_requires_four_colours() {
        let mut cfg = SystemConfig::paper_default(SystemKind::WdmNoma, Scheme::Fair);
        cfg.access_point.colours.pop();
        assert_eq!(cfg.validate().unwrap_err(), ValidationError::ColourCount(3));
        cfg.system = SystemKind::Noma;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn out_of_room_user_is_a_warning() {
        let mut cfg = SystemConfig::paper_default(SystemKind::Noma, Scheme::Fair);
        cfg.users[1].detector.pose.position = Point3::new(2.0, 8.6, 1.0);
        let w = cfg.validate().unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn duplicate_and_missing_users() {
        let mut cfg = SystemConfig::paper_default(SystemKind::Noma, Scheme::Fair);
        cfg.users[1].id = UserId::from("u1");
        assert_eq!(cfg.validate().unwrap_err(), ValidationError::DuplicateUser("u1".into()));
        cfg.users.clear();
        assert_eq!(cfg.validate().unwrap_err(), ValidationError::NoUsers);
    }
}
