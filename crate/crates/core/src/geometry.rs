//! Room coordinates, poses, and the distance/angle computations that feed the
//! line-of-sight channel model.
//!
//! The frame is right-handed with z pointing up and the origin at a floor
//! corner, so the ceiling sits at `z = height_z` and receivers rest on the
//! communication plane `z = comm_plane_z`.

use std::ops::{Neg, Sub};

use serde::Serialize;

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result, ValidationError};

/// Tolerance on `|n| - 1` for orientation vectors.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A position or displacement in room coordinates, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn try_new(field: &str, x: f64, y: f64, z: f64) -> Result<Self, ValidationError> {
        require_finite(&format!("{field}.x"), x)?;
        require_finite(&format!("{field}.y"), y)?;
        require_finite(&format!("{field}.z"), z)?;
        Ok(Self { x, y, z })
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Sub for Point3 {
    type Output = Point3;

    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Point3 {
    type Output = Point3;

    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

/// A direction of unit Euclidean length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitVector(Point3);

impl UnitVector {
    pub const DOWN: UnitVector = UnitVector(Point3::new(0.0, 0.0, -1.0));
    pub const UP: UnitVector = UnitVector(Point3::new(0.0, 0.0, 1.0));

    /// Accepts `v` only if it already has unit length; no silent normalisation.
    pub fn try_new(field: &str, v: Point3) -> Result<Self, ValidationError> {
        let v = Point3::try_new(field, v.x, v.y, v.z)?;
        let norm = v.norm();
        if (norm - 1.0).abs() <= UNIT_TOLERANCE {
            Ok(Self(v))
        } else {
            Err(ValidationError::NotUnit {
                field: field.to_string(),
                norm,
            })
        }
    }

    pub fn as_point(&self) -> &Point3 {
        &self.0
    }
}

/// Where a device sits and which way its optical axis points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pose {
    pub position: Point3,
    pub normal: UnitVector,
}

impl Pose {
    pub fn new(position: Point3, normal: UnitVector) -> Self {
        Self { position, normal }
    }

    pub fn facing_down(position: Point3) -> Self {
        Self::new(position, UnitVector::DOWN)
    }

    pub fn facing_up(position: Point3) -> Self {
        Self::new(position, UnitVector::UP)
    }
}

/// An empty rectangular room.
///
/// `wall_reflectivity` is carried for configuration fidelity only; the
/// channel model is line-of-sight and never reads it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Room {
    pub width_x: f64,
    pub length_y: f64,
    pub height_z: f64,
    pub comm_plane_z: f64,
    pub wall_reflectivity: f64,
}

impl Room {
    pub fn new(
        width_x: f64,
        length_y: f64,
        height_z: f64,
        comm_plane_z: f64,
        wall_reflectivity: f64,
    ) -> Result<Self, ValidationError> {
        require_positive("room.width_x_m", width_x)?;
        require_positive("room.length_y_m", length_y)?;
        require_positive("room.height_z_m", height_z)?;
        require_non_negative("room.comm_plane_z_m", comm_plane_z)?;
        if comm_plane_z >= height_z {
            return Err(ValidationError::OutOfRange {
                field: "room.comm_plane_z_m".into(),
                value: comm_plane_z,
                range: "[0, height_z)",
            });
        }
        require_finite("room.wall_reflectivity", wall_reflectivity)?;
        if !(0.0..=1.0).contains(&wall_reflectivity) {
            return Err(ValidationError::OutOfRange {
                field: "room.wall_reflectivity".into(),
                value: wall_reflectivity,
                range: "[0, 1]",
            });
        }
        Ok(Self {
            width_x,
            length_y,
            height_z,
            comm_plane_z,
            wall_reflectivity,
        })
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0.0..=self.width_x).contains(&p.x)
            && (0.0..=self.length_y).contains(&p.y)
            && (0.0..=self.height_z).contains(&p.z)
    }
}

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    (*b - *a).norm()
}

/// Geometry of a single transmitter-to-receiver path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    /// Angle between the transmitter normal and the path, radians.
    pub irradiance: f64,
    /// Angle between the receiver normal and the reversed path, radians.
    pub incidence: f64,
    pub distance: f64,
    pub cos_irradiance: f64,
    pub cos_incidence: f64,
}

pub fn link_angles(tx: &Pose, rx: &Pose) -> Result<LinkAngles> {
    let offset = rx.position - tx.position;
    let d = offset.norm();
    if d == 0.0 {
        return Err(Error::CoincidentEndpoints);
    }
    // Dot with the raw offset before dividing so that mirrored normals give
    // bit-identical cosines.
    let cos_irradiance = (tx.normal.as_point().dot(&offset) / d).clamp(-1.0, 1.0);
    let cos_incidence = (rx.normal.as_point().dot(&-offset) / d).clamp(-1.0, 1.0);
    Ok(LinkAngles {
        irradiance: cos_irradiance.acos(),
        incidence: cos_incidence.acos(),
        distance: d,
        cos_irradiance,
        cos_incidence,
    })
}
