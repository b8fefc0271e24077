//! Lambertian line-of-sight channel gain.
//!
//! The DC gain from an emitter with Lambertian order `m` to a detector of
//! area `A` at distance `d` is
//!
//! ```text
//! h = (m + 1) A / (2 pi d^2) * cos^m(phi) * T * g * cos(psi)    for psi <= FOV
//! h = 0                                                        otherwise
//! ```
//!
//! where `phi` is the irradiance angle, `psi` the incidence angle, `T` the
//! optical filter gain and `g` the non-imaging concentrator gain.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result, ValidationError};
use crate::geometry::{link_angles, Pose};

/// How the concentrator gain depends on the refractive index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentratorForm {
    /// `n^2 / sin^2(FOV)`, the usual non-imaging concentrator gain.
    #[default]
    Squared,
    /// `n / sin^2(FOV)`, the index taken to the first power.
    Linear,
}

impl ConcentratorForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConcentratorForm::Squared => "squared",
            ConcentratorForm::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitterOptics {
    /// Semi-angle at half power, radians.
    pub semi_angle: f64,
    /// Electro-optic efficiency, W/A.
    pub efficiency: f64,
}

impl EmitterOptics {
    pub fn new(semi_angle: f64, efficiency: f64) -> Result<Self, ValidationError> {
        require_finite("access_point.semi_angle_deg", semi_angle)?;
        if !(semi_angle > 0.0 && semi_angle < FRAC_PI_2) {
            return Err(ValidationError::OutOfRange {
                field: "access_point.semi_angle_deg".into(),
                value: semi_angle.to_degrees(),
                range: "(0, 90) degrees",
            });
        }
        require_positive("access_point.efficiency_w_per_a", efficiency)?;
        Ok(Self {
            semi_angle,
            efficiency,
        })
    }

    pub fn lambertian_order(&self) -> f64 {
        lambertian_order(self.semi_angle).expect("semi-angle validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReceiverOptics {
    /// Detector area, m^2.
    pub detector_area: f64,
    /// Field of view, radians.
    pub fov: f64,
    pub filter_gain: f64,
    pub refractive_index: f64,
}

impl ReceiverOptics {
    pub fn new(
        detector_area: f64,
        fov: f64,
        filter_gain: f64,
        refractive_index: f64,
    ) -> Result<Self, ValidationError> {
        require_positive("detector_area_m2", detector_area)?;
        require_finite("fov_deg", fov)?;
        if !(fov > 0.0 && fov <= FRAC_PI_2) {
            return Err(ValidationError::OutOfRange {
                field: "fov_deg".into(),
                value: fov.to_degrees(),
                range: "(0, 90] degrees",
            });
        }
        require_non_negative("filter_gain", filter_gain)?;
        require_finite("refractive_index", refractive_index)?;
        if refractive_index < 1.0 {
            return Err(ValidationError::OutOfRange {
                field: "refractive_index".into(),
                value: refractive_index,
                range: "[1, inf)",
            });
        }
        Ok(Self {
            detector_area,
            fov,
            filter_gain,
            refractive_index,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Emitter {
    pub pose: Pose,
    pub optics: EmitterOptics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detector {
    pub pose: Pose,
    pub optics: ReceiverOptics,
}

/// `m = -1 / log2(cos(semi_angle))`.
pub fn lambertian_order(semi_angle: f64) -> Result<f64> {
    let c = semi_angle.cos();
    if !(semi_angle > 0.0) || !(c > 0.0) {
        return Err(Error::Domain(format!(
            "Lambertian order undefined for semi-angle {semi_angle} rad"
        )));
    }
    Ok(-1.0 / c.log2())
}

pub fn concentrator_gain(refractive_index: f64, fov: f64, form: ConcentratorForm) -> Result<f64> {
    let s = fov.sin();
    if !(fov > 0.0) || s == 0.0 {
        return Err(Error::Domain(format!("concentrator gain undefined for FOV {fov} rad")));
    }
    let numerator = match form {
        ConcentratorForm::Squared => refractive_index * refractive_index,
        ConcentratorForm::Linear => refractive_index,
    };
    Ok(numerator / (s * s))
}

/// Line-of-sight DC channel gain. Zero outside the receiver FOV or behind the
/// emitter plane.
pub fn los_gain(tx: &Emitter, rx: &Detector, form: ConcentratorForm) -> Result<f64> {
    let angles = link_angles(&tx.pose, &rx.pose)?;
    if angles.incidence > rx.optics.fov || angles.cos_irradiance <= 0.0 || angles.cos_incidence <= 0.0 {
        return Ok(0.0);
    }
    let m = tx.optics.lambertian_order();
    let g = concentrator_gain(rx.optics.refractive_index, rx.optics.fov, form)?;
    let d = angles.distance;
    Ok((m + 1.0) * rx.optics.detector_area / (2.0 * PI * d * d)
        * angles.cos_irradiance.powf(m)
        * rx.optics.filter_gain
        * g
        * angles.cos_incidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn ap() -> Emitter {
        Emitter {
            pose: Pose::facing_down(Point3::new(2.0, 5.0, 3.0)),
            optics: EmitterOptics::new(60f64.to_radians(), 1.0).unwrap(),
        }
    }

    fn user_at(x: f64, y: f64, z: f64) -> Detector {
        Detector {
            pose: Pose::facing_up(Point3::new(x, y, z)),
            optics: ReceiverOptics::new(1e-4, 60f64.to_radians(), 1.0, 1.5).unwrap(),
        }
    }

    #[test]
    fn lambertian_order_fixtures() {
        assert!(rel(lambertian_order(60f64.to_radians()).unwrap(), 1.0) < 1e-12);
        assert!(rel(lambertian_order(45f64.to_radians()).unwrap(), 2.0) < 1e-12);
        // -1/log2(cos 30deg) = 1/(1 - log2(3)/2)
        let oracle = 1.0 / (1.0 - 3f64.log2() / 2.0);
        assert!(rel(lambertian_order(30f64.to_radians()).unwrap(), oracle) < 1e-12);
        assert!((oracle - 4.8188).abs() < 1e-4);
    }

    #[test]
    fn lambertian_order_domain() {
        assert!(lambertian_order(0.0).is_err());
        assert!(lambertian_order(FRAC_PI_2 + 0.1).is_err());
        assert!(lambertian_order(f64::NAN).is_err());
    }

    #[test]
    fn concentrator_gain_fixtures() {
        let g = concentrator_gain(1.5, 60f64.to_radians(), ConcentratorForm::Squared).unwrap();
        assert!(rel(g, 3.0) < 1e-12);
        assert!(rel(concentrator_gain(1.5, FRAC_PI_2, ConcentratorForm::Squared).unwrap(), 2.25) < 1e-15);
        assert_eq!(concentrator_gain(1.0, FRAC_PI_2, ConcentratorForm::Squared).unwrap(), 1.0);
        let g = concentrator_gain(1.5, 60f64.to_radians(), ConcentratorForm::Linear).unwrap();
        assert!(rel(g, 2.0) < 1e-12);
        assert!(concentrator_gain(1.5, 0.0, ConcentratorForm::Squared).is_err());
    }

    #[test]
    fn gain_fixtures() {
        // (2 * 1e-4) / (2 pi * 4) * 3
        let nadir = los_gain(&ap(), &user_at(2.0, 5.0, 1.0), ConcentratorForm::Squared).unwrap();
        assert!(rel(nadir, 3e-4 / (4.0 * PI)) < 1e-12);
        assert!((nadir - 2.3873e-5).abs() < 1e-9);

        // (2 * 1e-4) / (2 pi * 14) * 3 * 4/14
        let slant = los_gain(&ap(), &user_at(1.0, 2.0, 1.0), ConcentratorForm::Squared).unwrap();
        assert!(rel(slant, 2e-4 / (28.0 * PI) * 3.0 * 4.0 / 14.0) < 1e-12);
        assert!((slant - 1.9488e-6).abs() < 1e-10);

        let outside = los_gain(&ap(), &user_at(2.0, 8.6, 1.0), ConcentratorForm::Squared).unwrap();
        assert_eq!(outside, 0.0);
    }

    #[test]
    fn receiver_behind_emitter_has_zero_gain() {
        let h = los_gain(&ap(), &user_at(2.0, 5.0, 3.5), ConcentratorForm::Squared).unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn optics_validation() {
        assert!(EmitterOptics::new(0.0, 1.0).is_err());
        assert!(EmitterOptics::new(FRAC_PI_2, 1.0).is_err());
        assert!(EmitterOptics::new(1.0, 0.0).is_err());
        assert!(ReceiverOptics::new(0.0, 1.0, 1.0, 1.5).is_err());
        assert!(ReceiverOptics::new(1e-4, 0.0, 1.0, 1.5).is_err());
        assert!(ReceiverOptics::new(1e-4, FRAC_PI_2, 1.0, 1.5).is_ok());
        assert!(ReceiverOptics::new(1e-4, 1.0, -1.0, 1.5).is_err());
        assert!(ReceiverOptics::new(1e-4, 1.0, 1.0, 0.9).is_err());
    }

    proptest! {
        #[test]
        fn gain_is_nonnegative(x in -10.0..10.0f64, y in -10.0..20.0f64, z in -5.0..2.99f64) {
            let h = los_gain(&ap(), &user_at(x, y, z), ConcentratorForm::Squared).unwrap();
            prop_assert!(h >= 0.0);
        }

        #[test]
        fn gain_decreases_with_radius(r1 in 0.0..3.4f64, r2 in 0.0..3.4f64, theta in 0.0..(2.0 * PI)) {
            prop_assume!((r1 - r2).abs() > 1e-6);
            let (near, far) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            let at = |r: f64| los_gain(&ap(), &user_at(2.0 + r * theta.cos(), 5.0 + r * theta.sin(), 1.0), ConcentratorForm::Squared).unwrap();
            let (h_near, h_far) = (at(near), at(far));
            // Both within FOV: tan(60deg) * 2 m is about 3.46 m.
            prop_assert!(h_near > h_far);
        }

        #[test]
        fn gain_is_mirror_symmetric(dx in 0.0..2.0f64, dy in -3.0..3.0f64) {
            let a = los_gain(&ap(), &user_at(2.0 + dx, 5.0 + dy, 1.0), ConcentratorForm::Squared).unwrap();
            let b = los_gain(&ap(), &user_at(2.0 - dx, 5.0 - dy, 1.0), ConcentratorForm::Squared).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b).max(f64::MIN_POSITIVE));
        }

        #[test]
        fn gain_is_linear_in_area_and_filter(k in 0.1..10.0f64, y in 3.0..7.0f64) {
            let base = user_at(2.0, y, 1.0);
            let mut scaled = base;
            scaled.optics.detector_area *= k;
            let mut filtered = base;
            filtered.optics.filter_gain *= k;
            let h = los_gain(&ap(), &base, ConcentratorForm::Squared).unwrap();
            let ha = los_gain(&ap(), &scaled, ConcentratorForm::Squared).unwrap();
            let ht = los_gain(&ap(), &filtered, ConcentratorForm::Squared).unwrap();
            prop_assert!(rel(ha, k * h) < 1e-12);
            prop_assert!(rel(ht, k * h) < 1e-12);
        }

        #[test]
        fn nadir_gain_follows_inverse_square(z in 0.0..2.9f64) {
            let h = los_gain(&ap(), &user_at(2.0, 5.0, z), ConcentratorForm::Squared).unwrap();
            let d = 3.0 - z;
            prop_assert!(rel(h * d * d, 3e-4 / PI) < 1e-12);
        }
    }
}
