use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_point, PointEvaluation, SystemConfig};
use crate::allocation::UserId;
use crate::error::{require_finite, require_positive, Error, Result, ValidationError};

/// Slack allowed when deciding whether `stop` lies on the grid.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    #[default]
    Y,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// Moves one user along a room axis on the communication plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub mobile_user: UserId,
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub position_m: f64,
    pub evaluation: PointEvaluation,
}

impl SweepSpec {
    pub fn new(mobile_user: UserId, axis: Axis, start: f64, stop: f64, step: f64) -> Result<Self, ValidationError> {
        require_finite("sweep.start_m", start)?;
        require_finite("sweep.stop_m", stop)?;
        require_positive("sweep.step_m", step)?;
        if start > stop {
            return Err(ValidationError::SweepOrder { start, stop });
        }
        Ok(Self {
            mobile_user,
            axis,
            start,
            stop,
            step,
        })
    }

    /// Mobile user `u2` along y from 2 m to 8 m in 0.25 m steps.
    pub fn paper_default() -> Self {
        use super::defaults::*;
        Self::new(UserId::from("u2"), Axis::Y, SWEEP_START_M, SWEEP_STOP_M, SWEEP_STEP_M)
            .expect("default sweep is valid")
    }

    /// `start + i * step` for every `i` whose point does not pass `stop`.
    pub fn positions(&self) -> Vec<f64> {
        let span = (self.stop - self.start) / self.step;
        let count = (span + GRID_SLACK).floor();
        if !(count >= 0.0) {
            return Vec::new();
        }
        (0..=count as usize).map(|i| self.start + i as f64 * self.step).collect()
    }

    /// Checks the sweep against a configuration: the mobile user exists and
    /// every grid point stays on the room footprint.
    pub fn validate_against(&self, cfg: &SystemConfig) -> Result<(), ValidationError> {
        if cfg.user(&self.mobile_user).is_none() {
            return Err(ValidationError::UnknownMobileUser(self.mobile_user.to_string()));
        }
        let extent = match self.axis {
            Axis::X => cfg.room.width_x,
            Axis::Y => cfg.room.length_y,
        };
        for p in [self.start, self.stop] {
            if !(0.0..=extent).contains(&p) {
                return Err(ValidationError::SweepOutsideRoom {
                    axis: self.axis.as_str(),
                    value: p,
                    extent,
                });
            }
        }
        Ok(())
    }

    fn config_at(&self, cfg: &SystemConfig, position: f64) -> Result<SystemConfig> {
        let mut at = cfg.clone();
        let comm_plane = at.room.comm_plane_z;
        let user = at
            .user_mut(&self.mobile_user)
            .ok_or_else(|| ValidationError::UnknownMobileUser(self.mobile_user.to_string()))?;
        let p = &mut user.detector.pose.position;
        match self.axis {
            Axis::X => p.x = position,
            Axis::Y => p.y = position,
        }
        p.z = comm_plane;
        Ok(at)
    }

    fn grid(&self, cfg: &SystemConfig) -> Result<Vec<f64>> {
        self.validate_against(cfg)?;
        let positions = self.positions();
        if positions.is_empty() {
            return Err(Error::EmptySweep);
        }
        Ok(positions)
    }

    fn evaluate_at(&self, cfg: &SystemConfig, position_m: f64) -> Result<SweepPoint> {
        let evaluation = evaluate_point(&self.config_at(cfg, position_m)?, position_m)?;
        Ok(SweepPoint { position_m, evaluation })
    }
}

/// Evaluates every grid point in order. All users are re-evaluated at each
/// point since the allocation couples them.
pub fn run_sweep(cfg: &SystemConfig, sweep: &SweepSpec) -> Result<Vec<SweepPoint>> {
    sweep
        .grid(cfg)?
        .into_iter()
        .map(|p| sweep.evaluate_at(cfg, p))
        .collect()
}

/// Same output as [`run_sweep`], with grid points spread over the rayon pool.
pub fn run_sweep_parallel(cfg: &SystemConfig, sweep: &SweepSpec) -> Result<Vec<SweepPoint>> {
    sweep
        .grid(cfg)?
        .into_par_iter()
        .map(|p| sweep.evaluate_at(cfg, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::Scheme;
    use crate::geometry::Point3;
    use crate::scenario::SystemKind;

    #[test]
    fn default_grid_has_25_points() {
        let p = SweepSpec::paper_default().positions();
        assert_eq!(p.len(), 25);
        assert_eq!(p[0], 2.0);
        assert_eq!(*p.last().unwrap(), 8.0);
    }

    #[test]
    fn stop_off_grid_is_excluded() {
        let s = SweepSpec::new("u".into(), Axis::Y, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(s.positions().len(), 4);
        let s = SweepSpec::new("u".into(), Axis::Y, 1.0, 1.0, 0.3).unwrap();
        assert_eq!(s.positions(), vec![1.0]);
    }

    #[test]
    fn spec_validation() {
        assert_eq!(
            SweepSpec::new("u".into(), Axis::Y, 3.0, 2.0, 0.1).unwrap_err(),
            ValidationError::SweepOrder { start: 3.0, stop: 2.0 }
        );
        assert!(SweepSpec::new("u".into(), Axis::Y, 0.0, 2.0, 0.0).is_err());
        let cfg = SystemConfig::paper_default(SystemKind::Noma, Scheme::Fair);
        let s = SweepSpec::new("u9".into(), Axis::Y, 2.0, 8.0, 0.5).unwrap();
        assert!(matches!(run_sweep(&cfg, &s), Err(Error::Validation(ValidationError::UnknownMobileUser(_)))));
        let s = SweepSpec::new("u2".into(), Axis::Y, 2.0, 9.0, 0.5).unwrap();
        assert!(matches!(
            run_sweep(&cfg, &s),
            Err(Error::Validation(ValidationError::SweepOutsideRoom { .. }))
        ));
    }

    #[test]
    fn stationary_user_rate_varies() {
        let cfg = SystemConfig::paper_default(SystemKind::Noma, Scheme::Fair);
        let pts = run_sweep(&cfg, &SweepSpec::paper_default()).unwrap();
        let rates: Vec<f64> = pts.iter().map(|p| p.evaluation.user_rate(&"u1".into()).unwrap()).collect();
        let (lo, hi) = rates.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
        assert!(hi > lo * 1.01);
    }

    #[test]
    fn single_user_sweep_is_mirror_symmetric() {
        let mut cfg = SystemConfig::paper_default(SystemKind::Noma, Scheme::Fair);
        cfg.users.remove(0);
        cfg.users[0].detector.pose.position = Point3::new(2.0, 2.0, 1.0);
        let s = SweepSpec::new("u2".into(), Axis::Y, 2.0, 8.0, 0.5).unwrap();
        let pts = run_sweep(&cfg, &s).unwrap();
        let n = pts.len();
        for i in 0..n / 2 {
            let a = pts[i].evaluation.total_rate_bps;
            let b = pts[n - 1 - i].evaluation.total_rate_bps;
            assert_eq!(pts[i].position_m + pts[n - 1 - i].position_m, 10.0);
            assert!(((a - b) / a).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = SystemConfig::paper_default(SystemKind::WdmNoma, Scheme::Equal);
        let s = SweepSpec::paper_default();
        assert_eq!(run_sweep(&cfg, &s).unwrap(), run_sweep_parallel(&cfg, &s).unwrap());
    }
}
