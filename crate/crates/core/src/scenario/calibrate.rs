use serde::{Deserialize, Serialize};

use super::{run_sweep, SweepSpec, SystemConfig};
use crate::error::{require_positive, Error, Result};

/// Search interval for the receiver bandwidth, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationBracket {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Default for CalibrationBracket {
    fn default() -> Self {
        Self { lo_hz: 1e6, hi_hz: 1e10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub bandwidth_hz: f64,
    pub achieved_min_bps: f64,
    pub achieved_max_bps: f64,
    /// Sum of squared relative errors of the two extrema.
    pub residual: f64,
}

/// Stop once the log10 bracket is narrower than this.
const LOG_TOLERANCE: f64 = 1e-10;
/// Extrema must land within this factor of the targets.
const ACCEPT_FACTOR: f64 = 10.0;

/// Minimum and maximum per-user rate over the whole sweep.
pub(crate) fn rate_extrema(cfg: &SystemConfig, sweep: &SweepSpec) -> Result<(f64, f64)> {
    let points = run_sweep(cfg, sweep)?;
    Ok(points
        .iter()
        .flat_map(|p| p.evaluation.user_rates.iter().map(|(_, r)| *r))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r))))
}

/// Finds the receiver bandwidth whose sweep rate extrema best match
/// `(target_min, target_max)` in squared relative error.
///
/// The search is a golden-section minimisation over `log10(B)`; endpoints are
/// scored too so that a fit pinned to the bracket edge is found exactly.
pub fn calibrate_bandwidth(
    cfg: &SystemConfig,
    sweep: &SweepSpec,
    target_min: f64,
    target_max: f64,
    bracket: CalibrationBracket,
) -> Result<Calibration> {
    require_positive("target_min", target_min)?;
    require_positive("target_max", target_max)?;
    require_positive("bracket.lo_hz", bracket.lo_hz)?;
    require_positive("bracket.hi_hz", bracket.hi_hz)?;
    if bracket.lo_hz > bracket.hi_hz {
        return Err(Error::Domain(format!(
            "calibration bracket is inverted: [{}, {}]",
            bracket.lo_hz, bracket.hi_hz
        )));
    }

    let score = |log_b: f64| -> Result<Calibration> {
        let b = 10f64.powf(log_b);
        let mut at = cfg.clone();
        at.noise = at.noise.with_bandwidth(b);
        let (lo, hi) = rate_extrema(&at, sweep)?;
        let residual = (lo / target_min - 1.0).powi(2) + (hi / target_max - 1.0).powi(2);
        Ok(Calibration {
            bandwidth_hz: b,
            achieved_min_bps: lo,
            achieved_max_bps: hi,
            residual,
        })
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (bracket.lo_hz.log10(), bracket.hi_hz.log10());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = score(c)?;
    let mut fd = score(d)?;
    while b - a > LOG_TOLERANCE {
        if fc.residual <= fd.residual {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(d)?;
        }
    }

    let mut best = if fc.residual <= fd.residual { fc } else { fd };
    for edge in [bracket.lo_hz.log10(), bracket.hi_hz.log10()] {
        let e = score(edge)?;
        if e.residual < best.residual {
            best = e;
        }
    }

    let within = |achieved: f64, target: f64| {
        let ratio = achieved / target;
        (1.0 / ACCEPT_FACTOR..=ACCEPT_FACTOR).contains(&ratio)
    };
    if within(best.achieved_min_bps, target_min) && within(best.achieved_max_bps, target_max) {
        Ok(best)
    } else {
        Err(Error::Bracket {
            lo_hz: bracket.lo_hz,
            hi_hz: bracket.hi_hz,
            best_bandwidth_hz: best.bandwidth_hz,
            achieved_min_bps: best.achieved_min_bps,
            achieved_max_bps: best.achieved_max_bps,
            residual: best.residual,
        })
    }
}
