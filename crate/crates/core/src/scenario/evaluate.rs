use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{SystemConfig, SystemKind};
use crate::allocation::{allocate, PowerAllocation, Scheme, UserGains, UserId};
use crate::channel::los_gain;
use crate::error::{Error, Result};
use crate::link::{achievable_rate, equivalent_sinr, noma_sinr, to_db, ColourId, NomaLink};

/// The optical channel a report row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    /// The single wavelength of plain NOMA.
    Mono,
    Colour(ColourId),
    /// Sum over the colours of one user.
    Aggregate,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::Mono => f.write_str("mono"),
            Band::Colour(c) => f.write_str(c.as_str()),
            Band::Aggregate => f.write_str("aggregate"),
        }
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mono" => Ok(Band::Mono),
            "aggregate" => Ok(Band::Aggregate),
            c => Ok(Band::Colour(c.parse()?)),
        }
    }
}

impl Serialize for Band {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Band {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One output row: a user's link on one band at one sweep position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub position_m: f64,
    pub user_id: UserId,
    pub scheme: Scheme,
    pub system: SystemKind,
    pub colour: Band,
    pub h: f64,
    pub a_k: f64,
    pub sinr: f64,
    #[serde(with = "crate::io::nonfinite")]
    pub sinr_db: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluation {
    pub position_m: f64,
    pub gains: UserGains,
    pub allocation: PowerAllocation,
    /// Per user per band; WDM runs add one aggregate row per user.
    pub reports: Vec<LinkReport>,
    /// Rate of each user summed over bands, in configuration order.
    pub user_rates: Vec<(UserId, f64)>,
    pub total_rate_bps: f64,
}

impl PointEvaluation {
    pub fn user_rate(&self, id: &UserId) -> Option<f64> {
        self.user_rates.iter().find(|(u, _)| u == id).map(|(_, r)| *r)
    }
}

/// Evaluates every user's link for the current user positions in `cfg`.
/// `position_m` only labels the rows.
pub fn evaluate_point(cfg: &SystemConfig, position_m: f64) -> Result<PointEvaluation> {
    let ap = &cfg.access_point;
    let gains = UserGains::new(
        cfg.users
            .iter()
            .map(|u| Ok((u.id.clone(), los_gain(&ap.emitter, &u.detector, cfg.switches.concentrator_form)?)))
            .collect::<Result<_>>()?,
    )?;
    if gains.entries().iter().all(|(_, h)| *h == 0.0) {
        return Err(Error::AllZeroGains);
    }
    let allocation = allocate(&gains, cfg.scheme, cfg.switches.allocation_form)?;

    let efficiency = ap.emitter.optics.efficiency;
    let bands: Vec<(Band, NomaLink)> = match cfg.system {
        SystemKind::Noma => vec![(
            Band::Mono,
            NomaLink {
                power: ap.total_power,
                responsivity: ap.mono_responsivity,
                efficiency,
            },
        )],
        SystemKind::WdmNoma => ap
            .colours
            .iter()
            .map(|c| {
                (
                    Band::Colour(c.id),
                    NomaLink {
                        power: c.optical_power,
                        responsivity: c.responsivity,
                        efficiency,
                    },
                )
            })
            .collect(),
    };

    let bandwidth = cfg.noise.bandwidth;
    let row = |user_id: &UserId, colour: Band, h: f64, a_k: f64, sinr: f64, rate_bps: f64| LinkReport {
        position_m,
        user_id: user_id.clone(),
        scheme: cfg.scheme,
        system: cfg.system,
        colour,
        h,
        a_k,
        sinr,
        sinr_db: to_db(sinr),
        rate_bps,
    };

    let mut reports = Vec::with_capacity(cfg.users.len() * (bands.len() + 1));
    let mut user_rates: Vec<(UserId, f64)> = gains.entries().iter().map(|(id, _)| (id.clone(), 0.0)).collect();
    for (band, link) in &bands {
        let sinrs = noma_sinr(&allocation, &gains, *link, &cfg.noise, cfg.switches.interference_mode)?;
        for (((id, h), (_, sinr)), (_, total)) in gains.entries().iter().zip(&sinrs).zip(user_rates.iter_mut()) {
            let a_k = allocation.coefficient(id).ok_or(Error::MismatchedUsers)?;
            let rate = achievable_rate(*sinr, bandwidth);
            *total += rate;
            reports.push(row(id, *band, *h, a_k, *sinr, rate));
        }
    }
    if cfg.system == SystemKind::WdmNoma {
        for ((id, h), (_, rate)) in gains.entries().iter().zip(&user_rates) {
            let a_k = allocation.coefficient(id).ok_or(Error::MismatchedUsers)?;
            reports.push(row(id, Band::Aggregate, *h, a_k, equivalent_sinr(*rate, bandwidth), *rate));
        }
    }
    let total_rate_bps = user_rates.iter().map(|(_, r)| r).sum();

    Ok(PointEvaluation {
        position_m,
        gains,
        allocation,
        reports,
        user_rates,
        total_rate_bps,
    })
}
