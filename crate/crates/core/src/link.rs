//! Receiver noise, NOMA and per-colour SINR, and the SINR-to-rate map.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::{sic_order, PowerAllocation, UserGains, UserId};
use crate::error::{require_non_negative, require_positive, Error, Result, ValidationError};

/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602176634e-19;

/// Name of the SINR-to-rate map recorded in run metadata.
pub const RATE_MAP: &str = "shannon: B*log2(1+SINR)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    /// Thermal noise current PSD, A^2/Hz.
    pub n0: f64,
    /// Receiver bandwidth, Hz.
    pub bandwidth: f64,
    /// Dark current, A.
    pub dark_current: f64,
    /// Received background optical power, W.
    pub background_power: f64,
}

impl NoiseModel {
    pub fn new(n0: f64, bandwidth: f64, dark_current: f64, background_power: f64) -> Result<Self, ValidationError> {
        require_non_negative("noise.n0_a2_per_hz", n0)?;
        require_positive("noise.bandwidth_hz", bandwidth)?;
        require_non_negative("noise.dark_current_a", dark_current)?;
        require_non_negative("noise.background_power_w", background_power)?;
        if n0 == 0.0 && dark_current == 0.0 && background_power == 0.0 {
            return Err(ValidationError::ZeroNoise);
        }
        Ok(Self {
            n0,
            bandwidth,
            dark_current,
            background_power,
        })
    }

    pub fn with_bandwidth(&self, bandwidth: f64) -> Self {
        Self { bandwidth, ..*self }
    }
}

/// Thermal plus shot noise variance, A^2, for a detector of responsivity `r`.
pub fn noise_variance(nm: &NoiseModel, responsivity: f64) -> Result<f64> {
    let thermal = nm.bandwidth * nm.n0;
    let shot = 2.0 * ELECTRON_CHARGE * (nm.dark_current + responsivity * nm.background_power) * nm.bandwidth;
    let total = thermal + shot;
    if total > 0.0 {
        Ok(total)
    } else {
        Err(Error::ZeroNoise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColourId {
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "Y")]
    Yellow,
    #[serde(rename = "G")]
    Green,
    #[serde(rename = "B")]
    Blue,
}

impl ColourId {
    pub const ALL: [ColourId; 4] = [ColourId::Red, ColourId::Yellow, ColourId::Green, ColourId::Blue];

    pub fn as_str(&self) -> &'static str {
        match self {
            ColourId::Red => "R",
            ColourId::Yellow => "Y",
            ColourId::Green => "G",
            ColourId::Blue => "B",
        }
    }
}

impl fmt::Display for ColourId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColourId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" => Ok(ColourId::Red),
            "Y" => Ok(ColourId::Yellow),
            "G" => Ok(ColourId::Green),
            "B" => Ok(ColourId::Blue),
            other => Err(Error::Parse(format!("unknown colour `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColourChannel {
    pub id: ColourId,
    /// Optical power, W.
    pub optical_power: f64,
    /// Photodetector responsivity, A/W.
    pub responsivity: f64,
}

impl ColourChannel {
    pub fn new(id: ColourId, optical_power: f64, responsivity: f64) -> Result<Self, ValidationError> {
        require_positive(&format!("colours.{id}.power_w"), optical_power)?;
        require_positive(&format!("colours.{id}.responsivity_a_per_w"), responsivity)?;
        Ok(Self {
            id,
            optical_power,
            responsivity,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    /// Every other user's signal interferes, scaled by the victim's own gain.
    #[default]
    AsWritten,
    /// Only users later in the SIC order interfere; earlier ones are cancelled.
    Sic,
}

impl InterferenceMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InterferenceMode::AsWritten => "as_written",
            InterferenceMode::Sic => "sic",
        }
    }
}

/// Transmit side of one NOMA instance: power `P_t`, responsivity `R`, efficiency `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaLink {
    pub power: f64,
    pub responsivity: f64,
    pub efficiency: f64,
}

/// Per-user SINR of one power-domain NOMA instance, in the order of `gains`.
///
/// User k's signal amplitude is `a_k P R h_k eta`. The interferers' amplitudes
/// are taken through the victim's own channel `h_k`, summed, then squared.
pub fn noma_sinr(
    alloc: &PowerAllocation,
    gains: &UserGains,
    link: NomaLink,
    nm: &NoiseModel,
    mode: InterferenceMode,
) -> Result<Vec<(UserId, f64)>> {
    let entries = gains.entries();
    if alloc.coefficients().len() != entries.len() {
        return Err(Error::MismatchedUsers);
    }
    let coeffs: Vec<f64> = entries
        .iter()
        .map(|(id, _)| alloc.coefficient(id).ok_or(Error::MismatchedUsers))
        .collect::<Result<_>>()?;
    let sigma_sq = noise_variance(nm, link.responsivity)?;
    let scale = link.power * link.responsivity * link.efficiency;

    let decode_rank: Vec<usize> = {
        let order = sic_order(gains);
        entries
            .iter()
            .map(|(id, _)| order.iter().position(|u| u == id).expect("order covers every user"))
            .collect()
    };

    Ok(entries
        .iter()
        .enumerate()
        .map(|(k, (id, h))| {
            let signal = coeffs[k] * scale * h;
            let interfering: f64 = (0..entries.len())
                .filter(|&i| {
                    i != k
                        && match mode {
                            InterferenceMode::AsWritten => true,
                            InterferenceMode::Sic => decode_rank[i] > decode_rank[k],
                        }
                })
                .map(|i| coeffs[i])
                .sum();
            let interference = interfering * scale * h;
            (id.clone(), signal * signal / (interference * interference + sigma_sq))
        })
        .collect())
}

/// SINR of one colour from the received logic-1 and logic-0 optical powers.
pub fn colour_sinr(ch: &ColourChannel, p1: f64, p0: f64, sigma_sq: f64, interference: f64) -> Result<f64> {
    if !(p1 >= p0 && p0 >= 0.0) {
        return Err(Error::Domain(format!("received powers must satisfy P1 >= P0 >= 0, got {p1}, {p0}")));
    }
    let denom = sigma_sq + interference;
    if !(denom > 0.0) {
        return Err(Error::ZeroNoise);
    }
    let swing = ch.responsivity * (p1 - p0);
    Ok(swing * swing / denom)
}

/// Shannon rate, bits/s.
pub fn achievable_rate(sinr: f64, bandwidth: f64) -> f64 {
    bandwidth * sinr.ln_1p() / LN_2
}

/// SINR that a single channel of `bandwidth` would need to carry `rate`.
pub fn equivalent_sinr(rate: f64, bandwidth: f64) -> f64 {
    (rate / bandwidth * LN_2).exp_m1()
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}
