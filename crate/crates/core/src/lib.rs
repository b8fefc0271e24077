//! Link-level simulation of indoor visible-light downlinks shared by several
//! users through power-domain NOMA, on one wavelength or on four laser
//! colours (WDM-NOMA).
//!
//! The pipeline is: line-of-sight gain per user ([`channel`]), power
//! allocation ([`allocation`]), SINR and Shannon rate ([`link`]), composed per
//! sweep position by [`scenario`]. [`io`] reads TOML configurations and writes
//! CSV or JSON-lines tables; [`cli`] wires it into the `vlc-noma` binary.

pub mod allocation;
pub mod channel;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod link;
pub mod scenario;

pub use error::{Error, Result, ValidationError};
