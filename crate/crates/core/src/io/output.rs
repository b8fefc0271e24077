//! Result tables: CSV with a `#` metadata preamble, or JSON lines with a
//! leading metadata record.

use std::io::{self, Write};

use serde::de::value::StrDeserializer;
use serde::de::{DeserializeOwned, IntoDeserializer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocation::UserId;
use crate::error::{Error, Result};
use crate::link::RATE_MAP;
use crate::scenario::{Calibration, LinkReport, SweepSpec, SystemConfig};

pub const CSV_COLUMNS: [&str; 10] = [
    "position_m",
    "user_id",
    "scheme",
    "system",
    "colour",
    "h",
    "a_k",
    "sinr",
    "sinr_db",
    "rate_bps",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

/// Everything needed to reproduce a table, attached to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub config_hash: String,
    pub system: String,
    pub scheme: String,
    pub concentrator_form: String,
    pub allocation_form: String,
    pub interference_mode: String,
    pub rate_map: String,
    pub bandwidth_hz: f64,
    pub responsivity_note: Option<String>,
    pub calibration: Option<Calibration>,
    /// Last line of the CSV preamble; excluded from reproducibility checks.
    pub timestamp: String,
}

#[derive(Serialize)]
struct HashInput<'a> {
    system: &'a SystemConfig,
    sweep: &'a SweepSpec,
}

/// SHA-256 over the canonical JSON form of the validated configuration.
pub fn config_hash(cfg: &SystemConfig, sweep: &SweepSpec) -> String {
    let canonical = serde_json::to_vec(&HashInput { system: cfg, sweep }).expect("config serialises");
    hex::encode(Sha256::digest(&canonical))
}

impl RunMetadata {
    pub fn new(cfg: &SystemConfig, sweep: &SweepSpec, calibration: Option<Calibration>) -> Self {
        let ap = &cfg.access_point;
        let responsivity_note = (cfg.system == crate::scenario::SystemKind::Noma && ap.mono_responsivity_assumed)
            .then(|| format!("single-channel responsivity {} A/W assumed (red channel value)", ap.mono_responsivity));
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(cfg, sweep),
            system: cfg.system.as_str().into(),
            scheme: cfg.scheme.as_str().into(),
            concentrator_form: cfg.switches.concentrator_form.as_str().into(),
            allocation_form: cfg.switches.allocation_form.as_str().into(),
            interference_mode: cfg.switches.interference_mode.as_str().into(),
            rate_map: RATE_MAP.into(),
            bandwidth_hz: cfg.noise.bandwidth,
            responsivity_note,
            calibration,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    fn preamble(&self) -> Vec<(&'static str, String)> {
        let mut lines = vec![
            ("tool_version", self.tool_version.clone()),
            ("config_hash", self.config_hash.clone()),
            ("system", self.system.clone()),
            ("scheme", self.scheme.clone()),
            ("concentrator_form", self.concentrator_form.clone()),
            ("allocation_form", self.allocation_form.clone()),
            ("interference_mode", self.interference_mode.clone()),
            ("rate_map", self.rate_map.clone()),
            ("bandwidth_hz", fmt_f64(self.bandwidth_hz)),
        ];
        if let Some(note) = &self.responsivity_note {
            lines.push(("responsivity_note", note.clone()));
        }
        if let Some(c) = &self.calibration {
            lines.push(("calibrated_bandwidth_hz", fmt_f64(c.bandwidth_hz)));
            lines.push(("calibration_residual", fmt_f64(c.residual)));
        }
        lines.push(("timestamp", self.timestamp.clone()));
        lines
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("column {field}: `{s}` is not a number")))
}

fn parse_label<T: DeserializeOwned>(field: &str, s: &str) -> Result<T> {
    let de: StrDeserializer<'_, serde::de::value::Error> = s.into_deserializer();
    T::deserialize(de).map_err(|e| Error::Parse(format!("column {field}: {e}")))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Record {
    Metadata(RunMetadata),
    Report(LinkReport),
}

pub fn emit_results<W: Write + ?Sized>(out: &mut W, reports: &[LinkReport], meta: &RunMetadata, format: Format) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Io(io::Error::new(io::ErrorKind::InvalidInput, "no reports to emit")));
    }
    match format {
        Format::Csv => emit_csv(out, reports, meta),
        Format::JsonLines => emit_jsonl(out, reports, meta),
    }
}

fn emit_csv<W: Write + ?Sized>(out: &mut W, reports: &[LinkReport], meta: &RunMetadata) -> Result<()> {
    for (key, value) in meta.preamble() {
        writeln!(out, "# {key}: {value}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in reports {
        w.write_record([
            fmt_f64(r.position_m),
            r.user_id.to_string(),
            r.scheme.as_str().to_string(),
            r.system.as_str().to_string(),
            r.colour.to_string(),
            fmt_f64(r.h),
            fmt_f64(r.a_k),
            fmt_f64(r.sinr),
            fmt_f64(r.sinr_db),
            fmt_f64(r.rate_bps),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn emit_jsonl<W: Write + ?Sized>(out: &mut W, reports: &[LinkReport], meta: &RunMetadata) -> Result<()> {
    let json_err = |e: serde_json::Error| Error::Io(io::Error::other(e));
    serde_json::to_writer(&mut *out, &Record::Metadata(meta.clone())).map_err(json_err)?;
    writeln!(out)?;
    for r in reports {
        serde_json::to_writer(&mut *out, &Record::Report(r.clone())).map_err(json_err)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Reads the rows of a CSV table produced by [`emit_results`].
pub fn read_csv(text: &str) -> Result<Vec<LinkReport>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parse(format!("unexpected CSV header: {headers:?}")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            let col = |i: usize| rec.get(i).unwrap_or_default();
            Ok(LinkReport {
                position_m: parse_f64("position_m", col(0))?,
                user_id: UserId::new(col(1)),
                scheme: parse_label("scheme", col(2))?,
                system: parse_label("system", col(3))?,
                colour: col(4).parse()?,
                h: parse_f64("h", col(5))?,
                a_k: parse_f64("a_k", col(6))?,
                sinr: parse_f64("sinr", col(7))?,
                sinr_db: parse_f64("sinr_db", col(8))?,
                rate_bps: parse_f64("rate_bps", col(9))?,
            })
        })
        .collect()
}

/// Reads a JSON-lines stream produced by [`emit_results`].
pub fn read_jsonl(text: &str) -> Result<(RunMetadata, Vec<LinkReport>)> {
    let mut meta = None;
    let mut reports = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        match rec {
            Record::Metadata(m) => meta = Some(m),
            Record::Report(r) => reports.push(r),
        }
    }
    let meta = meta.ok_or_else(|| Error::Parse("missing metadata record".into()))?;
    Ok((meta, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::Scheme;
    use crate::geometry::Point3;
    use crate::scenario::{evaluate_point, SystemKind};
    use proptest::prelude::*;

    fn nadir_report() -> (Vec<LinkReport>, RunMetadata) {
        let mut cfg = SystemConfig::paper_default(SystemKind::Noma, Scheme::Fair);
        cfg.users.truncate(1);
        cfg.users[0].detector.pose.position = Point3::new(2.0, 5.0, 1.0);
        let p = evaluate_point(&cfg, 5.0).unwrap();
        let meta = RunMetadata::new(&cfg, &SweepSpec::paper_default(), None);
        (p.reports, meta)
    }

    #[test]
    fn csv_round_trip_single_row() {
        let (reports, meta) = nadir_report();
        let mut buf = Vec::new();
        emit_results(&mut buf, &reports, &meta, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# interference_mode: as_written"));
        assert!(text.contains("# responsivity_note:"));
        assert!(text.lines().any(|l| l == CSV_COLUMNS.join(",")));
        assert_eq!(read_csv(&text).unwrap(), reports);
    }

    #[test]
    fn jsonl_round_trip_with_neg_infinity() {
        let (mut reports, meta) = nadir_report();
        reports[0].sinr = 0.0;
        reports[0].sinr_db = f64::NEG_INFINITY;
        let mut buf = Vec::new();
        emit_results(&mut buf, &reports, &meta, Format::JsonLines).unwrap();
        let (m, back) = read_jsonl(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(m, meta);
        assert_eq!(back, reports);
    }

    #[test]
    fn empty_reports_rejected() {
        let (_, meta) = nadir_report();
        assert!(emit_results(&mut Vec::new(), &[], &meta, Format::Csv).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let cfg = SystemConfig::paper_default(SystemKind::Noma, Scheme::Fair);
        let sweep = SweepSpec::paper_default();
        let h = config_hash(&cfg, &sweep);
        assert_eq!(h, config_hash(&cfg.clone(), &sweep));
        let mut other = cfg.clone();
        other.scheme = Scheme::Equal;
        assert_ne!(h, config_hash(&other, &sweep));
    }

    proptest! {
        #[test]
        fn float_format_round_trips(x in proptest::num::f64::ANY) {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), x.to_bits());
            }
        }

        #[test]
        fn csv_round_trip_is_lossless(h in 0.0..1e-3f64, a in 0.0..=1.0f64, sinr in 0.0..1e6f64, pos in 0.0..8.0f64) {
            let (mut reports, meta) = nadir_report();
            let r = &mut reports[0];
            r.position_m = pos;
            r.h = h;
            r.a_k = a;
            r.sinr = sinr;
            r.sinr_db = crate::link::to_db(sinr);
            r.rate_bps = crate::link::achievable_rate(sinr, 1e9);
            let mut buf = Vec::new();
            emit_results(&mut buf, &reports, &meta, Format::Csv).unwrap();
            prop_assert_eq!(read_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), reports);
        }
    }
}
