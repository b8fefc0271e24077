//! Command-line entry points.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::io::{emit_results, fmt_f64, load_config, Format, LoadedConfig, RunMetadata};
use crate::scenario::{calibrate_bandwidth, run_sweep_parallel, CalibrationBracket, SweepPoint};

#[derive(Debug, Parser)]
#[command(name = "vlc-noma", version, about = "Indoor VLC NOMA / WDM-NOMA link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::JsonLines,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured sweep and write the per-user table.
    Simulate {
        config: PathBuf,
        /// Output file; `-` is standard output.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Run two configurations and append a per-position sum-rate comparison.
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Fit the receiver bandwidth to target per-user rate extrema.
    Calibrate {
        config: PathBuf,
        /// Target minimum per-user rate, bit/s.
        #[arg(long)]
        min: f64,
        /// Target maximum per-user rate, bit/s.
        #[arg(long)]
        max: f64,
        #[arg(long, default_value_t = CalibrationBracket::default().lo_hz)]
        lo_hz: f64,
        #[arg(long, default_value_t = CalibrationBracket::default().hi_hz)]
        hi_hz: f64,
    },
    /// Check a configuration's invariants without running it.
    Validate { config: PathBuf },
}

/// Runs the tool and returns the process exit code: 0 on success, 1 for an
/// invalid configuration, 2 for usage or runtime errors.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match run(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_config_error() {
                1
            } else {
                2
            }
        }
    }
}

fn load(path: &Path, stderr: &mut dyn Write) -> Result<LoadedConfig> {
    let loaded = load_config(path)?;
    for w in &loaded.warnings {
        writeln!(stderr, "warning: {}: {w}", path.display())?;
    }
    Ok(loaded)
}

fn with_output<F>(out: &Path, stdout: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    if out.as_os_str() == "-" {
        f(stdout)?;
        stdout.flush()?;
    } else {
        let mut w = BufWriter::new(File::create(out)?);
        f(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn simulate(loaded: &LoadedConfig) -> Result<(Vec<SweepPoint>, RunMetadata)> {
    let points = run_sweep_parallel(&loaded.system, &loaded.sweep)?;
    let meta = RunMetadata::new(&loaded.system, &loaded.sweep, None);
    Ok((points, meta))
}

fn reports(points: &[SweepPoint]) -> Vec<crate::scenario::LinkReport> {
    points.iter().flat_map(|p| p.evaluation.reports.iter().cloned()).collect()
}

fn user_rate_extrema(points: &[SweepPoint]) -> (f64, f64) {
    points
        .iter()
        .flat_map(|p| p.evaluation.user_rates.iter().map(|(_, r)| *r))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

fn write_summary(out: &mut dyn Write, a: &[SweepPoint], b: &[SweepPoint]) -> Result<()> {
    writeln!(out, "# summary")?;
    writeln!(out, "position_m,sum_rate_a_bps,sum_rate_b_bps,delta_bps")?;
    let mut b_higher_everywhere = true;
    for (pa, pb) in a.iter().zip(b) {
        let (ra, rb) = (pa.evaluation.total_rate_bps, pb.evaluation.total_rate_bps);
        b_higher_everywhere &= rb > ra;
        writeln!(out, "{},{},{},{}", fmt_f64(pa.position_m), fmt_f64(ra), fmt_f64(rb), fmt_f64(rb - ra))?;
    }
    let (a_lo, a_hi) = user_rate_extrema(a);
    let (b_lo, b_hi) = user_rate_extrema(b);
    writeln!(out, "# a_min_user_rate_bps: {}", fmt_f64(a_lo))?;
    writeln!(out, "# a_max_user_rate_bps: {}", fmt_f64(a_hi))?;
    writeln!(out, "# b_min_user_rate_bps: {}", fmt_f64(b_lo))?;
    writeln!(out, "# b_max_user_rate_bps: {}", fmt_f64(b_hi))?;
    writeln!(out, "# b_sum_rate_higher_at_every_position: {b_higher_everywhere}")?;
    Ok(())
}

fn run(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate { config, out, format } => {
            let loaded = load(&config, stderr)?;
            let (points, meta) = simulate(&loaded)?;
            with_output(&out, stdout, |w| emit_results(w, &reports(&points), &meta, format.into()))
        }
        Command::Compare {
            config_a,
            config_b,
            out,
            format,
        } => {
            let a = load(&config_a, stderr)?;
            let b = load(&config_b, stderr)?;
            let (pa, ma) = simulate(&a)?;
            let (pb, mb) = simulate(&b)?;
            let grid = |p: &[SweepPoint]| p.iter().map(|x| x.position_m).collect::<Vec<_>>();
            if grid(&pa) != grid(&pb) {
                return Err(Error::Domain("the two configurations sweep different position grids".into()));
            }
            with_output(&out, stdout, |w| {
                emit_results(w, &reports(&pa), &ma, format.into())?;
                writeln!(w)?;
                emit_results(w, &reports(&pb), &mb, format.into())?;
                writeln!(w)?;
                write_summary(w, &pa, &pb)
            })
        }
        Command::Calibrate {
            config,
            min,
            max,
            lo_hz,
            hi_hz,
        } => {
            let loaded = load(&config, stderr)?;
            let fit = calibrate_bandwidth(
                &loaded.system,
                &loaded.sweep,
                min,
                max,
                CalibrationBracket { lo_hz, hi_hz },
            )?;
            writeln!(stdout, "bandwidth_hz: {}", fmt_f64(fit.bandwidth_hz))?;
            writeln!(stdout, "achieved_min_bps: {}", fmt_f64(fit.achieved_min_bps))?;
            writeln!(stdout, "achieved_max_bps: {}", fmt_f64(fit.achieved_max_bps))?;
            writeln!(stdout, "residual: {}", fmt_f64(fit.residual))?;
            Ok(())
        }
        Command::Validate { config } => {
            load(&config, stderr)?;
            writeln!(stdout, "ok: {}", config.display())?;
            Ok(())
        }
    }
}
