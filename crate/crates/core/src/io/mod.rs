//! Configuration files and result serialisation.

mod config;
pub(crate) mod nonfinite;
mod output;

pub use config::{load_config, parse_config, ConfigFile, LoadedConfig};
pub use output::{config_hash, emit_results, fmt_f64, read_csv, read_jsonl, Format, RunMetadata, CSV_COLUMNS};
