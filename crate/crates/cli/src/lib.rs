//! Command implementations behind the `cry` binary.

mod extract;
mod report;
mod segment;
mod select;
mod synth;
mod train;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use cry_core::analytics::AnalyticsError;
use cry_core::audio_io::{AudioError, ManifestError};
use cry_core::config::{ConfigError, PipelineConfig};
use cry_core::pipeline::PipelineError;
use cry_core::synthcry::SynthError;
use cry_core::table::TableError;

pub use extract::{cmd_extract, skip_report_path, ExtractSummary};
pub use report::cmd_report;
pub use segment::{cmd_segment, SegmentReport};
pub use select::cmd_select;
pub use synth::{cmd_synth, resolve_profile};
pub use train::{cmd_train_eval, FeatureSet, Metrics};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("test split holds only class {0}; AUC is undefined")]
    TestSingleClass(u8),
    #[error("feature set `{0}` has no features left after selection")]
    EmptyFeatureSet(String),
    #[error("unknown profile `{0}`: not a preset and not a readable file")]
    UnknownProfile(String),
}

pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    Ok(match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    })
}

pub(crate) fn open(path: &Path) -> Result<fs::File, CliError> {
    fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn create(path: &Path) -> Result<fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output types always serialise") + "\n"
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    use std::io::Write;
    create(path)?
        .write_all(to_json(value).as_bytes())
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_reader(std::io::BufReader::new(open(path)?)).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}
