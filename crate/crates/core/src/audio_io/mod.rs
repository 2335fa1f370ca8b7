//! Audio decoding, sample-rate conversion and recording manifests.

mod clip;
mod manifest;
mod resample;
mod wav;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use clip::AudioClip;
pub use manifest::{
    load_manifest, parse_manifest, write_manifest, ManifestEntry, Period, SarnatLabel, Site,
    MANIFEST_HEADER,
};
pub use resample::resample;
pub use wav::{
    decode_wav, encode_wav, load_wav, write_wav, write_wav_interleaved, WavEncoding,
};

/// Rate every clip is converted to before analysis.
pub const CANONICAL_SAMPLE_RATE: u32 = 16_000;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("audio file not found: {0}")]
    NotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WAV header ({field}): {detail}")]
    MalformedHeader { field: &'static str, detail: String },
    #[error("unsupported WAV encoding: {field} = {value}")]
    UnsupportedEncoding { field: &'static str, value: u32 },
    #[error("invalid sample rate {0}")]
    InvalidSampleRate(u32),
    #[error("sample {index} is {value}, outside [-1, 1]")]
    SampleOutOfRange { index: usize, value: f64 },
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest is missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("manifest row {row}: unknown label `{value}`")]
    UnknownLabel { row: usize, value: String },
    #[error("manifest row {row}: unknown period `{value}`")]
    UnknownPeriod { row: usize, value: String },
    #[error("manifest row {row}: empty path")]
    EmptyPath { row: usize },
}

/// Loads a WAV file and converts it to the canonical analysis rate.
pub fn load_canonical(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let clip = load_wav(path)?;
    resample(&clip, CANONICAL_SAMPLE_RATE)
}
