//! Deterministic synthetic cries with known contours, events and boundaries.

mod corpus;
mod render;
mod score;
mod spec;
mod truth;

use thiserror::Error;

pub use corpus::{
    derive_seed, generate_spec, make_corpus, plan_corpus, render_item, ClassProfile, CorpusItem,
    CorpusProfile, CorpusSummary, MelodyMix, RecordingTruth,
};
pub use render::{synth_cry, HARMONICS};
pub use score::{score_units, Counts, UnitScore};
pub use spec::{
    melody_curve, Glide, Hyperphonation, Span, SynthSpec, UnitSpec, Vibrato, HYPER_APPROACH_HZ,
    HYPER_APPROACH_S, HYPER_JUMP_S,
};
pub use truth::{GroundTruth, SampleSpan, UnitTruth};

use crate::audio_io::{AudioError, ManifestError};
use crate::dsp::DspError;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("unit {unit}: {reason}")]
    InvalidSpec { unit: usize, reason: String },
    #[error("invalid class profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("ground truth serialisation: {0}")]
    Json(#[from] serde_json::Error),
}
