//! Frame-level signal kernels shared by every downstream feature.

mod formants;
mod grid;
mod mel;
mod pitch;
mod spectral;
mod stft;

use thiserror::Error;

pub use formants::{levinson_durbin, lpc_formants, FormantParams, FormantTracks};
pub use grid::{FrameGrid, FrameParams, FrameSeries};
pub use mel::{
    hz_to_mel, log_mel, loudness, loudness_to_db, mel_filterbank, mel_to_hz, mfcc,
    LogMelSpectrogram, MelParams, LOG_FLOOR, LOUDNESS_EXPONENT,
};
pub use pitch::{estimate_f0, F0Contour, PitchParams};
pub use spectral::{spectral_flatness, spectral_slope_band, POWER_FLOOR};
pub use stft::{hann, stft, Spectrogram};

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    #[error("invalid frame parameters: hop {hop} samples, window {window} samples")]
    InvalidFrameParams { hop: usize, window: usize },
    #[error("clip of {samples} samples is shorter than one {window}-sample window")]
    ClipTooShort { samples: usize, window: usize },
    #[error("{bands} Mel bands requested but the spectrum has {bins} bins")]
    TooManyBands { bands: usize, bins: usize },
    #[error("invalid Mel range {fmin}..{fmax} Hz")]
    InvalidMelRange { fmin: f64, fmax: f64 },
    #[error("{coeffs} cepstral coefficients requested from {bands} bands")]
    TooManyCoefficients { coeffs: usize, bands: usize },
    #[error("invalid F0 search range {min}..{max} Hz")]
    InvalidF0Range { min: f64, max: f64 },
    #[error("F0 lag range up to {max_lag} samples does not fit a {window}-sample window")]
    LagRangeTooWide { max_lag: usize, window: usize },
    #[error("band {low_hz}..{high_hz} Hz covers only {bins} bins (need 3)")]
    BandTooNarrow { low_hz: f64, high_hz: f64, bins: usize },
    #[error("LPC order {order} must be positive and below the {window}-sample window")]
    OrderTooLarge { order: usize, window: usize },
    #[error("series are on different frame grids")]
    GridMismatch,
}

/// Front-end settings shared by every frame-level analysis of one clip.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct AnalysisParams {
    pub frames: FrameParams,
    pub mel: MelParams,
    pub pitch: PitchParams,
    pub formants: FormantParams,
}
