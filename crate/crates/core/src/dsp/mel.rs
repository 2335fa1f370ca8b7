//! Mel filterbank energies and the descriptors derived from them.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{DspError, FrameGrid, FrameSeries, Spectrogram};

/// Energies are floored here before taking the natural log.
pub const LOG_FLOOR: f64 = 1e-10;
/// Exponent of the loudness proxy applied to summed Mel energy.
pub const LOUDNESS_EXPONENT: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelParams {
    pub num_bands: usize,
    pub fmin: f64,
    pub fmax: f64,
}

impl Default for MelParams {
    fn default() -> Self {
        Self {
            num_bands: 80,
            fmin: 0.0,
            fmax: 8000.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogMelSpectrogram {
    /// Natural-log band energies, frames by bands.
    pub values: Array2<f64>,
    pub grid: FrameGrid,
}

impl LogMelSpectrogram {
    pub fn num_bands(&self) -> usize {
        self.values.ncols()
    }

    pub fn num_frames(&self) -> usize {
        self.values.nrows()
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular HTK-scale filters with unit peak, bands by FFT bins.
pub fn mel_filterbank(
    params: &MelParams,
    n_fft: usize,
    sample_rate: u32,
) -> Result<Array2<f64>, DspError> {
    let bins = n_fft / 2 + 1;
    let nyquist = sample_rate as f64 / 2.0;
    if params.num_bands == 0 || params.num_bands > bins {
        return Err(DspError::TooManyBands {
            bands: params.num_bands,
            bins,
        });
    }
    if !(params.fmin >= 0.0 && params.fmin < params.fmax && params.fmax <= nyquist) {
        return Err(DspError::InvalidMelRange {
            fmin: params.fmin,
            fmax: params.fmax,
        });
    }
    let mel_lo = hz_to_mel(params.fmin);
    let mel_hi = hz_to_mel(params.fmax);
    let edges: Vec<f64> = (0..params.num_bands + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (params.num_bands + 1) as f64))
        .collect();
    let mut fb = Array2::<f64>::zeros((params.num_bands, bins));
    for b in 0..params.num_bands {
        let (lo, centre, hi) = (edges[b], edges[b + 1], edges[b + 2]);
        for k in 0..bins {
            let f = k as f64 * sample_rate as f64 / n_fft as f64;
            let w = if f > lo && f <= centre {
                (f - lo) / (centre - lo)
            } else if f > centre && f < hi {
                (hi - f) / (hi - centre)
            } else {
                0.0
            };
            fb[[b, k]] = w;
        }
    }
    Ok(fb)
}

pub fn log_mel(spec: &Spectrogram, params: &MelParams) -> Result<LogMelSpectrogram, DspError> {
    let fb = mel_filterbank(params, spec.n_fft(), spec.grid().sample_rate())?;
    let energies = spec.power().dot(&fb.t());
    Ok(LogMelSpectrogram {
        values: energies.mapv(|e| e.max(LOG_FLOOR).ln()),
        grid: *spec.grid(),
    })
}

/// Orthonormal DCT-II cepstra over the log-Mel bands.
///
/// Returns coefficients `1..=num_coeffs` (the DC term is dropped), named
/// `mfcc1`, `mfcc2`, ...
pub fn mfcc(logmel: &LogMelSpectrogram, num_coeffs: usize) -> Result<Vec<FrameSeries>, DspError> {
    let bands = logmel.num_bands();
    if num_coeffs >= bands {
        return Err(DspError::TooManyCoefficients {
            coeffs: num_coeffs,
            bands,
        });
    }
    let n = bands as f64;
    let scale = (2.0 / n).sqrt();
    let basis: Vec<Vec<f64>> = (1..=num_coeffs)
        .map(|k| {
            (0..bands)
                .map(|b| {
                    scale * (std::f64::consts::PI * k as f64 * (2.0 * b as f64 + 1.0) / (2.0 * n)).cos()
                })
                .collect()
        })
        .collect();
    Ok(basis
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let values = logmel
                .values
                .rows()
                .into_iter()
                .map(|frame| frame.iter().zip(row).map(|(x, w)| x * w).sum())
                .collect();
            FrameSeries::new(format!("mfcc{}", i + 1), values, logmel.grid)
        })
        .collect())
}

/// Loudness proxy: summed linear Mel energy raised to [`LOUDNESS_EXPONENT`].
pub fn loudness(logmel: &LogMelSpectrogram) -> FrameSeries {
    let values = logmel
        .values
        .rows()
        .into_iter()
        .map(|frame| frame.iter().map(|v| v.exp()).sum::<f64>().powf(LOUDNESS_EXPONENT))
        .collect();
    FrameSeries::new("loudness", values, logmel.grid)
}

/// Converts a loudness value back to decibels of summed Mel energy.
pub fn loudness_to_db(loudness: f64) -> f64 {
    10.0 / LOUDNESS_EXPONENT * loudness.max(f64::MIN_POSITIVE).log10()
}
