use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{DspError, FrameGrid, FrameParams};
use crate::audio_io::AudioClip;

/// Short-time spectrum of a clip: one row per frame, `n_fft / 2 + 1` bins.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    grid: FrameGrid,
    n_fft: usize,
    spectrum: Array2<Complex64>,
    power: Array2<f64>,
}

impl Spectrogram {
    /// Assembles a spectrogram from precomputed bins (frames by `n_fft / 2 + 1`).
    pub fn from_parts(grid: FrameGrid, n_fft: usize, spectrum: Array2<Complex64>) -> Self {
        assert_eq!(spectrum.ncols(), n_fft / 2 + 1, "bin count must match the FFT size");
        let power = spectrum.mapv(|c| c.norm_sqr());
        Self {
            grid,
            n_fft,
            spectrum,
            power,
        }
    }

    pub fn grid(&self) -> &FrameGrid {
        &self.grid
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn num_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn num_frames(&self) -> usize {
        self.grid.num_frames()
    }

    pub fn complex(&self) -> &Array2<Complex64> {
        &self.spectrum
    }

    /// Squared magnitudes, frames by bins.
    pub fn power(&self) -> &Array2<f64> {
        &self.power
    }

    pub fn magnitude(&self) -> Array2<f64> {
        self.power.mapv(f64::sqrt)
    }

    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.grid.sample_rate() as f64 / self.n_fft as f64
    }
}

/// Periodic Hann window.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
        .collect()
}

/// Hann-windowed STFT; the FFT size is the next power of two at or above the
/// window length.
pub fn stft(clip: &AudioClip, params: &FrameParams) -> Result<Spectrogram, DspError> {
    let grid = FrameGrid::for_clip(clip, params)?;
    let window = grid.window_samples();
    let n_fft = window.next_power_of_two();
    let bins = n_fft / 2 + 1;
    let taper = hann(window);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);

    let mut spectrum = Array2::<Complex64>::zeros((grid.num_frames(), bins));
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    let samples = clip.samples();
    for t in 0..grid.num_frames() {
        let start = grid.frame_start(t);
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < window {
                Complex64::new(samples[start + i] * taper[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        for (k, value) in buf.iter().take(bins).enumerate() {
            spectrum[[t, k]] = *value;
        }
    }
    let power = spectrum.mapv(|c| c.norm_sqr());
    Ok(Spectrogram {
        grid,
        n_fft,
        spectrum,
        power,
    })
}
