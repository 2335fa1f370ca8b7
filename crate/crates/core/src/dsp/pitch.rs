//! Frame-wise fundamental frequency with a YIN-style estimator.
//!
//! For each frame the squared difference function
//! `d(tau) = sum_j (x[j] - x[j + tau])^2` is computed over a fixed
//! integration window, normalised by its cumulative mean, and the first dip
//! below `yin_threshold` inside the lag search range is taken as the period.
//! The lag is refined by parabolic interpolation on `d`. Confidence is one
//! minus the normalised difference at the chosen lag.

use serde::{Deserialize, Serialize};

use super::{DspError, FrameGrid, FrameParams};
use crate::audio_io::AudioClip;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchParams {
    pub f0_min: f64,
    pub f0_max: f64,
    /// Absolute threshold on the normalised difference for picking a lag.
    pub yin_threshold: f64,
    /// A frame is voiced when its confidence reaches this value.
    pub voicing_threshold: f64,
    /// Frames quieter than this RMS are unvoiced without analysis.
    pub silence_rms: f64,
}

impl Default for PitchParams {
    fn default() -> Self {
        Self {
            f0_min: 200.0,
            f0_max: 2000.0,
            yin_threshold: 0.2,
            voicing_threshold: 0.5,
            silence_rms: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct F0Contour {
    /// Hz, zero where unvoiced.
    pub f0_hz: Vec<f64>,
    pub voiced: Vec<bool>,
    pub confidence: Vec<f64>,
    pub grid: FrameGrid,
}

impl F0Contour {
    pub fn len(&self) -> usize {
        self.f0_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0_hz.is_empty()
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.voiced.is_empty() {
            return 0.0;
        }
        self.voiced.iter().filter(|&&v| v).count() as f64 / self.voiced.len() as f64
    }
}

pub fn estimate_f0(
    clip: &AudioClip,
    frames: &FrameParams,
    params: &PitchParams,
) -> Result<F0Contour, DspError> {
    if !(params.f0_min > 0.0 && params.f0_min < params.f0_max) {
        return Err(DspError::InvalidF0Range {
            min: params.f0_min,
            max: params.f0_max,
        });
    }
    let grid = FrameGrid::for_clip(clip, frames)?;
    let rate = clip.sample_rate() as f64;
    let window = grid.window_samples();
    let max_lag = (rate / params.f0_min).ceil() as usize;
    let min_lag = ((rate / params.f0_max).floor() as usize).max(2);
    if max_lag + 2 >= window || min_lag >= max_lag {
        return Err(DspError::LagRangeTooWide {
            max_lag,
            window,
        });
    }
    let integration = window - max_lag - 1;

    let n = grid.num_frames();
    let mut contour = F0Contour {
        f0_hz: vec![0.0; n],
        voiced: vec![false; n],
        confidence: vec![0.0; n],
        grid,
    };
    let mut diff = vec![0.0; max_lag + 2];
    let mut cmnd = vec![1.0; max_lag + 2];
    for t in 0..n {
        let start = grid.frame_start(t);
        let frame = &clip.samples()[start..start + window];
        let energy = frame.iter().map(|s| s * s).sum::<f64>() / window as f64;
        if energy.sqrt() < params.silence_rms {
            continue;
        }
        difference_function(frame, integration, &mut diff);
        cumulative_mean_normalise(&diff, &mut cmnd);

        let Some(lag) = pick_lag(&cmnd, min_lag, max_lag, params.yin_threshold) else {
            continue;
        };
        let confidence = (1.0 - cmnd[lag]).clamp(0.0, 1.0);
        let refined = parabolic_minimum(&diff, lag);
        let f0 = rate / refined;
        contour.confidence[t] = confidence;
        if confidence >= params.voicing_threshold && f0 >= params.f0_min && f0 <= params.f0_max {
            contour.voiced[t] = true;
            contour.f0_hz[t] = f0;
        }
    }
    Ok(contour)
}

fn difference_function(frame: &[f64], integration: usize, out: &mut [f64]) {
    out[0] = 0.0;
    for (tau, slot) in out.iter_mut().enumerate().skip(1) {
        let mut acc = 0.0;
        for j in 0..integration {
            let d = frame[j] - frame[j + tau];
            acc += d * d;
        }
        *slot = acc;
    }
}

fn cumulative_mean_normalise(diff: &[f64], out: &mut [f64]) {
    out[0] = 1.0;
    let mut running = 0.0;
    for tau in 1..diff.len() {
        running += diff[tau];
        out[tau] = if running > 0.0 {
            diff[tau] * tau as f64 / running
        } else {
            1.0
        };
    }
}

fn pick_lag(cmnd: &[f64], min_lag: usize, max_lag: usize, threshold: f64) -> Option<usize> {
    let mut tau = min_lag;
    while tau <= max_lag {
        if cmnd[tau] < threshold {
            while tau < max_lag && cmnd[tau + 1] < cmnd[tau] {
                tau += 1;
            }
            return Some(tau);
        }
        tau += 1;
    }
    // no dip below the threshold: fall back to the global minimum
    (min_lag..=max_lag).min_by(|&a, &b| cmnd[a].total_cmp(&cmnd[b]))
}

fn parabolic_minimum(values: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= values.len() {
        return i as f64;
    }
    let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-18 {
        return i as f64;
    }
    let shift = 0.5 * (a - c) / denom;
    i as f64 + shift.clamp(-1.0, 1.0)
}
