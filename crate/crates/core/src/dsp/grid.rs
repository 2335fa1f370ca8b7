use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::DspError;
use crate::audio_io::AudioClip;

/// Framing parameters in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    pub hop_seconds: f64,
    pub window_seconds: f64,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self {
            hop_seconds: 0.010,
            window_seconds: 0.025,
        }
    }
}

/// Uniform analysis frames over a clip.
///
/// Frame `t` covers samples `[t * hop, t * hop + window)`; every frame lies
/// fully inside the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGrid {
    sample_rate: u32,
    hop: usize,
    window: usize,
    num_frames: usize,
}

impl FrameGrid {
    pub fn new(params: &FrameParams, sample_rate: u32, num_samples: usize) -> Result<Self, DspError> {
        let hop = (params.hop_seconds * sample_rate as f64).round() as usize;
        let window = (params.window_seconds * sample_rate as f64).round() as usize;
        Self::from_samples(sample_rate, hop, window, num_samples)
    }

    pub fn for_clip(clip: &AudioClip, params: &FrameParams) -> Result<Self, DspError> {
        Self::new(params, clip.sample_rate(), clip.len())
    }

    pub fn from_samples(
        sample_rate: u32,
        hop: usize,
        window: usize,
        num_samples: usize,
    ) -> Result<Self, DspError> {
        if hop == 0 || window == 0 {
            return Err(DspError::InvalidFrameParams { hop, window });
        }
        if num_samples < window {
            return Err(DspError::ClipTooShort {
                samples: num_samples,
                window,
            });
        }
        Ok(Self {
            sample_rate,
            hop,
            window,
            num_frames: (num_samples - window) / hop + 1,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn hop_samples(&self) -> usize {
        self.hop
    }

    pub fn window_samples(&self) -> usize {
        self.window
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn hop_seconds(&self) -> f64 {
        self.hop as f64 / self.sample_rate as f64
    }

    pub fn window_seconds(&self) -> f64 {
        self.window as f64 / self.sample_rate as f64
    }

    pub fn frame_start(&self, t: usize) -> usize {
        t * self.hop
    }

    /// Centre of frame `t` in seconds.
    ///
    /// Computed as an exact integer ratio so that comparisons against times
    /// derived from sample indices (`s / rate`) agree with integer comparisons.
    pub fn frame_center_seconds(&self, t: usize) -> f64 {
        (2 * t * self.hop + self.window) as f64 / (2 * self.sample_rate as usize) as f64
    }

    /// Frames whose centre lies in `[onset, offset)` seconds.
    pub fn frames_in(&self, onset: f64, offset: f64) -> Range<usize> {
        let first = self.first_center_at_or_after(onset);
        let end = self.first_center_at_or_after(offset).max(first);
        first..end
    }

    fn first_center_at_or_after(&self, time: f64) -> usize {
        let approx = (time / self.hop_seconds() - self.window_seconds() / 2.0 / self.hop_seconds())
            .floor()
            .max(0.0) as usize;
        let mut t = approx.saturating_sub(1).min(self.num_frames);
        while t > 0 && self.frame_center_seconds(t - 1) >= time {
            t -= 1;
        }
        while t < self.num_frames && self.frame_center_seconds(t) < time {
            t += 1;
        }
        t
    }

    /// Number of frames needed to cover `duration` seconds, as used for
    /// converting minimum run lengths to frame counts.
    pub fn frames_for_duration(&self, duration: f64) -> usize {
        (duration / self.hop_seconds() - 1e-9).ceil().max(0.0) as usize
    }
}

/// A per-frame scalar descriptor.
///
/// `valid` marks frames that carry a defined value; degenerate frames keep a
/// placeholder (usually zero) and are skipped by downstream statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    pub grid: FrameGrid,
}

impl FrameSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>, grid: FrameGrid) -> Self {
        let valid = vec![true; values.len()];
        Self::with_mask(name, values, valid, grid)
    }

    pub fn with_mask(
        name: impl Into<String>,
        values: Vec<f64>,
        valid: Vec<bool>,
        grid: FrameGrid,
    ) -> Self {
        debug_assert_eq!(values.len(), grid.num_frames());
        debug_assert_eq!(valid.len(), values.len());
        Self {
            name: name.into(),
            values,
            valid,
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
