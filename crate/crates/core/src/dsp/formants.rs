//! Formant tracking from autocorrelation-method linear prediction.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DspError, FrameGrid, FrameParams, FrameSeries};
use crate::audio_io::AudioClip;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormantParams {
    pub lpc_order: usize,
    /// Roots wider than this are not treated as formants.
    pub max_bandwidth_hz: f64,
    /// Candidates closer than this to DC or Nyquist are ignored.
    pub edge_margin_hz: f64,
}

impl Default for FormantParams {
    fn default() -> Self {
        Self {
            lpc_order: 12,
            max_bandwidth_hz: 400.0,
            edge_margin_hz: 50.0,
        }
    }
}

/// The first three formant tracks. A frame with fewer candidates reports 0
/// for the missing ones and is marked invalid in that track.
#[derive(Debug, Clone)]
pub struct FormantTracks {
    pub f1: FrameSeries,
    pub f2: FrameSeries,
    pub f3: FrameSeries,
}

/// Levinson-Durbin recursion. Returns `[1, a1, .., ap]` for the predictor
/// polynomial `A(z) = 1 + a1 z^-1 + ..`, or `None` when the autocorrelation
/// is degenerate.
pub fn levinson_durbin(r: &[f64], order: usize) -> Option<Vec<f64>> {
    if r.len() <= order || r[0] <= 0.0 {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| a[j] * r[i - j]).sum::<f64>() + r[i];
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= r[0] * 1e-12 {
            return None;
        }
    }
    Some(a)
}

/// Roots of `z^p + a1 z^(p-1) + .. + ap` as (frequency Hz, bandwidth Hz)
/// pairs for the upper half plane.
fn resonances(a: &[f64], sample_rate: f64) -> Vec<(f64, f64)> {
    let p = a.len() - 1;
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        companion[(0, j)] = -a[j + 1];
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im > 0.0)
        .map(|z| {
            let freq = z.im.atan2(z.re) * sample_rate / (2.0 * PI);
            let bandwidth = -z.norm().ln() * sample_rate / PI;
            (freq, bandwidth)
        })
        .collect()
}

pub fn lpc_formants(
    clip: &AudioClip,
    frames: &FrameParams,
    params: &FormantParams,
) -> Result<FormantTracks, DspError> {
    let grid = FrameGrid::for_clip(clip, frames)?;
    let window = grid.window_samples();
    if params.lpc_order == 0 || params.lpc_order >= window {
        return Err(DspError::OrderTooLarge {
            order: params.lpc_order,
            window,
        });
    }
    let rate = clip.sample_rate() as f64;
    let nyquist = rate / 2.0;
    let taper: Vec<f64> = (0..window)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (window - 1) as f64).cos())
        .collect();

    let n = grid.num_frames();
    let mut tracks = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut valid = [vec![false; n], vec![false; n], vec![false; n]];
    let mut frame = vec![0.0; window];
    for t in 0..n {
        let start = grid.frame_start(t);
        for (i, slot) in frame.iter_mut().enumerate() {
            *slot = clip.samples()[start + i] * taper[i];
        }
        let r: Vec<f64> = (0..=params.lpc_order)
            .map(|lag| (0..window - lag).map(|i| frame[i] * frame[i + lag]).sum())
            .collect();
        if r[0] < 1e-12 {
            continue;
        }
        let Some(a) = levinson_durbin(&r, params.lpc_order) else {
            continue;
        };
        let mut candidates: Vec<f64> = resonances(&a, rate)
            .into_iter()
            .filter(|&(f, bw)| {
                bw < params.max_bandwidth_hz
                    && f > params.edge_margin_hz
                    && f < nyquist - params.edge_margin_hz
            })
            .map(|(f, _)| f)
            .collect();
        candidates.sort_by(|a, b| a.total_cmp(b));
        for (i, f) in candidates.into_iter().take(3).enumerate() {
            tracks[i][t] = f;
            valid[i][t] = true;
        }
    }
    let [f1, f2, f3] = tracks;
    let [v1, v2, v3] = valid;
    Ok(FormantTracks {
        f1: FrameSeries::with_mask("F1frequency", f1, v1, grid),
        f2: FrameSeries::with_mask("F2frequency", f2, v2, grid),
        f3: FrameSeries::with_mask("F3frequency", f3, v3, grid),
    })
}
