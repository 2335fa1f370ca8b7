//! Per-frame and per-unit biomarker detectors.
//!
//! Every detector takes a unit as a frame range on the contour grid and
//! returns flags relative to the start of that range.

use std::ops::Range;

use super::BiomarkerParams;
use crate::dsp::{F0Contour, FrameGrid, FrameSeries};
use crate::stats::median3_runs;

/// Marks every element that belongs to a run of `true` of at least `min_len`.
pub fn keep_long_runs(cond: &[bool], min_len: usize) -> Vec<bool> {
    let mut out = vec![false; cond.len()];
    let mut t = 0;
    while t < cond.len() {
        if !cond[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < cond.len() && cond[t] {
            t += 1;
        }
        if t - start >= min_len.max(1) {
            out[start..t].iter_mut().for_each(|f| *f = true);
        }
    }
    out
}

fn min_run_frames(grid: &FrameGrid, seconds: f64) -> usize {
    grid.frames_for_duration(seconds).max(1)
}

/// Largest frame lag `k` with `k * hop <= seconds`.
fn max_lag_frames(grid: &FrameGrid, seconds: f64) -> usize {
    (seconds / grid.hop_seconds() + 1e-9).floor() as usize
}

/// Median-smoothed F0 over a unit and the matching voicing mask.
///
/// Smoothing runs inside each voiced stretch so that an unvoiced neighbour
/// never enters a window; stretches under three frames count as unvoiced.
pub fn smoothed_unit_contour(f0: &F0Contour, unit: Range<usize>) -> (Vec<f64>, Vec<bool>) {
    median3_runs(&f0.f0_hz[unit.clone()], &f0.voiced[unit])
}

/// Frames inside voiced runs above the hyperphonation threshold that last
/// long enough.
pub fn detect_hyperphonation(f0: &F0Contour, unit: Range<usize>, params: &BiomarkerParams) -> Vec<bool> {
    let cond: Vec<bool> = unit
        .clone()
        .map(|t| f0.voiced[t] && f0.f0_hz[t] > params.hyperphonation_f0_hz)
        .collect();
    keep_long_runs(&cond, min_run_frames(&f0.grid, params.hyperphonation_min_s))
}

/// Frames inside sufficiently long runs of high spectral flatness.
pub fn detect_dysphonation(
    flatness: &FrameSeries,
    unit: Range<usize>,
    params: &BiomarkerParams,
) -> Vec<bool> {
    let cond: Vec<bool> = unit
        .map(|t| flatness.valid[t] && flatness.values[t] > params.dysphonation_flatness)
        .collect();
    keep_long_runs(&cond, min_run_frames(&flatness.grid, params.dysphonation_min_s))
}

/// Frames spanned by a large, fast F0 change between two voiced frames.
pub fn detect_glide(f0: &F0Contour, unit: Range<usize>, params: &BiomarkerParams) -> Vec<bool> {
    let (smooth, voiced) = smoothed_unit_contour(f0, unit);
    let n = smooth.len();
    let max_k = max_lag_frames(&f0.grid, params.glide_max_s);
    let mut flags = vec![false; n];
    for t in 0..n {
        if !voiced[t] {
            continue;
        }
        for k in 1..=max_k.min(n - 1 - t) {
            if voiced[t + k] && (smooth[t + k] - smooth[t]).abs() >= params.glide_delta_hz {
                flags[t..=t + k].iter_mut().for_each(|f| *f = true);
            }
        }
    }
    flags
}

/// Turning points of a sequence that reverse by at least `prominence`.
///
/// Returns the positions (into `positions`) of confirmed extrema. The last
/// candidate, which has no confirming reversal after it, is not reported,
/// and neither is a turning point on the first sample.
pub fn turning_points(values: &[f64], positions: &[usize], prominence: f64) -> Vec<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Dir {
        Unknown,
        Up,
        Down,
    }
    let mut out = Vec::new();
    if values.is_empty() {
        return out;
    }
    let mut dir = Dir::Unknown;
    let (mut hi, mut lo) = (0usize, 0usize);
    for i in 1..values.len() {
        let v = values[i];
        match dir {
            Dir::Unknown => {
                if v > values[hi] {
                    hi = i;
                }
                if v < values[lo] {
                    lo = i;
                }
                if values[hi] - v >= prominence {
                    if hi > 0 {
                        out.push(positions[hi]);
                    }
                    dir = Dir::Down;
                    lo = i;
                } else if v - values[lo] >= prominence {
                    if lo > 0 {
                        out.push(positions[lo]);
                    }
                    dir = Dir::Up;
                    hi = i;
                }
            }
            Dir::Up => {
                if v > values[hi] {
                    hi = i;
                } else if values[hi] - v >= prominence {
                    out.push(positions[hi]);
                    dir = Dir::Down;
                    lo = i;
                }
            }
            Dir::Down => {
                if v < values[lo] {
                    lo = i;
                } else if v - values[lo] >= prominence {
                    out.push(positions[lo]);
                    dir = Dir::Up;
                    hi = i;
                }
            }
        }
    }
    out
}

/// True when the unit holds a chain of enough closely spaced F0 reversals.
pub fn detect_vibrato(f0: &F0Contour, unit: Range<usize>, params: &BiomarkerParams) -> bool {
    let (smooth, voiced) = smoothed_unit_contour(f0, unit);
    let (positions, values): (Vec<usize>, Vec<f64>) = smooth
        .iter()
        .zip(&voiced)
        .enumerate()
        .filter(|(_, (_, &v))| v)
        .map(|(i, (&s, _))| (i, s))
        .unzip();
    let extrema = turning_points(&values, &positions, params.vibrato_prominence_hz);
    let max_gap = max_lag_frames(&f0.grid, params.vibrato_max_spacing_s);
    let mut chain = usize::from(!extrema.is_empty());
    let mut best = chain;
    for w in extrema.windows(2) {
        chain = if w[1] - w[0] <= max_gap { chain + 1 } else { 1 };
        best = best.max(chain);
    }
    best >= params.vibrato_min_extrema
}
