//! Expiratory cry-unit detection from loudness and voicing.
//!
//! Loudness is converted to decibels and compared against two thresholds
//! placed between the recording's noise floor (a low percentile) and its
//! peak. A candidate region is a maximal run of frames above the release
//! threshold that contains at least one frame above the onset threshold with
//! a voiced frame nearby. Regions separated by short gaps are merged and
//! regions that are still too short are dropped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::AudioClip;
use crate::dsp::{loudness_to_db, F0Contour, FrameGrid, FrameSeries};
use crate::stats::percentile;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("loudness and F0 contours are on different frame grids")]
    GridMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmenterParams {
    pub min_unit_s: f64,
    pub min_pause_s: f64,
    /// Frames either side of an onset frame searched for voicing.
    pub voicing_neighborhood: usize,
    /// Percentile of loudness (dB) used as the noise floor.
    pub floor_percentile: f64,
    /// Onset threshold above the floor, dB.
    pub onset_above_floor_db: f64,
    /// Release threshold above the floor, dB.
    pub release_above_floor_db: f64,
    /// The onset threshold is kept within this range below the peak, dB.
    pub onset_min_below_peak_db: f64,
    pub onset_max_below_peak_db: f64,
    /// The release threshold never sits further than this below the peak.
    pub release_max_below_peak_db: f64,
}

impl Default for SegmenterParams {
    fn default() -> Self {
        Self {
            min_unit_s: 0.2,
            min_pause_s: 0.05,
            voicing_neighborhood: 3,
            floor_percentile: 5.0,
            onset_above_floor_db: 6.0,
            release_above_floor_db: 3.0,
            onset_min_below_peak_db: 10.0,
            onset_max_below_peak_db: 20.0,
            release_max_below_peak_db: 30.0,
        }
    }
}

/// Half-open time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub onset: f64,
    pub offset: f64,
}

impl Interval {
    pub fn new(onset: f64, offset: f64) -> Self {
        Self { onset, offset }
    }

    pub fn duration(&self) -> f64 {
        self.offset - self.onset
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CrySegmentation {
    pub expirations: Vec<Interval>,
    pub pauses: Vec<Interval>,
    pub total_cry_seconds: f64,
}

impl CrySegmentation {
    /// Builds a segmentation from ordered, non-overlapping expirations.
    pub fn from_expirations(expirations: Vec<Interval>) -> Self {
        let pauses = expirations
            .windows(2)
            .map(|w| Interval::new(w[0].offset, w[1].onset))
            .collect();
        let total_cry_seconds = expirations.iter().map(Interval::duration).sum();
        Self {
            expirations,
            pauses,
            total_cry_seconds,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.expirations.is_empty()
    }

    pub fn num_units(&self) -> usize {
        self.expirations.len()
    }
}

/// Minimum summed cry duration for a recording to be analysed.
pub const MIN_CRY_SECONDS: f64 = 3.0;

/// True when the summed expiration time reaches `min_cry_seconds` (inclusive).
pub fn meets_curation_rule(seg: &CrySegmentation, min_cry_seconds: f64) -> bool {
    !seg.is_empty() && seg.total_cry_seconds >= min_cry_seconds - 1e-9
}

pub fn detect_cry_units(
    clip: &AudioClip,
    f0: &F0Contour,
    loudness: &FrameSeries,
    params: &SegmenterParams,
) -> Result<CrySegmentation, SegmentError> {
    if f0.grid != loudness.grid {
        return Err(SegmentError::GridMismatch);
    }
    let grid = loudness.grid;
    let n = grid.num_frames();
    let db: Vec<f64> = loudness.values.iter().map(|&l| loudness_to_db(l)).collect();
    let Some(floor) = percentile(&db, params.floor_percentile) else {
        return Ok(CrySegmentation::default());
    };
    let peak = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let high = (peak - params.onset_max_below_peak_db)
        .max((floor + params.onset_above_floor_db).min(peak - params.onset_min_below_peak_db));
    let low = (peak - params.release_max_below_peak_db)
        .max((floor + params.release_above_floor_db).min(high - 3.0));

    let voiced_near = |t: usize| {
        let lo = t.saturating_sub(params.voicing_neighborhood);
        let hi = (t + params.voicing_neighborhood).min(n - 1);
        f0.voiced[lo..=hi].iter().any(|&v| v)
    };

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut t = 0;
    while t < n {
        if db[t] <= low {
            t += 1;
            continue;
        }
        let start = t;
        let mut triggered = false;
        while t < n && db[t] > low {
            triggered |= db[t] > high && voiced_near(t);
            t += 1;
        }
        if triggered {
            runs.push((start, t - 1));
        }
    }

    let duration = clip.duration_seconds();
    let mut merged: Vec<Interval> = Vec::new();
    for (first, last) in runs {
        let interval = Interval::new(
            frame_edge(&grid, first, false),
            frame_edge(&grid, last, true).min(duration),
        );
        match merged.last_mut() {
            Some(prev) if interval.onset - prev.offset < params.min_pause_s => {
                prev.offset = interval.offset;
            }
            _ => merged.push(interval),
        }
    }
    merged.retain(|iv| iv.duration() >= params.min_unit_s - 1e-9);
    Ok(CrySegmentation::from_expirations(merged))
}

/// Frame centre shifted by half a hop, as an exact ratio of integers.
fn frame_edge(grid: &FrameGrid, t: usize, after: bool) -> f64 {
    let hop = grid.hop_samples();
    let base = 2 * t * hop + grid.window_samples();
    let numer = if after { base + hop } else { base - hop };
    numer as f64 / (2 * grid.sample_rate() as usize) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{estimate_f0, log_mel, loudness, stft, FrameParams, MelParams, PitchParams};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn segment(clip: &AudioClip) -> CrySegmentation {
        let frames = FrameParams::default();
        let f0 = estimate_f0(clip, &frames, &PitchParams::default()).unwrap();
        let spec = stft(clip, &frames).unwrap();
        let loud = loudness(&log_mel(&spec, &MelParams::default()).unwrap());
        detect_cry_units(clip, &f0, &loud, &SegmenterParams::default()).unwrap()
    }

    /// Silence with 450 Hz bursts over the given sample intervals.
    fn bursts(total: usize, spans: &[(usize, usize)]) -> AudioClip {
        let mut x = vec![0.0; total];
        for &(a, b) in spans {
            for (i, slot) in x[a..b].iter_mut().enumerate() {
                *slot = 0.4 * (2.0 * PI * 450.0 * i as f64 / 16000.0).sin();
            }
        }
        AudioClip::new(x, 16000).unwrap()
    }

    #[test]
    fn single_burst_boundaries() {
        let seg = segment(&bursts(40000, &[(16000, 24000)]));
        assert_eq!(seg.expirations.len(), 1);
        assert!(seg.pauses.is_empty());
        let iv = seg.expirations[0];
        assert!((iv.onset - 1.0).abs() <= 0.02, "{iv:?}");
        assert!((iv.offset - 1.5).abs() <= 0.02, "{iv:?}");
    }

    #[test]
    fn silence_has_no_units() {
        let seg = segment(&AudioClip::silence(32000, 16000).unwrap());
        assert!(seg.expirations.is_empty() && seg.pauses.is_empty());
        assert_eq!(seg.total_cry_seconds, 0.0);
    }

    #[test]
    fn two_bursts_and_a_pause() {
        let seg = segment(&bursts(40000, &[(8000, 17600), (22400, 32000)]));
        assert_eq!(seg.expirations.len(), 2);
        assert_eq!(seg.pauses.len(), 1);
        assert!((seg.pauses[0].duration() - 0.3).abs() <= 0.02, "{:?}", seg.pauses);
    }

    #[test]
    fn unvoiced_noise_is_not_a_unit() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let d = Normal::new(0.0, 0.2).unwrap();
        let mut x = vec![0.0; 32000];
        for s in &mut x[8000..24000] {
            *s = d.sample(&mut rng);
        }
        let seg = segment(&AudioClip::from_clamped(x, 16000).unwrap());
        assert!(seg.expirations.is_empty());
    }

    #[test]
    fn short_gaps_merge_and_short_units_drop() {
        // gap of 0.02 s merges; a 0.1 s burst is dropped
        let seg = segment(&bursts(48000, &[(8000, 16000), (16320, 24000), (36000, 37600)]));
        assert_eq!(seg.expirations.len(), 1, "{seg:?}");
    }

    #[test]
    fn padding_shifts_boundaries_exactly() {
        let clip = bursts(32000, &[(4000, 12000), (17000, 27000)]);
        let base = segment(&clip);
        for pad_hops in [10usize, 37, 100] {
            let pad = pad_hops * 160;
            let mut x = vec![0.0; pad];
            x.extend_from_slice(clip.samples());
            x.extend(std::iter::repeat(0.0).take(pad));
            let padded = segment(&AudioClip::new(x, 16000).unwrap());
            assert_eq!(padded.expirations.len(), base.expirations.len());
            let shift = pad as f64 / 16000.0;
            for (a, b) in base.expirations.iter().zip(&padded.expirations) {
                assert!((b.onset - a.onset - shift).abs() < 1e-9);
                assert!((b.offset - a.offset - shift).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn curation_rule() {
        let seg = CrySegmentation::from_expirations(vec![
            Interval::new(0.0, 1.5),
            Interval::new(2.0, 3.6),
        ]);
        assert!(meets_curation_rule(&seg, MIN_CRY_SECONDS));
        let exact = CrySegmentation::from_expirations(vec![
            Interval::new(0.0, 1.0),
            Interval::new(1.5, 3.5),
        ]);
        assert_eq!(exact.total_cry_seconds, 3.0);
        assert!(meets_curation_rule(&exact, MIN_CRY_SECONDS));
        assert!(!meets_curation_rule(&CrySegmentation::default(), MIN_CRY_SECONDS));
        let short = CrySegmentation::from_expirations(vec![Interval::new(0.0, 2.0)]);
        assert!(!meets_curation_rule(&short, MIN_CRY_SECONDS));
    }

    #[test]
    fn mismatched_grids() {
        let clip = bursts(8000, &[(0, 8000)]);
        let frames = FrameParams::default();
        let f0 = estimate_f0(&clip, &frames, &PitchParams::default()).unwrap();
        let other = AudioClip::silence(9600, 16000).unwrap();
        let loud = loudness(&log_mel(&stft(&other, &frames).unwrap(), &MelParams::default()).unwrap());
        assert_eq!(
            detect_cry_units(&clip, &f0, &loud, &SegmenterParams::default()),
            Err(SegmentError::GridMismatch)
        );
    }

    fn check_invariants(seg: &CrySegmentation, duration: f64, params: &SegmenterParams) {
        assert_eq!(seg.pauses.len(), seg.expirations.len().saturating_sub(1));
        for iv in &seg.expirations {
            assert!(iv.onset >= 0.0 && iv.offset <= duration + 1e-12);
            assert!(iv.duration() >= params.min_unit_s - 1e-9);
        }
        for (w, p) in seg.expirations.windows(2).zip(&seg.pauses) {
            assert!(w[0].offset < w[1].onset);
            assert_eq!(p.onset, w[0].offset);
            assert_eq!(p.offset, w[1].onset);
            assert!(p.duration() >= params.min_pause_s - 1e-9);
        }
        let total: f64 = seg.expirations.iter().map(Interval::duration).sum();
        assert!((total - seg.total_cry_seconds).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn invariants_hold_for_random_signals(
            seed in 0u64..10_000,
            n in 400usize..24000,
            tone_prob in 0.0f64..1.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut x = Vec::with_capacity(n);
            let mut on = false;
            for i in 0..n {
                if i % 800 == 0 {
                    on = rng.random_bool(tone_prob);
                }
                let noise: f64 = rng.random_range(-0.01..0.01);
                let tone = if on { 0.3 * (2.0 * PI * 500.0 * i as f64 / 16000.0).sin() } else { 0.0 };
                x.push(tone + noise);
            }
            let clip = AudioClip::from_clamped(x, 16000).unwrap();
            let seg = segment(&clip);
            check_invariants(&seg, clip.duration_seconds(), &SegmenterParams::default());
            prop_assert_eq!(segment(&clip), seg);
        }
    }
}
