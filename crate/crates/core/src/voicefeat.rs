//! Generic voice functionals computed over the concatenated cry units.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio_io::{AudioClip, AudioError};
use crate::dsp::{
    estimate_f0, log_mel, loudness, lpc_formants, mfcc, spectral_slope_band, stft, AnalysisParams,
    DspError, FrameSeries,
};
use crate::segmenter::CrySegmentation;
use crate::stats::{masked_moving_average3, mean, ols_slope, pop_std};

/// Column names of the generic block.
pub const GENERIC_FEATURE_NAMES: [&str; 12] = [
    "slopeUV0_500_amean",
    "slopeV0_500_stddevNorm",
    "slopeV0_500_amean",
    "F2_amean",
    "F3_amean",
    "F3_stddevNorm",
    "mfcc3_amean",
    "mfcc3V_amean",
    "mfcc3V_stddevNorm",
    "loudness_stddevFallingSlope",
    "mfcc2_stddevNorm",
    "mfcc4V_stddevNorm",
];

/// Denominator guard for normalised standard deviations.
pub const STDDEV_NORM_EPS: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum VoiceError {
    #[error("segmentation has no cry units")]
    EmptySegmentation,
    #[error("concatenated cry is {seconds:.3} s, below the {min_seconds} s minimum")]
    TooShort { seconds: f64, min_seconds: f64 },
    #[error("no voiced frames, so {} are undefined", features.join(", "))]
    NoVoicedFrames { features: Vec<&'static str> },
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Audio(#[from] AudioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoiceParams {
    pub min_seconds: f64,
    pub slope_low_hz: f64,
    pub slope_high_hz: f64,
    /// Minimum length of a strictly falling loudness run.
    pub falling_run_frames: usize,
}

impl Default for VoiceParams {
    fn default() -> Self {
        Self {
            min_seconds: 0.5,
            slope_low_hz: 0.0,
            slope_high_hz: 500.0,
            falling_run_frames: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericFeatureVector {
    values: [f64; 12],
}

impl GenericFeatureVector {
    pub fn from_values(values: [f64; 12]) -> Self {
        Self { values }
    }

    pub fn names() -> &'static [&'static str; 12] {
        &GENERIC_FEATURE_NAMES
    }

    pub fn values(&self) -> &[f64; 12] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        GENERIC_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        GENERIC_FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

impl Serialize for GenericFeatureVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(12))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, &value)?;
        }
        map.end()
    }
}

/// Joins the expiration intervals of `clip`, in order, at sample accuracy.
pub fn concat_expirations(clip: &AudioClip, seg: &CrySegmentation) -> Result<AudioClip, VoiceError> {
    if seg.is_empty() {
        return Err(VoiceError::EmptySegmentation);
    }
    let rate = clip.sample_rate() as f64;
    let mut out = Vec::new();
    for iv in &seg.expirations {
        let start = ((iv.onset * rate).round().max(0.0) as usize).min(clip.len());
        let end = ((iv.offset * rate).round().max(0.0) as usize).clamp(start, clip.len());
        out.extend_from_slice(&clip.samples()[start..end]);
    }
    Ok(AudioClip::new(out, clip.sample_rate())?)
}

/// Smoothed low-level descriptors and the voicing split they are summarised over.
#[derive(Debug, Clone)]
pub struct GenericLlds {
    pub slope: FrameSeries,
    pub f2: FrameSeries,
    pub f3: FrameSeries,
    pub mfcc2: FrameSeries,
    pub mfcc3: FrameSeries,
    pub mfcc4: FrameSeries,
    pub loudness: FrameSeries,
    pub voiced: Vec<bool>,
}

fn smoothed(series: FrameSeries, extra_mask: Option<&[bool]>) -> FrameSeries {
    let valid: Vec<bool> = match extra_mask {
        Some(mask) => series.valid.iter().zip(mask).map(|(a, b)| *a && *b).collect(),
        None => series.valid.clone(),
    };
    let values = masked_moving_average3(&series.values, &valid);
    FrameSeries::with_mask(series.name, values, valid, series.grid)
}

pub fn compute_llds(
    concat: &AudioClip,
    analysis: &AnalysisParams,
    params: &VoiceParams,
) -> Result<GenericLlds, VoiceError> {
    let seconds = concat.duration_seconds();
    if seconds < params.min_seconds {
        return Err(VoiceError::TooShort {
            seconds,
            min_seconds: params.min_seconds,
        });
    }
    let spec = stft(concat, &analysis.frames)?;
    let logmel = log_mel(&spec, &analysis.mel)?;
    let mut cepstra = mfcc(&logmel, 4)?.into_iter().skip(1);
    let (mfcc2, mfcc3, mfcc4) = (
        cepstra.next().unwrap(),
        cepstra.next().unwrap(),
        cepstra.next().unwrap(),
    );
    let f0 = estimate_f0(concat, &analysis.frames, &analysis.pitch)?;
    let formants = lpc_formants(concat, &analysis.frames, &analysis.formants)?;
    let slope = spectral_slope_band(&spec, params.slope_low_hz, params.slope_high_hz)?;
    Ok(GenericLlds {
        slope: smoothed(slope, None),
        f2: smoothed(formants.f2, Some(&f0.voiced)),
        f3: smoothed(formants.f3, Some(&f0.voiced)),
        mfcc2: smoothed(mfcc2, None),
        mfcc3: smoothed(mfcc3, None),
        mfcc4: smoothed(mfcc4, None),
        loudness: smoothed(loudness(&logmel), None),
        voiced: f0.voiced,
    })
}

fn select(series: &FrameSeries, mask: impl Fn(usize) -> bool) -> Vec<f64> {
    (0..series.len())
        .filter(|&t| series.valid[t] && mask(t))
        .map(|t| series.values[t])
        .collect()
}

pub fn stddev_norm(values: &[f64]) -> f64 {
    pop_std(values) / mean(values).abs().max(STDDEV_NORM_EPS)
}

/// Population std of the OLS slopes (per second) of strictly falling runs.
pub fn stddev_falling_slope(series: &FrameSeries, min_run: usize) -> f64 {
    let v = &series.values;
    let hop = series.grid.hop_seconds();
    let mut slopes = Vec::new();
    let mut start = 0;
    for t in 1..=v.len() {
        if t < v.len() && v[t] < v[t - 1] {
            continue;
        }
        if t - start >= min_run.max(2) {
            let x: Vec<f64> = (start..t).map(|i| i as f64 * hop).collect();
            if let Some(s) = ols_slope(&x, &v[start..t]) {
                slopes.push(s);
            }
        }
        start = t;
    }
    if slopes.is_empty() {
        0.0
    } else {
        pop_std(&slopes)
    }
}

pub fn functionals(llds: &GenericLlds, params: &VoiceParams) -> Result<GenericFeatureVector, VoiceError> {
    let voiced = |t: usize| llds.voiced[t];
    let unvoiced = |t: usize| !llds.voiced[t];

    let slope_v = select(&llds.slope, voiced);
    let mfcc3_v = select(&llds.mfcc3, voiced);
    let mfcc4_v = select(&llds.mfcc4, voiced);
    let f2 = select(&llds.f2, |_| true);
    let f3 = select(&llds.f3, |_| true);

    let mut missing = Vec::new();
    if slope_v.is_empty() {
        missing.extend(["slopeV0_500_stddevNorm", "slopeV0_500_amean"]);
    }
    if f2.is_empty() {
        missing.push("F2_amean");
    }
    if f3.is_empty() {
        missing.extend(["F3_amean", "F3_stddevNorm"]);
    }
    if mfcc3_v.is_empty() {
        missing.extend(["mfcc3V_amean", "mfcc3V_stddevNorm", "mfcc4V_stddevNorm"]);
    }
    if !missing.is_empty() {
        return Err(VoiceError::NoVoicedFrames { features: missing });
    }

    // an all-voiced recording has no unvoiced frames to average
    let slope_uv = select(&llds.slope, unvoiced);
    let values = [
        mean(&slope_uv),
        stddev_norm(&slope_v),
        mean(&slope_v),
        mean(&f2),
        mean(&f3),
        stddev_norm(&f3),
        mean(&select(&llds.mfcc3, |_| true)),
        mean(&mfcc3_v),
        stddev_norm(&mfcc3_v),
        stddev_falling_slope(&llds.loudness, params.falling_run_frames),
        stddev_norm(&select(&llds.mfcc2, |_| true)),
        stddev_norm(&mfcc4_v),
    ];
    Ok(GenericFeatureVector { values })
}

pub fn compute_generic_features(
    concat: &AudioClip,
    analysis: &AnalysisParams,
    params: &VoiceParams,
) -> Result<GenericFeatureVector, VoiceError> {
    functionals(&compute_llds(concat, analysis, params)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{FrameGrid, FrameParams};
    use crate::segmenter::Interval;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn tone(freq: f64, samples: usize, amp: f64) -> Vec<f64> {
        (0..samples)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / 16000.0).sin())
            .collect()
    }

    fn seg(intervals: &[(f64, f64)]) -> CrySegmentation {
        CrySegmentation::from_expirations(intervals.iter().map(|&(a, b)| Interval::new(a, b)).collect())
    }

    /// Harmonic source through fixed all-pole resonators, with a little noise.
    fn vowel(seconds: f64, f0: f64, poles: &[(f64, f64)], seed: u64) -> AudioClip {
        let rate = 16000.0;
        let n = (seconds * rate) as usize;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                let pulse = (1..=30)
                    .filter(|k| *k as f64 * f0 < 7800.0)
                    .map(|k| (2.0 * PI * k as f64 * f0 * t).sin())
                    .sum::<f64>();
                pulse + noise.sample(&mut rng)
            })
            .collect();
        for &(freq, bw) in poles {
            let radius = (-PI * bw / rate).exp();
            let theta = 2.0 * PI * freq / rate;
            let (c1, c2) = (2.0 * radius * theta.cos(), -radius * radius);
            let (mut y1, mut y2) = (0.0, 0.0);
            for s in x.iter_mut() {
                let y = *s + c1 * y1 + c2 * y2;
                y2 = y1;
                y1 = y;
                *s = y;
            }
        }
        let peak = x.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        AudioClip::new(x.iter().map(|s| 0.7 * s / peak).collect(), 16000).unwrap()
    }

    #[test]
    fn concatenation_lengths_and_order() {
        let clip = AudioClip::new(tone(500.0, 32000, 0.3), 16000).unwrap();
        let two = concat_expirations(&clip, &seg(&[(0.1, 0.6), (1.0, 1.5)])).unwrap();
        assert_eq!(two.len(), 16000);
        let whole = concat_expirations(&clip, &seg(&[(0.0, 2.0)])).unwrap();
        assert_eq!(whole.samples(), clip.samples());
        assert!(matches!(
            concat_expirations(&clip, &CrySegmentation::default()),
            Err(VoiceError::EmptySegmentation)
        ));
    }

    #[test]
    fn concatenated_second_part_keeps_its_tone() {
        let mut x = tone(500.0, 8000, 0.3);
        x.extend(tone(2000.0, 8000, 0.3));
        let clip = AudioClip::new(x, 16000).unwrap();
        let out = concat_expirations(&clip, &seg(&[(0.0, 0.2), (0.8, 1.0)])).unwrap();
        assert_eq!(out.len(), 6400);
        let tail = AudioClip::new(out.slice(3200, 6400).to_vec(), 16000).unwrap();
        let spec = stft(&tail, &FrameParams::default()).unwrap();
        let row = spec.power().row(5).to_vec();
        let argmax = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert_eq!(argmax, 64);
    }

    #[test]
    fn vowel_formants_are_recovered() {
        let clip = vowel(1.5, 300.0, &[(700.0, 80.0), (2200.0, 100.0), (3500.0, 120.0)], 1);
        let v = compute_generic_features(&clip, &AnalysisParams::default(), &VoiceParams::default())
            .unwrap();
        let f2 = v.get("F2_amean").unwrap();
        let f3 = v.get("F3_amean").unwrap();
        assert!((f2 - 2200.0).abs() < 150.0, "F2 {f2}");
        assert!((f3 - 3500.0).abs() < 200.0, "F3 {f3}");
        assert!(v.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn scaling_leaves_spectral_shape_features_unchanged() {
        let clip = vowel(1.0, 420.0, &[(900.0, 90.0), (2500.0, 100.0), (4000.0, 120.0)], 2);
        let loud = clip.scaled(1.0 / 0.7 * 0.45);
        let quiet = loud.scaled(0.5);
        let a = compute_llds(&quiet, &AnalysisParams::default(), &VoiceParams::default()).unwrap();
        let b = compute_llds(&loud, &AnalysisParams::default(), &VoiceParams::default()).unwrap();
        let fa = functionals(&a, &VoiceParams::default()).unwrap();
        let fb = functionals(&b, &VoiceParams::default()).unwrap();
        for name in ["slopeUV0_500_amean", "slopeV0_500_stddevNorm", "slopeV0_500_amean", "F2_amean", "F3_amean", "F3_stddevNorm"] {
            let (x, y) = (fa.get(name).unwrap(), fb.get(name).unwrap());
            assert!((x - y).abs() <= 1e-6 * x.abs().max(y.abs()), "{name}: {x} vs {y}");
        }
        assert_ne!(a.loudness.values, b.loudness.values);
    }

    #[test]
    fn permuting_identical_units_changes_nothing() {
        let mut x = vec![0.0; 4000];
        let burst: Vec<f64> = tone(450.0, 8000, 0.3)
            .iter()
            .zip(tone(900.0, 8000, 0.15))
            .zip(tone(1350.0, 8000, 0.1))
            .map(|((a, b), c)| a + b + c)
            .collect();
        for _ in 0..3 {
            x.extend_from_slice(&burst);
            x.extend(std::iter::repeat(0.0).take(4000));
        }
        let clip = AudioClip::new(x, 16000).unwrap();
        let spans = [(0.25, 0.75), (1.0, 1.5), (1.75, 2.25)];
        let forward = concat_expirations(&clip, &seg(&spans)).unwrap();
        let mut reversed_spans = spans;
        reversed_spans.reverse();
        // permutation is applied to the concatenation order
        let reversed: Vec<f64> = reversed_spans
            .iter()
            .flat_map(|&(a, b)| concat_expirations(&clip, &seg(&[(a, b)])).unwrap().into_samples())
            .collect();
        let reversed = AudioClip::new(reversed, 16000).unwrap();
        let p = (AnalysisParams::default(), VoiceParams::default());
        assert_eq!(
            compute_generic_features(&forward, &p.0, &p.1).unwrap(),
            compute_generic_features(&reversed, &p.0, &p.1).unwrap()
        );
    }

    #[test]
    fn all_frame_mean_is_voicing_weighted_combination() {
        let mut x = tone(480.0, 8000, 0.4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let d = Normal::new(0.0, 0.1).unwrap();
        x.extend((0..8000).map(|_| d.sample(&mut rng)));
        let clip = AudioClip::from_clamped(x, 16000).unwrap();
        let llds = compute_llds(&clip, &AnalysisParams::default(), &VoiceParams::default()).unwrap();
        let n = llds.voiced.len() as f64;
        let nv = llds.voiced.iter().filter(|&&v| v).count() as f64;
        assert!(nv > 0.0 && nv < n);
        for series in [&llds.mfcc2, &llds.mfcc3, &llds.mfcc4] {
            let all = mean(&series.values);
            let v = mean(&select(series, |t| llds.voiced[t]));
            let uv = mean(&select(series, |t| !llds.voiced[t]));
            assert!((all - (nv / n * v + (n - nv) / n * uv)).abs() < 1e-9);
        }
    }

    #[test]
    fn falling_slope_rules() {
        let grid = FrameGrid::new(&FrameParams::default(), 16000, 400 + 160 * 99).unwrap();
        let flat = FrameSeries::new("loudness", vec![2.0; 100], grid);
        assert_eq!(stddev_falling_slope(&flat, 3), 0.0);
        // two falling runs with slopes -10/s and -40/s
        let mut v = vec![5.0; 100];
        for i in 0..5 {
            v[10 + i] = 5.0 - 0.1 * i as f64;
            v[50 + i] = 5.0 - 0.4 * i as f64;
        }
        let s = FrameSeries::new("loudness", v, grid);
        assert!((stddev_falling_slope(&s, 3) - 15.0).abs() < 1e-9);
    }

    #[test]
    fn stddev_norm_guard() {
        assert!((stddev_norm(&[-1.0, 1.0]) - 1e8).abs() < 1e-3);
        assert!((stddev_norm(&[2.0, 4.0]) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unvoiced_input_names_the_features() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let d = Normal::new(0.0, 0.1).unwrap();
        let clip = AudioClip::from_clamped((0..16000).map(|_| d.sample(&mut rng)).collect(), 16000).unwrap();
        let analysis = AnalysisParams {
            pitch: crate::dsp::PitchParams {
                voicing_threshold: 1.1,
                ..Default::default()
            },
            ..Default::default()
        };
        match compute_generic_features(&clip, &analysis, &VoiceParams::default()) {
            Err(VoiceError::NoVoicedFrames { features }) => {
                assert!(features.contains(&"F2_amean") && features.contains(&"mfcc4V_stddevNorm"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_short_is_rejected() {
        let clip = AudioClip::new(tone(450.0, 7000, 0.3), 16000).unwrap();
        assert!(matches!(
            compute_generic_features(&clip, &AnalysisParams::default(), &VoiceParams::default()),
            Err(VoiceError::TooShort { .. })
        ));
    }
}
