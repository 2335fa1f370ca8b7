use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::truth::{GroundTruth, SampleSpan, UnitTruth};
use super::{SynthError, SynthSpec};
use crate::audio_io::AudioClip;
use crate::dsp::FrameGrid;

/// Harmonics per voiced sample, with amplitude `1/k`.
pub const HARMONICS: usize = 5;
/// Harmonics at or above this fraction of the sample rate are left out.
const MAX_HARMONIC_FRACTION: f64 = 0.45;
const FADE_S: f64 = 0.01;

fn to_samples(seconds: f64, sample_rate: u32) -> usize {
    (seconds * sample_rate as f64).round() as usize
}

/// Renders `spec` and returns the audio with its ground truth.
///
/// Every unit is a harmonic stack following its planned F0 trajectory;
/// dysphonation spans swap the stack for white noise at the same RMS. A
/// Gaussian noise floor covers the whole recording, pauses included.
pub fn synth_cry(spec: &SynthSpec) -> Result<(AudioClip, GroundTruth), SynthError> {
    spec.validate()?;
    let sr = spec.sample_rate;
    let sr_f = sr as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut cursor = to_samples(spec.lead_silence_s, sr);
    let mut layout = Vec::with_capacity(spec.units.len());
    for u in &spec.units {
        let len = to_samples(u.duration_s, sr).max(1);
        layout.push(SampleSpan::new(cursor, cursor + len));
        cursor += len + to_samples(u.pause_after_s, sr);
    }
    let total = cursor;
    let mut samples = vec![0.0; total];

    let norm: f64 = (1..=HARMONICS).map(|k| 1.0 / k as f64).sum();
    let stack_rms = ((1..=HARMONICS).map(|k| 1.0 / (k * k) as f64).sum::<f64>() / 2.0).sqrt() / norm;
    let fade = to_samples(FADE_S, sr).max(1);

    let mut truths = Vec::with_capacity(spec.units.len());
    for (u, &span) in spec.units.iter().zip(&layout) {
        let relative = |s: &super::Span| {
            SampleSpan::new(
                span.start + to_samples(s.start_s, sr),
                (span.start + to_samples(s.end_s, sr)).min(span.end),
            )
        };
        let dysphonation = u.dysphonation.as_ref().map(relative);
        let noise = Normal::new(0.0, u.amplitude * stack_rms).expect("positive deviation");
        let len = span.len();
        let mut phase = 0.0f64;
        for n in 0..len {
            let t = n as f64 / sr_f;
            let f0 = u.f0_at(t);
            let absolute = span.start + n;
            let voiced_value = if dysphonation.is_some_and(|d| d.contains(absolute)) {
                noise.sample(&mut rng)
            } else {
                let mut v = 0.0;
                for k in 1..=HARMONICS {
                    if k as f64 * f0 >= MAX_HARMONIC_FRACTION * sr_f {
                        break;
                    }
                    v += (k as f64 * phase).sin() / k as f64;
                }
                u.amplitude * v / norm
            };
            let edge = n.min(len - 1 - n);
            let gain = if edge < fade {
                0.5 - 0.5 * (PI * edge as f64 / fade as f64).cos()
            } else {
                1.0
            };
            samples[absolute] = gain * voiced_value;
            phase += 2.0 * PI * f0 / sr_f;
            if phase > 2.0 * PI {
                phase -= 2.0 * PI;
            }
        }
        truths.push(UnitTruth {
            span,
            melody: u.melody,
            hyperphonation: u.hyperphonation.as_ref().map(|h| relative(&h.span)),
            dysphonation,
            glide: u.glide.as_ref().map(|g| relative(&g.span)),
            vibrato: u.vibrato.is_some(),
        });
    }

    let floor = Normal::new(0.0, 10f64.powf(spec.noise_floor_db / 20.0)).expect("finite noise floor");
    for s in samples.iter_mut() {
        *s += floor.sample(&mut rng);
    }
    let clip = AudioClip::from_clamped(samples, sr)?;
    let grid = FrameGrid::new(&spec.frames, sr, total)?;
    let truth = GroundTruth::new(sr, total, grid.hop_samples(), grid.window_samples(), truths);
    Ok((clip, truth))
}
