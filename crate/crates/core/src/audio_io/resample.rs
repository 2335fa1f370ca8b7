use std::f64::consts::PI;

use super::{AudioClip, AudioError};

/// Zero crossings of the interpolation kernel on each side of its centre.
const ZERO_CROSSINGS: f64 = 16.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const ROLLOFF: f64 = 0.95;

/// Band-limited sample-rate conversion with a Blackman-windowed sinc kernel.
///
/// The output holds `round(len * target / source)` samples, so its duration
/// matches the input within half an output sample period.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, AudioError> {
    if target_rate == 0 {
        return Err(AudioError::InvalidSampleRate(target_rate));
    }
    let source_rate = clip.sample_rate();
    if source_rate == target_rate {
        return Ok(clip.clone());
    }
    let input = clip.samples();
    let out_len = ((input.len() as u64 * target_rate as u64 + source_rate as u64 / 2)
        / source_rate as u64) as usize;

    let step = source_rate as f64 / target_rate as f64;
    // cutoff in cycles per input sample
    let cutoff = 0.5 * ROLLOFF * (target_rate as f64 / source_rate as f64).min(1.0);
    let half_width = ZERO_CROSSINGS / (2.0 * cutoff);

    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let centre = i as f64 * step;
        let lo = (centre - half_width).ceil().max(0.0) as usize;
        let hi = ((centre + half_width).floor() as usize).min(input.len().saturating_sub(1));
        let mut acc = 0.0;
        for (k, &x) in input.iter().enumerate().take(hi + 1).skip(lo) {
            acc += x * kernel(k as f64 - centre, cutoff, half_width);
        }
        out.push(acc);
    }
    AudioClip::from_clamped(out, target_rate)
}

fn kernel(offset: f64, cutoff: f64, half_width: f64) -> f64 {
    let u = offset / half_width;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    // Blackman window over [-1, 1]
    let w = 0.42 + 0.5 * (PI * u).cos() + 0.08 * (2.0 * PI * u).cos();
    2.0 * cutoff * sinc(2.0 * cutoff * offset) * w
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}
