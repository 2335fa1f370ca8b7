use std::f64::consts::PI;

use cry_core::audio_io::AudioClip;
use cry_core::dsp::{estimate_f0, FrameParams, PitchParams};

fn harmonic(f0: f64, seconds: f64) -> AudioClip {
    let sr = 16000.0;
    let n = (seconds * sr) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            (1..=5)
                .filter(|&k| k as f64 * f0 < 0.45 * sr)
                .map(|k| (2.0 * PI * k as f64 * f0 * t).sin() / k as f64)
                .sum::<f64>()
                * 0.3
        })
        .collect();
    AudioClip::new(samples, 16000).unwrap()
}

#[test]
fn harmonic_stacks_have_no_octave_errors() {
    let mut errors = Vec::new();
    for f0 in [250.0, 400.0, 600.0, 1000.0, 1500.0] {
        let track = estimate_f0(&harmonic(f0, 0.5), &FrameParams::default(), &PitchParams::default()).unwrap();
        for (&est, &v) in track.f0_hz.iter().zip(&track.voiced) {
            assert!(v, "{f0} Hz frame unvoiced");
            let ratio = est / f0;
            assert!((0.75..1.33).contains(&ratio), "octave error at {f0}: {est}");
            errors.push((est - f0).abs() / f0);
        }
    }
    errors.sort_by(f64::total_cmp);
    assert!(errors[errors.len() / 2] < 0.01);
}
