//! Recording-level analysis: one clip in, one fixed-size feature row out.

use serde::Serialize;
use thiserror::Error;

use crate::biomarkers::{
    aggregate_biomarkers, extract_biomarkers, BiomarkerError, CryBiomarkerVector, UnitFlags,
    BIOMARKER_FEATURE_NAMES,
};
use crate::audio_io::AudioClip;
use crate::config::PipelineConfig;
use crate::dsp::{estimate_f0, log_mel, loudness, spectral_flatness, stft, DspError, F0Contour, FrameSeries};
use crate::segmenter::{detect_cry_units, meets_curation_rule, CrySegmentation, SegmentError};
use crate::synthcry::GroundTruth;
use crate::voicefeat::{
    compute_generic_features, concat_expirations, GenericFeatureVector, VoiceError, GENERIC_FEATURE_NAMES,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Biomarker(#[from] BiomarkerError),
    #[error(transparent)]
    Voice(#[from] VoiceError),
}

/// The 26 cry-specific columns followed by the 12 generic ones.
pub fn feature_names() -> Vec<String> {
    BIOMARKER_FEATURE_NAMES
        .iter()
        .chain(GENERIC_FEATURE_NAMES.iter())
        .map(|s| s.to_string())
        .collect()
}

pub fn short_cry_reason(min_cry_seconds: f64) -> String {
    format!("below {min_cry_seconds}s cry")
}

/// Frame-level front end and segmentation of one clip.
#[derive(Debug, Clone)]
pub struct Segmented {
    pub f0: F0Contour,
    pub loudness: FrameSeries,
    pub flatness: FrameSeries,
    pub segmentation: CrySegmentation,
}

pub fn segment_clip(clip: &AudioClip, config: &PipelineConfig) -> Result<Segmented, PipelineError> {
    let f0 = estimate_f0(clip, &config.frames, &config.pitch)?;
    let spec = stft(clip, &config.frames)?;
    let loud = loudness(&log_mel(&spec, &config.mel)?);
    let flatness = spectral_flatness(&spec);
    let segmentation = detect_cry_units(clip, &f0, &loud, &config.segmenter)?;
    Ok(Segmented {
        f0,
        loudness: loud,
        flatness,
        segmentation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordingFeatures {
    pub segmentation: CrySegmentation,
    pub flags: Vec<UnitFlags>,
    pub biomarkers: CryBiomarkerVector,
    pub generic: GenericFeatureVector,
}

impl RecordingFeatures {
    /// Values in `feature_names()` order.
    pub fn row(&self) -> Vec<f64> {
        self.biomarkers
            .values()
            .iter()
            .chain(self.generic.values().iter())
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Features(Box<RecordingFeatures>),
    /// Failed the minimum-cry rule.
    Skipped { reason: String, total_cry_seconds: f64 },
}

pub fn analyze_clip(clip: &AudioClip, config: &PipelineConfig) -> Result<Outcome, PipelineError> {
    let s = segment_clip(clip, config)?;
    if !meets_curation_rule(&s.segmentation, config.curation.min_cry_seconds) {
        return Ok(Outcome::Skipped {
            reason: short_cry_reason(config.curation.min_cry_seconds),
            total_cry_seconds: s.segmentation.total_cry_seconds,
        });
    }
    let (flags, biomarkers) = extract_biomarkers(&s.segmentation, &s.f0, &s.flatness, &config.biomarkers)?;
    let concat = concat_expirations(clip, &s.segmentation)?;
    let generic = compute_generic_features(&concat, &config.analysis(), &config.voice)?;
    Ok(Outcome::Features(Box::new(RecordingFeatures {
        segmentation: s.segmentation,
        flags,
        biomarkers,
        generic,
    })))
}

/// Aggregation with the detectors replaced by the planted events.
pub fn planted_biomarkers(truth: &GroundTruth) -> Result<CryBiomarkerVector, PipelineError> {
    Ok(aggregate_biomarkers(&truth.segmentation, &truth.planted_flags())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthcry::{generate_spec, synth_cry, CorpusProfile};

    #[test]
    fn names_are_unique_and_complete() {
        let names = feature_names();
        assert_eq!(names.len(), 38);
        let unique: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(unique.len(), 38);
    }

    #[test]
    fn synthetic_recording_yields_a_full_row() {
        let spec = generate_spec(&CorpusProfile::separated().negative, 3, false);
        let (clip, truth) = synth_cry(&spec).unwrap();
        let config = PipelineConfig::default();
        let Outcome::Features(f) = analyze_clip(&clip, &config).unwrap() else {
            panic!("recording should pass curation");
        };
        assert_eq!(f.row().len(), 38);
        assert!(f.row().iter().all(|v| v.is_finite()));
        assert_eq!(f.segmentation.num_units(), truth.units.len());
        assert_eq!(planted_biomarkers(&truth).unwrap(), truth.expected);
    }

    #[test]
    fn short_recording_is_skipped() {
        let spec = generate_spec(&CorpusProfile::separated().negative, 3, true);
        let (clip, _) = synth_cry(&spec).unwrap();
        match analyze_clip(&clip, &PipelineConfig::default()).unwrap() {
            Outcome::Skipped { reason, total_cry_seconds } => {
                assert_eq!(reason, "below 3s cry");
                assert!(total_cry_seconds < 3.0);
            }
            Outcome::Features(_) => panic!("short recording passed curation"),
        }
    }
}
