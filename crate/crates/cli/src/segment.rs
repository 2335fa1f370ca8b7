use std::path::Path;

use serde::Serialize;

use cry_core::audio_io::load_canonical;
use cry_core::config::PipelineConfig;
use cry_core::pipeline::segment_clip;
use cry_core::segmenter::meets_curation_rule;

use crate::CliError;

fn ms(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Span {
    pub onset: f64,
    pub offset: f64,
}

/// Segmentation rounded to the millisecond.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub duration_seconds: f64,
    pub num_units: usize,
    pub total_cry_seconds: f64,
    pub meets_min_cry: bool,
    pub expirations: Vec<Span>,
    pub pauses: Vec<Span>,
}

pub fn cmd_segment(wav: &Path, config: &PipelineConfig) -> Result<SegmentReport, CliError> {
    let clip = load_canonical(wav)?;
    let seg = segment_clip(&clip, config)?.segmentation;
    let spans = |v: &[cry_core::segmenter::Interval]| {
        v.iter()
            .map(|iv| Span {
                onset: ms(iv.onset),
                offset: ms(iv.offset),
            })
            .collect()
    };
    Ok(SegmentReport {
        duration_seconds: ms(clip.duration_seconds()),
        num_units: seg.num_units(),
        total_cry_seconds: ms(seg.total_cry_seconds),
        meets_min_cry: meets_curation_rule(&seg, config.curation.min_cry_seconds),
        expirations: spans(&seg.expirations),
        pauses: spans(&seg.pauses),
    })
}
