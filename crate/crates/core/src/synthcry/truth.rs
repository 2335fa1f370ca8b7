use serde::{Deserialize, Serialize};

use crate::biomarkers::{CryBiomarkerVector, Melody, UnitFlags};
use crate::dsp::FrameGrid;
use crate::segmenter::{CrySegmentation, Interval};

/// Half-open sample range `[start, end)` on the recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpan {
    pub start: usize,
    pub end: usize,
}

impl SampleSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, sample: usize) -> bool {
        sample >= self.start && sample < self.end
    }

    pub fn start_seconds(&self, sample_rate: u32) -> f64 {
        self.start as f64 / sample_rate as f64
    }

    pub fn end_seconds(&self, sample_rate: u32) -> f64 {
        self.end as f64 / sample_rate as f64
    }

    pub fn to_interval(&self, sample_rate: u32) -> Interval {
        Interval::new(self.start_seconds(sample_rate), self.end_seconds(sample_rate))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTruth {
    pub span: SampleSpan,
    pub melody: Melody,
    pub hyperphonation: Option<SampleSpan>,
    pub dysphonation: Option<SampleSpan>,
    pub glide: Option<SampleSpan>,
    pub vibrato: bool,
}

impl UnitTruth {
    /// Whether the unit carries the named frame biomarker.
    pub fn has(&self, biomarker: &str) -> bool {
        match biomarker {
            "hyperphonation" => self.hyperphonation.is_some(),
            "dysphonation" => self.dysphonation.is_some(),
            "glide" => self.glide.is_some(),
            "vibrato" => self.vibrato,
            _ => false,
        }
    }

    /// Flagged sample range of the named biomarker; vibrato covers the unit.
    pub fn flagged(&self, biomarker: &str) -> Option<SampleSpan> {
        match biomarker {
            "hyperphonation" => self.hyperphonation,
            "dysphonation" => self.dysphonation,
            "glide" => self.glide,
            "vibrato" => self.vibrato.then_some(self.span),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub sample_rate: u32,
    pub num_samples: usize,
    pub hop_samples: usize,
    pub window_samples: usize,
    pub segmentation: CrySegmentation,
    pub units: Vec<UnitTruth>,
    pub expected: CryBiomarkerVector,
}

impl GroundTruth {
    pub fn new(
        sample_rate: u32,
        num_samples: usize,
        hop_samples: usize,
        window_samples: usize,
        units: Vec<UnitTruth>,
    ) -> Self {
        let segmentation = CrySegmentation::from_expirations(
            units.iter().map(|u| u.span.to_interval(sample_rate)).collect(),
        );
        let expected = expected_vector(sample_rate, num_samples, hop_samples, window_samples, &units);
        Self {
            sample_rate,
            num_samples,
            hop_samples,
            window_samples,
            segmentation,
            units,
            expected,
        }
    }

    /// Planted events of every unit as seconds intervals.
    pub fn flagged_intervals(&self, biomarker: &str) -> Vec<Interval> {
        self.units
            .iter()
            .filter_map(|u| u.flagged(biomarker))
            .map(|s| s.to_interval(self.sample_rate))
            .collect()
    }

    pub fn grid(&self) -> FrameGrid {
        FrameGrid::from_samples(self.sample_rate, self.hop_samples, self.window_samples, self.num_samples)
            .expect("ground truth always describes a framed recording")
    }

    /// Detector output as it would look if every detector were exact: frames
    /// whose centre falls in a planted interval are flagged.
    pub fn planted_flags(&self) -> Vec<UnitFlags> {
        let grid = self.grid();
        let sr = self.sample_rate;
        self.units
            .iter()
            .map(|u| {
                let frames = grid.frames_in(u.span.start_seconds(sr), u.span.end_seconds(sr));
                let mark = |span: Option<SampleSpan>| -> Vec<bool> {
                    let inside = span.map(|s| grid.frames_in(s.start_seconds(sr), s.end_seconds(sr)));
                    frames
                        .clone()
                        .map(|t| inside.as_ref().is_some_and(|r| r.contains(&t)))
                        .collect()
                };
                UnitFlags {
                    hyperphonation: mark(u.hyperphonation),
                    dysphonation: mark(u.dysphonation),
                    glide: mark(u.glide),
                    vibrato: u.vibrato,
                    melody: u.melody,
                    frames,
                }
            })
            .collect()
    }
}

/// The aggregate vector recomputed from the planted events, counting frames
/// in integer half-samples: frame `t` has centre `2 t hop + window` and lies
/// in `[a, b)` samples when `2a <= centre < 2b`.
fn expected_vector(
    sample_rate: u32,
    num_samples: usize,
    hop: usize,
    window: usize,
    units: &[UnitTruth],
) -> CryBiomarkerVector {
    let num_frames = if num_samples >= window { (num_samples - window) / hop + 1 } else { 0 };
    let count_in = |span: &SampleSpan, within: &SampleSpan| -> usize {
        (0..num_frames)
            .filter(|&t| {
                let c = 2 * t * hop + window;
                c >= 2 * span.start && c < 2 * span.end && c >= 2 * within.start && c < 2 * within.end
            })
            .count()
    };
    let sr = sample_rate as f64;
    let seconds = |s: usize| s as f64 / sr;
    let unit_durations: Vec<f64> = units.iter().map(|u| seconds(u.span.end) - seconds(u.span.start)).collect();
    let pause_durations: Vec<f64> = units
        .windows(2)
        .map(|w| seconds(w[1].span.start) - seconds(w[0].span.end))
        .collect();
    let summary = |d: &[f64]| -> [f64; 4] {
        if d.is_empty() {
            return [0.0; 4];
        }
        let mut total = 0.0;
        for x in d {
            total += x;
        }
        let m = total / d.len() as f64;
        let mut sq = 0.0;
        for x in d {
            sq += (x - m) * (x - m);
        }
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        [m.clamp(lo, hi), (sq / d.len() as f64).sqrt(), hi, lo]
    };

    let mut out = [0.0; 26];
    out[..4].copy_from_slice(&summary(&unit_durations));
    out[4..8].copy_from_slice(&summary(&pause_durations));

    let n_units = units.len() as f64;
    let unit_frames: Vec<usize> = units.iter().map(|u| count_in(&u.span, &u.span)).collect();
    let all_frames: usize = unit_frames.iter().sum();
    let share = |k: usize| if all_frames == 0 { 0.0 } else { k as f64 / all_frames as f64 };

    for (slot, name) in ["hyperphonation", "dysphonation", "glide", "vibrato"].iter().enumerate() {
        let mut with = 0;
        let mut frames = 0;
        for u in units {
            let k = u.flagged(name).map_or(0, |s| count_in(&s, &u.span));
            if k > 0 || (*name == "vibrato" && u.vibrato) {
                with += 1;
            }
            frames += k;
        }
        out[8 + 2 * slot] = with as f64 / n_units;
        out[9 + 2 * slot] = share(frames);
    }
    for (slot, melody) in Melody::ALL.iter().enumerate() {
        let mut with = 0;
        let mut frames = 0;
        for (u, k) in units.iter().zip(&unit_frames) {
            if u.melody == *melody {
                with += 1;
                frames += k;
            }
        }
        out[16 + 2 * slot] = with as f64 / n_units;
        out[17 + 2 * slot] = share(frames);
    }
    CryBiomarkerVector::from_values(out)
}
