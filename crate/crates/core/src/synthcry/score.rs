//! Unit-level agreement between detector output and planted ground truth.

use serde::Serialize;

use super::GroundTruth;
use crate::biomarkers::{UnitFlags, FRAME_BIOMARKERS};
use crate::segmenter::CrySegmentation;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Counts {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        let called = self.true_positive + self.false_positive;
        if called == 0 {
            1.0
        } else {
            self.true_positive as f64 / called as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let actual = self.true_positive + self.false_negative;
        if actual == 0 {
            1.0
        } else {
            self.true_positive as f64 / actual as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UnitScore {
    /// Per biomarker, in `FRAME_BIOMARKERS` order.
    pub biomarkers: [Counts; 4],
    pub melody_correct: usize,
    pub melody_total: usize,
    pub matched_units: usize,
    pub planted_units: usize,
    pub detected_units: usize,
}

impl UnitScore {
    pub fn melody_accuracy(&self) -> f64 {
        if self.melody_total == 0 {
            1.0
        } else {
            self.melody_correct as f64 / self.melody_total as f64
        }
    }

    pub fn counts(&self, biomarker: &str) -> Option<Counts> {
        FRAME_BIOMARKERS.iter().position(|b| *b == biomarker).map(|i| self.biomarkers[i])
    }

    pub fn merge(&mut self, other: &UnitScore) {
        for (a, b) in self.biomarkers.iter_mut().zip(&other.biomarkers) {
            a.true_positive += b.true_positive;
            a.false_positive += b.false_positive;
            a.false_negative += b.false_negative;
        }
        self.melody_correct += other.melody_correct;
        self.melody_total += other.melody_total;
        self.matched_units += other.matched_units;
        self.planted_units += other.planted_units;
        self.detected_units += other.detected_units;
    }
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

fn detected(flags: &UnitFlags, biomarker: usize) -> bool {
    match biomarker {
        0 => flags.hyperphonation.iter().any(|&f| f),
        1 => flags.dysphonation.iter().any(|&f| f),
        2 => flags.glide.iter().any(|&f| f),
        _ => flags.vibrato,
    }
}

/// Pairs each planted unit with the detected unit it overlaps most (each
/// detected unit used once) and scores the flags unit by unit. Unmatched
/// planted units count as misses, unmatched detected units as false alarms.
pub fn score_units(truth: &GroundTruth, seg: &CrySegmentation, flags: &[UnitFlags]) -> UnitScore {
    let sr = truth.sample_rate;
    let mut used = vec![false; seg.num_units()];
    let mut score = UnitScore {
        planted_units: truth.units.len(),
        detected_units: seg.num_units(),
        ..UnitScore::default()
    };
    for unit in &truth.units {
        let planted = (unit.span.start_seconds(sr), unit.span.end_seconds(sr));
        let best = seg
            .expirations
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, iv)| (j, overlap(planted, (iv.onset, iv.offset))))
            .filter(|(_, o)| *o > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        score.melody_total += 1;
        match best {
            Some((j, _)) => {
                used[j] = true;
                score.matched_units += 1;
                if flags[j].melody == unit.melody {
                    score.melody_correct += 1;
                }
                for (b, name) in FRAME_BIOMARKERS.iter().enumerate() {
                    let c = &mut score.biomarkers[b];
                    match (unit.has(name), detected(&flags[j], b)) {
                        (true, true) => c.true_positive += 1,
                        (true, false) => c.false_negative += 1,
                        (false, true) => c.false_positive += 1,
                        (false, false) => {}
                    }
                }
            }
            None => {
                for (b, name) in FRAME_BIOMARKERS.iter().enumerate() {
                    if unit.has(name) {
                        score.biomarkers[b].false_negative += 1;
                    }
                }
            }
        }
    }
    for (j, f) in flags.iter().enumerate() {
        if !used[j] {
            for b in 0..4 {
                if detected(f, b) {
                    score.biomarkers[b].false_positive += 1;
                }
            }
        }
    }
    score
}
