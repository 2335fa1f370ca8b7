//! Cry-specific biomarkers and their per-recording aggregation.

mod detectors;
mod melody;

use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use detectors::{
    detect_dysphonation, detect_glide, detect_hyperphonation, detect_vibrato, keep_long_runs,
    smoothed_unit_contour, turning_points,
};
pub use melody::{classify_melody, classify_values, Melody};

use crate::dsp::{F0Contour, FrameGrid, FrameSeries};
use crate::segmenter::CrySegmentation;
use crate::stats::{mean, pop_std};

#[derive(Debug, Error, PartialEq)]
pub enum BiomarkerError {
    #[error("segmentation has no cry units")]
    EmptySegmentation,
    #[error("got flags for {flags} units but the segmentation has {units}")]
    UnitCountMismatch { flags: usize, units: usize },
    #[error("F0 contour and flatness series are on different frame grids")]
    GridMismatch,
    #[error("unknown biomarker feature `{0}`")]
    UnknownFeature(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiomarkerParams {
    pub hyperphonation_f0_hz: f64,
    pub hyperphonation_min_s: f64,
    pub dysphonation_flatness: f64,
    pub dysphonation_min_s: f64,
    pub glide_delta_hz: f64,
    pub glide_max_s: f64,
    pub vibrato_prominence_hz: f64,
    pub vibrato_max_spacing_s: f64,
    pub vibrato_min_extrema: usize,
    /// Relative F0 range below which a unit's melody is flat.
    pub melody_flatness: f64,
    /// Size of the head and tail zones as a fraction of the voiced contour.
    pub melody_edge_fraction: f64,
    /// An interior extremum must clear both ends by this fraction of the range.
    pub melody_turn_fraction: f64,
    pub melody_min_voiced: usize,
}

impl Default for BiomarkerParams {
    fn default() -> Self {
        Self {
            hyperphonation_f0_hz: 1000.0,
            hyperphonation_min_s: 0.1,
            dysphonation_flatness: 0.30,
            dysphonation_min_s: 0.1,
            glide_delta_hz: 600.0,
            glide_max_s: 0.1,
            vibrato_prominence_hz: 40.0,
            vibrato_max_spacing_s: 0.1,
            vibrato_min_extrema: 4,
            melody_flatness: 0.15,
            melody_edge_fraction: 0.2,
            melody_turn_fraction: 0.25,
            melody_min_voiced: 5,
        }
    }
}

/// Detector output for one cry unit. Frame flags are indexed from the start
/// of `frames`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitFlags {
    pub frames: Range<usize>,
    pub hyperphonation: Vec<bool>,
    pub dysphonation: Vec<bool>,
    pub glide: Vec<bool>,
    pub vibrato: bool,
    pub melody: Melody,
}

impl UnitFlags {
    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    fn count(flags: &[bool]) -> usize {
        flags.iter().filter(|&&f| f).count()
    }
}

/// The four frame-level biomarkers, in column order.
pub const FRAME_BIOMARKERS: [&str; 4] = ["hyperphonation", "dysphonation", "glide", "vibrato"];

/// Column names of the cry-specific block.
pub const BIOMARKER_FEATURE_NAMES: [&str; 26] = [
    "cry_unit_dur_mean",
    "cry_unit_dur_std",
    "cry_unit_dur_max",
    "cry_unit_dur_min",
    "pause_dur_mean",
    "pause_dur_std",
    "pause_dur_max",
    "pause_dur_min",
    "hyperphonation_unit_frac",
    "hyperphonation_dur_frac",
    "dysphonation_unit_frac",
    "dysphonation_dur_frac",
    "glide_unit_frac",
    "glide_dur_frac",
    "vibrato_unit_frac",
    "vibrato_dur_frac",
    "melody_falling_unit_frac",
    "melody_falling_dur_frac",
    "melody_rising_falling_unit_frac",
    "melody_rising_falling_dur_frac",
    "melody_rising_unit_frac",
    "melody_rising_dur_frac",
    "melody_falling_rising_unit_frac",
    "melody_falling_rising_dur_frac",
    "melody_flat_unit_frac",
    "melody_flat_dur_frac",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CryBiomarkerVector {
    values: [f64; 26],
}

impl CryBiomarkerVector {
    pub fn from_values(values: [f64; 26]) -> Self {
        Self { values }
    }

    pub fn names() -> &'static [&'static str; 26] {
        &BIOMARKER_FEATURE_NAMES
    }

    pub fn values(&self) -> &[f64; 26] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        BIOMARKER_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        BIOMARKER_FEATURE_NAMES.iter().copied().zip(self.values.iter().copied())
    }
}

impl Serialize for CryBiomarkerVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(26))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, &value)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for CryBiomarkerVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = HashMap::<String, f64>::deserialize(deserializer)?;
        let mut values = [0.0; 26];
        for (slot, name) in values.iter_mut().zip(BIOMARKER_FEATURE_NAMES) {
            *slot = *map
                .get(name)
                .ok_or_else(|| serde::de::Error::custom(format!("missing feature `{name}`")))?;
        }
        if let Some(extra) = map.keys().find(|k| !BIOMARKER_FEATURE_NAMES.contains(&k.as_str())) {
            return Err(serde::de::Error::custom(format!("unknown feature `{extra}`")));
        }
        Ok(Self { values })
    }
}

/// Frame range of every expiration on `grid` (frames whose centre falls in
/// the interval).
pub fn unit_frames(seg: &CrySegmentation, grid: &FrameGrid) -> Vec<Range<usize>> {
    seg.expirations
        .iter()
        .map(|iv| grid.frames_in(iv.onset, iv.offset))
        .collect()
}

/// Runs every detector over every unit.
pub fn analyze_units(
    seg: &CrySegmentation,
    f0: &F0Contour,
    flatness: &FrameSeries,
    params: &BiomarkerParams,
) -> Result<Vec<UnitFlags>, BiomarkerError> {
    if f0.grid != flatness.grid {
        return Err(BiomarkerError::GridMismatch);
    }
    Ok(unit_frames(seg, &f0.grid)
        .into_iter()
        .map(|frames| UnitFlags {
            hyperphonation: detect_hyperphonation(f0, frames.clone(), params),
            dysphonation: detect_dysphonation(flatness, frames.clone(), params),
            glide: detect_glide(f0, frames.clone(), params),
            vibrato: detect_vibrato(f0, frames.clone(), params),
            melody: classify_melody(f0, frames.clone(), params),
            frames,
        })
        .collect())
}

/// Mean, population std, max and min of unit and pause durations.
pub fn durational_features(seg: &CrySegmentation) -> Result<[f64; 8], BiomarkerError> {
    if seg.is_empty() {
        return Err(BiomarkerError::EmptySegmentation);
    }
    let stats = |d: &[f64]| -> [f64; 4] {
        if d.is_empty() {
            return [0.0; 4];
        }
        let max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = d.iter().copied().fold(f64::INFINITY, f64::min);
        [mean(d).clamp(min, max), pop_std(d), max, min]
    };
    let units: Vec<f64> = seg.expirations.iter().map(|iv| iv.duration()).collect();
    let pauses: Vec<f64> = seg.pauses.iter().map(|iv| iv.duration()).collect();
    let mut out = [0.0; 8];
    out[..4].copy_from_slice(&stats(&units));
    out[4..].copy_from_slice(&stats(&pauses));
    Ok(out)
}

pub fn aggregate_biomarkers(
    seg: &CrySegmentation,
    flags: &[UnitFlags],
) -> Result<CryBiomarkerVector, BiomarkerError> {
    if flags.len() != seg.num_units() {
        return Err(BiomarkerError::UnitCountMismatch {
            flags: flags.len(),
            units: seg.num_units(),
        });
    }
    let durations = durational_features(seg)?;
    let units = flags.len() as f64;
    let total_frames: usize = flags.iter().map(UnitFlags::num_frames).sum();
    let frac = |count: usize| {
        if total_frames == 0 {
            0.0
        } else {
            count as f64 / total_frames as f64
        }
    };

    let mut values = [0.0; 26];
    values[..8].copy_from_slice(&durations);
    let frame_level: [fn(&UnitFlags) -> usize; 4] = [
        |u| UnitFlags::count(&u.hyperphonation),
        |u| UnitFlags::count(&u.dysphonation),
        |u| UnitFlags::count(&u.glide),
        |u| if u.vibrato { u.num_frames() } else { 0 },
    ];
    for (i, count_of) in frame_level.iter().enumerate() {
        let with = flags.iter().filter(|u| count_of(u) > 0 || (i == 3 && u.vibrato)).count();
        let frames: usize = flags.iter().map(count_of).sum();
        values[8 + 2 * i] = with as f64 / units;
        values[9 + 2 * i] = frac(frames);
    }
    for (j, melody) in Melody::ALL.iter().enumerate() {
        let labelled: Vec<&UnitFlags> = flags.iter().filter(|u| u.melody == *melody).collect();
        values[16 + 2 * j] = labelled.len() as f64 / units;
        values[17 + 2 * j] = frac(labelled.iter().map(|u| u.num_frames()).sum());
    }
    Ok(CryBiomarkerVector { values })
}

/// Segmentation-level biomarker extraction: detectors followed by aggregation.
pub fn extract_biomarkers(
    seg: &CrySegmentation,
    f0: &F0Contour,
    flatness: &FrameSeries,
    params: &BiomarkerParams,
) -> Result<(Vec<UnitFlags>, CryBiomarkerVector), BiomarkerError> {
    let flags = analyze_units(seg, f0, flatness, params)?;
    let vector = aggregate_biomarkers(seg, &flags)?;
    Ok((flags, vector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmenter::Interval;
    use proptest::prelude::*;

    fn seg(intervals: &[(f64, f64)]) -> CrySegmentation {
        CrySegmentation::from_expirations(
            intervals.iter().map(|&(a, b)| Interval::new(a, b)).collect(),
        )
    }

    fn unit(start: usize, len: usize, melody: Melody) -> UnitFlags {
        UnitFlags {
            frames: start..start + len,
            hyperphonation: vec![false; len],
            dysphonation: vec![false; len],
            glide: vec![false; len],
            vibrato: false,
            melody,
        }
    }

    #[test]
    fn durational_example() {
        let d = durational_features(&seg(&[(0.0, 0.5), (1.0, 1.8)])).unwrap();
        let expected = [0.65, 0.15, 0.8, 0.5, 0.5, 0.0, 0.5, 0.5];
        for (a, b) in d.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{d:?}");
        }
        let one = durational_features(&seg(&[(0.2, 1.0)])).unwrap();
        assert_eq!(&one[4..], &[0.0; 4]);
        let equal = durational_features(&seg(&[(0.0, 0.5), (1.0, 1.5), (2.0, 2.5)])).unwrap();
        assert!(equal[1].abs() < 1e-12);
        assert_eq!(
            durational_features(&CrySegmentation::default()),
            Err(BiomarkerError::EmptySegmentation)
        );
    }

    #[test]
    fn dysphonation_fraction_example() {
        let s = seg(&[(0.0, 1.0), (1.5, 2.5), (3.0, 4.0), (4.5, 5.5)]);
        let mut flags: Vec<UnitFlags> = (0..4).map(|i| unit(i * 150, 100, Melody::Flat)).collect();
        flags[0].dysphonation[10..30].iter_mut().for_each(|f| *f = true);
        flags[2].dysphonation[0..10].iter_mut().for_each(|f| *f = true);
        let v = aggregate_biomarkers(&s, &flags).unwrap();
        assert_eq!(v.get("dysphonation_unit_frac"), Some(0.5));
        assert_eq!(v.get("dysphonation_dur_frac"), Some(0.075));
        assert_eq!(v.get("melody_flat_unit_frac"), Some(1.0));
        assert_eq!(v.get("melody_flat_dur_frac"), Some(1.0));
        for name in ["melody_falling_unit_frac", "melody_rising_unit_frac", "hyperphonation_unit_frac", "hyperphonation_dur_frac"] {
            assert_eq!(v.get(name), Some(0.0));
        }
    }

    #[test]
    fn vibrato_counts_whole_units() {
        let s = seg(&[(0.0, 1.0), (1.5, 2.0)]);
        let mut flags = vec![unit(0, 100, Melody::Rising), unit(150, 50, Melody::Falling)];
        flags[1].vibrato = true;
        let v = aggregate_biomarkers(&s, &flags).unwrap();
        assert_eq!(v.get("vibrato_unit_frac"), Some(0.5));
        assert!((v.get("vibrato_dur_frac").unwrap() - 50.0 / 150.0).abs() < 1e-15);
        assert!((v.get("melody_rising_dur_frac").unwrap() - 100.0 / 150.0).abs() < 1e-15);
    }

    #[test]
    fn mismatched_flags() {
        let s = seg(&[(0.0, 1.0)]);
        assert_eq!(
            aggregate_biomarkers(&s, &[]),
            Err(BiomarkerError::UnitCountMismatch { flags: 0, units: 1 })
        );
    }

    #[test]
    fn schema_has_26_unique_names() {
        let mut names = BIOMARKER_FEATURE_NAMES.to_vec();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 26);
    }

    #[test]
    fn json_round_trip() {
        let v = CryBiomarkerVector::from_values(std::array::from_fn(|i| i as f64 * 0.1));
        let text = serde_json::to_string(&v).unwrap();
        let back: CryBiomarkerVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    proptest! {
        #[test]
        fn fractions_are_bounded_and_melodies_sum_to_one(
            lens in proptest::collection::vec(1usize..60, 1..8),
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut intervals = Vec::new();
            let mut flags = Vec::new();
            let mut t = 0.0;
            let mut frame = 0;
            for &len in &lens {
                intervals.push((t, t + len as f64 * 0.01));
                t += len as f64 * 0.01 + 0.1;
                let mut u = unit(frame, len, Melody::ALL[rng.random_range(0..5)]);
                frame += len + 10;
                for f in u.hyperphonation.iter_mut().chain(u.dysphonation.iter_mut()).chain(u.glide.iter_mut()) {
                    *f = rng.random_bool(0.3);
                }
                u.vibrato = rng.random_bool(0.5);
                flags.push(u);
            }
            let v = aggregate_biomarkers(&seg(&intervals), &flags).unwrap();
            for (name, value) in v.iter() {
                prop_assert!(value.is_finite());
                if name.ends_with("_frac") {
                    prop_assert!((0.0..=1.0).contains(&value), "{} = {}", name, value);
                }
            }
            let melody_sum: f64 = Melody::ALL
                .iter()
                .map(|m| v.get(&format!("melody_{}_unit_frac", m)).unwrap())
                .sum();
            prop_assert!((melody_sum - 1.0).abs() < 1e-9);
            let d = &v.values()[..4];
            prop_assert!(d[3] <= d[0] && d[0] <= d[2] && d[1] >= 0.0);
        }
    }
}
