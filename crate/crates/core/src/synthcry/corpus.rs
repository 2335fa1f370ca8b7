use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{Glide, Hyperphonation, Span, SynthSpec, UnitSpec, Vibrato, HYPER_APPROACH_S};
use super::{synth_cry, GroundTruth, SynthError};
use crate::audio_io::{write_manifest, write_wav, AudioClip, ManifestEntry, Period, SarnatLabel, Site, WavEncoding};
use crate::biomarkers::Melody;
use crate::dsp::FrameParams;
use crate::table::{write_splits, Split, SplitRow};

/// Probability of each melody shape for a unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MelodyMix {
    pub falling: f64,
    pub rising_falling: f64,
    pub rising: f64,
    pub falling_rising: f64,
    pub flat: f64,
}

impl MelodyMix {
    pub fn weights(&self) -> [f64; 5] {
        [self.falling, self.rising_falling, self.rising, self.falling_rising, self.flat]
    }

    pub fn probability(&self, melody: Melody) -> f64 {
        self.weights()[melody.index()]
    }

    /// `flat` with the remainder spread evenly over the other four shapes.
    pub fn with_flat(flat: f64) -> Self {
        let rest = (1.0 - flat) / 4.0;
        Self {
            falling: rest,
            rising_falling: rest,
            rising: rest,
            falling_rising: rest,
            flat,
        }
    }
}

/// Per-unit incidence probabilities for one class.
///
/// A unit first draws its melody, then at most one event. Dysphonation fits
/// every melody, so its probability is unconditional. Hyperphonation and
/// glides put the F0 maximum mid-unit and are only planted on rising-falling
/// units; vibrato is only planted on units that are not flat. Their
/// probabilities are conditional on those melodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProfile {
    pub melody: MelodyMix,
    pub hyperphonation: f64,
    pub dysphonation: f64,
    pub glide: f64,
    pub vibrato: f64,
}

impl ClassProfile {
    fn validate(&self) -> Result<(), SynthError> {
        let w = self.melody.weights();
        let all = [self.hyperphonation, self.dysphonation, self.glide, self.vibrato];
        if w.iter().chain(&all).any(|p| !(0.0..=1.0).contains(p)) {
            return Err(SynthError::InvalidProfile("probabilities must be in [0, 1]".into()));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(SynthError::InvalidProfile("melody probabilities must sum to 1".into()));
        }
        if all.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(SynthError::InvalidProfile("event probabilities must sum to at most 1".into()));
        }
        Ok(())
    }

    /// Events allowed on a unit with `melody`, with their probabilities.
    fn events_for(&self, melody: Melody) -> [(Event, f64); 4] {
        let peaked = melody == Melody::RisingFalling;
        let moving = melody != Melody::Flat;
        [
            (Event::Hyperphonation, if peaked { self.hyperphonation } else { 0.0 }),
            (Event::Dysphonation, self.dysphonation),
            (Event::Glide, if peaked { self.glide } else { 0.0 }),
            (Event::Vibrato, if moving { self.vibrato } else { 0.0 }),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Hyperphonation,
    Dysphonation,
    Glide,
    Vibrato,
}

fn default_sites() -> Vec<Site> {
    vec![Site::Esuth, Site::Lasuth, Site::Scdm]
}

fn default_n_per_class() -> usize {
    100
}

fn default_val_fraction() -> f64 {
    0.2
}

fn default_test_fraction() -> f64 {
    0.4
}

/// Both class profiles plus corpus layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusProfile {
    pub negative: ClassProfile,
    pub positive: ClassProfile,
    #[serde(default = "default_n_per_class")]
    pub n_per_class: usize,
    #[serde(default = "default_sites")]
    pub sites: Vec<Site>,
    /// Extra recordings per class with under three seconds of cry.
    #[serde(default)]
    pub short_per_class: usize,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

impl CorpusProfile {
    fn with_classes(negative: ClassProfile, positive: ClassProfile) -> Self {
        Self {
            negative,
            positive,
            n_per_class: default_n_per_class(),
            sites: default_sites(),
            short_per_class: 0,
            val_fraction: default_val_fraction(),
            test_fraction: default_test_fraction(),
        }
    }

    /// Prevalence gaps as reported for the clinical cohort: dysphonation in
    /// 12.1% vs 7.7% and flat melody in 73.8% vs 62.4% of sick vs healthy.
    pub fn reported() -> Self {
        let class = |dysphonation, flat| ClassProfile {
            melody: MelodyMix::with_flat(flat),
            hyperphonation: 0.2,
            dysphonation,
            glide: 0.2,
            vibrato: 0.2,
        };
        Self::with_classes(class(0.077, 0.624), class(0.121, 0.738))
    }

    /// Same directions of effect with the gaps widened so that a few hundred
    /// recordings separate cleanly.
    pub fn separated() -> Self {
        let negative = ClassProfile {
            melody: MelodyMix {
                falling: 0.2,
                rising_falling: 0.35,
                rising: 0.2,
                falling_rising: 0.15,
                flat: 0.1,
            },
            hyperphonation: 0.25,
            dysphonation: 0.03,
            glide: 0.25,
            vibrato: 0.25,
        };
        let positive = ClassProfile {
            melody: MelodyMix {
                falling: 0.08,
                rising_falling: 0.1,
                rising: 0.06,
                falling_rising: 0.06,
                flat: 0.7,
            },
            hyperphonation: 0.15,
            dysphonation: 0.45,
            glide: 0.15,
            vibrato: 0.15,
        };
        Self::with_classes(negative, positive)
    }

    /// Both classes drawn from the same profile.
    pub fn identical() -> Self {
        let p = Self::separated().negative;
        Self::with_classes(p, p)
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "reported" => Some(Self::reported()),
            "separated" => Some(Self::separated()),
            "identical" => Some(Self::identical()),
            _ => None,
        }
    }

    pub fn class(&self, label: u8) -> &ClassProfile {
        if label == 1 {
            &self.positive
        } else {
            &self.negative
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        self.negative.validate()?;
        self.positive.validate()?;
        if self.sites.is_empty() {
            return Err(SynthError::InvalidProfile("at least one site is required".into()));
        }
        let (v, t) = (self.val_fraction, self.test_fraction);
        if !(v >= 0.0 && t >= 0.0 && v + t < 1.0) {
            return Err(SynthError::InvalidProfile("split fractions must leave a training share".into()));
        }
        Ok(())
    }
}

/// Seed for the `index`-th recording of a corpus.
pub fn derive_seed(corpus_seed: u64, index: u64) -> u64 {
    // splitmix64 over the pair keeps nearby indices uncorrelated
    let mut z = corpus_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return Some(i);
        }
    }
    None
}

/// Draws a recording from `profile`. Short recordings hold two brief units
/// and stay under three seconds of cry.
pub fn generate_spec(profile: &ClassProfile, seed: u64, short: bool) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_units = if short { 2 } else { rng.random_range(5..=7) };
    let mut units = Vec::with_capacity(n_units);
    for _ in 0..n_units {
        let melody = Melody::ALL[pick(&mut rng, &profile.melody.weights()).unwrap_or(4)];
        let events = profile.events_for(melody);
        let weights: Vec<f64> = events.iter().map(|e| e.1).collect();
        let event = pick(&mut rng, &weights).map(|i| events[i].0);

        let duration_s = if event == Some(Event::Hyperphonation) {
            rng.random_range(1.0..1.3)
        } else if short {
            rng.random_range(0.6..1.1)
        } else {
            rng.random_range(0.8..1.3)
        };
        let mut unit = UnitSpec {
            duration_s,
            pause_after_s: rng.random_range(0.25..0.5),
            base_f0_hz: rng.random_range(380.0..520.0),
            amplitude: rng.random_range(0.25..0.5),
            melody,
            melody_turn: rng.random_range(0.4..0.6),
            hyperphonation: None,
            dysphonation: None,
            glide: None,
            vibrato: None,
        };
        match event {
            Some(Event::Hyperphonation) => {
                let len = rng.random_range(0.25..0.35);
                let lo = (0.3 * duration_s).max(HYPER_APPROACH_S + 0.02);
                let hi = (0.7 * duration_s - len).min(duration_s - HYPER_APPROACH_S - 0.02 - len);
                let start = if hi > lo { rng.random_range(lo..hi) } else { lo };
                unit.hyperphonation = Some(Hyperphonation {
                    span: Span::new(start, start + len),
                    plateau_hz: rng.random_range(1150.0..1300.0),
                });
            }
            Some(Event::Dysphonation) => {
                let len = rng.random_range(0.15..0.25);
                let start = rng.random_range(0.15..(duration_s - 0.15 - len));
                unit.dysphonation = Some(Span::new(start, start + len));
            }
            Some(Event::Glide) => {
                let centre = duration_s * unit.melody_turn + rng.random_range(-0.1..0.1);
                unit.glide = Some(Glide {
                    span: Span::new(centre - 0.05, centre + 0.05),
                    delta_hz: rng.random_range(800.0..900.0),
                });
            }
            Some(Event::Vibrato) => {
                unit.vibrato = Some(Vibrato {
                    rate_hz: rng.random_range(7.0..9.0),
                    depth_hz: rng.random_range(50.0..70.0),
                });
            }
            None => {}
        }
        units.push(unit);
    }
    SynthSpec {
        seed: rng.random(),
        sample_rate: 16000,
        noise_floor_db: -60.0,
        lead_silence_s: rng.random_range(0.3..0.5),
        units,
        frames: FrameParams::default(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    /// Manifest row; the path is relative to the corpus directory.
    pub entry: ManifestEntry,
    pub split: Split,
    pub short: bool,
    pub spec: SynthSpec,
}

impl CorpusItem {
    pub fn label(&self) -> u8 {
        self.entry.binary_label().unwrap_or(0)
    }
}

/// Lays out a corpus without rendering audio.
///
/// Each class holds `n_per_class` recordings from patients with a birth and
/// a discharge recording each; patients are assigned to sites round-robin
/// and to splits by a seeded shuffle within each class.
pub fn plan_corpus(profile: &CorpusProfile, seed: u64) -> Result<Vec<CorpusItem>, SynthError> {
    profile.validate()?;
    let mut items = Vec::new();
    let mut split_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
    let mut index = 0u64;
    for label in [0u8, 1] {
        let class = profile.class(label);
        let total = profile.n_per_class + profile.short_per_class;
        let patients = total.div_ceil(2);
        let mut order: Vec<usize> = (0..patients).collect();
        order.shuffle(&mut split_rng);
        let n_test = (profile.test_fraction * patients as f64).round() as usize;
        let n_val = (profile.val_fraction * patients as f64).round() as usize;
        let mut split_of = vec![Split::Train; patients];
        for (rank, &p) in order.iter().enumerate() {
            split_of[p] = if rank < n_test {
                Split::Test
            } else if rank < n_test + n_val {
                Split::Val
            } else {
                Split::Train
            };
        }
        let tag = if label == 1 { "pos" } else { "neg" };
        for j in 0..total {
            let patient = j / 2;
            let short = j >= profile.n_per_class;
            let sarnat = if label == 0 {
                SarnatLabel::Normal
            } else {
                [SarnatLabel::Mild, SarnatLabel::Moderate, SarnatLabel::Severe][patient % 3]
            };
            let period = if j % 2 == 0 { Period::Birth } else { Period::Discharge };
            let name = format!("{tag}_{j:04}.wav");
            items.push(CorpusItem {
                entry: ManifestEntry {
                    path: PathBuf::from("wav").join(&name),
                    patient_id: format!("{tag}{patient:04}"),
                    site: profile.sites[patient % profile.sites.len()],
                    period,
                    label: sarnat,
                },
                split: split_of[patient],
                short,
                spec: generate_spec(class, derive_seed(seed, index), short),
            });
            index += 1;
        }
    }
    Ok(items)
}

pub fn render_item(item: &CorpusItem) -> Result<(AudioClip, GroundTruth), SynthError> {
    synth_cry(&item.spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingTruth {
    pub path: PathBuf,
    pub label: u8,
    pub short: bool,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary {
    pub manifest: PathBuf,
    pub ground_truth: PathBuf,
    pub split: PathBuf,
    pub items: Vec<CorpusItem>,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Renders a planned corpus into `dir`: 16-bit WAVs under `wav/`, plus
/// `manifest.csv`, `ground_truth.json` and `split.csv`.
pub fn make_corpus(dir: &Path, profile: &CorpusProfile, seed: u64) -> Result<CorpusSummary, SynthError> {
    let items = plan_corpus(profile, seed)?;
    let wav_dir = dir.join("wav");
    fs::create_dir_all(&wav_dir).map_err(io_error(&wav_dir))?;
    let truths = items
        .par_iter()
        .map(|item| {
            let (clip, truth) = render_item(item)?;
            write_wav(dir.join(&item.entry.path), &clip, WavEncoding::Pcm16)?;
            Ok(RecordingTruth {
                path: item.entry.path.clone(),
                label: item.label(),
                short: item.short,
                truth,
            })
        })
        .collect::<Result<Vec<_>, SynthError>>()?;

    let manifest = dir.join("manifest.csv");
    let entries: Vec<ManifestEntry> = items.iter().map(|i| i.entry.clone()).collect();
    let file = fs::File::create(&manifest).map_err(io_error(&manifest))?;
    write_manifest(file, &entries)?;

    let ground_truth = dir.join("ground_truth.json");
    let json = serde_json::to_string_pretty(&truths)?;
    fs::write(&ground_truth, json + "\n").map_err(io_error(&ground_truth))?;

    let split = dir.join("split.csv");
    let rows: Vec<SplitRow> = items
        .iter()
        .map(|i| SplitRow {
            path: i.entry.path.clone(),
            split: i.split,
        })
        .collect();
    let file = fs::File::create(&split).map_err(io_error(&split))?;
    write_splits(file, &rows).map_err(|e| SynthError::InvalidProfile(e.to_string()))?;

    Ok(CorpusSummary {
        manifest,
        ground_truth,
        split,
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn presets_are_valid() {
        for name in ["reported", "separated", "identical"] {
            CorpusProfile::preset(name).unwrap().validate().unwrap();
        }
        let mut bad = CorpusProfile::separated();
        bad.positive.melody.flat = 0.9;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn generated_specs_are_valid_and_long_enough() {
        let profile = CorpusProfile::separated();
        for seed in 0..200 {
            for label in [0, 1] {
                let spec = generate_spec(profile.class(label), seed, false);
                spec.validate().unwrap();
                let total: f64 = spec.units.iter().map(|u| u.duration_s).sum();
                assert!(total >= 4.0);
                let short = generate_spec(profile.class(label), seed, true);
                short.validate().unwrap();
                assert!(short.units.iter().map(|u| u.duration_s).sum::<f64>() < 3.0);
            }
        }
    }

    #[test]
    fn plan_layout() {
        let mut profile = CorpusProfile::separated();
        profile.n_per_class = 20;
        profile.short_per_class = 2;
        let items = plan_corpus(&profile, 5).unwrap();
        assert_eq!(items.len(), 44);
        let mut patient_split: HashMap<&str, Split> = HashMap::new();
        for item in &items {
            let s = *patient_split.entry(item.entry.patient_id.as_str()).or_insert(item.split);
            assert_eq!(s, item.split);
        }
        for label in [0, 1] {
            for site in &profile.sites {
                assert!(items.iter().any(|i| i.label() == label && i.entry.site == *site));
            }
            assert_eq!(items.iter().filter(|i| i.label() == label && i.short).count(), 2);
        }
        assert_eq!(plan_corpus(&profile, 5).unwrap(), items);
        assert_ne!(plan_corpus(&profile, 6).unwrap(), items);
    }

    /// Joint 95% coverage over the 18 proportions checked below
    /// (Bonferroni, two-sided z for 0.05 / 18), with continuity correction.
    fn within_ci(hits: usize, trials: usize, p: f64) -> bool {
        let z = 2.99;
        let n = trials as f64;
        let sd = (p * (1.0 - p) / n).sqrt();
        let observed = hits as f64 / n;
        (observed - p).abs() <= z * sd + 0.5 / n
    }

    #[test]
    fn incidence_matches_profile() {
        let mut profile = CorpusProfile::reported();
        profile.n_per_class = 1000;
        let items = plan_corpus(&profile, 2024).unwrap();
        for label in [0u8, 1] {
            let class = profile.class(label);
            let units: Vec<&UnitSpec> = items
                .iter()
                .filter(|i| i.label() == label)
                .flat_map(|i| i.spec.units.iter())
                .collect();
            for m in Melody::ALL {
                let hits = units.iter().filter(|u| u.melody == m).count();
                assert!(within_ci(hits, units.len(), class.melody.probability(m)), "{m} {hits}/{}", units.len());
            }
            let dys = units.iter().filter(|u| u.dysphonation.is_some()).count();
            assert!(within_ci(dys, units.len(), class.dysphonation));
            let peaked: Vec<&&UnitSpec> = units.iter().filter(|u| u.melody == Melody::RisingFalling).collect();
            let hyper = peaked.iter().filter(|u| u.hyperphonation.is_some()).count();
            let glide = peaked.iter().filter(|u| u.glide.is_some()).count();
            assert!(within_ci(hyper, peaked.len(), class.hyperphonation));
            assert!(within_ci(glide, peaked.len(), class.glide));
            let moving: Vec<&&UnitSpec> = units.iter().filter(|u| u.melody != Melody::Flat).collect();
            let vib = moving.iter().filter(|u| u.vibrato.is_some()).count();
            assert!(within_ci(vib, moving.len(), class.vibrato), "{vib}/{}", moving.len());
        }
    }
}
