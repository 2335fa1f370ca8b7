//! Pipeline configuration as flat `group.key = value` text.
//!
//! Every key is optional and falls back to its default; unknown keys, bad
//! values and repeated keys are errors. Lists are comma separated.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::analytics::{LogRegOptions, DEFAULT_REG_GRID};
use crate::audio_io::Site;
use crate::biomarkers::BiomarkerParams;
use crate::dsp::{AnalysisParams, FormantParams, FrameParams, MelParams, PitchParams};
use crate::segmenter::{SegmenterParams, MIN_CRY_SECONDS};
use crate::voicefeat::VoiceParams;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurationParams {
    pub min_cry_seconds: f64,
}

impl Default for CurationParams {
    fn default() -> Self {
        Self {
            min_cry_seconds: MIN_CRY_SECONDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvParams {
    pub folds: usize,
    pub reg_grid: Vec<f64>,
}

impl Default for CvParams {
    fn default() -> Self {
        Self {
            folds: 10,
            reg_grid: DEFAULT_REG_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionParams {
    pub sites: Vec<Site>,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            sites: vec![Site::Esuth, Site::Lasuth, Site::Scdm],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub frames: FrameParams,
    pub mel: MelParams,
    pub pitch: PitchParams,
    pub formants: FormantParams,
    pub segmenter: SegmenterParams,
    pub biomarkers: BiomarkerParams,
    pub voice: VoiceParams,
    pub curation: CurationParams,
    pub cv: CvParams,
    pub selection: SelectionParams,
    pub logreg: LogRegOptions,
}

fn flatten(prefix: &str, value: &Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn format_value(value: &Value) -> String {
    match value {
        Value::Array(items) => items.iter().map(format_value).collect::<Vec<_>>().join(","),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Parses `raw` into the JSON type of `template`.
fn parse_like(template: &Value, raw: &str) -> Option<Value> {
    let raw = raw.trim();
    match template {
        Value::Bool(_) => raw.parse().ok().map(Value::Bool),
        Value::Number(n) if n.is_u64() => raw.parse::<u64>().ok().map(|v| Value::Number(v.into())),
        Value::Number(_) => raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .and_then(Number::from_f64)
            .map(Value::Number),
        Value::String(_) => Some(Value::String(raw.to_string())),
        Value::Array(items) => {
            if raw.is_empty() {
                return Some(Value::Array(Vec::new()));
            }
            let element = items.first().cloned().unwrap_or(Value::Number(Number::from_f64(0.0)?));
            let element = match element {
                Value::String(_) => Value::String(String::new()),
                Value::Number(_) => Value::Number(Number::from_f64(0.0)?),
                other => other,
            };
            raw.split(',')
                .map(|part| match &element {
                    Value::String(_) => Some(Value::String(part.trim().to_ascii_uppercase())),
                    t => parse_like(t, part),
                })
                .collect::<Option<Vec<_>>>()
                .map(Value::Array)
        }
        _ => None,
    }
}

fn unflatten(flat: &BTreeMap<String, Value>) -> Value {
    let mut root = Map::new();
    for (key, value) in flat {
        let mut node = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for part in &parts[..parts.len() - 1] {
            node = node
                .entry(part.to_string())
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("flattened keys never mix leaves and groups");
        }
        node.insert(parts[parts.len() - 1].to_string(), value.clone());
    }
    Value::Object(root)
}

impl PipelineConfig {
    pub fn analysis(&self) -> AnalysisParams {
        AnalysisParams {
            frames: self.frames,
            mel: self.mel,
            pitch: self.pitch,
            formants: self.formants,
        }
    }

    fn flat(&self) -> BTreeMap<String, Value> {
        let mut out = BTreeMap::new();
        flatten("", &serde_json::to_value(self).expect("config is always representable"), &mut out);
        out
    }

    /// Every key with its effective value, one per line, sorted by key.
    pub fn to_text(&self) -> String {
        self.flat()
            .iter()
            .map(|(k, v)| format!("{k} = {}\n", format_value(v)))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut flat = Self::default().flat();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let key = key.trim().to_string();
            let template = flat.get(&key).ok_or_else(|| ConfigError::UnknownKey {
                line,
                key: key.clone(),
            })?;
            if seen.insert(key.clone(), line).is_some() {
                return Err(ConfigError::DuplicateKey { line, key });
            }
            let parsed = parse_like(template, value).ok_or_else(|| ConfigError::BadValue {
                line,
                key: key.clone(),
                value: value.trim().to_string(),
            })?;
            flat.insert(key, parsed);
        }
        let config: Self =
            serde_json::from_value(unflatten(&flat)).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.frames.hop_seconds > 0.0 && self.frames.window_seconds > 0.0) {
            return invalid("frame hop and window must be positive");
        }
        if !(self.pitch.f0_min > 0.0 && self.pitch.f0_min < self.pitch.f0_max) {
            return invalid("pitch.f0_min must be positive and below pitch.f0_max");
        }
        if self.cv.folds < 2 {
            return invalid("cv.folds must be at least 2");
        }
        if self.cv.reg_grid.is_empty() || self.cv.reg_grid.iter().any(|c| !(*c > 0.0)) {
            return invalid("cv.reg_grid must hold positive values");
        }
        if self.selection.sites.len() < 2 {
            return invalid("selection.sites needs at least two sites");
        }
        if !(self.curation.min_cry_seconds >= 0.0) {
            return invalid("curation.min_cry_seconds must be non-negative");
        }
        Ok(())
    }
}
