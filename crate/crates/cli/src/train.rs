use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use cry_core::analytics::{
    cross_validate, roc_auc, select_consistent_features, sensitivity_at_specificity, train_logreg, CvResult,
    ScreeningModel,
};
use cry_core::biomarkers::BIOMARKER_FEATURE_NAMES;
use cry_core::config::PipelineConfig;
use cry_core::table::{read_splits, FeatureTable, Split, TableError};
use cry_core::voicefeat::GENERIC_FEATURE_NAMES;

use crate::{open, write_json, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    Voice,
    Cry,
    Both,
    SelectedVoice,
    SelectedCry,
    SelectedBoth,
}

impl FeatureSet {
    pub fn base_columns(self) -> Vec<String> {
        let voice = GENERIC_FEATURE_NAMES.iter();
        let cry = BIOMARKER_FEATURE_NAMES.iter();
        let names: Vec<&str> = match self {
            FeatureSet::Voice | FeatureSet::SelectedVoice => voice.copied().collect(),
            FeatureSet::Cry | FeatureSet::SelectedCry => cry.copied().collect(),
            FeatureSet::Both | FeatureSet::SelectedBoth => cry.chain(voice).copied().collect(),
        };
        names.into_iter().map(str::to_string).collect()
    }

    pub fn is_selected(self) -> bool {
        matches!(self, FeatureSet::SelectedVoice | FeatureSet::SelectedCry | FeatureSet::SelectedBoth)
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Voice => "voice",
            FeatureSet::Cry => "cry",
            FeatureSet::Both => "both",
            FeatureSet::SelectedVoice => "selected-voice",
            FeatureSet::SelectedCry => "selected-cry",
            FeatureSet::SelectedBoth => "selected-both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub feature_set: FeatureSet,
    pub features: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub best_reg_strength: f64,
    pub cv: CvResult,
    pub auc: f64,
    pub sens_at_spec80: f64,
    /// `None` where a site's test rows hold a single class.
    pub per_site_auc: BTreeMap<String, Option<f64>>,
}

pub(crate) fn split_lookup(path: &Path, table: &FeatureTable) -> Result<HashMap<PathBuf, Split>, CliError> {
    let lookup: HashMap<PathBuf, Split> =
        read_splits(open(path)?)?.into_iter().map(|r| (r.path, r.split)).collect();
    for row in &table.rows {
        if row.entry.binary_label().is_some() && !lookup.contains_key(&row.entry.path) {
            return Err(TableError::MissingSplit(row.entry.path.display().to_string()).into());
        }
    }
    Ok(lookup)
}

/// Selection, cross-validation and the final fit use train and val rows;
/// the reported metrics come from the test rows only.
pub fn cmd_train_eval(
    features: &Path,
    split: &Path,
    feature_set: FeatureSet,
    config: &PipelineConfig,
    model_out: &Path,
    metrics_out: &Path,
) -> Result<Metrics, CliError> {
    let table = FeatureTable::read(open(features)?)?;
    let lookup = split_lookup(split, &table)?;
    let in_test = |p: &PathBuf| lookup.get(p) == Some(&Split::Test);

    let base = feature_set.base_columns();
    let fit_all = table.to_matrix(Some(&base), |r| !in_test(&r.entry.path))?;
    let test_all = table.to_matrix(Some(&base), |r| in_test(&r.entry.path))?;
    for class in [0u8, 1] {
        if test_all.class_count(class) == test_all.num_rows() {
            return Err(CliError::TestSingleClass(class));
        }
    }

    let columns = if feature_set.is_selected() {
        select_consistent_features(&fit_all, &config.selection.sites)?.selected()
    } else {
        base
    };
    if columns.is_empty() {
        return Err(CliError::EmptyFeatureSet(feature_set.name().to_string()));
    }
    let fit = fit_all.columns(&columns)?;
    let test = test_all.columns(&columns)?;

    let cv = cross_validate(&fit, config.cv.folds, &config.cv.reg_grid, &config.logreg)?;
    let model: ScreeningModel = train_logreg(&fit, cv.best_reg_strength, &config.logreg)?;
    let scores = model.predict_proba(&test)?;
    let curve = roc_auc(&scores, test.labels())?;

    let mut per_site: BTreeMap<String, (Vec<f64>, Vec<u8>)> = BTreeMap::new();
    for ((score, label), site) in scores.iter().zip(test.labels()).zip(test.sites()) {
        let e = per_site.entry(site.to_string()).or_default();
        e.0.push(*score);
        e.1.push(*label);
    }
    let per_site_auc = per_site
        .into_iter()
        .map(|(site, (s, l))| (site, roc_auc(&s, &l).ok().map(|c| c.auc)))
        .collect();

    let metrics = Metrics {
        feature_set,
        features: columns,
        n_train: fit.num_rows(),
        n_test: test.num_rows(),
        best_reg_strength: cv.best_reg_strength,
        cv,
        auc: curve.auc,
        sens_at_spec80: sensitivity_at_specificity(&curve, 0.8),
        per_site_auc,
    };
    write_json(model_out, &model)?;
    write_json(metrics_out, &metrics)?;
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_set_columns() {
        assert_eq!(FeatureSet::Voice.base_columns().len(), 12);
        assert_eq!(FeatureSet::SelectedCry.base_columns().len(), 26);
        let both = FeatureSet::Both.base_columns();
        assert_eq!(both, cry_core::pipeline::feature_names());
        assert!(FeatureSet::SelectedBoth.is_selected() && !FeatureSet::Both.is_selected());
        for set in FeatureSet::value_variants() {
            assert_eq!(FeatureSet::from_str(set.name(), false), Ok(*set));
            assert_eq!(serde_json::to_value(set).unwrap(), set.name());
        }
    }
}
