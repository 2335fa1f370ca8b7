//! Patient-grouped, class-stratified cross-validation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{roc_auc, train_logreg, AnalyticsError, FeatureMatrix, LogRegOptions};

/// Inverse regularisation strengths searched by default.
pub const DEFAULT_REG_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

/// Fold index per row.
///
/// Each patient is given the label of its first row and patients are dealt
/// out class by class, largest first, to the fold currently holding the
/// fewest rows of that class (lowest index on ties). All rows of a patient
/// share a fold.
pub fn stratified_group_folds(
    labels: &[u8],
    groups: &[String],
    folds: usize,
) -> Result<Vec<usize>, AnalyticsError> {
    if labels.len() != groups.len() {
        return Err(AnalyticsError::LengthMismatch {
            left: labels.len(),
            right: groups.len(),
        });
    }
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        members.entry(g.as_str()).or_default().push(i);
    }
    let mut assignment = vec![0; labels.len()];
    let mut per_class_rows = vec![[0usize; 2]; folds];
    for class in [0u8, 1] {
        let mut class_groups: Vec<(&str, &Vec<usize>)> = members
            .iter()
            .filter(|(_, rows)| labels[rows[0]] == class)
            .map(|(g, rows)| (*g, rows))
            .collect();
        if class_groups.len() < folds {
            return Err(AnalyticsError::ClassTooSmall {
                class,
                groups: class_groups.len(),
                folds,
            });
        }
        class_groups.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
        for (_, rows) in class_groups {
            let fold = (0..folds)
                .min_by_key(|&f| (per_class_rows[f][class as usize], f))
                .expect("at least one fold");
            for &r in rows {
                assignment[r] = fold;
                per_class_rows[fold][labels[r] as usize] += 1;
            }
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_reg_strength: f64,
    pub grid: Vec<f64>,
    pub mean_auc: Vec<f64>,
    /// Validation AUC per grid value, per fold.
    pub fold_auc: Vec<Vec<f64>>,
}

impl CvResult {
    pub fn best_fold_auc(&self) -> &[f64] {
        let i = self
            .grid
            .iter()
            .position(|&c| c == self.best_reg_strength)
            .unwrap_or(0);
        &self.fold_auc[i]
    }
}

/// Picks the grid value with the best mean validation AUC. Ties go to the
/// smallest value, which is the strongest regularisation.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    folds: usize,
    grid: &[f64],
    options: &LogRegOptions,
) -> Result<CvResult, AnalyticsError> {
    if grid.is_empty() {
        return Err(AnalyticsError::EmptyGrid);
    }
    let assignment = stratified_group_folds(matrix.labels(), matrix.patient_ids(), folds)?;
    let splits: Vec<(FeatureMatrix, FeatureMatrix)> = (0..folds)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) =
                (0..matrix.num_rows()).partition(|&i| assignment[i] == f);
            (matrix.rows(&train), matrix.rows(&val))
        })
        .collect();

    let fold_auc = grid
        .iter()
        .map(|&c| {
            splits
                .par_iter()
                .map(|(train, val)| {
                    let model = train_logreg(train, c, options)?;
                    let scores = model.predict_proba(val)?;
                    Ok(roc_auc(&scores, val.labels())?.auc)
                })
                .collect::<Result<Vec<f64>, AnalyticsError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mean_auc: Vec<f64> = fold_auc
        .iter()
        .map(|a| a.iter().sum::<f64>() / a.len() as f64)
        .collect();

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let mut best = order[0];
    for &i in &order[1..] {
        if mean_auc[i] > mean_auc[best] + 1e-12 {
            best = i;
        }
    }
    Ok(CvResult {
        best_reg_strength: grid[best],
        grid: grid.to_vec(),
        mean_auc,
        fold_auc,
    })
}
