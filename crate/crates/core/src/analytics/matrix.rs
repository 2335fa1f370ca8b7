use std::collections::HashSet;

use ndarray::{Array2, ArrayView1, Axis};

use super::AnalyticsError;
use crate::audio_io::Site;

/// Recordings by named features, with the labels and grouping columns the
/// analyses need.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    values: Array2<f64>,
    labels: Vec<u8>,
    sites: Vec<Site>,
    patient_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        names: Vec<String>,
        values: Array2<f64>,
        labels: Vec<u8>,
        sites: Vec<Site>,
        patient_ids: Vec<String>,
    ) -> Result<Self, AnalyticsError> {
        let rows = values.nrows();
        if values.ncols() != names.len() {
            return Err(AnalyticsError::RowCountMismatch {
                rows: values.ncols(),
                field: "names",
                len: names.len(),
            });
        }
        for (field, len) in [("labels", labels.len()), ("sites", sites.len()), ("patient_ids", patient_ids.len())] {
            if len != rows {
                return Err(AnalyticsError::RowCountMismatch { rows, field, len });
            }
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(AnalyticsError::DuplicateColumn(name.clone()));
            }
        }
        if let Some((row, &value)) = labels.iter().enumerate().find(|(_, &l)| l > 1) {
            return Err(AnalyticsError::InvalidLabel { row, value });
        }
        for ((row, col), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(AnalyticsError::NonFinite {
                    row,
                    column: names[col].clone(),
                });
            }
        }
        Ok(Self {
            names,
            values,
            labels,
            sites,
            patient_ids,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn patient_ids(&self) -> &[String] {
        &self.patient_ids
    }

    pub fn num_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn class_count(&self, class: u8) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Rows at `indices`, in that order.
    pub fn rows(&self, indices: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            values: self.values.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            sites: indices.iter().map(|&i| self.sites[i]).collect(),
            patient_ids: indices.iter().map(|&i| self.patient_ids[i].clone()).collect(),
        }
    }

    /// The named columns, in the order given.
    pub fn columns(&self, names: &[String]) -> Result<Self, AnalyticsError> {
        let idx = names
            .iter()
            .map(|n| self.column_index(n).ok_or_else(|| AnalyticsError::UnknownFeature(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            names: names.to_vec(),
            values: self.values.select(Axis(1), &idx),
            labels: self.labels.clone(),
            sites: self.sites.clone(),
            patient_ids: self.patient_ids.clone(),
        })
    }
}
