use serde::{Deserialize, Serialize};

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores at or above this value are called positive.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve over every unique score and the Mann-Whitney AUC,
/// `(concordant + ties / 2) / (n_pos * n_neg)`.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocCurve, AnalyticsError> {
    if scores.len() != labels.len() {
        return Err(AnalyticsError::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l == 1).count() as u64;
    let negatives = scores.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(AnalyticsError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    // twice the Mann-Whitney statistic, kept in integers
    let mut doubled: u64 = 0;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        let (mut group_pos, mut group_neg) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] == 1 {
                group_pos += 1;
            } else {
                group_neg += 1;
            }
            i += 1;
        }
        // negatives in this group sit below every positive seen so far
        doubled += 2 * group_neg * tp + group_neg * group_pos;
        tp += group_pos;
        fp += group_neg;
        points.push(RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
            threshold: score,
        });
    }
    Ok(RocCurve {
        points,
        auc: doubled as f64 / (2 * positives * negatives) as f64,
    })
}

/// True-positive rate at false-positive rate `1 - specificity`, linearly
/// interpolated between curve vertices. Where the curve is vertical at the
/// query the highest sensitivity is returned.
pub fn sensitivity_at_specificity(curve: &RocCurve, specificity: f64) -> f64 {
    let target = (1.0 - specificity).clamp(0.0, 1.0);
    let tol = 1e-12;
    let at_vertex = curve
        .points
        .iter()
        .filter(|p| (p.fpr - target).abs() <= tol)
        .map(|p| p.tpr)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
    if let Some(tpr) = at_vertex {
        return tpr;
    }
    for w in curve.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.fpr < target && target < b.fpr {
            return a.tpr + (b.tpr - a.tpr) * (target - a.fpr) / (b.fpr - a.fpr);
        }
    }
    curve.points.last().map_or(0.0, |p| p.tpr)
}
