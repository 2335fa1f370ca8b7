use serde::{Deserialize, Serialize};

use super::{AnalyticsError, FeatureMatrix};
use crate::audio_io::Site;

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(AnalyticsError::TooShort { len: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalyticsError::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteCorrelation {
    pub site: Site,
    /// `None` where the correlation is undefined at that site.
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub feature: String,
    pub per_site: Vec<SiteCorrelation>,
    pub selected: bool,
    pub direction: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub sites: Vec<Site>,
    pub features: Vec<FeatureSelection>,
}

impl SelectionReport {
    pub fn selected(&self) -> Vec<String> {
        self.features
            .iter()
            .filter(|f| f.selected)
            .map(|f| f.feature.clone())
            .collect()
    }
}

/// Keeps the features whose label correlation has the same nonzero sign at
/// every listed site.
pub fn select_consistent_features(
    matrix: &FeatureMatrix,
    sites: &[Site],
) -> Result<SelectionReport, AnalyticsError> {
    if sites.len() < 2 {
        return Err(AnalyticsError::TooFewSites(sites.len()));
    }
    let mut per_site_rows = Vec::with_capacity(sites.len());
    for &site in sites {
        let rows: Vec<usize> = (0..matrix.num_rows())
            .filter(|&i| matrix.sites()[i] == site)
            .collect();
        let positives = rows.iter().filter(|&&i| matrix.labels()[i] == 1).count();
        if positives == 0 || positives == rows.len() {
            return Err(AnalyticsError::SingleClassSite(site.to_string()));
        }
        per_site_rows.push(rows);
    }

    let features = (0..matrix.num_features())
        .map(|j| {
            let column = matrix.column(j);
            let per_site: Vec<SiteCorrelation> = sites
                .iter()
                .zip(&per_site_rows)
                .map(|(&site, rows)| {
                    let x: Vec<f64> = rows.iter().map(|&i| column[i]).collect();
                    let y: Vec<f64> = rows.iter().map(|&i| matrix.labels()[i] as f64).collect();
                    SiteCorrelation {
                        site,
                        r: pearson(&x, &y).ok(),
                    }
                })
                .collect();
            let direction = if per_site.iter().all(|s| s.r.is_some_and(|r| r > 0.0)) {
                Some(Direction::Positive)
            } else if per_site.iter().all(|s| s.r.is_some_and(|r| r < 0.0)) {
                Some(Direction::Negative)
            } else {
                None
            };
            FeatureSelection {
                feature: matrix.names()[j].clone(),
                per_site,
                selected: direction.is_some(),
                direction,
            }
        })
        .collect();
    Ok(SelectionReport {
        sites: sites.to_vec(),
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        // sxy = 2, sxx = 5, syy = 1
        let expected = 2.0 / 5f64.sqrt();
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 0.894).abs() < 0.001);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]), Err(AnalyticsError::UndefinedCorrelation));
        assert_eq!(pearson(&[1.0, 2.0], &[0.0, 1.0]), Err(AnalyticsError::TooShort { len: 2 }));
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[0.0, 1.0]),
            Err(AnalyticsError::LengthMismatch { left: 3, right: 2 })
        );
    }

    fn matrix(columns: Vec<(String, Vec<f64>)>, labels: Vec<u8>, sites: Vec<Site>) -> FeatureMatrix {
        let n = labels.len();
        let names = columns.iter().map(|(n, _)| n.clone()).collect();
        let values = Array2::from_shape_fn((n, columns.len()), |(i, j)| columns[j].1[i]);
        let ids = (0..n).map(|i| format!("p{i}")).collect();
        FeatureMatrix::new(names, values, labels, sites, ids).unwrap()
    }

    fn three_sites(n_per_site: usize, seed: u64) -> (Vec<u8>, Vec<Site>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut labels = Vec::new();
        let mut sites = Vec::new();
        for site in [Site::Esuth, Site::Lasuth, Site::Scdm] {
            for i in 0..n_per_site {
                labels.push(if i < 2 { (i % 2) as u8 } else { rng.random_range(0..2) });
                sites.push(site);
            }
        }
        (labels, sites)
    }

    #[test]
    fn planted_and_flipping_features() {
        let (labels, sites) = three_sites(40, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let consistent: Vec<f64> = labels.iter().map(|&l| l as f64 + rng.random_range(-0.1..0.1)).collect();
        let flipping: Vec<f64> = labels
            .iter()
            .zip(&sites)
            .map(|(&l, &s)| {
                let sign = if s == Site::Lasuth { -1.0 } else { 1.0 };
                sign * l as f64 + rng.random_range(-0.5..0.5)
            })
            .collect();
        let m = matrix(
            vec![("good".into(), consistent), ("flip".into(), flipping)],
            labels,
            sites,
        );
        let report = select_consistent_features(&m, &[Site::Esuth, Site::Lasuth, Site::Scdm]).unwrap();
        assert_eq!(report.selected(), vec!["good".to_string()]);
        assert_eq!(report.features[0].direction, Some(Direction::Positive));
        assert_eq!(report.features[1].direction, None);
    }

    #[test]
    fn constant_feature_at_one_site_is_not_selected() {
        let (labels, sites) = three_sites(20, 3);
        let f: Vec<f64> = labels
            .iter()
            .zip(&sites)
            .map(|(&l, &s)| if s == Site::Scdm { 1.0 } else { l as f64 })
            .collect();
        let m = matrix(vec![("f".into(), f)], labels, sites);
        let report = select_consistent_features(&m, &[Site::Esuth, Site::Lasuth, Site::Scdm]).unwrap();
        assert!(!report.features[0].selected);
        assert_eq!(report.features[0].per_site[2].r, None);
    }

    #[test]
    fn single_class_site_is_an_error() {
        let labels = vec![0, 1, 0, 1, 1, 1];
        let sites = vec![Site::Esuth, Site::Esuth, Site::Esuth, Site::Esuth, Site::Muhc, Site::Muhc];
        let m = matrix(vec![("f".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])], labels, sites);
        assert_eq!(
            select_consistent_features(&m, &[Site::Esuth, Site::Muhc]),
            Err(AnalyticsError::SingleClassSite("MUHC".into()))
        );
        assert_eq!(select_consistent_features(&m, &[Site::Esuth]), Err(AnalyticsError::TooFewSites(1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn positive_affine_rescaling_keeps_selection(
            seed in 0u64..1000,
            scale in 0.001f64..1000.0,
            shift in -100.0f64..100.0,
        ) {
            let (labels, sites) = three_sites(15, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 7);
            let cols: Vec<(String, Vec<f64>)> = (0..4)
                .map(|j| {
                    let w = rng.random_range(-1.0..1.0);
                    (format!("f{j}"), labels.iter().map(|&l| w * l as f64 + rng.random_range(-1.0..1.0)).collect())
                })
                .collect();
            let scaled: Vec<(String, Vec<f64>)> = cols
                .iter()
                .map(|(n, v)| (n.clone(), v.iter().map(|x| scale * x + shift).collect()))
                .collect();
            let all = [Site::Esuth, Site::Lasuth, Site::Scdm];
            let a = select_consistent_features(&matrix(cols, labels.clone(), sites.clone()), &all).unwrap();
            let b = select_consistent_features(&matrix(scaled, labels, sites), &all).unwrap();
            for (x, y) in a.features.iter().zip(&b.features) {
                prop_assert_eq!(x.selected, y.selected);
                prop_assert_eq!(x.direction, y.direction);
            }
        }
    }
}
