use std::path::{Path, PathBuf};

use rayon::prelude::*;

use cry_core::audio_io::{load_canonical, load_manifest};
use cry_core::config::PipelineConfig;
use cry_core::pipeline::{analyze_clip, feature_names, Outcome};
use cry_core::table::{write_skips, FeatureRow, FeatureTable, SkipRow};

use crate::{create, CliError};

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractSummary {
    pub rows: usize,
    pub skipped: Vec<SkipRow>,
    pub skip_report: PathBuf,
}

/// `feats.csv` -> `feats.skipped.csv`.
pub fn skip_report_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.skipped.csv"))
}

/// Extracts one feature row per recording. Recordings failing the cry
/// duration rule, or failing to load or analyse, go to the skip report and
/// the run carries on.
pub fn cmd_extract(manifest: &Path, config: &PipelineConfig, out: &Path) -> Result<ExtractSummary, CliError> {
    let entries = load_manifest(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new(""));
    let outcomes: Vec<Result<Vec<f64>, String>> = entries
        .par_iter()
        .map(|entry| {
            let path = if entry.path.is_absolute() { entry.path.clone() } else { base.join(&entry.path) };
            let clip = load_canonical(&path).map_err(|e| format!("error: {e}"))?;
            match analyze_clip(&clip, config).map_err(|e| format!("error: {e}"))? {
                Outcome::Features(f) => Ok(f.row()),
                Outcome::Skipped { reason, .. } => Err(reason),
            }
        })
        .collect();

    let mut table = FeatureTable::new(feature_names());
    let mut skipped = Vec::new();
    for (entry, outcome) in entries.into_iter().zip(outcomes) {
        match outcome {
            Ok(values) => table.rows.push(FeatureRow { entry, values }),
            Err(reason) => {
                eprintln!("skipped {}: {reason}", entry.path.display());
                skipped.push(SkipRow {
                    path: entry.path,
                    reason,
                })
            }
        }
    }
    table.write(create(out)?)?;
    let skip_report = skip_report_path(out);
    write_skips(create(&skip_report)?, &skipped)?;
    Ok(ExtractSummary {
        rows: table.rows.len(),
        skipped,
        skip_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_sits_next_to_output() {
        assert_eq!(skip_report_path(Path::new("out/feats.csv")), PathBuf::from("out/feats.skipped.csv"));
        assert_eq!(skip_report_path(Path::new("feats")), PathBuf::from("feats.skipped.csv"));
    }
}
