use std::fmt::Write;
use std::path::Path;

use cry_core::analytics::SelectionReport;

use crate::{read_json, CliError, Metrics};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

/// Plain-text summary of a metrics file and, optionally, a selection file.
pub fn cmd_report(metrics: Option<&Path>, selection: Option<&Path>) -> Result<String, CliError> {
    let mut out = String::new();
    if let Some(path) = metrics {
        let m: Metrics = read_json(path)?;
        let _ = writeln!(out, "feature set      {}", m.feature_set.name());
        let _ = writeln!(out, "features         {}", m.features.len());
        let _ = writeln!(out, "train+val rows   {}", m.n_train);
        let _ = writeln!(out, "test rows        {}", m.n_test);
        let _ = writeln!(out, "best C           {}", m.best_reg_strength);
        let _ = writeln!(out, "test AUC         {:.3}", m.auc);
        let _ = writeln!(out, "sens @ spec 0.8  {:.3}", m.sens_at_spec80);
        for (site, auc) in &m.per_site_auc {
            let _ = writeln!(out, "  {site:<14} {}", opt(*auc));
        }
        for (c, auc) in m.cv.grid.iter().zip(&m.cv.mean_auc) {
            let _ = writeln!(out, "  cv C={c:<10} mean AUC {auc:.3}");
        }
    }
    if let Some(path) = selection {
        let s: SelectionReport = read_json(path)?;
        let selected = s.features.iter().filter(|f| f.selected).count();
        let _ = writeln!(out, "selected {selected} of {} features", s.features.len());
        for f in s.features.iter().filter(|f| f.selected) {
            let rs: Vec<String> = f.per_site.iter().map(|c| format!("{}={}", c.site, opt(c.r))).collect();
            let dir = f.direction.map_or("?", |d| match d {
                cry_core::analytics::Direction::Positive => "+",
                cry_core::analytics::Direction::Negative => "-",
            });
            let _ = writeln!(out, "  {dir} {:<40} {}", f.feature, rs.join(" "));
        }
    }
    Ok(out)
}
