use std::path::Path;

use cry_core::analytics::{select_consistent_features, SelectionReport};
use cry_core::audio_io::Site;
use cry_core::table::{FeatureTable, Split};

use crate::train::split_lookup;
use crate::{open, write_json, CliError};

/// Site-consistency selection over every labelled row, or over the train and
/// val rows when a split file is given.
pub fn cmd_select(
    features: &Path,
    sites: &[Site],
    split: Option<&Path>,
    out: &Path,
) -> Result<SelectionReport, CliError> {
    let table = FeatureTable::read(open(features)?)?;
    let matrix = match split {
        Some(p) => {
            let lookup = split_lookup(p, &table)?;
            table.to_matrix(None, |r| lookup[&r.entry.path] != Split::Test)?
        }
        None => table.to_matrix(None, |_| true)?,
    };
    let report = select_consistent_features(&matrix, sites)?;
    write_json(out, &report)?;
    Ok(report)
}
