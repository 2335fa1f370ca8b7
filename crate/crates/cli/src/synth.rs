use std::path::Path;

use cry_core::synthcry::{make_corpus, CorpusProfile, CorpusSummary};

use crate::{read_json, CliError};

/// A preset name (`reported`, `separated`, `identical`) or a JSON file.
pub fn resolve_profile(profile: &str) -> Result<CorpusProfile, CliError> {
    if let Some(p) = CorpusProfile::preset(profile) {
        return Ok(p);
    }
    let path = Path::new(profile);
    if !path.is_file() {
        return Err(CliError::UnknownProfile(profile.to_string()));
    }
    read_json(path)
}

pub fn cmd_synth(
    profile: &CorpusProfile,
    out: &Path,
    seed: u64,
) -> Result<CorpusSummary, CliError> {
    profile.validate()?;
    Ok(make_corpus(out, profile, seed)?)
}
