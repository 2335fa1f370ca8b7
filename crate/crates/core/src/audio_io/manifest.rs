use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ManifestError;

pub const MANIFEST_HEADER: [&str; 5] = ["path", "patient_id", "site", "period", "label"];

/// Recording site. Unrecognised site codes collapse to `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    #[serde(rename = "ESUTH")]
    Esuth,
    #[serde(rename = "LASUTH")]
    Lasuth,
    #[serde(rename = "SCDM")]
    Scdm,
    #[serde(rename = "MUHC")]
    Muhc,
    #[serde(rename = "RSUTH")]
    Rsuth,
    #[serde(rename = "OTHER")]
    Other,
}

impl Site {
    pub const ALL: [Site; 6] = [
        Site::Esuth,
        Site::Lasuth,
        Site::Scdm,
        Site::Muhc,
        Site::Rsuth,
        Site::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Site::Esuth => "ESUTH",
            Site::Lasuth => "LASUTH",
            Site::Scdm => "SCDM",
            Site::Muhc => "MUHC",
            Site::Rsuth => "RSUTH",
            Site::Other => "OTHER",
        }
    }

    /// Total mapping from a site code; unknown codes become `Other`.
    pub fn parse_lenient(s: &str) -> Site {
        let s = s.trim();
        Site::ALL
            .into_iter()
            .find(|site| site.as_str().eq_ignore_ascii_case(s))
            .unwrap_or(Site::Other)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Birth,
    Discharge,
}

impl Period {
    pub fn as_str(self) -> &'static str {
        match self {
            Period::Birth => "birth",
            Period::Discharge => "discharge",
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "birth" => Ok(Period::Birth),
            "discharge" => Ok(Period::Discharge),
            other => Err(other.to_string()),
        }
    }
}

/// Sarnat encephalopathy grade attached to a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SarnatLabel {
    Normal,
    Mild,
    Moderate,
    Severe,
    Unlabeled,
}

impl SarnatLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SarnatLabel::Normal => "normal",
            SarnatLabel::Mild => "mild",
            SarnatLabel::Moderate => "moderate",
            SarnatLabel::Severe => "severe",
            SarnatLabel::Unlabeled => "unlabeled",
        }
    }

    /// Normal is negative, any encephalopathy grade is positive, unlabeled
    /// recordings have no supervised label.
    pub fn binary(self) -> Option<u8> {
        match self {
            SarnatLabel::Normal => Some(0),
            SarnatLabel::Mild | SarnatLabel::Moderate | SarnatLabel::Severe => Some(1),
            SarnatLabel::Unlabeled => None,
        }
    }
}

impl fmt::Display for SarnatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SarnatLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(SarnatLabel::Normal),
            "mild" => Ok(SarnatLabel::Mild),
            "moderate" => Ok(SarnatLabel::Moderate),
            "severe" => Ok(SarnatLabel::Severe),
            "unlabeled" => Ok(SarnatLabel::Unlabeled),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub patient_id: String,
    pub site: Site,
    pub period: Period,
    pub label: SarnatLabel,
}

impl ManifestEntry {
    pub fn binary_label(&self) -> Option<u8> {
        self.label.binary()
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, ManifestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(file)
}

/// Parses manifest CSV. Row numbers in errors count data rows from 1.
pub fn parse_manifest(reader: impl Read) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut columns = [0usize; 5];
    for (slot, name) in columns.iter_mut().zip(MANIFEST_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or(ManifestError::MissingColumn(name))?;
    }
    let [c_path, c_patient, c_site, c_period, c_label] = columns;

    let mut entries = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let path = field(c_path);
        if path.is_empty() {
            return Err(ManifestError::EmptyPath { row });
        }
        let label = field(c_label)
            .parse::<SarnatLabel>()
            .map_err(|value| ManifestError::UnknownLabel { row, value })?;
        let period = field(c_period)
            .parse::<Period>()
            .map_err(|value| ManifestError::UnknownPeriod { row, value })?;
        entries.push(ManifestEntry {
            path: PathBuf::from(path),
            patient_id: field(c_patient).to_string(),
            site: Site::parse_lenient(field(c_site)),
            period,
            label,
        });
    }
    Ok(entries)
}

pub fn write_manifest(writer: impl Write, entries: &[ManifestEntry]) -> Result<(), ManifestError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(MANIFEST_HEADER)?;
    for e in entries {
        wtr.write_record([
            e.path.to_string_lossy().as_ref(),
            e.patient_id.as_str(),
            e.site.as_str(),
            e.period.as_str(),
            e.label.as_str(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "path,patient_id,site,period,label\n";

    fn parse(body: &str) -> Result<Vec<ManifestEntry>, ManifestError> {
        parse_manifest(format!("{HEADER}{body}").as_bytes())
    }

    #[test]
    fn binary_label_mapping() {
        let entries = parse("a.wav,p1,ESUTH,birth,normal\nb.wav,p2,LASUTH,birth,moderate\n").unwrap();
        assert_eq!(entries[0].binary_label(), Some(0));
        assert_eq!(entries[1].binary_label(), Some(1));
        assert_eq!(entries[1].site, Site::Lasuth);
        for (label, expected) in [("mild", Some(1)), ("severe", Some(1)), ("unlabeled", None)] {
            let e = parse(&format!("c.wav,p3,SCDM,discharge,{label}\n")).unwrap();
            assert_eq!(e[0].binary_label(), expected);
        }
    }

    #[test]
    fn unknown_label_names_row() {
        let err = parse("a.wav,p1,ESUTH,birth,normal\nb.wav,p2,ESUTH,birth,sick\n").unwrap_err();
        match err {
            ManifestError::UnknownLabel { row, value } => {
                assert_eq!(row, 2);
                assert_eq!(value, "sick");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_site_is_other() {
        let e = parse("a.wav,p1,Hospital X,birth,normal\n").unwrap();
        assert_eq!(e[0].site, Site::Other);
    }

    #[test]
    fn missing_column() {
        let err = parse_manifest("path,patient_id,site,label\na.wav,p1,ESUTH,normal\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, ManifestError::MissingColumn("period")));
    }

    #[test]
    fn empty_path_rejected() {
        assert!(matches!(
            parse(",p1,ESUTH,birth,normal\n"),
            Err(ManifestError::EmptyPath { row: 1 })
        ));
    }

    #[test]
    fn round_trip() {
        let entries = parse(
            "a.wav,p1,ESUTH,birth,normal\nsub/b.wav,p2,MUHC,discharge,severe\nc.wav,p3,foo,birth,unlabeled\n",
        )
        .unwrap();
        let mut buf = Vec::new();
        write_manifest(&mut buf, &entries).unwrap();
        assert_eq!(parse_manifest(buf.as_slice()).unwrap(), entries);
    }
}
