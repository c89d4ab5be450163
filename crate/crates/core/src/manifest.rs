//! Dataset manifests: a CSV file with header
//! `video_id,detections,label,split,signer_id`.
//!
//! `detections` is a JSON-lines file path, relative paths resolve against
//! the manifest's directory. `label` and `signer_id` may be empty.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub video_id: String,
    pub detections: PathBuf,
    #[serde(default, deserialize_with = "empty_as_none")]
    pub label: Option<String>,
    pub split: Split,
    #[serde(default, deserialize_with = "empty_as_none")]
    pub signer_id: Option<String>,
}

fn empty_as_none<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    Ok(s.filter(|s| !s.trim().is_empty()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManifestIssue {
    DuplicateId(String),
    MissingFile {
        video_id: String,
        path: PathBuf,
    },
    /// A signer appears in more than one split.
    SignerLeakage {
        signer_id: String,
        splits: Vec<Split>,
    },
}

impl fmt::Display for ManifestIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifestIssue::DuplicateId(id) => write!(f, "duplicate video id `{id}`"),
            ManifestIssue::MissingFile { video_id, path } => {
                write!(f, "video `{video_id}`: {} not found", path.display())
            }
            ManifestIssue::SignerLeakage { signer_id, splits } => {
                let names: Vec<String> = splits.iter().map(Split::to_string).collect();
                write!(
                    f,
                    "signer `{signer_id}` appears in splits {}",
                    names.join(", ")
                )
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("reading manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory relative detection paths resolve against.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base_dir).map_err(|source| ManifestError::Csv {
            path: path.to_owned(),
            source,
        })
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self, csv::Error> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let entries = rdr
            .deserialize()
            .collect::<Result<Vec<ManifestEntry>, _>>()?;
        Ok(Self { entries, base_dir })
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["video_id", "detections", "label", "split", "signer_id"])?;
        for e in &self.entries {
            w.write_record([
                e.video_id.as_str(),
                &e.detections.to_string_lossy(),
                e.label.as_deref().unwrap_or(""),
                &e.split.to_string(),
                e.signer_id.as_deref().unwrap_or(""),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn save(&self, path: &Path) -> Result<(), ManifestError> {
        let text = self.to_csv().map_err(|source| ManifestError::Csv {
            path: path.to_owned(),
            source,
        })?;
        std::fs::write(path, text).map_err(|source| ManifestError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.detections.is_absolute() {
            entry.detections.clone()
        } else {
            self.base_dir.join(&entry.detections)
        }
    }

    /// Duplicate ids and missing detection files.
    pub fn structural_issues(&self) -> Vec<ManifestIssue> {
        let mut issues = Vec::new();
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.video_id.as_str()) {
                issues.push(ManifestIssue::DuplicateId(e.video_id.clone()));
            }
            let path = self.resolve(e);
            if !path.is_file() {
                issues.push(ManifestIssue::MissingFile {
                    video_id: e.video_id.clone(),
                    path,
                });
            }
        }
        issues
    }

    /// Signers present in more than one split, sorted by signer id.
    pub fn leakage(&self) -> Vec<ManifestIssue> {
        let mut splits: BTreeMap<&str, BTreeSet<Split>> = BTreeMap::new();
        for e in &self.entries {
            if let Some(s) = &e.signer_id {
                splits.entry(s).or_default().insert(e.split);
            }
        }
        splits
            .into_iter()
            .filter(|(_, set)| set.len() > 1)
            .map(|(s, set)| ManifestIssue::SignerLeakage {
                signer_id: s.to_owned(),
                splits: set.into_iter().collect(),
            })
            .collect()
    }

    pub fn validate(&self) -> Vec<ManifestIssue> {
        let mut all = self.structural_issues();
        all.extend(self.leakage());
        all
    }
}
