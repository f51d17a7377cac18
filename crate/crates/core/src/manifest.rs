//! Plain-text run manifest: one `key=value` pair per line, sorted by key.
//!
//! Input digests are SHA-256 over the file's non-empty lines sorted
//! bytewise, each terminated by `\n`. They identify the content of an input
//! file independently of its row order.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, LoadExclusion, ALIASES_FILE, INPUT_FILES};
use crate::excellence::ExcellenceMap;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("manifest line {line}: key {key:?} repeated")]
    DuplicateKey { line: usize, key: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunManifest {
    entries: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Config snapshot, entity counts and tool version for a finished run.
    pub fn for_run(map: &ExcellenceMap, corpus: &Corpus) -> Self {
        let mut m = Self::new();
        for (k, v) in map.config.to_pairs() {
            m.insert(format!("config.{k}"), v);
        }
        let report = corpus.load_report();
        let counts = [
            ("categories", corpus.categories().len()),
            ("journals", corpus.journals().len()),
            ("impact_factors", corpus.impact_factor_count()),
            ("organizations", corpus.organizations().len()),
            ("researchers", corpus.researchers().len()),
            ("publications", corpus.publications().len()),
            ("excluded_out_of_window", report.count(LoadExclusion::OutOfWindow)),
            ("excluded_doc_type", report.count(LoadExclusion::DocTypeOther)),
            ("excluded_missing_if", map.weights.excluded().len()),
            ("links", map.authorships.links().len()),
            ("unresolved_mentions", map.authorships.unresolved().len()),
            ("top_scientists", map.top_scientists.len()),
            ("tsc", map.tsc_count()),
            ("coe", map.coe_count()),
        ];
        for (k, v) in counts {
            m.insert(format!("count.{k}"), v.to_string());
        }
        m.insert("tool.name", env!("CARGO_PKG_NAME"));
        m.insert("tool.version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Adds `input.<file>.sha256` for every input file present in `dir`.
    pub fn add_input_digests(&mut self, dir: &Path) -> std::io::Result<()> {
        for name in INPUT_FILES.iter().chain([&ALIASES_FILE]) {
            let path = dir.join(name);
            if !path.exists() {
                continue;
            }
            let bytes = std::fs::read(&path).map_err(|e| {
                std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))
            })?;
            self.insert(format!("input.{name}.sha256"), canonical_digest(&bytes));
        }
        Ok(())
    }

    /// Seconds since the Unix epoch.
    pub fn set_timestamp(&mut self, secs: u64) {
        self.insert("timestamp", secs.to_string());
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut m = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ManifestError::Syntax { line: i + 1 })?;
            if m.entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ManifestError::DuplicateKey {
                    line: i + 1,
                    key: k.to_string(),
                });
            }
        }
        Ok(m)
    }
}

/// Row-order independent SHA-256 of a line-oriented file, as hex.
pub fn canonical_digest(bytes: &[u8]) -> String {
    let mut lines: Vec<&[u8]> = bytes
        .split(|b| *b == b'\n')
        .map(|l| l.strip_suffix(b"\r").unwrap_or(l))
        .filter(|l| !l.is_empty())
        .collect();
    lines.sort_unstable();
    let mut h = Sha256::new();
    for l in lines {
        h.update(l);
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// `SOURCE_DATE_EPOCH` when set to an integer, otherwise the current time.
pub fn build_timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}
