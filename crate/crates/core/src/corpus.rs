//! Offline corpus ingestion: a directory of HTML files plus `manifest.csv`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::Extractor;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::PageDocument;
use crate::record::{Label, SiteRecord};

pub const MANIFEST_NAME: &str = "manifest.csv";
const MANIFEST_HEADER: [&str; 3] = ["file", "url", "label"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub url: String,
    pub label: Label,
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join(MANIFEST_NAME);
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut entries = Vec::new();
    let mut saw_header = false;
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(i as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(i as u64 + 1, |p| p.line());
        if !saw_header {
            if row.iter().ne(MANIFEST_HEADER) {
                return Err(Error::Parse {
                    line,
                    message: "manifest header must be file,url,label".into(),
                });
            }
            saw_header = true;
            continue;
        }
        if row.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 columns, found {}", row.len()),
            });
        }
        let label = match &row[2] {
            "spam" => Label::Spam,
            "nonspam" => Label::NonSpam,
            "unknown" => Label::Unlabeled,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("label must be spam, nonspam or unknown, not {other:?}"),
                })
            }
        };
        entries.push(ManifestEntry {
            file: row[0].to_string(),
            url: row[1].to_string(),
            label,
        });
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: "empty manifest".into(),
        });
    }
    Ok(entries)
}

#[derive(Debug, Clone, Default)]
pub struct CorpusExtraction {
    /// One record per readable manifest row, in manifest order.
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

enum PageOutcome {
    Record(SiteRecord, Option<String>),
    Skipped(String),
}

/// Extracts every manifest page in parallel. Unreadable files are skipped and
/// pages whose features cannot be computed get an all-`very-min` record; both
/// produce a warning and neither aborts the run.
pub fn extract_corpus(dir: &Path, extractor: &Extractor) -> Result<CorpusExtraction> {
    let entries = read_manifest(dir)?;
    let outcomes: Vec<PageOutcome> = entries
        .par_iter()
        .map(|e| {
            let path: PathBuf = dir.join(&e.file);
            let html = match std::fs::read(&path) {
                Ok(bytes) => String::from_utf8_lossy(&bytes).into_owned(),
                Err(err) => return PageOutcome::Skipped(format!("{}: {err}", path.display())),
            };
            let page = PageDocument {
                url: e.url.clone(),
                html,
                fetched_from: path,
            };
            let (mut record, warning) = match extractor.extract(&page) {
                Ok(r) => (r, None),
                Err(err) => (SiteRecord::blank(&e.url), Some(format!("{}: {err}", e.file))),
            };
            record.label = e.label;
            PageOutcome::Record(record, warning)
        })
        .collect();

    let mut out = CorpusExtraction::default();
    let mut records = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            PageOutcome::Record(r, w) => {
                records.push(r);
                out.warnings.extend(w);
            }
            PageOutcome::Skipped(w) => out.warnings.push(w),
        }
    }
    out.dataset = Dataset::new(records);
    Ok(out)
}
