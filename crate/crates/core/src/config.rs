//! Application configuration (JSON) and the ready-to-use [`Extractor`] built from it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chaid::ChaidConfig;
use crate::error::{Error, Result};
use crate::features::{extract_record, Blacklist, ExtractConfig, PageDocument, ThresholdTable};
use crate::pattern_match::{
    read_keyword_file, KeywordSet, TagPattern, DEFAULT_PUBLIC_KEYWORDS, DEFAULT_PUBLIC_SCORE,
    DEFAULT_SPECIAL_KEYWORDS, DEFAULT_SPECIAL_SCORE,
};
use crate::record::SiteRecord;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scores {
    pub special: u32,
    pub public: u32,
}

impl Default for Scores {
    fn default() -> Self {
        Scores {
            special: DEFAULT_SPECIAL_SCORE,
            public: DEFAULT_PUBLIC_SCORE,
        }
    }
}

/// Everything a pipeline run needs. Missing keys take built-in defaults;
/// relative file paths are resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub blacklist: Option<PathBuf>,
    pub special_keywords: Option<PathBuf>,
    pub public_keywords: Option<PathBuf>,
    pub thresholds: ThresholdTable,
    pub scores: Scores,
    pub meta_tags: Vec<String>,
    pub post_markers: Vec<String>,
    pub chaid: ChaidConfig,
    pub seed: u64,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            blacklist: None,
            special_keywords: None,
            public_keywords: None,
            thresholds: ThresholdTable::default(),
            scores: Scores::default(),
            meta_tags: vec!["keywords".into(), "description".into()],
            post_markers: vec!["article".into(), "*[class*=post]".into(), "*[id*=post]".into()],
            chaid: ChaidConfig::default(),
            seed: DEFAULT_SEED,
        }
    }
}

impl AppConfig {
    pub fn from_json(src: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: AppConfig =
            serde_json::from_str(src).map_err(|e| Error::Config(format!("config: {e}")))?;
        for p in [
            &mut cfg.blacklist,
            &mut cfg.special_keywords,
            &mut cfg.public_keywords,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AppConfig::from_json(&src, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        self.chaid.validate()?;
        if self.scores.special == 0 || self.scores.public == 0 {
            return Err(Error::Config("scores must be positive".into()));
        }
        self.parsed_post_markers()?;
        for p in [&self.blacklist, &self.special_keywords, &self.public_keywords]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    fn parsed_post_markers(&self) -> Result<Vec<TagPattern>> {
        self.post_markers
            .iter()
            .map(|m| {
                m.parse()
                    .map_err(|e| Error::Config(format!("post marker {m:?}: {e}")))
            })
            .collect()
    }

    /// Loads the referenced keyword and blacklist files.
    pub fn extractor(&self) -> Result<Extractor> {
        let special = match &self.special_keywords {
            Some(p) => read_keyword_file(p)?,
            None => DEFAULT_SPECIAL_KEYWORDS.iter().map(|s| s.to_string()).collect(),
        };
        let public = match &self.public_keywords {
            Some(p) => read_keyword_file(p)?,
            None => DEFAULT_PUBLIC_KEYWORDS.iter().map(|s| s.to_string()).collect(),
        };
        let keywords = KeywordSet::new(&special, &public, self.scores.special, self.scores.public)?;
        let blacklist = match &self.blacklist {
            Some(p) => Blacklist::load(p)?,
            None => Blacklist::default(),
        };
        Ok(Extractor {
            blacklist,
            keywords,
            config: ExtractConfig {
                thresholds: self.thresholds.clone(),
                meta_names: self.meta_tags.clone(),
                post_markers: self.parsed_post_markers()?,
            },
        })
    }
}

/// Shared, read-only extraction context.
#[derive(Debug, Clone, Default)]
pub struct Extractor {
    pub blacklist: Blacklist,
    pub keywords: KeywordSet,
    pub config: ExtractConfig,
}

impl Extractor {
    pub fn extract(&self, page: &PageDocument) -> Result<SiteRecord> {
        extract_record(page, &self.blacklist, &self.keywords, &self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        let cfg = AppConfig::from_json("{}", Path::new(".")).unwrap();
        assert_eq!(cfg, AppConfig::default());
        let ex = cfg.extractor().unwrap();
        assert_eq!(ex.keywords.special_score(), 10);
        assert_eq!(ex.keywords.public_score(), 5);
    }

    #[test]
    fn partial_overrides() {
        let cfg = AppConfig::from_json(
            r#"{"thresholds": {"count_of_post": [2, 4, 8, 16]},
                "scores": {"special": 20, "public": 1},
                "chaid": {"statistic": "likelihood-ratio", "max_depth": 2}}"#,
            Path::new("."),
        )
        .unwrap();
        assert_eq!(cfg.thresholds.count_of_post.cuts(), [2, 4, 8, 16]);
        assert_eq!(cfg.thresholds.meta_tag.cuts(), [1, 10, 20, 40]);
        assert_eq!(cfg.chaid.max_depth, 2);
        assert_eq!(cfg.chaid.alpha_split, 0.05);
    }

    #[test]
    fn invalid_configs() {
        let base = Path::new(".");
        for src in [
            r#"{"thresholds": {"meta_tag": [1, 1, 2, 3]}}"#,
            r#"{"scores": {"special": 0, "public": 5}}"#,
            r#"{"chaid": {"alpha_split": 1.5}}"#,
            r#"{"post_markers": ["[x]"]}"#,
            r#"{"blacklist": "/definitely/not/here.txt"}"#,
            r#"{"unknown_key": 1}"#,
            "not json",
        ] {
            assert!(
                matches!(AppConfig::from_json(src, base), Err(Error::Config(_))),
                "{src}"
            );
        }
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bl.txt"), "bad.com\n").unwrap();
        std::fs::write(dir.path().join("special.txt"), "casino\n").unwrap();
        std::fs::write(
            dir.path().join("cfg.json"),
            r#"{"blacklist": "bl.txt", "special_keywords": "special.txt"}"#,
        )
        .unwrap();
        let cfg = AppConfig::load(&dir.path().join("cfg.json")).unwrap();
        let ex = cfg.extractor().unwrap();
        assert!(ex.blacklist.contains_host("www.bad.com"));
        assert_eq!(ex.keywords.special().len(), 1);
    }
}
