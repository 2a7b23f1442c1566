//! Keyword lists and additive keyword scoring.

use std::collections::HashSet;
use std::path::Path;

use super::kmp::{contains_any, KmpPattern};
use crate::error::{Error, Result};

pub const DEFAULT_SPECIAL_SCORE: u32 = 10;
pub const DEFAULT_PUBLIC_SCORE: u32 = 5;

/// Adult, gambling, pharmacy and aggressive-advertising vocabulary.
pub const DEFAULT_SPECIAL_KEYWORDS: &[&str] = &[
    "casino", "viagra", "cialis", "porn", "xxx", "poker", "pills", "pharmacy", "replica",
    "payday loan", "adult", "escort", "betting", "jackpot", "weight loss", "get rich",
];

/// Generic commercial vocabulary common to spam and ordinary shops alike.
pub const DEFAULT_PUBLIC_KEYWORDS: &[&str] = &[
    "free", "buy", "cheap", "discount", "offer", "best price", "click here", "win", "bonus",
    "deal", "sale", "guarantee", "limited time", "order now",
];

/// Parse a keyword list file: one keyword per line, blank lines and lines
/// starting with `#` ignored.
pub fn parse_keyword_list(src: &str) -> Vec<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn read_keyword_file(path: &Path) -> Result<Vec<String>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_keyword_list(&src))
}

/// Points earned by one text against a [`KeywordSet`], split by list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KeywordScore {
    pub special: u32,
    pub public: u32,
}

impl KeywordScore {
    pub fn total(self) -> u32 {
        self.special + self.public
    }
}

#[derive(Debug, Clone)]
pub struct KeywordSet {
    special: Vec<KmpPattern>,
    public: Vec<KmpPattern>,
    special_score: u32,
    public_score: u32,
}

impl KeywordSet {
    /// Builds a set from raw keyword strings. Duplicates (after ASCII
    /// case-folding) are dropped, keeping the first occurrence.
    pub fn new<S: AsRef<str>>(
        special: &[S],
        public: &[S],
        special_score: u32,
        public_score: u32,
    ) -> Result<Self> {
        if special_score == 0 || public_score == 0 {
            return Err(Error::Config("keyword scores must be positive".into()));
        }
        Ok(KeywordSet {
            special: compile_list("special", special)?,
            public: compile_list("public", public)?,
            special_score,
            public_score,
        })
    }

    pub fn special(&self) -> &[KmpPattern] {
        &self.special
    }

    pub fn public(&self) -> &[KmpPattern] {
        &self.public
    }

    pub fn special_score(&self) -> u32 {
        self.special_score
    }

    pub fn public_score(&self) -> u32 {
        self.public_score
    }

    /// Each distinct matched keyword scores once, however often it occurs.
    pub fn score_parts(&self, text: &str) -> KeywordScore {
        let (_, special) = contains_any(text, &self.special);
        let (_, public) = contains_any(text, &self.public);
        KeywordScore {
            special: self.special_score * special as u32,
            public: self.public_score * public as u32,
        }
    }
}

impl Default for KeywordSet {
    fn default() -> Self {
        KeywordSet::new(
            DEFAULT_SPECIAL_KEYWORDS,
            DEFAULT_PUBLIC_KEYWORDS,
            DEFAULT_SPECIAL_SCORE,
            DEFAULT_PUBLIC_SCORE,
        )
        .expect("built-in keyword lists are valid")
    }
}

fn compile_list<S: AsRef<str>>(which: &str, words: &[S]) -> Result<Vec<KmpPattern>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for w in words {
        let w = w.as_ref().trim();
        if w.is_empty() {
            continue;
        }
        let p = KmpPattern::new(w)?;
        if seen.insert(p.as_str().to_string()) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{which} keyword list is empty")));
    }
    Ok(out)
}

/// Additive score of `text`: `special_score` per distinct special keyword
/// found plus `public_score` per distinct public keyword found.
pub fn score_keywords(text: &str, keywords: &KeywordSet) -> u32 {
    keywords.score_parts(text).total()
}
