//! Site records: the eight categorical attributes of one website plus its label.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-step ordinal scale used by every graded attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    VeryMin,
    Min,
    Mid,
    Max,
    VeryMax,
}

impl Level {
    pub const ALL: [Level; 5] = [Level::VeryMin, Level::Min, Level::Mid, Level::Max, Level::VeryMax];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Level> {
        Level::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::VeryMin => "very-min",
            Level::Min => "min",
            Level::Mid => "mid",
            Level::Max => "max",
            Level::VeryMax => "very-max",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Level::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("illegal level {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Spam,
    #[serde(rename = "nonspam")]
    NonSpam,
    #[serde(rename = "unknown")]
    Unlabeled,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Spam => "spam",
            Label::NonSpam => "nonspam",
            Label::Unlabeled => "unknown",
        }
    }

    pub fn is_labeled(self) -> bool {
        self != Label::Unlabeled
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spam" => Ok(Label::Spam),
            "nonspam" | "non-spam" => Ok(Label::NonSpam),
            "unknown" | "unlabeled" | "" => Ok(Label::Unlabeled),
            other => Err(Error::Validation(format!("illegal label {other:?}"))),
        }
    }
}

/// Whether an attribute's levels carry an order. Ordinal predictors only merge
/// adjacent levels during CHAID grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Nominal,
    Ordinal,
}

/// The eight dataset attributes, in schema order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    BlackList,
    FeatureOfUrl,
    MetaTag,
    KeyWordSpecial,
    KeyWordPublic,
    CountOfInternalLink,
    CountExternalLink,
    CountOfPost,
}

impl Attribute {
    pub const ALL: [Attribute; 8] = [
        Attribute::BlackList,
        Attribute::FeatureOfUrl,
        Attribute::MetaTag,
        Attribute::KeyWordSpecial,
        Attribute::KeyWordPublic,
        Attribute::CountOfInternalLink,
        Attribute::CountExternalLink,
        Attribute::CountOfPost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::BlackList => "black_list",
            Attribute::FeatureOfUrl => "feature_of_url",
            Attribute::MetaTag => "meta_tag",
            Attribute::KeyWordSpecial => "key_word_special",
            Attribute::KeyWordPublic => "key_word_public",
            Attribute::CountOfInternalLink => "count_of_internal_link",
            Attribute::CountExternalLink => "count_external_link",
            Attribute::CountOfPost => "count_of_post",
        }
    }

    pub fn kind(self) -> AttributeKind {
        match self {
            Attribute::BlackList => AttributeKind::Nominal,
            _ => AttributeKind::Ordinal,
        }
    }

    /// Number of legal category codes.
    pub fn cardinality(self) -> usize {
        match self {
            Attribute::BlackList => 2,
            _ => Level::ALL.len(),
        }
    }

    /// Display name of category code `code`.
    pub fn level_name(self, code: usize) -> &'static str {
        match self {
            Attribute::BlackList => {
                if code == 0 {
                    "no"
                } else {
                    "yes"
                }
            }
            _ => Level::from_index(code).map(Level::as_str).unwrap_or("?"),
        }
    }

    pub fn parse_level(self, s: &str) -> Result<usize> {
        match self {
            Attribute::BlackList => match s {
                "no" => Ok(0),
                "yes" => Ok(1),
                other => Err(Error::Validation(format!("illegal black_list value {other:?}"))),
            },
            _ => s.parse::<Level>().map(Level::index),
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Schema(s.to_string()))
    }
}

/// One dataset row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub url: String,
    pub black_list: bool,
    pub feature_of_url: Level,
    pub meta_tag: Level,
    pub key_word_special: Level,
    pub key_word_public: Level,
    pub count_of_internal_link: Level,
    pub count_external_link: Level,
    pub count_of_post: Level,
    pub label: Label,
}

impl SiteRecord {
    /// A record with every graded attribute at `very-min`.
    pub fn blank(url: impl Into<String>) -> Self {
        SiteRecord {
            url: url.into(),
            black_list: false,
            feature_of_url: Level::VeryMin,
            meta_tag: Level::VeryMin,
            key_word_special: Level::VeryMin,
            key_word_public: Level::VeryMin,
            count_of_internal_link: Level::VeryMin,
            count_external_link: Level::VeryMin,
            count_of_post: Level::VeryMin,
            label: Label::Unlabeled,
        }
    }

    /// Category code of `attr`: 0/1 for black_list, the level index otherwise.
    pub fn code(&self, attr: Attribute) -> usize {
        match attr {
            Attribute::BlackList => self.black_list as usize,
            other => self.level(other).expect("graded attribute").index(),
        }
    }

    pub fn level(&self, attr: Attribute) -> Option<Level> {
        Some(match attr {
            Attribute::BlackList => return None,
            Attribute::FeatureOfUrl => self.feature_of_url,
            Attribute::MetaTag => self.meta_tag,
            Attribute::KeyWordSpecial => self.key_word_special,
            Attribute::KeyWordPublic => self.key_word_public,
            Attribute::CountOfInternalLink => self.count_of_internal_link,
            Attribute::CountExternalLink => self.count_external_link,
            Attribute::CountOfPost => self.count_of_post,
        })
    }

    /// Set attribute `attr` from its category code.
    pub fn set_code(&mut self, attr: Attribute, code: usize) {
        if attr == Attribute::BlackList {
            self.black_list = code != 0;
            return;
        }
        let level = Level::from_index(code).expect("level code in range");
        match attr {
            Attribute::BlackList => unreachable!(),
            Attribute::FeatureOfUrl => self.feature_of_url = level,
            Attribute::MetaTag => self.meta_tag = level,
            Attribute::KeyWordSpecial => self.key_word_special = level,
            Attribute::KeyWordPublic => self.key_word_public = level,
            Attribute::CountOfInternalLink => self.count_of_internal_link = level,
            Attribute::CountExternalLink => self.count_external_link = level,
            Attribute::CountOfPost => self.count_of_post = level,
        }
    }
}
