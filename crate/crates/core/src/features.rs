//! Page → [`SiteRecord`] feature extraction.
//!
//! Raw scores and counts are computed first ([`RawFeatures`]) and then mapped
//! onto the five-level ordinal scale with per-attribute thresholds.

use std::collections::BTreeSet;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{Error, Result};
use crate::pattern_match::{
    count_matching_elements, decode_entities, extract_tag_content, normalize_whitespace, tokenize,
    AttrOp, KeywordSet, TagKind, TagPattern, Token,
};
use crate::record::{Attribute, Level, SiteRecord};

/// One page of an offline corpus.
#[derive(Debug, Clone)]
pub struct PageDocument {
    pub url: String,
    pub html: String,
    pub fetched_from: PathBuf,
}

/// Parses an absolute URL that must carry a host.
pub fn parse_url(url: &str) -> Result<Url> {
    let parsed = Url::parse(url.trim()).map_err(|e| Error::InvalidUrl {
        url: url.to_string(),
        reason: e.to_string(),
    })?;
    if parsed.host_str().is_none_or(str::is_empty) {
        return Err(Error::InvalidUrl {
            url: url.to_string(),
            reason: "no host".into(),
        });
    }
    Ok(parsed)
}

fn host_of(url: &Url) -> String {
    url.host_str()
        .unwrap_or_default()
        .trim_end_matches('.')
        .to_ascii_lowercase()
}

/// Second-level labels under which registrations happen one level deeper
/// (`example.co.uk`).
const SECOND_LEVEL_SUFFIXES: &[&str] = &["co", "com", "net", "org", "gov", "edu", "ac", "or", "ne"];

/// Heuristic registrable domain: the last two labels, or three when the
/// host ends in `<sld>.<cc>` such as `co.uk`. IP literals are returned as is.
pub fn registrable_domain(host: &str) -> &str {
    let host = host.trim_end_matches('.');
    let bare = host.trim_start_matches('[').trim_end_matches(']');
    if bare.parse::<IpAddr>().is_ok() {
        return host;
    }
    let labels: Vec<&str> = host.split('.').collect();
    if labels.len() <= 2 {
        return host;
    }
    let n = labels.len();
    let keep = if labels[n - 1].len() == 2 && SECOND_LEVEL_SUFFIXES.contains(&labels[n - 2]) {
        3
    } else {
        2
    };
    let skip: usize = labels[..n - keep].iter().map(|l| l.len() + 1).sum();
    &host[skip.min(host.len())..]
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Blacklist {
    hosts: BTreeSet<String>,
}

impl Blacklist {
    pub fn new<I, S>(hosts: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for h in hosts {
            let h = h.as_ref().trim().trim_end_matches('.').to_ascii_lowercase();
            if h.is_empty() || h.contains("://") || h.contains('/') || h.contains(char::is_whitespace)
            {
                return Err(Error::Config(format!("bad blacklist entry {h:?}")));
            }
            set.insert(h);
        }
        Ok(Blacklist { hosts: set })
    }

    /// One domain per line, `#` comments.
    pub fn parse(src: &str) -> Result<Self> {
        Blacklist::new(
            src.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty()),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Blacklist::parse(&src)
    }

    pub fn len(&self) -> usize {
        self.hosts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hosts.is_empty()
    }

    /// True when `host` or any parent domain of it is listed.
    pub fn contains_host(&self, host: &str) -> bool {
        let mut h = host.trim_end_matches('.');
        loop {
            if self.hosts.contains(h) {
                return true;
            }
            match h.find('.') {
                Some(dot) => h = &h[dot + 1..],
                None => return false,
            }
        }
    }
}

pub fn check_blacklist(url: &str, blacklist: &Blacklist) -> Result<bool> {
    let url = parse_url(url)?;
    Ok(blacklist.contains_host(&host_of(&url)))
}

/// Keyword score of the URL's host and path.
pub fn score_url(url: &str, keywords: &KeywordSet) -> Result<u32> {
    let url = parse_url(url)?;
    let text = format!("{}{}", host_of(&url), url.path()).to_ascii_lowercase();
    Ok(keywords.score_parts(&text).total())
}

/// Keyword score of the concatenated `<meta name=...>` payloads for each name
/// in `meta_names`.
pub fn score_meta<S: AsRef<str>>(html: &str, keywords: &KeywordSet, meta_names: &[S]) -> u32 {
    let mut payload = Vec::new();
    for name in meta_names {
        let pattern = TagPattern {
            tag_name: Some("meta".into()),
            attribute_filter: None,
        }
        .with_attr("name", name.as_ref(), AttrOp::Equals);
        payload.extend(extract_tag_content(html, &pattern));
    }
    let text = decode_entities(&payload.join(" ")).to_ascii_lowercase();
    keywords.score_parts(&text).total()
}

/// Visible text of the page body: tags stripped, script/style dropped,
/// whitespace collapsed, ASCII-lowercased. Without a `<body>` the whole
/// document counts as body.
pub fn extract_body_text(html: &str) -> String {
    let tokens = tokenize(html);
    let start = tokens
        .iter()
        .position(|t| matches!(t, Token::Tag(tag) if tag.name == "body" && tag.kind != TagKind::Close))
        .map_or(0, |i| i + 1);
    let mut parts = Vec::new();
    for tok in &tokens[start..] {
        match tok {
            Token::Tag(tag) if tag.name == "body" && tag.kind == TagKind::Close => break,
            Token::Text(s) => parts.push(decode_entities(s)),
            _ => {}
        }
    }
    normalize_whitespace(&parts.join(" ")).to_ascii_lowercase()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounts {
    pub internal: usize,
    pub external: usize,
}

/// Classifies every `<a href>`: internal when it resolves to the base URL's
/// registrable domain, external for any other http(s) target, ignored otherwise.
pub fn count_links(html: &str, base_url: &str) -> Result<LinkCounts> {
    let base = parse_url(base_url)?;
    let base_host = host_of(&base);
    let base_domain = registrable_domain(&base_host);
    let mut counts = LinkCounts::default();
    for tok in tokenize(html) {
        let Token::Tag(tag) = tok else { continue };
        if tag.name != "a" || tag.kind == TagKind::Close {
            continue;
        }
        let Some(href) = tag.attr("href") else { continue };
        let Ok(target) = base.join(href.trim()) else { continue };
        if !matches!(target.scheme(), "http" | "https") {
            continue;
        }
        if registrable_domain(&host_of(&target)) == base_domain {
            counts.internal += 1;
        } else {
            counts.external += 1;
        }
    }
    Ok(counts)
}

pub fn default_post_markers() -> Vec<TagPattern> {
    ["article", "*[class*=post]", "*[id*=post]"]
        .iter()
        .map(|s| s.parse().expect("built-in marker"))
        .collect()
}

/// Number of elements matching any post marker; each element counts once.
pub fn count_posts(html: &str, markers: &[TagPattern]) -> usize {
    count_matching_elements(html, markers)
}

/// Four strictly ascending cut points splitting values into five levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u32; 4]", into = "[u32; 4]")]
pub struct Thresholds([u32; 4]);

impl Thresholds {
    pub fn new(cuts: [u32; 4]) -> Result<Self> {
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "thresholds must be strictly ascending, got {cuts:?}"
            )));
        }
        Ok(Thresholds(cuts))
    }

    pub fn cuts(&self) -> [u32; 4] {
        self.0
    }
}

impl TryFrom<[u32; 4]> for Thresholds {
    type Error = Error;

    fn try_from(cuts: [u32; 4]) -> Result<Self> {
        Thresholds::new(cuts)
    }
}

impl From<Thresholds> for [u32; 4] {
    fn from(t: Thresholds) -> Self {
        t.0
    }
}

pub fn discretize(value: u32, thresholds: &Thresholds) -> Level {
    let bucket = thresholds.0.iter().take_while(|&&t| value >= t).count();
    Level::ALL[bucket]
}

/// Per-attribute discretization cut points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdTable {
    pub feature_of_url: Thresholds,
    pub meta_tag: Thresholds,
    pub key_word_special: Thresholds,
    pub key_word_public: Thresholds,
    pub count_of_internal_link: Thresholds,
    pub count_external_link: Thresholds,
    pub count_of_post: Thresholds,
}

impl Default for ThresholdTable {
    fn default() -> Self {
        let keyword = Thresholds([1, 10, 20, 40]);
        let links = Thresholds([5, 15, 40, 100]);
        ThresholdTable {
            feature_of_url: keyword,
            meta_tag: keyword,
            key_word_special: keyword,
            key_word_public: keyword,
            count_of_internal_link: links,
            count_external_link: links,
            count_of_post: Thresholds([1, 5, 15, 40]),
        }
    }
}

impl ThresholdTable {
    pub fn get(&self, attr: Attribute) -> Option<&Thresholds> {
        Some(match attr {
            Attribute::BlackList => return None,
            Attribute::FeatureOfUrl => &self.feature_of_url,
            Attribute::MetaTag => &self.meta_tag,
            Attribute::KeyWordSpecial => &self.key_word_special,
            Attribute::KeyWordPublic => &self.key_word_public,
            Attribute::CountOfInternalLink => &self.count_of_internal_link,
            Attribute::CountExternalLink => &self.count_external_link,
            Attribute::CountOfPost => &self.count_of_post,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub thresholds: ThresholdTable,
    /// `<meta name=...>` values whose content feeds the meta score.
    pub meta_names: Vec<String>,
    pub post_markers: Vec<TagPattern>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            thresholds: ThresholdTable::default(),
            meta_names: vec!["keywords".into(), "description".into()],
            post_markers: default_post_markers(),
        }
    }
}

/// Undiscretized measurements, one per dataset attribute.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RawFeatures {
    pub blacklisted: bool,
    pub url_score: u32,
    pub meta_score: u32,
    pub key_special_score: u32,
    pub key_public_score: u32,
    pub internal_links: u32,
    pub external_links: u32,
    pub post_count: u32,
}

impl RawFeatures {
    pub fn measure(
        page: &PageDocument,
        blacklist: &Blacklist,
        keywords: &KeywordSet,
        config: &ExtractConfig,
    ) -> Result<Self> {
        let blacklisted = check_blacklist(&page.url, blacklist)?;
        let url_score = score_url(&page.url, keywords)?;
        let links = count_links(&page.html, &page.url)?;
        let body = extract_body_text(&page.html);
        let body_score = keywords.score_parts(&body);
        Ok(RawFeatures {
            blacklisted,
            url_score,
            meta_score: score_meta(&page.html, keywords, &config.meta_names),
            key_special_score: body_score.special,
            key_public_score: body_score.public,
            internal_links: saturate(links.internal),
            external_links: saturate(links.external),
            post_count: saturate(count_posts(&page.html, &config.post_markers)),
        })
    }

    pub fn to_record(&self, url: &str, thresholds: &ThresholdTable) -> SiteRecord {
        let d = discretize;
        SiteRecord {
            url: url.to_string(),
            black_list: self.blacklisted,
            feature_of_url: d(self.url_score, &thresholds.feature_of_url),
            meta_tag: d(self.meta_score, &thresholds.meta_tag),
            key_word_special: d(self.key_special_score, &thresholds.key_word_special),
            key_word_public: d(self.key_public_score, &thresholds.key_word_public),
            count_of_internal_link: d(self.internal_links, &thresholds.count_of_internal_link),
            count_external_link: d(self.external_links, &thresholds.count_external_link),
            count_of_post: d(self.post_count, &thresholds.count_of_post),
            label: crate::record::Label::Unlabeled,
        }
    }
}

fn saturate(n: usize) -> u32 {
    u32::try_from(n).unwrap_or(u32::MAX)
}

/// Measures and discretizes one page. The label is left unlabeled.
pub fn extract_record(
    page: &PageDocument,
    blacklist: &Blacklist,
    keywords: &KeywordSet,
    config: &ExtractConfig,
) -> Result<SiteRecord> {
    let raw = RawFeatures::measure(page, blacklist, keywords, config)?;
    Ok(raw.to_record(&page.url, &config.thresholds))
}
