//! Keyword search and tag-pattern extraction over raw page markup.

mod keywords;
mod kmp;
mod tags;

pub use keywords::{
    parse_keyword_list, read_keyword_file, score_keywords, KeywordScore, KeywordSet,
    DEFAULT_PUBLIC_KEYWORDS, DEFAULT_PUBLIC_SCORE, DEFAULT_SPECIAL_KEYWORDS, DEFAULT_SPECIAL_SCORE,
};
pub use kmp::{build_failure_table, contains_any, kmp_search, KmpPattern};
pub use tags::{
    count_matching_elements, decode_entities, extract_tag_content, tokenize, AttrFilter, AttrOp,
    Tag, TagKind, TagPattern, Token,
};

pub(crate) use tags::normalize_whitespace;
