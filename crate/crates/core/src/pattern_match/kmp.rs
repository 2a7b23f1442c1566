//! Knuth-Morris-Pratt search over ASCII-case-folded bytes.
//!
//! Offsets are byte offsets into the searched text. Folding is ASCII-only, so
//! multi-byte UTF-8 sequences compare verbatim and a match can never start in
//! the middle of one unless the pattern itself does.

use std::fmt;

use crate::error::{Error, Result};

/// Prefix function of `pattern`: `failure[i]` is the length of the longest
/// proper prefix of `pattern[..=i]` that is also a suffix of it.
pub fn build_failure_table(pattern: &[u8]) -> Result<Vec<usize>> {
    if pattern.is_empty() {
        return Err(Error::InvalidPattern("empty pattern".into()));
    }
    let mut failure = vec![0; pattern.len()];
    let mut k = 0;
    for i in 1..pattern.len() {
        while k > 0 && pattern[i] != pattern[k] {
            k = failure[k - 1];
        }
        if pattern[i] == pattern[k] {
            k += 1;
        }
        failure[i] = k;
    }
    Ok(failure)
}

/// A case-folded keyword with its precomputed failure table. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct KmpPattern {
    text: String,
    failure: Vec<usize>,
}

impl KmpPattern {
    pub fn new(pattern: &str) -> Result<Self> {
        let text = pattern.to_ascii_lowercase();
        let failure = build_failure_table(text.as_bytes())?;
        Ok(KmpPattern { text, failure })
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn failure(&self) -> &[usize] {
        &self.failure
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// All match start offsets, strictly increasing, overlaps included.
    pub fn find_all(&self, text: &str) -> Vec<usize> {
        self.find_all_counted(text.as_bytes()).0
    }

    /// True as soon as the first occurrence is seen.
    pub fn is_match(&self, text: &str) -> bool {
        let pat = self.text.as_bytes();
        let mut j = 0;
        for &c in text.as_bytes() {
            let c = c.to_ascii_lowercase();
            while j > 0 && pat[j] != c {
                j = self.failure[j - 1];
            }
            if pat[j] == c {
                j += 1;
                if j == pat.len() {
                    return true;
                }
            }
        }
        false
    }

    /// Like [`find_all`](Self::find_all) but also returns the number of
    /// character comparisons performed, which never exceeds `2 * text.len()`.
    pub fn find_all_counted(&self, text: &[u8]) -> (Vec<usize>, usize) {
        let pat = self.text.as_bytes();
        let m = pat.len();
        let mut matches = Vec::new();
        let mut comparisons = 0;
        let mut j = 0;
        for (i, &c) in text.iter().enumerate() {
            let c = c.to_ascii_lowercase();
            loop {
                comparisons += 1;
                if pat[j] == c {
                    j += 1;
                    break;
                }
                if j == 0 {
                    break;
                }
                j = self.failure[j - 1];
            }
            if j == m {
                matches.push(i + 1 - m);
                j = self.failure[m - 1];
            }
        }
        (matches, comparisons)
    }
}

impl fmt::Debug for KmpPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("KmpPattern").field(&self.text).finish()
    }
}

/// Free-function form of [`KmpPattern::find_all`].
pub fn kmp_search(text: &str, pattern: &KmpPattern) -> Vec<usize> {
    pattern.find_all(text)
}

/// `(matched, matched_count)` where `matched_count` counts distinct patterns
/// with at least one occurrence.
pub fn contains_any(text: &str, patterns: &[KmpPattern]) -> (bool, usize) {
    let count = patterns.iter().filter(|p| p.is_match(text)).count();
    (count > 0, count)
}
