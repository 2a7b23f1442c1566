//! A forgiving HTML tag scanner.
//!
//! This is not a DOM builder. It walks the markup once, yielding tags and text
//! runs in document order, and never fails: unterminated comments, tags and
//! attribute values simply run to the end of input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elements whose content is not markup and is never treated as page text.
const RAW_TEXT_ELEMENTS: &[&str] = &["script", "style"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagKind {
    Open,
    Close,
    SelfClosing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    /// Lowercased element name.
    pub name: String,
    pub kind: TagKind,
    /// Attributes in source order; names lowercased, values entity-decoded.
    pub attrs: Vec<(String, String)>,
    /// Byte range of the tag markup itself.
    pub start: usize,
    pub end: usize,
}

impl Tag {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token<'a> {
    Tag(Tag),
    Text(&'a str),
    /// Content of `<script>` / `<style>`.
    RawText(&'a str),
}

pub fn tokenize(html: &str) -> Vec<Token<'_>> {
    let bytes = html.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let mut text_start = 0;

    while pos < bytes.len() {
        if bytes[pos] != b'<' {
            pos += 1;
            continue;
        }
        let rest = &html[pos..];
        if let Some(comment) = rest.strip_prefix("<!--") {
            push_text(&mut tokens, &html[text_start..pos]);
            pos = comment.find("-->").map_or(bytes.len(), |i| pos + 4 + i + 3);
            text_start = pos;
            continue;
        }
        let next = bytes.get(pos + 1).copied().unwrap_or(b' ');
        if next == b'!' || next == b'?' {
            push_text(&mut tokens, &html[text_start..pos]);
            pos = rest.find('>').map_or(bytes.len(), |i| pos + i + 1);
            text_start = pos;
            continue;
        }
        let is_close = next == b'/';
        let name_at = pos + 1 + is_close as usize;
        if !bytes.get(name_at).is_some_and(u8::is_ascii_alphabetic) {
            // a lone '<' in text
            pos += 1;
            continue;
        }
        push_text(&mut tokens, &html[text_start..pos]);
        let tag = parse_tag(html, pos, name_at, is_close);
        pos = tag.end;
        text_start = pos;

        let raw = tag.kind == TagKind::Open && RAW_TEXT_ELEMENTS.contains(&tag.name.as_str());
        let name = tag.name.clone();
        tokens.push(Token::Tag(tag));
        if raw {
            let close = find_close_tag(html, pos, &name).unwrap_or(bytes.len());
            if close > pos {
                tokens.push(Token::RawText(&html[pos..close]));
            }
            pos = close;
            text_start = pos;
        }
    }
    push_text(&mut tokens, &html[text_start..]);
    tokens
}

fn push_text<'a>(tokens: &mut Vec<Token<'a>>, s: &'a str) {
    if !s.is_empty() {
        tokens.push(Token::Text(s));
    }
}

/// Byte offset of the next `</name` (case-insensitive) at or after `from`.
fn find_close_tag(html: &str, from: usize, name: &str) -> Option<usize> {
    let bytes = html.as_bytes();
    let mut i = from;
    while i + 2 + name.len() <= bytes.len() {
        if bytes[i] == b'<'
            && bytes[i + 1] == b'/'
            && bytes[i + 2..i + 2 + name.len()].eq_ignore_ascii_case(name.as_bytes())
        {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn parse_tag(html: &str, start: usize, name_at: usize, is_close: bool) -> Tag {
    let bytes = html.as_bytes();
    let mut i = name_at;
    while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' && bytes[i] != b'/'
    {
        i += 1;
    }
    let name = html[name_at..i].to_ascii_lowercase();
    let mut attrs = Vec::new();
    let mut self_closing = false;

    loop {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'/') {
            self_closing = bytes[i] == b'/';
            i += 1;
        }
        if i >= bytes.len() {
            break;
        }
        if bytes[i] == b'>' {
            i += 1;
            break;
        }
        self_closing = false;
        let name_start = i;
        while i < bytes.len()
            && !bytes[i].is_ascii_whitespace()
            && !matches!(bytes[i], b'=' | b'>' | b'/')
        {
            i += 1;
        }
        let attr_name = html[name_start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = String::new();
        if i < bytes.len() && bytes[i] == b'=' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                let quote = bytes[i];
                let v_start = i + 1;
                let v_end = html[v_start..]
                    .bytes()
                    .position(|b| b == quote)
                    .map_or(bytes.len(), |p| v_start + p);
                value = decode_entities(&html[v_start..v_end]);
                i = (v_end + 1).min(bytes.len());
            } else {
                let v_start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                    i += 1;
                }
                value = decode_entities(&html[v_start..i]);
            }
        }
        if !attr_name.is_empty() {
            attrs.push((attr_name, value));
        }
    }

    let kind = if is_close {
        TagKind::Close
    } else if self_closing {
        TagKind::SelfClosing
    } else {
        TagKind::Open
    };
    Tag {
        name,
        kind,
        attrs,
        start,
        end: i,
    }
}

/// Decodes the handful of named entities that matter for keyword matching,
/// plus numeric references. Unknown entities are left untouched.
pub fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let semi = rest[..rest.len().min(12)].find(';');
        let decoded = semi.and_then(|semi| {
            let ent = &rest[1..semi];
            let ch = match ent {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                _ => ent.strip_prefix('#').and_then(|num| {
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(hex) => u32::from_str_radix(hex, 16).ok(),
                        None => num.parse().ok(),
                    };
                    code.and_then(char::from_u32)
                }),
            };
            ch.map(|c| (c, semi + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &rest[len..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttrOp {
    /// ASCII-case-insensitive equality.
    Equals,
    /// ASCII-case-insensitive substring.
    Contains,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrFilter {
    pub name: String,
    pub value: String,
    pub op: AttrOp,
}

/// Selects elements by name and optionally one attribute.
///
/// Textual form: `meta[name=keywords]`, `*[class*=post]`, `article`.
/// `*` matches any element; `*=` is a substring test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagPattern {
    /// `None` matches any element.
    pub tag_name: Option<String>,
    pub attribute_filter: Option<AttrFilter>,
}

impl TagPattern {
    pub fn element(name: &str) -> Result<Self> {
        validate_tag_name(name)?;
        Ok(TagPattern {
            tag_name: Some(name.to_ascii_lowercase()),
            attribute_filter: None,
        })
    }

    pub fn with_attr(mut self, name: &str, value: &str, op: AttrOp) -> Self {
        self.attribute_filter = Some(AttrFilter {
            name: name.to_ascii_lowercase(),
            value: value.to_string(),
            op,
        });
        self
    }

    pub fn matches(&self, tag: &Tag) -> bool {
        if tag.kind == TagKind::Close {
            return false;
        }
        if let Some(name) = &self.tag_name {
            if *name != tag.name {
                return false;
            }
        }
        match &self.attribute_filter {
            None => true,
            Some(f) => tag.attr(&f.name).is_some_and(|v| match f.op {
                AttrOp::Equals => v.trim().eq_ignore_ascii_case(&f.value),
                AttrOp::Contains => v
                    .to_ascii_lowercase()
                    .contains(&f.value.to_ascii_lowercase()),
            }),
        }
    }
}

fn validate_tag_name(name: &str) -> Result<()> {
    if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphabetic() || b.is_ascii_digit()) {
        return Err(Error::InvalidPattern(format!("bad tag name {name:?}")));
    }
    if !name.as_bytes()[0].is_ascii_alphabetic() {
        return Err(Error::InvalidPattern(format!("bad tag name {name:?}")));
    }
    Ok(())
}

impl FromStr for TagPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, filter) = match s.find('[') {
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(']')
                    .ok_or_else(|| Error::InvalidPattern(format!("unclosed '[' in {s:?}")))?;
                (&s[..open], Some(inner))
            }
            None => (s, None),
        };
        let mut pattern = if name == "*" {
            TagPattern {
                tag_name: None,
                attribute_filter: None,
            }
        } else {
            TagPattern::element(name)?
        };
        if let Some(inner) = filter {
            let (attr, op, value) = if let Some((a, v)) = inner.split_once("*=") {
                (a, AttrOp::Contains, v)
            } else if let Some((a, v)) = inner.split_once('=') {
                (a, AttrOp::Equals, v)
            } else {
                return Err(Error::InvalidPattern(format!("bad attribute filter {inner:?}")));
            };
            let value = value.trim().trim_matches(|c| c == '"' || c == '\'');
            let attr = attr.trim();
            if attr.is_empty() {
                return Err(Error::InvalidPattern(format!("bad attribute filter {inner:?}")));
            }
            pattern = pattern.with_attr(attr, value, op);
        }
        Ok(pattern)
    }
}

impl fmt::Display for TagPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag_name.as_deref().unwrap_or("*"))?;
        if let Some(filter) = &self.attribute_filter {
            let op = match filter.op {
                AttrOp::Equals => "=",
                AttrOp::Contains => "*=",
            };
            write!(f, "[{}{}{}]", filter.name, op, filter.value)?;
        }
        Ok(())
    }
}

/// Text of `tokens[from..]` up to the close tag balancing the element opened
/// just before `from`, with tags dropped and whitespace collapsed.
fn inner_text(tokens: &[Token<'_>], from: usize, name: &str) -> String {
    let mut depth = 1usize;
    let mut parts = Vec::new();
    for tok in &tokens[from..] {
        match tok {
            Token::Tag(t) if t.name == name && t.kind == TagKind::Open => depth += 1,
            Token::Tag(t) if t.name == name && t.kind == TagKind::Close => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            Token::Text(s) => parts.push(decode_entities(s)),
            _ => {}
        }
    }
    normalize_whitespace(&parts.join(" "))
}

pub(crate) fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Payload of every element matching `pattern`, in document order: the
/// `content` attribute when present (as on `<meta>`), else `value`, else the
/// element's inner text.
pub fn extract_tag_content(html: &str, pattern: &TagPattern) -> Vec<String> {
    let tokens = tokenize(html);
    let mut out = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let Token::Tag(tag) = tok else { continue };
        if !pattern.matches(tag) {
            continue;
        }
        if let Some(v) = tag.attr("content").or_else(|| tag.attr("value")) {
            out.push(v.to_string());
        } else if tag.kind == TagKind::Open {
            out.push(inner_text(&tokens, i + 1, &tag.name));
        } else {
            out.push(String::new());
        }
    }
    out
}

/// Number of elements matching at least one of `patterns`.
pub fn count_matching_elements(html: &str, patterns: &[TagPattern]) -> usize {
    tokenize(html)
        .iter()
        .filter(|tok| matches!(tok, Token::Tag(t) if patterns.iter().any(|p| p.matches(t))))
        .count()
}
