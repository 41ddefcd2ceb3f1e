//! Cleaning of raw ⟨method, Javadoc⟩ pairs into [`MethodRecord`]s, and
//! hash-based deduplication.

mod english;
mod javadoc;
mod links;
mod text;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::java::{self, Token, TokenKind};
use crate::seed::digest_strs;

pub use english::{Both, LanguageDetector, StopwordDetector, STOPWORDS};
pub use javadoc::{description, rewrite_inline_tags, strip_delimiters};
pub use links::{replace_links, LinkReplacement};
pub use text::{
    collapse_whitespace, fold_math, has_non_latin, is_latin, link_tag_len, nl_tokenize,
    remove_formatting_runs,
};

pub const DEFAULT_MAX_TOKENS: usize = 512;

/// One line of the raw input corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPair {
    pub id: String,
    #[serde(default)]
    pub repo: String,
    #[serde(default)]
    pub path: String,
    pub method: String,
    pub javadoc: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rejection {
    EmptyJavadoc,
    EmptyBody,
    TestMethod,
    MissingClosingBrace,
    EmptyDescription,
    NonEnglish,
    NonLatin,
    ParseRejection,
    TooLong,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodRecord {
    pub id: String,
    pub method_tokens: Vec<Token>,
    pub summary_tokens: Vec<String>,
    pub link_table: Vec<String>,
    pub hash: String,
}

/// Hash of a method over its normalized token texts.
pub fn method_hash(tokens: &[Token]) -> String {
    digest_strs(&java::texts(tokens))
}

impl MethodRecord {
    pub fn new(
        id: impl Into<String>,
        method_tokens: Vec<Token>,
        summary_tokens: Vec<String>,
        link_table: Vec<String>,
    ) -> Self {
        let hash = method_hash(&method_tokens);
        Self {
            id: id.into(),
            method_tokens,
            summary_tokens,
            link_table,
            hash,
        }
    }

    pub fn method_text(&self) -> String {
        java::detokenize(&self.method_tokens)
    }

    pub fn summary_text(&self) -> String {
        self.summary_tokens.join(" ")
    }

    pub fn token_count(&self) -> usize {
        self.method_tokens.len() + self.summary_tokens.len()
    }

    /// Checks the record invariants; returns the first violation.
    pub fn validate(&self, max_tokens: usize) -> Result<(), &'static str> {
        if self.method_tokens.last().map(|t| t.text.as_str()) != Some("}") {
            return Err("method does not end with `}`");
        }
        if self.summary_tokens.is_empty() {
            return Err("empty summary");
        }
        if self.token_count() > max_tokens {
            return Err("too many tokens");
        }
        let texts = self
            .method_tokens
            .iter()
            .map(|t| t.text.as_str())
            .chain(self.summary_tokens.iter().map(String::as_str));
        for t in texts {
            if t.is_empty() {
                return Err("empty token");
            }
            if has_non_latin(t) {
                return Err("non-Latin character");
            }
        }
        if self.hash != method_hash(&self.method_tokens) {
            return Err("stale hash");
        }
        Ok(())
    }

    pub fn to_line(&self) -> RecordLine {
        RecordLine {
            id: self.id.clone(),
            method: self.method_text(),
            summary: self.summary_text(),
            hash: self.hash.clone(),
            links: self.link_table.clone(),
        }
    }
}

/// Serialized form of a [`MethodRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLine {
    pub id: String,
    pub method: String,
    pub summary: String,
    pub hash: String,
    #[serde(default)]
    pub links: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordLineError {
    #[error("record {id}: {source}")]
    Lex {
        id: String,
        source: java::LexError,
    },
    #[error("record {0}: hash does not match method tokens")]
    HashMismatch(String),
}

impl RecordLine {
    pub fn into_record(self) -> Result<MethodRecord, RecordLineError> {
        let method_tokens =
            java::tokenize(&self.method).map_err(|source| RecordLineError::Lex {
                id: self.id.clone(),
                source,
            })?;
        let record = MethodRecord::new(
            self.id,
            method_tokens,
            self.summary.split_whitespace().map(str::to_string).collect(),
            self.links,
        );
        if record.hash != self.hash {
            return Err(RecordLineError::HashMismatch(record.id));
        }
        Ok(record)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CleanConfig {
    pub max_tokens: usize,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

// Index of the body's opening brace: first `{` outside parentheses.
fn body_open(tokens: &[Token]) -> Option<usize> {
    let mut parens = 0i64;
    for (i, t) in tokens.iter().enumerate() {
        match t.text.as_str() {
            "(" => parens += 1,
            ")" => parens -= 1,
            "{" if parens == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn is_test_method(tokens: &[Token]) -> bool {
    let header_end = body_open(tokens).unwrap_or(tokens.len());
    let header = &tokens[..header_end];
    header.iter().enumerate().any(|(i, t)| {
        if t.kind != TokenKind::AnnotationName {
            return false;
        }
        // `@Test` or a qualified `@org.junit.Test`.
        let mut last = &t.text[1..];
        let mut j = i + 1;
        while j + 1 < header.len() && header[j].is(".") {
            last = &header[j + 1].text;
            j += 2;
        }
        last == "Test"
    })
}

/// Runs the cleaning filters in order and normalizes a surviving pair.
pub fn clean_pair(
    pair: &RawPair,
    detector: &dyn LanguageDetector,
    config: &CleanConfig,
) -> Result<MethodRecord, Rejection> {
    let doc_body = strip_delimiters(&pair.javadoc);
    if doc_body.trim().is_empty() {
        return Err(Rejection::EmptyJavadoc);
    }
    let raw_tokens = java::tokenize(&pair.method).map_err(|_| Rejection::ParseRejection)?;
    if let Some(open) = body_open(&raw_tokens) {
        if raw_tokens.get(open + 1).is_some_and(|t| t.is("}")) {
            return Err(Rejection::EmptyBody);
        }
    }
    if is_test_method(&raw_tokens) {
        return Err(Rejection::TestMethod);
    }
    if raw_tokens.last().map(|t| t.text.as_str()) != Some("}") {
        return Err(Rejection::MissingClosingBrace);
    }

    let desc = rewrite_inline_tags(description(&doc_body));
    let desc = collapse_whitespace(&remove_formatting_runs(&desc));
    if desc.is_empty() {
        return Err(Rejection::EmptyDescription);
    }
    if !detector.is_english(&desc) {
        return Err(Rejection::NonEnglish);
    }

    let desc = fold_math(&desc);
    let method = fold_math(&pair.method);
    let method_tokens = java::tokenize(&method).map_err(|_| Rejection::ParseRejection)?;
    if has_non_latin(&desc) || method_tokens.iter().any(|t| has_non_latin(&t.text)) {
        return Err(Rejection::NonLatin);
    }

    let replaced = replace_links(&method, &desc);
    let method_tokens =
        java::tokenize(&replaced.method).map_err(|_| Rejection::ParseRejection)?;
    java::parse_structure(&method_tokens).map_err(|_| Rejection::ParseRejection)?;
    let summary_tokens = nl_tokenize(&replaced.javadoc);
    if summary_tokens.is_empty() {
        return Err(Rejection::EmptyDescription);
    }
    if method_tokens.len() + summary_tokens.len() > config.max_tokens {
        return Err(Rejection::TooLong);
    }
    Ok(MethodRecord::new(
        pair.id.clone(),
        method_tokens,
        summary_tokens,
        replaced.links,
    ))
}

/// Order-preserving, first-occurrence-wins deduplication by method hash.
#[derive(Debug, Default)]
pub struct Deduper<'a> {
    seen: HashSet<String>,
    against: Option<&'a HashSet<String>>,
}

impl<'a> Deduper<'a> {
    pub fn new(against: Option<&'a HashSet<String>>) -> Self {
        Self {
            seen: HashSet::new(),
            against,
        }
    }

    /// Returns true if a record with this hash should be kept.
    pub fn admit(&mut self, hash: &str) -> bool {
        if self.against.is_some_and(|a| a.contains(hash)) {
            return false;
        }
        self.seen.insert(hash.to_string())
    }
}

pub fn dedup<'a, I>(records: I, against: Option<&'a HashSet<String>>) -> impl Iterator<Item = MethodRecord> + 'a
where
    I: IntoIterator<Item = MethodRecord>,
    I::IntoIter: 'a,
{
    let mut deduper = Deduper::new(against);
    records.into_iter().filter(move |r| deduper.admit(&r.hash))
}
