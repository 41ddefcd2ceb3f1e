//! Order-3 count-based language model used to pick plausible replacement
//! tokens for replaced-token detection.
//!
//! Only ranks are ever consumed, so the model keeps raw counts and applies no
//! smoothing. Queries back off from the trigram context to the previous
//! token and finally to unigram frequencies.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::derive_seed;

pub const BOS: &str = "<BOS>";
pub const ORDER: usize = 3;
pub const FORMAT_NAME: &str = "jpretrain-ngram";
pub const FORMAT_VERSION: u32 = 1;

/// Replacement pool of last resort, used when the model offers no token
/// other than the original.
const FALLBACK_TOKENS: &[&str] = &[
    "(", ")", "{", "}", ";", ",", ".", "=", "+", "-", "return", "if", "int", "new", "null", "this",
    "0", "1", "i", "x",
];

#[derive(Debug, Error)]
pub enum NgramError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("unsupported model file: {0}")]
    Format(String),
    #[error("inconsistent count tables: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type Counts = HashMap<String, u64>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NgramModel {
    /// first context token -> second context token -> continuation -> count
    trigrams: HashMap<String, HashMap<String, Counts>>,
    /// previous token -> continuation -> count
    bigrams: HashMap<String, Counts>,
    unigrams: Counts,
    /// Unigram ranking, cached because it is the backoff of last resort.
    unigram_ranked: Vec<(String, u64)>,
}

/// Ranking order: higher count first, then lexicographic token text.
fn rank_cmp(a: (&str, u64), b: (&str, u64)) -> Ordering {
    b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

fn ranked(counts: &Counts) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.iter().map(|(k, c)| (k.clone(), *c)).collect();
    v.sort_by(|a, b| rank_cmp((&a.0, a.1), (&b.0, b.1)));
    v
}

/// Best-ranked entry that differs from `exclude`.
fn best_excluding<'a>(counts: &'a Counts, exclude: &str) -> Option<&'a str> {
    counts
        .iter()
        .filter(|(k, _)| k.as_str() != exclude)
        .min_by(|a, b| rank_cmp((a.0, *a.1), (b.0, *b.1)))
        .map(|(k, _)| k.as_str())
}

impl NgramModel {
    fn empty() -> Self {
        Self::default()
    }

    fn add_sequence<S: AsRef<str>>(&mut self, seq: &[S]) {
        let mut u = BOS;
        let mut v = BOS;
        for tok in seq {
            let w = tok.as_ref();
            *self
                .trigrams
                .entry(u.to_string())
                .or_default()
                .entry(v.to_string())
                .or_default()
                .entry(w.to_string())
                .or_default() += 1;
            *self
                .bigrams
                .entry(v.to_string())
                .or_default()
                .entry(w.to_string())
                .or_default() += 1;
            *self.unigrams.entry(w.to_string()).or_default() += 1;
            u = v;
            v = w;
        }
    }

    fn add_counts(&mut self, other: NgramModel) {
        for (u, inner) in other.trigrams {
            let slot = self.trigrams.entry(u).or_default();
            for (v, conts) in inner {
                let slot = slot.entry(v).or_default();
                for (w, c) in conts {
                    *slot.entry(w).or_default() += c;
                }
            }
        }
        for (v, conts) in other.bigrams {
            let slot = self.bigrams.entry(v).or_default();
            for (w, c) in conts {
                *slot.entry(w).or_default() += c;
            }
        }
        for (w, c) in other.unigrams {
            *self.unigrams.entry(w).or_default() += c;
        }
    }

    fn finish(mut self) -> Result<Self, NgramError> {
        if self.unigrams.is_empty() {
            return Err(NgramError::EmptyCorpus);
        }
        self.unigram_ranked = ranked(&self.unigrams);
        Ok(self)
    }

    /// Counts every trigram of every sequence, each padded with two
    /// [`BOS`] tokens at the front.
    pub fn train<I, S>(corpus: I) -> Result<Self, NgramError>
    where
        I: IntoIterator,
        I::Item: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut model = Self::empty();
        for seq in corpus {
            model.add_sequence(seq.as_ref());
        }
        model.finish()
    }

    /// Shard-parallel training; equal to [`NgramModel::train`] on the same
    /// sequences.
    pub fn train_parallel<S>(corpus: &[Vec<S>]) -> Result<Self, NgramError>
    where
        S: AsRef<str> + Sync,
    {
        corpus
            .par_iter()
            .fold(Self::empty, |mut m, seq| {
                m.add_sequence(seq);
                m
            })
            .reduce(Self::empty, |mut a, b| {
                a.add_counts(b);
                a
            })
            .finish()
    }

    /// Adds the counts of another model (e.g. a separately trained shard).
    pub fn merge(mut self, other: NgramModel) -> Self {
        self.add_counts(other);
        self.unigram_ranked = ranked(&self.unigrams);
        self
    }

    pub fn order(&self) -> usize {
        ORDER
    }

    pub fn trigram_count(&self, u: &str, v: &str, w: &str) -> u64 {
        self.trigram_context(u, v)
            .and_then(|c| c.get(w))
            .copied()
            .unwrap_or(0)
    }

    pub fn bigram_count(&self, v: &str, w: &str) -> u64 {
        self.bigrams
            .get(v)
            .and_then(|c| c.get(w))
            .copied()
            .unwrap_or(0)
    }

    pub fn unigram_count(&self, w: &str) -> u64 {
        self.unigrams.get(w).copied().unwrap_or(0)
    }

    pub fn vocab_size(&self) -> usize {
        self.unigrams.len()
    }

    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.unigram_ranked.iter().map(|(w, _)| w.as_str())
    }

    fn trigram_context(&self, u: &str, v: &str) -> Option<&Counts> {
        self.trigrams
            .get(u)
            .and_then(|m| m.get(v))
            .filter(|c| !c.is_empty())
    }

    /// Backoff levels applicable to a context, most specific first.
    fn levels(&self, prev2: (&str, &str)) -> impl Iterator<Item = &Counts> {
        let tri = self.trigram_context(prev2.0, prev2.1);
        let bi = self.bigrams.get(prev2.1).filter(|c| !c.is_empty());
        tri.into_iter().chain(bi).chain(std::iter::once(&self.unigrams))
    }

    /// Top-`k` continuations of the most specific seen context.
    pub fn predict_ranked(&self, prev2: (&str, &str), k: usize) -> Vec<(String, u64)> {
        let level = self
            .levels(prev2)
            .next()
            .expect("unigram level always present");
        if std::ptr::eq(level, &self.unigrams) {
            return self.unigram_ranked.iter().take(k).cloned().collect();
        }
        let mut v = ranked(level);
        v.truncate(k);
        v
    }

    /// Replacement for `original` given its two predecessors: the top-ranked
    /// candidate unless it equals `original`, in which case the second.
    /// Falls back through the backoff levels, then to a seeded draw.
    pub fn rtd_choice(&self, prev2: (&str, &str), original: &str) -> String {
        for level in self.levels(prev2) {
            let hit = if std::ptr::eq(level, &self.unigrams) {
                self.unigram_ranked
                    .iter()
                    .take(2)
                    .map(|(w, _)| w.as_str())
                    .find(|w| *w != original)
            } else {
                best_excluding(level, original)
            };
            if let Some(w) = hit {
                return w.to_string();
            }
        }
        self.fallback(prev2, original)
    }

    fn fallback(&self, prev2: (&str, &str), original: &str) -> String {
        let mut pool: Vec<&str> = self
            .vocab()
            .chain(FALLBACK_TOKENS.iter().copied())
            .filter(|w| *w != original)
            .collect();
        pool.sort_unstable();
        pool.dedup();
        let idx = derive_seed(0, &["rtd-fallback", prev2.0, prev2.1, original]) as usize % pool.len();
        pool[idx].to_string()
    }

    /// Checks the marginal identities between levels:
    /// `bigram(v, w) = Σ_u trigram(u, v, w)` and `unigram(w) = Σ_v bigram(v, w)`.
    pub fn check_consistency(&self) -> Result<(), NgramError> {
        let bad = |m: String| Err(NgramError::Inconsistent(m));
        if self.unigrams.contains_key(BOS) {
            return bad("<BOS> in vocabulary".into());
        }
        let mut bi_from_tri: HashMap<(&str, &str), u64> = HashMap::new();
        for inner in self.trigrams.values() {
            for (v, conts) in inner {
                for (w, &c) in conts {
                    if c == 0 {
                        return bad(format!("zero trigram count for ({v}, {w})"));
                    }
                    *bi_from_tri.entry((v, w)).or_default() += c;
                }
            }
        }
        let mut uni_from_bi: HashMap<&str, u64> = HashMap::new();
        let mut n_bigrams = 0;
        for (v, conts) in &self.bigrams {
            for (w, &c) in conts {
                n_bigrams += 1;
                if bi_from_tri.get(&(v.as_str(), w.as_str())) != Some(&c) {
                    return bad(format!("bigram ({v}, {w}) disagrees with trigrams"));
                }
                *uni_from_bi.entry(w).or_default() += c;
            }
        }
        if n_bigrams != bi_from_tri.len() {
            return bad("trigram contexts without bigrams".into());
        }
        if uni_from_bi.len() != self.unigrams.len() {
            return bad("unigram table size disagrees with bigrams".into());
        }
        for (w, &c) in &self.unigrams {
            if uni_from_bi.get(w.as_str()) != Some(&c) {
                return bad(format!("unigram {w} disagrees with bigrams"));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> ModelFile {
        let mut trigrams = Vec::new();
        for (u, inner) in &self.trigrams {
            for (v, conts) in inner {
                for (w, &c) in conts {
                    trigrams.push((u.clone(), v.clone(), w.clone(), c));
                }
            }
        }
        trigrams.sort();
        let mut bigrams = Vec::new();
        for (v, conts) in &self.bigrams {
            for (w, &c) in conts {
                bigrams.push((v.clone(), w.clone(), c));
            }
        }
        bigrams.sort();
        let unigrams: BTreeMap<String, u64> =
            self.unigrams.iter().map(|(k, v)| (k.clone(), *v)).collect();
        ModelFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            order: ORDER,
            trigrams,
            bigrams,
            unigrams,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self, NgramError> {
        if file.format != FORMAT_NAME {
            return Err(NgramError::Format(format!("format {:?}", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(NgramError::Format(format!("version {}", file.version)));
        }
        if file.order != ORDER {
            return Err(NgramError::Format(format!("order {}", file.order)));
        }
        let mut model = Self::empty();
        for (u, v, w, c) in file.trigrams {
            *model
                .trigrams
                .entry(u)
                .or_default()
                .entry(v)
                .or_default()
                .entry(w)
                .or_default() += c;
        }
        for (v, w, c) in file.bigrams {
            *model.bigrams.entry(v).or_default().entry(w).or_default() += c;
        }
        model.unigrams = file.unigrams.into_iter().collect();
        model.check_consistency()?;
        model.finish()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("count tables serialize")
    }

    pub fn from_json(json: &str) -> Result<Self, NgramError> {
        Self::from_file(serde_json::from_str(json)?)
    }
}

/// On-disk count tables with a format header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub order: usize,
    pub trigrams: Vec<(String, String, String, u64)>,
    pub bigrams: Vec<(String, String, u64)>,
    pub unigrams: BTreeMap<String, u64>,
}
