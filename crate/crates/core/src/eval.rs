//! Prediction scoring and paired model comparison.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::factorial::binomial;
use thiserror::Error;

use crate::java;

pub const DEFAULT_EXACT_THRESHOLD: u64 = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no target for prediction {0:?}")]
    MissingTarget(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("correctness vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("models {0:?} and {1:?} were scored on different instances")]
    Misaligned(String, String),
}

/// Canonical token sequence of a prediction or target: Java tokens when the
/// text lexes, whitespace-separated words otherwise.
pub fn canonical_tokens(text: &str) -> Vec<String> {
    match java::tokenize(text) {
        Ok(toks) => toks.into_iter().map(|t| t.text).collect(),
        Err(_) => text.split_whitespace().map(String::from).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub id: String,
    pub prediction: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredPair {
    pub id: String,
    pub prediction: Vec<String>,
    pub target: Vec<String>,
}

/// Aligned predictions, sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionSet {
    pub pairs: Vec<ScoredPair>,
}

impl PredictionSet {
    /// Joins predictions with `(id, target text)` pairs.
    pub fn join<'a, T>(predictions: &[PredictionLine], targets: T) -> Result<Self, EvalError>
    where
        T: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let targets: HashMap<&str, &str> = targets.into_iter().collect();
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(predictions.len());
        for p in predictions {
            if !seen.insert(p.id.as_str()) {
                return Err(EvalError::DuplicateId(p.id.clone()));
            }
            let target = targets
                .get(p.id.as_str())
                .ok_or_else(|| EvalError::MissingTarget(p.id.clone()))?;
            pairs.push(ScoredPair {
                id: p.id.clone(),
                prediction: canonical_tokens(&p.prediction),
                target: canonical_tokens(target),
            });
        }
        pairs.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Self { pairs })
    }

    pub fn from_pairs(mut pairs: Vec<ScoredPair>) -> Self {
        pairs.sort_by(|a, b| a.id.cmp(&b.id));
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Fraction of exact matches, with the per-instance vector.
pub fn exact_match_rate(preds: &PredictionSet) -> (f64, Vec<bool>) {
    let correct: Vec<bool> = preds.pairs.iter().map(|p| p.prediction == p.target).collect();
    let rate = if correct.is_empty() {
        0.0
    } else {
        correct.iter().filter(|c| **c).count() as f64 / correct.len() as f64
    };
    (rate, correct)
}

/// Precision substituted for n-gram levels without any match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    /// The k-th empty level (k = 1, 2, ...) gets `1 / (2^k · len)`.
    #[default]
    Exponential,
    /// Every empty level gets `1 / (2 · len)`.
    Constant,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU-4 with uniform weights and brevity penalty. `len` in
/// the smoothing term is the total prediction length.
pub fn bleu4(preds: &PredictionSet, smoothing: Smoothing) -> f64 {
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let (mut c, mut r) = (0usize, 0usize);
    for p in &preds.pairs {
        c += p.prediction.len();
        r += p.target.len();
        for n in 1..=4 {
            let refs = ngram_counts(&p.target, n);
            for (g, k) in ngram_counts(&p.prediction, n) {
                matches[n - 1] += k.min(refs.get(g).copied().unwrap_or(0));
            }
            totals[n - 1] += p.prediction.len().saturating_sub(n - 1);
        }
    }
    if c == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut empty_levels = 0i32;
    for n in 0..4 {
        let precision = if matches[n] == 0 {
            empty_levels += 1;
            match smoothing {
                Smoothing::Exponential => 1.0 / (2f64.powi(empty_levels) * c as f64),
                Smoothing::Constant => 1.0 / (2.0 * c as f64),
            }
        } else {
            matches[n] as f64 / totals[n] as f64
        };
        log_sum += precision.ln();
    }
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    (bp * (log_sum / 4.0).exp()).clamp(0.0, 1.0)
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Token edit distance divided by the longer length; 0 for two empty
/// sequences.
pub fn norm_levenshtein<T: PartialEq>(pred: &[T], target: &[T]) -> f64 {
    let longest = pred.len().max(target.len());
    if longest == 0 {
        0.0
    } else {
        levenshtein(pred, target) as f64 / longest as f64
    }
}

pub fn mean_norm_levenshtein(preds: &PredictionSet) -> f64 {
    if preds.is_empty() {
        return 0.0;
    }
    preds
        .pairs
        .iter()
        .map(|p| norm_levenshtein(&p.prediction, &p.target))
        .sum::<f64>()
        / preds.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    pub p: f64,
    pub n01: u64,
    pub n10: u64,
}

/// Two-sided exact binomial test on the discordant counts.
pub fn mcnemar_exact(n10: u64, n01: u64) -> f64 {
    let n = n10 + n01;
    let tail: f64 = (0..=n10.min(n01)).map(|k| binomial(n, k)).sum();
    (2.0 * tail / 2f64.powi(n as i32)).min(1.0)
}

/// Chi-square with continuity correction, one degree of freedom.
pub fn mcnemar_chi2(n10: u64, n01: u64) -> f64 {
    let n = (n10 + n01) as f64;
    let d = (n10 as f64 - n01 as f64).abs() - 1.0;
    let stat = d * d / n;
    erfc((stat / 2.0).sqrt()).min(1.0)
}

/// `n10` counts A right and B wrong. Exact below `threshold` discordant
/// pairs, chi-square at or above; p = 1 with no discordant pair.
pub fn mcnemar(a: &[bool], b: &[bool], threshold: u64) -> Result<McNemar, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    let n10 = a.iter().zip(b).filter(|(x, y)| **x && !**y).count() as u64;
    let n01 = a.iter().zip(b).filter(|(x, y)| !**x && **y).count() as u64;
    let p = match n10 + n01 {
        0 => 1.0,
        n if n < threshold => mcnemar_exact(n10, n01),
        _ => mcnemar_chi2(n10, n01),
    };
    Ok(McNemar { p, n01, n10 })
}

/// Discordant-pair odds ratio, Haldane-Anscombe corrected when a cell is 0.
pub fn odds_ratio_paired(n10: u64, n01: u64) -> f64 {
    if n10 == 0 || n01 == 0 {
        (n10 as f64 + 0.5) / (n01 as f64 + 0.5)
    } else {
        n10 as f64 / n01 as f64
    }
}

/// Holm step-down adjustment, returned in the input order.
pub fn holm_adjust(pvalues: &[f64]) -> Vec<f64> {
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (j, &i) in order.iter().enumerate() {
        running = running.max(((m - j) as f64 * pvalues[i]).min(1.0));
        out[i] = running;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub instances: usize,
    pub exact_match: f64,
    pub bleu4: f64,
    pub norm_levenshtein: f64,
}

pub fn score(preds: &PredictionSet, smoothing: Smoothing) -> ModelMetrics {
    ModelMetrics {
        instances: preds.len(),
        exact_match: exact_match_rate(preds).0,
        bleu4: bleu4(preds, smoothing),
        norm_levenshtein: mean_norm_levenshtein(preds),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    pub n00: u64,
    pub n01: u64,
    pub n10: u64,
    pub n11: u64,
    pub p_raw: f64,
    pub p_holm: f64,
    pub odds_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub models: BTreeMap<String, ModelMetrics>,
    pub pairs: Vec<PairComparison>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompareConfig {
    pub smoothing: Smoothing,
    pub exact_threshold: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { smoothing: Smoothing::default(), exact_threshold: DEFAULT_EXACT_THRESHOLD }
    }
}

/// All pairwise comparisons among models scored on the same instances,
/// with Holm adjustment across the whole family.
pub fn compare(models: &[(String, PredictionSet)], cfg: CompareConfig) -> Result<ComparisonReport, EvalError> {
    let mut metrics = BTreeMap::new();
    let mut correct = Vec::with_capacity(models.len());
    for (name, preds) in models {
        if metrics.insert(name.clone(), score(preds, cfg.smoothing)).is_some() {
            return Err(EvalError::DuplicateId(name.clone()));
        }
        correct.push(exact_match_rate(preds).1);
    }
    let mut pairs = Vec::new();
    for i in 0..models.len() {
        for j in i + 1..models.len() {
            let (na, pa) = &models[i];
            let (nb, pb) = &models[j];
            if !pa.pairs.iter().map(|p| &p.id).eq(pb.pairs.iter().map(|p| &p.id)) {
                return Err(EvalError::Misaligned(na.clone(), nb.clone()));
            }
            let (ca, cb) = (&correct[i], &correct[j]);
            let t = mcnemar(ca, cb, cfg.exact_threshold)?;
            let both = |x: bool, y: bool| ca.iter().zip(cb).filter(|(a, b)| **a == x && **b == y).count() as u64;
            pairs.push(PairComparison {
                a: na.clone(),
                b: nb.clone(),
                n00: both(false, false),
                n01: t.n01,
                n10: t.n10,
                n11: both(true, true),
                p_raw: t.p,
                p_holm: 0.0,
                odds_ratio: odds_ratio_paired(t.n10, t.n01),
            });
        }
    }
    let raw: Vec<f64> = pairs.iter().map(|p| p.p_raw).collect();
    for (p, adj) in pairs.iter_mut().zip(holm_adjust(&raw)) {
        p.p_holm = adj;
    }
    Ok(ComparisonReport { models: metrics, pairs })
}

impl ComparisonReport {
    /// The pairwise table as CSV.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["a", "b", "n00", "n01", "n10", "n11", "p_raw", "p_holm", "odds_ratio"])?;
        for p in &self.pairs {
            w.write_record([
                p.a.clone(),
                p.b.clone(),
                p.n00.to_string(),
                p.n01.to_string(),
                p.n10.to_string(),
                p.n11.to_string(),
                p.p_raw.to_string(),
                p.p_holm.to_string(),
                p.odds_ratio.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}
