//! Fine-tuning datasets (bug fixing, code summarization, code completion)
//! and the seeded train/validation/test splitter.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clean::{method_hash, MethodRecord};
use crate::java::{self, Token};
use crate::objectives::BLOCK;
use crate::seed::rng_for;

pub const MAX_INPUT_TOKENS: usize = 512;
pub const MAX_BLOCK_STATEMENTS: usize = 3;
pub const DEFAULT_FRACTIONS: (f64, f64, f64) = (0.8, 0.1, 0.1);

const MARKERS: [(&str, &str); 2] = [("<START_BUG>", "<END_BUG>"), ("⟨START_BUG⟩", "⟨END_BUG⟩")];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Bugfix,
    Summarization,
    Completion,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Bugfix => "bugfix",
            Task::Summarization => "summarization",
            Task::Completion => "completion",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bugfix" => Ok(Task::Bugfix),
            "summarization" => Ok(Task::Summarization),
            "completion" => Ok(Task::Completion),
            _ => Err(format!("unknown task {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinetuneInstance {
    pub id: String,
    pub task: Task,
    pub input_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneLine {
    pub id: String,
    pub task: Task,
    pub input: String,
    pub target: String,
    pub split: Option<Split>,
}

impl FinetuneInstance {
    pub fn to_line(&self) -> FinetuneLine {
        FinetuneLine {
            id: self.id.clone(),
            task: self.task,
            input: self.input_tokens.join(" "),
            target: self.target_tokens.join(" "),
            split: self.split,
        }
    }
}

impl FinetuneLine {
    pub fn into_instance(self) -> FinetuneInstance {
        let words = |s: &str| s.split(' ').filter(|w| !w.is_empty()).map(String::from).collect();
        FinetuneInstance {
            input_tokens: words(&self.input),
            target_tokens: words(&self.target),
            id: self.id,
            task: self.task,
            split: self.split,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinetuneError {
    #[error("bug markers missing or unbalanced")]
    MissingMarkers,
    #[error("cannot tokenize {side} method: {msg}")]
    Lex { side: &'static str, msg: String },
    #[error("sample of {size} exceeds {available} records")]
    SampleTooLarge { size: usize, available: usize },
    #[error("split fractions must be non-negative and sum to 1")]
    InvalidFractions,
}

/// One pair of the external bug-fix dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugfixPair {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub buggy_with_context: String,
    #[serde(default)]
    pub fixed_line: String,
    pub buggy_method: String,
    pub fixed_method: String,
}

/// Removes every marker pair, requiring at least one well-nested pair.
pub fn strip_markers(text: &str) -> Result<String, FinetuneError> {
    let mut found = false;
    let mut out = text.to_string();
    for (start, end) in MARKERS {
        let mut open = false;
        let mut rest = out.as_str();
        loop {
            let s = rest.find(start);
            let e = rest.find(end);
            match (s, e) {
                (None, None) => break,
                (Some(s), e) if !open && e.is_none_or(|e| s < e) => {
                    open = true;
                    rest = &rest[s + start.len()..];
                }
                (_, Some(e)) if open => {
                    open = false;
                    found = true;
                    rest = &rest[e + end.len()..];
                }
                _ => return Err(FinetuneError::MissingMarkers),
            }
        }
        if open {
            return Err(FinetuneError::MissingMarkers);
        }
        out = out.replace(start, " ").replace(end, " ");
    }
    if found {
        Ok(out)
    } else {
        Err(FinetuneError::MissingMarkers)
    }
}

fn strip_any(text: &str) -> String {
    let mut out = text.to_string();
    for (s, e) in MARKERS {
        out = out.replace(s, " ").replace(e, " ");
    }
    out
}

fn lex(side: &'static str, text: &str) -> Result<Vec<Token>, FinetuneError> {
    java::tokenize(text).map_err(|e| FinetuneError::Lex { side, msg: e.to_string() })
}

fn texts(tokens: &[Token]) -> Vec<String> {
    tokens.iter().map(|t| t.text.clone()).collect()
}

/// `Ok(None)` when the buggy method also occurs in pre-training or the fix
/// leaves the method unchanged.
pub fn build_bugfix_one(
    pair: &BugfixPair,
    pretrain_hashes: &HashSet<String>,
) -> Result<Option<FinetuneInstance>, FinetuneError> {
    let buggy = lex("buggy", &strip_markers(&pair.buggy_method)?)?;
    let fixed = lex("fixed", &strip_any(&pair.fixed_method))?;
    if pretrain_hashes.contains(&method_hash(&buggy)) {
        return Ok(None);
    }
    let (input, target) = (texts(&buggy), texts(&fixed));
    if input == target {
        return Ok(None);
    }
    Ok(Some(FinetuneInstance {
        id: pair.id.clone(),
        task: Task::Bugfix,
        input_tokens: input,
        target_tokens: target,
        split: None,
    }))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BugfixReport {
    pub instances: Vec<FinetuneInstance>,
    pub dropped_duplicates: usize,
    pub errors: Vec<(String, FinetuneError)>,
}

/// Pairs without an id get `bugfix-<index>`.
pub fn build_bugfix(pairs: &[BugfixPair], pretrain_hashes: &HashSet<String>) -> BugfixReport {
    let mut report = BugfixReport::default();
    for (i, pair) in pairs.iter().enumerate() {
        let id = if pair.id.is_empty() { format!("bugfix-{i}") } else { pair.id.clone() };
        match build_bugfix_one(pair, pretrain_hashes) {
            Ok(Some(mut inst)) => {
                inst.id = id;
                report.instances.push(inst);
            }
            Ok(None) => report.dropped_duplicates += 1,
            Err(e) => report.errors.push((id, e)),
        }
    }
    report
}

/// Uniform sample without replacement, kept in input order.
pub fn build_summarization(
    records: &[MethodRecord],
    size: usize,
    seed: u64,
) -> Result<Vec<FinetuneInstance>, FinetuneError> {
    if size > records.len() {
        return Err(FinetuneError::SampleTooLarge { size, available: records.len() });
    }
    let mut rng = rng_for(seed, &["summarization"]);
    let mut picked = index::sample(&mut rng, records.len(), size).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|i| {
            let r = &records[i];
            FinetuneInstance {
                id: r.id.clone(),
                task: Task::Summarization,
                input_tokens: texts(&r.method_tokens),
                target_tokens: r.summary_tokens.clone(),
                split: None,
            }
        })
        .collect())
}

/// One instance per block holding one to three statements, with the block
/// replaced by `<BLOCK>`.
pub fn build_completion_one(record: &MethodRecord) -> Vec<FinetuneInstance> {
    let Ok(shape) = java::parse_structure(&record.method_tokens) else {
        return Vec::new();
    };
    let tokens = &record.method_tokens;
    let mut out = Vec::new();
    for (k, b) in shape.blocks.iter().enumerate() {
        if b.top_level_statement_count == 0 || b.top_level_statement_count > MAX_BLOCK_STATEMENTS {
            continue;
        }
        let mut input = texts(&tokens[..b.open]);
        input.push(BLOCK.to_string());
        input.extend(texts(&tokens[b.close + 1..]));
        if input.len() > MAX_INPUT_TOKENS {
            continue;
        }
        out.push(FinetuneInstance {
            id: format!("{}-b{k}", record.id),
            task: Task::Completion,
            input_tokens: input,
            target_tokens: texts(&tokens[b.open..=b.close]),
            split: None,
        });
    }
    out
}

pub fn build_completion(records: &[MethodRecord]) -> Vec<FinetuneInstance> {
    records.iter().flat_map(build_completion_one).collect()
}

/// Puts a completion target back at the `<BLOCK>` placeholder.
pub fn splice_block(input: &[String], target: &[String]) -> Option<Vec<String>> {
    let at = input.iter().position(|t| t == BLOCK)?;
    let mut out = input[..at].to_vec();
    out.extend(target.iter().cloned());
    out.extend(input[at + 1..].iter().cloned());
    Some(out)
}

/// `(round(f_train·n), round(f_val·n), remainder)`.
pub fn split_sizes(n: usize, fractions: (f64, f64, f64)) -> Result<(usize, usize, usize), FinetuneError> {
    let (a, b, c) = fractions;
    if [a, b, c].iter().any(|f| !(0.0..=1.0).contains(f)) || (a + b + c - 1.0).abs() > 1e-6 {
        return Err(FinetuneError::InvalidFractions);
    }
    let train = ((a * n as f64).round() as usize).min(n);
    let val = ((b * n as f64).round() as usize).min(n - train);
    Ok((train, val, n - train - val))
}

/// Split label of each id. Membership depends only on the ids and the seed,
/// not on the order they arrive in.
pub fn split_labels<S: AsRef<str>>(
    ids: &[S],
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<Vec<Split>, FinetuneError> {
    let (train, val, _) = split_sizes(ids.len(), fractions)?;
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&x, &y| ids[x].as_ref().cmp(ids[y].as_ref()));
    order.shuffle(&mut rng_for(seed, &["split"]));
    let mut labels = vec![Split::Test; ids.len()];
    for (rank, &i) in order.iter().enumerate() {
        if rank < train {
            labels[i] = Split::Train;
        } else if rank < train + val {
            labels[i] = Split::Validation;
        }
    }
    Ok(labels)
}

pub fn split(
    mut instances: Vec<FinetuneInstance>,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<Vec<FinetuneInstance>, FinetuneError> {
    let ids: Vec<&str> = instances.iter().map(|i| i.id.as_str()).collect();
    let labels = split_labels(&ids, fractions, seed)?;
    for (inst, label) in instances.iter_mut().zip(labels) {
        inst.split = Some(label);
    }
    Ok(instances)
}
