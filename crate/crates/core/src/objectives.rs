//! Pre-training instances for the six self-supervised objectives, all framed
//! text-to-text, plus multi-objective mixing.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clean::MethodRecord;
use crate::java;
use crate::mutation::{self, MutationError};
use crate::ngram::{NgramModel, BOS};
use crate::seed::{derive_seed, Rng};

pub const SEP: &str = "<SEP>";
pub const NAME: &str = "<NAME>";
pub const BLOCK: &str = "<BLOCK>";
pub const CAND_0: &str = "<CAND_0>";
pub const CAND_1: &str = "<CAND_1>";
pub const DEFAULT_RATE: f64 = 0.15;

pub fn mask_token(k: usize) -> String {
    format!("<MASK_{k}>")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Mlm,
    Nsp,
    Rtd,
    Imf,
    Mng,
    Cbs,
}

impl Objective {
    pub const ALL: [Objective; 6] = [
        Objective::Mlm,
        Objective::Nsp,
        Objective::Rtd,
        Objective::Imf,
        Objective::Mng,
        Objective::Cbs,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Objective::Mlm => "mlm",
            Objective::Nsp => "nsp",
            Objective::Rtd => "rtd",
            Objective::Imf => "imf",
            Objective::Mng => "mng",
            Objective::Cbs => "cbs",
        }
    }

    /// Task-prefix token put in front of mixed inputs.
    pub fn prefix(self) -> String {
        format!("{}:", self.tag())
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|o| o.tag() == lower)
            .ok_or_else(|| format!("unknown objective {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PretrainInstance {
    pub id: String,
    pub objective: Objective,
    pub input_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub source_record_id: String,
    /// Derived seed of the draw (0 for deterministic objectives).
    pub seed: u64,
}

/// One JSON line of a pre-training dataset. Token sequences are joined with
/// single spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceLine {
    pub id: String,
    pub objective: Objective,
    pub input: String,
    pub target: String,
    pub source_id: String,
    pub seed: u64,
}

impl PretrainInstance {
    pub fn to_line(&self) -> InstanceLine {
        InstanceLine {
            id: self.id.clone(),
            objective: self.objective,
            input: self.input_tokens.join(" "),
            target: self.target_tokens.join(" "),
            source_id: self.source_record_id.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObjectiveError {
    #[error("method has no code block")]
    NoBlock,
    #[error("no distractor block from another record")]
    NoDistractor,
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error("record cannot be parsed: {0}")]
    Malformed(String),
    #[error("mixing needs at least two streams")]
    TooFewStreams,
}

fn texts(tokens: &[java::Token]) -> Vec<String> {
    tokens.iter().map(|t| t.text.clone()).collect()
}

/// `summary <SEP> method`, the masking surface of MLM and RTD.
pub fn surface(record: &MethodRecord) -> Vec<String> {
    let mut out = record.summary_tokens.clone();
    out.push(SEP.to_string());
    out.extend(record.method_tokens.iter().map(|t| t.text.clone()));
    out
}

/// `max(1, floor(rate * n))`. The epsilon keeps e.g. `0.15 * 20` from
/// flooring to 2.
pub fn mask_count(n: usize, rate: f64) -> usize {
    ((rate * n as f64 + 1e-9).floor() as usize).max(1)
}

/// Ascending positions of the surface to corrupt; the separator is never
/// chosen.
fn choose_positions(n: usize, sep: usize, rate: f64, rng: &mut Rng) -> Vec<usize> {
    let m = mask_count(n, rate).min(n - 1);
    let mut picked: Vec<usize> = index::sample(rng, n - 1, m)
        .into_iter()
        .map(|p| if p >= sep { p + 1 } else { p })
        .collect();
    picked.sort_unstable();
    picked
}

fn derived(seed: u64, objective: Objective, id: &str) -> (u64, Rng) {
    let s = derive_seed(seed, &[objective.tag(), id]);
    (s, Rng::seed_from_u64(s))
}

fn instance_id(objective: Objective, source: &str) -> String {
    format!("{}-{}", objective.tag(), source)
}

pub fn gen_mlm(record: &MethodRecord, seed: u64, rate: f64) -> PretrainInstance {
    let (s, mut rng) = derived(seed, Objective::Mlm, &record.id);
    let mut input = surface(record);
    let positions = choose_positions(input.len(), record.summary_tokens.len(), rate, &mut rng);
    let mut target = Vec::with_capacity(2 * positions.len());
    for (k, &p) in positions.iter().enumerate() {
        let mask = mask_token(k);
        target.push(mask.clone());
        target.push(std::mem::replace(&mut input[p], mask));
    }
    PretrainInstance {
        id: instance_id(Objective::Mlm, &record.id),
        objective: Objective::Mlm,
        input_tokens: input,
        target_tokens: target,
        source_record_id: record.id.clone(),
        seed: s,
    }
}

/// Puts the masked tokens of an MLM instance back in place.
pub fn splice_mlm(input: &[String], target: &[String]) -> Option<Vec<String>> {
    let mut out = input.to_vec();
    for pair in target.chunks(2) {
        let [mask, tok] = pair else { return None };
        let pos = out.iter().position(|t| t == mask)?;
        out[pos] = tok.clone();
    }
    Some(out)
}

/// The two predecessors of `pos` within its own segment (summary or method),
/// padded with [`BOS`].
pub fn segment_context<'a>(surface: &'a [String], sep: usize, pos: usize) -> (&'a str, &'a str) {
    let begin = if pos > sep { sep + 1 } else { 0 };
    let at = |k: usize| -> &'a str {
        if pos >= begin + k {
            surface[pos - k].as_str()
        } else {
            BOS
        }
    };
    (at(2), at(1))
}

pub fn gen_rtd(record: &MethodRecord, model: &NgramModel, seed: u64, rate: f64) -> PretrainInstance {
    let (s, mut rng) = derived(seed, Objective::Rtd, &record.id);
    let original = surface(record);
    let sep = record.summary_tokens.len();
    let positions = choose_positions(original.len(), sep, rate, &mut rng);
    let mut input = original.clone();
    for &p in &positions {
        input[p] = model.rtd_choice(segment_context(&original, sep, p), &original[p]);
    }
    PretrainInstance {
        id: instance_id(Objective::Rtd, &record.id),
        objective: Objective::Rtd,
        input_tokens: input,
        target_tokens: positions.iter().map(|p| p.to_string()).collect(),
        source_record_id: record.id.clone(),
        seed: s,
    }
}

/// One sampled mutant as input, the original method as target.
pub fn gen_imf(record: &MethodRecord, seed: u64) -> Result<PretrainInstance, ObjectiveError> {
    let mutant = mutation::sample_one(record, seed)?;
    Ok(PretrainInstance {
        id: instance_id(Objective::Imf, &record.id),
        objective: Objective::Imf,
        input_tokens: texts(&mutant.mutated_tokens),
        target_tokens: texts(&record.method_tokens),
        source_record_id: record.id.clone(),
        seed: derive_seed(seed, &["imf", &record.id]),
    })
}

/// Every distinct mutant of the record, one instance each.
pub fn gen_imf_all(record: &MethodRecord) -> Result<Vec<PretrainInstance>, ObjectiveError> {
    let mutants = mutation::enumerate_mutants(record)?;
    if mutants.is_empty() {
        return Err(MutationError::NoneApplicable.into());
    }
    let target = texts(&record.method_tokens);
    Ok(mutants
        .iter()
        .enumerate()
        .map(|(k, m)| PretrainInstance {
            id: format!("{}-{k}", instance_id(Objective::Imf, &record.id)),
            objective: Objective::Imf,
            input_tokens: texts(&m.mutated_tokens),
            target_tokens: target.clone(),
            source_record_id: record.id.clone(),
            seed: 0,
        })
        .collect())
}

/// Every identifier equal to the method name (declaration, recursive calls
/// and any other use) becomes `<NAME>`.
pub fn gen_mng(record: &MethodRecord) -> Result<PretrainInstance, ObjectiveError> {
    let shape = java::parse_structure(&record.method_tokens)
        .map_err(|e| ObjectiveError::Malformed(e.to_string()))?;
    let name = shape.name(&record.method_tokens).to_string();
    let input = record
        .method_tokens
        .iter()
        .map(|t| {
            if t.kind == java::TokenKind::Identifier && t.text == name {
                NAME.to_string()
            } else {
                t.text.clone()
            }
        })
        .collect();
    Ok(PretrainInstance {
        id: instance_id(Objective::Mng, &record.id),
        objective: Objective::Mng,
        input_tokens: input,
        target_tokens: vec![name],
        source_record_id: record.id.clone(),
        seed: 0,
    })
}

#[derive(Debug, Clone)]
struct PoolBlock {
    record: String,
    tokens: Vec<String>,
}

/// Blocks harvested from a corpus, sorted by token length.
#[derive(Debug, Clone, Default)]
pub struct DistractorPool {
    blocks: Vec<PoolBlock>,
}

impl DistractorPool {
    pub fn build<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = &'a MethodRecord>,
    {
        let mut blocks = Vec::new();
        for r in records {
            let Ok(shape) = java::parse_structure(&r.method_tokens) else { continue };
            for b in &shape.blocks {
                blocks.push(PoolBlock {
                    record: r.id.clone(),
                    tokens: texts(&r.method_tokens[b.open..=b.close]),
                });
            }
        }
        blocks.sort_by(|a, b| {
            (a.tokens.len(), &a.record, &a.tokens).cmp(&(b.tokens.len(), &b.record, &b.tokens))
        });
        Self { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// A uniformly drawn block from another record that differs from `truth`,
    /// preferring lengths within ±50% of the true block.
    pub fn draw(&self, record: &str, truth: &[String], rng: &mut Rng) -> Option<&[String]> {
        let len = truth.len();
        let lo = self.blocks.partition_point(|b| 2 * b.tokens.len() < len);
        let hi = self.blocks.partition_point(|b| 2 * b.tokens.len() <= 3 * len);
        let ok = |b: &PoolBlock| b.record != record && b.tokens != truth;
        for range in [lo..hi, 0..self.blocks.len()] {
            if range.is_empty() {
                continue;
            }
            for _ in 0..16 {
                let b = &self.blocks[rng.gen_range(range.clone())];
                if ok(b) {
                    return Some(&b.tokens);
                }
            }
            let eligible: Vec<&PoolBlock> = self.blocks[range].iter().filter(|b| ok(b)).collect();
            if let Some(b) = eligible.choose(rng) {
                return Some(&b.tokens);
            }
        }
        None
    }
}

pub fn gen_cbs(
    record: &MethodRecord,
    pool: &DistractorPool,
    seed: u64,
) -> Result<PretrainInstance, ObjectiveError> {
    let shape = java::parse_structure(&record.method_tokens)
        .map_err(|e| ObjectiveError::Malformed(e.to_string()))?;
    if shape.blocks.is_empty() {
        return Err(ObjectiveError::NoBlock);
    }
    let (s, mut rng) = derived(seed, Objective::Cbs, &record.id);
    let block = &shape.blocks[rng.gen_range(0..shape.blocks.len())];
    let tokens = &record.method_tokens;
    let truth = texts(&tokens[block.open..=block.close]);
    let distractor = pool
        .draw(&record.id, &truth, &mut rng)
        .ok_or(ObjectiveError::NoDistractor)?
        .to_vec();
    let true_slot = rng.gen_bool(0.5) as usize;
    let (c0, c1) = if true_slot == 0 {
        (truth, distractor)
    } else {
        (distractor, truth)
    };
    let mut input = texts(&tokens[..block.open]);
    input.push(BLOCK.to_string());
    input.extend(texts(&tokens[block.close + 1..]));
    input.push(CAND_0.to_string());
    input.extend(c0);
    input.push(CAND_1.to_string());
    input.extend(c1);
    Ok(PretrainInstance {
        id: instance_id(Objective::Cbs, &record.id),
        objective: Objective::Cbs,
        input_tokens: input,
        target_tokens: vec![true_slot.to_string()],
        source_record_id: record.id.clone(),
        seed: s,
    })
}

/// Candidate statements of every record, for next-statement prediction.
#[derive(Debug, Clone, Default)]
pub struct StatementPool {
    ids: Vec<String>,
    /// Offset of each record's statements in `statements`.
    offsets: Vec<usize>,
    statements: Vec<Vec<String>>,
}

impl StatementPool {
    /// Simple statements of each record in textual order.
    pub fn build<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = &'a MethodRecord>,
    {
        let mut pool = Self::default();
        for r in records {
            pool.ids.push(r.id.clone());
            pool.offsets.push(pool.statements.len());
            if let Ok(shape) = java::parse_structure(&r.method_tokens) {
                let mut simple: Vec<_> = shape.simple_statements().collect();
                simple.sort_by_key(|st| st.start);
                for st in simple {
                    pool.statements.push(texts(&r.method_tokens[st.range()]));
                }
            }
        }
        pool.offsets.push(pool.statements.len());
        pool
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn statements_of(&self, idx: usize) -> &[Vec<String>] {
        &self.statements[self.offsets[idx]..self.offsets[idx + 1]]
    }

    fn foreign(&self, idx: usize, rng: &mut Rng) -> Option<&[String]> {
        let (a, b) = (self.offsets[idx], self.offsets[idx + 1]);
        let others = self.statements.len() - (b - a);
        if others == 0 {
            return None;
        }
        let g = rng.gen_range(0..others);
        Some(&self.statements[if g >= a { g + (b - a) } else { g }])
    }
}

/// One next-statement instance for the record at `idx`, or `None` if it has
/// fewer than two statements or no negative can be drawn.
pub fn gen_nsp_one(pool: &StatementPool, idx: usize, seed: u64) -> Option<PretrainInstance> {
    let id = &pool.ids[idx];
    let stmts = pool.statements_of(idx);
    if stmts.len() < 2 {
        return None;
    }
    let (s, mut rng) = derived(seed, Objective::Nsp, id);
    let i = rng.gen_range(0..stmts.len() - 1);
    let next = &stmts[i + 1];
    let positive = rng.gen_bool(0.5);
    let second: &[String] = if positive {
        next
    } else {
        let same: Vec<&Vec<String>> = stmts
            .iter()
            .enumerate()
            .filter(|(j, st)| *j != i && *j != i + 1 && *st != next)
            .map(|(_, st)| st)
            .collect();
        let draw_foreign = |rng: &mut Rng| -> Option<&[String]> {
            for _ in 0..32 {
                let st = pool.foreign(idx, rng)?;
                if st != next.as_slice() {
                    return Some(st);
                }
            }
            None
        };
        let cross = rng.gen_bool(0.5);
        let picked = if cross || same.is_empty() {
            draw_foreign(&mut rng).or_else(|| same.choose(&mut rng).map(|v| v.as_slice()))
        } else {
            same.choose(&mut rng).map(|v| v.as_slice())
        };
        picked?
    };
    let mut input = stmts[i].clone();
    input.push(SEP.to_string());
    input.extend(second.iter().cloned());
    Some(PretrainInstance {
        id: instance_id(Objective::Nsp, id),
        objective: Objective::Nsp,
        input_tokens: input,
        target_tokens: vec![if positive { "yes" } else { "no" }.to_string()],
        source_record_id: id.clone(),
        seed: s,
    })
}

pub fn gen_nsp(records: &[MethodRecord], seed: u64) -> Vec<PretrainInstance> {
    let pool = StatementPool::build(records);
    (0..pool.len()).filter_map(|i| gen_nsp_one(&pool, i, seed)).collect()
}

/// Prefixes each input with its objective's task token and interleaves all
/// streams with a seeded shuffle.
pub fn mix_objectives(
    streams: Vec<(Objective, Vec<PretrainInstance>)>,
    seed: u64,
) -> Result<Vec<PretrainInstance>, ObjectiveError> {
    if streams.len() < 2 {
        return Err(ObjectiveError::TooFewStreams);
    }
    let mut all: Vec<PretrainInstance> = streams
        .into_iter()
        .flat_map(|(tag, stream)| {
            stream.into_iter().map(move |mut inst| {
                inst.input_tokens.insert(0, tag.prefix());
                inst
            })
        })
        .collect();
    let mut rng = Rng::seed_from_u64(derive_seed(seed, &["mix"]));
    all.shuffle(&mut rng);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn record(id: &str, src: &str, summary: &str) -> MethodRecord {
        MethodRecord::new(
            id,
            java::tokenize(src).unwrap(),
            summary.split_whitespace().map(String::from).collect(),
            vec![],
        )
    }

    #[test]
    fn mask_counts() {
        assert_eq!(mask_count(6, 0.15), 1);
        assert_eq!(mask_count(20, 0.15), 3);
        assert_eq!(mask_count(100, 0.15), 15);
        assert_eq!(mask_count(1, 0.15), 1);
    }

    #[test]
    fn mlm_small_and_reconstruction() {
        // summary (2) + SEP + 3 method tokens = 6
        let r = MethodRecord::new("r", java::tokenize("a b c").unwrap(), vec!["x".into(), "y".into()], vec![]);
        let inst = gen_mlm(&r, 7, DEFAULT_RATE);
        assert_eq!(inst.target_tokens.len(), 2);
        assert_eq!(inst.target_tokens[0], "<MASK_0>");
        assert!(inst.input_tokens.contains(&SEP.to_string()));
        assert_eq!(splice_mlm(&inst.input_tokens, &inst.target_tokens).unwrap(), surface(&r));
    }

    #[test]
    fn mlm_twenty_tokens() {
        let r = record("r", "int f(int a, int b) { return a + b; }", "Sums two ints");
        assert_eq!(surface(&r).len(), 20);
        let inst = gen_mlm(&r, 3, DEFAULT_RATE);
        let masks: Vec<&String> = inst.input_tokens.iter().filter(|t| t.starts_with("<MASK_")).collect();
        assert_eq!(masks, ["<MASK_0>", "<MASK_1>", "<MASK_2>"]);
        assert_eq!(gen_mlm(&r, 3, DEFAULT_RATE), inst);
    }

    #[test]
    fn rtd_positions_and_replacements() {
        let recs: Vec<MethodRecord> = (0..20)
            .map(|i| record(&format!("r{i}"), &format!("int f{i}(int a, int b) {{ return a + b * {i}; }}"), "Sums two ints"))
            .collect();
        let corpus: Vec<Vec<String>> = recs
            .iter()
            .flat_map(|r| [r.summary_tokens.clone(), texts(&r.method_tokens)])
            .collect();
        let model = NgramModel::train(&corpus).unwrap();
        for r in &recs {
            let inst = gen_rtd(r, &model, 11, DEFAULT_RATE);
            let orig = surface(r);
            let pos: Vec<usize> = inst.target_tokens.iter().map(|p| p.parse().unwrap()).collect();
            assert_eq!(pos.len(), mask_count(orig.len(), DEFAULT_RATE));
            assert!(pos.windows(2).all(|w| w[0] < w[1]));
            for (k, (a, b)) in orig.iter().zip(&inst.input_tokens).enumerate() {
                assert_eq!(a != b, pos.contains(&k));
            }
        }
    }

    #[test]
    fn segment_context_pads_each_segment() {
        let s: Vec<String> = ["a", "b", SEP, "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        assert_eq!(segment_context(&s, 2, 0), (BOS, BOS));
        assert_eq!(segment_context(&s, 2, 1), (BOS, "a"));
        assert_eq!(segment_context(&s, 2, 3), (BOS, BOS));
        assert_eq!(segment_context(&s, 2, 4), (BOS, "c"));
        assert_eq!(segment_context(&s, 2, 5), ("c", "d"));
    }

    #[test]
    fn mng_masks_declaration_and_recursion() {
        let r = record("r", "int abs(int x){ if (x<0) return -x; return x; }", "Abs");
        let inst = gen_mng(&r).unwrap();
        assert_eq!(inst.input_tokens[1], NAME);
        assert_eq!(inst.target_tokens, ["abs"]);
        let r = record("f", "int fact(int n){ return n<=1 ? 1 : n*fact(n-1); }", "Fact");
        let inst = gen_mng(&r).unwrap();
        assert_eq!(inst.input_tokens.iter().filter(|t| *t == NAME).count(), 2);
        assert!(!inst.input_tokens.iter().any(|t| t == "fact"));
    }

    #[test]
    fn imf_targets_original() {
        let r = record("r", "int f(int a){ if (a > 0) { a++; } return a; }", "F");
        let inst = gen_imf(&r, 5).unwrap();
        assert_eq!(inst.target_tokens, texts(&r.method_tokens));
        assert_ne!(inst.input_tokens, inst.target_tokens);
        let none = record("n", "void g(){ int i=5; }", "G");
        assert_eq!(gen_imf(&none, 5), Err(ObjectiveError::Mutation(MutationError::NoneApplicable)));
        assert_eq!(gen_imf_all(&r).unwrap().len(), 4);
    }

    #[test]
    fn cbs_labels_true_block() {
        let recs = vec![
            record("a", "void f(int x){ if (x > 0) { g(x); } }", "A"),
            record("b", "void h(int y){ while (y > 0) { y--; } }", "B"),
            record("c", "void k(){ int z = 1; }", "C"),
        ];
        let pool = DistractorPool::build(&recs);
        assert_eq!(pool.len(), 2);
        for seed in 0..20 {
            let inst = gen_cbs(&recs[0], &pool, seed).unwrap();
            let c0 = inst.input_tokens.iter().position(|t| t == CAND_0).unwrap();
            let c1 = inst.input_tokens.iter().position(|t| t == CAND_1).unwrap();
            let cands = [&inst.input_tokens[c0 + 1..c1], &inst.input_tokens[c1 + 1..]];
            let truth: Vec<&str> = vec!["{", "g", "(", "x", ")", ";", "}"];
            let slot: usize = inst.target_tokens[0].parse().unwrap();
            assert_eq!(cands[slot], truth.as_slice());
            assert_ne!(cands[1 - slot], truth.as_slice());
            assert_eq!(inst.input_tokens.iter().filter(|t| *t == BLOCK).count(), 1);
        }
        assert_eq!(gen_cbs(&recs[2], &pool, 0), Err(ObjectiveError::NoBlock));
        let lonely = DistractorPool::build(&recs[..1]);
        assert_eq!(gen_cbs(&recs[0], &lonely, 0), Err(ObjectiveError::NoDistractor));
    }

    #[test]
    fn nsp_pairs() {
        let recs = vec![
            record("a", "void f(){ int a=1; int b=2; }", "A"),
            record("b", "void g(){ x(); y(); z(); w(); }", "B"),
            record("c", "void h(){ q(); }", "C"),
        ];
        let out = gen_nsp(&recs, 1);
        assert_eq!(out.len(), 2);
        let pool = StatementPool::build(&recs);
        let mut seen = HashMap::new();
        for seed in 0..200 {
            let inst = gen_nsp_one(&pool, 0, seed).unwrap();
            let sep = inst.input_tokens.iter().position(|t| t == SEP).unwrap();
            let a = inst.input_tokens[..sep].join(" ");
            let b = inst.input_tokens[sep + 1..].join(" ");
            assert_eq!(a, "int a = 1 ;");
            if inst.target_tokens[0] == "yes" {
                assert_eq!(b, "int b = 2 ;");
            } else {
                assert_ne!(b, "int b = 2 ;");
            }
            *seen.entry(inst.target_tokens[0].clone()).or_insert(0) += 1;
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn mixing_preserves_counts_and_is_seeded() {
        let recs: Vec<MethodRecord> = (0..100)
            .map(|i| record(&format!("r{i}"), &format!("int f(){{ return {i}; }}"), "Returns value"))
            .collect();
        let mlm: Vec<_> = recs.iter().map(|r| gen_mlm(r, 1, DEFAULT_RATE)).collect();
        let mng: Vec<_> = recs.iter().map(|r| gen_mng(r).unwrap()).collect();
        let mixed = mix_objectives(vec![(Objective::Mlm, mlm.clone()), (Objective::Mng, mng.clone())], 9).unwrap();
        assert_eq!(mixed.len(), 200);
        assert_eq!(mixed.iter().filter(|i| i.input_tokens[0] == "mlm:").count(), 100);
        assert_eq!(mixed.iter().filter(|i| i.input_tokens[0] == "mng:").count(), 100);
        let again = mix_objectives(vec![(Objective::Mlm, mlm.clone()), (Objective::Mng, mng)], 9).unwrap();
        assert_eq!(mixed, again);
        assert_eq!(mix_objectives(vec![(Objective::Mlm, mlm)], 9), Err(ObjectiveError::TooFewStreams));
    }

    #[test]
    fn objective_tags_parse() {
        for o in Objective::ALL {
            assert_eq!(o.tag().parse::<Objective>().unwrap(), o);
        }
        assert!("xyz".parse::<Objective>().is_err());
    }
}
