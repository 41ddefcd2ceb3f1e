//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed:
//! `cargo test --test acceptance`.

mod common;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::Command as Proc;
use std::time::{Duration, Instant};

use jpretrain::clean::MethodRecord;
use jpretrain::eval::{self, ScoredPair, PredictionSet, Smoothing};
use jpretrain::finetune::{self, Split, DEFAULT_FRACTIONS};
use jpretrain::java;
use jpretrain::mutation::{self, Mutant, MutationOperator};
use jpretrain::ngram::{NgramModel, BOS};
use jpretrain::objectives::{self, DistractorPool, StatementPool, BLOCK, CAND_0, CAND_1, SEP};
use jpretrain::pipeline::{self, Command, Flags};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const SEED: u64 = 20_240_417;

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn texts(tokens: &[java::Token]) -> Vec<String> {
    tokens.iter().map(|t| t.text.clone()).collect()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1 -----------------------------------------------------------------------

fn split_reproduction() -> Outcome {
    let start = Instant::now();
    let ids: Vec<String> = (0..27_901).map(|i| format!("inst-{i:05}")).collect();
    let labels = finetune::split_labels(&ids, DEFAULT_FRACTIONS, SEED).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let count = |s: Split| labels.iter().filter(|l| **l == s).count();
    let got = (count(Split::Train), count(Split::Validation), count(Split::Test));
    check(got == (22_321, 2_790, 2_790), || format!("sizes {got:?}"))?;
    check(finetune::split_sizes(27_901, DEFAULT_FRACTIONS) == Ok(got), || "split_sizes disagrees".into())?;
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{got:?} in {elapsed:?}"))
}

// 2 -----------------------------------------------------------------------

/// Expected corruption count, in integer arithmetic.
fn expected_masks(n: usize) -> usize {
    (15 * n / 100).max(1)
}

fn masking_rate(records: &[MethodRecord]) -> Outcome {
    let model = NgramModel::train(pipeline::ngram_corpus(records)).map_err(|e| e.to_string())?;
    let (mut instances, mut exact) = (0usize, 0usize);
    let mut agg = [(0usize, 0usize); 2];
    for r in records {
        let surface = objectives::surface(r);
        let n = surface.len();
        let m = expected_masks(n);
        let mlm = objectives::gen_mlm(r, SEED, 0.15);
        let rtd = objectives::gen_rtd(r, &model, SEED, 0.15);
        for (k, inst) in [mlm, rtd].iter().enumerate() {
            let changed = surface.iter().zip(&inst.input_tokens).filter(|(a, b)| a != b).count();
            let declared = if k == 0 { inst.target_tokens.len() / 2 } else { inst.target_tokens.len() };
            instances += 1;
            if changed == m && declared == m && inst.input_tokens.len() == n {
                exact += 1;
            }
            if n >= 20 {
                agg[k].0 += changed;
                agg[k].1 += n;
            }
        }
    }
    let rates = agg.map(|(c, n)| c as f64 / n as f64);
    check(instances >= 10_000, || format!("only {instances} instances"))?;
    check(exact == instances, || format!("{} of {instances} instances off the exact count", instances - exact))?;
    check(rates.iter().all(|r| (r - 0.15).abs() <= 0.005), || format!("aggregate rates {rates:?}"))?;
    Ok(format!("{instances} instances exact; aggregate mlm {:.4} rtd {:.4}", rates[0], rates[1]))
}

// 3 -----------------------------------------------------------------------

/// Brute-force trigram oracle: recounts the corpus for every query.
struct Oracle<'a> {
    seqs: &'a [Vec<String>],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Level {
    Trigram,
    Bigram,
    Unigram,
    Fallback,
}

impl Oracle<'_> {
    fn counts(&self, ctx: &[&str]) -> Vec<(String, u64)> {
        let mut c: HashMap<&str, u64> = HashMap::new();
        for seq in self.seqs {
            let padded: Vec<&str> = [BOS, BOS].into_iter().chain(seq.iter().map(String::as_str)).collect();
            let k = ctx.len();
            for w in padded.windows(k + 1).skip(2 - k) {
                if w[..k] == *ctx {
                    *c.entry(w[k]).or_default() += 1;
                }
            }
        }
        let mut v: Vec<(String, u64)> = c.into_iter().map(|(k, n)| (k.to_string(), n)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }

    /// Top candidate, or the second one when the top equals `original`.
    fn choose(&self, u: &str, v: &str, original: &str) -> (Option<String>, Level, bool) {
        for (ctx, level) in [(vec![u, v], Level::Trigram), (vec![v], Level::Bigram), (vec![], Level::Unigram)] {
            let ranked = self.counts(&ctx);
            if ranked.is_empty() {
                continue;
            }
            if ranked[0].0 != original {
                return (Some(ranked[0].0.clone()), level, false);
            }
            if let Some(second) = ranked.get(1) {
                return (Some(second.0.clone()), level, true);
            }
        }
        (None, Level::Fallback, false)
    }
}

fn rtd_oracle() -> Outcome {
    let records = common::tiny_records(1000, SEED);
    let total: usize = records.iter().map(MethodRecord::token_count).sum();
    check(total <= 10_000, || format!("corpus has {total} tokens"))?;
    let seqs: Vec<Vec<String>> = records
        .iter()
        .flat_map(|r| [r.summary_tokens.clone(), texts(&r.method_tokens)])
        .collect();
    let model = NgramModel::train(&seqs).map_err(|e| e.to_string())?;
    let oracle = Oracle { seqs: &seqs };
    let mut mismatches = 0;
    let mut levels: HashMap<Level, usize> = HashMap::new();
    let mut second = 0;
    let mut checked = 0;
    for r in &records {
        let inst = objectives::gen_rtd(r, &model, SEED, 0.15);
        let summary = &r.summary_tokens;
        let method = texts(&r.method_tokens);
        let positions: HashSet<usize> = inst.target_tokens.iter().map(|p| p.parse().unwrap()).collect();
        for (p, tok) in inst.input_tokens.iter().enumerate() {
            // Predecessors inside the token's own segment.
            let (seg, i): (&[String], usize) = if p < summary.len() {
                (summary, p)
            } else if p == summary.len() {
                if tok != SEP || positions.contains(&p) {
                    mismatches += 1;
                }
                continue;
            } else {
                (&method, p - summary.len() - 1)
            };
            let original = &seg[i];
            if !positions.contains(&p) {
                mismatches += usize::from(tok != original);
                continue;
            }
            let u = if i >= 2 { seg[i - 2].as_str() } else { BOS };
            let v = if i >= 1 { seg[i - 1].as_str() } else { BOS };
            let (want, level, used_second) = oracle.choose(u, v, original);
            *levels.entry(level).or_default() += 1;
            second += usize::from(used_second);
            checked += 1;
            match want {
                Some(w) => mismatches += usize::from(*tok != w),
                None => mismatches += usize::from(tok == original),
            }
        }
    }
    let seen = |l| levels.get(&l).copied().unwrap_or(0);
    check(mismatches == 0, || format!("{mismatches} mismatches over {checked} replacements"))?;
    check(
        seen(Level::Trigram) > 0 && seen(Level::Bigram) > 0 && seen(Level::Unigram) > 0 && second > 0,
        || format!("coverage incomplete: {levels:?}, second-position {second}"),
    )?;
    Ok(format!(
        "{checked} replacements, 0 mismatches (trigram {}, bigram {}, unigram {}, second-position {second})",
        seen(Level::Trigram),
        seen(Level::Bigram),
        seen(Level::Unigram)
    ))
}

// 4 -----------------------------------------------------------------------

#[derive(Deserialize)]
struct GoldenCase {
    method: String,
    mutants: Vec<GoldenMutant>,
}

#[derive(Deserialize, PartialEq, Eq, PartialOrd, Ord, Debug, Clone)]
struct GoldenMutant {
    operator: String,
    mutated: String,
}

fn record_of(id: &str, src: &str) -> MethodRecord {
    MethodRecord::new(id, java::tokenize(src).expect("golden method lexes"), vec!["Golden".into()], vec![])
}

/// Whether replacing `removed` by `inserted` is a legal edit of `op`.
fn legal_edit(op: MutationOperator, removed: &[String], inserted: &[String], after: Option<&java::Token>) -> bool {
    use MutationOperator::*;
    let one = |a: &str, b: &str| removed == [a] && inserted == [b];
    let table: &[(&str, &str)] = match op {
        ConditionalsBoundary => &[("<", "<="), ("<=", "<"), (">", ">="), (">=", ">")],
        NegateConditionals => &[("==", "!="), ("!=", "=="), ("<=", ">"), (">=", "<"), ("<", ">="), (">", "<=")],
        Increments => &[("++", "--"), ("--", "++"), ("+=", "-="), ("-=", "+=")],
        Math => &[
            ("+", "-"),
            ("-", "+"),
            ("*", "/"),
            ("/", "*"),
            ("%", "*"),
            ("&", "|"),
            ("|", "&"),
            ("^", "&"),
            ("<<", ">>"),
            (">>", "<<"),
            (">>>", "<<"),
        ],
        InvertNegatives => {
            return removed == ["-"]
                && inserted.is_empty()
                && after.is_some_and(|t| matches!(t.kind, java::TokenKind::Identifier | java::TokenKind::NumberLiteral));
        }
        VoidMethodCalls => {
            return inserted.is_empty()
                && removed.last().is_some_and(|t| t == ";")
                && removed.iter().rev().nth(1).is_some_and(|t| t == ")");
        }
        EmptyReturns => {
            let allowed: [&[&str]; 5] = [
                &["\"\""],
                &["Collections", ".", "emptyList", "(", ")"],
                &["Collections", ".", "emptySet", "(", ")"],
                &["Collections", ".", "emptyMap", "(", ")"],
                &["Optional", ".", "empty", "(", ")"],
            ];
            return allowed.iter().any(|a| inserted == *a);
        }
        FalseReturns => return inserted == ["false"] && removed != ["false"],
        TrueReturns => return inserted == ["true"] && removed != ["true"],
        NullReturns => return inserted == ["null"] && removed != ["null"],
        PrimitiveReturns => return inserted == ["0"] && removed != ["0"],
    };
    table.iter().any(|(a, b)| one(a, b))
}

/// A mutant is one contiguous edit of the original, legal for its operator.
fn single_edit(original: &[java::Token], m: &Mutant) -> Result<(), String> {
    let orig = texts(original);
    let mutated = texts(&m.mutated_tokens);
    if orig == mutated {
        return Err("mutant equals original".into());
    }
    let relexed = java::tokenize(&m.text()).map_err(|e| format!("re-lex failed: {e}"))?;
    if texts(&relexed) != mutated {
        return Err(format!("re-lex changed tokens: {}", m.text()));
    }
    java::parse_structure(&relexed).map_err(|e| format!("mutant does not parse: {e}: {}", m.text()))?;
    let s = &m.site;
    let removed = &orig[s.start..s.end];
    let expect: Vec<String> =
        orig[..s.start].iter().chain(&s.replacement).chain(&orig[s.end..]).cloned().collect();
    if expect != mutated {
        return Err(format!("site does not describe the edit: {}", m.text()));
    }
    if !legal_edit(m.operator, removed, &s.replacement, original.get(s.end)) {
        return Err(format!("{} edit {removed:?} -> {:?} not in its table", m.operator, s.replacement));
    }
    Ok(())
}

fn mutation_suite(fuzz: &[MethodRecord]) -> Outcome {
    let golden: Vec<GoldenCase> =
        serde_json::from_str(&fs::read_to_string(data("mutation_golden.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let mut per_op: HashMap<String, usize> = HashMap::new();
    for (i, case) in golden.iter().enumerate() {
        let rec = record_of(&format!("g{i}"), &case.method);
        let mut got: Vec<GoldenMutant> = mutation::enumerate_mutants(&rec)
            .map_err(|e| format!("{}: {e}", case.method))?
            .iter()
            .map(|m| GoldenMutant { operator: m.operator.to_string(), mutated: m.text() })
            .collect();
        let mut want = case.mutants.clone();
        got.sort();
        want.sort();
        check(got == want, || format!("golden mismatch on `{}`: got {got:?}", case.method))?;
        for m in &want {
            *per_op.entry(m.operator.clone()).or_default() += 1;
        }
    }
    let thin: Vec<_> = MutationOperator::ALL.iter().filter(|op| per_op.get(op.name()).copied().unwrap_or(0) < 2).collect();
    check(golden.len() >= 22 && thin.is_empty(), || format!("golden corpus too thin: {thin:?}"))?;

    let mut total = 0;
    for r in fuzz {
        let mutants = mutation::enumerate_mutants(r).map_err(|e| format!("{}: {e}", r.id))?;
        for m in &mutants {
            single_edit(&r.method_tokens, m).map_err(|e| format!("{}: {e}", r.id))?;
        }
        total += mutants.len();
    }
    check(fuzz.len() >= 10_000, || format!("only {} fuzz methods", fuzz.len()))?;
    Ok(format!("{} golden methods match; {total} mutants of {} fuzzed methods are single legal edits", golden.len(), fuzz.len()))
}

// 5 -----------------------------------------------------------------------

fn reconstruction(records: &[MethodRecord]) -> Outcome {
    let (mut mlm, mut imf, mut completion) = (0, 0, 0);
    for r in records {
        let surface = objectives::surface(r);
        let inst = objectives::gen_mlm(r, SEED, 0.15);
        let back = objectives::splice_mlm(&inst.input_tokens, &inst.target_tokens);
        check(back.as_ref() == Some(&surface), || format!("mlm splice-back failed for {}", r.id))?;
        mlm += 1;

        let method = texts(&r.method_tokens);
        if let Ok(inst) = objectives::gen_imf(r, SEED) {
            check(inst.target_tokens == method, || format!("imf target differs for {}", r.id))?;
            check(inst.input_tokens != method, || format!("imf input equals target for {}", r.id))?;
            imf += 1;
        }
        for c in finetune::build_completion_one(r) {
            let back = finetune::splice_block(&c.input_tokens, &c.target_tokens);
            check(back.as_ref() == Some(&method), || format!("completion splice-back failed for {}", c.id))?;
            completion += 1;
        }
    }
    check(imf > 0 && completion > 0, || "no imf or completion instance generated".into())?;
    Ok(format!("mlm {mlm}, imf {imf}, completion {completion} instances reconstruct"))
}

// 6 -----------------------------------------------------------------------

fn slice_after<'a>(input: &'a [String], marker: &str, end: Option<&str>) -> &'a [String] {
    let from = input.iter().position(|t| t == marker).map_or(input.len(), |p| p + 1);
    let to = end.and_then(|e| input[from..].iter().position(|t| t == e)).map_or(input.len(), |p| from + p);
    &input[from..to]
}

fn balance(records: &[MethodRecord]) -> Outcome {
    let pool = DistractorPool::build(records);
    let (mut cbs, mut cbs_ones) = (0usize, 0usize);
    for r in records {
        if cbs == 10_000 {
            break;
        }
        let Ok(inst) = objectives::gen_cbs(r, &pool, SEED) else { continue };
        let input = &inst.input_tokens;
        let slot = input.iter().position(|t| t == BLOCK).ok_or("no <BLOCK>")?;
        let cand0 = input.iter().position(|t| t == CAND_0).ok_or("no <CAND_0>")?;
        let method = texts(&r.method_tokens);
        // Tokens before and after the placeholder pin down the removed block.
        let suffix = cand0 - slot - 1;
        let removed = &method[slot..method.len() - suffix];
        let c0 = slice_after(input, CAND_0, Some(CAND_1));
        let c1 = slice_after(input, CAND_1, None);
        let equal = [c0 == removed, c1 == removed];
        check(equal.iter().filter(|e| **e).count() == 1, || format!("{}: {equal:?} candidates equal the block", r.id))?;
        let label: usize = inst.target_tokens[0].parse().map_err(|_| "bad cbs label")?;
        check(equal[label], || format!("{}: label points at the distractor", r.id))?;
        cbs += 1;
        cbs_ones += label;
    }

    let spool = StatementPool::build(records);
    let (mut nsp, mut nsp_yes) = (0usize, 0usize);
    for i in 0..spool.len() {
        if nsp == 10_000 {
            break;
        }
        if let Some(inst) = objectives::gen_nsp_one(&spool, i, SEED) {
            nsp += 1;
            nsp_yes += usize::from(inst.target_tokens == ["yes"]);
        }
    }
    check(cbs == 10_000 && nsp == 10_000, || format!("only {cbs} cbs / {nsp} nsp instances"))?;
    let fc = cbs_ones as f64 / cbs as f64;
    let fn_ = nsp_yes as f64 / nsp as f64;
    let ok = |f: f64| (0.48..=0.52).contains(&f);
    check(ok(fc) && ok(fn_), || format!("balance cbs {fc:.4} nsp {fn_:.4}"))?;
    Ok(format!("cbs slot-1 share {fc:.4}, nsp positive share {fn_:.4}, every cbs has exactly one true candidate"))
}

// 7 -----------------------------------------------------------------------

fn jsonl(path: &Path) -> Result<Vec<serde_json::Value>, String> {
    fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn cleaning_golden() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let flags = Flags {
        input: vec![data("clean_raw.jsonl")],
        output: Some(dir.path().to_path_buf()),
        ..Flags::default()
    };
    pipeline::run(Command::Clean, &flags).map_err(|e| e.to_string())?;
    let mut got = jsonl(&dir.path().join("records.jsonl"))?;
    for line in &mut got {
        let obj = line.as_object_mut().ok_or("record is not an object")?;
        let hash = obj.remove("hash").ok_or("record without hash")?;
        let method = obj["method"].as_str().ok_or("method is not a string")?;
        let tokens = java::tokenize(method).map_err(|e| e.to_string())?;
        check(hash == jpretrain::clean::method_hash(&tokens), || format!("stale hash on {}", obj["id"]))?;
    }
    let want = jsonl(&data("clean_expected_records.jsonl"))?;
    check(got == want, || "survivor set differs from the golden file".into())?;
    let rejections = jsonl(&dir.path().join("rejections.jsonl"))?;
    check(rejections == jsonl(&data("clean_expected_rejections.jsonl"))?, || "rejection log differs".into())?;
    let shared = got.iter().any(|r| {
        let links = r["links"].as_array().map_or(0, Vec::len);
        let m = r["method"].as_str().unwrap_or("");
        let s = r["summary"].as_str().unwrap_or("");
        links > 0 && m.contains("<LINK_0>") && s.contains("<LINK_0>")
    });
    check(shared, || "no survivor shares <LINK_0> between summary and method".into())?;
    let reasons: HashSet<&str> = rejections.iter().filter_map(|r| r["reason"].as_str()).collect();
    Ok(format!("{} survivors, {} rejections over {} reasons match", got.len(), rejections.len(), reasons.len()))
}

// 8 -----------------------------------------------------------------------

fn dp_levenshtein(a: &[u8], b: &[u8]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

/// Two-sided exact p from the full binomial distribution: the mass of every
/// outcome no more likely than the observed one.
fn enumerated_p(n10: u64, n01: u64) -> f64 {
    let n = (n10 + n01) as usize;
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    let observed = row[n10 as usize];
    let mass: u128 = row.iter().filter(|c| **c <= observed).sum();
    (mass as f64 / (1u128 << n) as f64).min(1.0)
}

fn metrics_oracles() -> Outcome {
    let words = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    let preds = PredictionSet::from_pairs(vec![ScoredPair {
        id: "0".into(),
        prediction: words("a b c d f"),
        target: words("a b c d e"),
    }]);
    let bleu = eval::bleu4(&preds, Smoothing::default());
    check((bleu - 0.6687).abs() <= 0.0005, || format!("bleu {bleu}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..10_000 {
        let mut gen = || -> Vec<u8> { (0..rng.gen_range(0..24)).map(|_| rng.gen_range(b'a'..b'e')).collect() };
        let (a, b) = (gen(), gen());
        let want = if a.is_empty() && b.is_empty() { 0.0 } else { dp_levenshtein(&a, &b) as f64 / a.len().max(b.len()) as f64 };
        let got = eval::norm_levenshtein(&a, &b);
        check(got == want, || format!("levenshtein {a:?} {b:?}: {got} vs {want}"))?;
    }

    let mut worst = 0f64;
    for n in 1..=20u64 {
        for n10 in 0..=n {
            let d = (eval::mcnemar_exact(n10, n - n10) - enumerated_p(n10, n - n10)).abs();
            worst = worst.max(d);
        }
    }
    check(worst < 1e-12, || format!("mcnemar exact off by {worst:e}"))?;

    let holm = eval::holm_adjust(&[0.01, 0.04, 0.03]);
    check(holm == [0.03, 0.06, 0.06], || format!("holm {holm:?}"))?;
    let or = eval::odds_ratio_paired(10, 0);
    check(or == 21.0, || format!("odds ratio {or}"))?;
    Ok(format!("bleu {bleu:.4}, 10000 levenshtein pairs exact, mcnemar max |dp| {worst:.1e}, holm {holm:?}, OR {or}"))
}

// 9 -----------------------------------------------------------------------

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Proc::new(env!("CARGO_BIN_EXE_jpretrain")).args(args).output().map_err(|e| e.to_string())?;
    check(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn chain(raw: &Path, root: &Path, workers: &str) -> Result<(), String> {
    let d = |s: &str| root.join(s).to_string_lossy().into_owned();
    let common = ["--seed", "7", "--workers", workers];
    let run = |sub: &str, extra: &[&str]| -> Result<(), String> {
        let mut args = vec![sub];
        args.extend(common);
        args.extend(extra);
        cli(&args)
    };
    run("clean", &["--input", &raw.to_string_lossy(), "--output", &d("clean")])?;
    let records = format!("{}/records.jsonl", d("clean"));
    run("ngram-train", &["--input", &records, "--output", &d("ngram")])?;
    let model = format!("{}/ngram.json", d("ngram"));
    run("pretrain-gen", &["--input", &records, "--ngram", &model, "--output", &d("pretrain")])?;
    run("mutate", &["--input", &records, "--output", &d("mutate")])?;
    run("finetune-build", &["--task", "completion", "--input", &records, "--output", &d("finetune")])?;
    let ft = format!("{}/finetune.jsonl", d("finetune"));
    run("split", &["--input", &ft, "--output", &d("split")])
}

fn tree(root: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for stage in fs::read_dir(root).map_err(|e| e.to_string())? {
        let stage = stage.map_err(|e| e.to_string())?.path();
        for f in fs::read_dir(&stage).map_err(|e| e.to_string())? {
            let f = f.map_err(|e| e.to_string())?.path();
            let rel = f.strip_prefix(root).unwrap().to_string_lossy().into_owned();
            out.push((rel, fs::read(&f).map_err(|e| e.to_string())?));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let raw = dir.path().join("raw.jsonl");
    let body: String = common::raw_pairs(400, SEED)
        .iter()
        .map(|p| serde_json::to_string(p).unwrap() + "\n")
        .collect();
    fs::write(&raw, body).map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("w1"), dir.path().join("w4"));
    chain(&raw, &a, "1")?;
    chain(&raw, &b, "4")?;
    let (ta, tb) = (tree(&a)?, tree(&b)?);
    check(ta.len() >= 12, || format!("only {} output files", ta.len()))?;
    let names = |t: &[(String, Vec<u8>)]| t.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    check(names(&ta) == names(&tb), || "different file sets".into())?;
    for ((name, x), (_, y)) in ta.iter().zip(&tb) {
        check(x == y, || format!("{name} differs between 1 and 4 workers"))?;
    }
    Ok(format!("{} files byte-identical across 1 and 4 workers", ta.len()))
}

// 10 ----------------------------------------------------------------------

fn throughput(raw: &[jpretrain::clean::RawPair]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("raw.jsonl");
    let body: String = raw.iter().map(|p| serde_json::to_string(p).unwrap() + "\n").collect();
    fs::write(&input, body).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let clean = Flags {
        input: vec![input],
        output: Some(dir.path().join("clean")),
        seed: Some(SEED),
        ..Flags::default()
    };
    pipeline::run(Command::Clean, &clean).map_err(|e| e.to_string())?;
    let gen = Flags {
        input: vec![dir.path().join("clean/records.jsonl")],
        output: Some(dir.path().join("pretrain")),
        seed: Some(SEED),
        ..Flags::default()
    };
    let manifest = pipeline::run(Command::PretrainGen, &gen).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let instances = manifest.counts.get("instances").copied().unwrap_or(0);
    check(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!("{} methods cleaned and {instances} instances over six objectives in {elapsed:.1?}", raw.len()))
}

fn main() {
    let raw = common::raw_pairs(10_000, SEED);
    let records = common::clean_all(&raw);
    let fuzz = common::clean_all(&common::small_raw_pairs(10_000, SEED + 1));
    // Not every method has a block; pool both corpora for the balance run.
    let both: Vec<MethodRecord> = records.iter().chain(&fuzz).cloned().collect();

    let criteria: Vec<Criterion> = vec![
        ("split reproduction", Box::new(split_reproduction)),
        ("masking rate", Box::new(|| masking_rate(&records))),
        ("rtd oracle equivalence", Box::new(rtd_oracle)),
        ("mutation suite", Box::new(|| mutation_suite(&fuzz))),
        ("reconstruction", Box::new(|| reconstruction(&records))),
        ("cbs/nsp balance", Box::new(|| balance(&both))),
        ("cleaning golden run", Box::new(cleaning_golden)),
        ("metrics oracles", Box::new(metrics_oracles)),
        ("determinism", Box::new(determinism)),
        ("desk-scale throughput", Box::new(|| throughput(&raw))),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {}: FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
