//! Source-level mutation operators.
//!
//! The eleven operators of the classic default group, re-expressed as token
//! rewrites so that methods never need to compile. Each [`Mutant`] applies
//! exactly one [`MutationSite`].

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clean::MethodRecord;
use crate::java::{self, MethodShape, StatementKind, Token, TokenKind};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationOperator {
    ConditionalsBoundary,
    Increments,
    InvertNegatives,
    Math,
    NegateConditionals,
    VoidMethodCalls,
    EmptyReturns,
    FalseReturns,
    TrueReturns,
    NullReturns,
    PrimitiveReturns,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 11] = [
        MutationOperator::ConditionalsBoundary,
        MutationOperator::Increments,
        MutationOperator::InvertNegatives,
        MutationOperator::Math,
        MutationOperator::NegateConditionals,
        MutationOperator::VoidMethodCalls,
        MutationOperator::EmptyReturns,
        MutationOperator::FalseReturns,
        MutationOperator::TrueReturns,
        MutationOperator::NullReturns,
        MutationOperator::PrimitiveReturns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ConditionalsBoundary => "ConditionalsBoundary",
            Self::Increments => "Increments",
            Self::InvertNegatives => "InvertNegatives",
            Self::Math => "Math",
            Self::NegateConditionals => "NegateConditionals",
            Self::VoidMethodCalls => "VoidMethodCalls",
            Self::EmptyReturns => "EmptyReturns",
            Self::FalseReturns => "FalseReturns",
            Self::TrueReturns => "TrueReturns",
            Self::NullReturns => "NullReturns",
            Self::PrimitiveReturns => "PrimitiveReturns",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| format!("unknown mutation operator {s:?}"))
    }
}

/// Replace tokens `start..end` with `replacement` (empty = delete).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MutationSite {
    pub operator: MutationOperator,
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutant {
    pub source_record_id: String,
    pub operator: MutationOperator,
    pub mutated_tokens: Vec<Token>,
    pub site: MutationSite,
}

impl Mutant {
    pub fn text(&self) -> String {
        java::detokenize(&self.mutated_tokens)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("mutation site leaves the method unchanged")]
    IdenticalMutant,
    #[error("none of the mutation operators applies")]
    NoneApplicable,
    #[error("mutant is not well formed: {0}")]
    Malformed(String),
}

fn relational(op: &str) -> Option<(&'static str, &'static str)> {
    // (boundary flip, negation)
    match op {
        "<" => Some(("<=", ">=")),
        "<=" => Some(("<", ">")),
        ">" => Some((">=", "<=")),
        ">=" => Some((">", "<")),
        _ => None,
    }
}

fn math_replacement(op: &str) -> Option<&'static str> {
    Some(match op {
        "+" => "-",
        "-" => "+",
        "*" => "/",
        "/" => "*",
        "%" => "*",
        "&" => "|",
        "|" => "&",
        "^" => "&",
        "<<" => ">>",
        ">>" => "<<",
        ">>>" => "<<",
        _ => return None,
    })
}

const PRIMITIVE_NUMERIC: &[&str] = &["int", "long", "short", "byte", "char", "float", "double"];
const BOXED_NUMERIC: &[&str] = &["Integer", "Long", "Short", "Byte", "Character", "Float", "Double"];

/// Return-value operators that apply to a declared return type, with the
/// replacement expression of each.
pub fn return_operators(shape: &MethodShape) -> Vec<(MutationOperator, Vec<&'static str>)> {
    use MutationOperator::*;
    let rt = &shape.return_type;
    if rt.is_none() || rt.is_void() {
        return Vec::new();
    }
    if rt.is_array {
        return vec![(NullReturns, vec!["null"])];
    }
    let head = rt.head.as_str();
    let mut ops = Vec::new();
    match head {
        "String" => ops.push((EmptyReturns, vec!["\"\""])),
        "List" | "Collection" => {
            ops.push((EmptyReturns, vec!["Collections", ".", "emptyList", "(", ")"]))
        }
        "Set" => ops.push((EmptyReturns, vec!["Collections", ".", "emptySet", "(", ")"])),
        "Map" => ops.push((EmptyReturns, vec!["Collections", ".", "emptyMap", "(", ")"])),
        "Optional" => ops.push((EmptyReturns, vec!["Optional", ".", "empty", "(", ")"])),
        _ => {}
    }
    if head == "boolean" || head == "Boolean" {
        ops.push((FalseReturns, vec!["false"]));
        ops.push((TrueReturns, vec!["true"]));
    }
    let primitive = head == "boolean" || PRIMITIVE_NUMERIC.contains(&head);
    if !primitive {
        ops.push((NullReturns, vec!["null"]));
    }
    if PRIMITIVE_NUMERIC.contains(&head) || BOXED_NUMERIC.contains(&head) {
        ops.push((PrimitiveReturns, vec!["0"]));
    }
    ops
}

/// Tokens that must never be mutated: generic type arguments, catch
/// parameter lists and annotation arguments.
fn frozen_mask(tokens: &[Token]) -> Vec<bool> {
    let mut mask = java::generic_mask(tokens);
    let matching = java::match_delimiters(tokens).unwrap_or_else(|_| vec![None; tokens.len()]);
    for i in 0..tokens.len() {
        let frozen_parens = (tokens[i].is("catch") || tokens[i].kind == TokenKind::AnnotationName)
            && tokens.get(i + 1).is_some_and(|t| t.is("("));
        if frozen_parens {
            if let Some(close) = matching[i + 1] {
                mask[i + 1..=close].iter_mut().for_each(|m| *m = true);
            }
        }
    }
    mask
}

/// Whether the token at `i` ends an operand, making a following `+`/`-`
/// binary.
fn ends_operand(tokens: &[Token], i: usize) -> bool {
    let t = &tokens[i];
    match t.kind {
        TokenKind::Identifier
        | TokenKind::NumberLiteral
        | TokenKind::StringLiteral
        | TokenKind::CharLiteral => true,
        TokenKind::Keyword => matches!(
            t.text.as_str(),
            "this" | "super" | "null" | "true" | "false" | "class"
        ),
        _ => {
            t.is(")")
                || t.is("]")
                || ((t.is("++") || t.is("--")) && i > 0 && ends_operand(tokens, i - 1))
        }
    }
}

fn is_bare_call(tokens: &[Token], start: usize, end: usize, generic: &[bool]) -> bool {
    if end < start + 3 || !tokens[end].is(";") || !tokens[end - 1].is(")") {
        return false;
    }
    // Matching `(` of the final argument list.
    let mut depth = 0i64;
    let mut open = None;
    for j in (start..end).rev() {
        match tokens[j].text.as_str() {
            ")" => depth += 1,
            "(" => {
                depth -= 1;
                if depth == 0 {
                    open = Some(j);
                    break;
                }
            }
            _ => {}
        }
    }
    let Some(open) = open else { return false };
    if open == start || tokens[start].is("(") || tokens[open - 1].kind != TokenKind::Identifier {
        return false;
    }
    // Receiver chain: identifiers, `this`, `super`, dots, generic arguments
    // and balanced call/index groups.
    let mut j = start;
    let mut depth = 0i64;
    while j < open - 1 {
        let t = &tokens[j];
        match t.text.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => depth -= 1,
            _ if depth > 0 => {}
            "." | "this" | "super" => {}
            _ if t.kind == TokenKind::Identifier || generic[j] => {}
            _ => return false,
        }
        j += 1;
    }
    depth == 0 && (open - 1 == start || tokens[open - 2].is(".") || generic[open - 2])
}

/// Every applicable mutation site, ordered by position then operator.
pub fn find_sites(shape: &MethodShape, tokens: &[Token]) -> Vec<MutationSite> {
    use MutationOperator::*;
    let mut sites = Vec::new();
    let frozen = frozen_mask(tokens);
    let generic = java::generic_mask(tokens);
    let (open, close) = shape.body;
    let site = |operator, start, end, replacement: &[&str]| MutationSite {
        operator,
        start,
        end,
        replacement: replacement.iter().map(|s| s.to_string()).collect(),
    };

    for i in open + 1..close {
        if frozen[i] {
            continue;
        }
        let t = tokens[i].text.as_str();
        if let Some((boundary, negated)) = relational(t) {
            sites.push(site(ConditionalsBoundary, i, i + 1, &[boundary]));
            sites.push(site(NegateConditionals, i, i + 1, &[negated]));
            continue;
        }
        match t {
            "==" => sites.push(site(NegateConditionals, i, i + 1, &["!="])),
            "!=" => sites.push(site(NegateConditionals, i, i + 1, &["=="])),
            "++" => sites.push(site(Increments, i, i + 1, &["--"])),
            "--" => sites.push(site(Increments, i, i + 1, &["++"])),
            "+=" => sites.push(site(Increments, i, i + 1, &["-="])),
            "-=" => sites.push(site(Increments, i, i + 1, &["+="])),
            "+" | "-" if !ends_operand(tokens, i - 1) => {
                let next = &tokens[i + 1];
                if t == "-"
                    && matches!(next.kind, TokenKind::Identifier | TokenKind::NumberLiteral)
                {
                    sites.push(site(InvertNegatives, i, i + 1, &[]));
                }
            }
            _ => {
                if let Some(rep) = math_replacement(t) {
                    sites.push(site(Math, i, i + 1, &[rep]));
                }
            }
        }
    }

    let return_ops = return_operators(shape);
    for st in &shape.statements {
        if st.kind != StatementKind::Simple {
            continue;
        }
        if st.listed && is_bare_call(tokens, st.start, st.end, &generic) {
            sites.push(site(VoidMethodCalls, st.start, st.end + 1, &[]));
        }
        let is_value_return = tokens[st.start].is("return")
            && tokens[st.end].is(";")
            && st.end > st.start + 1;
        if is_value_return {
            let expr: Vec<&str> = tokens[st.start + 1..st.end]
                .iter()
                .map(|t| t.text.as_str())
                .collect();
            for (op, rep) in &return_ops {
                if expr != *rep {
                    sites.push(site(*op, st.start + 1, st.end, rep));
                }
            }
        }
    }
    sites.sort_by_key(|s| (s.start, s.operator));
    sites
}

fn spliced_texts<'a>(tokens: &'a [Token], site: &'a MutationSite) -> impl Iterator<Item = &'a str> + Clone {
    tokens[..site.start]
        .iter()
        .map(|t| t.text.as_str())
        .chain(site.replacement.iter().map(String::as_str))
        .chain(tokens[site.end..].iter().map(|t| t.text.as_str()))
}

fn splice(tokens: &[Token], site: &MutationSite) -> Vec<String> {
    spliced_texts(tokens, site).map(String::from).collect()
}

/// Applies one site and re-lexes the result.
pub fn apply(record_id: &str, tokens: &[Token], site: &MutationSite) -> Result<Mutant, MutationError> {
    if site.start > site.end || site.end > tokens.len() {
        return Err(MutationError::Malformed("site out of range".into()));
    }
    let spliced = splice(tokens, site);
    if spliced.iter().map(String::as_str).eq(tokens.iter().map(|t| t.text.as_str())) {
        return Err(MutationError::IdenticalMutant);
    }
    let mutated_tokens = java::tokenize(&java::render(&spliced))
        .map_err(|e| MutationError::Malformed(e.to_string()))?;
    if !mutated_tokens.iter().map(|t| t.text.as_str()).eq(spliced.iter().map(String::as_str)) {
        return Err(MutationError::Malformed("re-tokenization changed the token stream".into()));
    }
    Ok(Mutant {
        source_record_id: record_id.to_string(),
        operator: site.operator,
        mutated_tokens,
        site: site.clone(),
    })
}

/// Sites of the record whose results are pairwise distinct, in site order;
/// later sites that duplicate an earlier result are dropped.
pub fn distinct_sites(record: &MethodRecord) -> Result<Vec<MutationSite>, MutationError> {
    let tokens = &record.method_tokens;
    let shape = java::parse_structure(tokens).map_err(|e| MutationError::Malformed(e.to_string()))?;
    // Hash of each kept result; full comparison only on a hash hit.
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut kept: Vec<MutationSite> = Vec::new();
    for site in find_sites(&shape, tokens) {
        let mut h = DefaultHasher::new();
        spliced_texts(tokens, &site).for_each(|t| t.hash(&mut h));
        let bucket = seen.entry(h.finish()).or_default();
        if bucket.iter().any(|&k| spliced_texts(tokens, &kept[k]).eq(spliced_texts(tokens, &site))) {
            continue;
        }
        bucket.push(kept.len());
        kept.push(site);
    }
    Ok(kept)
}

/// One mutant per site, skipping sites whose result duplicates an earlier one.
pub fn enumerate_mutants(record: &MethodRecord) -> Result<Vec<Mutant>, MutationError> {
    distinct_sites(record)?
        .iter()
        .map(|site| apply(&record.id, &record.method_tokens, site))
        .collect()
}

/// A uniformly drawn mutant; the draw depends only on `seed` and the record id.
pub fn sample_one(record: &MethodRecord, seed: u64) -> Result<Mutant, MutationError> {
    let sites = distinct_sites(record)?;
    if sites.is_empty() {
        return Err(MutationError::NoneApplicable);
    }
    let mut rng = rng_for(seed, &["imf", &record.id]);
    let idx = rng.gen_range(0..sites.len());
    apply(&record.id, &record.method_tokens, &sites[idx])
}
