//! Lightweight structural parsing of a single Java method.
//!
//! The parser recognises the method header, the statement layout of the body
//! and every brace-delimited block that belongs to a control-flow construct.
//! Lambda bodies, anonymous class bodies and array initialisers are skipped
//! as part of the enclosing expression statement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced delimiters at token {0}")]
    UnbalancedBraces(usize),
    #[error("no method header (name followed by `(`) before the body")]
    NoMethodHeader,
    #[error("method declaration has no body")]
    MissingBody,
    #[error("tokens after the closing brace of the method body")]
    TrailingTokens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockOwner {
    If,
    Else,
    ElseIf,
    For,
    While,
    Do,
    Switch,
    Try,
    Catch,
    Finally,
    Synchronized,
}

/// A control-flow block. `open` and `close` index the brace tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub open: usize,
    pub close: usize,
    pub owner: BlockOwner,
    pub top_level_statement_count: usize,
    /// 1 for blocks directly inside the method body.
    pub depth: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.close - self.open + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Block) -> bool {
        self.open < other.open && other.close < self.close
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatementKind {
    /// Terminated by `;` (or a local class body).
    Simple,
    /// `if`, loops, `switch`, `try`, bare blocks.
    Compound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub kind: StatementKind,
    /// Number of enclosing statements; 0 for statements directly in the body.
    pub depth: usize,
    /// Directly contained in a brace-delimited statement list, as opposed to
    /// being the unbraced body of `if`/`for`/`while`.
    pub listed: bool,
}

impl Statement {
    pub fn range(&self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnType {
    /// Rendered type text, e.g. `int`, `List<String>`, `void`. Empty for constructors.
    pub text: String,
    /// Simple name of the outermost type (`List` for `java.util.List<X>`).
    pub head: String,
    pub is_array: bool,
}

impl ReturnType {
    pub fn is_void(&self) -> bool {
        self.head == "void" && !self.is_array
    }

    pub fn is_none(&self) -> bool {
        self.text.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodShape {
    pub name_index: usize,
    pub return_type: ReturnType,
    pub params: (usize, usize),
    /// Indices of the body's opening and closing braces.
    pub body: (usize, usize),
    /// Pre-order, i.e. sorted by start index.
    pub statements: Vec<Statement>,
    /// Sorted by opening brace.
    pub blocks: Vec<Block>,
    pub self_call_indices: Vec<usize>,
}

impl MethodShape {
    pub fn name<'t>(&self, tokens: &'t [Token]) -> &'t str {
        &tokens[self.name_index].text
    }

    pub fn return_type_text(&self) -> &str {
        &self.return_type.text
    }

    pub fn body_statement_count(&self) -> usize {
        self.statements.iter().filter(|s| s.depth == 0).count()
    }

    pub fn simple_statements(&self) -> impl Iterator<Item = &Statement> {
        self.statements
            .iter()
            .filter(|s| s.kind == StatementKind::Simple)
    }

    pub fn body_is_empty(&self) -> bool {
        self.body.1 == self.body.0 + 1
    }
}

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "default",
    "transient",
    "volatile",
];

/// Index of the matching delimiter for every `(`, `[`, `{` and its closer.
pub fn match_delimiters(tokens: &[Token]) -> Result<Vec<Option<usize>>, ParseError> {
    let mut matching = vec![None; tokens.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Separator {
            continue;
        }
        let opener = match tok.text.as_str() {
            "(" | "[" | "{" => {
                stack.push(i);
                continue;
            }
            ")" => "(",
            "]" => "[",
            "}" => "{",
            _ => continue,
        };
        match stack.pop() {
            Some(j) if tokens[j].text == opener => {
                matching[i] = Some(j);
                matching[j] = Some(i);
            }
            _ => return Err(ParseError::UnbalancedBraces(i)),
        }
    }
    match stack.pop() {
        Some(j) => Err(ParseError::UnbalancedBraces(j)),
        None => Ok(matching),
    }
}

fn skip_angle_group(tokens: &[Token], mut i: usize) -> usize {
    let mut depth = 0i64;
    while i < tokens.len() {
        match tokens[i].text.as_str() {
            "<" => depth += 1,
            ">" => depth -= 1,
            ">>" => depth -= 2,
            ">>>" => depth -= 3,
            _ => {}
        }
        i += 1;
        if depth <= 0 {
            break;
        }
    }
    i
}

fn skip_annotation(tokens: &[Token], matching: &[Option<usize>], mut i: usize) -> usize {
    i += 1;
    while i + 1 < tokens.len() && tokens[i].is(".") && tokens[i + 1].kind == TokenKind::Identifier
    {
        i += 2;
    }
    if i < tokens.len() && tokens[i].is("(") {
        if let Some(close) = matching[i] {
            i = close + 1;
        }
    }
    i
}

/// Name index and parameter parentheses of the declaration.
fn find_header(
    tokens: &[Token],
    matching: &[Option<usize>],
) -> Result<(usize, usize, usize), ParseError> {
    let mut i = 0;
    while i + 1 < tokens.len() {
        let tok = &tokens[i];
        if tok.kind == TokenKind::AnnotationName {
            i = skip_annotation(tokens, matching, i);
            continue;
        }
        if tok.is("{") || tok.is(";") || tok.is("=") {
            break;
        }
        if tok.is("<") {
            i = skip_angle_group(tokens, i);
            continue;
        }
        if tok.kind == TokenKind::Identifier && tokens[i + 1].is("(") {
            let close = matching[i + 1].ok_or(ParseError::UnbalancedBraces(i + 1))?;
            return Ok((i, i + 1, close));
        }
        i += 1;
    }
    Err(ParseError::NoMethodHeader)
}

fn return_type(tokens: &[Token], matching: &[Option<usize>], name_index: usize) -> ReturnType {
    let mut i = 0;
    let mut type_start = None;
    while i < name_index {
        let tok = &tokens[i];
        if tok.kind == TokenKind::AnnotationName {
            i = skip_annotation(tokens, matching, i);
        } else if MODIFIERS.contains(&tok.text.as_str()) {
            i += 1;
        } else if tok.is("<") && type_start.is_none() {
            // Method type parameters: `<T extends Comparable<T>>`.
            i = skip_angle_group(tokens, i);
        } else {
            type_start = Some(i);
            break;
        }
    }
    let Some(start) = type_start else {
        return ReturnType {
            text: String::new(),
            head: String::new(),
            is_array: false,
        };
    };
    let type_tokens = &tokens[start..name_index];
    let mut text = String::new();
    let mut prev: Option<&str> = None;
    for tok in type_tokens {
        let t = tok.text.as_str();
        if let Some(p) = prev {
            if p == "," || (is_wordish(p) && is_wordish(t)) {
                text.push(' ');
            }
        }
        text.push_str(t);
        prev = Some(t);
    }
    let mut head = String::new();
    let mut depth = 0i64;
    let mut is_array = false;
    for tok in type_tokens {
        match tok.text.as_str() {
            "<" => depth += 1,
            ">" => depth -= 1,
            ">>" => depth -= 2,
            ">>>" => depth -= 3,
            "[" if depth == 0 => is_array = true,
            _ if depth == 0
                && matches!(tok.kind, TokenKind::Identifier | TokenKind::Keyword) =>
            {
                head = tok.text.clone();
            }
            _ => {}
        }
    }
    ReturnType {
        text,
        head,
        is_array,
    }
}

fn is_wordish(t: &str) -> bool {
    t == "?" || t.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

pub fn parse_structure(tokens: &[Token]) -> Result<MethodShape, ParseError> {
    let matching = match_delimiters(tokens)?;
    let (name_index, p_open, p_close) = find_header(tokens, &matching)?;
    let mut open = p_close + 1;
    while open < tokens.len() && !tokens[open].is("{") {
        if tokens[open].is(";") {
            return Err(ParseError::MissingBody);
        }
        open += 1;
    }
    if open >= tokens.len() {
        return Err(ParseError::MissingBody);
    }
    let close = matching[open].ok_or(ParseError::UnbalancedBraces(open))?;
    if close != tokens.len() - 1 {
        return Err(ParseError::TrailingTokens);
    }

    let mut parser = BodyParser {
        tokens,
        matching: &matching,
        statements: Vec::new(),
        blocks: Vec::new(),
    };
    parser.parse_list(open + 1, close, 0, 0);
    let BodyParser {
        mut statements,
        mut blocks,
        ..
    } = parser;
    statements.sort_by_key(|s| (s.start, std::cmp::Reverse(s.end)));
    blocks.sort_by_key(|b| b.open);

    let name = &tokens[name_index].text;
    let self_call_indices = (open + 1..close)
        .filter(|&j| {
            let t = &tokens[j];
            t.kind == TokenKind::Identifier
                && &t.text == name
                && tokens.get(j + 1).is_some_and(|n| n.is("("))
                && !tokens[j - 1].is("new")
                && (!tokens[j - 1].is(".") || (j >= 2 && tokens[j - 2].is("this")))
        })
        .collect();

    Ok(MethodShape {
        name_index,
        return_type: return_type(tokens, &matching, name_index),
        params: (p_open, p_close),
        body: (open, close),
        statements,
        blocks,
        self_call_indices,
    })
}

struct BodyParser<'a> {
    tokens: &'a [Token],
    matching: &'a [Option<usize>],
    statements: Vec<Statement>,
    blocks: Vec<Block>,
}

impl BodyParser<'_> {
    fn is(&self, i: usize, text: &str) -> bool {
        self.tokens.get(i).is_some_and(|t| t.is(text))
    }

    fn close_of(&self, i: usize) -> usize {
        self.matching[i].unwrap_or(i)
    }

    /// Parses statements in `[start, end)`; returns how many were found.
    fn parse_list(&mut self, start: usize, end: usize, depth: usize, block_depth: usize) -> usize {
        let mut count = 0;
        let mut i = start;
        while i < end {
            let last = self.parse_statement(i, end, depth, block_depth, true);
            count += 1;
            i = last + 1;
        }
        count
    }

    fn parse_switch_body(
        &mut self,
        start: usize,
        end: usize,
        depth: usize,
        block_depth: usize,
    ) -> usize {
        let mut count = 0;
        let mut i = start;
        while i < end {
            if self.is(i, "case") || self.is(i, "default") {
                let mut j = i + 1;
                while j < end && !self.is(j, ":") && !self.is(j, "->") {
                    if self.is(j, "(") || self.is(j, "[") || self.is(j, "{") {
                        j = self.close_of(j);
                    }
                    j += 1;
                }
                i = j + 1;
                continue;
            }
            let last = self.parse_statement(i, end, depth, block_depth, true);
            count += 1;
            i = last + 1;
        }
        count
    }

    /// Parses the statement starting at `i`; returns its last token index.
    fn parse_statement(
        &mut self,
        i: usize,
        end: usize,
        depth: usize,
        block_depth: usize,
        listed: bool,
    ) -> usize {
        let slot = self.statements.len();
        self.statements.push(Statement {
            start: i,
            end: i,
            kind: StatementKind::Compound,
            depth,
            listed,
        });
        let (last, kind) = self.statement_extent(i, end, depth, block_depth);
        self.statements[slot].end = last;
        self.statements[slot].kind = kind;
        last
    }

    fn statement_extent(
        &mut self,
        i: usize,
        end: usize,
        depth: usize,
        block_depth: usize,
    ) -> (usize, StatementKind) {
        use StatementKind::*;
        let tok = &self.tokens[i];
        let head = tok.text.as_str();
        let inner = depth + 1;
        match head {
            "{" => {
                let close = self.close_of(i).min(end - 1);
                self.parse_list(i + 1, close, inner, block_depth);
                (close, Compound)
            }
            "if" if self.is(i + 1, "(") => {
                let mut last = self.parse_body(self.close_of(i + 1) + 1, end, inner, block_depth, BlockOwner::If);
                while self.is(last + 1, "else") && last + 1 < end {
                    let e = last + 1;
                    if self.is(e + 1, "if") && self.is(e + 2, "(") {
                        let cond_close = self.close_of(e + 2);
                        last = self.parse_body(cond_close + 1, end, inner, block_depth, BlockOwner::ElseIf);
                    } else {
                        last = self.parse_body(e + 1, end, inner, block_depth, BlockOwner::Else);
                    }
                }
                (last, Compound)
            }
            "for" | "while" | "synchronized" if self.is(i + 1, "(") => {
                let owner = match head {
                    "for" => BlockOwner::For,
                    "while" => BlockOwner::While,
                    _ => BlockOwner::Synchronized,
                };
                let last = self.parse_body(self.close_of(i + 1) + 1, end, inner, block_depth, owner);
                (last, Compound)
            }
            "do" => {
                let body_end = self.parse_body(i + 1, end, inner, block_depth, BlockOwner::Do);
                let mut j = body_end + 1;
                if self.is(j, "while") && self.is(j + 1, "(") {
                    j = self.close_of(j + 1) + 1;
                }
                let last = if self.is(j, ";") { j } else { j.saturating_sub(1) };
                (last.min(end - 1), Compound)
            }
            "switch" if self.is(i + 1, "(") => {
                let open = self.close_of(i + 1) + 1;
                if !self.is(open, "{") {
                    return (self.simple_extent(i, end), Simple);
                }
                let close = self.close_of(open);
                let count = self.parse_switch_body(open + 1, close, inner, block_depth + 1);
                self.blocks.push(Block {
                    open,
                    close,
                    owner: BlockOwner::Switch,
                    top_level_statement_count: count,
                    depth: block_depth + 1,
                });
                // Switch expression used as a statement: `switch (x) { ... };`
                (close, Compound)
            }
            "try" => {
                let mut j = i + 1;
                if self.is(j, "(") {
                    j = self.close_of(j) + 1;
                }
                let mut last = self.parse_body(j, end, inner, block_depth, BlockOwner::Try);
                while self.is(last + 1, "catch") && self.is(last + 2, "(") {
                    let c = self.close_of(last + 2);
                    last = self.parse_body(c + 1, end, inner, block_depth, BlockOwner::Catch);
                }
                if self.is(last + 1, "finally") {
                    last = self.parse_body(last + 2, end, inner, block_depth, BlockOwner::Finally);
                }
                (last, Compound)
            }
            "class" | "interface" | "enum" => (self.type_decl_extent(i, end), Simple),
            _ if tok.kind == TokenKind::Identifier
                && self.is(i + 1, ":")
                && i + 2 < end =>
            {
                // Labelled statement.
                let (last, kind) = self.statement_extent(i + 2, end, depth, block_depth);
                (last, kind)
            }
            _ => (self.simple_extent(i, end), Simple),
        }
    }

    fn parse_body(
        &mut self,
        i: usize,
        end: usize,
        depth: usize,
        block_depth: usize,
        owner: BlockOwner,
    ) -> usize {
        if i >= end {
            return end - 1;
        }
        if self.is(i, "{") {
            let close = self.close_of(i).min(end - 1);
            let count = self.parse_list(i + 1, close, depth, block_depth + 1);
            self.blocks.push(Block {
                open: i,
                close,
                owner,
                top_level_statement_count: count,
                depth: block_depth + 1,
            });
            close
        } else {
            self.parse_statement(i, end, depth, block_depth, false)
        }
    }

    fn simple_extent(&self, i: usize, end: usize) -> usize {
        let mut j = i;
        while j < end {
            let t = &self.tokens[j];
            if t.is(";") {
                return j;
            }
            if t.is("(") || t.is("[") || t.is("{") {
                j = self.close_of(j);
            }
            j += 1;
        }
        end - 1
    }

    fn type_decl_extent(&self, i: usize, end: usize) -> usize {
        let mut j = i;
        while j < end && !self.is(j, "{") {
            j += 1;
        }
        if j < end {
            self.close_of(j).min(end - 1)
        } else {
            end - 1
        }
    }
}

const TYPE_KEYWORDS: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void", "extends",
    "super",
];

/// Marks every token that belongs to a generic type argument/parameter list,
/// including the angle brackets themselves.
///
/// A `<` opens a generic list when it follows an identifier, a `.` or a
/// modifier and a bounded lookahead reaches the matching `>` through
/// type-like tokens only. Anything else is left as an operator.
pub fn generic_mask(tokens: &[Token]) -> Vec<bool> {
    const LOOKAHEAD: usize = 64;
    let mut mask = vec![false; tokens.len()];
    let mut i = 0;
    while i < tokens.len() {
        if !tokens[i].is("<") || mask[i] {
            i += 1;
            continue;
        }
        let opens_generic = i == 0 || {
            let prev = &tokens[i - 1];
            prev.kind == TokenKind::Identifier
                || prev.is(".")
                || MODIFIERS.contains(&prev.text.as_str())
        };
        if !opens_generic {
            i += 1;
            continue;
        }
        let mut depth = 1i64;
        let mut j = i + 1;
        let mut closed_at = None;
        while j < tokens.len() && j <= i + LOOKAHEAD {
            let t = &tokens[j];
            match t.text.as_str() {
                "<" => depth += 1,
                ">" => depth -= 1,
                ">>" => depth -= 2,
                ">>>" => depth -= 3,
                "," | "." | "?" | "&" | "[" | "]" => {}
                _ if t.kind == TokenKind::Identifier
                    || t.kind == TokenKind::AnnotationName
                    || TYPE_KEYWORDS.contains(&t.text.as_str()) => {}
                _ => break,
            }
            if depth == 0 {
                closed_at = Some(j);
                break;
            }
            if depth < 0 {
                break;
            }
            j += 1;
        }
        match closed_at {
            Some(j) => {
                mask[i..=j].iter_mut().for_each(|m| *m = true);
                i = j + 1;
            }
            None => i += 1,
        }
    }
    mask
}
