//! Java lexical analysis for single method declarations.
//!
//! Comments are dropped, string/char/text-block literals are kept as single
//! tokens (quotes included) and operators are matched longest-first.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Keyword,
    NumberLiteral,
    StringLiteral,
    CharLiteral,
    Operator,
    Separator,
    AnnotationName,
}

/// Byte range `[start, end)` into the source the token was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn new(text: impl Into<String>, kind: TokenKind, span: Span) -> Self {
        Self {
            text: text.into(),
            kind,
            span,
        }
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self.kind,
            TokenKind::NumberLiteral | TokenKind::StringLiteral | TokenKind::CharLiteral
        ) || (self.kind == TokenKind::Keyword
            && matches!(self.text.as_str(), "true" | "false" | "null"))
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated literal starting at byte {0}")]
    UnbalancedLiteral(usize),
    #[error("unterminated block comment starting at byte {0}")]
    UnterminatedComment(usize),
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while", "true", "false", "null",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

// Longest first.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "->", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!",
    "~", "?", ":", "&", "|", "^",
];

const SEPARATORS: &[&str] = &["...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@"];

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_part(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphanumeric()
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    Lexer {
        src: source,
        pos: 0,
    }
    .run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.pos += c.len_utf8();
                continue;
            }
            if self.rest().starts_with("//") {
                match self.rest().find('\n') {
                    Some(off) => self.pos += off + 1,
                    None => self.pos = self.src.len(),
                }
                continue;
            }
            if self.rest().starts_with("/*") {
                match self.rest()[2..].find("*/") {
                    Some(off) => self.pos += off + 4,
                    None => return Err(LexError::UnterminatedComment(start)),
                }
                continue;
            }
            let kind = if self.rest().starts_with("\"\"\"") {
                self.text_block(start)?;
                TokenKind::StringLiteral
            } else if c == '"' {
                self.quoted('"', start)?;
                TokenKind::StringLiteral
            } else if c == '\'' {
                self.quoted('\'', start)?;
                TokenKind::CharLiteral
            } else if c.is_ascii_digit()
                || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()))
            {
                self.number();
                TokenKind::NumberLiteral
            } else if is_ident_start(c) {
                self.ident();
                if is_keyword(&self.src[start..self.pos]) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                }
            } else if c == '@' && self.peek_at(1).is_some_and(is_ident_start) {
                self.pos += 1;
                self.ident();
                TokenKind::AnnotationName
            } else if let Some(sep) = SEPARATORS.iter().find(|s| self.rest().starts_with(**s)) {
                self.pos += sep.len();
                TokenKind::Separator
            } else if let Some(op) = OPERATORS.iter().find(|s| self.rest().starts_with(**s)) {
                self.pos += op.len();
                TokenKind::Operator
            } else {
                // Stray character (e.g. `#`, `\`): keep it as a one-char operator.
                self.pos += c.len_utf8();
                TokenKind::Operator
            };
            out.push(Token::new(
                &self.src[start..self.pos],
                kind,
                Span {
                    start,
                    end: self.pos,
                },
            ));
        }
        Ok(out)
    }

    fn ident(&mut self) {
        while let Some(c) = self.peek() {
            if is_ident_part(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn quoted(&mut self, quote: char, start: usize) -> Result<(), LexError> {
        self.pos += 1;
        loop {
            match self.peek() {
                None | Some('\n') => return Err(LexError::UnbalancedLiteral(start)),
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        None => return Err(LexError::UnbalancedLiteral(start)),
                        Some(c) => self.pos += c.len_utf8(),
                    }
                }
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(c) => self.pos += c.len_utf8(),
            }
        }
    }

    fn text_block(&mut self, start: usize) -> Result<(), LexError> {
        self.pos += 3;
        loop {
            if self.rest().starts_with("\\") {
                self.pos += 1;
                match self.peek() {
                    None => return Err(LexError::UnbalancedLiteral(start)),
                    Some(c) => self.pos += c.len_utf8(),
                }
            } else if self.rest().starts_with("\"\"\"") {
                self.pos += 3;
                return Ok(());
            } else {
                match self.peek() {
                    None => return Err(LexError::UnbalancedLiteral(start)),
                    Some(c) => self.pos += c.len_utf8(),
                }
            }
        }
    }

    fn number(&mut self) {
        let bytes = self.src.as_bytes();
        let at = |i: usize| bytes.get(i).copied().unwrap_or(0);
        let mut i = self.pos;
        if at(i) == b'0' && matches!(at(i + 1), b'x' | b'X') {
            i += 2;
            while at(i).is_ascii_hexdigit() || at(i) == b'_' {
                i += 1;
            }
            // Hex floating point: 0x1.8p3
            if at(i) == b'.' {
                i += 1;
                while at(i).is_ascii_hexdigit() || at(i) == b'_' {
                    i += 1;
                }
            }
            if matches!(at(i), b'p' | b'P') {
                i += 1;
                if matches!(at(i), b'+' | b'-') {
                    i += 1;
                }
                while at(i).is_ascii_digit() {
                    i += 1;
                }
            }
        } else if at(i) == b'0' && matches!(at(i + 1), b'b' | b'B') {
            i += 2;
            while matches!(at(i), b'0' | b'1' | b'_') {
                i += 1;
            }
        } else {
            while at(i).is_ascii_digit() || at(i) == b'_' {
                i += 1;
            }
            if at(i) == b'.' && at(i + 1) != b'.' && !is_ident_start(at(i + 1) as char) {
                i += 1;
                while at(i).is_ascii_digit() || at(i) == b'_' {
                    i += 1;
                }
            } else if at(i) == b'.'
                && ((matches!(at(i + 1), b'e' | b'E')
                    && (at(i + 2).is_ascii_digit() || matches!(at(i + 2), b'+' | b'-')))
                    || (matches!(at(i + 1), b'f' | b'F' | b'd' | b'D')
                        && !is_ident_part(at(i + 2) as char)))
            {
                // `1.e5`, `1.f`
                i += 1;
            }
            if matches!(at(i), b'e' | b'E')
                && (at(i + 1).is_ascii_digit()
                    || (matches!(at(i + 1), b'+' | b'-') && at(i + 2).is_ascii_digit()))
            {
                i += 2;
                while at(i).is_ascii_digit() || at(i) == b'_' {
                    i += 1;
                }
            }
        }
        if matches!(at(i), b'l' | b'L' | b'f' | b'F' | b'd' | b'D') {
            i += 1;
        }
        self.pos = i;
    }
}

/// Canonical single-line rendering of a token sequence.
pub fn detokenize(tokens: &[Token]) -> String {
    render(tokens)
}

/// [`detokenize`] over bare token texts.
pub fn render<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for tok in tokens {
        let text = tok.as_ref();
        if let Some(p) = prev {
            if needs_space(p, text) {
                out.push(' ');
            }
        }
        out.push_str(text);
        prev = Some(text);
    }
    out
}

fn needs_space(prev: &str, next: &str) -> bool {
    if glue_hazard(prev, next) {
        return true;
    }
    if matches!(next, ";" | "," | "." | ")" | "]") {
        return false;
    }
    if matches!(prev, "(" | "[" | ".") {
        return false;
    }
    if matches!(next, "(" | "[") && is_callee(prev) {
        return false;
    }
    true
}

// Call and index sites: `f(x)`, `a[0]`, `this(..)`, `super(..)`.
fn is_callee(prev: &str) -> bool {
    let mut chars = prev.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => {
            chars.all(is_ident_part) && (!is_keyword(prev) || matches!(prev, "this" | "super"))
        }
        _ => false,
    }
}

// Adjacent texts that would lex as a different token sequence without a gap.
fn glue_hazard(prev: &str, next: &str) -> bool {
    let p_last = prev.chars().last().unwrap_or(' ');
    let n_first = next.chars().next().unwrap_or(' ');
    (p_last.is_ascii_digit() && n_first == '.')
        || (prev.ends_with('.') && (n_first.is_ascii_digit() || n_first == '.'))
}
