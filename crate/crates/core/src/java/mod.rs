//! Tokenization and structural parsing of single Java methods.

mod lexer;
mod structure;

pub use lexer::{
    detokenize, is_keyword, render, tokenize, LexError, Span, Token, TokenKind, KEYWORDS,
};
pub use structure::{
    generic_mask, match_delimiters, parse_structure, Block, BlockOwner, MethodShape, ParseError,
    ReturnType, Statement, StatementKind,
};

/// Token texts of a sequence, for comparisons that ignore spans.
pub fn texts(tokens: &[Token]) -> Vec<&str> {
    tokens.iter().map(|t| t.text.as_str()).collect()
}

/// Lexes `source` and parses it as one method declaration.
pub fn parse_method(source: &str) -> Result<(Vec<Token>, MethodShape), JavaError> {
    let tokens = tokenize(source)?;
    let shape = parse_structure(&tokens)?;
    Ok((tokens, shape))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JavaError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
