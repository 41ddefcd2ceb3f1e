//! Character-level normalisation shared by the Javadoc and method cleaners.

/// Non-ASCII mathematical symbols and their ASCII spelling.
const MATH_FOLDS: &[(char, &str)] = &[
    ('±', "+-"),
    ('∓', "-+"),
    ('×', "*"),
    ('÷', "/"),
    ('·', "*"),
    ('⋅', "*"),
    ('∗', "*"),
    ('−', "-"),
    ('≤', "<="),
    ('≥', ">="),
    ('≠', "!="),
    ('≈', "~="),
    ('≡', "=="),
    ('≪', "<<"),
    ('≫', ">>"),
    ('¬', "!"),
    ('∧', "&&"),
    ('∨', "||"),
    ('→', "->"),
    ('←', "<-"),
    ('↔', "<->"),
    ('⇒', "=>"),
    ('⇐', "<="),
    ('⇔', "<=>"),
    ('∞', "inf"),
    ('√', "sqrt"),
    ('∑', "sum"),
    ('∏', "prod"),
    ('∈', "in"),
    ('∉', "not in"),
    ('∀', "forall"),
    ('∃', "exists"),
    ('∅', "{}"),
    ('∩', "&"),
    ('∪', "|"),
    ('⊂', "<"),
    ('⊃', ">"),
    ('⊆', "<="),
    ('⊇', ">="),
    ('°', "deg"),
    ('‰', "permille"),
    ('¹', "^1"),
    ('²', "^2"),
    ('³', "^3"),
    ('¼', "1/4"),
    ('½', "1/2"),
    ('¾', "3/4"),
    ('′', "'"),
    ('″', "''"),
];

pub fn fold_math(text: &str) -> String {
    if text.is_ascii() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match MATH_FOLDS.iter().find(|(m, _)| *m == c) {
            Some((_, ascii)) => out.push_str(ascii),
            None => out.push(c),
        }
    }
    out
}

/// ASCII, whitespace, or a letter of the Latin script.
pub fn is_latin(c: char) -> bool {
    if c.is_ascii() || c.is_whitespace() {
        return true;
    }
    matches!(c,
        '\u{AA}' | '\u{BA}'
        | '\u{C0}'..='\u{D6}'
        | '\u{D8}'..='\u{F6}'
        | '\u{F8}'..='\u{24F}'
        | '\u{1E00}'..='\u{1EFF}'
        | '\u{2C60}'..='\u{2C7F}'
        | '\u{A720}'..='\u{A7FF}'
        | '\u{FB00}'..='\u{FB06}')
}

pub fn has_non_latin(text: &str) -> bool {
    !text.chars().all(is_latin)
}

/// Deletes runs of four or more identical punctuation characters
/// (`-----`, `=====`, `****`).
pub fn remove_formatting_runs(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i + 1;
        while j < chars.len() && chars[j] == c {
            j += 1;
        }
        if !(c.is_ascii_punctuation() && j - i >= 4) {
            out.extend(&chars[i..j]);
        }
        i = j;
    }
    out
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits natural-language text into words and single punctuation marks.
/// Link tags (`<LINK_3>`) stay atomic.
pub fn nl_tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c == '<' {
            if let Some(len) = link_tag_len(rest) {
                flush(&mut word, &mut out);
                out.push(rest[..len].to_string());
                rest = &rest[len..];
                continue;
            }
        }
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
        rest = &rest[c.len_utf8()..];
    }
    flush(&mut word, &mut out);
    out
}

fn flush(word: &mut String, out: &mut Vec<String>) {
    if !word.is_empty() {
        out.push(std::mem::take(word));
    }
}

/// Byte length of a `<LINK_i>` tag at the start of `s`.
pub fn link_tag_len(s: &str) -> Option<usize> {
    let digits = s.strip_prefix("<LINK_")?;
    let n = digits.bytes().take_while(u8::is_ascii_digit).count();
    (n > 0 && digits.as_bytes().get(n) == Some(&b'>')).then_some("<LINK_".len() + n + 1)
}
