//! Javadoc comment handling: delimiter stripping, description extraction and
//! inline tag rewriting.

const BLOCK_TAGS: &[&str] = &[
    "param",
    "return",
    "returns",
    "throws",
    "exception",
    "author",
    "version",
    "since",
    "see",
    "deprecated",
    "serial",
    "serialData",
    "serialField",
    "apiNote",
    "implSpec",
    "implNote",
];

/// Removes `/**`, `*/` and leading `*` gutters; keeps line structure.
pub fn strip_delimiters(javadoc: &str) -> String {
    let mut body = javadoc.trim();
    if let Some(b) = body.strip_prefix("/**") {
        body = b;
    } else if let Some(b) = body.strip_prefix("/*") {
        body = b;
    }
    if let Some(b) = body.strip_suffix("*/") {
        body = b;
    }
    body.lines()
        .map(|line| line.trim_start().trim_start_matches('*'))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Text before the first block tag (`@param`, `@return`, ...).
pub fn description(body: &str) -> &str {
    let bytes = body.as_bytes();
    for (i, _) in body.match_indices('@') {
        let at_boundary = i == 0 || bytes[i - 1].is_ascii_whitespace();
        if !at_boundary {
            continue;
        }
        let name: String = body[i + 1..]
            .chars()
            .take_while(|c| c.is_ascii_alphabetic())
            .collect();
        if name.is_empty() {
            continue;
        }
        let line_start = body[..i].rfind('\n').map_or(0, |n| n + 1);
        let starts_line = body[line_start..i].trim().is_empty();
        if starts_line || BLOCK_TAGS.contains(&name.as_str()) {
            return &body[..i];
        }
    }
    body
}

/// Rewrites `{@tag content}` to `content`; unterminated tags are left alone.
pub fn rewrite_inline_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find("{@") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 2..];
        let name_len = after
            .char_indices()
            .find(|(_, c)| !c.is_ascii_alphanumeric())
            .map_or(after.len(), |(i, _)| i);
        let mut depth = 1;
        let mut close = None;
        for (i, c) in after[name_len..].char_indices() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(name_len + i);
                        break;
                    }
                }
                _ => {}
            }
        }
        match close {
            Some(c) => {
                out.push_str(after[name_len..c].trim());
                rest = &after[c + 1..];
            }
            None => {
                out.push_str("{@");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}
