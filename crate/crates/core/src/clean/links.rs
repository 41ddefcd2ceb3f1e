//! Replacement of embedded URLs with indexed `<LINK_i>` tags.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkReplacement {
    pub method: String,
    pub javadoc: String,
    /// Original URLs; position `i` was replaced by `<LINK_i>`.
    pub links: Vec<String>,
}

fn url_end(s: &str) -> usize {
    s.find(|c: char| c.is_whitespace() || c == '"' || c == '\'')
        .unwrap_or(s.len())
}

fn next_url(s: &str) -> Option<(usize, usize)> {
    let http = s.find("http://");
    let https = s.find("https://");
    let start = match (http, https) {
        (Some(a), Some(b)) => a.min(b),
        (a, b) => a.or(b)?,
    };
    Some((start, start + url_end(&s[start..])))
}

fn replace_in(text: &str, links: &mut Vec<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some((start, end)) = next_url(rest) {
        out.push_str(&rest[..start]);
        let url = &rest[start..end];
        let idx = match links.iter().position(|l| l == url) {
            Some(i) => i,
            None => {
                links.push(url.to_string());
                links.len() - 1
            }
        };
        out.push_str(&format!("<LINK_{idx}>"));
        rest = &rest[end..];
    }
    out.push_str(rest);
    out
}

/// Replaces every `http://` / `https://` URL (up to whitespace or a quote)
/// with `<LINK_i>`. Indices follow first appearance, Javadoc first; a URL
/// found in both texts gets the same index.
pub fn replace_links(method: &str, javadoc: &str) -> LinkReplacement {
    let mut links = Vec::new();
    let javadoc = replace_in(javadoc, &mut links);
    let method = replace_in(method, &mut links);
    LinkReplacement {
        method,
        javadoc,
        links,
    }
}
