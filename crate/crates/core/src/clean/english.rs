//! Pluggable English detection for Javadoc descriptions.

/// Decides whether a description is English.
pub trait LanguageDetector: Send + Sync {
    fn is_english(&self, text: &str) -> bool;
}

impl<F> LanguageDetector for F
where
    F: Fn(&str) -> bool + Send + Sync,
{
    fn is_english(&self, text: &str) -> bool {
        self(text)
    }
}

/// Accepts only when both detectors accept.
pub struct Both<A, B>(pub A, pub B);

impl<A: LanguageDetector, B: LanguageDetector> LanguageDetector for Both<A, B> {
    fn is_english(&self, text: &str) -> bool {
        self.0.is_english(text) && self.1.is_english(text)
    }
}

/// High-frequency English function words plus the most common
/// documentation verbs.
pub const STOPWORDS: [&str; 50] = [
    "the", "be", "to", "of", "and", "a", "in", "that", "have", "it", "for", "not", "on", "with",
    "as", "do", "at", "this", "but", "by", "from", "they", "or", "an", "will", "one", "all",
    "there", "their", "what", "so", "up", "out", "if", "about", "who", "get", "which", "is",
    "are", "returns", "return", "value", "given", "specified", "when", "new", "sets", "gets",
    "creates",
];

/// Default detector: at least 90% of letters are ASCII and at least one
/// word is a known English stopword.
#[derive(Debug, Clone, Copy, Default)]
pub struct StopwordDetector;

impl LanguageDetector for StopwordDetector {
    fn is_english(&self, text: &str) -> bool {
        let (letters, ascii) = text
            .chars()
            .filter(|c| c.is_alphabetic())
            .fold((0usize, 0usize), |(n, a), c| (n + 1, a + c.is_ascii() as usize));
        if letters == 0 || ascii * 10 < letters * 9 {
            return false;
        }
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .any(|w| STOPWORDS.contains(&w.to_lowercase().as_str()))
    }
}
