//! Shared tokenization rules for hashtags, mentions and word tokens.

use std::sync::LazyLock;

use regex::Regex;

static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#\w+").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[a-z][a-z0-9+.\-]*://\S*").unwrap());
static TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[#@]?\w+").unwrap());

/// Hashtag tokens including the leading `#`, in text order.
pub fn hashtags(text: &str) -> impl Iterator<Item = &str> {
    HASHTAG.find_iter(text).map(|m| m.as_str())
}

/// Mention tokens including the leading `@`, in text order.
pub fn mentions(text: &str) -> impl Iterator<Item = &str> {
    MENTION.find_iter(text).map(|m| m.as_str())
}

/// Lowercases, strips scheme-prefixed URLs and splits into word tokens.
/// A `#` or `@` directly before a word run is kept as part of the token.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let stripped = URL.replace_all(&lower, " ");
    TOKEN
        .find_iter(&stripped)
        .map(|m| m.as_str().to_owned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_removed_before_tokenizing() {
        let toks = tokenize("Read https://t.co/AbC123 now #ActOnClimate @Sam");
        assert_eq!(toks, vec!["read", "now", "#actonclimate", "@sam"]);
    }

    #[test]
    fn bare_marks_are_not_tokens() {
        assert_eq!(tokenize("# @ 100%"), vec!["100"]);
        assert_eq!(hashtags("# and #").count(), 0);
    }

    #[test]
    fn unicode_word_characters() {
        let tags: Vec<_> = hashtags("#Klimakrise #clima_ação").collect();
        assert_eq!(tags, vec!["#Klimakrise", "#clima_ação"]);
    }
}
