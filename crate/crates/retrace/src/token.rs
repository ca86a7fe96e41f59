//! Identifier tokenization and comparison-time matching.
//!
//! GUI names arrive as Java-style identifiers (`InstalledSearchEnginesSettingsFragment`,
//! `main_menu`, `refetchSearchEngines`) or as free text from widget labels. Everything
//! that compares names — the page reaching heuristic, the widget hitting scorer, reply
//! resolution — works on lowercase word tokens split at underscores, camel-case
//! boundaries, and letter/digit boundaries, with a fixed stop-word list removed.
//!
//! Stemming is deliberately *not* part of [`tokenize`]: raw tokens are kept for prompt
//! rendering, and [`stem`] / [`tokens_match`] are applied only where two names are
//! compared.

use std::fmt;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

/// Noise words removed from every token list. GUI boilerplate terms (`activity`,
/// `fragment`, `view`, ...) are included so page names compare on content words.
pub const STOP_WORDS: &[&str] = &[
    "a", "activity", "an", "and", "android", "app", "at", "for", "fragment", "in", "is",
    "layout", "of", "on", "or", "s", "t", "the", "to", "view",
];

/// Ordered lowercase word tokens with stop words removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenList(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Tokens joined with single spaces, e.g. `installed search engines settings`.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }

    /// Stem of every token, in order, duplicates kept.
    pub fn stemmed(&self) -> Vec<String> {
        self.0.iter().map(|t| stem(t)).collect()
    }
}

impl fmt::Display for TokenList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.contains(&token)
}

/// Splits an identifier-like string into lowercase tokens.
///
/// Boundaries: any non-alphanumeric character, lower→upper transitions, the end of an
/// uppercase run followed by a lowercase letter (`HTMLPage` → `html`, `page`), and
/// letter/digit transitions. Stop words and empty fragments are dropped. The result is
/// possibly empty; callers decide whether that matters.
pub fn tokenize(name: &str) -> TokenList {
    let chars: Vec<char> = name.chars().collect();
    let mut tokens: Vec<String> = Vec::new();
    let mut current = String::new();

    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if !current.is_empty() {
            if !is_stop_word(current.as_str()) {
                tokens.push(current.clone());
            }
            current.clear();
        }
    };

    for (i, &c) in chars.iter().enumerate() {
        if !c.is_ascii_alphanumeric() {
            flush(&mut current, &mut tokens);
            continue;
        }
        if !current.is_empty() {
            // chars[i-1] is alphanumeric here: a separator would have flushed.
            let prev = chars[i - 1];
            let boundary = (prev.is_ascii_lowercase() && c.is_ascii_uppercase())
                || (prev.is_ascii_uppercase()
                    && c.is_ascii_uppercase()
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase()))
                || (prev.is_ascii_digit() != c.is_ascii_digit());
            if boundary {
                flush(&mut current, &mut tokens);
            }
        }
        current.push(c.to_ascii_lowercase());
    }
    flush(&mut current, &mut tokens);

    TokenList(tokens)
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Snowball English stem of a single token.
pub fn stem(token: &str) -> String {
    stemmer().stem(token).into_owned()
}

/// `short` abbreviates `long`: at least two characters, strictly shorter, same first
/// character, and an in-order subsequence of `long` (`msg` ~ `message`).
pub fn is_abbreviation(short: &str, long: &str) -> bool {
    if short.len() < 2 || short.len() >= long.len() {
        return false;
    }
    let mut short_chars = short.chars();
    let mut long_chars = long.chars();
    match (short_chars.next(), long_chars.next()) {
        (Some(a), Some(b)) if a == b => {}
        _ => return false,
    }
    let mut needle = short_chars.peekable();
    for c in long_chars {
        match needle.peek() {
            None => return true,
            Some(&n) if n == c => {
                needle.next();
            }
            Some(_) => {}
        }
    }
    needle.peek().is_none()
}

/// Two tokens match when their stems are equal or one abbreviates the other.
pub fn tokens_match(a: &str, b: &str) -> bool {
    if a == b || stem(a) == stem(b) {
        return true;
    }
    is_abbreviation(a, b) || is_abbreviation(b, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(name: &str) -> Vec<String> {
        tokenize(name).tokens().to_vec()
    }

    #[test]
    fn splits_camel_case() {
        assert_eq!(toks("refetchSearchEngines"), ["refetch", "search", "engines"]);
    }

    #[test]
    fn drops_stop_words_and_suffix() {
        assert_eq!(
            toks("InstalledSearchEnginesSettingsFragment"),
            ["installed", "search", "engines", "settings"]
        );
        assert_eq!(toks("MainActivity"), ["main"]);
    }

    #[test]
    fn splits_underscores() {
        assert_eq!(toks("main_menu"), ["main", "menu"]);
    }

    #[test]
    fn splits_acronym_before_word() {
        assert_eq!(toks("HTMLPage"), ["html", "page"]);
        assert_eq!(toks("parseXMLDocument"), ["parse", "xml", "document"]);
    }

    #[test]
    fn splits_digits_from_letters() {
        assert_eq!(toks("page2main"), ["page", "2", "main"]);
        assert_eq!(toks("mp3 player"), ["mp", "3", "player"]);
    }

    #[test]
    fn empty_and_noise_inputs() {
        assert!(toks("").is_empty());
        assert!(toks("___").is_empty());
        assert!(toks("the_of_in").is_empty());
    }

    #[test]
    fn dotted_api_names() {
        assert_eq!(
            toks("SearchEngineListPreference.refetchSearchEngines"),
            ["search", "engine", "list", "preference", "refetch", "search", "engines"]
        );
    }

    #[test]
    fn stem_merges_plurals() {
        assert_eq!(stem("engine"), stem("engines"));
        assert_eq!(stem("settings"), stem("setting"));
    }

    #[test]
    fn abbreviation_rule() {
        assert!(is_abbreviation("msg", "message"));
        assert!(is_abbreviation("cfg", "config"));
        assert!(!is_abbreviation("m", "message")); // too short
        assert!(!is_abbreviation("message", "msg")); // wrong direction
        assert!(!is_abbreviation("sg", "message")); // first char differs
        assert!(!is_abbreviation("mgs", "message")); // not in order
    }

    #[test]
    fn token_matching() {
        assert!(tokens_match("engine", "engines"));
        assert!(tokens_match("msg", "message"));
        assert!(tokens_match("scan", "scanner"));
        assert!(!tokens_match("help", "settings"));
    }

    proptest! {
        /// Re-tokenizing the space-joined output is a fixed point.
        #[test]
        fn tokenize_idempotent(name in "[a-zA-Z0-9_ .$-]{0,40}") {
            let once = tokenize(&name);
            let twice = tokenize(&once.joined());
            prop_assert_eq!(once, twice);
        }

        /// No token is empty, uppercase, underscored, or a stop word.
        #[test]
        fn token_invariants(name in "\\PC{0,40}") {
            for t in tokenize(&name).tokens() {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.contains('_'));
                prop_assert!(!t.chars().any(|c| c.is_ascii_uppercase()));
                prop_assert!(!STOP_WORDS.contains(&t.as_str()));
            }
        }
    }
}
