//! Query normalization for the character-level and token-level analyses.

use serde::{Deserialize, Serialize};

/// How whitespace is treated before character-level comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhitespaceMode {
    /// Remove every whitespace character.
    #[default]
    RemoveAll,
    /// Trim leading and trailing whitespace only.
    Trim,
}

/// Lowercases and strips all whitespace.
pub fn char_normalize(text: &str) -> String {
    char_normalize_with(text, WhitespaceMode::RemoveAll)
}

pub fn char_normalize_with(text: &str, mode: WhitespaceMode) -> String {
    match mode {
        WhitespaceMode::RemoveAll => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .flat_map(char::to_lowercase)
            .collect(),
        WhitespaceMode::Trim => text.trim().chars().flat_map(char::to_lowercase).collect(),
    }
}

/// Lowercases and splits on anything that is not alphanumeric.
pub fn token_normalize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn char_normalize_examples() {
        assert_eq!(char_normalize("Top 50 UK"), "top50uk");
        assert_eq!(char_normalize(""), "");
        assert_eq!(char_normalize("  Sommar i P1 "), "sommarip1");
        assert_eq!(char_normalize("Jag\tvill\u{00a0}KÄNNA"), "jagvillkänna");
    }

    #[test]
    fn trim_mode_keeps_inner_spaces() {
        assert_eq!(char_normalize_with("  Sommar i P1 ", WhitespaceMode::Trim), "sommar i p1");
    }

    #[test]
    fn token_normalize_examples() {
        assert_eq!(token_normalize("god of war 2018"), ["god", "of", "war", "2018"]);
        assert_eq!(
            token_normalize("new york times podcast"),
            ["new", "york", "times", "podcast"]
        );
        assert!(token_normalize("!!!").is_empty());
        assert_eq!(
            token_normalize("robbie williams, luke evans"),
            ["robbie", "williams", "luke", "evans"]
        );
        assert_eq!(token_normalize("queen's gambit"), ["queen", "s", "gambit"]);
    }

    proptest! {
        #[test]
        fn char_normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = char_normalize(&s);
            prop_assert_eq!(char_normalize(&once), once.clone());
        }

        #[test]
        fn tokens_are_nonempty_lowercase(s in "\\PC{0,40}") {
            for t in token_normalize(&s) {
                prop_assert!(!t.is_empty());
                prop_assert!(t.chars().all(char::is_alphanumeric));
            }
        }
    }
}
