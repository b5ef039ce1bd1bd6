use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRule {
    pub prefix: String,
    pub state: String,
}

/// Ordered prefix rules mapping raw destinations onto semantic GUI states.
/// The first matching rule wins; anything unmatched goes to `default_state`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateMap {
    pub rules: Vec<StateRule>,
    pub default_state: String,
}

pub const SEARCH_STATE: &str = "search";

/// Built-in state vocabulary.
pub const DEFAULT_STATES: [&str; 10] = [
    "search", "artist", "album", "playlist", "track", "show", "episode", "player", "home", "other",
];

impl Default for StateMap {
    fn default() -> Self {
        let rule = |prefix: &str, state: &str| StateRule {
            prefix: prefix.to_owned(),
            state: state.to_owned(),
        };
        StateMap {
            rules: vec![
                rule("app:search", "search"),
                rule("app:artist", "artist"),
                rule("app:album", "album"),
                rule("app:playlist", "playlist"),
                rule("app:track", "track"),
                rule("app:show", "show"),
                rule("app:episode", "episode"),
                rule("app:player", "player"),
                rule("app:now-playing", "player"),
                rule("app:home", "home"),
            ],
            default_state: "other".to_owned(),
        }
    }
}

impl StateMap {
    /// Accepts either `{"rules": [...], "default_state": "..."}` or a bare
    /// array of rules, which falls back to `other`.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Form {
            Full(StateMap),
            Rules(Vec<StateRule>),
        }
        let form: Form =
            serde_json::from_slice(bytes).map_err(|e| Error::InvalidStateMap(e.to_string()))?;
        let map = match form {
            Form::Full(map) => map,
            Form::Rules(rules) => StateMap {
                rules,
                default_state: "other".to_owned(),
            },
        };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        if self.default_state.trim().is_empty() {
            return Err(Error::InvalidStateMap("default_state is empty".into()));
        }
        if let Some(r) = self.rules.iter().find(|r| r.state.trim().is_empty()) {
            return Err(Error::InvalidStateMap(format!(
                "rule for prefix `{}` has an empty state",
                r.prefix
            )));
        }
        Ok(())
    }

    pub fn map_state<'a>(&'a self, destination: &str) -> &'a str {
        self.rules
            .iter()
            .find(|r| destination.starts_with(&r.prefix))
            .map(|r| r.state.as_str())
            .unwrap_or(&self.default_state)
    }
}

pub fn map_state<'a>(destination: &str, map: &'a StateMap) -> &'a str {
    map.map_state(destination)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_map_examples() {
        let map = StateMap::default();
        assert_eq!(map_state("app:artist:4xk9", &map), "artist");
        assert_eq!(map_state("app:unknown-surface:z", &map), "other");
        assert_eq!(map_state("app:search?q=abba", &map), "search");
        assert_eq!(map_state("app:now-playing", &map), "player");
    }

    #[test]
    fn first_rule_wins() {
        let map = StateMap {
            rules: vec![
                StateRule { prefix: "app:a".into(), state: "first".into() },
                StateRule { prefix: "app:ab".into(), state: "second".into() },
            ],
            default_state: "none".into(),
        };
        assert_eq!(map.map_state("app:abc"), "first");
    }

    #[test]
    fn parses_json_and_rejects_empty_default() {
        let map = StateMap::from_json(
            br#"{"rules":[{"prefix":"x:","state":"x"}],"default_state":"other"}"#,
        )
        .unwrap();
        assert_eq!(map.map_state("x:1"), "x");
        let bare = StateMap::from_json(br#"[{"prefix":"x:","state":"x"}]"#).unwrap();
        assert_eq!(bare.map_state("y"), "other");
        let err = StateMap::from_json(br#"{"rules":[],"default_state":" "}"#).unwrap_err();
        assert_eq!(err.code(), crate::ErrorCode::InvalidStateMap);
    }

    proptest! {
        #[test]
        fn mapping_is_total(dest in "\\PC{1,30}") {
            let map = StateMap::default();
            let state = map.map_state(&dest);
            prop_assert!(DEFAULT_STATES.contains(&state));
        }
    }
}
