use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::state_map::StateMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Query,
    Navigate,
    Play,
    OtherAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    /// Milliseconds since the Unix epoch.
    pub timestamp: i64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destination: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<String>,
}

impl TraceEvent {
    pub fn query(timestamp: i64, text: impl Into<String>) -> Self {
        TraceEvent {
            timestamp,
            kind: EventKind::Query,
            query_text: Some(text.into()),
            destination: None,
            element: None,
        }
    }

    pub fn navigate(timestamp: i64, destination: impl Into<String>) -> Self {
        TraceEvent {
            timestamp,
            kind: EventKind::Navigate,
            query_text: None,
            destination: Some(destination.into()),
            element: None,
        }
    }

    pub fn play(timestamp: i64, destination: impl Into<String>) -> Self {
        TraceEvent {
            kind: EventKind::Play,
            ..TraceEvent::navigate(timestamp, destination)
        }
    }

    pub fn other(timestamp: i64) -> Self {
        TraceEvent {
            timestamp,
            kind: EventKind::OtherAction,
            query_text: None,
            destination: None,
            element: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cohort {
    Agent,
    Participant,
}

impl Cohort {
    pub const BOTH: [Cohort; 2] = [Cohort::Agent, Cohort::Participant];

    pub fn as_str(self) -> &'static str {
        match self {
            Cohort::Agent => "agent",
            Cohort::Participant => "participant",
        }
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Participant subgroup labels. These are ingested, never computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subgroup {
    Expert,
    Regular,
    Familiar,
    Unfamiliar,
}

impl Subgroup {
    pub fn as_str(self) -> &'static str {
        match self {
            Subgroup::Expert => "expert",
            Subgroup::Regular => "regular",
            Subgroup::Familiar => "familiar",
            Subgroup::Unfamiliar => "unfamiliar",
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_true() -> bool {
    true
}

fn is_true(v: &bool) -> bool {
    *v
}

/// One task attempt by one actor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub run_id: String,
    pub task_id: String,
    pub cohort: Cohort,
    pub actor_id: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub subgroups: BTreeSet<Subgroup>,
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub compliant: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_time: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_time: Option<i64>,
    pub events: Vec<TraceEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
    /// Anticipated task difficulty rating; carried for display only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<f64>,
}

impl Run {
    pub fn has_subgroup(&self, group: Subgroup) -> bool {
        self.subgroups.contains(&group)
    }

    /// Number of logged actions. Every event counts, whatever its kind.
    pub fn action_count(&self) -> usize {
        self.events.len()
    }

    /// Task time in seconds from the run-level start/end fields, falling
    /// back to the event span when either is absent.
    pub fn duration_seconds(&self) -> f64 {
        let first = self.events.first().map(|e| e.timestamp);
        let last = self.events.last().map(|e| e.timestamp);
        let start = self.start_time.or(first);
        let end = self.end_time.or(last);
        match (start, end) {
            (Some(s), Some(e)) if e >= s => (e - s) as f64 / 1000.0,
            _ => 0.0,
        }
    }

    pub fn queries(&self) -> impl Iterator<Item = &str> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Query)
            .filter_map(|e| e.query_text.as_deref())
    }

    /// Text of the earliest query event. Events are timestamp-ordered, so
    /// equal timestamps resolve by log order.
    pub fn first_query(&self) -> Option<&str> {
        self.queries().next()
    }

    pub fn last_play(&self) -> Option<&str> {
        self.events
            .iter()
            .rev()
            .find(|e| e.kind == EventKind::Play)
            .and_then(|e| e.destination.as_deref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReasoningPattern {
    Linear,
    EntityBridging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub pattern: ReasoningPattern,
    pub accepted_outcomes: BTreeSet<String>,
    #[serde(default)]
    pub te_excluded: bool,
    #[serde(default)]
    pub description: String,
}

/// Validated, immutable collection of runs with their task definitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub(crate) runs: Vec<Run>,
    pub(crate) tasks: BTreeMap<String, TaskSpec>,
    pub(crate) state_map: StateMap,
}

impl Corpus {
    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn tasks(&self) -> &BTreeMap<String, TaskSpec> {
        &self.tasks
    }

    pub fn task(&self, task_id: &str) -> Option<&TaskSpec> {
        self.tasks.get(task_id)
    }

    pub fn state_map(&self) -> &StateMap {
        &self.state_map
    }

    pub fn run(&self, run_id: &str) -> Option<&Run> {
        self.runs.iter().find(|r| r.run_id == run_id)
    }

    pub fn runs_of(&self, cohort: Cohort) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(move |r| r.cohort == cohort)
    }
}
