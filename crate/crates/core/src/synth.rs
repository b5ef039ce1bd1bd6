//! Seeded synthetic cohorts from Markov behavior profiles.
//!
//! A run starts in a state drawn from `start`, emits one event per visited
//! state and then either stops (with the state's stop probability, once
//! `min_events` events exist) or moves along the transition matrix. Runs
//! never exceed `cap` events. Visits to `search` emit a query with
//! probability `query_rate`; visits to `player` emit a play event that hits
//! the task's accepted outcome with probability `success_prob`.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nav::ProbabilityGraph;
use crate::stats::RandomSource;
use crate::trace::{Cohort, ReasoningPattern, Run, StateMap, StateRule, Subgroup, TaskSpec, TraceEvent, SEARCH_STATE};

pub const PLAYER_STATE: &str = "player";
pub const DEFAULT_CAP: usize = 50;
const ROW_TOLERANCE: f64 = 1e-9;
const BASE_TIME_MS: i64 = 1_700_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedQuery {
    pub query: String,
    pub weight: f64,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

fn default_min_events() -> usize {
    1
}

fn default_step() -> (u64, u64) {
    (1_000, 5_000)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    pub name: String,
    pub states: Vec<String>,
    /// Row-stochastic, indexed like `states`.
    pub transitions: Vec<Vec<f64>>,
    pub start: Vec<f64>,
    /// Probability of ending the run after a visit to each state.
    pub stop: Vec<f64>,
    pub query_vocabulary: Vec<WeightedQuery>,
    pub query_rate: f64,
    pub success_prob: f64,
    /// Stopping is disabled until this many events exist.
    #[serde(default = "default_min_events")]
    pub min_events: usize,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub noncompliant_prob: f64,
    #[serde(default)]
    pub expert_share: f64,
    #[serde(default)]
    pub familiar_share: f64,
    /// Inclusive range of milliseconds between consecutive events.
    #[serde(default = "default_step")]
    pub step_ms: (u64, u64),
}

fn is_prob(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

impl BehaviorProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(format!("{}: {m}", self.name)));
        let n = self.states.len();
        if n == 0 {
            return bad("no states".into());
        }
        if self.states.iter().collect::<BTreeSet<_>>().len() != n {
            return bad("duplicate state names".into());
        }
        if self.transitions.len() != n || self.start.len() != n || self.stop.len() != n {
            return bad(format!("transition, start and stop sizes must all equal {n}"));
        }
        for (s, row) in self.states.iter().zip(&self.transitions) {
            if row.len() != n || row.iter().any(|&p| !is_prob(p)) {
                return bad(format!("row `{s}` is not a probability vector of length {n}"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return bad(format!("row `{s}` sums to {sum}"));
            }
        }
        let start: f64 = self.start.iter().sum();
        if self.start.iter().any(|&p| !is_prob(p)) || (start - 1.0).abs() > ROW_TOLERANCE {
            return bad(format!("start distribution sums to {start}"));
        }
        if self.stop.iter().any(|&p| !is_prob(p)) {
            return bad("stop probabilities must lie in [0, 1]".into());
        }
        for (name, p) in [
            ("query_rate", self.query_rate),
            ("success_prob", self.success_prob),
            ("noncompliant_prob", self.noncompliant_prob),
            ("expert_share", self.expert_share),
            ("familiar_share", self.familiar_share),
        ] {
            if !is_prob(p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.cap == 0 {
            return bad("cap must be at least 1".into());
        }
        if self.min_events == 0 || self.min_events > self.cap {
            return bad(format!("min_events must lie in 1..={}", self.cap));
        }
        if self.step_ms.0 == 0 || self.step_ms.0 > self.step_ms.1 {
            return bad("step_ms must be a positive, ordered range".into());
        }
        if self.states.iter().any(|s| s == SEARCH_STATE) && self.query_rate > 0.0 && self.query_vocabulary.is_empty() {
            return bad("search visits emit queries but the vocabulary is empty".into());
        }
        if self.query_vocabulary.iter().any(|q| q.weight.is_nan() || q.weight <= 0.0 || q.query.trim().is_empty()) {
            return bad("query weights must be positive and queries non-empty".into());
        }
        Ok(())
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// Map from generated destinations back to the profile's states.
    pub fn state_map(&self) -> StateMap {
        StateMap {
            rules: self
                .states
                .iter()
                .map(|s| StateRule { prefix: format!("app:{s}:"), state: s.clone() })
                .collect(),
            default_state: "other".into(),
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let p: BehaviorProfile = serde_json::from_slice(bytes).map_err(|e| Error::InvalidProfile(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Shipped presets by name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "agentlike" => Ok(agentlike()),
            "humanlike" => Ok(humanlike()),
            _ => Err(Error::InvalidArgument(format!(
                "unknown profile preset `{name}` (expected agentlike or humanlike)"
            ))),
        }
    }
}

pub const PRESET_STATES: [&str; 8] = ["search", "artist", "album", "playlist", "track", "show", "episode", "player"];

const PRESET_QUERIES: [&str; 24] = [
    "taylor swift",
    "top 50 global",
    "lofi beats",
    "god of war soundtrack",
    "maria callas",
    "fantasia",
    "sommar i p1",
    "jazz piano",
    "queens gambit",
    "chess podcast",
    "workout mix",
    "beethoven symphony 9",
    "true crime podcast",
    "abba gold",
    "road trip songs",
    "the beatles abbey road",
    "classical focus",
    "news podcast",
    "study playlist",
    "eurovision winners",
    "miles davis kind of blue",
    "sleep sounds",
    "rock classics",
    "audiobook harry potter",
];

/// Zipf weights 1/rank^s over the preset vocabulary.
pub fn zipf_vocabulary(queries: &[&str], exponent: f64) -> Vec<WeightedQuery> {
    queries
        .iter()
        .enumerate()
        .map(|(i, q)| WeightedQuery { query: (*q).to_owned(), weight: 1.0 / ((i + 1) as f64).powf(exponent) })
        .collect()
}

fn preset(name: &str, rows: [[f64; 8]; 8], start: [f64; 8], exponent: f64) -> BehaviorProfile {
    BehaviorProfile {
        name: name.into(),
        states: PRESET_STATES.iter().map(|s| (*s).to_owned()).collect(),
        transitions: rows.iter().map(|r| r.to_vec()).collect(),
        start: start.to_vec(),
        stop: vec![0.04, 0.04, 0.04, 0.04, 0.04, 0.04, 0.04, 0.6],
        query_vocabulary: zipf_vocabulary(&PRESET_QUERIES, exponent),
        query_rate: 0.9,
        success_prob: 0.55,
        min_events: 2,
        cap: DEFAULT_CAP,
        noncompliant_prob: 0.0,
        expert_share: 0.0,
        familiar_share: 0.0,
        step_ms: (1_000, 5_000),
    }
}

/// Search-centric navigation with a concentrated query vocabulary.
pub fn agentlike() -> BehaviorProfile {
    // search artist album playlist track show episode player
    let rows = [
        [0.48, 0.18, 0.08, 0.12, 0.04, 0.06, 0.00, 0.04],
        [0.25, 0.05, 0.35, 0.00, 0.10, 0.00, 0.00, 0.25],
        [0.25, 0.05, 0.00, 0.00, 0.15, 0.00, 0.00, 0.55],
        [0.07, 0.83, 0.00, 0.00, 0.00, 0.00, 0.00, 0.10],
        [0.20, 0.00, 0.10, 0.00, 0.00, 0.00, 0.00, 0.70],
        [0.76, 0.00, 0.00, 0.00, 0.00, 0.04, 0.20, 0.00],
        [0.20, 0.00, 0.00, 0.00, 0.00, 0.10, 0.00, 0.70],
        [0.60, 0.20, 0.00, 0.00, 0.00, 0.00, 0.00, 0.20],
    ];
    let mut p = preset("agentlike", rows, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 2.0);
    p.step_ms = (4_000, 12_000);
    p
}

/// Content-centric navigation with branching rows.
pub fn humanlike() -> BehaviorProfile {
    // search artist album playlist track show episode player
    let rows = [
        [0.20, 0.22, 0.10, 0.20, 0.10, 0.12, 0.00, 0.06],
        [0.15, 0.05, 0.30, 0.00, 0.20, 0.00, 0.00, 0.30],
        [0.10, 0.10, 0.00, 0.00, 0.20, 0.00, 0.00, 0.60],
        [0.11, 0.32, 0.00, 0.00, 0.07, 0.00, 0.00, 0.50],
        [0.10, 0.00, 0.15, 0.00, 0.00, 0.00, 0.00, 0.75],
        [0.27, 0.00, 0.00, 0.00, 0.00, 0.06, 0.67, 0.00],
        [0.10, 0.00, 0.00, 0.00, 0.00, 0.15, 0.00, 0.75],
        [0.40, 0.20, 0.00, 0.20, 0.00, 0.00, 0.00, 0.20],
    ];
    let mut p = preset("humanlike", rows, [0.5, 0.15, 0.0, 0.2, 0.0, 0.15, 0.0, 0.0], 1.0);
    p.expert_share = 0.4;
    p.familiar_share = 0.5;
    p
}

pub fn correct_outcome(task_id: &str) -> String {
    format!("app:{PLAYER_STATE}:{task_id}-correct")
}

/// Task definitions matching the outcomes the generator emits.
pub fn synthetic_tasks(task_ids: &[String]) -> Vec<TaskSpec> {
    task_ids
        .iter()
        .enumerate()
        .map(|(i, t)| TaskSpec {
            task_id: t.clone(),
            pattern: if i % 2 == 0 { ReasoningPattern::Linear } else { ReasoningPattern::EntityBridging },
            accepted_outcomes: [correct_outcome(t)].into(),
            te_excluded: false,
            description: format!("synthetic task {t}"),
        })
        .collect()
}

pub fn task_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("T{i}")).collect()
}

struct Samplers {
    rows: Vec<WeightedIndex<f64>>,
    start: WeightedIndex<f64>,
    vocab: Option<WeightedIndex<f64>>,
    search: Option<usize>,
    player: Option<usize>,
}

impl Samplers {
    fn new(p: &BehaviorProfile) -> Result<Self> {
        let wi = |w: &[f64]| WeightedIndex::new(w.iter().copied()).map_err(|e| Error::InvalidProfile(e.to_string()));
        Ok(Samplers {
            rows: p.transitions.iter().map(|r| wi(r)).collect::<Result<_>>()?,
            start: wi(&p.start)?,
            vocab: if p.query_vocabulary.is_empty() {
                None
            } else {
                Some(wi(&p.query_vocabulary.iter().map(|q| q.weight).collect::<Vec<_>>())?)
            },
            search: p.state_index(SEARCH_STATE),
            player: p.state_index(PLAYER_STATE),
        })
    }
}

fn generate_run(p: &BehaviorProfile, s: &Samplers, index: usize, task: &str, cohort: Cohort, rng: &RandomSource) -> Run {
    let mut r = rng.stream(index as u64);
    let start_time = BASE_TIME_MS + index as i64 * 3_600_000;
    let mut t = start_time;
    let mut events = Vec::new();
    let mut state = s.start.sample(&mut r);
    loop {
        t += r.gen_range(p.step_ms.0..=p.step_ms.1) as i64;
        let name = &p.states[state];
        let event = if Some(state) == s.search && s.vocab.is_some() && r.gen_bool(p.query_rate) {
            let q = s.vocab.as_ref().map(|v| v.sample(&mut r)).unwrap_or(0);
            TraceEvent::query(t, p.query_vocabulary[q].query.clone())
        } else if Some(state) == s.player {
            let dest = if r.gen_bool(p.success_prob) {
                correct_outcome(task)
            } else {
                format!("app:{PLAYER_STATE}:{task}-wrong-{}", r.gen_range(1..=3))
            };
            TraceEvent::play(t, dest)
        } else {
            TraceEvent::navigate(t, format!("app:{name}:{}", r.gen_range(1..=20)))
        };
        events.push(event);
        if events.len() >= p.cap {
            break;
        }
        if events.len() >= p.min_events && r.gen_bool(p.stop[state]) {
            break;
        }
        state = s.rows[state].sample(&mut r);
    }
    let compliant = !(cohort == Cohort::Agent && r.gen_bool(p.noncompliant_prob));
    let mut subgroups = BTreeSet::new();
    if cohort == Cohort::Participant {
        subgroups.insert(if r.gen_bool(p.expert_share) { Subgroup::Expert } else { Subgroup::Regular });
        subgroups.insert(if r.gen_bool(p.familiar_share) { Subgroup::Familiar } else { Subgroup::Unfamiliar });
    }
    let end_time = t + r.gen_range(p.step_ms.0..=p.step_ms.1) as i64;
    Run {
        run_id: format!("{}-{index:05}", cohort.as_str()),
        task_id: task.to_owned(),
        cohort,
        actor_id: format!("{}-{index:05}", p.name),
        subgroups,
        compliant,
        start_time: Some(start_time),
        end_time: Some(end_time),
        events,
        success: None,
        difficulty: None,
    }
}

/// `n_runs` independent runs assigned to tasks round-robin. Run `i` draws
/// from stream `i` of `rng`, so output depends only on (profile, n, seed).
pub fn generate_cohort(
    profile: &BehaviorProfile,
    n_runs: usize,
    task_ids: &[String],
    cohort: Cohort,
    rng: &RandomSource,
) -> Result<Vec<Run>> {
    profile.validate()?;
    if n_runs == 0 {
        return Err(Error::InvalidArgument("n_runs must be at least 1".into()));
    }
    if task_ids.is_empty() {
        return Err(Error::InvalidArgument("at least one task id is required".into()));
    }
    let samplers = Samplers::new(profile)?;
    Ok((0..n_runs)
        .into_par_iter()
        .map(|i| generate_run(profile, &samplers, i, &task_ids[i % task_ids.len()], cohort, rng))
        .collect())
}

/// Profile whose transition rows are the graph's rows. States without a
/// row become absorbing (stop probability 1); other states stop with
/// `stop`. The start distribution is the graph's visitation share.
pub fn profile_from_graph(graph: &ProbabilityGraph, vocabulary: Vec<WeightedQuery>, stop: f64) -> Result<BehaviorProfile> {
    let states: Vec<String> = graph.states.iter().cloned().collect();
    let n = states.len();
    let mut transitions = vec![vec![0.0; n]; n];
    let mut stops = vec![stop; n];
    for (i, s) in states.iter().enumerate() {
        if !graph.has_row(s) {
            transitions[i][i] = 1.0;
            stops[i] = 1.0;
            continue;
        }
        for (j, t) in states.iter().enumerate() {
            transitions[i][j] = graph.prob(s, t);
        }
        let sum: f64 = transitions[i].iter().sum();
        transitions[i].iter_mut().for_each(|p| *p /= sum);
    }
    let share: Vec<f64> = states.iter().map(|s| graph.node_share.get(s).copied().unwrap_or(0.0)).collect();
    let total: f64 = share.iter().sum();
    let start = if total > 0.0 { share.iter().map(|v| v / total).collect() } else { vec![1.0 / n as f64; n] };
    let profile = BehaviorProfile {
        name: "from-graph".into(),
        states,
        transitions,
        start,
        stop: stops,
        query_rate: if vocabulary.is_empty() { 0.0 } else { 1.0 },
        query_vocabulary: vocabulary,
        success_prob: 0.5,
        min_events: 1,
        cap: DEFAULT_CAP,
        noncompliant_prob: 0.0,
        expert_share: 0.0,
        familiar_share: 0.0,
        step_ms: default_step(),
    };
    profile.validate()?;
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ErrorCode;

    #[test]
    fn presets_are_valid_and_match_the_stated_rows() {
        let a = agentlike();
        a.validate().unwrap();
        humanlike().validate().unwrap();
        let (s, pl) = (a.state_index("search").unwrap(), a.state_index("playlist").unwrap());
        assert_eq!(a.transitions[s][s], 0.48);
        assert_eq!(a.transitions[pl][a.state_index("artist").unwrap()], 0.83);
        let h = humanlike();
        assert_eq!(h.transitions[pl][h.state_index("player").unwrap()], 0.5);
    }

    #[test]
    fn single_state_stop_one() {
        let p = BehaviorProfile {
            name: "one".into(),
            states: vec!["home".into()],
            transitions: vec![vec![1.0]],
            start: vec![1.0],
            stop: vec![1.0],
            query_vocabulary: vec![],
            query_rate: 0.0,
            success_prob: 0.0,
            min_events: 1,
            cap: 50,
            noncompliant_prob: 0.0,
            expert_share: 0.0,
            familiar_share: 0.0,
            step_ms: (1, 1),
        };
        let runs = generate_cohort(&p, 20, &task_ids(2), Cohort::Agent, &RandomSource::new(3)).unwrap();
        assert!(runs.iter().all(|r| r.events.len() == 1));
    }

    #[test]
    fn deterministic_and_increasing() {
        let p = humanlike();
        let rng = RandomSource::new(11);
        let a = generate_cohort(&p, 40, &task_ids(3), Cohort::Participant, &rng).unwrap();
        let b = generate_cohort(&p, 40, &task_ids(3), Cohort::Participant, &rng).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.events.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
            assert!(r.events.len() <= DEFAULT_CAP);
        }
    }

    #[test]
    fn invalid_profiles() {
        let mut p = agentlike();
        p.transitions[0][0] = 0.5;
        assert_eq!(p.validate().unwrap_err().code(), ErrorCode::InvalidProfile);
        let mut p = agentlike();
        p.cap = 0;
        assert!(generate_cohort(&p, 1, &task_ids(1), Cohort::Agent, &RandomSource::new(0)).is_err());
        assert!(BehaviorProfile::preset("robot").is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = agentlike();
        assert_eq!(BehaviorProfile::from_json(p.to_json().as_bytes()).unwrap(), p);
    }
}
