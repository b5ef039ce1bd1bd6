//! Transition graphs over semantic interface states and top-k overlap
//! between cohorts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::trace::{AnalysisSet, Cohort, EventKind, Run, StateMap, SEARCH_STATE};

pub type Edge = (String, String);

fn edge_map<S: Serializer, V: Serialize>(map: &BTreeMap<Edge, V>, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row<'a, V> {
        source: &'a str,
        target: &'a str,
        value: &'a V,
    }
    let mut seq = s.serialize_seq(Some(map.len()))?;
    for ((source, target), value) in map {
        seq.serialize_element(&Row { source, target, value })?;
    }
    seq.end()
}

/// How `other-action` events enter the state sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OtherActionPolicy {
    /// Ignored entirely.
    #[default]
    Skip,
    /// Treated as a visit to the current state (a self-loop).
    StatePreserving,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransitionGraph {
    pub states: BTreeSet<String>,
    #[serde(serialize_with = "edge_map")]
    pub counts: BTreeMap<Edge, u64>,
    pub visits: BTreeMap<String, u64>,
}

impl TransitionGraph {
    pub fn merge(&mut self, other: &TransitionGraph) {
        self.states.extend(other.states.iter().cloned());
        for (e, c) in &other.counts {
            *self.counts.entry(e.clone()).or_insert(0) += c;
        }
        for (s, v) in &other.visits {
            *self.visits.entry(s.clone()).or_insert(0) += v;
        }
    }

    pub fn edge_count(&self) -> usize {
        self.counts.len()
    }

    fn add_run(&mut self, run: &Run, map: &StateMap, policy: OtherActionPolicy) {
        let mut prev: Option<String> = None;
        for event in &run.events {
            let state = match event.kind {
                EventKind::Query => SEARCH_STATE.to_owned(),
                EventKind::Navigate | EventKind::Play => match &event.destination {
                    Some(d) => map.map_state(d).to_owned(),
                    None => continue,
                },
                EventKind::OtherAction => match (policy, &prev) {
                    (OtherActionPolicy::StatePreserving, Some(p)) => p.clone(),
                    _ => continue,
                },
            };
            self.states.insert(state.clone());
            *self.visits.entry(state.clone()).or_insert(0) += 1;
            if let Some(p) = prev.take() {
                *self.counts.entry((p, state.clone())).or_insert(0) += 1;
            }
            prev = Some(state);
        }
    }
}

/// Counts consecutive state pairs within each run; runs never chain.
pub fn build_graph<'a>(
    runs: impl IntoParallelIterator<Item = &'a Run>,
    map: &StateMap,
    policy: OtherActionPolicy,
) -> TransitionGraph {
    runs.into_par_iter()
        .map(|r| {
            let mut g = TransitionGraph::default();
            g.add_run(r, map, policy);
            g
        })
        .reduce(TransitionGraph::default, |mut a, b| {
            a.merge(&b);
            a
        })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProbabilityGraph {
    pub states: BTreeSet<String>,
    #[serde(serialize_with = "edge_map")]
    pub probs: BTreeMap<Edge, f64>,
    pub node_share: BTreeMap<String, f64>,
}

impl ProbabilityGraph {
    /// Outgoing probabilities of `source`, largest first, ties by target.
    pub fn successors(&self, source: &str) -> Vec<(&str, f64)> {
        let mut out: Vec<(&str, f64)> = self
            .probs
            .iter()
            .filter(|((s, _), _)| s == source)
            .map(|((_, t), &p)| (t.as_str(), p))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        out
    }

    pub fn has_row(&self, source: &str) -> bool {
        self.probs.keys().any(|(s, _)| s == source)
    }

    pub fn prob(&self, source: &str, target: &str) -> f64 {
        self.probs
            .get(&(source.to_owned(), target.to_owned()))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Per-source normalization; terminal sources get no row.
pub fn normalize_rows(graph: &TransitionGraph) -> ProbabilityGraph {
    let mut out_totals: BTreeMap<&str, u64> = BTreeMap::new();
    for ((s, _), c) in &graph.counts {
        *out_totals.entry(s).or_insert(0) += c;
    }
    let probs = graph
        .counts
        .iter()
        .map(|(e, &c)| (e.clone(), c as f64 / out_totals[e.0.as_str()] as f64))
        .collect();
    let total: u64 = graph.visits.values().sum();
    let node_share = graph
        .visits
        .iter()
        .map(|(s, &v)| (s.clone(), if total == 0 { 0.0 } else { v as f64 / total as f64 }))
        .collect();
    ProbabilityGraph { states: graph.states.clone(), probs, node_share }
}

/// Unweighted mean of normalized task graphs. A source row is averaged
/// over the tasks in which that source has outgoing edges; node shares are
/// averaged over all tasks.
pub fn macro_average_graph(task_graphs: &[TransitionGraph]) -> Result<ProbabilityGraph> {
    if task_graphs.is_empty() {
        return Err(Error::EmptySample("macro average of zero task graphs".into()));
    }
    let normalized: Vec<ProbabilityGraph> = task_graphs.iter().map(normalize_rows).collect();
    let mut row_tasks: BTreeMap<&str, usize> = BTreeMap::new();
    for g in &normalized {
        let sources: BTreeSet<&str> = g.probs.keys().map(|(s, _)| s.as_str()).collect();
        for s in sources {
            *row_tasks.entry(s).or_insert(0) += 1;
        }
    }
    let mut probs: BTreeMap<Edge, f64> = BTreeMap::new();
    let mut node_share: BTreeMap<String, f64> = BTreeMap::new();
    let mut states = BTreeSet::new();
    let n = normalized.len() as f64;
    for g in &normalized {
        states.extend(g.states.iter().cloned());
        for (e, p) in &g.probs {
            *probs.entry(e.clone()).or_insert(0.0) += p / row_tasks[e.0.as_str()] as f64;
        }
        for (s, v) in &g.node_share {
            *node_share.entry(s.clone()).or_insert(0.0) += v / n;
        }
    }
    Ok(ProbabilityGraph { states, probs, node_share })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopKMode {
    /// Exactly min(k, edges) edges; ties at rank k broken lexicographically.
    #[default]
    Exact,
    /// All edges whose count equals the k-th count are kept.
    IncludeTies,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeSet {
    pub k: usize,
    pub edges: BTreeSet<Edge>,
    pub mode: TopKMode,
}

/// Edges ranked by (count desc, source asc, target asc).
pub fn ranked_edges(graph: &TransitionGraph) -> Vec<(&Edge, u64)> {
    let mut ranked: Vec<(&Edge, u64)> = graph.counts.iter().map(|(e, &c)| (e, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked
}

pub fn top_k_edges(graph: &TransitionGraph, k: usize, mode: TopKMode) -> Result<EdgeSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let ranked = ranked_edges(graph);
    let take = match mode {
        TopKMode::Exact => k.min(ranked.len()),
        TopKMode::IncludeTies => match ranked.get(k.saturating_sub(1)) {
            Some(&(_, cutoff)) => ranked.iter().take_while(|(_, c)| *c >= cutoff).count(),
            None => ranked.len(),
        },
    };
    Ok(EdgeSet {
        k,
        edges: ranked[..take].iter().map(|(e, _)| (*e).clone()).collect(),
        mode,
    })
}

pub fn jaccard_overlap(a: &EdgeSet, b: &EdgeSet) -> f64 {
    let union = a.edges.union(&b.edges).count();
    if union == 0 {
        return 1.0;
    }
    a.edges.intersection(&b.edges).count() as f64 / union as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JaccardMode {
    Micro,
    Macro,
}

impl std::str::FromStr for JaccardMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(JaccardMode::Micro),
            "macro" => Ok(JaccardMode::Macro),
            _ => Err(Error::InvalidArgument(format!("unknown Jaccard mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NavOptions {
    pub other_action: OtherActionPolicy,
    pub top_k: TopKMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskJaccard {
    pub task_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JaccardReport {
    pub mode: JaccardMode,
    pub ks: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_task: Vec<TaskJaccard>,
    /// Tasks left out of the macro mean because a cohort has no runs there.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped_tasks: Vec<String>,
}

impl JaccardReport {
    pub fn at(&self, k: usize) -> Option<f64> {
        self.ks.iter().position(|&x| x == k).map(|i| self.values[i])
    }
}

fn cohort_graph<'a>(runs: impl Iterator<Item = &'a Run>, map: &StateMap, options: NavOptions) -> TransitionGraph {
    let runs: Vec<&Run> = runs.collect();
    build_graph(runs, map, options.other_action)
}

fn jaccard_at(a: &TransitionGraph, b: &TransitionGraph, ks: &[usize], mode: TopKMode) -> Result<Vec<f64>> {
    ks.iter()
        .map(|&k| Ok(jaccard_overlap(&top_k_edges(a, k, mode)?, &top_k_edges(b, k, mode)?)))
        .collect()
}

pub fn jaccard_report(set: &AnalysisSet<'_>, ks: &[usize], mode: JaccardMode, options: NavOptions) -> Result<JaccardReport> {
    for cohort in Cohort::BOTH {
        if set.runs_of(cohort).next().is_none() {
            return Err(Error::EmptyCohort(format!("no {cohort} runs in the analysis set")));
        }
    }
    let map = set.corpus.state_map();
    match mode {
        JaccardMode::Micro => {
            let a = cohort_graph(set.runs_of(Cohort::Agent), map, options);
            let p = cohort_graph(set.runs_of(Cohort::Participant), map, options);
            Ok(JaccardReport {
                mode,
                ks: ks.to_vec(),
                values: jaccard_at(&a, &p, ks, options.top_k)?,
                per_task: Vec::new(),
                skipped_tasks: Vec::new(),
            })
        }
        JaccardMode::Macro => {
            let mut per_task = Vec::new();
            let mut skipped = Vec::new();
            for task in set.task_ids() {
                let runs: Vec<&Run> = set.task_runs(task).collect();
                let of = |c: Cohort| cohort_graph(runs.iter().copied().filter(|r| r.cohort == c), map, options);
                let has = |c: Cohort| runs.iter().any(|r| r.cohort == c);
                if !has(Cohort::Agent) || !has(Cohort::Participant) {
                    skipped.push(task.to_owned());
                    continue;
                }
                let values = jaccard_at(&of(Cohort::Agent), &of(Cohort::Participant), ks, options.top_k)?;
                per_task.push(TaskJaccard { task_id: task.to_owned(), values });
            }
            if per_task.is_empty() {
                return Err(Error::EmptyCohort("no task has runs from both cohorts".into()));
            }
            let n = per_task.len() as f64;
            let values = (0..ks.len())
                .map(|i| per_task.iter().map(|t| t.values[i]).sum::<f64>() / n)
                .collect();
            Ok(JaccardReport { mode, ks: ks.to_vec(), values, per_task, skipped_tasks: skipped })
        }
    }
}

/// Per-task graphs of one cohort, in task order.
pub fn task_graphs(set: &AnalysisSet<'_>, cohort: Cohort, options: NavOptions) -> Vec<TransitionGraph> {
    let map = set.corpus.state_map();
    set.task_ids()
        .into_iter()
        .map(|t| cohort_graph(set.task_runs(t).filter(|r| r.cohort == cohort), map, options))
        .filter(|g| !g.visits.is_empty())
        .collect()
}

/// Self-transition probability; `None` when the state has no outgoing row.
pub fn self_loop_prob(graph: &ProbabilityGraph, state: &str) -> Option<f64> {
    graph.has_row(state).then(|| graph.prob(state, state))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DotStyle {
    pub show_threshold: f64,
    pub gray_threshold: f64,
    pub hide_states: BTreeSet<String>,
}

impl Default for DotStyle {
    fn default() -> Self {
        DotStyle { show_threshold: 0.05, gray_threshold: 0.10, hide_states: BTreeSet::new() }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

/// DOT rendering. Node width scales with visitation share and edge
/// width with probability.
pub fn export_dot(graph: &ProbabilityGraph, name: &str, style: &DotStyle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(name));
    out.push_str("  node [shape=circle, fixedsize=true];\n");
    for state in &graph.states {
        if style.hide_states.contains(state) {
            continue;
        }
        let share = graph.node_share.get(state).copied().unwrap_or(0.0);
        let _ = writeln!(
            out,
            "  {} [width={:.3}, label=\"{}\\n{:.0}%\"];",
            quote(state),
            0.4 + 2.0 * share,
            escape(state),
            share * 100.0
        );
    }
    for ((s, t), &p) in &graph.probs {
        if p < style.show_threshold || style.hide_states.contains(s) || style.hide_states.contains(t) {
            continue;
        }
        let color = if p < style.gray_threshold { ", color=gray, fontcolor=gray" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [penwidth={:.2}, label=\"{:.2}\"{}];",
            quote(s),
            quote(t),
            1.0 + 4.0 * p,
            p,
            color
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceEvent;

    fn run(events: Vec<TraceEvent>) -> Run {
        Run {
            run_id: "r".into(),
            task_id: "T1".into(),
            cohort: Cohort::Agent,
            actor_id: "x".into(),
            subgroups: Default::default(),
            compliant: true,
            start_time: None,
            end_time: None,
            events,
            success: None,
            difficulty: None,
        }
    }

    fn e(s: &str, t: &str) -> Edge {
        (s.into(), t.into())
    }

    fn counts(pairs: &[(&str, &str, u64)]) -> TransitionGraph {
        let mut g = TransitionGraph::default();
        for &(s, t, c) in pairs {
            g.states.insert(s.into());
            g.states.insert(t.into());
            g.counts.insert(e(s, t), c);
            *g.visits.entry(s.into()).or_insert(0) += c;
        }
        g
    }

    #[test]
    fn search_search_artist() {
        let r = run(vec![
            TraceEvent::query(0, "a"),
            TraceEvent::query(1, "b"),
            TraceEvent::navigate(2, "app:artist:1"),
        ]);
        let g = build_graph([&r], &StateMap::default(), OtherActionPolicy::Skip);
        assert_eq!(g.counts.len(), 2);
        assert_eq!(g.counts[&e("search", "search")], 1);
        assert_eq!(g.counts[&e("search", "artist")], 1);
        assert_eq!(g.visits["search"], 2);
    }

    #[test]
    fn single_event_and_other_actions() {
        let r = run(vec![TraceEvent::navigate(0, "app:home")]);
        let g = build_graph([&r], &StateMap::default(), OtherActionPolicy::Skip);
        assert!(g.counts.is_empty());
        assert_eq!(g.visits["home"], 1);

        let r = run(vec![
            TraceEvent::navigate(0, "app:home"),
            TraceEvent::other(1),
            TraceEvent::navigate(2, "app:search"),
        ]);
        let skip = build_graph([&r], &StateMap::default(), OtherActionPolicy::Skip);
        assert_eq!(skip.counts.keys().collect::<Vec<_>>(), [&e("home", "search")]);
        let keep = build_graph([&r], &StateMap::default(), OtherActionPolicy::StatePreserving);
        assert_eq!(keep.counts[&e("home", "home")], 1);
    }

    #[test]
    fn row_normalization() {
        let p = normalize_rows(&counts(&[("a", "b", 3), ("a", "c", 1), ("d", "d", 2)]));
        assert_eq!(p.prob("a", "b"), 0.75);
        assert_eq!(p.prob("a", "c"), 0.25);
        assert_eq!(p.prob("d", "d"), 1.0);
        assert!(!p.has_row("b"));
        assert_eq!(self_loop_prob(&p, "d"), Some(1.0));
        assert_eq!(self_loop_prob(&p, "a"), Some(0.0));
        assert_eq!(self_loop_prob(&p, "b"), None);
    }

    #[test]
    fn macro_rows() {
        let t1 = counts(&[("a", "b", 1)]);
        let t2 = counts(&[("a", "c", 4)]);
        let m = macro_average_graph(&[t1.clone(), t2]).unwrap();
        assert_eq!(m.prob("a", "b"), 0.5);
        assert_eq!(m.prob("a", "c"), 0.5);
        // `x` only appears in the second task: its row is that task's row
        let t3 = counts(&[("a", "b", 1), ("x", "a", 2), ("x", "b", 2)]);
        let m = macro_average_graph(&[t1.clone(), t3]).unwrap();
        assert_eq!(m.prob("x", "a"), 0.5);
        assert_eq!(m.prob("a", "b"), 1.0);
        let same = macro_average_graph(&[t1.clone(), t1.clone()]).unwrap();
        assert_eq!(same, normalize_rows(&t1));
    }

    #[test]
    fn top_k_rules() {
        let g = counts(&[("a", "b", 5), ("c", "d", 9), ("b", "a", 5)]);
        let top1 = top_k_edges(&g, 1, TopKMode::Exact).unwrap();
        assert_eq!(top1.edges, [e("c", "d")].into());
        let top2 = top_k_edges(&g, 2, TopKMode::Exact).unwrap();
        assert_eq!(top2.edges, [e("c", "d"), e("a", "b")].into());
        assert_eq!(top_k_edges(&g, 2, TopKMode::IncludeTies).unwrap().edges.len(), 3);
        assert_eq!(top_k_edges(&g, 10, TopKMode::Exact).unwrap().edges.len(), 3);
    }

    #[test]
    fn jaccard_values() {
        let set = |n: std::ops::Range<u32>| EdgeSet {
            k: 10,
            edges: n.map(|i| e("s", &i.to_string())).collect(),
            mode: TopKMode::Exact,
        };
        assert_eq!(jaccard_overlap(&set(0..10), &set(0..10)), 1.0);
        assert_eq!(jaccard_overlap(&set(0..5), &set(5..10)), 0.0);
        assert_eq!(jaccard_overlap(&set(0..0), &set(0..0)), 1.0);
        let j = jaccard_overlap(&set(0..10), &set(3..13));
        assert_eq!(format!("{j:.2}"), "0.54");
    }

    #[test]
    fn dot_thresholds_and_determinism() {
        let mut p = ProbabilityGraph::default();
        for s in ["a", "b", "c", "d", "track"] {
            p.states.insert(s.into());
            p.node_share.insert(s.into(), 0.2);
        }
        p.probs.insert(e("a", "b"), 0.07);
        p.probs.insert(e("a", "c"), 0.04);
        p.probs.insert(e("a", "d"), 0.2);
        p.probs.insert(e("a", "track"), 0.69);
        let style = DotStyle { hide_states: ["track".to_string()].into(), ..Default::default() };
        let dot = export_dot(&p, "agent", &style);
        assert_eq!(dot, export_dot(&p, "agent", &style));
        let line = |t: &str| dot.lines().find(|l| l.contains(&format!("\"a\" -> \"{t}\""))).map(str::to_owned);
        assert!(line("b").unwrap().contains("color=gray"));
        assert!(line("c").is_none());
        assert!(!line("d").unwrap().contains("gray"));
        assert!(line("track").is_none());
        assert!(!dot.contains("\"track\" ["));
        let empty = export_dot(&ProbabilityGraph::default(), "empty", &DotStyle::default());
        assert_eq!(empty, "digraph \"empty\" {\n  node [shape=circle, fixedsize=true];\n}\n");
    }
}
