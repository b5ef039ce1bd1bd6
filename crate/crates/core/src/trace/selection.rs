//! Analysis-set construction.
//!
//! `All` keeps every run. `Cs` drops runs flagged non-compliant. `Te` further
//! drops every run of a task that keeps too few compliant agent runs or is
//! explicitly marked `te_excluded`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::model::{Cohort, Corpus, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AnalysisPolicy {
    All,
    Cs,
    Te,
}

impl fmt::Display for AnalysisPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalysisPolicy::All => "ALL",
            AnalysisPolicy::Cs => "CS",
            AnalysisPolicy::Te => "TE",
        })
    }
}

impl FromStr for AnalysisPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(AnalysisPolicy::All),
            "cs" => Ok(AnalysisPolicy::Cs),
            "te" => Ok(AnalysisPolicy::Te),
            other => Err(format!("unknown analysis set `{other}` (expected all, cs, te)")),
        }
    }
}

pub const DEFAULT_MIN_COMPLIANT_AGENT_RUNS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisSelection {
    pub policy: AnalysisPolicy,
    pub min_compliant_agent_runs_per_task: usize,
    pub included_run_ids: BTreeSet<String>,
    /// Task id to the reason it was dropped.
    pub excluded_tasks: BTreeMap<String, String>,
}

pub fn select_analysis_set(corpus: &Corpus, policy: AnalysisPolicy) -> AnalysisSelection {
    select_analysis_set_with(corpus, policy, DEFAULT_MIN_COMPLIANT_AGENT_RUNS)
}

pub fn select_analysis_set_with(
    corpus: &Corpus,
    policy: AnalysisPolicy,
    min_compliant_agent_runs: usize,
) -> AnalysisSelection {
    let threshold = min_compliant_agent_runs.max(1);
    let mut excluded_tasks = BTreeMap::new();
    if policy == AnalysisPolicy::Te {
        for (task_id, spec) in corpus.tasks() {
            let compliant_agents = corpus
                .runs_of(Cohort::Agent)
                .filter(|r| &r.task_id == task_id && r.compliant)
                .count();
            let reason = if spec.te_excluded {
                Some("te_excluded flag set".to_owned())
            } else if compliant_agents < threshold {
                Some(format!(
                    "{compliant_agents} compliant agent run(s), fewer than {threshold}"
                ))
            } else {
                None
            };
            if let Some(reason) = reason {
                excluded_tasks.insert(task_id.clone(), reason);
            }
        }
    }
    let included_run_ids = corpus
        .runs()
        .iter()
        .filter(|r| policy == AnalysisPolicy::All || r.compliant)
        .filter(|r| !excluded_tasks.contains_key(&r.task_id))
        .map(|r| r.run_id.clone())
        .collect();
    AnalysisSelection {
        policy,
        min_compliant_agent_runs_per_task: threshold,
        included_run_ids,
        excluded_tasks,
    }
}

/// A corpus viewed through a resolved selection.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisSet<'a> {
    pub corpus: &'a Corpus,
    pub selection: &'a AnalysisSelection,
}

impl<'a> AnalysisSet<'a> {
    pub fn new(corpus: &'a Corpus, selection: &'a AnalysisSelection) -> Self {
        AnalysisSet { corpus, selection }
    }

    /// Included runs in corpus order.
    pub fn runs(&self) -> impl Iterator<Item = &'a Run> + 'a {
        let sel = self.selection;
        self.corpus
            .runs()
            .iter()
            .filter(move |r| sel.included_run_ids.contains(&r.run_id))
    }

    pub fn runs_of(&self, cohort: Cohort) -> impl Iterator<Item = &'a Run> + 'a {
        self.runs().filter(move |r| r.cohort == cohort)
    }

    pub fn len(&self) -> usize {
        self.selection.included_run_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.included_run_ids.is_empty()
    }

    /// Task ids with at least one included run, sorted.
    pub fn task_ids(&self) -> Vec<&'a str> {
        let set: BTreeSet<&str> = self.runs().map(|r| r.task_id.as_str()).collect();
        set.into_iter().collect()
    }

    pub fn task_runs(&self, task_id: &'a str) -> impl Iterator<Item = &'a Run> + 'a {
        self.runs().filter(move |r| r.task_id == task_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::model::{ReasoningPattern, TaskSpec};
    use crate::trace::parse::corpus_from_parts;
    use crate::trace::StateMap;

    fn run(id: &str, task: &str, cohort: Cohort, compliant: bool) -> Run {
        Run {
            run_id: id.into(),
            task_id: task.into(),
            cohort,
            actor_id: id.into(),
            subgroups: Default::default(),
            compliant,
            start_time: None,
            end_time: None,
            events: vec![],
            success: None,
            difficulty: None,
        }
    }

    fn task(id: &str) -> TaskSpec {
        TaskSpec {
            task_id: id.into(),
            pattern: ReasoningPattern::Linear,
            accepted_outcomes: ["x".to_owned()].into(),
            te_excluded: false,
            description: String::new(),
        }
    }

    /// Ten tasks with five agent runs each; eleven flagged (one each on
    /// T4, T6, T7, four each on T9 and T10).
    fn audit_corpus() -> Corpus {
        let flagged: BTreeMap<&str, usize> =
            [("T4", 1), ("T6", 1), ("T7", 1), ("T9", 4), ("T10", 4)].into();
        let mut runs = Vec::new();
        let mut tasks = Vec::new();
        for t in 1..=10 {
            let tid = format!("T{t}");
            tasks.push(task(&tid));
            let bad = flagged.get(tid.as_str()).copied().unwrap_or(0);
            for i in 0..5 {
                runs.push(run(&format!("a-{tid}-{i}"), &tid, Cohort::Agent, i >= bad));
            }
            for i in 0..3 {
                runs.push(run(&format!("p-{tid}-{i}"), &tid, Cohort::Participant, true));
            }
        }
        corpus_from_parts(runs, tasks, StateMap::default()).unwrap()
    }

    #[test]
    fn cs_drops_flagged_agent_runs() {
        let corpus = audit_corpus();
        let cs = select_analysis_set(&corpus, AnalysisPolicy::Cs);
        let set = AnalysisSet::new(&corpus, &cs);
        assert_eq!(corpus.runs_of(Cohort::Agent).count(), 50);
        assert_eq!(set.runs_of(Cohort::Agent).count(), 39);
        assert_eq!(set.runs_of(Cohort::Participant).count(), 30);
        assert!(cs.excluded_tasks.is_empty());
    }

    #[test]
    fn te_drops_under_populated_tasks() {
        let corpus = audit_corpus();
        let te = select_analysis_set(&corpus, AnalysisPolicy::Te);
        let dropped: Vec<_> = te.excluded_tasks.keys().cloned().collect();
        assert_eq!(dropped, ["T10", "T9"]);
        let set = AnalysisSet::new(&corpus, &te);
        assert!(set.runs().all(|r| r.task_id != "T9" && r.task_id != "T10"));
        assert_eq!(set.task_ids().len(), 8);
    }

    #[test]
    fn all_compliant_means_cs_equals_all() {
        let runs = vec![
            run("a", "T1", Cohort::Agent, true),
            run("p", "T1", Cohort::Participant, true),
        ];
        let corpus = corpus_from_parts(runs, vec![task("T1")], StateMap::default()).unwrap();
        let all = select_analysis_set(&corpus, AnalysisPolicy::All);
        let cs = select_analysis_set(&corpus, AnalysisPolicy::Cs);
        assert_eq!(all.included_run_ids, cs.included_run_ids);
    }

    #[test]
    fn explicit_te_flag_excludes() {
        let mut t = task("T1");
        t.te_excluded = true;
        let runs = (0..3).map(|i| run(&format!("a{i}"), "T1", Cohort::Agent, true)).collect();
        let corpus = corpus_from_parts(runs, vec![t], StateMap::default()).unwrap();
        let te = select_analysis_set(&corpus, AnalysisPolicy::Te);
        assert!(te.excluded_tasks["T1"].contains("te_excluded"));
        assert!(te.included_run_ids.is_empty());
    }

    #[test]
    fn sets_are_nested() {
        let corpus = audit_corpus();
        let all = select_analysis_set(&corpus, AnalysisPolicy::All);
        let cs = select_analysis_set(&corpus, AnalysisPolicy::Cs);
        let te = select_analysis_set(&corpus, AnalysisPolicy::Te);
        assert!(te.included_run_ids.is_subset(&cs.included_run_ids));
        assert!(cs.included_run_ids.is_subset(&all.included_run_ids));
    }
}
