use serde::Serialize;

use super::model::{Run, TaskSpec};

/// Outcome of a run, with provenance for the discrepancy warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub success: bool,
    /// Value from the last-play rule alone.
    pub derived: bool,
    /// An explicit `success` field was present and disagreed with the log.
    pub mismatch: bool,
}

/// Success iff the last played destination is an accepted outcome.
/// No play event means the task was skipped, which counts as failure.
pub fn derive_outcome(run: &Run, task: &TaskSpec) -> bool {
    run.last_play()
        .is_some_and(|dest| task.accepted_outcomes.contains(dest))
}

/// An explicit `run.success` overrides the derived value.
pub fn determine_outcome(run: &Run, task: &TaskSpec) -> Outcome {
    let derived = derive_outcome(run, task);
    match run.success {
        Some(explicit) => Outcome {
            success: explicit,
            derived,
            mismatch: explicit != derived,
        },
        None => Outcome {
            success: derived,
            derived,
            mismatch: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::trace::model::{Cohort, ReasoningPattern, TraceEvent};

    fn task() -> TaskSpec {
        TaskSpec {
            task_id: "T1".into(),
            pattern: ReasoningPattern::Linear,
            accepted_outcomes: ["app:track:correct".to_owned()].into(),
            te_excluded: false,
            description: String::new(),
        }
    }

    fn run(events: Vec<TraceEvent>) -> Run {
        Run {
            run_id: "r".into(),
            task_id: "T1".into(),
            cohort: Cohort::Agent,
            actor_id: "a".into(),
            subgroups: BTreeSet::new(),
            compliant: true,
            start_time: None,
            end_time: None,
            events,
            success: None,
            difficulty: None,
        }
    }

    #[test]
    fn last_play_rule() {
        let t = task();
        assert!(determine_outcome(&run(vec![TraceEvent::play(1, "app:track:correct")]), &t).success);
        assert!(!determine_outcome(&run(vec![TraceEvent::query(1, "x")]), &t).success);
    }

    #[test]
    fn both_play_orderings() {
        let t = task();
        let wrong_then_right = run(vec![
            TraceEvent::play(1, "app:track:wrong"),
            TraceEvent::play(2, "app:track:correct"),
        ]);
        let right_then_wrong = run(vec![
            TraceEvent::play(1, "app:track:correct"),
            TraceEvent::play(2, "app:track:wrong"),
        ]);
        assert!(determine_outcome(&wrong_then_right, &t).success);
        assert!(!determine_outcome(&right_then_wrong, &t).success);
    }

    #[test]
    fn explicit_success_overrides_and_flags() {
        let t = task();
        let mut r = run(vec![TraceEvent::play(1, "app:track:wrong")]);
        r.success = Some(true);
        let o = determine_outcome(&r, &t);
        assert!(o.success && !o.derived && o.mismatch);
        r.success = Some(false);
        assert!(!determine_outcome(&r, &t).mismatch);
    }

    #[test]
    fn non_play_events_do_not_matter() {
        let t = task();
        let a = run(vec![
            TraceEvent::query(1, "x"),
            TraceEvent::navigate(2, "app:artist:1"),
            TraceEvent::play(3, "app:track:correct"),
            TraceEvent::other(4),
        ]);
        let b = run(vec![
            TraceEvent::navigate(1, "app:artist:1"),
            TraceEvent::other(2),
            TraceEvent::play(3, "app:track:correct"),
            TraceEvent::query(4, "x"),
        ]);
        assert_eq!(determine_outcome(&a, &t), determine_outcome(&b, &t));
    }
}
