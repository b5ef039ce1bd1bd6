//! Reading and writing trace corpora.
//!
//! Traces are JSON Lines, one [`Run`] per line. Tasks are a JSON array of
//! [`TaskSpec`]. The state map is optional and defaults to
//! [`StateMap::default`].

use std::collections::{BTreeMap, HashSet};

use serde_json::error::Category;

use super::model::{Corpus, EventKind, Run, TaskSpec};
use super::state_map::StateMap;
use crate::error::{Error, Result};

pub fn parse_tasks(bytes: &[u8]) -> Result<BTreeMap<String, TaskSpec>> {
    let list: Vec<TaskSpec> =
        serde_json::from_slice(bytes).map_err(|e| Error::InvalidTask(e.to_string()))?;
    let mut tasks = BTreeMap::new();
    for task in list {
        if task.accepted_outcomes.is_empty() {
            return Err(Error::InvalidTask(format!(
                "task `{}` has no accepted outcomes",
                task.task_id
            )));
        }
        let id = task.task_id.clone();
        if tasks.insert(id.clone(), task).is_some() {
            return Err(Error::InvalidTask(format!("duplicate task_id `{id}`")));
        }
    }
    Ok(tasks)
}

fn classify(line: usize, err: serde_json::Error) -> Error {
    let message = err.to_string();
    match err.classify() {
        Category::Data => {
            if let Some(rest) = message.strip_prefix("missing field `") {
                let field = rest.split('`').next().unwrap_or_default().to_owned();
                Error::MissingField { line, field }
            } else {
                Error::InvalidField { line, message }
            }
        }
        _ => Error::MalformedLine { line, message },
    }
}

/// Checks the per-run invariants that serde cannot express.
pub fn validate_run(run: &Run, line: usize) -> Result<()> {
    for (i, ev) in run.events.iter().enumerate() {
        match ev.kind {
            EventKind::Query => {
                let ok = ev.query_text.as_deref().is_some_and(|t| !t.trim().is_empty());
                if !ok {
                    return Err(Error::MissingField {
                        line,
                        field: format!("events[{i}].query_text"),
                    });
                }
            }
            EventKind::Navigate | EventKind::Play => {
                if ev.destination.as_deref().is_none_or(str::is_empty) {
                    return Err(Error::MissingField {
                        line,
                        field: format!("events[{i}].destination"),
                    });
                }
            }
            EventKind::OtherAction => {}
        }
        if i > 0 && ev.timestamp < run.events[i - 1].timestamp {
            return Err(Error::NonMonotoneTimestamps {
                line,
                run_id: run.run_id.clone(),
                index: i,
            });
        }
    }
    let out_of_bounds = |run: &Run| {
        if let (Some(s), Some(e)) = (run.start_time, run.end_time) {
            if s > e {
                return true;
            }
        }
        if let (Some(first), Some(last)) = (run.events.first(), run.events.last()) {
            if run.start_time.is_some_and(|s| s > first.timestamp) {
                return true;
            }
            if run.end_time.is_some_and(|e| e < last.timestamp) {
                return true;
            }
        }
        false
    };
    if out_of_bounds(run) {
        return Err(Error::TimeBounds {
            line,
            run_id: run.run_id.clone(),
        });
    }
    Ok(())
}

/// Parses and validates every line, collecting all diagnostics instead of
/// stopping at the first. Blank lines are skipped.
pub fn parse_runs_collect(
    trace_bytes: &[u8],
    tasks: &BTreeMap<String, TaskSpec>,
) -> (Vec<Run>, Vec<Error>) {
    let mut runs = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    let text = match std::str::from_utf8(trace_bytes) {
        Ok(t) => t,
        Err(e) => {
            let line = trace_bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
            errors.push(Error::MalformedLine {
                line,
                message: "invalid UTF-8".into(),
            });
            return (runs, errors);
        }
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let run: Run = match serde_json::from_str(raw) {
            Ok(r) => r,
            Err(e) => {
                errors.push(classify(line, e));
                continue;
            }
        };
        if let Err(e) = validate_run(&run, line) {
            errors.push(e);
            continue;
        }
        if !tasks.contains_key(&run.task_id) {
            errors.push(Error::UnknownTask {
                line,
                run_id: run.run_id.clone(),
                task_id: run.task_id.clone(),
            });
            continue;
        }
        if !seen.insert(run.run_id.clone()) {
            errors.push(Error::DuplicateRunId {
                line,
                run_id: run.run_id.clone(),
            });
            continue;
        }
        runs.push(run);
    }
    (runs, errors)
}

/// Parses a full corpus, returning every diagnostic on failure.
pub fn parse_corpus_diagnostics(
    trace_bytes: &[u8],
    task_bytes: &[u8],
    state_map_bytes: Option<&[u8]>,
) -> std::result::Result<Corpus, Vec<Error>> {
    let tasks = parse_tasks(task_bytes).map_err(|e| vec![e])?;
    let state_map = match state_map_bytes {
        Some(b) => StateMap::from_json(b).map_err(|e| vec![e])?,
        None => StateMap::default(),
    };
    let (runs, errors) = parse_runs_collect(trace_bytes, &tasks);
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(Corpus {
        runs,
        tasks,
        state_map,
    })
}

pub fn parse_corpus(
    trace_bytes: &[u8],
    task_bytes: &[u8],
    state_map_bytes: Option<&[u8]>,
) -> Result<Corpus> {
    parse_corpus_diagnostics(trace_bytes, task_bytes, state_map_bytes)
        .map_err(|mut errs| errs.swap_remove(0))
}

/// Builds a corpus from in-memory values, applying the same validation as
/// the parser. Line numbers in errors are 1-based run indices.
pub fn corpus_from_parts(
    runs: Vec<Run>,
    tasks: Vec<TaskSpec>,
    state_map: StateMap,
) -> Result<Corpus> {
    state_map.validate()?;
    let bytes = serde_json::to_vec(&tasks).map_err(|e| Error::InvalidTask(e.to_string()))?;
    let tasks = parse_tasks(&bytes)?;
    let mut seen = HashSet::new();
    for (i, run) in runs.iter().enumerate() {
        let line = i + 1;
        validate_run(run, line)?;
        if !tasks.contains_key(&run.task_id) {
            return Err(Error::UnknownTask {
                line,
                run_id: run.run_id.clone(),
                task_id: run.task_id.clone(),
            });
        }
        if !seen.insert(run.run_id.as_str()) {
            return Err(Error::DuplicateRunId {
                line,
                run_id: run.run_id.clone(),
            });
        }
    }
    Ok(Corpus {
        runs,
        tasks,
        state_map,
    })
}

pub fn write_runs<'a>(runs: impl IntoIterator<Item = &'a Run>) -> String {
    let mut out = String::new();
    for run in runs {
        out.push_str(&serde_json::to_string(run).expect("Run serializes"));
        out.push('\n');
    }
    out
}

pub fn write_tasks<'a>(tasks: impl IntoIterator<Item = &'a TaskSpec>) -> String {
    let list: Vec<&TaskSpec> = tasks.into_iter().collect();
    let mut s = serde_json::to_string_pretty(&list).expect("TaskSpec serializes");
    s.push('\n');
    s
}

impl Corpus {
    pub fn to_trace_jsonl(&self) -> String {
        write_runs(&self.runs)
    }

    pub fn to_tasks_json(&self) -> String {
        write_tasks(self.tasks.values())
    }
}
