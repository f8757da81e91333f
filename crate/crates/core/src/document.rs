//! Task-set and profile files.
//!
//! A task-set document is JSON:
//!
//! ```json
//! {
//!   "version": 1,
//!   "platform": { "m": 3 },
//!   "tasks": [ { "id": "T1", "O": 0, "v": 2, "C": 2, "D": 5, "T": 5 } ],
//!   "priority": "pm-sort",
//!   "exec_bounds": { "T1": 1 }
//! }
//! ```
//!
//! `priority` is optional: an explicit list of ids, or one of `"rm"` (by
//! period), `"dm"` (by relative deadline) and `"pm-sort"` (by width). Every
//! rule is a stable sort, ties keep the declared order. Without it the
//! declared order is the priority order. A finite job set uses `"jobs"` with
//! entries `{ "id", "r", "v", "e", "d" }` instead of `"tasks"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::error::Category;

use crate::error::{DocumentError, ProfileError, ValidationError, Violation, ViolationKind};
use crate::model::{
    ExecutionProfile, JobKey, JobSet, JobSpec, Platform, Task, TaskSet, Time, Workload,
};

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformEntry {
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub id: String,
    #[serde(rename = "O")]
    pub offset: Time,
    pub v: u32,
    #[serde(rename = "C")]
    pub wcet: Time,
    #[serde(rename = "D")]
    pub deadline: Time,
    #[serde(rename = "T")]
    pub period: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobEntry {
    pub id: String,
    pub r: Time,
    pub v: u32,
    pub e: Time,
    pub d: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorityRule {
    Rm,
    Dm,
    PmSort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorityDirective {
    Rule(PriorityRule),
    Explicit(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSetDocument {
    pub version: u32,
    pub platform: PlatformEntry,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<TaskEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jobs: Vec<JobEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<PriorityDirective>,
    /// Lower execution bound per task or job id, for predictability probing.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exec_bounds: BTreeMap<String, Time>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadedWorkload {
    Tasks(TaskSet),
    Jobs(JobSet),
}

impl LoadedWorkload {
    pub fn as_workload(&self) -> Workload<'_> {
        match self {
            LoadedWorkload::Tasks(ts) => Workload::Periodic(ts),
            LoadedWorkload::Jobs(js) => Workload::Jobs(js),
        }
    }
}

/// A parsed document with its priority directive applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedSet {
    pub document: TaskSetDocument,
    /// Ids in resolved priority order.
    pub order: Vec<String>,
    pub workload: LoadedWorkload,
    /// Lower execution bound per priority level (defaults to 1).
    pub e_min: Vec<Time>,
}

fn json_error(err: serde_json::Error) -> DocumentError {
    let (line, column, message) = (err.line(), err.column(), err.to_string());
    match err.classify() {
        Category::Data if message.contains("unknown field") => DocumentError::UnknownField {
            line,
            column,
            message,
        },
        _ => DocumentError::Syntax {
            line,
            column,
            message,
        },
    }
}

/// Stable priority order over `n` entries.
fn resolve_order(
    directive: Option<&PriorityDirective>,
    ids: &[&str],
    key: impl Fn(usize, PriorityRule) -> Result<Time, DocumentError>,
) -> Result<Vec<usize>, DocumentError> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    match directive {
        None => {}
        Some(PriorityDirective::Rule(rule)) => {
            let keys = order
                .iter()
                .map(|&i| key(i, *rule))
                .collect::<Result<Vec<_>, _>>()?;
            order.sort_by_key(|&i| keys[i]);
        }
        Some(PriorityDirective::Explicit(list)) => {
            let mut sorted: Vec<&str> = list.iter().map(String::as_str).collect();
            sorted.sort_unstable();
            let mut declared = ids.to_vec();
            declared.sort_unstable();
            if sorted != declared {
                return Err(DocumentError::Priority(
                    "explicit order must list every id exactly once".into(),
                ));
            }
            order = list
                .iter()
                .map(|id| ids.iter().position(|x| x == id).unwrap())
                .collect();
        }
    }
    Ok(order)
}

/// Parses and validates a task-set document.
pub fn parse_task_set(text: &str) -> Result<LoadedSet, DocumentError> {
    let document: TaskSetDocument = serde_json::from_str(text).map_err(json_error)?;
    load(document)
}

/// Validates an already deserialized document.
pub fn load(document: TaskSetDocument) -> Result<LoadedSet, DocumentError> {
    if document.version != DOCUMENT_VERSION {
        return Err(DocumentError::Syntax {
            line: 1,
            column: 1,
            message: format!(
                "unsupported version {} (expected {DOCUMENT_VERSION})",
                document.version
            ),
        });
    }
    let platform = Platform::new(document.platform.m);
    let has_tasks = !document.tasks.is_empty();
    let has_jobs = !document.jobs.is_empty();
    if has_tasks == has_jobs {
        let kind = if has_tasks {
            ViolationKind::MixedWorkload
        } else {
            ViolationKind::Empty
        };
        return Err(ValidationError {
            violations: vec![Violation {
                subject: None,
                kind,
            }],
        }
        .into());
    }
    let (workload, order) = if has_tasks {
        let ids: Vec<&str> = document.tasks.iter().map(|t| t.id.as_str()).collect();
        let order = resolve_order(document.priority.as_ref(), &ids, |i, rule| {
            let t = &document.tasks[i];
            Ok(match rule {
                PriorityRule::Rm => t.period,
                PriorityRule::Dm => t.deadline,
                PriorityRule::PmSort => Time::from(t.v),
            })
        })?;
        let tasks = order
            .iter()
            .map(|&i| {
                let t = &document.tasks[i];
                Task::new(t.id.clone(), t.offset, t.v, t.wcet, t.deadline, t.period)
            })
            .collect();
        (LoadedWorkload::Tasks(TaskSet::new(tasks, platform)?), order)
    } else {
        let ids: Vec<&str> = document.jobs.iter().map(|j| j.id.as_str()).collect();
        let order = resolve_order(document.priority.as_ref(), &ids, |i, rule| {
            let j = &document.jobs[i];
            match rule {
                PriorityRule::Rm => {
                    Err(DocumentError::Priority("`rm` needs periodic tasks".into()))
                }
                PriorityRule::Dm => Ok(j.d.saturating_sub(j.r)),
                PriorityRule::PmSort => Ok(Time::from(j.v)),
            }
        })?;
        let jobs = order
            .iter()
            .map(|&i| {
                let j = &document.jobs[i];
                JobSpec::new(j.id.clone(), j.r, j.v, j.e, j.d)
            })
            .collect();
        (LoadedWorkload::Jobs(JobSet::new(jobs, platform)?), order)
    };
    let order: Vec<String> = {
        let ids: Vec<&str> = if has_tasks {
            document.tasks.iter().map(|t| t.id.as_str()).collect()
        } else {
            document.jobs.iter().map(|j| j.id.as_str()).collect()
        };
        order.iter().map(|&i| ids[i].to_string()).collect()
    };
    for id in document.exec_bounds.keys() {
        if !order.contains(id) {
            return Err(ProfileError::Unknown(id.clone()).into());
        }
    }
    let e_min = order
        .iter()
        .map(|id| document.exec_bounds.get(id).copied().unwrap_or(1).max(1))
        .collect();
    Ok(LoadedSet {
        document,
        order,
        workload,
        e_min,
    })
}

pub fn serialize_task_set(document: &TaskSetDocument) -> String {
    let mut s = serde_json::to_string_pretty(document).expect("document serializes");
    s.push('\n');
    s
}

/// Execution-time overrides for `simulate`:
///
/// ```json
/// { "version": 1, "tasks": { "T1": 1 }, "jobs": [ { "id": "T2", "k": 3, "e": 2 } ] }
/// ```
///
/// `tasks` applies to every job of a task (or to the job of that id in a job
/// set); `jobs` targets single instances and wins over `tasks`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub version: u32,
    #[serde(default)]
    pub tasks: BTreeMap<String, Time>,
    #[serde(default)]
    pub jobs: Vec<ProfileJobEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileJobEntry {
    pub id: String,
    #[serde(default = "first_instance")]
    pub k: u64,
    pub e: Time,
}

fn first_instance() -> u64 {
    1
}

pub fn parse_profile(
    text: &str,
    workload: Workload<'_>,
) -> Result<ExecutionProfile, DocumentError> {
    let doc: ProfileDocument = serde_json::from_str(text).map_err(json_error)?;
    let mut profile = ExecutionProfile::worst_case();
    let level = |id: &str| {
        workload
            .level_of(id)
            .ok_or_else(|| ProfileError::Unknown(id.to_string()))
    };
    for (id, &e) in &doc.tasks {
        profile.set_task(level(id)?, e)?;
    }
    for j in &doc.jobs {
        profile.set_job(JobKey::new(level(&j.id)?, j.k), j.e)?;
    }
    Ok(profile)
}
