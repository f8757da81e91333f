//! Task, job and platform model.
//!
//! Tasks are periodic rigid gang tasks `(O, v, C, D, T)`: every job of a task
//! needs exactly `v` processors at once for `C` quanta inside `[r, r + D)`.
//! A [`TaskSet`] is kept in priority order (index 0 is the highest priority),
//! which makes every task set a fixed-task-priority assignment.
//!
//! Finite job sets ([`JobSet`]) share the same machinery: each job behaves
//! like a one-shot task whose priority is its position in the set.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{ProfileError, ValidationError, Violation, ViolationKind};

/// Discrete time, in quanta.
pub type Time = u64;

/// `m` identical processors, indexed `0..m` internally and `π1..πm` when printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Platform {
    pub m: u32,
}

impl Platform {
    pub fn new(m: u32) -> Self {
        Platform { m }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub offset: Time,
    pub width: u32,
    pub wcet: Time,
    pub deadline: Time,
    pub period: Time,
}

impl Task {
    pub fn new(
        id: impl Into<String>,
        offset: Time,
        width: u32,
        wcet: Time,
        deadline: Time,
        period: Time,
    ) -> Self {
        Task {
            id: id.into(),
            offset,
            width,
            wcet,
            deadline,
            period,
        }
    }

    /// Release time of the `k`-th job (`k ≥ 1`).
    pub fn release_of(&self, k: u64) -> Time {
        self.offset + (k - 1) * self.period
    }

    /// Absolute deadline of the `k`-th job.
    pub fn deadline_of(&self, k: u64) -> Time {
        self.release_of(k) + self.deadline
    }
}

/// A validated set of tasks in decreasing priority order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet {
    tasks: Vec<Task>,
    platform: Platform,
}

impl TaskSet {
    /// Validates and builds a task set; tasks are taken in priority order.
    pub fn new(tasks: Vec<Task>, platform: Platform) -> Result<Self, ValidationError> {
        validate_task_set(TaskSet { tasks, platform })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn platform(&self) -> Platform {
        self.platform
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn task(&self, index: usize) -> &Task {
        &self.tasks[index]
    }

    /// The first `n` tasks, i.e. the `n` highest-priority tasks.
    pub fn prefix(&self, n: usize) -> TaskSet {
        TaskSet {
            tasks: self.tasks[..n].to_vec(),
            platform: self.platform,
        }
    }

    /// Same tasks, permuted: `order[i]` is the current index of the task that
    /// becomes priority `i`.
    pub fn reordered(&self, order: &[usize]) -> TaskSet {
        TaskSet {
            tasks: order.iter().map(|&i| self.tasks[i].clone()).collect(),
            platform: self.platform,
        }
    }

    /// Parallelism monotonic order: stable sort by non-decreasing width.
    /// Every job released in `[0, horizon)` as a finite job set, in fixed
    /// task priority order (task first, then instance).
    pub fn unroll(&self, horizon: Time) -> JobSet {
        let mut jobs = Vec::new();
        for t in &self.tasks {
            let mut k = 1;
            while t.release_of(k) < horizon {
                jobs.push(JobSpec::new(
                    job_label(&t.id, k),
                    t.release_of(k),
                    t.width,
                    t.wcet,
                    t.deadline_of(k),
                ));
                k += 1;
            }
        }
        JobSet {
            jobs,
            platform: self.platform,
        }
    }

    pub fn parallelism_monotonic(&self) -> TaskSet {
        let mut order: Vec<usize> = (0..self.tasks.len()).collect();
        order.sort_by_key(|&i| self.tasks[i].width);
        self.reordered(&order)
    }
}

/// Checks every task and set invariant, collecting all violations.
pub fn validate_task_set(ts: TaskSet) -> Result<TaskSet, ValidationError> {
    let mut violations = Vec::new();
    let m = ts.platform.m;
    if m == 0 {
        violations.push(Violation {
            subject: None,
            kind: ViolationKind::NonPositiveField("m"),
        });
    }
    if ts.tasks.is_empty() {
        violations.push(Violation {
            subject: None,
            kind: ViolationKind::Empty,
        });
    }
    let mut seen = HashSet::new();
    for task in &ts.tasks {
        let mut push = |kind| {
            violations.push(Violation {
                subject: Some(task.id.clone()),
                kind,
            })
        };
        if !seen.insert(task.id.as_str()) {
            push(ViolationKind::DuplicateId);
        }
        if task.width == 0 {
            push(ViolationKind::NonPositiveField("v"));
        }
        if task.wcet == 0 {
            push(ViolationKind::NonPositiveField("C"));
        }
        if task.deadline == 0 {
            push(ViolationKind::NonPositiveField("D"));
        }
        if task.period == 0 {
            push(ViolationKind::NonPositiveField("T"));
        }
        if task.deadline > task.period {
            push(ViolationKind::DeadlineExceedsPeriod {
                deadline: task.deadline,
                period: task.period,
            });
        }
        if m > 0 && task.width > m {
            push(ViolationKind::WidthExceedsPlatform {
                width: task.width,
                m,
            });
        }
        if task.wcet > task.deadline {
            push(ViolationKind::ExecutionExceedsDeadline {
                wcet: task.wcet,
                window: task.deadline,
            });
        }
    }
    if violations.is_empty() {
        Ok(ts)
    } else {
        Err(ValidationError { violations })
    }
}

/// `i < j ⇒ v_i ≤ v_j`.
pub fn is_parallelism_monotonic(ts: &TaskSet) -> bool {
    ts.tasks.windows(2).all(|w| w[0].width <= w[1].width)
}

/// Identity of a job: the priority index of its task and its instance number.
///
/// The derived ordering is the fixed job priority: lower task index first,
/// then earlier instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JobKey {
    pub task: usize,
    pub k: u64,
}

impl JobKey {
    pub fn new(task: usize, k: u64) -> Self {
        JobKey { task, k }
    }
}

/// One released job `(r, v, e, d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub key: JobKey,
    pub release: Time,
    pub width: u32,
    pub wcet: Time,
    pub deadline: Time,
}

impl Job {
    pub fn of_task(ts: &TaskSet, task: usize, k: u64) -> Job {
        let t = &ts.tasks[task];
        Job {
            key: JobKey::new(task, k),
            release: t.release_of(k),
            width: t.width,
            wcet: t.wcet,
            deadline: t.deadline_of(k),
        }
    }
}

/// All jobs released strictly before `horizon`, in priority order.
pub fn generate_jobs(ts: &TaskSet, horizon: Time) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (i, task) in ts.tasks.iter().enumerate() {
        let mut k = 1;
        while task.release_of(k) < horizon {
            jobs.push(Job::of_task(ts, i, k));
            k += 1;
        }
    }
    jobs
}

/// A job of a finite job set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    pub id: String,
    pub release: Time,
    pub width: u32,
    pub wcet: Time,
    pub deadline: Time,
}

impl JobSpec {
    pub fn new(
        id: impl Into<String>,
        release: Time,
        width: u32,
        wcet: Time,
        deadline: Time,
    ) -> Self {
        JobSpec {
            id: id.into(),
            release,
            width,
            wcet,
            deadline,
        }
    }
}

/// A finite, validated set of jobs in decreasing priority order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSet {
    jobs: Vec<JobSpec>,
    platform: Platform,
}

impl JobSet {
    pub fn new(jobs: Vec<JobSpec>, platform: Platform) -> Result<Self, ValidationError> {
        let mut violations = Vec::new();
        if platform.m == 0 {
            violations.push(Violation {
                subject: None,
                kind: ViolationKind::NonPositiveField("m"),
            });
        }
        if jobs.is_empty() {
            violations.push(Violation {
                subject: None,
                kind: ViolationKind::Empty,
            });
        }
        let mut seen = HashSet::new();
        for job in &jobs {
            let mut push = |kind| {
                violations.push(Violation {
                    subject: Some(job.id.clone()),
                    kind,
                })
            };
            if !seen.insert(job.id.as_str()) {
                push(ViolationKind::DuplicateId);
            }
            if job.width == 0 {
                push(ViolationKind::NonPositiveField("v"));
            }
            if job.wcet == 0 {
                push(ViolationKind::NonPositiveField("e"));
            }
            if platform.m > 0 && job.width > platform.m {
                push(ViolationKind::WidthExceedsPlatform {
                    width: job.width,
                    m: platform.m,
                });
            }
            let window = job.deadline.saturating_sub(job.release);
            if job.wcet > window {
                push(ViolationKind::ExecutionExceedsDeadline {
                    wcet: job.wcet,
                    window,
                });
            }
        }
        if violations.is_empty() {
            Ok(JobSet { jobs, platform })
        } else {
            Err(ValidationError { violations })
        }
    }

    pub fn jobs(&self) -> &[JobSpec] {
        &self.jobs
    }

    pub fn platform(&self) -> Platform {
        self.platform
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    /// The `n` highest-priority jobs.
    pub fn prefix(&self, n: usize) -> JobSet {
        JobSet {
            jobs: self.jobs[..n].to_vec(),
            platform: self.platform,
        }
    }

    pub fn job(&self, index: usize) -> Job {
        let j = &self.jobs[index];
        Job {
            key: JobKey::new(index, 1),
            release: j.release,
            width: j.width,
            wcet: j.wcet,
            deadline: j.deadline,
        }
    }

    /// Sum of worst-case executions plus the latest release: no simulation of
    /// this set under any policy in this crate runs past it.
    pub fn drain_bound(&self) -> Time {
        let last = self.jobs.iter().map(|j| j.release).max().unwrap_or(0);
        last + self.jobs.iter().map(|j| j.wcet).sum::<Time>()
    }
}

/// What the simulator runs: an infinite periodic task set or a finite job set.
#[derive(Debug, Clone, Copy)]
pub enum Workload<'a> {
    Periodic(&'a TaskSet),
    Jobs(&'a JobSet),
}

impl<'a> Workload<'a> {
    pub fn platform(&self) -> Platform {
        match self {
            Workload::Periodic(ts) => ts.platform(),
            Workload::Jobs(js) => js.platform(),
        }
    }

    /// Number of priority levels (tasks, or jobs for a job set).
    pub fn levels(&self) -> usize {
        match self {
            Workload::Periodic(ts) => ts.len(),
            Workload::Jobs(js) => js.len(),
        }
    }

    pub fn level_id(&self, level: usize) -> &'a str {
        match self {
            Workload::Periodic(ts) => &ts.tasks[level].id,
            Workload::Jobs(js) => &js.jobs[level].id,
        }
    }

    pub fn level_of(&self, id: &str) -> Option<usize> {
        (0..self.levels()).find(|&i| self.level_id(i) == id)
    }

    pub fn job(&self, key: JobKey) -> Job {
        match self {
            Workload::Periodic(ts) => Job::of_task(ts, key.task, key.k),
            Workload::Jobs(js) => js.job(key.task),
        }
    }

    /// Printable job name: the task id for a first instance, `id#k` after.
    pub fn label(&self, key: JobKey) -> String {
        job_label(self.level_id(key.task), key.k)
    }
}

pub fn job_label(id: &str, k: u64) -> String {
    if k == 1 {
        id.to_string()
    } else {
        format!("{id}#{k}")
    }
}

/// Actual execution time of each job, `1 ≤ e ≤ e_wc`. Jobs not mentioned run
/// for their worst case.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionProfile {
    per_job: BTreeMap<JobKey, Time>,
    per_task: BTreeMap<usize, Time>,
}

impl ExecutionProfile {
    pub fn worst_case() -> Self {
        Self::default()
    }

    pub fn is_worst_case(&self) -> bool {
        self.per_job.is_empty() && self.per_task.is_empty()
    }

    /// Sets the execution time of one job.
    pub fn set_job(&mut self, key: JobKey, e: Time) -> Result<(), ProfileError> {
        if e == 0 {
            return Err(ProfileError::Zero);
        }
        self.per_job.insert(key, e);
        Ok(())
    }

    /// Sets the execution time of every job of a task not otherwise overridden.
    pub fn set_task(&mut self, task: usize, e: Time) -> Result<(), ProfileError> {
        if e == 0 {
            return Err(ProfileError::Zero);
        }
        self.per_task.insert(task, e);
        Ok(())
    }

    pub fn with_job(mut self, key: JobKey, e: Time) -> Result<Self, ProfileError> {
        self.set_job(key, e)?;
        Ok(self)
    }

    /// One execution time per job of a job set, in priority order.
    pub fn for_job_set(executions: &[Time]) -> Result<Self, ProfileError> {
        let mut p = Self::default();
        for (i, &e) in executions.iter().enumerate() {
            p.set_job(JobKey::new(i, 1), e)?;
        }
        Ok(p)
    }

    /// Execution time the job will actually consume.
    pub fn execution(
        &self,
        job: &Job,
        label: impl FnOnce() -> String,
    ) -> Result<Time, ProfileError> {
        let e = self
            .per_job
            .get(&job.key)
            .or_else(|| self.per_task.get(&job.key.task))
            .copied()
            .unwrap_or(job.wcet);
        if e > job.wcet {
            return Err(ProfileError::ExceedsWorstCase {
                job: label(),
                actual: e,
                wcet: job.wcet,
            });
        }
        Ok(e)
    }
}
