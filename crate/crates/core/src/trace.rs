//! Schedule traces `σ(t)` and processor availability.

use serde::{Deserialize, Serialize};

use crate::model::{JobKey, Time};

/// What one processor does during one quantum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Idle,
    /// A job executing on its own (outer) placement.
    Run(JobKey),
    /// Held idle for a job that finished early.
    Reserved(JobKey),
    /// Part of the slack server left by `owner`, optionally running `served`.
    Server {
        owner: JobKey,
        served: Option<JobKey>,
    },
}

impl Cell {
    /// The job actually executing here, i.e. the entry of `σ(t)`.
    pub fn executing(&self) -> Option<JobKey> {
        match *self {
            Cell::Run(j) => Some(j),
            Cell::Server { served, .. } => served,
            Cell::Idle | Cell::Reserved(_) => None,
        }
    }

    /// The entity holding the processor in the outer schedule.
    pub fn holder(&self) -> Option<JobKey> {
        match *self {
            Cell::Idle => None,
            Cell::Run(j) | Cell::Reserved(j) => Some(j),
            Cell::Server { owner, .. } => Some(owner),
        }
    }

    pub fn is_idle(&self) -> bool {
        matches!(self, Cell::Idle)
    }
}

/// `A(J, t)`: indices of processors not held by anything.
///
/// Reserved and server processors count as busy even when nothing executes.
pub fn availability(slot: &[Cell]) -> Vec<usize> {
    slot.iter()
        .enumerate()
        .filter(|(_, c)| c.is_idle())
        .map(|(i, _)| i)
        .collect()
}

/// `A_i`: the free-processor count if it is enough for a job of `width`, else 0.
pub fn level_availability(available: u32, width: u32) -> u32 {
    if available >= width {
        available
    } else {
        0
    }
}

/// `Â_1 … Â_n` for jobs of the given widths placed in priority order at one
/// instant with `m` processors initially free (`Â_0 = m`).
pub fn limited_level_availabilities(m: u32, widths: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(widths.len());
    let mut free = m;
    let mut prev = m;
    for &w in widths {
        let a = if prev == 0 {
            0
        } else {
            level_availability(free, w)
        };
        if a != 0 {
            free -= w;
        }
        out.push(a);
        prev = a;
    }
    out
}

/// `Â_i` for the `i`-th job (1-based); `i = 0` gives `m`.
pub fn limited_level_availability(m: u32, widths: &[u32], i: usize) -> u32 {
    if i == 0 {
        m
    } else {
        limited_level_availabilities(m, &widths[..i])[i - 1]
    }
}

/// Per-job summary kept alongside the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub key: JobKey,
    pub label: String,
    pub release: Time,
    pub deadline: Time,
    pub width: u32,
    pub wcet: Time,
    /// Execution time drawn from the profile.
    pub actual: Time,
    /// First quantum the job held processors in the outer schedule.
    pub start: Option<Time>,
    /// Instant its execution completed.
    pub completion: Option<Time>,
    /// Instant it stopped holding processors, including any reservation or
    /// slack server it left behind.
    pub finish: Option<Time>,
    /// Quanta executed inside other jobs' slack servers.
    pub inner_service: Time,
    pub missed: bool,
}

/// Interval during which a reservation or a slack server held processors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldSpan {
    pub owner: JobKey,
    pub server: bool,
    pub width: u32,
    pub length: Time,
    pub created: Time,
    pub first_run: Option<Time>,
    pub end: Option<Time>,
}

/// `σ(t)` for `t ∈ [0, len)`, with the jobs it mentions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub m: u32,
    /// Identifier of each priority level (task or job id).
    pub levels: Vec<String>,
    pub slots: Vec<Vec<Cell>>,
    pub jobs: Vec<JobRecord>,
    pub holds: Vec<HoldSpan>,
}

impl ScheduleTrace {
    pub fn new(m: u32, levels: Vec<String>) -> Self {
        ScheduleTrace {
            m,
            levels,
            slots: Vec::new(),
            jobs: Vec::new(),
            holds: Vec::new(),
        }
    }

    pub fn len(&self) -> Time {
        self.slots.len() as Time
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot(&self, t: Time) -> &[Cell] {
        &self.slots[t as usize]
    }

    pub fn job(&self, key: JobKey) -> Option<&JobRecord> {
        self.jobs.iter().find(|j| j.key == key)
    }

    pub fn label(&self, key: JobKey) -> String {
        crate::model::job_label(&self.levels[key.task], key.k)
    }

    /// `σ(t)` as executing jobs.
    pub fn sigma(&self, t: Time) -> Vec<Option<JobKey>> {
        self.slot(t).iter().map(Cell::executing).collect()
    }

    /// Outer holder of each processor at `t`.
    pub fn holders(&self, t: Time) -> Vec<Option<JobKey>> {
        self.slot(t).iter().map(Cell::holder).collect()
    }

    /// Quanta during which `key` executes (outer or inside a server).
    pub fn executing_at(&self, key: JobKey) -> Vec<Time> {
        (0..self.len())
            .filter(|&t| self.slot(t).iter().any(|c| c.executing() == Some(key)))
            .collect()
    }

    /// Quanta during which `key` holds processors in the outer schedule.
    pub fn held_at(&self, key: JobKey) -> Vec<Time> {
        (0..self.len())
            .filter(|&t| self.slot(t).iter().any(|c| c.holder() == Some(key)))
            .collect()
    }

    /// Processor-quanta in which `key` executes.
    pub fn occupancy(&self, key: JobKey) -> u64 {
        self.slots
            .iter()
            .flatten()
            .filter(|c| c.executing() == Some(key))
            .count() as u64
    }

    /// `σ(t)` rendered with job labels, `None` for idle.
    pub fn sigma_labels(&self) -> Vec<Vec<Option<String>>> {
        self.slots
            .iter()
            .map(|slot| {
                slot.iter()
                    .map(|c| c.executing().map(|k| self.label(k)))
                    .collect()
            })
            .collect()
    }
}

/// Outcome of reading `S` and `F` of a job off a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartFinish {
    Done {
        start: Time,
        finish: Time,
    },
    /// Started but still holding processors at the end of the trace.
    Unfinished {
        start: Time,
    },
    NeverStarted,
}

/// `S(J)` and `F(J)` of one job. `F` includes any reservation or slack server
/// the job left behind.
pub fn start_finish_times(trace: &ScheduleTrace, key: JobKey) -> StartFinish {
    match trace.job(key) {
        Some(JobRecord {
            start: Some(s),
            finish: Some(f),
            ..
        }) => StartFinish::Done {
            start: *s,
            finish: *f,
        },
        Some(JobRecord { start: Some(s), .. }) => StartFinish::Unfinished { start: *s },
        _ => StartFinish::NeverStarted,
    }
}
