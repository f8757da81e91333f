//! Quantum-stepped simulation.
//!
//! Each quantum `t` the engine
//! 1. flags deadline misses (`d = t` with work left) and releases jobs with `r = t`;
//! 2. collects the competing entities (unfinished jobs, idle reservations,
//!    slack servers) in priority order and lets the dispatch rule place them;
//! 3. lets every dispatched slack server serve ready jobs on its processors;
//! 4. charges one quantum to every executing job and holder, turning jobs that
//!    ran out of work into reservations or servers per the completion rule;
//! 5. appends `σ(t)`.
//!
//! The engine is deterministic: equal inputs give identical traces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::model::{ExecutionProfile, Job, JobKey, Time, Workload};
use crate::sched::{
    idling_on_early_completion, slack_server_dispatch, spawn_slack_server, Candidate,
    CompletionRule, IdleReservation, Placement, Policy, SlackServer,
};
use crate::trace::{Cell, HoldSpan, JobRecord, ScheduleTrace};

/// Default upper bound on simulated horizons.
pub const DEFAULT_HORIZON_CAP: Time = 10_000_000;

/// Environment variable overriding [`DEFAULT_HORIZON_CAP`].
pub const HORIZON_CAP_ENV: &str = "GANGSCHED_HORIZON_CAP";

/// The horizon cap, honouring [`HORIZON_CAP_ENV`] when it parses.
pub fn horizon_cap_from_env() -> Time {
    std::env::var(HORIZON_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_HORIZON_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub horizon: Time,
    pub horizon_cap: Time,
    pub stop_at_first_miss: bool,
}

impl SimConfig {
    pub fn new(horizon: Time) -> Self {
        SimConfig {
            horizon,
            horizon_cap: DEFAULT_HORIZON_CAP,
            stop_at_first_miss: false,
        }
    }

    pub fn stop_at_first_miss(mut self, stop: bool) -> Self {
        self.stop_at_first_miss = stop;
        self
    }

    pub fn horizon_cap(mut self, cap: Time) -> Self {
        self.horizon_cap = cap;
        self
    }
}

/// A released job that still has work left.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveJob {
    pub key: JobKey,
    pub release: Time,
    pub deadline: Time,
    pub width: u32,
    pub wcet: Time,
    /// Execution still owed, from the profile.
    pub remaining: Time,
    /// Quanta executed on its own processors.
    pub outer_service: Time,
    pub missed: bool,
}

/// Everything the future of a simulation depends on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimState {
    pub t: Time,
    pub jobs: BTreeMap<JobKey, ActiveJob>,
    pub reservations: BTreeMap<JobKey, IdleReservation>,
    pub servers: BTreeMap<JobKey, SlackServer>,
    /// Next instance number to release, per priority level.
    pub next_k: Vec<u64>,
    /// Release instant of each job still holding anything, for phases.
    releases: BTreeMap<JobKey, Time>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Release {
        t: Time,
        job: JobKey,
    },
    /// First quantum holding processors in the outer schedule.
    Start {
        t: Time,
        job: JobKey,
    },
    Completion {
        t: Time,
        job: JobKey,
    },
    DeadlineMiss {
        t: Time,
        job: JobKey,
        remaining: Time,
    },
    /// Held processors at `t − 1`, still pending, none at `t`.
    Preemption {
        t: Time,
        job: JobKey,
    },
    /// `running` holds processors while the higher-priority `waiting` does not.
    PriorityInversion {
        t: Time,
        running: JobKey,
        waiting: JobKey,
    },
    ReservationStart {
        t: Time,
        owner: JobKey,
        width: u32,
        length: Time,
    },
    ReservationEnd {
        t: Time,
        owner: JobKey,
    },
    ServerStart {
        t: Time,
        level: JobKey,
        width: u32,
        length: Time,
    },
    ServerEnd {
        t: Time,
        level: JobKey,
    },
}

pub struct SimOutcome {
    pub trace: ScheduleTrace,
    pub state: SimState,
    pub events: Vec<Event>,
}

impl SimOutcome {
    pub fn misses(&self) -> impl Iterator<Item = (Time, JobKey)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            Event::DeadlineMiss { t, job, .. } => Some((t, job)),
            _ => None,
        })
    }

    pub fn first_miss(&self) -> Option<(Time, JobKey)> {
        self.misses().next()
    }
}

/// Runs the workload for `config.horizon` quanta (or until the first miss
/// when asked to stop there).
pub fn simulate(
    workload: Workload<'_>,
    policy: Policy,
    profile: &ExecutionProfile,
    config: SimConfig,
) -> Result<SimOutcome, SimError> {
    if config.horizon > config.horizon_cap {
        return Err(SimError::HorizonOverflow {
            requested: config.horizon,
            cap: config.horizon_cap,
        });
    }
    let mut sim = Simulator::new(workload, policy, profile)?;
    while sim.now() < config.horizon {
        if config.stop_at_first_miss && sim.has_missed() {
            break;
        }
        sim.step()?;
    }
    Ok(sim.finish())
}

/// Runs a finite job set until every job and holder is gone.
pub fn simulate_to_completion(
    workload: Workload<'_>,
    policy: Policy,
    profile: &ExecutionProfile,
) -> Result<SimOutcome, SimError> {
    let mut sim = Simulator::new(workload, policy, profile)?;
    while !sim.is_drained() {
        sim.step()?;
    }
    Ok(sim.finish())
}

/// Step-by-step simulator. Between steps the state sits at the start of
/// quantum `now()`, with that instant's releases and deadline checks done.
pub struct Simulator<'a> {
    workload: Workload<'a>,
    policy: Policy,
    profile: &'a ExecutionProfile,
    state: SimState,
    trace: ScheduleTrace,
    record_index: BTreeMap<JobKey, usize>,
    hold_index: BTreeMap<JobKey, usize>,
    events: Vec<Event>,
    prev_holders: BTreeSet<JobKey>,
    missed: bool,
}

impl<'a> Simulator<'a> {
    pub fn new(
        workload: Workload<'a>,
        policy: Policy,
        profile: &'a ExecutionProfile,
    ) -> Result<Self, SimError> {
        let levels = workload.levels();
        let trace = ScheduleTrace::new(
            workload.platform().m,
            (0..levels)
                .map(|i| workload.level_id(i).to_string())
                .collect(),
        );
        let mut sim = Simulator {
            workload,
            policy,
            profile,
            state: SimState {
                t: 0,
                jobs: BTreeMap::new(),
                reservations: BTreeMap::new(),
                servers: BTreeMap::new(),
                next_k: vec![1; levels],
                releases: BTreeMap::new(),
            },
            trace,
            record_index: BTreeMap::new(),
            hold_index: BTreeMap::new(),
            events: Vec::new(),
            prev_holders: BTreeSet::new(),
            missed: false,
        };
        sim.admit()?;
        Ok(sim)
    }

    pub fn now(&self) -> Time {
        self.state.t
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn trace(&self) -> &ScheduleTrace {
        &self.trace
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn has_missed(&self) -> bool {
        self.missed
    }

    pub fn digest(&self) -> StateDigest {
        state_digest(self.workload, &self.state)
    }

    /// No pending work, no holders and no future releases.
    pub fn is_drained(&self) -> bool {
        let st = &self.state;
        st.jobs.is_empty()
            && st.reservations.is_empty()
            && st.servers.is_empty()
            && (0..self.workload.levels()).all(|l| self.release_time(l, st.next_k[l]).is_none())
    }

    pub fn finish(self) -> SimOutcome {
        SimOutcome {
            trace: self.trace,
            state: self.state,
            events: self.events,
        }
    }

    fn release_time(&self, level: usize, k: u64) -> Option<Time> {
        match self.workload {
            Workload::Periodic(ts) => Some(ts.task(level).release_of(k)),
            Workload::Jobs(js) => (k == 1).then(|| js.jobs()[level].release),
        }
    }

    /// Deadline checks and releases for the current instant.
    fn admit(&mut self) -> Result<(), SimError> {
        let t = self.state.t;
        for job in self.state.jobs.values_mut() {
            if job.deadline == t && job.remaining > 0 && !job.missed {
                job.missed = true;
                self.missed = true;
                self.events.push(Event::DeadlineMiss {
                    t,
                    job: job.key,
                    remaining: job.remaining,
                });
                if let Some(&i) = self.record_index.get(&job.key) {
                    self.trace.jobs[i].missed = true;
                }
            }
        }
        for level in 0..self.workload.levels() {
            let k = self.state.next_k[level];
            if self.release_time(level, k) != Some(t) {
                continue;
            }
            self.state.next_k[level] = k + 1;
            let key = JobKey::new(level, k);
            let job: Job = self.workload.job(key);
            let label = self.workload.label(key);
            let actual = self.profile.execution(&job, || label.clone())?;
            self.state.jobs.insert(
                key,
                ActiveJob {
                    key,
                    release: job.release,
                    deadline: job.deadline,
                    width: job.width,
                    wcet: job.wcet,
                    remaining: actual,
                    outer_service: 0,
                    missed: false,
                },
            );
            self.state.releases.insert(key, t);
            self.record_index.insert(key, self.trace.jobs.len());
            self.trace.jobs.push(JobRecord {
                key,
                label,
                release: job.release,
                deadline: job.deadline,
                width: job.width,
                wcet: job.wcet,
                actual,
                start: None,
                completion: None,
                finish: None,
                inner_service: 0,
                missed: false,
            });
            self.events.push(Event::Release { t, job: key });
        }
        Ok(())
    }

    fn record(&mut self, key: JobKey) -> &mut JobRecord {
        let i = self.record_index[&key];
        &mut self.trace.jobs[i]
    }

    /// Executes quantum `now()` and advances to the next instant.
    pub fn step(&mut self) -> Result<(), SimError> {
        let t = self.state.t;
        let m = self.workload.platform().m;

        // outer competition, in priority order
        let mut outer: Vec<Candidate> = Vec::new();
        outer.extend(self.state.jobs.values().map(|j| Candidate {
            key: j.key,
            width: j.width,
        }));
        outer.extend(self.state.reservations.values().map(|r| Candidate {
            key: r.owner,
            width: r.width,
        }));
        outer.extend(self.state.servers.values().map(|s| Candidate {
            key: s.level,
            width: s.width,
        }));
        outer.sort_by_key(|c| c.key);
        let assignment = self.policy.dispatch.select(&outer, m);

        let mut slot = vec![Cell::Idle; m as usize];
        let held: BTreeSet<JobKey> = assignment.iter().map(|p| p.key).collect();

        // inner service by dispatched servers
        let mut inner: Vec<(JobKey, Placement)> = Vec::new();
        if !self.state.servers.is_empty() {
            let mut claimed = held.clone();
            for p in &assignment {
                let Some(server) = self.state.servers.get(&p.key) else {
                    continue;
                };
                let ready: Vec<Candidate> = self
                    .state
                    .jobs
                    .values()
                    .filter(|j| !claimed.contains(&j.key))
                    .map(|j| Candidate {
                        key: j.key,
                        width: j.width,
                    })
                    .collect();
                for served in slack_server_dispatch(server, &p.processors, &ready) {
                    claimed.insert(served.key);
                    inner.push((p.key, served));
                }
            }
        }

        for p in &assignment {
            let cell = if self.state.jobs.contains_key(&p.key) {
                Cell::Run(p.key)
            } else if self.state.reservations.contains_key(&p.key) {
                Cell::Reserved(p.key)
            } else {
                Cell::Server {
                    owner: p.key,
                    served: None,
                }
            };
            for &q in &p.processors {
                slot[q] = cell;
            }
        }
        for (owner, p) in &inner {
            for &q in &p.processors {
                slot[q] = Cell::Server {
                    owner: *owner,
                    served: Some(p.key),
                };
            }
        }

        self.note_outer_events(t, &outer, &held);

        // charge the quantum
        let mut completed: Vec<(JobKey, Vec<usize>)> = Vec::new();
        for p in &assignment {
            if let Some(job) = self.state.jobs.get_mut(&p.key) {
                job.remaining -= 1;
                job.outer_service += 1;
                if job.remaining == 0 {
                    completed.push((p.key, p.processors.clone()));
                }
            } else if let Some(r) = self.state.reservations.get_mut(&p.key) {
                r.residual -= 1;
                r.processors = p.processors.clone();
                let i = self.hold_index[&p.key];
                let span = &mut self.trace.holds[i];
                if span.first_run.is_none() {
                    span.first_run = Some(t);
                    let (owner, width, length) = (span.owner, span.width, span.length);
                    self.events.push(Event::ReservationStart {
                        t,
                        owner,
                        width,
                        length,
                    });
                }
            } else if let Some(s) = self.state.servers.get_mut(&p.key) {
                s.remaining -= 1;
                if s.first_run.is_none() {
                    s.first_run = Some(t);
                    let (level, width, length) = (s.level, s.width, s.length);
                    self.events.push(Event::ServerStart {
                        t,
                        level,
                        width,
                        length,
                    });
                    let i = self.hold_index[&level];
                    self.trace.holds[i].first_run = Some(t);
                }
            }
        }
        for (owner, p) in &inner {
            let job = self
                .state
                .jobs
                .get_mut(&p.key)
                .expect("served job is active");
            job.remaining -= 1;
            if job.remaining == 0 {
                completed.push((p.key, Vec::new()));
            }
            *self
                .state
                .servers
                .get_mut(owner)
                .unwrap()
                .served
                .entry(p.key)
                .or_insert(0) += 1;
            self.record(p.key).inner_service += 1;
        }

        self.trace.slots.push(slot);
        let end = t + 1;

        for (key, processors) in completed {
            self.complete(key, processors, end);
        }
        self.expire_holders(end);

        self.prev_holders = held;
        self.state.t = end;
        self.admit()
    }

    fn note_outer_events(&mut self, t: Time, outer: &[Candidate], held: &BTreeSet<JobKey>) {
        for c in outer {
            if held.contains(&c.key) {
                let rec = self.record(c.key);
                if rec.start.is_none() {
                    rec.start = Some(t);
                    self.events.push(Event::Start { t, job: c.key });
                }
            } else if self.prev_holders.contains(&c.key) {
                self.events.push(Event::Preemption { t, job: c.key });
            }
        }
        // inversion: a held entity below an unheld higher-priority job
        let waiting: Vec<JobKey> = outer
            .iter()
            .filter(|c| !held.contains(&c.key) && self.state.jobs.contains_key(&c.key))
            .map(|c| c.key)
            .collect();
        for &running in held {
            for &w in waiting.iter().take_while(|&&w| w < running) {
                self.events.push(Event::PriorityInversion {
                    t,
                    running,
                    waiting: w,
                });
            }
        }
    }

    fn complete(&mut self, key: JobKey, processors: Vec<usize>, end: Time) {
        let job = self
            .state
            .jobs
            .remove(&key)
            .expect("completed job is active");
        self.events.push(Event::Completion { t: end, job: key });
        self.record(key).completion = Some(end);
        let span = |server, width, length| HoldSpan {
            owner: key,
            server,
            width,
            length,
            created: end,
            first_run: None,
            end: None,
        };
        match self.policy.completion {
            CompletionRule::Release => {}
            CompletionRule::Idle => {
                if let Some(r) = idling_on_early_completion(
                    key,
                    job.width,
                    job.wcet,
                    job.outer_service,
                    processors,
                    end,
                ) {
                    self.hold_index.insert(key, self.trace.holds.len());
                    self.trace.holds.push(span(false, r.width, r.residual));
                    self.state.reservations.insert(key, r);
                    return;
                }
            }
            CompletionRule::SlackServer => {
                if let Some(s) =
                    spawn_slack_server(key, job.width, job.wcet, job.outer_service, end)
                {
                    self.hold_index.insert(key, self.trace.holds.len());
                    self.trace.holds.push(span(true, s.width, s.length));
                    self.state.servers.insert(key, s);
                    return;
                }
            }
        }
        self.record(key).finish = Some(end);
        self.state.releases.remove(&key);
    }

    fn expire_holders(&mut self, end: Time) {
        let done_r: Vec<JobKey> = self
            .state
            .reservations
            .values()
            .filter(|r| r.residual == 0)
            .map(|r| r.owner)
            .collect();
        for owner in done_r {
            self.state.reservations.remove(&owner);
            self.events.push(Event::ReservationEnd { t: end, owner });
            self.end_hold(owner, end);
        }
        let done_s: Vec<JobKey> = self
            .state
            .servers
            .values()
            .filter(|s| s.remaining == 0)
            .map(|s| s.level)
            .collect();
        for level in done_s {
            self.state.servers.remove(&level);
            self.events.push(Event::ServerEnd { t: end, level });
            self.end_hold(level, end);
        }
    }

    fn end_hold(&mut self, owner: JobKey, end: Time) {
        let i = self.hold_index.remove(&owner).expect("hold span recorded");
        self.trace.holds[i].end = Some(end);
        self.record(owner).finish = Some(end);
        self.state.releases.remove(&owner);
    }
}

/// One pending entity of a priority level in a [`StateDigest`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PendingDigest {
    Job {
        age: Time,
        remaining: Time,
        outer_service: Time,
    },
    Reservation {
        age: Time,
        residual: Time,
    },
    Server {
        age: Time,
        remaining: Time,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelDigest {
    /// Quanta until the level's next release, `None` when none will come.
    pub next_release_in: Option<Time>,
    pub pending: Vec<PendingDigest>,
}

/// `θ(t)`: the part of [`SimState`] the future depends on, with absolute time
/// factored out. Two simulations of the same workload whose digests are equal
/// at instants differing by a multiple of the hyperperiod behave identically
/// from there on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateDigest {
    pub levels: Vec<LevelDigest>,
}

pub fn state_digest(workload: Workload<'_>, state: &SimState) -> StateDigest {
    let t = state.t;
    let mut levels: Vec<LevelDigest> = (0..workload.levels())
        .map(|l| {
            let k = state.next_k[l];
            let next = match workload {
                Workload::Periodic(ts) => Some(ts.task(l).release_of(k)),
                Workload::Jobs(js) => (k == 1).then(|| js.jobs()[l].release),
            };
            LevelDigest {
                next_release_in: next.map(|r| r - t),
                pending: Vec::new(),
            }
        })
        .collect();
    let age = |key: &JobKey| t - state.releases[key];
    for j in state.jobs.values() {
        levels[j.key.task].pending.push(PendingDigest::Job {
            age: age(&j.key),
            remaining: j.remaining,
            outer_service: j.outer_service,
        });
    }
    for r in state.reservations.values() {
        levels[r.owner.task]
            .pending
            .push(PendingDigest::Reservation {
                age: age(&r.owner),
                residual: r.residual,
            });
    }
    for s in state.servers.values() {
        levels[s.level.task].pending.push(PendingDigest::Server {
            age: age(&s.level),
            remaining: s.remaining,
        });
    }
    for l in &mut levels {
        l.pending.sort_by_key(|p| match p {
            PendingDigest::Job { age, .. }
            | PendingDigest::Reservation { age, .. }
            | PendingDigest::Server { age, .. } => std::cmp::Reverse(*age),
        });
    }
    StateDigest { levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{nonpredictable_jobs, priority_inversion_set, slack_walkthrough_jobs};
    use crate::model::{JobSet, Platform, Task, TaskSet};

    fn key(task: usize) -> JobKey {
        JobKey::new(task, 1)
    }

    fn run(c: JobKey) -> Cell {
        Cell::Run(c)
    }

    fn worst_trace(ts: &TaskSet, policy: Policy, horizon: Time) -> SimOutcome {
        simulate(
            Workload::Periodic(ts),
            policy,
            &ExecutionProfile::worst_case(),
            SimConfig::new(horizon),
        )
        .unwrap()
    }

    #[test]
    fn inversion_set_golden_trace() {
        let ts = priority_inversion_set();
        let out = worst_trace(&ts, Policy::GANG_FJP, 5);
        let (t1, t2, t3) = (run(key(0)), run(key(1)), run(key(2)));
        assert_eq!(
            out.trace.slots,
            vec![
                vec![t1, t1, t3],
                vec![t1, t1, t3],
                vec![t2, t2, t3],
                vec![t2, t2, t3],
                vec![t2, t2, Cell::Idle],
            ]
        );
        assert_eq!(out.first_miss(), None);
        let inversions: Vec<Time> = out
            .events
            .iter()
            .filter_map(|e| match e {
                Event::PriorityInversion { t, .. } => Some(*t),
                _ => None,
            })
            .collect();
        assert_eq!(inversions, vec![0, 1]);
    }

    #[test]
    fn limited_gang_lets_narrow_task_miss() {
        let ts = priority_inversion_set();
        let out = worst_trace(&ts, Policy::LIMITED, 5);
        assert_eq!(out.first_miss(), Some((5, key(2))));
        assert_eq!(out.trace.slot(0), &[run(key(0)), run(key(0)), Cell::Idle]);
        assert!(!out
            .events
            .iter()
            .any(|e| matches!(e, Event::PriorityInversion { .. })));
    }

    #[test]
    fn digest_repeats_after_one_period() {
        let ts = priority_inversion_set();
        let profile = ExecutionProfile::worst_case();
        let mut sim = Simulator::new(Workload::Periodic(&ts), Policy::GANG_FJP, &profile).unwrap();
        let start = sim.digest();
        for _ in 0..5 {
            sim.step().unwrap();
        }
        assert_eq!(sim.digest(), start);
        assert_eq!(start.levels[0].next_release_in, Some(5));
        assert_eq!(
            start.levels[2].pending,
            vec![PendingDigest::Job {
                age: 0,
                remaining: 4,
                outer_service: 0
            }]
        );
    }

    #[test]
    fn nonpredictable_worst_and_early_cases() {
        let js = nonpredictable_jobs();
        let out = simulate_to_completion(
            Workload::Jobs(&js),
            Policy::GANG_FJP,
            &ExecutionProfile::worst_case(),
        )
        .unwrap();
        assert_eq!(out.trace.job(key(2)).unwrap().finish, Some(2));
        assert_eq!(out.first_miss(), None);
        let digest = state_digest(Workload::Jobs(&js), &out.state);
        assert!(digest
            .levels
            .iter()
            .all(|l| l.next_release_in.is_none() && l.pending.is_empty()));

        let early = ExecutionProfile::for_job_set(&[1, 1, 2]).unwrap();
        let out = simulate_to_completion(Workload::Jobs(&js), Policy::GANG_FJP, &early).unwrap();
        assert_eq!(out.trace.slot(1), &[run(key(1)), run(key(1))]);
        assert_eq!(out.trace.job(key(2)).unwrap().finish, Some(3));
        assert_eq!(out.first_miss(), Some((2, key(2))));
    }

    #[test]
    fn idling_keeps_the_worst_case_shape() {
        let js = nonpredictable_jobs();
        let early = ExecutionProfile::for_job_set(&[1, 1, 2]).unwrap();
        let out = simulate_to_completion(Workload::Jobs(&js), Policy::IDLING, &early).unwrap();
        assert_eq!(out.trace.slot(1), &[Cell::Reserved(key(0)), run(key(2))]);
        assert_eq!(out.trace.job(key(0)).unwrap().completion, Some(1));
        assert_eq!(out.trace.job(key(0)).unwrap().finish, Some(3));
        assert_eq!(out.first_miss(), None);
        assert!(out.events.contains(&Event::ReservationStart {
            t: 1,
            owner: key(0),
            width: 1,
            length: 2
        }));
    }

    #[test]
    fn slack_walkthrough_trace() {
        let js = slack_walkthrough_jobs();
        let wl = Workload::Jobs(&js);
        let worst = simulate_to_completion(
            wl,
            Policy::SLACK_RECLAIMING,
            &ExecutionProfile::worst_case(),
        )
        .unwrap();
        assert!(worst.trace.jobs.iter().all(|j| j.finish.unwrap() <= 6));
        assert!(worst.trace.holds.is_empty());

        let early = ExecutionProfile::for_job_set(&[1, 1, 2, 2, 2, 1]).unwrap();
        let out = simulate_to_completion(wl, Policy::SLACK_RECLAIMING, &early).unwrap();
        let server = |served| Cell::Server {
            owner: key(0),
            served,
        };
        assert_eq!(
            out.trace.slot(1),
            &[server(Some(key(3))), server(Some(key(5))), run(key(2))]
        );
        assert_eq!(
            out.trace.slot(2),
            &[server(Some(key(4))), server(Some(key(4))), run(key(3))]
        );
        assert_eq!(out.trace.slot(3), &[run(key(1)); 3]);
        assert_eq!(
            out.events
                .iter()
                .filter(|e| matches!(e, Event::ServerStart { .. }))
                .count(),
            4
        );
        assert!(out.events.contains(&Event::ServerStart {
            t: 1,
            level: key(0),
            width: 2,
            length: 2
        }));
        assert!(out.events.contains(&Event::ServerStart {
            t: 4,
            level: key(3),
            width: 1,
            length: 1
        }));
        assert!(out.events.contains(&Event::ServerStart {
            t: 5,
            level: key(4),
            width: 2,
            length: 1
        }));
        assert!(out.events.contains(&Event::ServerStart {
            t: 5,
            level: key(5),
            width: 1,
            length: 1
        }));
        for (a, b) in out.trace.jobs.iter().zip(&worst.trace.jobs) {
            assert_eq!((a.start, a.finish), (b.start, b.finish), "{}", a.label);
        }
    }

    #[test]
    fn missed_jobs_keep_running_unless_stopped() {
        let ts = TaskSet::new(
            vec![Task::new("A", 0, 2, 2, 2, 2), Task::new("B", 0, 1, 1, 1, 2)],
            Platform::new(2),
        )
        .unwrap();
        let out = worst_trace(&ts, Policy::GANG_FJP, 4);
        assert_eq!(out.first_miss(), Some((1, key(1))));
        assert_eq!(
            out.trace.slot(2),
            &[run(JobKey::new(0, 2)), run(JobKey::new(0, 2))]
        );
        assert_eq!(out.trace.len(), 4);
        let stopped = simulate(
            Workload::Periodic(&ts),
            Policy::GANG_FJP,
            &ExecutionProfile::worst_case(),
            SimConfig::new(4).stop_at_first_miss(true),
        )
        .unwrap();
        assert_eq!(stopped.trace.len(), 1);
    }

    #[test]
    fn horizon_cap_is_enforced() {
        let ts = priority_inversion_set();
        let err = simulate(
            Workload::Periodic(&ts),
            Policy::GANG_FJP,
            &ExecutionProfile::worst_case(),
            SimConfig::new(11).horizon_cap(10),
        )
        .err()
        .unwrap();
        assert_eq!(
            err,
            SimError::HorizonOverflow {
                requested: 11,
                cap: 10
            }
        );
    }

    #[test]
    fn profile_errors_surface_on_release() {
        let js = JobSet::new(
            vec![crate::model::JobSpec::new("J", 0, 1, 2, 3)],
            Platform::new(1),
        )
        .unwrap();
        let bad = ExecutionProfile::worst_case().with_job(key(0), 3).unwrap();
        assert!(matches!(
            simulate_to_completion(Workload::Jobs(&js), Policy::GANG_FJP, &bad),
            Err(SimError::Profile(_))
        ));
    }

    #[test]
    fn repeated_runs_agree() {
        let js = slack_walkthrough_jobs();
        let early = ExecutionProfile::for_job_set(&[1, 1, 1, 2, 1, 1]).unwrap();
        let a =
            simulate_to_completion(Workload::Jobs(&js), Policy::SLACK_RECLAIMING, &early).unwrap();
        let b =
            simulate_to_completion(Workload::Jobs(&js), Policy::SLACK_RECLAIMING, &early).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.events, b.events);
    }
}
