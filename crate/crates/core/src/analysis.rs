//! Exact schedulability test, periodicity check, predictability probe and
//! priority-inversion detection.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{
    simulate, simulate_to_completion, SimConfig, Simulator, StateDigest, DEFAULT_HORIZON_CAP,
};
use crate::error::{AnalysisError, ArithmeticError};
use crate::model::{
    is_parallelism_monotonic, ExecutionProfile, JobKey, JobSet, TaskSet, Time, Workload,
};
use crate::sched::{CompletionRule, DispatchRule, Policy};
use crate::timing::{hyperperiod, stabilization_points};
use crate::trace::{start_finish_times, Cell, ScheduleTrace, StartFinish};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactTestOptions {
    /// Run plain Gang FJP even when the priority order is not parallelism
    /// monotonic. The verdict then only speaks about the worst case.
    pub force: bool,
    pub horizon_cap: Time,
}

impl Default for ExactTestOptions {
    fn default() -> Self {
        ExactTestOptions {
            force: false,
            horizon_cap: DEFAULT_HORIZON_CAP,
        }
    }
}

impl ExactTestOptions {
    pub fn forced() -> Self {
        ExactTestOptions {
            force: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    DeadlineMiss {
        job: JobKey,
        label: String,
        t: Time,
    },
    StateMismatch {
        at_stabilization: StateDigest,
        one_period_later: StateDigest,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub schedulable: bool,
    pub witness: Option<Witness>,
    /// `[0, S_n + P)`.
    pub window: (Time, Time),
    pub stabilization: Vec<Time>,
    pub hyperperiod: Time,
    /// Set when the policy is not known to be predictable for this priority
    /// order: the verdict then covers the worst-case profile only.
    pub worst_case_only: bool,
    pub policy: String,
}

/// Whether the exact test's "if and only if" holds for `policy` on `ts`.
pub fn is_predictable_for(ts: &TaskSet, policy: Policy) -> bool {
    match (policy.dispatch, policy.completion) {
        (DispatchRule::Greedy, CompletionRule::Release) => is_parallelism_monotonic(ts),
        _ => true,
    }
}

fn window_end(
    ts: &TaskSet,
    periods: Time,
    cap: Time,
) -> Result<(Vec<Time>, Time, Time), AnalysisError> {
    let s = stabilization_points(ts)?;
    let p = hyperperiod(ts)?;
    let sn = *s.last().unwrap_or(&0);
    let end = p
        .checked_mul(periods)
        .and_then(|x| x.checked_add(sn))
        .ok_or(ArithmeticError::Overflow {
            what: "analysis window",
        })?;
    if end > cap {
        return Err(AnalysisError::WindowTooLarge { required: end, cap });
    }
    Ok((s, p, end))
}

/// Simulates the worst case over `[0, S_n + P]` and declares the set
/// schedulable iff no deadline is missed and the state digest at `S_n + P`
/// equals the one at `S_n`.
///
/// Deadlines falling exactly on `S_n + P` are checked too.
pub fn exact_schedulability_test(
    ts: &TaskSet,
    policy: Policy,
    options: ExactTestOptions,
) -> Result<Verdict, AnalysisError> {
    let predictable = is_predictable_for(ts, policy);
    if !predictable && !options.force {
        return Err(AnalysisError::PolicyNotPredictable(
            policy.name().to_string(),
        ));
    }
    let (stabilization, p, end) = window_end(ts, 1, options.horizon_cap)?;
    let sn = *stabilization.last().unwrap_or(&0);
    let profile = ExecutionProfile::worst_case();
    let workload = Workload::Periodic(ts);
    let mut sim = Simulator::new(workload, policy, &profile)?;
    let mut at_sn = None;
    loop {
        if sim.now() == sn {
            at_sn = Some(sim.digest());
        }
        if sim.has_missed() || sim.now() == end {
            break;
        }
        sim.step()?;
    }
    let miss = sim.events().iter().find_map(|e| match e {
        crate::engine::Event::DeadlineMiss { t, job, .. } => Some((*t, *job)),
        _ => None,
    });
    let witness = match miss {
        Some((t, job)) => Some(Witness::DeadlineMiss {
            job,
            label: workload.label(job),
            t,
        }),
        None => {
            let first = at_sn.expect("S_n lies inside the window");
            let last = sim.digest();
            (first != last).then_some(Witness::StateMismatch {
                at_stabilization: first,
                one_period_later: last,
            })
        }
    };
    Ok(Verdict {
        schedulable: witness.is_none(),
        witness,
        window: (0, end),
        stabilization,
        hyperperiod: p,
        worst_case_only: !predictable,
        policy: policy.name().to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periodicity {
    pub from: Time,
    pub period: Time,
    pub periodic: bool,
    pub first_divergence: Option<Time>,
}

/// Checks `σ(t) = σ(t + P)` for `t ∈ [S_n, S_n + P)` on the worst-case
/// schedule. Jobs are compared by task, since instance numbers shift by a
/// hyperperiod.
pub fn verify_schedule_periodicity(
    ts: &TaskSet,
    policy: Policy,
    horizon_cap: Time,
) -> Result<Periodicity, AnalysisError> {
    let (s, p, end) = window_end(ts, 2, horizon_cap)?;
    let sn = *s.last().unwrap_or(&0);
    let out = simulate(
        Workload::Periodic(ts),
        policy,
        &ExecutionProfile::worst_case(),
        SimConfig::new(end).horizon_cap(horizon_cap),
    )?;
    let by_task = |t: Time| -> Vec<Option<usize>> {
        out.trace
            .sigma(t)
            .into_iter()
            .map(|j| j.map(|k| k.task))
            .collect()
    };
    let first_divergence = (sn..sn + p).find(|&t| by_task(t) != by_task(t + p));
    Ok(Periodicity {
        from: sn,
        period: p,
        periodic: first_divergence.is_none(),
        first_divergence,
    })
}

/// A lower-priority job holding processors while a higher-priority job with
/// work left holds none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inversion {
    pub t: Time,
    pub running: JobKey,
    pub waiting: JobKey,
}

pub fn detect_priority_inversion(trace: &ScheduleTrace) -> Vec<Inversion> {
    let mut out = Vec::new();
    for t in 0..trace.len() {
        let holders: Vec<JobKey> = {
            let mut h: Vec<JobKey> = trace.slot(t).iter().filter_map(Cell::holder).collect();
            h.sort();
            h.dedup();
            h
        };
        let waiting: Vec<JobKey> = trace
            .jobs
            .iter()
            .filter(|j| j.release <= t && j.completion.is_none_or(|c| t < c))
            .map(|j| j.key)
            .filter(|k| !holders.contains(k))
            .collect();
        for &running in &holders {
            for &w in waiting.iter().filter(|&&w| w < running) {
                out.push(Inversion {
                    t,
                    running,
                    waiting: w,
                });
            }
        }
    }
    out.sort_by_key(|i| (i.t, i.waiting, i.running));
    out
}

/// Rewrites a trace so that every job's held processors show the job for
/// its first `actual` held quanta and a reservation afterwards. Slack-server
/// service disappears and served jobs are charged on their own holdings
/// instead. Applied to a slack-reclaiming trace this yields the idling trace
/// of the same profile.
pub fn as_idling_view(trace: &ScheduleTrace) -> Vec<Vec<Cell>> {
    let actual: BTreeMap<JobKey, Time> = trace.jobs.iter().map(|j| (j.key, j.actual)).collect();
    let mut held: BTreeMap<JobKey, Time> = BTreeMap::new();
    trace
        .slots
        .iter()
        .map(|slot| {
            let mut seen = Vec::new();
            let row: Vec<Cell> = slot
                .iter()
                .map(|c| match c.holder() {
                    None => Cell::Idle,
                    Some(h) => {
                        if !seen.contains(&h) {
                            seen.push(h);
                        }
                        let ordinal = held.get(&h).copied().unwrap_or(0);
                        if ordinal < actual[&h] {
                            Cell::Run(h)
                        } else {
                            Cell::Reserved(h)
                        }
                    }
                })
                .collect();
            for h in seen {
                *held.entry(h).or_insert(0) += 1;
            }
            row
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeStrategy {
    /// Every integer profile, provided there are at most `cap` of them.
    Exhaustive {
        cap: u64,
    },
    Random {
        seed: u64,
        count: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    /// `S(J⁽ⁱ⁾₋) ≤ S(J⁽ⁱ⁾)` failed.
    StartBeforeBest,
    /// `S(J⁽ⁱ⁾) ≤ S(J⁽ⁱ⁾₊)` failed.
    StartAfterWorst,
    FinishBeforeBest,
    FinishAfterWorst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictabilityViolation {
    /// Execution time of each job, in priority order.
    pub profile: Vec<Time>,
    /// Size of the priority prefix `J⁽ⁱ⁾` (1-based).
    pub prefix: usize,
    pub bound: Bound,
    pub observed: Time,
    pub limit: Time,
    /// The observed finish lies past the job's deadline.
    pub deadline_missed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictabilityReport {
    pub policy: String,
    pub strategy: ProbeStrategy,
    /// False when the worst case itself misses a deadline.
    pub applicable: bool,
    /// False when an exhaustive run was refused because the profile space
    /// exceeds its cap.
    pub complete: bool,
    pub profile_space: u64,
    pub profiles_tested: u64,
    pub violations: Vec<PredictabilityViolation>,
}

impl PredictabilityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `(S, F)` of the lowest-priority job of every prefix `J⁽¹⁾ … J⁽ⁿ⁾`.
fn prefix_timings(
    jobs: &JobSet,
    policy: Policy,
    executions: &[Time],
) -> Result<Vec<(Time, Time)>, AnalysisError> {
    (1..=jobs.len())
        .map(|i| {
            let prefix = jobs.prefix(i);
            let profile = ExecutionProfile::for_job_set(&executions[..i])
                .expect("probe profiles stay within bounds");
            let out = simulate_to_completion(Workload::Jobs(&prefix), policy, &profile)?;
            match start_finish_times(&out.trace, JobKey::new(i - 1, 1)) {
                StartFinish::Done { start, finish } => Ok((start, finish)),
                other => unreachable!("drained job-set simulation left {other:?}"),
            }
        })
        .collect()
}

/// Checks `S(J⁽ⁱ⁾₋) ≤ S(J⁽ⁱ⁾) ≤ S(J⁽ⁱ⁾₊)` and the same for `F` on sampled
/// execution profiles with `e_min[j] ≤ e_j ≤ wcet_j`.
///
/// Finish times include reservations and slack servers. A deadline miss that
/// only happens with shorter executions shows up as a `FinishAfterWorst`
/// violation.
pub fn predictability_probe(
    jobs: &JobSet,
    e_min: &[Time],
    policy: Policy,
    strategy: ProbeStrategy,
) -> Result<PredictabilityReport, AnalysisError> {
    assert_eq!(e_min.len(), jobs.len(), "one lower bound per job");
    let upper: Vec<Time> = jobs.jobs().iter().map(|j| j.wcet).collect();
    let lower: Vec<Time> = e_min
        .iter()
        .zip(&upper)
        .map(|(&lo, &hi)| lo.clamp(1, hi))
        .collect();
    let profile_space = lower
        .iter()
        .zip(&upper)
        .try_fold(1u64, |acc, (lo, hi)| acc.checked_mul(hi - lo + 1))
        .unwrap_or(u64::MAX);

    let mut report = PredictabilityReport {
        policy: policy.name().to_string(),
        strategy,
        applicable: true,
        complete: true,
        profile_space,
        profiles_tested: 0,
        violations: Vec::new(),
    };

    let worst = prefix_timings(jobs, policy, &upper)?;
    let deadlines: Vec<Time> = jobs.jobs().iter().map(|j| j.deadline).collect();
    if worst.iter().zip(&deadlines).any(|(&(_, f), &d)| f > d) {
        report.applicable = false;
        return Ok(report);
    }
    let best = prefix_timings(jobs, policy, &lower)?;

    let check =
        |profile: &[Time], report: &mut PredictabilityReport| -> Result<(), AnalysisError> {
            let got = prefix_timings(jobs, policy, profile)?;
            report.profiles_tested += 1;
            for i in 0..got.len() {
                let (s, f) = got[i];
                let (s_lo, f_lo) = best[i];
                let (s_hi, f_hi) = worst[i];
                let mut push = |bound, observed, limit| {
                    report.violations.push(PredictabilityViolation {
                        profile: profile.to_vec(),
                        prefix: i + 1,
                        bound,
                        observed,
                        limit,
                        deadline_missed: f > deadlines[i],
                    })
                };
                if s < s_lo {
                    push(Bound::StartBeforeBest, s, s_lo);
                }
                if s > s_hi {
                    push(Bound::StartAfterWorst, s, s_hi);
                }
                if f < f_lo {
                    push(Bound::FinishBeforeBest, f, f_lo);
                }
                if f > f_hi {
                    push(Bound::FinishAfterWorst, f, f_hi);
                }
            }
            Ok(())
        };

    match strategy {
        ProbeStrategy::Exhaustive { cap } => {
            if profile_space > cap {
                report.complete = false;
                return Ok(report);
            }
            let mut profile = lower.clone();
            loop {
                check(&profile, &mut report)?;
                // odometer increment, last job fastest
                let mut i = profile.len();
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if profile[i] < upper[i] {
                        profile[i] += 1;
                        break;
                    }
                    profile[i] = lower[i];
                }
                if profile == lower {
                    break;
                }
            }
        }
        ProbeStrategy::Random { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sampled: Vec<Vec<Time>> = (0..count)
                .map(|_| {
                    lower
                        .iter()
                        .zip(&upper)
                        .map(|(&lo, &hi)| rng.gen_range(lo..=hi))
                        .collect()
                })
                .collect();
            sampled.sort();
            for profile in &sampled {
                check(profile, &mut report)?;
            }
        }
    }
    report
        .violations
        .sort_by(|a, b| (&a.profile, a.prefix).cmp(&(&b.profile, b.prefix)));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{
        nonpredictable_jobs, priority_inversion_set, slack_walkthrough_jobs, NONPREDICTABLE_E_MIN,
    };
    use crate::model::{JobSpec, Platform, Task};

    fn async_pair() -> TaskSet {
        TaskSet::new(
            vec![Task::new("A", 1, 1, 1, 5, 5), Task::new("B", 0, 1, 2, 4, 4)],
            Platform::new(2),
        )
        .unwrap()
    }

    #[test]
    fn forced_test_on_inversion_set() {
        let ts = priority_inversion_set();
        assert_eq!(
            exact_schedulability_test(&ts, Policy::GANG_FJP, ExactTestOptions::default()),
            Err(AnalysisError::PolicyNotPredictable("gang-fjp".into()))
        );
        let v =
            exact_schedulability_test(&ts, Policy::GANG_FJP, ExactTestOptions::forced()).unwrap();
        assert!(v.schedulable);
        assert!(v.worst_case_only);
        assert_eq!(v.window, (0, 5));
        assert_eq!(v.stabilization, vec![0, 0, 0]);
        assert_eq!(v.hyperperiod, 5);
    }

    #[test]
    fn pm_order_needs_no_force() {
        let ts = priority_inversion_set().parallelism_monotonic();
        let v =
            exact_schedulability_test(&ts, Policy::GANG_FJP, ExactTestOptions::default()).unwrap();
        assert!(!v.worst_case_only);
        assert_eq!(v.schedulable, v.witness.is_none());
    }

    #[test]
    fn limited_reports_the_miss() {
        let ts = priority_inversion_set();
        let v =
            exact_schedulability_test(&ts, Policy::LIMITED, ExactTestOptions::default()).unwrap();
        assert!(!v.schedulable);
        assert_eq!(
            v.witness,
            Some(Witness::DeadlineMiss {
                job: JobKey::new(2, 1),
                label: "T3".into(),
                t: 5
            })
        );
    }

    #[test]
    fn asynchronous_window() {
        let ts = async_pair();
        let v =
            exact_schedulability_test(&ts, Policy::LIMITED, ExactTestOptions::default()).unwrap();
        assert_eq!(v.stabilization, vec![1, 4]);
        assert_eq!(v.hyperperiod, 20);
        assert_eq!(v.window, (0, 24));
        assert!(v.schedulable);
        let p = verify_schedule_periodicity(&ts, Policy::LIMITED, DEFAULT_HORIZON_CAP).unwrap();
        assert_eq!((p.from, p.period, p.periodic), (4, 20, true));
    }

    #[test]
    fn window_cap() {
        let ts = async_pair();
        let err = exact_schedulability_test(
            &ts,
            Policy::IDLING,
            ExactTestOptions {
                force: false,
                horizon_cap: 23,
            },
        )
        .unwrap_err();
        assert_eq!(
            err,
            AnalysisError::WindowTooLarge {
                required: 24,
                cap: 23
            }
        );
    }

    #[test]
    fn synchronous_periodicity_starts_at_zero() {
        let p = verify_schedule_periodicity(
            &priority_inversion_set(),
            Policy::GANG_FJP,
            DEFAULT_HORIZON_CAP,
        )
        .unwrap();
        assert_eq!(
            p,
            Periodicity {
                from: 0,
                period: 5,
                periodic: true,
                first_divergence: None
            }
        );
    }

    #[test]
    fn overload_is_caught_by_a_miss() {
        // utilisation above one on a single processor: backlog grows each period
        let ts = TaskSet::new(
            vec![Task::new("A", 0, 1, 2, 2, 2), Task::new("B", 0, 1, 1, 3, 3)],
            Platform::new(1),
        )
        .unwrap();
        let v =
            exact_schedulability_test(&ts, Policy::IDLING, ExactTestOptions::default()).unwrap();
        assert!(matches!(
            v.witness,
            Some(Witness::DeadlineMiss { t: 3, .. })
        ));
    }

    #[test]
    fn inversions_on_the_reference_trace() {
        let ts = priority_inversion_set();
        let profile = ExecutionProfile::worst_case();
        let out = simulate(
            Workload::Periodic(&ts),
            Policy::GANG_FJP,
            &profile,
            SimConfig::new(5),
        )
        .unwrap();
        let inv = detect_priority_inversion(&out.trace);
        let expect = |t| Inversion {
            t,
            running: JobKey::new(2, 1),
            waiting: JobKey::new(1, 1),
        };
        assert_eq!(inv, vec![expect(0), expect(1)]);

        let out = simulate(
            Workload::Periodic(&ts),
            Policy::LIMITED,
            &profile,
            SimConfig::new(10),
        )
        .unwrap();
        assert!(detect_priority_inversion(&out.trace).is_empty());

        let single = ts.prefix(1);
        let out = simulate(
            Workload::Periodic(&single),
            Policy::GANG_FJP,
            &profile,
            SimConfig::new(10),
        )
        .unwrap();
        assert!(detect_priority_inversion(&out.trace).is_empty());
    }

    #[test]
    fn probe_finds_the_gang_fjp_anomaly() {
        let js = nonpredictable_jobs();
        let r = predictability_probe(
            &js,
            &NONPREDICTABLE_E_MIN,
            Policy::GANG_FJP,
            ProbeStrategy::Exhaustive { cap: 64 },
        )
        .unwrap();
        assert!(r.applicable && r.complete);
        assert_eq!(r.profiles_tested, 3);
        assert!(r.violations.contains(&PredictabilityViolation {
            profile: vec![1, 1, 2],
            prefix: 3,
            bound: Bound::FinishAfterWorst,
            observed: 3,
            limit: 2,
            deadline_missed: true,
        }));
    }

    #[test]
    fn pm_order_and_idling_are_clean() {
        let js = nonpredictable_jobs();
        let pm = JobSet::new(
            vec![
                js.jobs()[0].clone(),
                js.jobs()[2].clone(),
                js.jobs()[1].clone(),
            ],
            js.platform(),
        )
        .unwrap();
        let exhaustive = ProbeStrategy::Exhaustive { cap: 64 };
        let r = predictability_probe(&pm, &[1, 2, 1], Policy::GANG_FJP, exhaustive).unwrap();
        assert!(r.applicable && r.is_clean());
        let r =
            predictability_probe(&js, &NONPREDICTABLE_E_MIN, Policy::IDLING, exhaustive).unwrap();
        assert!(r.applicable && r.is_clean());
        assert_eq!(r.profiles_tested, 3);
    }

    #[test]
    fn exhaustive_cap_and_random_replay() {
        let js = slack_walkthrough_jobs();
        let e_min = [1; 6];
        let r = predictability_probe(
            &js,
            &e_min,
            Policy::SLACK_RECLAIMING,
            ProbeStrategy::Exhaustive { cap: 10 },
        )
        .unwrap();
        assert!(!r.complete);
        assert_eq!(r.profile_space, 3 * 2 * 2 * 2);
        let random = ProbeStrategy::Random { seed: 7, count: 20 };
        let a = predictability_probe(&js, &e_min, Policy::SLACK_RECLAIMING, random).unwrap();
        let b = predictability_probe(&js, &e_min, Policy::SLACK_RECLAIMING, random).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.profiles_tested, 20);
        assert!(a.is_clean());
    }

    #[test]
    fn unschedulable_worst_case_is_not_applicable() {
        let js = JobSet::new(
            vec![JobSpec::new("A", 0, 1, 2, 2), JobSpec::new("B", 0, 1, 1, 2)],
            Platform::new(1),
        )
        .unwrap();
        let r = predictability_probe(
            &js,
            &[1, 1],
            Policy::IDLING,
            ProbeStrategy::Exhaustive { cap: 8 },
        )
        .unwrap();
        assert!(!r.applicable);
        assert_eq!(r.profiles_tested, 0);
    }

    #[test]
    fn slack_trace_looks_idle_from_outside() {
        let js = slack_walkthrough_jobs();
        let early = ExecutionProfile::for_job_set(&[1, 1, 2, 2, 2, 1]).unwrap();
        let slack =
            simulate_to_completion(Workload::Jobs(&js), Policy::SLACK_RECLAIMING, &early).unwrap();
        let idle = simulate_to_completion(Workload::Jobs(&js), Policy::IDLING, &early).unwrap();
        assert_eq!(as_idling_view(&slack.trace), idle.trace.slots);
        assert_eq!(as_idling_view(&idle.trace), idle.trace.slots);
    }

    #[test]
    fn lower_priority_tasks_leave_the_prefix_alone() {
        let ts = priority_inversion_set();
        let profile = ExecutionProfile::worst_case();
        let full = simulate(
            Workload::Periodic(&ts),
            Policy::GANG_FJP,
            &profile,
            SimConfig::new(10),
        )
        .unwrap();
        let head = simulate(
            Workload::Periodic(&ts.prefix(2)),
            Policy::GANG_FJP,
            &profile,
            SimConfig::new(10),
        )
        .unwrap();
        for t in 0..10 {
            let keep = |row: Vec<Option<JobKey>>| -> Vec<Option<JobKey>> {
                row.into_iter().map(|c| c.filter(|k| k.task < 2)).collect()
            };
            assert_eq!(keep(full.trace.sigma(t)), head.trace.sigma(t), "t = {t}");
        }
    }
}
