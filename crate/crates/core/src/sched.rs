//! Gang scheduling policies.
//!
//! A policy has two independent parts:
//!
//! * a [`DispatchRule`] deciding, each quantum, which competing entities get
//!   processors (plain Gang FJP, or Limited Gang which stops at the first
//!   entity that does not fit);
//! * a [`CompletionRule`] deciding what happens to the processors of a job
//!   that completes before its worst case: released immediately, held idle
//!   ([`IdleReservation`]), or turned into a [`SlackServer`].
//!
//! Reservations and servers are "virtual continuations" of the finished job:
//! they compete at the job's priority with its width for exactly the quanta
//! the job would still have consumed in the worst case. Under the worst-case
//! profile none are ever created, so Gang FJP, Idling and slack reclaiming
//! produce identical schedules.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{JobKey, Time};

/// An entity competing for processors in one quantum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub key: JobKey,
    pub width: u32,
}

/// Processors granted to one entity for one quantum (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub key: JobKey,
    pub processors: Vec<usize>,
}

/// Pairwise disjoint placements, in priority order.
pub type Assignment = Vec<Placement>;

/// Takes the `width` lowest-indexed free processors, if there are enough.
fn take_lowest(free: &mut [bool], width: u32) -> Option<Vec<usize>> {
    let width = width as usize;
    let available = free.iter().filter(|&&f| f).count();
    if available < width {
        return None;
    }
    let picked: Vec<usize> = free
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| i)
        .take(width)
        .collect();
    for &p in &picked {
        free[p] = false;
    }
    Some(picked)
}

fn select(active: &[Candidate], m: u32, stop_at_first_skip: bool) -> Assignment {
    let mut free = vec![true; m as usize];
    let mut out = Vec::new();
    for c in active {
        match take_lowest(&mut free, c.width) {
            Some(processors) => out.push(Placement {
                key: c.key,
                processors,
            }),
            None if stop_at_first_skip => break,
            None => {}
        }
    }
    out
}

/// Gang FJP: scan in priority order, give each entity its lowest-indexed
/// available processors when enough remain, keep scanning past skips.
pub fn select_gang_fjp(active: &[Candidate], m: u32) -> Assignment {
    select(active, m, false)
}

/// Limited Gang FJP: as [`select_gang_fjp`] but the scan stops at the first
/// entity that does not fit, so the scheduled set is a priority prefix.
pub fn select_limited_gang(active: &[Candidate], m: u32) -> Assignment {
    select(active, m, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DispatchRule {
    Greedy,
    Limited,
}

impl DispatchRule {
    pub fn select(self, active: &[Candidate], m: u32) -> Assignment {
        match self {
            DispatchRule::Greedy => select_gang_fjp(active, m),
            DispatchRule::Limited => select_limited_gang(active, m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompletionRule {
    /// Processors of a completed job are free from the next quantum.
    Release,
    /// Processors stay idle until the job's worst-case completion.
    Idle,
    /// A slack server takes over the job's worst-case remainder.
    SlackServer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    pub dispatch: DispatchRule,
    pub completion: CompletionRule,
}

impl Policy {
    pub const GANG_FJP: Policy = Policy {
        dispatch: DispatchRule::Greedy,
        completion: CompletionRule::Release,
    };
    pub const LIMITED: Policy = Policy {
        dispatch: DispatchRule::Limited,
        completion: CompletionRule::Release,
    };
    pub const IDLING: Policy = Policy {
        dispatch: DispatchRule::Greedy,
        completion: CompletionRule::Idle,
    };
    pub const SLACK_RECLAIMING: Policy = Policy {
        dispatch: DispatchRule::Greedy,
        completion: CompletionRule::SlackServer,
    };

    pub const NAMED: [Policy; 4] = [
        Policy::GANG_FJP,
        Policy::LIMITED,
        Policy::IDLING,
        Policy::SLACK_RECLAIMING,
    ];

    pub fn name(&self) -> &'static str {
        match (self.dispatch, self.completion) {
            (DispatchRule::Greedy, CompletionRule::Release) => "gang-fjp",
            (DispatchRule::Limited, CompletionRule::Release) => "limited",
            (DispatchRule::Greedy, CompletionRule::Idle) => "idling",
            (DispatchRule::Greedy, CompletionRule::SlackServer) => "slack-reclaiming",
            (DispatchRule::Limited, CompletionRule::Idle) => "limited+idling",
            (DispatchRule::Limited, CompletionRule::SlackServer) => "limited+slack-reclaiming",
        }
    }

    /// One of the four variants the analysis is stated for.
    pub fn is_named_variant(&self) -> bool {
        Policy::NAMED.contains(self)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let all = [
            Policy::GANG_FJP,
            Policy::LIMITED,
            Policy::IDLING,
            Policy::SLACK_RECLAIMING,
            Policy {
                dispatch: DispatchRule::Limited,
                completion: CompletionRule::Idle,
            },
            Policy {
                dispatch: DispatchRule::Limited,
                completion: CompletionRule::SlackServer,
            },
        ];
        all.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            format!("unknown policy `{s}` (expected gang-fjp, limited, idling or slack-reclaiming)")
        })
    }
}

/// Processors held idle after an early completion.
///
/// The reservation behaves like the job itself would have with its remaining
/// worst-case budget: it is dispatched at the job's priority and width, so a
/// preemption of this virtual job moves the reservation exactly as it would
/// have moved the real one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdleReservation {
    pub owner: JobKey,
    pub width: u32,
    /// Quanta still to hold.
    pub residual: Time,
    /// Processors held in the most recent quantum.
    pub processors: Vec<usize>,
    pub created: Time,
}

/// Reservation for a job that completed at `now` after `outer_service` quanta
/// on its own processors, or `None` when nothing of its worst case remains.
pub fn idling_on_early_completion(
    owner: JobKey,
    width: u32,
    wcet: Time,
    outer_service: Time,
    processors: Vec<usize>,
    now: Time,
) -> Option<IdleReservation> {
    let residual = wcet.checked_sub(outer_service).filter(|&r| r > 0)?;
    Some(IdleReservation {
        owner,
        width,
        residual,
        processors,
        created: now,
    })
}

/// A pseudo-job of level `ℓ` (the early job's priority), width `w` and length
/// `λ` serving narrower, lower-priority ready jobs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlackServer {
    pub level: JobKey,
    pub width: u32,
    pub length: Time,
    /// Quanta of server time still to run.
    pub remaining: Time,
    /// Service given to each job so far.
    pub served: BTreeMap<JobKey, Time>,
    pub created: Time,
    pub first_run: Option<Time>,
}

/// Server for a job that completed at `now`. Its length is the part of the
/// job's worst-case budget it did not consume on its own processors, so the
/// job plus its server always fill the worst-case footprint.
pub fn spawn_slack_server(
    level: JobKey,
    width: u32,
    wcet: Time,
    outer_service: Time,
    now: Time,
) -> Option<SlackServer> {
    let length = wcet.checked_sub(outer_service).filter(|&r| r > 0)?;
    Some(SlackServer {
        level,
        width,
        length,
        remaining: length,
        served: BTreeMap::new(),
        created: now,
        first_run: None,
    })
}

/// Picks the jobs a server runs this quantum on its `processors`.
///
/// `ready` are active jobs that are neither running at the outer level nor
/// served by another server, in priority order. Eligible jobs have a priority
/// lower than the server's level and a width no larger than the server's; they
/// are packed highest priority first on the lowest-indexed server processors.
pub fn slack_server_dispatch(
    server: &SlackServer,
    processors: &[usize],
    ready: &[Candidate],
) -> Assignment {
    let mut free = vec![true; processors.len()];
    let mut out = Vec::new();
    for c in ready
        .iter()
        .filter(|c| c.key > server.level && c.width <= server.width)
    {
        if let Some(local) = take_lowest(&mut free, c.width) {
            out.push(Placement {
                key: c.key,
                processors: local.into_iter().map(|i| processors[i]).collect(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(task: usize, width: u32) -> Candidate {
        Candidate {
            key: JobKey::new(task, 1),
            width,
        }
    }

    fn procs(a: &Assignment) -> Vec<(usize, Vec<usize>)> {
        a.iter()
            .map(|p| (p.key.task, p.processors.clone()))
            .collect()
    }

    #[test]
    fn gang_fjp_skips_and_continues() {
        // widths of the non-predictability example on two processors
        let a = select_gang_fjp(&[c(0, 1), c(1, 2), c(2, 1)], 2);
        assert_eq!(procs(&a), vec![(0, vec![0]), (2, vec![1])]);
        // widths of the priority-inversion example on three processors
        let a = select_gang_fjp(&[c(0, 2), c(1, 2), c(2, 1)], 3);
        assert_eq!(procs(&a), vec![(0, vec![0, 1]), (2, vec![2])]);
        assert!(select_gang_fjp(&[], 3).is_empty());
    }

    #[test]
    fn limited_stops_at_first_misfit() {
        let a = select_limited_gang(&[c(0, 1), c(1, 2), c(2, 1)], 2);
        assert_eq!(procs(&a), vec![(0, vec![0])]);
        let all_fit = [c(0, 1), c(1, 1), c(2, 2)];
        assert_eq!(
            select_limited_gang(&all_fit, 4),
            select_gang_fjp(&all_fit, 4)
        );
    }

    #[test]
    fn reservation_only_for_early_completion() {
        let key = JobKey::new(0, 1);
        let r = idling_on_early_completion(key, 2, 3, 1, vec![0, 1], 1).unwrap();
        assert_eq!(r.residual, 2);
        assert!(idling_on_early_completion(key, 2, 3, 3, vec![0, 1], 3).is_none());
    }

    #[test]
    fn server_for_first_job_of_slack_example() {
        let s = spawn_slack_server(JobKey::new(0, 1), 2, 3, 1, 1).unwrap();
        assert_eq!((s.level.task, s.width, s.length, s.remaining), (0, 2, 2, 2));
        assert!(spawn_slack_server(JobKey::new(0, 1), 2, 3, 3, 3).is_none());
    }

    #[test]
    fn server_packs_narrow_lower_priority_jobs() {
        let s = spawn_slack_server(JobKey::new(0, 1), 2, 3, 1, 1).unwrap();
        // J2 (width 3) is too wide, J4 and J6 fit, J5 (width 2) does not fit after J4
        let ready = [c(1, 3), c(3, 1), c(4, 2), c(5, 1)];
        let a = slack_server_dispatch(&s, &[0, 1], &ready);
        assert_eq!(procs(&a), vec![(3, vec![0]), (5, vec![1])]);
        // once J4 is withdrawn and J6 done, J5 takes the whole server
        let a = slack_server_dispatch(&s, &[0, 1], &[c(1, 3), c(4, 2)]);
        assert_eq!(procs(&a), vec![(4, vec![0, 1])]);
        assert!(slack_server_dispatch(&s, &[0, 1], &[]).is_empty());
    }

    #[test]
    fn server_never_serves_higher_priority() {
        let s = spawn_slack_server(JobKey::new(2, 1), 2, 3, 1, 1).unwrap();
        assert!(slack_server_dispatch(&s, &[4, 5], &[c(0, 1), c(1, 1)]).is_empty());
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::NAMED {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!("edf".parse::<Policy>().is_err());
    }
}
