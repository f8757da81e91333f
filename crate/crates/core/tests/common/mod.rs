//! Seeded random instance generators shared by the integration tests.

#![allow(dead_code)]

use gangsched::model::{JobSet, JobSpec, Platform, Task, TaskSet};
use gangsched::timing::{hyperperiod, stabilization_point};
use gangsched::Time;
use rand::seq::SliceRandom;
use rand::Rng;

/// Periods whose lcm stays small.
pub const PERIODS: [Time; 10] = [2, 3, 4, 5, 6, 8, 10, 12, 15, 20];

/// A small job set with at most four jobs, widths up to `m`, worst cases up
/// to four and loose enough deadlines that most instances are schedulable.
/// Returns the set and a lower execution bound per job.
pub fn small_job_set(rng: &mut impl Rng) -> (JobSet, Vec<Time>) {
    let m = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=4);
    let mut specs = Vec::new();
    let mut e_min = Vec::new();
    for i in 0..n {
        let v = rng.gen_range(1..=m);
        let e = rng.gen_range(1..=4);
        let r = rng.gen_range(0..=3);
        let d = r + e + rng.gen_range(0..=6);
        specs.push(JobSpec::new(format!("J{}", i + 1), r, v, e, d));
        e_min.push(rng.gen_range(1..=e));
    }
    (
        JobSet::new(specs, Platform::new(m)).expect("generated set is valid"),
        e_min,
    )
}

/// The same jobs in parallelism-monotonic order (stable on width).
pub fn pm_order(js: &JobSet, e_min: &[Time]) -> (JobSet, Vec<Time>) {
    let mut idx: Vec<usize> = (0..js.len()).collect();
    idx.sort_by_key(|&i| js.jobs()[i].width);
    let jobs = idx.iter().map(|&i| js.jobs()[i].clone()).collect();
    (
        JobSet::new(jobs, js.platform()).unwrap(),
        idx.iter().map(|&i| e_min[i]).collect(),
    )
}

/// A periodic task set on up to four processors with offsets, constrained
/// deadlines and `S_n + periods·P ≤ bound`. Retries until the bound holds.
pub fn task_set(rng: &mut impl Rng, periods: Time, bound: Time) -> TaskSet {
    loop {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=4);
        let tasks: Vec<Task> = (0..n)
            .map(|i| {
                let t = *PERIODS.choose(rng).unwrap();
                let d = rng.gen_range(1..=t);
                let c = rng.gen_range(1..=d.min(4));
                let o = if rng.gen_bool(0.7) {
                    rng.gen_range(0..2 * t)
                } else {
                    0
                };
                Task::new(format!("T{}", i + 1), o, rng.gen_range(1..=m), c, d, t)
            })
            .collect();
        let ts = TaskSet::new(tasks, Platform::new(m)).expect("generated set is valid");
        let (Ok(s), Ok(p)) = (stabilization_point(&ts), hyperperiod(&ts)) else {
            continue;
        };
        if s + periods * p <= bound {
            return ts;
        }
    }
}
