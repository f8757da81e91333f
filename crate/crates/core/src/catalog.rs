//! Small reference workloads used throughout the examples and tests.

use crate::model::{JobSet, JobSpec, Platform, Task, TaskSet};

/// Three synchronous tasks on three processors where the narrow lowest
/// priority task overtakes the wider middle one at time 0.
pub fn priority_inversion_set() -> TaskSet {
    TaskSet::new(
        vec![
            Task::new("T1", 0, 2, 2, 5, 5),
            Task::new("T2", 0, 2, 3, 5, 5),
            Task::new("T3", 0, 1, 4, 5, 5),
        ],
        Platform::new(3),
    )
    .expect("valid reference set")
}

/// Three jobs on two processors, `(r, v, e, d)` = `(0,1,3,3)`, `(0,2,1,4)`,
/// `(0,1,2,2)`: schedulable under Gang FJP in the worst case, but the last job
/// misses its deadline when the first one runs for a single quantum.
pub fn nonpredictable_jobs() -> JobSet {
    JobSet::new(
        vec![
            JobSpec::new("J1", 0, 1, 3, 3),
            JobSpec::new("J2", 0, 2, 1, 4),
            JobSpec::new("J3", 0, 1, 2, 2),
        ],
        Platform::new(2),
    )
    .expect("valid reference set")
}

/// Lower execution bounds matching [`nonpredictable_jobs`]: only `J1` varies.
pub const NONPREDICTABLE_E_MIN: [u64; 3] = [1, 1, 2];

/// Six jobs released at 0 with deadline 6 on three processors, widths
/// `(2,3,1,1,2,1)` and worst-case executions `(3,1,2,2,2,1)`.
pub fn slack_walkthrough_jobs() -> JobSet {
    let params = [(2, 3), (3, 1), (1, 2), (1, 2), (2, 2), (1, 1)];
    JobSet::new(
        params
            .iter()
            .enumerate()
            .map(|(i, &(v, e))| JobSpec::new(format!("J{}", i + 1), 0, v, e, 6))
            .collect(),
        Platform::new(3),
    )
    .expect("valid reference set")
}
