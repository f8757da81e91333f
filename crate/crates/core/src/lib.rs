//! Simulation and exact schedulability analysis of periodic rigid parallel
//! ("gang") tasks on `m` identical processors under fixed-priority gang
//! scheduling.
//!
//! * [`model`]: tasks, jobs, job sets, execution profiles.
//! * [`timing`]: hyperperiod and stabilization points.
//! * [`sched`]: Gang FJP, Limited Gang, Idling and slack-reclaiming policies.
//! * [`engine`]: the quantum-stepped simulator and state digests.
//! * [`trace`]: schedule traces and processor availability.
//! * [`analysis`]: exact schedulability test, periodicity check,
//!   predictability probe, priority-inversion detection.
//! * [`document`] and [`export`]: task-set files, CSV and SVG traces.

pub mod analysis;
pub mod catalog;
pub mod document;
pub mod engine;
pub mod error;
pub mod export;
pub mod model;
pub mod sched;
pub mod timing;
pub mod trace;

pub use engine::{simulate, simulate_to_completion, SimConfig, SimOutcome, Simulator};
pub use error::{AnalysisError, ArithmeticError, SimError, ValidationError};
pub use model::{
    ExecutionProfile, Job, JobKey, JobSet, JobSpec, Platform, Task, TaskSet, Time, Workload,
};
pub use sched::Policy;
pub use trace::{Cell, ScheduleTrace};
