//! Hyperperiod and stabilization points of a task set.
//!
//! cargo run --example timing

use gangsched::timing::{hyperperiod, stabilization_points};
use gangsched::{Platform, Task, TaskSet};

fn main() {
    let ts = TaskSet::new(
        vec![
            Task::new("A", 1, 1, 1, 5, 5),
            Task::new("B", 0, 1, 2, 4, 4),
            Task::new("C", 7, 2, 1, 3, 6),
        ],
        Platform::new(2),
    )
    .unwrap();
    println!("P = {}", hyperperiod(&ts).unwrap());
    for (task, s) in ts.tasks().iter().zip(stabilization_points(&ts).unwrap()) {
        println!("S after {} = {s}", task.id);
    }

    let huge = TaskSet::new(
        vec![
            Task::new("x", 0, 1, 1, 1, u64::MAX - 1),
            Task::new("y", 0, 1, 1, 1, u64::MAX - 2),
        ],
        Platform::new(1),
    )
    .unwrap();
    println!(
        "overflowing hyperperiod: {}",
        hyperperiod(&huge).unwrap_err()
    );
}
