//! Six jobs where the first finishes two quanta early. Its processors become
//! a slack server that runs narrower lower-priority jobs, while every job
//! keeps its worst-case start and finish.
//!
//! cargo run --example slack_server

use gangsched::analysis::as_idling_view;
use gangsched::catalog::slack_walkthrough_jobs;
use gangsched::engine::Event;
use gangsched::{simulate_to_completion, Cell, ExecutionProfile, Policy, Workload};

fn main() {
    let js = slack_walkthrough_jobs();
    let wl = Workload::Jobs(&js);
    let early = ExecutionProfile::for_job_set(&[1, 1, 2, 2, 2, 1]).unwrap();
    let out = simulate_to_completion(wl, Policy::SLACK_RECLAIMING, &early).unwrap();
    let worst = simulate_to_completion(
        wl,
        Policy::SLACK_RECLAIMING,
        &ExecutionProfile::worst_case(),
    )
    .unwrap();

    for (t, slot) in out.trace.slots.iter().enumerate() {
        let cells: Vec<String> = slot
            .iter()
            .map(|c| match *c {
                Cell::Idle => ".".into(),
                Cell::Run(j) => out.trace.label(j),
                Cell::Reserved(j) => format!("({})", out.trace.label(j)),
                Cell::Server { owner, served } => format!(
                    "[{}:{}]",
                    out.trace.label(owner),
                    served.map_or("-".into(), |j| out.trace.label(j))
                ),
            })
            .collect();
        println!("t={t} {}", cells.join(" "));
    }
    for e in &out.events {
        if let Event::ServerStart {
            t,
            level,
            width,
            length,
        } = e
        {
            println!(
                "server of {} starts at {t}: width {width}, length {length}",
                out.trace.label(*level)
            );
        }
    }
    for (a, b) in out.trace.jobs.iter().zip(&worst.trace.jobs) {
        println!(
            "{}: start {:?} finish {:?} (worst case {:?} {:?}), {} quanta inside servers",
            a.label, a.start, a.finish, b.start, b.finish, a.inner_service
        );
    }
    let idle = simulate_to_completion(wl, Policy::IDLING, &early).unwrap();
    println!(
        "seen from outside, identical to idling: {}",
        as_idling_view(&out.trace) == idle.trace.slots
    );
}
