//! Loading task-set documents: priority directives, execution bounds and
//! profile overrides.
//!
//! cargo run --example task_set_document

use gangsched::document::{parse_profile, parse_task_set, serialize_task_set, LoadedWorkload};
use gangsched::{simulate_to_completion, Policy};

const TASKS: &str = include_str!("data/inversion.json");
const JOBS: &str = include_str!("data/anomaly_jobs.json");

fn main() {
    for rule in [
        "\"rm\"",
        "\"dm\"",
        "\"pm-sort\"",
        "[\"T3\", \"T2\", \"T1\"]",
    ] {
        let text = TASKS.replacen(
            "\"platform\"",
            &format!("\"priority\": {rule},\n  \"platform\""),
            1,
        );
        let set = parse_task_set(&text).unwrap();
        println!("priority {rule}: {:?}", set.order);
    }

    let set = parse_task_set(JOBS).unwrap();
    println!("lower execution bounds: {:?}", set.e_min);
    let again = parse_task_set(&serialize_task_set(&set.document)).unwrap();
    println!("round trip preserved: {}", again == set);

    let LoadedWorkload::Jobs(js) = &set.workload else {
        unreachable!()
    };
    let profile = parse_profile(
        include_str!("data/early_j1.json"),
        set.workload.as_workload(),
    )
    .unwrap();
    let out =
        simulate_to_completion(set.workload.as_workload(), Policy::GANG_FJP, &profile).unwrap();
    println!(
        "{} jobs, misses: {:?}",
        js.len(),
        out.misses()
            .map(|(t, j)| (out.trace.label(j), t))
            .collect::<Vec<_>>()
    );

    let broken = TASKS.replace("\"v\": 1", "\"width\": 1");
    println!("unknown field: {}", parse_task_set(&broken).unwrap_err());
    let empty = r#"{ "version": 1, "platform": { "m": 2 } }"#;
    println!("empty set: {}", parse_task_set(empty).unwrap_err());
}
