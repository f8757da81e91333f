//! Three tasks on three processors: under plain Gang FJP the narrow
//! lowest-priority task runs ahead of the wider middle one. Limited Gang
//! forbids that and the narrow task misses its deadline instead.
//!
//! cargo run --example priority_inversion

use gangsched::analysis::detect_priority_inversion;
use gangsched::catalog::priority_inversion_set;
use gangsched::{simulate, ExecutionProfile, Policy, ScheduleTrace, SimConfig, Workload};

fn print_sigma(trace: &ScheduleTrace) {
    for (t, row) in trace.sigma_labels().iter().enumerate() {
        let cells: Vec<&str> = row.iter().map(|c| c.as_deref().unwrap_or(".")).collect();
        println!("  t={t:<2} {}", cells.join(" "));
    }
}

fn main() {
    let ts = priority_inversion_set();
    for policy in [Policy::GANG_FJP, Policy::LIMITED] {
        let out = simulate(
            Workload::Periodic(&ts),
            policy,
            &ExecutionProfile::worst_case(),
            SimConfig::new(5),
        )
        .expect("small horizon");
        println!("{policy}:");
        print_sigma(&out.trace);
        for inv in detect_priority_inversion(&out.trace) {
            println!(
                "  inversion at {}: {} runs while {} waits",
                inv.t,
                out.trace.label(inv.running),
                out.trace.label(inv.waiting)
            );
        }
        match out.first_miss() {
            Some((t, job)) => println!("  {} misses its deadline at {t}", out.trace.label(job)),
            None => println!("  all deadlines met"),
        }
    }
}
