//! Shortening one job's execution makes another miss its deadline under
//! plain Gang FJP. Parallelism-monotonic priorities and idling both remove
//! the anomaly.
//!
//! cargo run --example predictability_probe

use gangsched::analysis::{predictability_probe, PredictabilityReport, ProbeStrategy};
use gangsched::catalog::{nonpredictable_jobs, NONPREDICTABLE_E_MIN};
use gangsched::model::JobSet;
use gangsched::Policy;

fn show(title: &str, jobs: &JobSet, report: &PredictabilityReport) {
    if !report.applicable {
        println!("{title}: not applicable, the worst case already misses a deadline");
        return;
    }
    println!(
        "{title}: {} profiles, {} violations",
        report.profiles_tested,
        report.violations.len()
    );
    for v in &report.violations {
        println!(
            "  profile {:?}: {} {:?} observed {} limit {}{}",
            v.profile,
            jobs.jobs()[v.prefix - 1].id,
            v.bound,
            v.observed,
            v.limit,
            if v.deadline_missed {
                ", deadline missed"
            } else {
                ""
            }
        );
    }
}

fn main() {
    let exhaustive = ProbeStrategy::Exhaustive { cap: 1000 };
    let jobs = nonpredictable_jobs();
    let report =
        predictability_probe(&jobs, &NONPREDICTABLE_E_MIN, Policy::GANG_FJP, exhaustive).unwrap();
    show("gang-fjp", &jobs, &report);

    let pm = JobSet::new(
        vec![
            jobs.jobs()[0].clone(),
            jobs.jobs()[2].clone(),
            jobs.jobs()[1].clone(),
        ],
        jobs.platform(),
    )
    .unwrap();
    let report = predictability_probe(&pm, &[1, 2, 1], Policy::GANG_FJP, exhaustive).unwrap();
    show("gang-fjp, widths 1,1,2", &pm, &report);

    let report =
        predictability_probe(&jobs, &NONPREDICTABLE_E_MIN, Policy::IDLING, exhaustive).unwrap();
    show("idling", &jobs, &report);

    let report =
        predictability_probe(&jobs, &NONPREDICTABLE_E_MIN, Policy::LIMITED, exhaustive).unwrap();
    show("limited", &jobs, &report);

    let random = ProbeStrategy::Random { seed: 1, count: 8 };
    let report = predictability_probe(
        &jobs,
        &NONPREDICTABLE_E_MIN,
        Policy::SLACK_RECLAIMING,
        random,
    )
    .unwrap();
    show(
        "slack-reclaiming, 8 random profiles (seed 1)",
        &jobs,
        &report,
    );
}
