//! Writes the CSV and SVG renderings of a slack-reclaiming trace.
//!
//! cargo run --example gantt_export -- [output-dir]

use std::path::PathBuf;

use gangsched::catalog::slack_walkthrough_jobs;
use gangsched::export::{export_trace, parse_csv, to_csv, Format, SigmaGrid};
use gangsched::{simulate_to_completion, ExecutionProfile, Policy, Workload};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let js = slack_walkthrough_jobs();
    let early = ExecutionProfile::for_job_set(&[1, 1, 2, 2, 2, 1]).unwrap();
    let out =
        simulate_to_completion(Workload::Jobs(&js), Policy::SLACK_RECLAIMING, &early).unwrap();

    let csv = to_csv(&out.trace);
    print!("{csv}");
    assert_eq!(parse_csv(&csv).unwrap(), SigmaGrid::of(&out.trace));

    for (format, name) in [(Format::Csv, "slack.csv"), (Format::Svg, "slack.svg")] {
        let path = dir.join(name);
        export_trace(&out.trace, format, &path).unwrap();
        println!("wrote {}", path.display());
    }
}
