//! Command-line front end: `analyze`, `simulate`, `fuzz` and `export`.
//!
//! Exit status is 0 for a positive result (schedulable, no violation), 1 for a
//! negative one and 2 for usage, input or validation errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gangsched::analysis::{
    exact_schedulability_test, predictability_probe, verify_schedule_periodicity, ExactTestOptions,
    ProbeStrategy, Witness,
};
use gangsched::document::{parse_profile, parse_task_set, LoadedSet, LoadedWorkload};
use gangsched::engine::{horizon_cap_from_env, simulate, simulate_to_completion, SimConfig};
use gangsched::export::{export_trace, to_csv, to_svg, Format};
use gangsched::timing::{hyperperiod, stabilization_point};
use gangsched::{ExecutionProfile, JobSet, Policy, ScheduleTrace, Time};

#[derive(Parser)]
#[command(
    name = "gangsched",
    version,
    about = "Gang scheduling simulator and schedulability analyzer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact schedulability test of a periodic task set.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        policy: Policy,
        /// Run plain gang-fjp on a non parallelism-monotonic order (worst case only).
        #[arg(long)]
        force: bool,
        #[arg(long)]
        json: bool,
    },
    /// Simulate and write the trace as JSON.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        policy: Policy,
        /// Quanta to simulate; defaults to S_n + P for tasks and to completion for jobs.
        #[arg(long)]
        horizon: Option<Time>,
        /// Profile document, or `worst`.
        #[arg(long, default_value = "worst")]
        profile: String,
        #[arg(long)]
        stop_at_first_miss: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probe predictability over execution-time profiles.
    Fuzz {
        file: PathBuf,
        #[arg(long)]
        policy: Policy,
        #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Largest profile space enumerated exhaustively.
        #[arg(long, default_value_t = 1 << 16)]
        cap: u64,
        /// Jobs of periodic tasks released before this instant are probed;
        /// defaults to S_n + P.
        #[arg(long)]
        horizon: Option<Time>,
        #[arg(long)]
        json: bool,
    },
    /// Render a trace JSON file as CSV or SVG.
    Export {
        trace: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
}

enum Outcome {
    Positive,
    Negative,
}

type Failure = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Positive) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load(path: &Path) -> Result<LoadedSet, Failure> {
    Ok(parse_task_set(&read(path)?)?)
}

fn default_horizon(set: &LoadedSet) -> Result<Option<Time>, Failure> {
    match &set.workload {
        LoadedWorkload::Tasks(ts) => {
            let end = stabilization_point(ts)?
                .checked_add(hyperperiod(ts)?)
                .ok_or("analysis window overflows")?;
            Ok(Some(end))
        }
        LoadedWorkload::Jobs(_) => Ok(None),
    }
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, body).map_err(|e| format!("{}: {e}", p.display()).into()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<Outcome, Failure> {
    let cap = horizon_cap_from_env();
    match command {
        Command::Analyze {
            file,
            policy,
            force,
            json,
        } => {
            let set = load(&file)?;
            let LoadedWorkload::Tasks(ts) = &set.workload else {
                return Err("analyze needs a periodic task set".into());
            };
            let verdict = exact_schedulability_test(
                ts,
                policy,
                ExactTestOptions {
                    force,
                    horizon_cap: cap,
                },
            )?;
            if json {
                println!("{}", serde_json::to_string_pretty(&verdict)?);
            } else {
                println!("policy: {}", verdict.policy);
                println!("S: {:?}", verdict.stabilization);
                println!("P: {}", verdict.hyperperiod);
                println!("window: [{}, {})", verdict.window.0, verdict.window.1);
                match &verdict.witness {
                    None => println!("witness: none"),
                    Some(Witness::DeadlineMiss { label, t, .. }) => {
                        println!("witness: {label} misses its deadline at {t}")
                    }
                    Some(Witness::StateMismatch { .. }) => {
                        println!("witness: state at S_n + P differs from state at S_n")
                    }
                }
                let word = match (verdict.schedulable, verdict.worst_case_only) {
                    (true, false) => "schedulable",
                    (true, true) => "worst-case schedulable only",
                    (false, _) => "not schedulable",
                };
                println!("verdict: {word}");
                if verdict.schedulable {
                    if let Ok(p) = verify_schedule_periodicity(ts, policy, cap) {
                        match p.first_divergence {
                            None => println!("periodic: from {} with period {}", p.from, p.period),
                            Some(t) => println!("periodic: no, first divergence at {t}"),
                        }
                    }
                }
            }
            Ok(if verdict.schedulable {
                Outcome::Positive
            } else {
                Outcome::Negative
            })
        }
        Command::Simulate {
            file,
            policy,
            horizon,
            profile,
            stop_at_first_miss,
            out,
        } => {
            let set = load(&file)?;
            let workload = set.workload.as_workload();
            let profile = if profile == "worst" {
                ExecutionProfile::worst_case()
            } else {
                parse_profile(&read(Path::new(&profile))?, workload)?
            };
            let horizon = match horizon {
                Some(h) => Some(h),
                None => default_horizon(&set)?,
            };
            let outcome = match horizon {
                Some(h) => simulate(
                    workload,
                    policy,
                    &profile,
                    SimConfig::new(h)
                        .horizon_cap(cap)
                        .stop_at_first_miss(stop_at_first_miss),
                )?,
                None => simulate_to_completion(workload, policy, &profile)?,
            };
            let misses: Vec<_> = outcome.misses().collect();
            for (t, job) in &misses {
                eprintln!("deadline miss: {} at {t}", outcome.trace.label(*job));
            }
            eprintln!(
                "simulated {} quanta, {} deadline misses",
                outcome.trace.len(),
                misses.len()
            );
            let mut body = serde_json::to_string_pretty(&outcome.trace)?;
            body.push('\n');
            write_or_print(out.as_deref(), &body)?;
            Ok(if misses.is_empty() {
                Outcome::Positive
            } else {
                Outcome::Negative
            })
        }
        Command::Fuzz {
            file,
            policy,
            strategy,
            seed,
            count,
            cap: space_cap,
            horizon,
            json,
        } => {
            let set = load(&file)?;
            let (jobs, e_min): (JobSet, Vec<Time>) = match &set.workload {
                LoadedWorkload::Jobs(js) => (js.clone(), set.e_min.clone()),
                LoadedWorkload::Tasks(ts) => {
                    let h = match horizon {
                        Some(h) => h,
                        None => default_horizon(&set)?.expect("tasks have a window"),
                    };
                    if h > cap {
                        return Err(format!("horizon {h} exceeds the configured cap {cap}").into());
                    }
                    let js = ts.unroll(h);
                    let mut e_min = Vec::with_capacity(js.len());
                    for (level, task) in ts.tasks().iter().enumerate() {
                        let n = (1..).take_while(|&k| task.release_of(k) < h).count();
                        e_min.extend(std::iter::repeat_n(set.e_min[level].min(task.wcet), n));
                    }
                    (js, e_min)
                }
            };
            let strategy = match strategy {
                StrategyArg::Exhaustive => ProbeStrategy::Exhaustive { cap: space_cap },
                StrategyArg::Random => {
                    eprintln!("seed: {seed}");
                    ProbeStrategy::Random { seed, count }
                }
            };
            let report = predictability_probe(&jobs, &e_min, policy, strategy)?;
            if !report.complete {
                return Err(format!(
                    "profile space {} exceeds the exhaustive cap {space_cap}; use --strategy random or raise --cap",
                    report.profile_space
                )
                .into());
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("policy: {}", report.policy);
                println!("strategy: {:?}", report.strategy);
                println!("profile space: {}", report.profile_space);
                println!("profiles tested: {}", report.profiles_tested);
                if !report.applicable {
                    println!("not applicable: the worst case already misses a deadline");
                }
                for v in &report.violations {
                    let id = &jobs.jobs()[v.prefix - 1].id;
                    println!(
                        "violation: profile {:?}, job {id}: {:?} observed {} limit {}{}",
                        v.profile,
                        v.bound,
                        v.observed,
                        v.limit,
                        if v.deadline_missed {
                            " (deadline missed)"
                        } else {
                            ""
                        }
                    );
                }
                println!("violations: {}", report.violations.len());
            }
            Ok(if report.applicable && report.is_clean() {
                Outcome::Positive
            } else {
                Outcome::Negative
            })
        }
        Command::Export { trace, format, out } => {
            let trace: ScheduleTrace = serde_json::from_str(&read(&trace)?)?;
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Svg => Format::Svg,
            };
            match out {
                Some(p) => export_trace(&trace, format, &p)?,
                None => print!(
                    "{}",
                    match format {
                        Format::Csv => to_csv(&trace),
                        Format::Svg => to_svg(&trace),
                    }
                ),
            }
            Ok(Outcome::Positive)
        }
    }
}
