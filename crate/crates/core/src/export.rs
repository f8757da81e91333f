//! CSV and SVG renderings of a [`ScheduleTrace`].
//!
//! The CSV is `σ(t)`: a `t,p1,…,pm` header, then one newline-terminated row per
//! quantum holding the label of the job executing on each processor, or `0`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::ExportError;
use crate::model::JobKey;
use crate::trace::{Cell, ScheduleTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv or svg)")),
        }
    }
}

pub fn export_trace(trace: &ScheduleTrace, format: Format, path: &Path) -> Result<(), ExportError> {
    let body = match format {
        Format::Csv => to_csv(trace),
        Format::Svg => to_svg(trace),
    };
    fs::write(path, body)?;
    Ok(())
}

pub fn to_csv(trace: &ScheduleTrace) -> String {
    let mut out = String::from("t");
    for p in 1..=trace.m {
        let _ = write!(out, ",p{p}");
    }
    out.push('\n');
    for (t, row) in trace.sigma_labels().iter().enumerate() {
        let _ = write!(out, "{t}");
        for cell in row {
            out.push(',');
            out.push_str(cell.as_deref().unwrap_or("0"));
        }
        out.push('\n');
    }
    out
}

/// `σ` read back from [`to_csv`] output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaGrid {
    pub m: u32,
    pub rows: Vec<Vec<Option<String>>>,
}

impl SigmaGrid {
    pub fn of(trace: &ScheduleTrace) -> Self {
        SigmaGrid {
            m: trace.m,
            rows: trace.sigma_labels(),
        }
    }
}

pub fn parse_csv(text: &str) -> Result<SigmaGrid, ExportError> {
    let err = |line: usize, message: String| ExportError::Csv { line, message };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"t") {
        return Err(err(1, "header must start with `t`".into()));
    }
    for (i, c) in cols.iter().enumerate().skip(1) {
        if *c != format!("p{i}") {
            return Err(err(1, format!("unexpected column `{c}`")));
        }
    }
    let m = (cols.len() - 1) as u32;
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let lineno = n + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(err(
                lineno,
                format!("expected {} fields, found {}", cols.len(), fields.len()),
            ));
        }
        if fields[0].parse::<usize>().ok() != Some(rows.len()) {
            return Err(err(lineno, format!("expected t = {}", rows.len())));
        }
        rows.push(
            fields[1..]
                .iter()
                .map(|f| (*f != "0").then(|| f.to_string()))
                .collect(),
        );
    }
    Ok(SigmaGrid { m, rows })
}

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#86bcb6",
];
const SERVER_FILL: &str = "#b0b0b0";
const QUANTUM: u64 = 28;
const LANE: u64 = 30;
const MARGIN_LEFT: u64 = 40;
const MARGIN_TOP: u64 = 24;

fn color(key: JobKey) -> &'static str {
    PALETTE[key.task % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Static Gantt chart: one lane per processor, one rectangle per maximal run
/// of the same cell, slack servers shaded gray, reservations hatched, deadline
/// misses marked in red.
pub fn to_svg(trace: &ScheduleTrace) -> String {
    let len = trace.len();
    let width = MARGIN_LEFT + len * QUANTUM + 20;
    let height = MARGIN_TOP + u64::from(trace.m) * LANE + 30;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"##
    );
    s.push_str(concat!(
        r##"<defs><pattern id="reserved" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"##,
        r##"<rect width="6" height="6" fill="#eeeeee"/><line x1="0" y1="0" x2="0" y2="6" stroke="#999999" stroke-width="2"/></pattern></defs>"##,
        "\n"
    ));
    for p in 0..trace.m {
        let y = MARGIN_TOP + u64::from(p) * LANE;
        let _ = writeln!(s, r##"<text x="4" y="{}">p{}</text>"##, y + 19, p + 1);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd"/>"##,
            MARGIN_LEFT + len * QUANTUM
        );
        let lane: Vec<Cell> = (0..len).map(|t| trace.slot(t)[p as usize]).collect();
        let mut t = 0usize;
        while t < lane.len() {
            let cell = lane[t];
            let same = |c: &Cell| match (cell, c) {
                (Cell::Server { owner: a, .. }, Cell::Server { owner: b, .. }) => a == *b,
                _ => *c == cell,
            };
            let mut end = t + 1;
            while end < lane.len() && same(&lane[end]) {
                end += 1;
            }
            let x = MARGIN_LEFT + t as u64 * QUANTUM;
            let w = (end - t) as u64 * QUANTUM;
            match cell {
                Cell::Idle => {}
                Cell::Run(j) => {
                    let _ = writeln!(
                        s,
                        r##"<rect class="job" x="{x}" y="{}" width="{w}" height="{}" fill="{}" stroke="#333333"/><text x="{}" y="{}">{}</text>"##,
                        y + 2,
                        LANE - 4,
                        color(j),
                        x + 3,
                        y + 19,
                        escape(&trace.label(j))
                    );
                }
                Cell::Reserved(j) => {
                    let _ = writeln!(
                        s,
                        r##"<rect class="reserved" x="{x}" y="{}" width="{w}" height="{}" fill="url(#reserved)" stroke="{}"/>"##,
                        y + 2,
                        LANE - 4,
                        color(j)
                    );
                }
                Cell::Server { .. } => {
                    let _ = writeln!(
                        s,
                        r##"<rect class="server" x="{x}" y="{}" width="{w}" height="{}" fill="{SERVER_FILL}" stroke="#666666"/>"##,
                        y + 2,
                        LANE - 4
                    );
                    let mut u = t;
                    while u < end {
                        let served = lane[u].executing();
                        let mut v = u + 1;
                        while v < end && lane[v].executing() == served {
                            v += 1;
                        }
                        if let Some(j) = served {
                            let sx = MARGIN_LEFT + u as u64 * QUANTUM;
                            let _ = writeln!(
                                s,
                                r##"<rect class="served" x="{}" y="{}" width="{}" height="{}" fill="{}"/><text x="{}" y="{}">{}</text>"##,
                                sx + 3,
                                y + 7,
                                (v - u) as u64 * QUANTUM - 6,
                                LANE - 14,
                                color(j),
                                sx + 5,
                                y + 19,
                                escape(&trace.label(j))
                            );
                        }
                        u = v;
                    }
                }
            }
            t = end;
        }
    }
    let axis_y = MARGIN_TOP + u64::from(trace.m) * LANE;
    for t in 0..=len {
        let x = MARGIN_LEFT + t * QUANTUM;
        let _ = writeln!(
            s,
            r##"<line x1="{x}" y1="{axis_y}" x2="{x}" y2="{}" stroke="#333333"/><text x="{}" y="{}">{t}</text>"##,
            axis_y + 4,
            x - 3,
            axis_y + 16
        );
    }
    for job in trace.jobs.iter().filter(|j| j.missed) {
        let x = MARGIN_LEFT + job.deadline * QUANTUM;
        let _ = writeln!(
            s,
            r##"<line class="miss" x1="{x}" y1="{}" x2="{x}" y2="{axis_y}" stroke="#d62728" stroke-width="2"/><text x="{}" y="{}" fill="#d62728">{} miss</text>"##,
            MARGIN_TOP - 6,
            x + 2,
            MARGIN_TOP - 8,
            escape(&job.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
