//! Result files: per-call tables, planner traces, trajectories and
//! obstacle tracks, plus readers for each.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bspline::PathCurve;
use crate::error::{PlanError, Result};
use crate::executor::{mission_metrics, MissionLog, RouteRecord, SegmentRecord};
use crate::obstacles::ObstacleRow;
use crate::route_planner::join_sequence;

pub const ROUTE_HEADER: [&str; 11] = [
    "Call NO",
    "WP_S",
    "WP_D",
    "Task NO",
    "Route Weight",
    "Route Cost",
    "CPU Time",
    "T_Available",
    "T_Route",
    "Valid",
    "Route Sequence",
];

pub const SEGMENT_HEADER: [&str; 11] = [
    "Route ID",
    "PP Call",
    "Edges",
    "Violation",
    "Path Cost",
    "CPU Time",
    "T_path",
    "T_Expected",
    "T_Available",
    "Replan Flag",
    "PP Flag",
];

/// Column index of wall-clock measurements, which differ between runs.
pub const ROUTE_CPU_COLUMN: usize = 6;
pub const SEGMENT_CPU_COLUMN: usize = 5;

pub const SUMMARY_FILE: &str = "summary.json";
pub const MISSION_FILE: &str = "mission.json";
pub const ROUTES_FILE: &str = "routes.csv";
pub const SEGMENTS_FILE: &str = "segments.csv";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteTraceRow {
    pub iteration: usize,
    pub best_cost: f64,
}

/// A row of the segment table as written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRow {
    pub route_id: usize,
    pub pp_call: usize,
    pub from: usize,
    pub to: usize,
    pub violation: f64,
    pub path_cost: f64,
    pub cpu_time: f64,
    pub t_path: f64,
    pub t_expected: f64,
    pub t_available: f64,
    pub replan: bool,
    pub pp_flag: bool,
}

impl From<&SegmentRecord> for SegmentRow {
    fn from(s: &SegmentRecord) -> Self {
        Self {
            route_id: s.route_id,
            pp_call: s.pp_call,
            from: s.from,
            to: s.to,
            violation: s.violation,
            path_cost: s.path_cost,
            cpu_time: s.cpu_time,
            t_path: s.t_path,
            t_expected: s.t_expected,
            t_available: s.t_available,
            replan: s.replan,
            pp_flag: s.pp_flag,
        }
    }
}

fn flag(b: bool) -> &'static str {
    if b { "1" } else { "0" }
}

fn parse_err(file: &Path, line: usize, what: &str) -> PlanError {
    PlanError::Scenario(format!("{}:{line}: cannot parse {what}", file.display()))
}

pub fn write_route_csv(path: &Path, routes: &[RouteRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ROUTE_HEADER)?;
    for r in routes {
        w.write_record([
            r.call.to_string(),
            r.wp_start.to_string(),
            r.wp_destination.to_string(),
            r.task_count.to_string(),
            r.weight.to_string(),
            r.cost.to_string(),
            r.cpu_time.to_string(),
            r.t_available.to_string(),
            r.t_route.to_string(),
            (if r.valid { "Yes" } else { "No" }).to_string(),
            join_sequence(&r.sequence),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_route_csv(path: &Path) -> Result<Vec<RouteRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    check_header(path, r.headers()?, &ROUTE_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> { rec[k].parse().map_err(|_| parse_err(path, line, ROUTE_HEADER[k])) };
        let int = |k: usize| -> Result<usize> { rec[k].parse().map_err(|_| parse_err(path, line, ROUTE_HEADER[k])) };
        out.push(RouteRecord {
            call: int(0)?,
            wp_start: int(1)?,
            wp_destination: int(2)?,
            task_count: int(3)?,
            weight: num(4)?,
            cost: num(5)?,
            cpu_time: num(6)?,
            t_available: num(7)?,
            t_route: num(8)?,
            valid: match &rec[9] {
                "Yes" => true,
                "No" => false,
                _ => return Err(parse_err(path, line, "Valid")),
            },
            sequence: parse_sequence(&rec[10]).ok_or_else(|| parse_err(path, line, "Route Sequence"))?,
        });
    }
    Ok(out)
}

pub fn write_segment_csv(path: &Path, segments: &[SegmentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SEGMENT_HEADER)?;
    for s in segments {
        w.write_record([
            format!("Route-{}", s.route_id),
            s.pp_call.to_string(),
            format!("{}-{}", s.from, s.to),
            s.violation.to_string(),
            s.path_cost.to_string(),
            s.cpu_time.to_string(),
            s.t_path.to_string(),
            s.t_expected.to_string(),
            s.t_available.to_string(),
            flag(s.replan).to_string(),
            flag(s.pp_flag).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_segment_csv(path: &Path) -> Result<Vec<SegmentRow>> {
    let mut r = csv::Reader::from_path(path)?;
    check_header(path, r.headers()?, &SEGMENT_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> { rec[k].parse().map_err(|_| parse_err(path, line, SEGMENT_HEADER[k])) };
        let bit = |k: usize| -> Result<bool> {
            match &rec[k] {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(parse_err(path, line, SEGMENT_HEADER[k])),
            }
        };
        let route_id = rec[0]
            .strip_prefix("Route-")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(path, line, "Route ID"))?;
        let edge = parse_sequence(&rec[2]).filter(|s| s.len() == 2).ok_or_else(|| parse_err(path, line, "Edges"))?;
        out.push(SegmentRow {
            route_id,
            pp_call: rec[1].parse().map_err(|_| parse_err(path, line, "PP Call"))?,
            from: edge[0],
            to: edge[1],
            violation: num(3)?,
            path_cost: num(4)?,
            cpu_time: num(5)?,
            t_path: num(6)?,
            t_expected: num(7)?,
            t_available: num(8)?,
            replan: bit(9)?,
            pp_flag: bit(10)?,
        });
    }
    Ok(out)
}

fn check_header(path: &Path, got: &csv::StringRecord, want: &[&str]) -> Result<()> {
    if got.iter().ne(want.iter().copied()) {
        return Err(PlanError::Scenario(format!(
            "{}: unexpected header {:?}",
            path.display(),
            got.iter().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn parse_sequence(s: &str) -> Option<Vec<usize>> {
    s.split('-').map(|p| p.parse().ok()).collect()
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(PlanError::from)).collect()
}

pub fn trajectory_rows(curve: &PathCurve) -> Vec<TrajectoryRow> {
    curve
        .samples
        .iter()
        .map(|s| TrajectoryRow { t: s.t, x: s.position.x, y: s.position.y, z: s.position.z })
        .collect()
}

pub fn route_trace_rows(trace: &[f64]) -> Vec<RouteTraceRow> {
    trace.iter().enumerate().map(|(iteration, &best_cost)| RouteTraceRow { iteration, best_cost }).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes the result set of a mission into `dir` (created if missing) and
/// returns the written paths. A mission without any planner call produces
/// only the summary.
pub fn export_results(log: &MissionLog, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let summary = dir.join(SUMMARY_FILE);
    write_json(&summary, &mission_metrics(log))?;
    written.push(summary);
    if log.routes.is_empty() && log.segments.is_empty() {
        return Ok(written);
    }

    let mut emit = |name: String| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    write_json(&emit(MISSION_FILE.into()), log)?;
    write_route_csv(&emit(ROUTES_FILE.into()), &log.routes)?;
    write_segment_csv(&emit(SEGMENTS_FILE.into()), &log.segments)?;
    for (k, trace) in log.artifacts.route_traces.iter().enumerate() {
        write_rows(&emit(format!("route_trace_{}.csv", k + 1)), &route_trace_rows(trace))?;
    }
    for (k, plan) in log.artifacts.segment_plans.iter().enumerate() {
        let Some(plan) = plan else { continue };
        let n = k + 1;
        write_rows(&emit(format!("path_trace_{n}.csv")), &plan.trace)?;
        write_rows(&emit(format!("trajectory_{n}.csv")), &trajectory_rows(&plan.curve))?;
        write_rows::<ObstacleRow>(&emit(format!("obstacles_{n}.csv")), &plan.obstacle_rows())?;
    }
    Ok(written)
}
