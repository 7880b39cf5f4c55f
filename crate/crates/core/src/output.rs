//! CSV writers for trajectories, convergence histories and cost tables.
//!
//! Floats are serialized with 17 significant digits so a round-trip through
//! the file reproduces the exact bit pattern; identical runs therefore produce
//! byte-identical files. A row containing a non-finite number is replaced by
//! an explicit error marker row rather than written silently.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::metrics::{CostReport, TableRow};
use crate::pint::PinTResult;
use crate::propagate::Trajectory;
use crate::steady::SteadyStateResult;

/// Marker written in place of a row that contained NaN or infinity.
pub const NON_FINITE_ROW: &str = "error:non-finite";

#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn render_row(cells: &[Cell]) -> String {
    if cells
        .iter()
        .any(|c| matches!(c, Cell::Float(x) if !x.is_finite()))
    {
        return NON_FINITE_ROW.to_string();
    }
    let mut line = String::new();
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        match cell {
            Cell::Float(x) => {
                let _ = write!(line, "{}", format_float(*x));
            }
            Cell::Int(v) => {
                let _ = write!(line, "{v}");
            }
            Cell::Text(s) => {
                let _ = write!(line, "{s}");
            }
            Cell::Bool(b) => {
                let _ = write!(line, "{b}");
            }
            Cell::Empty => {}
        }
    }
    line
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<Cell>>,
) -> io::Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&render_row(&row));
        text.push('\n');
    }
    fs::write(path, text)
}

/// Columns: time, one per state component, one per observable.
pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> io::Result<()> {
    let m = trajectory.states().first().map_or(0, |u| u.len());
    let mut header: Vec<String> = vec!["time".into()];
    header.extend((0..m).map(|i| format!("state_{i}")));
    header.extend(trajectory.observable_names().iter().cloned());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let names = trajectory.observable_names();
    let rows = trajectory
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = Vec::with_capacity(1 + m + names.len());
            row.push(Cell::Float(t));
            row.extend(trajectory.states()[i].iter().map(|&x| Cell::Float(x)));
            for name in names {
                row.push(Cell::Float(trajectory.observable(name).unwrap()[i]));
            }
            row
        })
        .collect::<Vec<_>>();
    write_csv(path, &header_refs, rows)
}

/// Columns: iteration, jump_norm, effective_steps_so_far.
pub fn write_pint_convergence_csv(path: &Path, result: &PinTResult) -> io::Result<()> {
    let per_iteration = result.subintervals as u64 + result.fine_steps_per_subinterval as u64;
    let rows = result.jump_norms.iter().enumerate().map(|(i, &jump)| {
        vec![
            Cell::Int(i as u64 + 1),
            Cell::Float(jump),
            Cell::Int((i as u64 + 1) * per_iteration),
        ]
    });
    write_csv(
        path,
        &["iteration", "jump_norm", "effective_steps_so_far"],
        rows.collect::<Vec<_>>(),
    )
}

/// Columns: period, err, total_steps.
pub fn write_steady_convergence_csv(path: &Path, result: &SteadyStateResult) -> io::Result<()> {
    let rows = result.err_history.iter().enumerate().map(|(i, &err)| {
        vec![
            Cell::Int(i as u64 + 1),
            Cell::Float(err),
            Cell::Int((i as u64 + 1) * result.steps_per_period as u64),
        ]
    });
    write_csv(
        path,
        &["period", "err", "total_steps"],
        rows.collect::<Vec<_>>(),
    )
}

pub fn write_cost_csv(path: &Path, method: &str, cost: &CostReport) -> io::Result<()> {
    let row = vec![
        Cell::Text(method.to_string()),
        Cell::Int(cost.effective_steps),
        Cell::Int(cost.iterations),
        Cell::Int(cost.subintervals),
        Cell::Int(cost.fine_steps_per_subinterval),
        cost.sequential_steps.map_or(Cell::Empty, Cell::Int),
        cost.speedup.map_or(Cell::Empty, Cell::Float),
    ];
    write_csv(
        path,
        &[
            "method",
            "effective_steps",
            "iterations",
            "subintervals",
            "fine_steps_per_subinterval",
            "sequential_steps",
            "speedup",
        ],
        [row],
    )
}

/// Columns: method, solves (or "not applicable"), converged, speedup.
pub fn write_comparison_csv(path: &Path, rows: &[TableRow]) -> io::Result<()> {
    let table = rows.iter().map(|row| {
        vec![
            Cell::Text(row.method.clone()),
            match row.solves {
                Some(v) => Cell::Int(v),
                None => Cell::Text("not applicable".into()),
            },
            Cell::Bool(row.converged),
            row.speedup.map_or(Cell::Empty, Cell::Float),
        ]
    });
    write_csv(
        path,
        &["method", "solves", "converged", "speedup_vs_sequential"],
        table.collect::<Vec<_>>(),
    )
}
