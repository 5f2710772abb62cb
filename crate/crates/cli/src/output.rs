use std::fs;
use std::path::Path;

use hpot::{Error, Result};
use serde_json::{json, Map, Value};

use crate::args::Command;

fn io(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Fields every report starts with. serde_json keeps object keys sorted,
/// so equal inputs give byte-identical files.
pub fn header(command: &Command, seed: u64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!({ "name": "hpot", "version": env!("CARGO_PKG_VERSION") }));
    m.insert("config".into(), serde_json::to_value(command).unwrap_or(Value::Null));
    m.insert("seed".into(), json!(seed));
    m.insert(
        "tolerances".into(),
        json!({ "tau": tau_of(command), "circularity": hpot::solver::CIRCULARITY_TOL }),
    );
    m
}

fn tau_of(command: &Command) -> f64 {
    match command {
        Command::Solve(a) => a.problem.tau,
        Command::Check(a) => a.problem.tau,
        Command::Verify(a) => a.problem.tau,
        _ => hpot::solver::DEFAULT_TAU,
    }
}

pub fn write_json(path: &Path, report: Map<String, Value>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&Value::Object(report)).map_err(|e| io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io(path, e))
}

/// Writes a CSV with a header row; floats use the shortest round-trip form.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| number(*v))).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Shortest round-trip text, with an exponent for very small or large
/// magnitudes.
fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// x1..xn, y1..yn, t
pub fn chart_names(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|j| format!("x{j}")).collect();
    names.extend((1..=n).map(|j| format!("y{j}")));
    names.push("t".into());
    names
}
