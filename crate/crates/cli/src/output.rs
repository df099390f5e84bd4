//! CSV and snapshot writers. Numbers use 17 significant digits.

use std::path::Path;

use kef_core::diagnostics::DiagnosticsRow;
use kef_core::solver::Trajectory;

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` and numeric `rows` as RFC-4180 CSV.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|x| num(*x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRow]) -> Result<(), CliError> {
    let header = rows.first().map(|r| r.header()).unwrap_or_default();
    let values: Vec<Vec<f64>> = rows.iter().map(|r| r.values()).collect();
    write_table(path, &header, &values)
}

/// Parsed numeric CSV: header and rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| CliError::Io(format!("{}: {e}", path.display()))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Saves every stored state under `dir/snapshots` with an `index.csv` of
/// times.
pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let sdir = dir.join("snapshots");
    std::fs::create_dir_all(&sdir)?;
    let mut w = csv::Writer::from_path(sdir.join("index.csv"))?;
    w.write_record(["index", "t", "file"])?;
    for (i, st) in traj.states.iter().enumerate() {
        let name = format!("snap_{i:04}.kef");
        traj.snapshot(i).save(&sdir.join(&name))?;
        w.write_record([i.to_string(), num(st.t), name])?;
    }
    w.flush()?;
    Ok(())
}

/// `(t, file)` entries of a snapshot index.
pub fn read_snapshot_index(dir: &Path) -> Result<Vec<(f64, String)>, CliError> {
    let mut r = csv::Reader::from_path(dir.join("snapshots").join("index.csv"))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t = rec.get(1).unwrap_or("").parse::<f64>().map_err(|e| CliError::Io(e.to_string()))?;
        out.push((t, rec.get(2).unwrap_or("").to_string()));
    }
    Ok(out)
}
