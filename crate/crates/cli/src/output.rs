//! Artifact writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use esjj::Field;
use serde::Serialize;

use crate::config::Format;
use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

#[derive(Serialize)]
struct FieldJson<'a> {
    x: &'a [f64],
    t: &'a [f64],
    /// `values[i][j] = u(x_i, t_j)`.
    values: Vec<&'a [f64]>,
}

#[derive(Serialize)]
struct GridJson<'a> {
    x: &'a [f64],
    t: &'a [f64],
}

/// Writes `stem.{csv,bin,json}`; binary output gets a `stem.grid.json` sidecar.
pub fn write_field(dir: &Path, stem: &str, u: &Field, format: Format) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    match format {
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut w = create(&path)?;
            u.write_csv(&mut w)?;
            w.flush()?;
            written.push(path);
        }
        Format::Bin => {
            let path = dir.join(format!("{stem}.bin"));
            let mut w = create(&path)?;
            u.write_bin(&mut w)?;
            w.flush()?;
            written.push(path);
            let grid = dir.join(format!("{stem}.grid.json"));
            write_json(
                &grid,
                &GridJson {
                    x: &u.x_grid,
                    t: &u.t_grid,
                },
            )?;
            written.push(grid);
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            let nt = u.nt();
            let values = u.values().chunks(nt).collect();
            write_json(
                &path,
                &FieldJson {
                    x: &u.x_grid,
                    t: &u.t_grid,
                    values,
                },
            )?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Numeric table as CSV with 17 significant digits.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Table as a JSON array of objects keyed by the header.
pub fn write_table_json(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
        .iter()
        .map(|row| {
            header
                .iter()
                .zip(row)
                .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
                .collect()
        })
        .collect();
    write_json(path, &records)
}
