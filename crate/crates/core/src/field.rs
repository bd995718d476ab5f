//! Space-time grids and sampled solution fields, with CSV and binary export.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BOUNDARY_TOL;

/// Magic number of the binary grid format (`b"ESJF"` little-endian).
pub const BIN_MAGIC: u32 = u32::from_le_bytes(*b"ESJF");
pub const BIN_VERSION: u32 = 1;

/// Output sampling points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl Grid {
    pub fn new(x: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        let ordered = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|a| a.is_finite());
        if x.is_empty() || t.is_empty() {
            return Err(Error::GridMismatch("grid axes must be non-empty".into()));
        }
        if !ordered(&x) || !ordered(&t) {
            return Err(Error::GridMismatch("grid axes must be strictly increasing".into()));
        }
        if t[0] < 0.0 {
            return Err(Error::NegativeTime(t[0]));
        }
        Ok(Grid { x, t })
    }

    /// `nx` equispaced points on `[0, length]` and `nt` on `[0, horizon]`.
    pub fn uniform(length: f64, nx: usize, horizon: f64, nt: usize) -> Self {
        Grid {
            x: linspace(0.0, length, nx),
            t: linspace(0.0, horizon, nt),
        }
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn nt(&self) -> usize {
        self.t.len()
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    b
                } else {
                    a + (b - a) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Which solver produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Linear,
    Picard,
    Oracle,
    Analytic,
}

/// Values `u(x_i, t_j)` stored row-major by `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    values: Vec<f64>,
    pub meta: Provenance,
}

impl Field {
    pub fn from_values(grid: &Grid, values: Vec<f64>, meta: Provenance) -> Result<Self> {
        if values.len() != grid.nx() * grid.nt() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx(),
                grid.nt()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!("non-finite value at flat index {k}")));
        }
        Ok(Field {
            x_grid: grid.x.clone(),
            t_grid: grid.t.clone(),
            values,
            meta,
        })
    }

    pub fn zeros(grid: &Grid, meta: Provenance) -> Self {
        Field {
            x_grid: grid.x.clone(),
            t_grid: grid.t.clone(),
            values: vec![0.0; grid.nx() * grid.nt()],
            meta,
        }
    }

    /// Samples `f(x, t)` on the grid.
    pub fn from_fn(grid: &Grid, meta: Provenance, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nx() * grid.nt());
        for &x in &grid.x {
            for &t in &grid.t {
                values.push(f(x, t));
            }
        }
        Field {
            x_grid: grid.x.clone(),
            t_grid: grid.t.clone(),
            values,
            meta,
        }
    }

    pub fn grid(&self) -> Grid {
        Grid {
            x: self.x_grid.clone(),
            t: self.t_grid.clone(),
        }
    }

    pub fn nx(&self) -> usize {
        self.x_grid.len()
    }

    pub fn nt(&self) -> usize {
        self.t_grid.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t_grid.len() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let nt = self.t_grid.len();
        self.values[i * nt + j] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn time_slice(&self, j: usize) -> Vec<f64> {
        (0..self.nx()).map(|i| self.get(i, j)).collect()
    }

    /// `sup_x |u(., t_j)|` for every time.
    pub fn sup_in_space(&self) -> Vec<f64> {
        (0..self.nt())
            .map(|j| (0..self.nx()).map(|i| self.get(i, j).abs()).fold(0.0, f64::max))
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest boundary value over all times (only meaningful when the grid contains both ends).
    pub fn boundary_defect(&self) -> f64 {
        let last = self.nx() - 1;
        (0..self.nt())
            .map(|j| self.get(0, j).abs().max(self.get(last, j).abs()))
            .fold(0.0, f64::max)
    }

    pub fn satisfies_boundary(&self) -> bool {
        self.boundary_defect() <= BOUNDARY_TOL
    }

    fn same_grid(&self, other: &Field) -> Result<()> {
        if self.x_grid != other.x_grid || self.t_grid != other.t_grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// `a * self + b * other` on identical grids.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        Ok(Field {
            x_grid: self.x_grid.clone(),
            t_grid: self.t_grid.clone(),
            values,
            meta: self.meta,
        })
    }

    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (u, v)| a.max((u - v).abs())))
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: f64, t: f64) -> Option<f64> {
        let (i, wx) = bracket(&self.x_grid, x)?;
        let (j, wt) = bracket(&self.t_grid, t)?;
        let i1 = (i + 1).min(self.nx() - 1);
        let j1 = (j + 1).min(self.nt() - 1);
        let v00 = self.get(i, j);
        let v01 = self.get(i, j1);
        let v10 = self.get(i1, j);
        let v11 = self.get(i1, j1);
        Some((1.0 - wx) * ((1.0 - wt) * v00 + wt * v01) + wx * ((1.0 - wt) * v10 + wt * v11))
    }

    /// CSV with header `x,t,u` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,t,u")?;
        for (i, &x) in self.x_grid.iter().enumerate() {
            for (j, &t) in self.t_grid.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", x, t, self.get(i, j))?;
            }
        }
        Ok(())
    }

    /// Reads the CSV written by [`Field::write_csv`] (rows ordered by `x`, then `t`).
    pub fn read_csv<R: BufRead>(r: R, meta: Provenance) -> Result<Field> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
        if header.trim() != "x,t,u" {
            return Err(Error::Format(format!("unexpected CSV header `{header}`")));
        }
        let mut rows = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(e.to_string())))
                .collect::<Result<_>>()?;
            if parts.len() != 3 {
                return Err(Error::Format(format!("expected 3 columns in `{line}`")));
            }
            rows.push((parts[0], parts[1], parts[2]));
        }
        let mut x: Vec<f64> = Vec::new();
        let mut t: Vec<f64> = Vec::new();
        for &(xv, tv, _) in &rows {
            if x.last() != Some(&xv) {
                x.push(xv);
            }
            if x.len() == 1 {
                t.push(tv);
            }
        }
        let grid = Grid::new(x, t)?;
        let values = rows.iter().map(|r| r.2).collect();
        Field::from_values(&grid, values, meta)
    }

    /// Binary layout: 16-byte header (magic, version, nx, nt as little-endian `u32`)
    /// followed by `nx * nt` little-endian `f64` values, row-major by `x`.
    pub fn write_bin<W: Write>(&self, mut w: W) -> Result<()> {
        let dims = [BIN_MAGIC, BIN_VERSION, self.nx() as u32, self.nt() as u32];
        for d in dims {
            w.write_all(&d.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the binary format; the axes are not stored, so the caller supplies the grid.
    pub fn read_bin<R: Read>(mut r: R, grid: &Grid, meta: Provenance) -> Result<Field> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        let word = |k: usize| u32::from_le_bytes(header[4 * k..4 * k + 4].try_into().unwrap());
        if word(0) != BIN_MAGIC {
            return Err(Error::Format("bad magic number".into()));
        }
        if word(1) != BIN_VERSION {
            return Err(Error::Format(format!("unsupported version {}", word(1))));
        }
        let (nx, nt) = (word(2) as usize, word(3) as usize);
        if nx != grid.nx() || nt != grid.nt() {
            return Err(Error::GridMismatch(format!(
                "file holds {nx}x{nt}, grid is {}x{}",
                grid.nx(),
                grid.nt()
            )));
        }
        let mut buf = vec![0u8; 8 * nx * nt];
        r.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Field::from_values(grid, values, meta)
    }
}

/// Index `i` and weight `w` with `v = (1-w) axis[i] + w axis[i+1]`.
fn bracket(axis: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = axis.len();
    let span = (axis[n - 1] - axis[0]).abs().max(1.0);
    let slack = 1e-12 * span;
    if v < axis[0] - slack || v > axis[n - 1] + slack {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let i = axis.partition_point(|&a| a <= v).clamp(1, n - 1) - 1;
    let w = ((v - axis[i]) / (axis[i + 1] - axis[i])).clamp(0.0, 1.0);
    Some((i, w))
}
