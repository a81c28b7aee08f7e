//! Plain-text outputs: grid CSVs, PGM images, score and metric tables.
//!
//! Everything here writes deterministic bytes for identical inputs so reruns
//! can be diffed directly. Floats use Rust's shortest round-trip formatting.

use std::fs;
use std::path::Path;

use crate::dist::Grid2D;
use crate::error::{Error, Result};
use crate::score::{MetricSummary, ScoreReport};

/// Write grid cell values as `ny` CSV lines of `nx` fields, row 0 first
/// (ascending y). Missing values (`None`) are written as `nan`.
pub fn write_grid_csv(path: &Path, grid: &Grid2D, values: &[Option<f64>]) -> Result<()> {
    if values.len() != grid.n_cells() {
        return Err(Error::Shape(format!(
            "{} values for a {}x{} grid",
            values.len(),
            grid.nx,
            grid.ny
        )));
    }
    let mut out = String::new();
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            if ix > 0 {
                out.push(',');
            }
            match values[grid.index(ix, iy)] {
                Some(v) => out.push_str(&format!("{v}")),
                None => out.push_str("nan"),
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Convenience for fully defined grids.
pub fn write_dense_grid_csv(path: &Path, grid: &Grid2D, values: &[f64]) -> Result<()> {
    let wrapped: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
    write_grid_csv(path, grid, &wrapped)
}

/// Write an ASCII PGM (P2) image of the grid. Values scale linearly from 0 to
/// `max` onto 0..=255 and clamp; `max = None` uses the data maximum (an
/// all-zero or all-`None` grid renders black). `None` cells render as 0.
/// Row 0 of the image is the highest y so the picture is not upside down.
pub fn write_grid_pgm(
    path: &Path,
    grid: &Grid2D,
    values: &[Option<f64>],
    max: Option<f64>,
) -> Result<()> {
    if values.len() != grid.n_cells() {
        return Err(Error::Shape(format!(
            "{} values for a {}x{} grid",
            values.len(),
            grid.nx,
            grid.ny
        )));
    }
    let scale = match max {
        Some(m) if m > 0.0 => m,
        Some(m) => {
            return Err(Error::Config(format!("pgm max must be positive, got {m}")));
        }
        None => {
            let m = values
                .iter()
                .flatten()
                .fold(0.0_f64, |acc, &v| acc.max(v));
            if m > 0.0 {
                m
            } else {
                1.0
            }
        }
    };
    let mut out = format!("P2\n{} {}\n255\n", grid.nx, grid.ny);
    for iy in (0..grid.ny).rev() {
        for ix in 0..grid.nx {
            if ix > 0 {
                out.push(' ');
            }
            let v = values[grid.index(ix, iy)].unwrap_or(0.0);
            let level = ((v / scale) * 255.0).round().clamp(0.0, 255.0) as u8;
            out.push_str(&format!("{level}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_dense_grid_pgm(
    path: &Path,
    grid: &Grid2D,
    values: &[f64],
    max: Option<f64>,
) -> Result<()> {
    let wrapped: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
    write_grid_pgm(path, grid, &wrapped, max)
}

/// Scores table: `id,score,label[,flagged]`, ids are input positions. Pass
/// the per-row flag mask to record which rows a threshold run predicted
/// anomalous.
pub fn write_scores_csv(path: &Path, report: &ScoreReport, flagged: Option<&[bool]>) -> Result<()> {
    if let Some(f) = flagged {
        if f.len() != report.len() {
            return Err(Error::Shape(format!(
                "{} flags for {} scores",
                f.len(),
                report.len()
            )));
        }
    }
    let mut out = String::from(if flagged.is_some() {
        "id,score,label,flagged\n"
    } else {
        "id,score,label\n"
    });
    for (i, (s, l)) in report.scores().iter().zip(report.labels()).enumerate() {
        match flagged {
            Some(f) => out.push_str(&format!("{i},{s},{l},{}\n", u8::from(f[i]))),
            None => out.push_str(&format!("{i},{s},{l}\n")),
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Single-row metrics table.
pub fn write_metrics_csv(path: &Path, m: &MetricSummary) -> Result<()> {
    let out = format!(
        "rho,precision,recall,f1,auroc\n{},{},{},{},{}\n",
        m.rho, m.precision, m.recall, m.f1, m.auroc
    );
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
