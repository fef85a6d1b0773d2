//! CSV and JSON artifacts.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use levyma_core::field::FieldSample;
use levyma_core::grid::{Grid, GridFn};
use levyma_core::C64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct GridRow {
    x: f64,
    re: f64,
    im: f64,
}

/// Writes a grid function as CSV with columns `x, re, im`.
pub fn write_gridfn(path: &Path, f: &GridFn) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for (x, v) in f.iter() {
        w.serialize(GridRow {
            x,
            re: v.re,
            im: v.im,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid function written by [`write_gridfn`]; the abscissae must be
/// equally spaced.
pub fn read_gridfn(path: &Path) -> Result<GridFn> {
    let rows: Vec<GridRow> = read_csv(path)?;
    if rows.len() < 2 {
        bail!(
            "{}: a grid function needs at least two rows",
            path.display()
        );
    }
    let (lo, hi) = (rows[0].x, rows[rows.len() - 1].x);
    let grid = Grid::new(lo, hi, rows.len())?;
    for (i, r) in rows.iter().enumerate() {
        if (grid.point(i) - r.x).abs() > 1e-9 * (1.0 + r.x.abs()) {
            bail!(
                "{}: row {} has x = {} off the uniform grid",
                path.display(),
                i + 2,
                r.x
            );
        }
    }
    Ok(GridFn::new(
        grid,
        rows.iter().map(|r| C64::new(r.re, r.im)).collect(),
    )?)
}

/// Writes `x, <column>` for the real part of a grid function.
pub fn write_real_column(path: &Path, column: &str, f: &GridFn) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["x", column])?;
    for (x, v) in f.iter() {
        w.write_record([x.to_string(), v.re.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a field sample as `j0, …, j{d-1}, y`.
pub fn write_sample(path: &Path, s: &FieldSample) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header: Vec<String> = (0..s.dim()).map(|i| format!("j{i}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (j, y) in s.iter() {
        let mut row: Vec<String> = j.iter().map(|c| c.to_string()).collect();
        row.push(y.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the `y` column of a sample file; the lattice coordinates are checked
/// to form a box in row-major order, whose corner and shape are returned.
pub fn read_sample(path: &Path) -> Result<(Vec<i64>, Vec<usize>, Vec<f64>)> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    let d = header
        .len()
        .checked_sub(1)
        .filter(|d| *d > 0)
        .context("sample file needs j-columns and y")?;
    if header.get(d) != Some("y") {
        bail!("{}: last column must be `y`", path.display());
    }
    let mut coords: Vec<Vec<i64>> = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<&str> {
            rec.get(i)
                .with_context(|| format!("line {}: missing column {i}", line + 2))
        };
        let j: Vec<i64> = (0..d)
            .map(|i| Ok(parse(i)?.trim().parse::<i64>()?))
            .collect::<Result<_>>()?;
        ys.push(
            parse(d)?
                .trim()
                .parse::<f64>()
                .with_context(|| format!("line {}: bad y", line + 2))?,
        );
        coords.push(j);
    }
    if ys.is_empty() {
        bail!("{}: no observations", path.display());
    }
    let lo: Vec<i64> = (0..d)
        .map(|i| coords.iter().map(|c| c[i]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..d)
        .map(|i| coords.iter().map(|c| c[i]).max().unwrap())
        .collect();
    let shape: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a + 1) as usize)
        .collect();
    if shape.iter().product::<usize>() != ys.len() {
        bail!("{}: coordinates do not fill a box", path.display());
    }
    for (i, c) in coords.iter().enumerate() {
        let off = c
            .iter()
            .zip(&lo)
            .zip(&shape)
            .fold(0usize, |acc, ((x, l), s)| acc * s + (x - l) as usize);
        if off != i {
            bail!(
                "{}: line {} is out of row-major order",
                path.display(),
                i + 2
            );
        }
    }
    Ok((lo, shape, ys))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.with_context(|| format!("{}: line {}", path.display(), i + 2)))
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
