use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{FieldSampler, Quantity};
use crate::error::{Error, Result};

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::validation(format!("{}: malformed CSV ({other:?})", path.display())),
    }
}

/// Writes a numeric table with 17 significant digits.
pub fn write_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::validation(format!("CSV row has {} values for {} columns", row.len(), header.len())));
        }
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a table written by [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// One structured grid read back from a legacy VTK file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkGrid {
    pub dims: [usize; 3],
    pub points: Vec<[f64; 3]>,
    pub scalars: Vec<(String, Vec<f64>)>,
    pub vectors: Vec<(String, Vec<[f64; 3]>)>,
}

/// Writes one legacy ASCII structured-grid file per patch,
/// `{stem}_patch{k}.vtk`, with `n` samples per parametric direction.
pub fn write_vtk(
    sampler: &FieldSampler<'_>,
    stem: impl AsRef<Path>,
    n: usize,
    quantities: &[(&str, Quantity)],
) -> Result<Vec<PathBuf>> {
    if n < 2 {
        return Err(Error::validation("VTK export needs at least 2 samples per direction"));
    }
    let stem = stem.as_ref();
    let mut written = Vec::new();
    for (k, patch) in sampler.solution().geometry().patches().iter().enumerate() {
        let d = patch.param_dim();
        let mut dims = [1; 3];
        dims[..d].fill(n);
        let count: usize = dims.iter().product();
        let mut params = Vec::with_capacity(count);
        for c in 0..dims[2] {
            for b in 0..dims[1] {
                for a in 0..dims[0] {
                    let t = [a, b, c];
                    params.push((0..d).map(|j| t[j] as f64 / (n - 1) as f64).collect::<Vec<f64>>());
                }
            }
        }
        let mut data = Vec::new();
        for (name, q) in quantities {
            match params.iter().map(|xi| sampler.sample_reference(k, xi, *q)).collect::<Result<Vec<_>>>() {
                Ok(v) => data.push((*name, v)),
                // single-patch fields skip the other patches
                Err(Error::Validation(_)) if sampler.locals[k].is_none() => {}
                Err(e) => return Err(e),
            }
        }
        if data.is_empty() && !quantities.is_empty() {
            continue;
        }
        let mut s = String::new();
        let _ = writeln!(s, "# vtk DataFile Version 3.0\nigakit patch {k}\nASCII\nDATASET STRUCTURED_GRID");
        let _ = writeln!(s, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
        let _ = writeln!(s, "POINTS {count} double");
        for xi in &params {
            let x = patch.eval_map(xi)?;
            let p: Vec<String> = (0..3).map(|c| format!("{:.16e}", x.get(c).copied().unwrap_or(0.0))).collect();
            let _ = writeln!(s, "{}", p.join(" "));
        }
        let _ = writeln!(s, "POINT_DATA {count}");
        for (name, values) in &data {
            if values.first().is_some_and(|v| v.len() == 1) {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in values {
                    let _ = writeln!(s, "{:.16e}", v[0]);
                }
            } else {
                let _ = writeln!(s, "VECTORS {name} double");
                for v in values {
                    let p: Vec<String> = (0..3).map(|c| format!("{:.16e}", v.get(c).copied().unwrap_or(0.0))).collect();
                    let _ = writeln!(s, "{}", p.join(" "));
                }
            }
        }
        let file_name =
            format!("{}_patch{k}.vtk", stem.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default());
        let path = stem.with_file_name(file_name);
        fs::write(&path, s).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Parses and validates a legacy ASCII structured-grid file.
pub fn parse_vtk(text: &str) -> Result<VtkGrid> {
    let bad = |msg: &str| Error::validation(format!("invalid VTK file: {msg}"));
    let mut lines = text.lines();
    if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile Version")) {
        return Err(bad("missing version line"));
    }
    lines.next().ok_or_else(|| bad("missing title"))?;
    if lines.next().map(str::trim) != Some("ASCII") {
        return Err(bad("only ASCII files are supported"));
    }
    if lines.next().map(str::trim) != Some("DATASET STRUCTURED_GRID") {
        return Err(bad("expected DATASET STRUCTURED_GRID"));
    }
    let mut tokens = lines.flat_map(str::split_whitespace).peekable();
    let mut next = || tokens.next().ok_or_else(|| bad("unexpected end of file"));
    let mut grid = VtkGrid::default();
    if next()? != "DIMENSIONS" {
        return Err(bad("expected DIMENSIONS"));
    }
    for d in &mut grid.dims {
        *d = next()?.parse().map_err(|_| bad("bad dimension"))?;
    }
    let count: usize = grid.dims.iter().product();
    if next()? != "POINTS" || next()?.parse::<usize>().ok() != Some(count) {
        return Err(bad("POINTS count does not match DIMENSIONS"));
    }
    next()?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
    for _ in 0..count {
        grid.points.push([num(next()?)?, num(next()?)?, num(next()?)?]);
    }
    match next() {
        Ok("POINT_DATA") => {
            if next()?.parse::<usize>().ok() != Some(count) {
                return Err(bad("POINT_DATA count does not match DIMENSIONS"));
            }
        }
        Ok(_) => return Err(bad("expected POINT_DATA")),
        Err(_) => return Ok(grid),
    }
    while let Ok(kind) = next() {
        let name = next()?.to_owned();
        next()?;
        match kind {
            "SCALARS" => {
                if next()? != "1" || next()? != "LOOKUP_TABLE" {
                    return Err(bad("expected one-component scalars with a lookup table"));
                }
                next()?;
                let v = (0..count).map(|_| num(next()?)).collect::<Result<Vec<_>>>()?;
                grid.scalars.push((name, v));
            }
            "VECTORS" => {
                let v = (0..count)
                    .map(|_| Ok([num(next()?)?, num(next()?)?, num(next()?)?]))
                    .collect::<Result<Vec<_>>>()?;
                grid.vectors.push((name, v));
            }
            other => return Err(bad(&format!("unsupported section {other}"))),
        }
    }
    Ok(grid)
}
