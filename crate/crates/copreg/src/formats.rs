//! CSV and JSON file formats.
//!
//! All floating-point numbers are written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use copreg_core::regression::StepFunction1D;
use copreg_core::simulation::{BoxplotRow, ErrorTable};
use copreg_core::{CheckerboardGrid, RankedSample};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSidecar {
    dim: usize,
    #[serde(rename = "N")]
    n: usize,
}

/// `grid.csv -> grid.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Grid CSV `i,j[,k],mass` (1-based, lexicographic) plus the `{dim, N}` sidecar.
pub fn grid_csv(grid: &CheckerboardGrid) -> String {
    let n = grid.resolution();
    let mut out = String::from(if grid.dim() == 2 { "i,j,mass\n" } else { "i,j,k,mass\n" });
    for (flat, m) in grid.masses().iter().enumerate() {
        let mut idx = Vec::with_capacity(grid.dim());
        let mut rest = flat;
        for _ in 0..grid.dim() {
            idx.push(rest % n + 1);
            rest /= n;
        }
        idx.reverse();
        for i in idx {
            write!(out, "{i},").unwrap();
        }
        writeln!(out, "{}", num(*m)).unwrap();
    }
    out
}

pub fn write_grid(path: &Path, grid: &CheckerboardGrid) -> CliResult<()> {
    write_file(path, &grid_csv(grid))?;
    let sidecar = GridSidecar { dim: grid.dim(), n: grid.resolution() };
    write_file(&sidecar_path(path), &(serde_json::to_string(&sidecar).expect("plain struct") + "\n"))
}

pub fn read_grid(path: &Path) -> CliResult<CheckerboardGrid> {
    let side_path = sidecar_path(path);
    let sidecar: GridSidecar = serde_json::from_str(&read_file(&side_path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", side_path.display())))?;
    let (dim, n) = (sidecar.dim, sidecar.n);
    if !(2..=3).contains(&dim) || n == 0 {
        return Err(CliError::Config(format!("{}: need dim in {{2, 3}} and N >= 1", side_path.display())));
    }
    let text = read_file(path)?;
    let bad = |line: usize, msg: &str| CliError::Config(format!("{}:{line}: {msg}", path.display()));
    let mut lines = text.lines().enumerate();
    let expected = if dim == 2 { "i,j,mass" } else { "i,j,k,mass" };
    match lines.next() {
        Some((_, h)) if h.trim() == expected => {}
        _ => return Err(bad(1, &format!("expected header `{expected}`"))),
    }
    let mut mass = vec![f64::NAN; n.pow(dim as u32)];
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim + 1 {
            return Err(bad(lineno + 1, "wrong number of fields"));
        }
        let mut flat = 0;
        for f in &fields[..dim] {
            let i: usize = f.parse().map_err(|_| bad(lineno + 1, "cell index is not an integer"))?;
            if i == 0 || i > n {
                return Err(bad(lineno + 1, "cell index out of range"));
            }
            flat = flat * n + (i - 1);
        }
        mass[flat] = fields[dim].parse().map_err(|_| bad(lineno + 1, "mass is not a number"))?;
    }
    if mass.iter().any(|m| m.is_nan()) {
        return Err(CliError::Config(format!("{}: not every cell is listed", path.display())));
    }
    Ok(CheckerboardGrid::from_masses(dim, n, mass)?)
}

/// `i,j,density` with density `N^2 * mass`.
pub fn density_csv(grid: &CheckerboardGrid) -> String {
    let n = grid.resolution();
    let mut out = String::from("i,j,density\n");
    for (flat, d) in grid.density().iter().enumerate() {
        writeln!(out, "{},{},{}", flat / n + 1, flat % n + 1, num(*d)).unwrap();
    }
    out
}

pub fn step_csv(step: &StepFunction1D) -> String {
    let mut out = String::from("piece_index,left,right,value\n");
    for (i, v) in step.values().iter().enumerate() {
        let (l, r) = step.piece_bounds(i);
        writeln!(out, "{},{},{},{}", i + 1, num(l), num(r), num(*v)).unwrap();
    }
    out
}

pub fn xy_csv(header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{header}\n");
    for (x, v) in rows {
        writeln!(out, "{},{}", num(x), num(v)).unwrap();
    }
    out
}

pub fn errors_csv(table: &ErrorTable) -> String {
    let mut out = String::from("n,rep,estimator,tau,N,l1_error,seconds\n");
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            r.rep,
            r.estimator.name(),
            opt_num(r.estimator.tau()),
            r.n_cells,
            num(r.l1_error),
            num(r.seconds)
        )
        .unwrap();
    }
    out
}

pub fn boxplot_csv(rows: &[BoxplotRow]) -> String {
    let mut out = String::from("n,estimator,tau,min,q1,median,q3,max,mean\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.estimator.name(),
            opt_num(r.estimator.tau()),
            num(r.min),
            num(r.q1),
            num(r.median),
            num(r.q3),
            num(r.max),
            num(r.mean)
        )
        .unwrap();
    }
    out
}

/// Two-column sample `x,y`; a non-numeric first line is taken as a header.
pub fn parse_sample(path: &Path) -> CliResult<Vec<[f64; 2]>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if lineno == 0 => continue,
            Err(_) => return Err(CliError::Config(format!("{}:{}: not a number", path.display(), lineno + 1))),
        };
        if values.len() != 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("{}:{}: expected two finite columns", path.display(), lineno + 1)));
        }
        out.push([values[0], values[1]]);
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("{}: sample is empty", path.display())));
    }
    Ok(out)
}

/// Column ranks of raw data, ties broken by row order.
pub fn rank_columns(rows: &[[f64; 2]]) -> CliResult<RankedSample> {
    let n = rows.len();
    let ranks = (0..2)
        .map(|k| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| rows[a][k].total_cmp(&rows[b][k]));
            let mut r = vec![0; n];
            for (pos, idx) in order.into_iter().enumerate() {
                r[idx] = pos + 1;
            }
            r
        })
        .collect();
    Ok(RankedSample::new(ranks)?)
}
