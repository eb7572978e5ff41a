//! CSV export and import.
//!
//! Every number is written with 17 significant digits (`{:.16e}`), which is
//! enough to read back the identical `f64`.

use anyhow::Context;
use forge_core::{RadialGrid, SampledField};

use crate::config::ConfigError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns sharing the grid's `r` column.
pub fn write_columns(grid: &RadialGrid, names: &[String], columns: &[&[f64]]) -> String {
    debug_assert_eq!(names.len(), columns.len());
    let mut out = String::with_capacity(grid.len() * 24 * (columns.len() + 1));
    out.push('r');
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, r) in grid.nodes().enumerate() {
        out.push_str(&num(r));
        for col in columns {
            out.push(',');
            out.push_str(&num(col[i]));
        }
        out.push('\n');
    }
    out
}

/// `r,V`.
pub fn potential(v: &SampledField) -> String {
    write_columns(v.grid(), &["V".into()], &[v.values()])
}

/// `r,phi,dphi`.
pub fn solution(phi: &SampledField) -> String {
    write_columns(
        phi.grid(),
        &["phi".into(), "dphi".into()],
        &[phi.values(), phi.derivs()],
    )
}

/// Parsed CSV table: header names after `r`, the `r` column, then data
/// columns.
#[derive(Debug)]
pub struct Table {
    pub names: Vec<String>,
    pub r: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

fn schema(msg: String) -> anyhow::Error {
    ConfigError(msg).into()
}

pub fn read(path: &std::path::Path) -> anyhow::Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).map_err(|e| schema(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<Table, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or("empty file")?;
    let mut names = header.split(',').map(|s| s.trim().to_string());
    if names.next().as_deref() != Some("r") {
        return Err(format!("first column must be r, header is {header:?}"));
    }
    let names: Vec<String> = names.collect();
    let mut r = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(format!(
                "line {}: expected {} fields, found {}",
                lineno + 1,
                names.len() + 1,
                fields.len()
            ));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("line {}: {s:?}: {e}", lineno + 1))
        };
        r.push(parse(fields[0])?);
        for (col, field) in columns.iter_mut().zip(&fields[1..]) {
            col.push(parse(field)?);
        }
    }
    Ok(Table { names, r, columns })
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.columns[k].as_slice())
    }

    /// The uniform grid the `r` column was sampled on.
    pub fn grid(&self) -> anyhow::Result<RadialGrid> {
        let n = self.r.len();
        if n < 3 {
            return Err(schema(format!("{n} rows are too few for a grid")));
        }
        let grid = RadialGrid::new(self.r[0], self.r[n - 1], n).map_err(|e| schema(e.to_string()))?;
        let tol = 1e-9 * grid.step();
        if let Some((i, r)) = grid
            .nodes()
            .zip(&self.r)
            .enumerate()
            .find_map(|(i, (x, r))| ((x - r).abs() > tol).then_some((i, *r)))
        {
            return Err(schema(format!("r column is not uniform: row {i} has r = {r}")));
        }
        Ok(grid)
    }
}
