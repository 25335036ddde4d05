//! CSV exchange for min-plus fields: one-line header, 17 significant digits, `inf` for `+∞`.

use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::extended::ExtendedValue;
use crate::grid::{UniformGrid, VelocityGrid};
use crate::minplus::{MuField, PhaseField};
use crate::scalar::{lit, Real};

/// Formats a float with 17 significant digits.
pub fn fmt_float<T: Real>(x: T) -> String {
    format!("{x:.16e}")
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn write_mu_csv<T: Real>(field: &MuField<T>, mut out: impl Write) -> Result<()> {
    writeln!(out, "x,value").map_err(io_err)?;
    for (i, v) in field.values.iter().enumerate() {
        writeln!(out, "{},{v}", fmt_float(field.grid.node(i))).map_err(io_err)?;
    }
    Ok(())
}

pub fn write_phase_csv<T: Real>(field: &PhaseField<T>, mut out: impl Write) -> Result<()> {
    writeln!(out, "x,v,value").map_err(io_err)?;
    for i in 0..field.x.n {
        let x = fmt_float(field.x.node(i));
        for j in 0..field.v.n {
            writeln!(out, "{x},{},{}", fmt_float(field.v.node(j)), field.get(i, j)).map_err(io_err)?;
        }
    }
    Ok(())
}

fn rows(input: impl BufRead, header: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut lines = input.lines();
    let head = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?.map_err(io_err)?;
    let got: Vec<&str> = head.split(',').map(str::trim).collect();
    if got != header {
        return Err(Error::Parse(format!("expected header {:?}, got {head:?}", header.join(","))));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if cells.len() != header.len() {
            return Err(Error::Parse(format!("line {}: expected {} columns", k + 2, header.len())));
        }
        out.push(cells);
    }
    Ok(out)
}

fn num<T: Real + FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

fn value<T: Real + FromStr>(s: &str) -> Result<ExtendedValue<T>> {
    s.parse().map_err(Error::Parse)
}

/// Rebuilds a uniform grid from its listed nodes.
fn grid_from_nodes<T: Real>(nodes: &[T]) -> Result<UniformGrid<T>> {
    let (first, last) = match nodes {
        [a, .., b] => (*a, *b),
        _ => return Err(Error::Parse("need at least two grid nodes".into())),
    };
    let g = UniformGrid::new(first, last, nodes.len())?;
    let tol: T = lit(1e-9);
    for (i, x) in nodes.iter().enumerate() {
        if (g.node(i) - *x).abs() > tol * g.spacing() {
            return Err(Error::Parse(format!("node {i} at {x} is off the uniform grid")));
        }
    }
    Ok(g)
}

pub fn read_mu_csv<T: Real + FromStr>(input: impl BufRead) -> Result<MuField<T>> {
    let rows = rows(input, &["x", "value"])?;
    let xs: Vec<T> = rows.iter().map(|r| num(&r[0])).collect::<Result<_>>()?;
    let values = rows.iter().map(|r| value(&r[1])).collect::<Result<_>>()?;
    MuField::new(grid_from_nodes(&xs)?, values)
}

pub fn read_phase_csv<T: Real + FromStr>(input: impl BufRead) -> Result<PhaseField<T>> {
    let rows = rows(input, &["x", "v", "value"])?;
    let x0: String = rows.first().map(|r| r[0].clone()).unwrap_or_default();
    let nv = rows.iter().take_while(|r| r[0] == x0).count();
    if nv == 0 || rows.len() % nv != 0 {
        return Err(Error::Parse("rows must be x-major with a full velocity column per x".into()));
    }
    let nx = rows.len() / nv;
    let vs: Vec<T> = rows[..nv].iter().map(|r| num(&r[1])).collect::<Result<_>>()?;
    let xs: Vec<T> = (0..nx).map(|i| num(&rows[i * nv][0])).collect::<Result<_>>()?;
    for (k, r) in rows.iter().enumerate() {
        if r[0] != rows[(k / nv) * nv][0] || r[1] != rows[k % nv][1] {
            return Err(Error::Parse(format!("row {} breaks the x-major layout", k + 2)));
        }
    }
    let v = VelocityGrid::try_from(grid_from_nodes(&vs)?)?;
    let values = rows.iter().map(|r| value(&r[2])).collect::<Result<_>>()?;
    PhaseField::new(grid_from_nodes(&xs)?, v, values)
}
