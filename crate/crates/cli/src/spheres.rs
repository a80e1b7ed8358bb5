//! Sphere table CSV.
//!
//! ```text
//! # lsmat-spheres/1
//! pin_index,cx,cy,r,iterations,converged
//! ```
//!
//! 3D tables add `cz` after `cy`. The schema line and header must match
//! exactly on read.

use lsmat::MedialResult;

use crate::error::CliError;

pub const SCHEMA: &str = "lsmat-spheres/1";

#[derive(Debug, Clone, PartialEq)]
pub struct SphereRow {
    pub pin_index: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereTable {
    pub dim: usize,
    pub rows: Vec<SphereRow>,
}

pub fn header(dim: usize) -> Vec<&'static str> {
    let mut h = vec!["pin_index", "cx", "cy"];
    if dim == 3 {
        h.push("cz");
    }
    h.extend(["r", "iterations", "converged"]);
    h
}

fn bad(e: impl std::fmt::Display) -> CliError {
    CliError::BadInput(format!("sphere CSV: {e}"))
}

pub fn to_csv<const D: usize>(result: &MedialResult<D>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writes into memory cannot fail
    w.write_record(header(D)).unwrap();
    for a in &result.atoms {
        let mut rec = vec![a.pin_index.to_string()];
        rec.extend(a.sphere.center.iter().map(|v| v.to_string()));
        rec.push(a.sphere.radius.to_string());
        rec.push(a.iterations_run.to_string());
        rec.push(a.converged.to_string());
        w.write_record(&rec).unwrap();
    }
    let body = String::from_utf8(w.into_inner().unwrap()).unwrap();
    format!("# {SCHEMA}\n{body}")
}

pub fn parse_csv(text: &str) -> Result<SphereTable, CliError> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let schema = first.trim_end().trim_start_matches('#').trim();
    if !first.starts_with('#') || schema != SCHEMA {
        return Err(bad(format!("schema mismatch: expected `{SCHEMA}`, found `{}`", first.trim_end())));
    }
    let mut rdr = csv::Reader::from_reader(rest.as_bytes());
    let found: Vec<String> = rdr.headers().map_err(bad)?.iter().map(str::to_owned).collect();
    let dim = [2, 3]
        .into_iter()
        .find(|&d| header(d) == found)
        .ok_or_else(|| bad(format!("unexpected columns `{}`", found.join(","))))?;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| field(i).parse::<f64>().map_err(|e| bad(format!("row {}: {e}", k + 1)));
        let int = |i: usize| field(i).parse::<usize>().map_err(|e| bad(format!("row {}: {e}", k + 1)));
        rows.push(SphereRow {
            pin_index: int(0)?,
            center: (1..=dim).map(num).collect::<Result<_, _>>()?,
            radius: num(dim + 1)?,
            iterations: int(dim + 2)?,
            converged: field(dim + 3)
                .parse::<bool>()
                .map_err(|e| bad(format!("row {}: {e}", k + 1)))?,
        });
    }
    Ok(SphereTable { dim, rows })
}
