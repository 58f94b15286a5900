//! Trajectory CSV: `t,u_<id>...,max_abs_u,l2_norm,J,N`, one row per sample.
//!
//! Numbers use Rust's shortest round-trip formatting, so reading a file back
//! reproduces every value bit for bit. J and N are `NaN` when ū ≠ 0.

use std::io::{Read, Write};
use std::path::Path;

use graphheat::{Graph, Trajectory};

use crate::error::{CliError, CliResult};

pub fn header(g: &Graph) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(g.ids().iter().map(|id| format!("u_{id}")));
    h.extend(["max_abs_u", "l2_norm", "J", "N"].map(String::from));
    h
}

pub fn write_trajectory<W: Write>(g: &Graph, traj: &Trajectory, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(g))?;
    for ((t, u), tr) in traj.times.iter().zip(&traj.states).zip(&traj.traces) {
        let mut row = Vec::with_capacity(u.len() + 5);
        row.push(t.to_string());
        row.extend(u.values().iter().map(f64::to_string));
        row.extend([tr.max_abs_u, tr.l2_norm, tr.j, tr.n].map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A numeric CSV held column-addressably.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read<R: Read>(input: R, origin: &Path) -> CliResult<Table> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r
            .headers()
            .map_err(|e| CliError::format(origin, e))?
            .iter()
            .map(String::from)
            .collect();
        if header.is_empty() || header.iter().all(|h| h.is_empty()) {
            return Err(CliError::format(origin, "empty CSV"));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| CliError::format(origin, e))?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::format(origin, format!("line {}: {e}", rows.len() + 2)))?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(CliError::format(origin, "CSV has no data rows"));
        }
        Ok(Table { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}
