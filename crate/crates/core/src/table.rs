//! Plain-text `(s, p, value)` tables used for user-supplied constants.
//!
//! Format: optional `#` comment lines, then one whitespace-separated row
//! `s p value` per line. Values are written with the shortest decimal form
//! that parses back to the identical `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub s: f64,
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IndexTable {
    pub entries: Vec<TableEntry>,
}

const SAME: f64 = 1e-12;

impl IndexTable {
    pub fn new(entries: Vec<TableEntry>) -> Self {
        Self { entries }
    }

    pub fn push(&mut self, s: f64, p: f64, value: f64) {
        self.entries.push(TableEntry { s, p, value });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self, value_name: &str) -> String {
        let mut out = format!("# s p {value_name}\n");
        for e in &self.entries {
            out.push_str(&format!("{} {} {}\n", e.s, e.p, e.value));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 3 {
                return Err(Error::InvalidSpec(format!(
                    "table line {}: expected 3 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |t: &str| {
                t.parse::<f64>().map_err(|e| {
                    Error::InvalidSpec(format!("table line {}: `{t}`: {e}", lineno + 1))
                })
            };
            entries.push(TableEntry {
                s: parse(cols[0])?,
                p: parse(cols[1])?,
                value: parse(cols[2])?,
            });
        }
        Ok(Self { entries })
    }

    /// Piecewise-linear lookup: linear in `s` along each tabulated `p` row,
    /// then linear in `1/p` between the two rows bracketing the query.
    /// Returns `None` outside the tabulated hull.
    pub fn lookup(&self, s: f64, p: f64) -> Option<f64> {
        let invp = 1.0 / p;
        let mut rows: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for e in &self.entries {
            let ip = 1.0 / e.p;
            match rows.iter_mut().find(|(r, _)| (r - ip).abs() <= SAME) {
                Some((_, pts)) => pts.push((e.s, e.value)),
                None => rows.push((ip, vec![(e.s, e.value)])),
            }
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, pts) in rows.iter_mut() {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        if let Some((_, pts)) = rows.iter().find(|(r, _)| (r - invp).abs() <= SAME) {
            return interpolate_row(pts, s);
        }
        let upper = rows.iter().position(|(r, _)| *r > invp)?;
        if upper == 0 {
            return None;
        }
        let (r0, p0) = &rows[upper - 1];
        let (r1, p1) = &rows[upper];
        let v0 = interpolate_row(p0, s)?;
        let v1 = interpolate_row(p1, s)?;
        let w = (invp - r0) / (r1 - r0);
        Some(v0 + w * (v1 - v0))
    }
}

fn interpolate_row(pts: &[(f64, f64)], s: f64) -> Option<f64> {
    if let Some(&(_, v)) = pts.iter().find(|(x, _)| (x - s).abs() <= SAME) {
        return Some(v);
    }
    let upper = pts.iter().position(|(x, _)| *x > s)?;
    if upper == 0 {
        return None;
    }
    let (s0, v0) = pts[upper - 1];
    let (s1, v1) = pts[upper];
    Some(v0 + (s - s0) / (s1 - s0) * (v1 - v0))
}
