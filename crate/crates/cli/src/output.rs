//! Flat-file artifacts: long-format CSV with a JSON sidecar, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use decaylab::evolution::{Propagator, WaveField};
use serde_json::{json, Value};

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    let io = |e: std::io::Error, p: &Path| format!("{}: {e}", p.display());
    let mut f = fs::File::create(&tmp).map_err(|e| io(e, &tmp))?;
    f.write_all(bytes).map_err(|e| io(e, &tmp))?;
    f.sync_all().map_err(|e| io(e, &tmp))?;
    fs::rename(&tmp, path).map_err(|e| io(e, path))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// A table with a documented header and per-column semantics.
pub struct Table {
    pub columns: Vec<(&'static str, &'static str, &'static str)>,
    pub rows: Vec<Vec<String>>,
    pub description: String,
}

impl Table {
    pub fn new(description: impl Into<String>, columns: &[(&'static str, &'static str, &'static str)]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new(), description: description.into() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, String> {
        let mut text = String::new();
        text.push_str(&self.columns.iter().map(|c| c.0).collect::<Vec<_>>().join(","));
        text.push('\n');
        for r in &self.rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        let csv = dir.join(format!("{stem}.csv"));
        write_atomic(&csv, text.as_bytes())?;
        let sidecar = dir.join(format!("{stem}.json"));
        let cols: Vec<Value> =
            self.columns.iter().map(|(n, u, m)| json!({"name": n, "units": u, "meaning": m})).collect();
        write_json(
            &sidecar,
            &json!({"file": format!("{stem}.csv"), "description": self.description, "rows": self.rows.len(), "columns": cols}),
        )?;
        Ok(vec![csv, sidecar])
    }
}

/// Long format: one row per (t, x).
pub fn field_table(field: &WaveField, stride: usize) -> Table {
    let complex = field.propagator == Propagator::Schrodinger;
    let mut cols = vec![
        ("t", "time", "evolution time"),
        ("x", "length", "station position (tortoise coordinate for Regge-Wheeler)"),
        ("value", "field", "Re psi(t, x)"),
        ("abs_value", "field", "|psi(t, x)|"),
    ];
    if complex {
        cols.push(("imag_value", "field", "Im psi(t, x)"));
    }
    let mut table = Table::new(format!("{:?} propagator; {}", field.propagator, field.provenance), &cols);
    let last = field.t.len().saturating_sub(1);
    // the final time is always kept so fit windows can reach it
    for (i, t) in field.t.iter().enumerate().filter(|(i, _)| i % stride.max(1) == 0 || *i == last) {
        for (j, x) in field.x.iter().enumerate() {
            let v = field.values[i][j];
            let mut row = vec![num(*t), num(*x), num(v.re), num(v.norm())];
            if complex {
                row.push(num(v.im));
            }
            table.push(row);
        }
    }
    table
}

/// Reads (t, x, value) triples from a long-format CSV.
pub fn read_series(path: &Path) -> Result<Vec<(f64, f64, f64)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| format!("{}: empty file", path.display()))?.split(',').collect();
    let col = |name: &str| {
        header.iter().position(|h| h.trim() == name).ok_or_else(|| format!("{}: missing column {name}", path.display()))
    };
    let (ct, cx, cv) = (col("t")?, col("x")?, col("value")?);
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let get = |c: usize| -> Result<f64, String> {
            cells
                .get(c)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| format!("{}: bad number on line {}", path.display(), k + 2))
        };
        out.push((get(ct)?, get(cx)?, get(cv)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::collections::BTreeMap;

    #[test]
    fn field_rows_and_round_trip() {
        let field = WaveField {
            propagator: Propagator::Sinc,
            t: vec![0.0, 1.0, 2.0],
            x: (0..5).map(|k| k as f64).collect(),
            values: (0..3).map(|i| (0..5).map(|j| Complex64::new(0.1 * (i * j) as f64 + 1.0 / 3.0, 0.0)).collect()).collect(),
            diagnostics: BTreeMap::new(),
            provenance: "test".into(),
        };
        let table = field_table(&field, 1);
        assert_eq!(table.rows.len(), 15);
        let dir = tempfile::tempdir().unwrap();
        table.write(dir.path(), "field").unwrap();
        let back = read_series(&dir.path().join("field.csv")).unwrap();
        assert_eq!(back.len(), 15);
        // 17 significant digits round-trip exactly
        assert_eq!(back[0].2, 1.0 / 3.0);
        assert!(dir.path().join("field.json").exists());
    }
}
