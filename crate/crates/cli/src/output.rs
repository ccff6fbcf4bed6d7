//! CSV artifacts with `#` metadata headers, content hashes and the run manifest.

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn sha256_hex(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    let mut s = String::with_capacity(64);
    for b in d.iter() {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

/// One output table. Values are written with Rust's shortest round-trip
/// formatting, so identical numbers always give identical bytes.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(file: &str, columns: &[&str]) -> Table {
        Table { file: file.into(), meta: vec![], columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, header: &[(String, String)]) -> String {
        let mut s = String::new();
        for (k, v) in header.iter().chain(&self.meta) {
            writeln!(s, "# {k}: {v}").unwrap();
        }
        writeln!(s, "# columns: {}", self.columns.join(", ")).unwrap();
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

/// Read a two-column curve (`# columns: freq_Hz, value`), skipping `#` lines.
pub fn read_curve(path: &Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let (mut x, mut y) = (vec![], vec![]);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("{}:{}: not a number '{s}'", path.display(), i + 1));
        if cells.len() < 2 {
            return Err(format!("{}:{}: expected two columns", path.display(), i + 1));
        }
        x.push(num(cells[0])?);
        y.push(num(cells[1])?);
    }
    Ok((x, y))
}

#[derive(Debug, Default)]
pub struct Manifest {
    pub timings: Vec<(String, f64)>,
    /// One entry per solved point: label, phonon cut-off, top-level population.
    pub truncation: Vec<(String, usize, f64)>,
    pub results: serde_json::Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn to_json(
        &self,
        experiment: &str,
        config_hash: &str,
        params_hash: &str,
        power_axis: &str,
        artifacts: &[PathBuf],
        extra: Value,
    ) -> Value {
        json!({
            "experiment": experiment,
            "config_hash": config_hash,
            "params_hash": params_hash,
            "power_axis": power_axis,
            "versions": { "cqad": cqad::VERSION, "cqad-cli": env!("CARGO_PKG_VERSION") },
            "settings": extra,
            "timings_s": self.timings.iter().map(|(k, t)| json!({ "step": k, "seconds": t })).collect::<Vec<_>>(),
            "truncation_audit": self.truncation.iter()
                .map(|(k, n, tail)| json!({ "point": k, "fock_phonon": n, "top_level_population": tail }))
                .collect::<Vec<_>>(),
            "results": Value::Object(self.results.clone()),
            "warnings": self.warnings,
            "artifacts": artifacts.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn render_and_read_back() {
        let mut t = Table::new("x.csv", &["freq_Hz", "value"]);
        t.meta("variant", "simplified");
        t.push(vec![6.064e9, 0.25]);
        t.push(vec![6.065e9, f64::NAN]);
        let s = t.render(&[("config_hash".into(), "00".into())]);
        assert!(s.starts_with("# config_hash: 00\n# variant: simplified\n# columns: freq_Hz, value\n"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, &s).unwrap();
        let (x, y) = read_curve(&p).unwrap();
        assert_eq!(x, vec![6.064e9, 6.065e9]);
        assert_eq!(y[0], 0.25);
        assert!(y[1].is_nan());
    }
}
