//! Deterministic output formatting: 12-significant-digit numbers, CSV with
//! a header row, and a single-top-level-object JSON shape.

use std::fs;
use std::io::Write;
use std::path::Path;

use hmpzeta::{Error, Result};

/// Format with 12 significant digits, locale-free, '.' decimal separator.
/// Falls back to scientific notation outside a moderate exponent window so
/// the digit count stays meaningful.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.11e}", x)
    }
}

/// A CSV table with a fixed header, rendered deterministically.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "csv row arity mismatch");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Write to a file or stdout.
pub fn emit(content: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, content)
            .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| Error::Validation(format!("stdout: {e}")))
        }
    }
}

/// The JSON output shape: one top-level object with inputs, results and
/// warnings.
pub fn json_object(
    inputs: serde_json::Value,
    results: serde_json::Value,
    warnings: Vec<String>,
) -> String {
    let obj = serde_json::json!({
        "inputs": inputs,
        "results": results,
        "warnings": warnings,
    });
    let mut s = serde_json::to_string_pretty(&obj).expect("json serialization");
    s.push('\n');
    s
}
