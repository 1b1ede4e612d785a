//! CSV output. Every file starts with `#` lines describing the run that
//! produced it; the body is plain RFC 4180 CSV.

use std::io::Write;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// Fixture name or config path.
    pub source: String,
    pub params: Vec<(String, String)>,
    pub version: String,
    pub wall_clock_s: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, source: &str) -> Self {
        Self {
            command: command.into(),
            source: source.into(),
            params: Vec::new(),
            version: env!("CARGO_PKG_VERSION").into(),
            wall_clock_s: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn header_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# command: {}", self.command),
            format!("# source: {}", self.source),
            format!("# version: {}", self.version),
        ];
        out.extend(self.params.iter().map(|(k, v)| format!("# {k}: {v}")));
        if let Some(t) = self.wall_clock_s {
            out.push(format!("# wall_clock_s: {t:.3}"));
        }
        out
    }
}

/// A CSV table with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Body only (header row and records), without the manifest.
    pub fn body(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn write(&self, manifest: &RunManifest, out: &mut dyn Write) -> Result<()> {
        for line in manifest.header_lines() {
            writeln!(out, "{line}")?;
        }
        out.write_all(self.body()?.as_bytes())?;
        Ok(())
    }
}

/// Shortest round-trip rendering of a float; `NaN` and infinities as words.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Strip `#` lines, leaving the CSV body.
pub fn strip_manifest(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}
