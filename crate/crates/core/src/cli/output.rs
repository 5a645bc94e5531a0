//! Serialization of command results: a JSON envelope carrying
//! reproducibility metadata, plot-ready CSV with the fixed columns
//! `quantity, r, value, error, method, flag`, and an aligned text table.

use std::io::Write;

use serde::Serialize;

use super::config::Format;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV/table line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub r: Option<f64>,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub method: String,
    pub flag: String,
}

impl Row {
    pub fn new(quantity: impl Into<String>, r: Option<f64>, value: Option<f64>, error: Option<f64>) -> Self {
        Row {
            quantity: quantity.into(),
            r,
            value,
            error,
            method: String::new(),
            flag: String::new(),
        }
    }

    pub fn method(mut self, m: impl Into<String>) -> Self {
        self.method = m.into();
        self
    }

    pub fn flag(mut self, f: impl Into<String>) -> Self {
        self.flag = f.into();
        self
    }
}

/// Result of a command, ready to serialize.
pub struct Outcome<T: Serialize> {
    pub command: &'static str,
    pub exit_code: i32,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub result: T,
    pub rows: Vec<Row>,
    /// Free-text lines appended below the table.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_hash: &'a Option<String>,
    seed: Option<u64>,
    exit_code: i32,
    result: &'a T,
}

impl<T: Serialize> Outcome<T> {
    pub fn to_json(&self) -> Result<String> {
        let env = Envelope {
            tool: "cusplab",
            version: VERSION,
            command: self.command,
            config_hash: &self.config_hash,
            seed: self.seed,
            exit_code: self.exit_code,
            result: &self.result,
        };
        let mut s = serde_json::to_string_pretty(&env).map_err(|e| std::io::Error::other(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["quantity", "r", "value", "error", "method", "flag"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.quantity.clone(),
                num(r.r),
                num(r.value),
                num(r.error),
                r.method.clone(),
                r.flag.clone(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_table(&self) -> String {
        let header = ["quantity", "r", "value", "error", "method", "flag"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.quantity.clone(),
                    short(r.r),
                    short(r.value),
                    short(r.error),
                    r.method.clone(),
                    r.flag.clone(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for c in &cells {
            for (w, s) in widths.iter_mut().zip(c) {
                *w = (*w).max(s.chars().count());
            }
        }
        let line = |c: &[String]| {
            let mut s = String::new();
            for (i, (v, w)) in c.iter().zip(widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let pad = w - v.chars().count();
                if (1..=3).contains(&i) {
                    s.push_str(&" ".repeat(pad));
                    s.push_str(v);
                } else {
                    s.push_str(v);
                    s.push_str(&" ".repeat(pad));
                }
            }
            s.trim_end().to_string()
        };
        let mut out = format!(
            "cusplab {VERSION} {}{}\n",
            self.command,
            self.seed.map(|s| format!(" (seed {s})")).unwrap_or_default()
        );
        out.push_str(&line(&header.map(String::from)));
        out.push('\n');
        for c in &cells {
            out.push_str(&line(c));
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str("* ");
            out.push_str(n);
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Table => Ok(self.to_table()),
        }
    }

    pub fn write(&self, format: Format, mut w: impl Write) -> Result<()> {
        w.write_all(self.render(format)?.as_bytes())?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

/// Shortest round-trip representation; empty when absent.
fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn short(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x == 0.0 => "0".into(),
        Some(x) if (1e-3..1e5).contains(&x.abs()) => format!("{x:.10}").trim_end_matches('0').trim_end_matches('.').to_string(),
        Some(x) => format!("{x:.6e}"),
    }
}
