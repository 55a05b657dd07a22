//! CSV and JSON report emission. CSV cells use `.` as the decimal
//! separator, 17 significant digits and LF line endings; identical inputs
//! and seed produce byte-identical files.

use std::fs;
use std::path::Path;

use ftl_core::io::fmt_f64;
use serde_json::Value;

pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            lines: vec![columns.join(",")],
        }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        self.lines.push(
            cells
                .iter()
                .map(|c| c.render())
                .collect::<Vec<_>>()
                .join(","),
        );
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut out = self.lines.join("\n");
        out.push('\n');
        fs::write(path, out)
    }
}

pub enum Cell {
    Str(String),
    Num(f64),
    Int(i64),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Num(v) => {
                if v.is_nan() {
                    "nan".to_string()
                } else {
                    fmt_f64(*v)
                }
            }
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => if *b { "1" } else { "0" }.to_string(),
        }
    }
}

pub fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    fs::write(path, text)
}
