#![allow(dead_code)]

use std::fs;
use std::path::Path;

use uhlmann_lab::{ExperimentConfig, ExperimentKind};

pub const SCHEMA_PREFIX: &str = "# uhlmann-lab csv v1 ";

/// A parsed output CSV.
pub struct Table {
    pub kind: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Table {
        let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let first = text.lines().next().expect("empty csv");
        let kind = first
            .strip_prefix(SCHEMA_PREFIX)
            .unwrap_or_else(|| panic!("{}: bad schema line {first:?}", path.display()))
            .split_whitespace()
            .next()
            .expect("schema kind")
            .to_string();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = rdr.headers().unwrap().iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        Table { kind, headers, rows }
    }

    pub fn column(&self, name: &str) -> Vec<&str> {
        let j = self
            .headers
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.headers));
        self.rows.iter().map(|r| r[j].as_str()).collect()
    }

    pub fn floats(&self, name: &str) -> Vec<f64> {
        self.column(name)
            .iter()
            .map(|s| s.parse().unwrap_or_else(|e| panic!("{name}={s:?}: {e}")))
            .collect()
    }
}

/// Preset on a 21 × 41 grid writing into `dir`.
pub fn small(kind: ExperimentKind, dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(kind);
    cfg.grid = [21, 41];
    cfg.output_dir = dir.to_path_buf();
    cfg
}
