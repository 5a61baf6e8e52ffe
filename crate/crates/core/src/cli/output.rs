//! Data files with a metadata header.
//!
//! CSV files start with `# key = value` lines (the full config) followed by
//! `#! ` notes, a header row and the data. Floats use the shortest
//! representation that round-trips. JSON files carry the same information
//! under `metadata`; non-finite values become `null`.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, OutputFormat};
use crate::error::{Error, Result};

pub const GENERATOR: &str = concat!("vibmirror ", env!("CARGO_PKG_VERSION"));

/// One rectangular data set.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// A table plus the suffix appended to the output stem (empty for the main file).
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub suffix: String,
    pub table: Table,
}

impl OutputFile {
    pub fn main(table: Table) -> Self {
        Self {
            suffix: String::new(),
            table,
        }
    }

    pub fn named(suffix: &str, table: Table) -> Self {
        Self {
            suffix: suffix.into(),
            table,
        }
    }

    pub fn path(&self, stem: &str, format: OutputFormat) -> PathBuf {
        let sep = if self.suffix.is_empty() { "" } else { "_" };
        PathBuf::from(format!("{stem}{sep}{}.{}", self.suffix, format.extension()))
    }

    pub fn render(&self, cfg: &ExperimentConfig, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => render_csv(&self.table, cfg),
            OutputFormat::Json => render_json(&self.table, cfg),
        }
    }
}

fn render_csv(t: &Table, cfg: &ExperimentConfig) -> String {
    let mut out = format!("# generated by {GENERATOR}\n");
    for line in cfg.to_text().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for note in &t.notes {
        out.push_str("#! ");
        out.push_str(note);
        out.push('\n');
    }
    out.push_str(&t.columns.join(","));
    out.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn render_json(t: &Table, cfg: &ExperimentConfig) -> String {
    let config: Map<String, Value> = cfg
        .to_text()
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
        .collect();
    let rows: Vec<Value> = t
        .rows
        .iter()
        .map(|r| Value::Array(r.iter().copied().map(number).collect()))
        .collect();
    let doc = json!({
        "metadata": {
            "generator": GENERATOR,
            "config": config,
            "notes": t.notes,
        },
        "columns": t.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    s
}

/// Recover the config that produced an output file of either format.
pub fn config_from_output(text: &str) -> Result<ExperimentConfig> {
    if !text.trim_start().starts_with('{') {
        return ExperimentConfig::from_header(text);
    }
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("bad json output: {e}")))?;
    let map = doc["metadata"]["config"]
        .as_object()
        .ok_or_else(|| Error::Config("json output has no metadata.config".into()))?;
    let mut body = String::new();
    for (k, v) in map {
        let v = v
            .as_str()
            .ok_or_else(|| Error::Config(format!("metadata.config.{k} is not a string")))?;
        body.push_str(&format!("{k} = {v}\n"));
    }
    ExperimentConfig::parse(&body)
}

/// Write every file, creating parent directories. Returns the paths in order.
pub fn write_all(files: &[OutputFile], cfg: &ExperimentConfig, stem: &str, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(files.len());
    for f in files {
        let path = f.path(stem, format);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, f.render(cfg, format))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Output stem with any extension matching `format` removed.
pub fn normalize_stem(stem: &str, format: OutputFormat) -> String {
    let p = Path::new(stem);
    match p.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext == format.extension() => p.with_extension("").to_string_lossy().into_owned(),
        _ => stem.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(["q", "w"]);
        t.push(vec![0.1, 1.0 / 3.0]);
        t.push(vec![2.0, f64::NAN]);
        t.notes.push("q = 2: closed".into());
        t
    }

    #[test]
    fn csv_layout() {
        let cfg = ExperimentConfig::default();
        let s = render_csv(&table(), &cfg);
        assert!(s.starts_with("# generated by vibmirror "));
        assert!(s.contains("\n#! q = 2: closed\nq,w\n0.1,0.3333333333333333\n2.0,NaN\n"), "{s}");
        assert_eq!(config_from_output(&s).unwrap(), cfg);
    }

    #[test]
    fn json_layout() {
        let cfg = ExperimentConfig {
            name: "j".into(),
            ..Default::default()
        };
        let s = render_json(&table(), &cfg);
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["columns"], json!(["q", "w"]));
        assert_eq!(v["rows"][1], json!([2.0, null]));
        assert_eq!(v["rows"][0][1].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(config_from_output(&s).unwrap(), cfg);
    }

    #[test]
    fn paths() {
        let f = OutputFile::named("spectrum", table());
        assert_eq!(f.path("out/a", OutputFormat::Csv), PathBuf::from("out/a_spectrum.csv"));
        assert_eq!(OutputFile::main(table()).path("a", OutputFormat::Json), PathBuf::from("a.json"));
        assert_eq!(normalize_stem("x/run.csv", OutputFormat::Csv), "x/run");
        assert_eq!(normalize_stem("run.csv", OutputFormat::Json), "run.csv");
    }
}
