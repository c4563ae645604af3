//! Output tables: `#`-prefixed metadata lines followed by delimiter-separated
//! rows with a header. Files are replaced atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{AppError, Result};

/// Ordered `key: value` pairs written as `# key: value`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    /// Producer, command, effective configuration and its hash.
    pub fn for_run(command: &str, cfg: &RunConfig) -> Self {
        let mut m = Metadata::default();
        m.push("producer", format!("qalloc {}", env!("CARGO_PKG_VERSION")));
        m.push("command", command);
        m.push("rerun", format!("qalloc {command} --config <file holding the config line below>"));
        m.push("config_sha256", cfg.sha256());
        m.push("config", cfg.canonical_json());
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string().replace('\n', " ")));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: ToString>(header: &[S]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell `name` of row `r` parsed as `f64`.
    pub fn number(&self, r: usize, name: &str) -> Result<f64> {
        let c = self.column(name).ok_or_else(|| AppError::Format(format!("table has no column '{name}'")))?;
        let cell = &self.rows[r][c];
        cell.parse().map_err(|_| AppError::Parse { row: r + 1, column: name.into(), value: cell.clone() })
    }
}

/// Shortest decimal that parses back to `v`.
pub fn num(v: f64) -> String {
    v.to_string()
}

pub fn render(meta: &Metadata, table: &Table) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (k, v) in &meta.entries {
        writeln!(out, "# {k}: {v}").expect("write to vec");
    }
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| AppError::io("<table>", e))?;
    drop(w);
    Ok(out)
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let name = path.file_name().ok_or_else(|| AppError::Format(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| AppError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        AppError::io(path, e)
    })
}

pub fn write_table(path: &Path, meta: &Metadata, table: &Table) -> Result<()> {
    write_atomic(path, &render(meta, table)?)
}

pub fn parse_table(text: &str) -> Result<(Metadata, Table)> {
    let mut meta = Metadata::default();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix('#') {
            Some(rest) => {
                let rest = rest.trim_start();
                let (k, v) = rest.split_once(": ").unwrap_or((rest, ""));
                meta.entries.push((k.to_string(), v.to_string()));
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header = rdr.headers()?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    Ok((meta, Table { header, rows }))
}

/// Reads a table written by `producer`; a missing file names the command
/// that creates it.
pub fn read_table(path: &Path, producer: &str) -> Result<(Metadata, Table)> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            AppError::MissingArtifact { path: path.to_path_buf(), hint: format!("run `qalloc {producer}` first") }
        } else {
            AppError::io(path, e)
        }
    })?;
    parse_table(&text)
}
