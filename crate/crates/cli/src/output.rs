//! Plain-text matrices, PGM previews and the checksum manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `{:e}` prints the shortest representation that parses back to the same bits.
fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn matrix_csv(z: f64, rows: &[Vec<Option<f64>>]) -> String {
    let mut s = format!("# axis units: m\n# z = {z:e}\n");
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| cell(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn dense_rows(values: &[f64], cols: usize) -> Vec<Vec<Option<f64>>> {
    values.chunks(cols).map(|r| r.iter().map(|&v| Some(v)).collect()).collect()
}

/// Header lines (without `# `) and cells of a matrix file; empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMatrix {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn parse_matrix(text: &str) -> Result<CsvMatrix, String> {
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(h) = line.strip_prefix('#') {
            header.push(h.trim().to_string());
            continue;
        }
        let row = line
            .split(',')
            .map(|c| {
                let c = c.trim();
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some).map_err(|e| format!("line {}: `{c}`: {e}", n + 1))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(CsvMatrix { header, rows })
}

pub fn read_matrix(path: &Path) -> Result<CsvMatrix, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_matrix(&text)
}

/// Binary 8-bit PGM, rows top to bottom, gray level linear in value / max.
pub fn pgm(width: usize, values: &[f64]) -> Vec<u8> {
    let height = values.len() / width;
    let peak = values.iter().cloned().fold(0.0, f64::max);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| if peak > 0.0 { (255.0 * (v / peak).clamp(0.0, 1.0)).round() as u8 } else { 0 }));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files into one directory and records their checksums.
pub struct OutputDir {
    root: PathBuf,
    entries: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(CliError::io(root))?;
        Ok(Self { root: root.to_path_buf(), entries: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, data).map_err(CliError::io(&path))?;
        self.entries.push(FileEntry { path: name.to_string(), bytes: data.len() as u64, sha256: hex::encode(Sha256::digest(data)) });
        Ok(())
    }

    pub fn write_matrix(&mut self, name: &str, z: f64, rows: &[Vec<Option<f64>>]) -> Result<(), CliError> {
        self.write(name, matrix_csv(z, rows).as_bytes())
    }

    pub fn manifest(&self) -> Vec<FileEntry> {
        let mut m = self.entries.clone();
        m.sort_by(|a, b| a.path.cmp(&b.path));
        m
    }
}

pub fn table_csv(columns: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = format!("# {}\n", columns.join(","));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}
