//! Reading comma-separated tables.
//!
//! The first line names the columns; every later line is a row. `?` marks a
//! missing value. A field that does not parse in a numeric column is logged
//! and kept as missing.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use lite_core::{Dataset, Header, Row};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("no header line")]
    Empty,
    #[error("bad header: {0}")]
    Header(lite_core::Error),
    #[error("line {line}: {source}")]
    Row { line: u64, source: lite_core::Error },
}

/// Parses a table from any reader. Row ids are 0-based positions.
pub fn read<R: Read>(reader: R) -> Result<Dataset, LoadError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();
    let names = records.next().ok_or(LoadError::Empty)??;
    let names: Vec<&str> = names.iter().collect();
    let header = Header::parse(&names).map_err(LoadError::Header)?;
    let mut data = Dataset::new(header);
    for (id, record) in records.enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let cells = record
            .iter()
            .zip(data.header().columns())
            .map(|(text, col)| {
                col.cell(text).unwrap_or_else(|bad| {
                    log::warn!("line {line}: `{bad}` in numeric column {} read as missing", col.name);
                    lite_core::Cell::Missing
                })
            })
            .collect::<Vec<_>>();
        if record.len() != data.header().len() {
            let source = lite_core::Error::Arity {
                expected: data.header().len(),
                found: record.len(),
            };
            return Err(LoadError::Row { line, source });
        }
        data.add(Row::new(id, cells))
            .map_err(|source| LoadError::Row { line, source })?;
    }
    Ok(data)
}

pub fn parse_str(text: &str) -> Result<Dataset, LoadError> {
    read(text.as_bytes())
}

pub fn load(path: &Path) -> Result<Dataset, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read(std::io::BufReader::new(file))
}

/// The dataset name a path stands for: its file stem.
pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// `.csv` files under `path` (not recursive) sorted by name, or `path`
/// itself when it is a file.
pub fn csv_files(path: &Path) -> std::io::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    Ok(files)
}
