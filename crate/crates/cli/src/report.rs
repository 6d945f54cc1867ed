//! CSV and JSON output for experiment reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("encoding {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("encoding {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// A flat table with a fixed column order.
pub trait Table {
    type Row: Serialize;
    const HEADER: &'static [&'static str];
    fn rows(&self) -> &[Self::Row];
}

/// Renders a table as CSV. An empty table still gets its header.
pub fn to_csv<T: Table>(table: &T) -> Result<String, csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for row in table.rows() {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema_version: u32,
    kind: &'a str,
    report: &'a R,
}

pub fn to_json<R: Serialize>(kind: &str, report: &R) -> Result<String, serde_json::Error> {
    serde_json::to_string_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        kind,
        report,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    let io = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}

pub fn write_csv<T: Table>(path: &Path, table: &T) -> Result<(), ReportError> {
    let text = to_csv(table).map_err(|source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    write_file(path, &text)
}

pub fn write_json<R: Serialize>(path: &Path, kind: &str, report: &R) -> Result<(), ReportError> {
    let text = to_json(kind, report).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: u32,
        b: String,
    }

    struct Rows(Vec<Row>);

    impl Table for Rows {
        type Row = Row;
        const HEADER: &'static [&'static str] = &["a", "b"];
        fn rows(&self) -> &[Row] {
            &self.0
        }
    }

    #[test]
    fn csv_with_and_without_rows() {
        assert_eq!(to_csv(&Rows(vec![])).unwrap(), "a,b\n");
        let t = Rows(vec![Row { a: 1, b: "x,y".into() }]);
        assert_eq!(to_csv(&t).unwrap(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn json_envelope() {
        let v: serde_json::Value = serde_json::from_str(&to_json("demo", &vec![1, 2]).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["kind"], "demo");
        assert_eq!(v["report"][1], 2);
    }

    #[test]
    fn files_report_their_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/t.csv");
        write_csv(&p, &Rows(vec![])).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "a,b\n");
        let bad = p.join("x.json");
        let err = write_json(&bad, "demo", &1).unwrap_err();
        assert!(err.to_string().contains("t.csv"));
    }
}
