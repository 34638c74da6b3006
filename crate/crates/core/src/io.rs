//! Delimited-text helpers shared by the file formats.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

/// A parse failure with a 1-based line and column (0 when unknown).
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: u64,
    pub column: u64,
    pub message: String,
}

impl ParseError {
    pub fn new(line: u64, column: u64, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }

    pub fn from_csv(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        let column = match err.kind() {
            csv::ErrorKind::Deserialize { err, .. } => err.field().map(|f| f + 1).unwrap_or(0),
            _ => 0,
        };
        let message = match err.kind() {
            csv::ErrorKind::Deserialize { err, .. } => err.kind().to_string(),
            _ => err.to_string(),
        };
        Self { line, column, message }
    }
}

/// Reads every record of a headered CSV into `T`.
pub fn read_csv<T: DeserializeOwned, R: Read>(reader: R) -> Result<Vec<T>, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(ParseError::from_csv)?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(ParseError::from_csv)?;
        match rec.deserialize::<T>(Some(&headers)) {
            Ok(t) => out.push(t),
            Err(e) => {
                let mut pe = ParseError::from_csv(e);
                if pe.column == 0 {
                    pe.column = locate_column::<T>(&headers, &rec);
                }
                return Err(pe);
            }
        }
    }
    Ok(out)
}

// csv only knows the column for its own scalar errors. For custom ones
// (enums, dates) find the shortest prefix of columns that already fails
// for a reason other than the columns still missing.
fn locate_column<T: DeserializeOwned>(headers: &csv::StringRecord, rec: &csv::StringRecord) -> u64 {
    for k in 1..=rec.len().min(headers.len()) {
        let h: csv::StringRecord = headers.iter().take(k).collect();
        let r: csv::StringRecord = rec.iter().take(k).collect();
        if let Err(e) = r.deserialize::<T>(Some(&h)) {
            if !e.to_string().contains("missing field") {
                return k as u64;
            }
        }
    }
    0
}

pub fn write_csv<T: Serialize, W: Write>(writer: W, rows: &[T]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(row).map_err(std::io::Error::other)?;
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, serde::Deserialize, PartialEq)]
    struct Row {
        a: u32,
        b: f64,
    }

    #[test]
    fn reports_line_and_column() {
        let text = "a,b\n1,2.5\n3,oops\n";
        let err = read_csv::<Row, _>(text.as_bytes()).unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.column, 2);
    }

    #[test]
    fn reads_rows() {
        let rows: Vec<Row> = read_csv("a, b\n1, 2.5\n".as_bytes()).unwrap();
        assert_eq!(rows, vec![Row { a: 1, b: 2.5 }]);
    }
}
