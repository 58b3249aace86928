//! Strict reader for observation streams: one row per time step, one
//! numeric column per panel, optional header row.

use crate::error::{CliError, Result};
use csv::{ReaderBuilder, StringRecord, Trim};
use std::io::Read;

pub struct StreamReader<R: Read> {
    records: csv::StringRecordsIntoIter<R>,
    source_name: String,
    header: Option<Vec<String>>,
    pending: Option<(u64, Vec<f64>)>,
    width: Option<usize>,
}

fn is_number(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

impl<R: Read> StreamReader<R> {
    /// Reads up to the first data row, consuming a header row if present.
    pub fn new(input: R, source_name: impl Into<String>) -> Result<Self> {
        let records = ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(Trim::All)
            .from_reader(input)
            .into_records();
        let mut reader = Self {
            records,
            source_name: source_name.into(),
            header: None,
            pending: None,
            width: None,
        };
        if let Some((row, record)) = reader.next_record()? {
            if record.iter().all(|c| !is_number(c)) {
                reader.header = Some(record.iter().map(str::to_string).collect());
                reader.width = Some(record.len());
            } else {
                let values = reader.parse(row, &record)?;
                reader.width = Some(values.len());
                reader.pending = Some((row, values));
            }
        }
        Ok(reader)
    }

    pub fn header(&self) -> Option<&[String]> {
        self.header.as_deref()
    }

    /// Column count of the header or first data row; `None` for empty input.
    pub fn width(&self) -> Option<usize> {
        self.width
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    /// Requires every row to carry exactly `n` columns.
    pub fn expect_width(&mut self, n: usize) -> Result<()> {
        match (self.width, &self.pending, &self.header) {
            (Some(w), Some((row, _)), None) if w != n => Err(self.width_error(*row, n, w)),
            (Some(w), _, Some(_)) if w != n => Err(self.width_error(1, n, w)),
            _ => {
                self.width = Some(n);
                Ok(())
            }
        }
    }

    fn width_error(&self, row: u64, expected: usize, got: usize) -> CliError {
        CliError::Width {
            source_name: self.source_name.clone(),
            row,
            expected,
            got,
        }
    }

    fn next_record(&mut self) -> Result<Option<(u64, StringRecord)>> {
        match self.records.next() {
            None => Ok(None),
            Some(Ok(record)) => {
                let row = record.position().map_or(0, |p| p.line());
                Ok(Some((row, record)))
            }
            Some(Err(e)) => {
                let row = e.position().map_or(0, |p| p.line());
                Err(CliError::Cell {
                    source_name: self.source_name.clone(),
                    row,
                    column: 0,
                    message: e.to_string(),
                })
            }
        }
    }

    fn parse(&self, row: u64, record: &StringRecord) -> Result<Vec<f64>> {
        if let Some(w) = self.width {
            if record.len() != w {
                return Err(self.width_error(row, w, record.len()));
            }
        }
        record
            .iter()
            .enumerate()
            .map(|(i, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(self.cell_error(row, i + 1, format!("non-finite value {v}"))),
                Err(_) => Err(self.cell_error(row, i + 1, format!("not a number: {cell:?}"))),
            })
            .collect()
    }

    fn cell_error(&self, row: u64, column: usize, message: String) -> CliError {
        CliError::Cell {
            source_name: self.source_name.clone(),
            row,
            column,
            message,
        }
    }

    /// Next data row as `(row number, values)`; row numbers are 1-based
    /// lines of the input.
    pub fn next_row(&mut self) -> Result<Option<(u64, Vec<f64>)>> {
        if let Some(p) = self.pending.take() {
            return Ok(Some(p));
        }
        match self.next_record()? {
            None => Ok(None),
            Some((row, record)) => Ok(Some((row, self.parse(row, &record)?))),
        }
    }
}
