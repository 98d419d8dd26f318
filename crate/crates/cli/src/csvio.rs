//! CSV persistence for trial records.
//!
//! Column order is fixed by the `TrialRecord` field order:
//! `problem,n,lambda,mu,eta,seed,generations,evaluations,success,censored`.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::sweep::TrialRecord;

/// Writes records (with a header row) to any writer.
pub fn write_records_to<W: Write>(writer: W, records: &[TrialRecord]) -> Result<(), CsvIoError> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    for record in records {
        csv_writer
            .serialize(record)
            .map_err(|err| CsvIoError::format(None, err))?;
    }
    csv_writer
        .flush()
        .map_err(|err| CsvIoError::io(None, err))?;
    Ok(())
}

/// Reads records from any reader; the header row is required.
pub fn read_records_from<R: Read>(reader: R) -> Result<Vec<TrialRecord>, CsvIoError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    csv_reader
        .deserialize()
        .collect::<Result<Vec<TrialRecord>, _>>()
        .map_err(|err| CsvIoError::format(None, err))
}

pub fn write_records(path: &Path, records: &[TrialRecord]) -> Result<(), CsvIoError> {
    let file = File::create(path).map_err(|err| CsvIoError::io(Some(path), err))?;
    write_records_to(file, records).map_err(|err| err.with_path(path))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, CsvIoError> {
    let file = File::open(path).map_err(|err| CsvIoError::io(Some(path), err))?;
    read_records_from(file).map_err(|err| err.with_path(path))
}

/// A CSV failure, with the file path when one is known.
#[derive(Debug)]
pub struct CsvIoError {
    path: Option<PathBuf>,
    detail: String,
}

impl CsvIoError {
    fn io(path: Option<&Path>, err: std::io::Error) -> Self {
        CsvIoError {
            path: path.map(Path::to_path_buf),
            detail: err.to_string(),
        }
    }

    fn format(path: Option<&Path>, err: csv::Error) -> Self {
        CsvIoError {
            path: path.map(Path::to_path_buf),
            detail: err.to_string(),
        }
    }

    fn with_path(mut self, path: &Path) -> Self {
        if self.path.is_none() {
            self.path = Some(path.to_path_buf());
        }
        self
    }
}

impl fmt::Display for CsvIoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(path) => write!(f, "{}: {}", path.display(), self.detail),
            None => f.write_str(&self.detail),
        }
    }
}

impl std::error::Error for CsvIoError {}
