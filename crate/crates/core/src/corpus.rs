//! Review corpus loading, validation, and scrubbing.
//!
//! Input files carry four canonical columns (`review_id`, `airport`, `text`,
//! `rating`) plus whatever extra fields the collection platform attached.
//! [`scrub_fields`] keeps only the canonical four; everything else (reviewer
//! names, photo URLs, timestamps) is dropped before a record enters a
//! [`Corpus`]. Empty review text is legal: rating-only reviews exist and
//! dropping them would skew evaluation denominators downstream.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One traveller review, scrubbed to the four canonical fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub review_id: String,
    pub airport: String,
    pub text: String,
    pub rating: u8,
}

/// An ordered, validated collection of reviews from one source file.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<ReviewRecord>,
    source_path: String,
    airport_codes: BTreeSet<String>,
}

/// Input format of a corpus file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    pub fn parse(name: &str) -> Option<CorpusFormat> {
        match name {
            "csv" => Some(CorpusFormat::Csv),
            "jsonl" => Some(CorpusFormat::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: rating {value} outside 1..=5")]
    RatingOutOfRange { row: usize, value: i64 },
    #[error("duplicate review_id {id:?}")]
    DuplicateReviewId { id: String },
    #[error("missing required field {field:?}")]
    MissingRequiredField { field: String },
}

const REQUIRED_FIELDS: [&str; 4] = ["review_id", "airport", "text", "rating"];

/// Keep only the four canonical fields of a raw platform record; reviewer
/// names, photo URLs, timestamps and any other keys are discarded.
pub fn scrub_fields(raw: &HashMap<String, String>) -> Result<ReviewRecord, CorpusError> {
    for field in REQUIRED_FIELDS {
        if !raw.contains_key(field) {
            return Err(CorpusError::MissingRequiredField {
                field: field.to_string(),
            });
        }
    }
    let rating_text = raw["rating"].trim();
    let rating: i64 = rating_text.parse().map_err(|_| CorpusError::MalformedRow {
        row: 0,
        reason: format!("rating {rating_text:?} is not an integer"),
    })?;
    if !(1..=5).contains(&rating) {
        return Err(CorpusError::RatingOutOfRange { row: 0, value: rating });
    }
    Ok(ReviewRecord {
        review_id: raw["review_id"].clone(),
        airport: raw["airport"].clone(),
        text: raw["text"].clone(),
        rating: rating as u8,
    })
}

impl Corpus {
    /// Validate records (unique ids, ratings already range-checked by type)
    /// and collect airport codes. Order is preserved.
    pub fn from_records(
        records: Vec<ReviewRecord>,
        source_path: impl Into<String>,
    ) -> Result<Corpus, CorpusError> {
        let mut seen = HashSet::new();
        let mut airport_codes = BTreeSet::new();
        for record in &records {
            if !seen.insert(record.review_id.clone()) {
                return Err(CorpusError::DuplicateReviewId {
                    id: record.review_id.clone(),
                });
            }
            if !(1..=5).contains(&record.rating) {
                return Err(CorpusError::RatingOutOfRange {
                    row: 0,
                    value: record.rating as i64,
                });
            }
            airport_codes.insert(record.airport.clone());
        }
        Ok(Corpus {
            records,
            source_path: source_path.into(),
            airport_codes,
        })
    }

    pub fn records(&self) -> &[ReviewRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn airport_codes(&self) -> impl Iterator<Item = &str> {
        self.airport_codes.iter().map(String::as_str)
    }
}

/// Load and validate a corpus file. Rows are scrubbed to the canonical
/// fields; file order is preserved.
pub fn load_reviews(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let records = match format {
        CorpusFormat::Csv => load_csv(path)?,
        CorpusFormat::Jsonl => load_jsonl(path)?,
    };
    Corpus::from_records(records, path.display().to_string())
}

fn load_csv(path: &Path) -> Result<Vec<ReviewRecord>, CorpusError> {
    let bytes = std::fs::read(path)?;
    // The csv crate lossily replaces undecodable bytes; reject them up front
    // so a corrupt file fails loudly instead of silently mutating text.
    let text = String::from_utf8(bytes).map_err(|e| CorpusError::MalformedRow {
        row: 0,
        reason: format!("file is not valid UTF-8 (byte offset {})", e.utf8_error().valid_up_to()),
    })?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::MalformedRow {
            row: 1,
            reason: e.to_string(),
        })?
        .clone();

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_number = i + 2; // 1-based, after the header line
        let row = row.map_err(|e| CorpusError::MalformedRow {
            row: row_number,
            reason: e.to_string(),
        })?;
        let raw: HashMap<String, String> = headers
            .iter()
            .zip(row.iter())
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let record = scrub_fields(&raw).map_err(|e| at_row(e, row_number))?;
        records.push(record);
    }
    Ok(records)
}

fn load_jsonl(path: &Path) -> Result<Vec<ReviewRecord>, CorpusError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let row_number = i + 1;
        let line = line.map_err(|e| CorpusError::MalformedRow {
            row: row_number,
            reason: format!("unreadable line: {e}"),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRow {
                row: row_number,
                reason: e.to_string(),
            })?;
        let object = value.as_object().ok_or_else(|| CorpusError::MalformedRow {
            row: row_number,
            reason: "line is not a JSON object".into(),
        })?;
        let raw: HashMap<String, String> = object
            .iter()
            .map(|(k, v)| {
                let text = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                (k.clone(), text)
            })
            .collect();
        let record = scrub_fields(&raw).map_err(|e| at_row(e, row_number))?;
        records.push(record);
    }
    Ok(records)
}

/// Stamp the real row number onto errors produced by `scrub_fields`.
fn at_row(error: CorpusError, row: usize) -> CorpusError {
    match error {
        CorpusError::MalformedRow { reason, .. } => CorpusError::MalformedRow { row, reason },
        CorpusError::RatingOutOfRange { value, .. } => CorpusError::RatingOutOfRange { row, value },
        other => other,
    }
}

/// Write records as canonical CSV (the `load_reviews` inverse).
pub fn write_csv(records: &[ReviewRecord], out: &mut dyn Write) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(REQUIRED_FIELDS)
        .map_err(csv_io_error)?;
    for record in records {
        writer
            .write_record([
                record.review_id.as_str(),
                record.airport.as_str(),
                record.text.as_str(),
                &record.rating.to_string(),
            ])
            .map_err(csv_io_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write records as canonical JSONL.
pub fn write_jsonl(records: &[ReviewRecord], out: &mut dyn Write) -> Result<(), CorpusError> {
    for record in records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn csv_io_error(error: csv::Error) -> CorpusError {
    CorpusError::MalformedRow {
        row: 0,
        reason: error.to_string(),
    }
}
