//! Per-review aspect matrix rows and per-airport summaries.
//!
//! A matrix row carries, for each aspect, the arithmetic mean of the signed
//! values of that aspect's mentions in the review. Absent aspects are
//! zero-filled, but the row also carries mention counts, so a present
//! aspect whose mean is exactly 0 stays distinguishable from absence.
//! Means are computed sum-then-divide over a stably ordered mention list,
//! which makes every output order-invariant to the last bit.

use std::collections::HashSet;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::ReviewRecord;
use crate::lexicon::{AspectId, PerAspect};
use crate::scoring::ScoredMention;

/// One Table-3-style row: per-aspect signed means for a single review.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspectMatrixRow {
    pub review_id: String,
    pub airport: String,
    /// Matched terms in first-occurrence order, deduplicated.
    pub keywords: Vec<String>,
    pub values: PerAspect<f64>,
    pub present: PerAspect<bool>,
    pub mention_counts: PerAspect<u32>,
}

/// Per-aspect aggregate over one airport's rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspectSummaryCell {
    /// Mean over rows where the aspect is present; None when no row has it.
    pub mean_signed: Option<f64>,
    pub present_row_count: u32,
    pub positive_row_count: u32,
    pub negative_row_count: u32,
    pub mention_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AirportAspectSummary {
    pub airport: String,
    pub review_count: u32,
    pub aspects: PerAspect<AspectSummaryCell>,
}

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("mention review_id {found:?} does not match row review {expected:?}")]
    MentionReviewMismatch { expected: String, found: String },
    #[error("row for review {review_id:?} carries airport {found:?}, expected {expected:?}")]
    AirportMismatch {
        review_id: String,
        expected: String,
        found: String,
    },
    #[error("failed to write matrix: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed matrix file, row {row}: {reason}")]
    MalformedMatrix { row: usize, reason: String },
}

/// Build the review's matrix row from its scored mentions.
pub fn build_row(
    review: &ReviewRecord,
    scored: &[ScoredMention],
) -> Result<AspectMatrixRow, AggregateError> {
    for mention in scored {
        if mention.mention.review_id != review.review_id {
            return Err(AggregateError::MentionReviewMismatch {
                expected: review.review_id.clone(),
                found: mention.mention.review_id.clone(),
            });
        }
    }

    // Stable order makes the sums independent of caller ordering.
    let mut ordered: Vec<&ScoredMention> = scored.iter().collect();
    ordered.sort_by_key(|m| (m.mention.sentence_index, m.mention.span));

    let mut sums = PerAspect::<f64>::default();
    let mut counts = PerAspect::<u32>::default();
    let mut keywords = Vec::new();
    let mut seen_keywords = HashSet::new();
    for mention in &ordered {
        let aspect = mention.mention.aspect;
        sums[aspect] += mention.signed;
        counts[aspect] += 1;
        if seen_keywords.insert(mention.mention.matched_term.clone()) {
            keywords.push(mention.mention.matched_term.clone());
        }
    }

    let present = counts.map(|_, &c| c > 0);
    let values = PerAspect::from_fn(|aspect| {
        if counts[aspect] > 0 {
            sums[aspect] / counts[aspect] as f64
        } else {
            0.0
        }
    });

    Ok(AspectMatrixRow {
        review_id: review.review_id.clone(),
        airport: review.airport.clone(),
        keywords,
        values,
        present,
        mention_counts: counts,
    })
}

/// Fold one airport's rows into per-aspect aggregates. Rows are re-sorted
/// by review_id first, so any input order produces identical output.
pub fn summarize(
    rows: &[AspectMatrixRow],
    airport: &str,
) -> Result<AirportAspectSummary, AggregateError> {
    for row in rows {
        if row.airport != airport {
            return Err(AggregateError::AirportMismatch {
                review_id: row.review_id.clone(),
                expected: airport.to_string(),
                found: row.airport.clone(),
            });
        }
    }
    let mut ordered: Vec<&AspectMatrixRow> = rows.iter().collect();
    ordered.sort_by(|a, b| a.review_id.cmp(&b.review_id));

    let aspects = PerAspect::from_fn(|aspect| {
        let mut sum = 0.0;
        let mut present_rows = 0u32;
        let mut positive_rows = 0u32;
        let mut negative_rows = 0u32;
        let mut mentions = 0u32;
        for row in &ordered {
            mentions += row.mention_counts[aspect];
            if !row.present[aspect] {
                continue;
            }
            present_rows += 1;
            sum += row.values[aspect];
            if row.values[aspect] > 0.0 {
                positive_rows += 1;
            } else if row.values[aspect] < 0.0 {
                negative_rows += 1;
            }
            // A present value of exactly 0 lands in neither count.
        }
        AspectSummaryCell {
            mean_signed: (present_rows > 0).then(|| sum / present_rows as f64),
            present_row_count: present_rows,
            positive_row_count: positive_rows,
            negative_row_count: negative_rows,
            mention_count: mentions,
        }
    });

    Ok(AirportAspectSummary {
        airport: airport.to_string(),
        review_count: rows.len() as u32,
        aspects,
    })
}

/// Matrix CSV header, fixed column order.
pub fn matrix_header() -> Vec<String> {
    let mut header = vec![
        "review_id".to_string(),
        "airport".to_string(),
        "keywords".to_string(),
    ];
    header.extend(AspectId::ALL.iter().map(|a| a.as_str().to_string()));
    header.extend(AspectId::ALL.iter().map(|a| format!("{}_n", a.as_str())));
    header
}

/// Write rows as the matrix CSV. Values use shortest-round-trip float
/// formatting, so reading the file back recovers them exactly.
pub fn write_matrix_csv(
    rows: &[AspectMatrixRow],
    out: &mut dyn Write,
) -> Result<(), AggregateError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(matrix_header()).map_err(csv_error)?;
    for row in rows {
        let mut record = vec![
            row.review_id.clone(),
            row.airport.clone(),
            row.keywords.join(";"),
        ];
        record.extend(AspectId::ALL.iter().map(|a| row.values[*a].to_string()));
        record.extend(
            AspectId::ALL
                .iter()
                .map(|a| row.mention_counts[*a].to_string()),
        );
        writer.write_record(&record).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a matrix CSV back into rows (presence restored from the _n columns).
pub fn read_matrix_csv(text: &str) -> Result<Vec<AspectMatrixRow>, AggregateError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| AggregateError::MalformedMatrix {
            row: 1,
            reason: e.to_string(),
        })?
        .clone();
    let expected = matrix_header();
    if headers.iter().collect::<Vec<_>>() != expected.iter().map(String::as_str).collect::<Vec<_>>()
    {
        return Err(AggregateError::MalformedMatrix {
            row: 1,
            reason: format!("unexpected header {headers:?}"),
        });
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row_number = i + 2;
        let record = record.map_err(|e| AggregateError::MalformedMatrix {
            row: row_number,
            reason: e.to_string(),
        })?;
        let field = |index: usize| record.get(index).unwrap_or_default().to_string();
        let parse_f64 = |index: usize| -> Result<f64, AggregateError> {
            record
                .get(index)
                .unwrap_or_default()
                .parse()
                .map_err(|_| AggregateError::MalformedMatrix {
                    row: row_number,
                    reason: format!("column {index} is not a number"),
                })
        };
        let parse_u32 = |index: usize| -> Result<u32, AggregateError> {
            record
                .get(index)
                .unwrap_or_default()
                .parse()
                .map_err(|_| AggregateError::MalformedMatrix {
                    row: row_number,
                    reason: format!("column {index} is not a count"),
                })
        };

        let keywords_field = field(2);
        let keywords = if keywords_field.is_empty() {
            Vec::new()
        } else {
            keywords_field.split(';').map(str::to_owned).collect()
        };
        let mut values = PerAspect::<f64>::default();
        let mut counts = PerAspect::<u32>::default();
        for (offset, aspect) in AspectId::ALL.into_iter().enumerate() {
            values[aspect] = parse_f64(3 + offset)?;
            counts[aspect] = parse_u32(11 + offset)?;
        }
        rows.push(AspectMatrixRow {
            review_id: field(0),
            airport: field(1),
            keywords,
            present: counts.map(|_, &c| c > 0),
            values,
            mention_counts: counts,
        });
    }
    Ok(rows)
}

/// Write one airport summary as CSV: a row per aspect.
pub fn write_summary_csv(
    summary: &AirportAspectSummary,
    out: &mut dyn Write,
) -> Result<(), AggregateError> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record([
            "airport",
            "aspect",
            "mean_signed",
            "present_row_count",
            "positive_row_count",
            "negative_row_count",
            "mention_count",
        ])
        .map_err(csv_error)?;
    for (aspect, cell) in summary.aspects.iter() {
        writer
            .write_record([
                summary.airport.as_str(),
                aspect.as_str(),
                &cell.mean_signed.map(|m| m.to_string()).unwrap_or_default(),
                &cell.present_row_count.to_string(),
                &cell.positive_row_count.to_string(),
                &cell.negative_row_count.to_string(),
                &cell.mention_count.to_string(),
            ])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(error: csv::Error) -> AggregateError {
    AggregateError::MalformedMatrix {
        row: 0,
        reason: error.to_string(),
    }
}
