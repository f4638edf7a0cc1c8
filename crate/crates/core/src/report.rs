//! Render matrices, summaries, and evaluation reports as plain tables,
//! CSV, or a static bar-chart image.
//!
//! Plain tables show values at 2 decimal places; the CSV forms reuse the
//! aggregate writers and keep full precision. The chart is a hand-rolled
//! SVG (deterministic bytes, no display server), one bar per aspect.

use thiserror::Error;

use crate::aggregate::{write_matrix_csv, AirportAspectSummary, AspectMatrixRow};
use crate::evaluate::EvaluationReport;
use crate::lexicon::AspectId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderTarget {
    Matrix,
    Summary,
    Evaluation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    PlainTable,
    Csv,
    BarChartImage,
}

/// Sort order for summary renderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKey {
    /// Canonical aspect (column) order.
    Aspect,
    /// Descending mention count, aspect order breaking ties.
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderSpec {
    pub target: RenderTarget,
    pub format: RenderFormat,
    pub sort_key: SortKey,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("format {format:?} is not supported for target {target:?}")]
    UnsupportedFormat {
        target: RenderTarget,
        format: RenderFormat,
    },
    #[error("render data does not match spec target {expected:?}")]
    DataMismatch { expected: RenderTarget },
    #[error("failed to render: {0}")]
    Io(#[from] std::io::Error),
}

/// Data accepted by [`render`]; the variant must match `spec.target`.
pub enum RenderData<'a> {
    Matrix(&'a [AspectMatrixRow]),
    Summary(&'a [AirportAspectSummary]),
    Evaluation(&'a EvaluationReport),
}

/// A finished rendering: suggested file name plus content bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendering {
    pub filename: String,
    pub bytes: Vec<u8>,
}

/// Render `data` according to `spec`. Deterministic: equal inputs produce
/// equal bytes.
pub fn render(data: &RenderData<'_>, spec: RenderSpec) -> Result<Rendering, ReportError> {
    match (data, spec.target) {
        (RenderData::Matrix(rows), RenderTarget::Matrix) => render_matrix(rows, spec),
        (RenderData::Summary(summaries), RenderTarget::Summary) => render_summary(summaries, spec),
        (RenderData::Evaluation(report), RenderTarget::Evaluation) => render_evaluation(report, spec),
        (_, expected) => Err(ReportError::DataMismatch { expected }),
    }
}

fn render_matrix(rows: &[AspectMatrixRow], spec: RenderSpec) -> Result<Rendering, ReportError> {
    match spec.format {
        RenderFormat::PlainTable => {
            let mut header = vec!["review_id".to_string(), "airport".to_string()];
            header.extend(AspectId::ALL.iter().map(|a| a.as_str().to_string()));
            header.push("keywords".to_string());
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|row| {
                    let mut cells = vec![row.review_id.clone(), row.airport.clone()];
                    cells.extend(
                        AspectId::ALL
                            .iter()
                            .map(|a| format_cell(row.values[*a], row.present[*a])),
                    );
                    cells.push(row.keywords.join("; "));
                    cells
                })
                .collect();
            Ok(Rendering {
                filename: "matrix.txt".to_string(),
                bytes: plain_table(&header, &body).into_bytes(),
            })
        }
        RenderFormat::Csv => {
            let mut bytes = Vec::new();
            write_matrix_csv(rows, &mut bytes).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::Other, e.to_string())
            })?;
            Ok(Rendering {
                filename: "matrix.csv".to_string(),
                bytes,
            })
        }
        RenderFormat::BarChartImage => Err(ReportError::UnsupportedFormat {
            target: RenderTarget::Matrix,
            format: spec.format,
        }),
    }
}

/// Aspect order for one summary under the given sort key.
fn sorted_aspects(summary: &AirportAspectSummary, sort_key: SortKey) -> Vec<AspectId> {
    let mut aspects: Vec<AspectId> = AspectId::ALL.to_vec();
    if sort_key == SortKey::Count {
        aspects.sort_by_key(|a| std::cmp::Reverse(summary.aspects[*a].mention_count));
        // sort_by_key is stable, so equal counts keep canonical order.
    }
    aspects
}

fn render_summary(
    summaries: &[AirportAspectSummary],
    spec: RenderSpec,
) -> Result<Rendering, ReportError> {
    match spec.format {
        RenderFormat::PlainTable => {
            let header = vec![
                "airport".to_string(),
                "aspect".to_string(),
                "mean_signed".to_string(),
                "present_rows".to_string(),
                "positive_rows".to_string(),
                "negative_rows".to_string(),
                "mentions".to_string(),
            ];
            let mut body = Vec::new();
            for summary in summaries {
                for aspect in sorted_aspects(summary, spec.sort_key) {
                    let cell = &summary.aspects[aspect];
                    body.push(vec![
                        summary.airport.clone(),
                        aspect.as_str().to_string(),
                        cell.mean_signed
                            .map(|m| format!("{m:.2}"))
                            .unwrap_or_else(|| "-".to_string()),
                        cell.present_row_count.to_string(),
                        cell.positive_row_count.to_string(),
                        cell.negative_row_count.to_string(),
                        cell.mention_count.to_string(),
                    ]);
                }
            }
            Ok(Rendering {
                filename: "summary.txt".to_string(),
                bytes: plain_table(&header, &body).into_bytes(),
            })
        }
        RenderFormat::Csv => {
            let mut bytes = Vec::new();
            {
                let mut writer = csv::Writer::from_writer(&mut bytes);
                let result = writer
                    .write_record([
                        "airport",
                        "aspect",
                        "mean_signed",
                        "present_row_count",
                        "positive_row_count",
                        "negative_row_count",
                        "mention_count",
                    ])
                    .and_then(|_| {
                        for summary in summaries {
                            for aspect in sorted_aspects(summary, spec.sort_key) {
                                let cell = &summary.aspects[aspect];
                                writer.write_record([
                                    summary.airport.as_str(),
                                    aspect.as_str(),
                                    &cell.mean_signed.map(|m| m.to_string()).unwrap_or_default(),
                                    &cell.present_row_count.to_string(),
                                    &cell.positive_row_count.to_string(),
                                    &cell.negative_row_count.to_string(),
                                    &cell.mention_count.to_string(),
                                ])?;
                            }
                        }
                        writer.flush()?;
                        Ok(())
                    });
                result.map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e.to_string()))?;
            }
            Ok(Rendering {
                filename: "summary.csv".to_string(),
                bytes,
            })
        }
        RenderFormat::BarChartImage => {
            let mut svg = String::new();
            for summary in summaries {
                svg.push_str(&summary_chart_svg(summary, spec.sort_key));
            }
            Ok(Rendering {
                filename: "summary.svg".to_string(),
                bytes: svg.into_bytes(),
            })
        }
    }
}

fn render_evaluation(
    report: &EvaluationReport,
    spec: RenderSpec,
) -> Result<Rendering, ReportError> {
    match spec.format {
        RenderFormat::PlainTable => {
            let header = vec!["field".to_string(), "value".to_string()];
            let accuracy = report
                .accuracy
                .map(|a| format!("{a:.2}"))
                .unwrap_or_else(|| "-".to_string());
            let body = vec![
                vec!["n_total".to_string(), report.n_total.to_string()],
                vec!["n_evaluated".to_string(), report.n_evaluated.to_string()],
                vec![
                    "n_skipped_no_aspects".to_string(),
                    report.n_skipped_no_aspects.to_string(),
                ],
                vec!["accuracy".to_string(), accuracy],
                vec!["tp".to_string(), report.tp.to_string()],
                vec!["fp".to_string(), report.fp.to_string()],
                vec!["tn".to_string(), report.tn.to_string()],
                vec!["fn".to_string(), report.fn_.to_string()],
                vec!["policy".to_string(), report.policy.clone()],
            ];
            Ok(Rendering {
                filename: "evaluation.txt".to_string(),
                bytes: plain_table(&header, &body).into_bytes(),
            })
        }
        RenderFormat::Csv => {
            let mut bytes = Vec::new();
            {
                let mut writer = csv::Writer::from_writer(&mut bytes);
                writer
                    .write_record(["field", "value"])
                    .and_then(|_| {
                        let accuracy = report
                            .accuracy
                            .map(|a| a.to_string())
                            .unwrap_or_default();
                        for (field, value) in [
                            ("n_total", report.n_total.to_string()),
                            ("n_evaluated", report.n_evaluated.to_string()),
                            (
                                "n_skipped_no_aspects",
                                report.n_skipped_no_aspects.to_string(),
                            ),
                            ("accuracy", accuracy),
                            ("tp", report.tp.to_string()),
                            ("fp", report.fp.to_string()),
                            ("tn", report.tn.to_string()),
                            ("fn", report.fn_.to_string()),
                            ("policy", report.policy.clone()),
                        ] {
                            writer.write_record([field, &value])?;
                        }
                        writer.flush()?;
                        Ok(())
                    })
                    .map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e.to_string()))?;
            }
            Ok(Rendering {
                filename: "evaluation.csv".to_string(),
                bytes,
            })
        }
        RenderFormat::BarChartImage => Err(ReportError::UnsupportedFormat {
            target: RenderTarget::Evaluation,
            format: spec.format,
        }),
    }
}

/// Fixed-width text table with a separator under the header.
fn plain_table(header: &[String], body: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (i, cell) in row.iter().enumerate().take(columns) {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let format_row = |cells: &[String]| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            // Pad every column but the last so lines have no trailing spaces.
            if i + 1 < columns {
                line.extend(std::iter::repeat(' ').take(widths[i] - cell.chars().count()));
            }
        }
        line.push('\n');
        line
    };

    let mut output = format_row(header);
    let rule_width = widths.iter().sum::<usize>() + 2 * (columns - 1);
    output.push_str(&"-".repeat(rule_width));
    output.push('\n');
    for row in body {
        output.push_str(&format_row(row));
    }
    output
}

/// Value shown in matrix tables: 2 decimals, absent cells shown as 0.
/// Negative zero never appears.
fn format_cell(value: f64, present: bool) -> String {
    if !present {
        return "0".to_string();
    }
    let normalized = if value == 0.0 { 0.0 } else { value };
    format!("{normalized:.2}")
}

const CHART_BAR_HEIGHT: usize = 18;
const CHART_BAR_GAP: usize = 8;
const CHART_LABEL_WIDTH: usize = 110;
const CHART_HALF_WIDTH: usize = 220;

/// One horizontal-bar SVG per airport: bars grow right for positive means,
/// left for negative; absent aspects show an empty track.
fn summary_chart_svg(summary: &AirportAspectSummary, sort_key: SortKey) -> String {
    let aspects = sorted_aspects(summary, sort_key);
    let rows = aspects.len();
    let title_height = 28;
    let height = title_height + rows * (CHART_BAR_HEIGHT + CHART_BAR_GAP) + CHART_BAR_GAP;
    let width = CHART_LABEL_WIDTH + 2 * CHART_HALF_WIDTH + 20;
    let center_x = CHART_LABEL_WIDTH + CHART_HALF_WIDTH;

    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="8" y="18" font-family="monospace" font-size="14">{} aspect means</text>"#,
        xml_escape(&summary.airport)
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r##"<line x1="{center_x}" y1="{title_height}" x2="{center_x}" y2="{height}" stroke="#888" stroke-width="1"/>"##
    ));
    svg.push('\n');

    for (i, aspect) in aspects.iter().enumerate() {
        let cell = &summary.aspects[*aspect];
        let y = title_height + CHART_BAR_GAP + i * (CHART_BAR_HEIGHT + CHART_BAR_GAP);
        let text_y = y + CHART_BAR_HEIGHT - 4;
        svg.push_str(&format!(
            r#"<text x="8" y="{text_y}" font-family="monospace" font-size="12">{}</text>"#,
            aspect.as_str()
        ));
        svg.push('\n');
        match cell.mean_signed {
            Some(mean) => {
                let magnitude = (mean.abs().min(1.0) * CHART_HALF_WIDTH as f64).round() as usize;
                let (x, color) = if mean < 0.0 {
                    (center_x - magnitude, "#c0504d")
                } else {
                    (center_x, "#4f81bd")
                };
                svg.push_str(&format!(
                    r#"<rect x="{x}" y="{y}" width="{magnitude}" height="{CHART_BAR_HEIGHT}" fill="{color}"/>"#
                ));
                svg.push('\n');
                let label_x = center_x + CHART_HALF_WIDTH + 6;
                svg.push_str(&format!(
                    r#"<text x="{label_x}" y="{text_y}" font-family="monospace" font-size="12">{mean:.2}</text>"#
                ));
            }
            None => {
                svg.push_str(&format!(
                    r##"<rect x="{}" y="{y}" width="{}" height="{CHART_BAR_HEIGHT}" fill="none" stroke="#ccc" stroke-dasharray="3,3"/>"##,
                    CHART_LABEL_WIDTH,
                    2 * CHART_HALF_WIDTH
                ));
            }
        }
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::{build_row, summarize};
    use crate::corpus::ReviewRecord;
    use crate::lexicon::AspectMention;
    use crate::scoring::{PolarityScore, ScoredMention};

    fn spec(target: RenderTarget, format: RenderFormat) -> RenderSpec {
        RenderSpec {
            target,
            format,
            sort_key: SortKey::Aspect,
        }
    }

    fn fixture_rows() -> Vec<AspectMatrixRow> {
        let make = |id: &str, airport: &str, cells: &[(AspectId, &str, f64)]| {
            let review = ReviewRecord {
                review_id: id.into(),
                airport: airport.into(),
                text: String::new(),
                rating: 4,
            };
            let mentions: Vec<ScoredMention> = cells
                .iter()
                .enumerate()
                .map(|(i, (aspect, term, signed))| {
                    let score = if *signed >= 0.0 {
                        PolarityScore::try_new(*signed, 0.0, 1.0 - signed).unwrap()
                    } else {
                        PolarityScore::try_new(0.0, -signed, 1.0 + signed).unwrap()
                    };
                    ScoredMention::new(
                        AspectMention {
                            review_id: id.into(),
                            sentence_index: i,
                            aspect: *aspect,
                            matched_term: term.to_string(),
                            span: (0, 4),
                        },
                        score,
                    )
                })
                .collect();
            build_row(&review, &mentions).unwrap()
        };
        vec![
            make(
                "r1",
                "DXB",
                &[
                    (AspectId::Facilities, "toilets", 0.94),
                    (AspectId::Terminal, "terminal", 0.98),
                ],
            ),
            make(
                "r2",
                "DOH",
                &[
                    (AspectId::Facilities, "wifi", -0.89),
                    (AspectId::Terminal, "terminals", 0.99),
                ],
            ),
        ]
    }

    #[test]
    fn matrix_table_echoes_two_decimal_cells() {
        let rows = fixture_rows();
        let rendering = render(
            &RenderData::Matrix(&rows),
            spec(RenderTarget::Matrix, RenderFormat::PlainTable),
        )
        .unwrap();
        let text = String::from_utf8(rendering.bytes).unwrap();
        assert!(text.contains("0.94"));
        assert!(text.contains("0.98"));
        assert!(text.contains("-0.89"));
        assert!(text.contains("0.99"));
        assert_eq!(rendering.filename, "matrix.txt");
    }

    #[test]
    fn summary_table_has_one_row_per_airport_aspect() {
        let rows = fixture_rows();
        let dxb: Vec<AspectMatrixRow> = rows.iter().filter(|r| r.airport == "DXB").cloned().collect();
        let doh: Vec<AspectMatrixRow> = rows.iter().filter(|r| r.airport == "DOH").cloned().collect();
        let summaries = vec![
            summarize(&doh, "DOH").unwrap(),
            summarize(&dxb, "DXB").unwrap(),
        ];
        let rendering = render(
            &RenderData::Summary(&summaries),
            spec(RenderTarget::Summary, RenderFormat::PlainTable),
        )
        .unwrap();
        let text = String::from_utf8(rendering.bytes).unwrap();
        // Header + rule + 2 airports x 8 aspects.
        assert_eq!(text.lines().count(), 2 + 16);
        assert!(text.lines().any(|l| l.starts_with("DOH") && l.contains("facilities")));
        assert!(text.lines().any(|l| l.starts_with("DXB") && l.contains("staff")));
    }

    #[test]
    fn evaluation_table_echoes_fields() {
        let report = EvaluationReport {
            n_total: 20,
            n_evaluated: 20,
            n_skipped_no_aspects: 0,
            accuracy: Some(0.8),
            tp: 10,
            fp: 2,
            tn: 6,
            fn_: 2,
            policy: "test policy".into(),
        };
        let rendering = render(
            &RenderData::Evaluation(&report),
            spec(RenderTarget::Evaluation, RenderFormat::PlainTable),
        )
        .unwrap();
        let text = String::from_utf8(rendering.bytes).unwrap();
        assert!(text.contains("0.80"));
        assert!(text.lines().any(|l| l.starts_with("tp") && l.ends_with("10")));
        assert!(text.contains("test policy"));
    }

    #[test]
    fn evaluation_chart_is_unsupported() {
        let report = EvaluationReport {
            n_total: 0,
            n_evaluated: 0,
            n_skipped_no_aspects: 0,
            accuracy: None,
            tp: 0,
            fp: 0,
            tn: 0,
            fn_: 0,
            policy: String::new(),
        };
        let result = render(
            &RenderData::Evaluation(&report),
            spec(RenderTarget::Evaluation, RenderFormat::BarChartImage),
        );
        assert!(matches!(
            result,
            Err(ReportError::UnsupportedFormat {
                target: RenderTarget::Evaluation,
                ..
            })
        ));
    }

    #[test]
    fn data_spec_mismatch_rejected() {
        let rows = fixture_rows();
        let result = render(
            &RenderData::Matrix(&rows),
            spec(RenderTarget::Summary, RenderFormat::PlainTable),
        );
        assert!(matches!(result, Err(ReportError::DataMismatch { .. })));
    }

    #[test]
    fn csv_format_round_trips_matrix() {
        let rows = fixture_rows();
        let rendering = render(
            &RenderData::Matrix(&rows),
            spec(RenderTarget::Matrix, RenderFormat::Csv),
        )
        .unwrap();
        let text = String::from_utf8(rendering.bytes).unwrap();
        let reloaded = crate::aggregate::read_matrix_csv(&text).unwrap();
        assert_eq!(reloaded, rows);
        assert_eq!(rendering.filename, "matrix.csv");
    }

    #[test]
    fn chart_render_is_deterministic_and_well_formed() {
        let rows = fixture_rows();
        let dxb: Vec<AspectMatrixRow> = rows.iter().filter(|r| r.airport == "DXB").cloned().collect();
        let summaries = vec![summarize(&dxb, "DXB").unwrap()];
        let chart_spec = spec(RenderTarget::Summary, RenderFormat::BarChartImage);
        let first = render(&RenderData::Summary(&summaries), chart_spec).unwrap();
        let second = render(&RenderData::Summary(&summaries), chart_spec).unwrap();
        assert_eq!(first, second);
        let text = String::from_utf8(first.bytes).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        // One bar per present aspect, one dashed track per absent aspect.
        assert_eq!(text.matches("<rect").count(), 8);
    }

    #[test]
    fn count_sort_orders_summary_rows_by_mentions() {
        let rows = fixture_rows();
        let dxb: Vec<AspectMatrixRow> = rows.iter().filter(|r| r.airport == "DXB").cloned().collect();
        let summaries = vec![summarize(&dxb, "DXB").unwrap()];
        let rendering = render(
            &RenderData::Summary(&summaries),
            RenderSpec {
                target: RenderTarget::Summary,
                format: RenderFormat::PlainTable,
                sort_key: SortKey::Count,
            },
        )
        .unwrap();
        let text = String::from_utf8(rendering.bytes).unwrap();
        let data_lines: Vec<&str> = text.lines().skip(2).collect();
        // facilities and terminal (1 mention each) precede the six absent
        // aspects, keeping canonical order within equal counts.
        assert!(data_lines[0].contains("facilities"));
        assert!(data_lines[1].contains("terminal"));
        assert!(data_lines[2].contains("access"));
    }

    #[test]
    fn negative_zero_never_rendered() {
        assert_eq!(format_cell(-0.0, true), "0.00");
        assert_eq!(format_cell(0.0, false), "0");
    }
}
