//! End-to-end orchestration: corpus -> preprocess -> lexicon -> scoring ->
//! aggregate -> evaluate, with configuration and provenance.
//!
//! The run computes everything in memory first and only then writes files,
//! so an aborted run (for example, a scorer backend going away) leaves no
//! partial outputs. Reviews are processed in review_id order, all folds are
//! stably ordered, and a deterministic scorer therefore yields byte-identical
//! data artifacts across runs; the manifest records a wall-clock duration and
//! is excluded from that guarantee.
//!
//! Failure policy: a scorer that reports itself unavailable aborts the run
//! (the condition affects every remaining review). A scorer returning an
//! invalid score fails only that review; the review is skipped, counted, and
//! listed in the manifest's failure table.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aggregate::{
    build_row, summarize, write_matrix_csv, write_summary_csv, AggregateError, AspectMatrixRow,
};
use crate::corpus::{load_reviews, CorpusError, CorpusFormat, ReviewRecord};
use crate::evaluate::{
    compute_accuracy_with_threshold, EvaluateError, EvaluationReport, DEFAULT_POSITIVE_THRESHOLD,
    REVIEW_POLARITY_POLICY,
};
use crate::lexicon::{find_mentions, AspectLexicon, LexiconError};
use crate::preprocess::{correct_spelling, segment_sentences, DictionaryError, SpellDictionary};
use crate::scoring::{
    OracleScorer, ScoreError, ScoredMention, Scorer, ScorerDescriptor, StdioScorerAdapter,
};

/// Where the aspect lexicon comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconSource {
    Builtin,
    Path(PathBuf),
}

impl Default for LexiconSource {
    fn default() -> Self {
        LexiconSource::Builtin
    }
}

/// Full configuration of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input_path: PathBuf,
    pub input_format: CorpusFormat,
    pub lexicon_source: LexiconSource,
    pub dictionary_path: Option<PathBuf>,
    /// "oracle" or "adapter:<command line>".
    pub scorer: String,
    pub output_dir: PathBuf,
    /// When set, only reviews of these airports are analyzed, and a summary
    /// is emitted for each listed airport even if it has no reviews.
    pub airport_filter: Option<Vec<String>>,
    pub evaluation_enabled: bool,
    pub positive_threshold: u8,
}

impl PipelineConfig {
    pub fn new(
        input_path: impl Into<PathBuf>,
        input_format: CorpusFormat,
        output_dir: impl Into<PathBuf>,
    ) -> PipelineConfig {
        PipelineConfig {
            input_path: input_path.into(),
            input_format,
            lexicon_source: LexiconSource::Builtin,
            dictionary_path: None,
            scorer: "oracle".to_string(),
            output_dir: output_dir.into(),
            airport_filter: None,
            evaluation_enabled: false,
            positive_threshold: DEFAULT_POSITIVE_THRESHOLD,
        }
    }
}

/// The config as recorded in the manifest (everything stringly, so the
/// manifest stays readable and parseable without this crate's types).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub input_path: String,
    pub input_format: String,
    pub lexicon_source: String,
    pub dictionary_path: Option<String>,
    pub scorer: String,
    pub output_dir: String,
    pub airport_filter: Option<Vec<String>>,
    pub evaluation_enabled: bool,
    pub positive_threshold: u8,
}

impl ConfigSnapshot {
    fn of(config: &PipelineConfig) -> ConfigSnapshot {
        ConfigSnapshot {
            input_path: config.input_path.display().to_string(),
            input_format: match config.input_format {
                CorpusFormat::Csv => "csv".to_string(),
                CorpusFormat::Jsonl => "jsonl".to_string(),
            },
            lexicon_source: match &config.lexicon_source {
                LexiconSource::Builtin => "builtin".to_string(),
                LexiconSource::Path(path) => path.display().to_string(),
            },
            dictionary_path: config
                .dictionary_path
                .as_ref()
                .map(|p| p.display().to_string()),
            scorer: config.scorer.clone(),
            output_dir: config.output_dir.display().to_string(),
            airport_filter: config.airport_filter.clone(),
            evaluation_enabled: config.evaluation_enabled,
            positive_threshold: config.positive_threshold,
        }
    }
}

/// Choices that affect interpretation of the outputs, spelled out so they
/// travel with the data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub empty_text_reviews: String,
    pub summary_mean: String,
    pub review_polarity_policy: String,
}

/// A review dropped from the matrix, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewFailure {
    pub review_id: String,
    pub error: String,
}

/// One output file and its content hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub filename: String,
    pub sha256: String,
}

/// Provenance record written alongside the outputs as manifest.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ConfigSnapshot,
    pub airport_review_counts: BTreeMap<String, u64>,
    pub lexicon_term_count: usize,
    pub scorer: ScorerDescriptor,
    pub duration_ms: u64,
    pub metadata: RunMetadata,
    pub failures: Vec<ReviewFailure>,
    pub artifacts: Vec<ArtifactRecord>,
}

pub const MANIFEST_FILENAME: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error("scoring failed for review {review_id:?}, sentence {sentence_index}: {source}")]
    Scorer {
        review_id: String,
        sentence_index: usize,
        source: ScoreError,
    },
    #[error("unknown scorer {name:?} (expected \"oracle\" or \"adapter:<command>\")")]
    UnknownScorer { name: String },
    #[error("airports {first:?} and {second:?} map to the same summary filename")]
    SummaryFileCollision { first: String, second: String },
    #[error("failed to write outputs: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest at {path:?} is invalid: {reason}")]
    ManifestInvalid { path: PathBuf, reason: String },
    #[error("artifact {filename:?} does not match its manifest hash")]
    ManifestMismatch { filename: String },
}

/// Build the scorer named by `spec`: "oracle", or "adapter:<command line>"
/// (command split on whitespace).
pub fn resolve_scorer(spec: &str) -> Result<Box<dyn Scorer>, PipelineError> {
    if spec == "oracle" {
        return Ok(Box::new(OracleScorer::new()));
    }
    if let Some(command) = spec.strip_prefix("adapter:") {
        let mut parts = command.split_whitespace().map(str::to_owned);
        let program = parts.next().ok_or_else(|| PipelineError::UnknownScorer {
            name: spec.to_string(),
        })?;
        let args: Vec<String> = parts.collect();
        let adapter =
            StdioScorerAdapter::spawn(&program, &args).map_err(|e| PipelineError::Scorer {
                review_id: String::new(),
                sentence_index: 0,
                source: e,
            })?;
        return Ok(Box::new(adapter));
    }
    Err(PipelineError::UnknownScorer {
        name: spec.to_string(),
    })
}

/// Run the pipeline with the scorer named in the config.
pub fn run(config: &PipelineConfig) -> Result<RunManifest, PipelineError> {
    let scorer = resolve_scorer(&config.scorer)?;
    run_with_scorer(config, scorer.as_ref())
}

/// Run the pipeline with an explicit scorer (stub injection point).
pub fn run_with_scorer(
    config: &PipelineConfig,
    scorer: &dyn Scorer,
) -> Result<RunManifest, PipelineError> {
    let started = Instant::now();

    let lexicon = match &config.lexicon_source {
        LexiconSource::Builtin => AspectLexicon::builtin(),
        LexiconSource::Path(path) => AspectLexicon::load(path)?,
    };
    let dictionary = match &config.dictionary_path {
        Some(path) => SpellDictionary::load(path, &lexicon)?,
        None => SpellDictionary::builtin(&lexicon),
    };
    let corpus = load_reviews(&config.input_path, config.input_format)?;

    let mut records: Vec<&ReviewRecord> = match &config.airport_filter {
        Some(filter) => corpus
            .records()
            .iter()
            .filter(|r| filter.contains(&r.airport))
            .collect(),
        None => corpus.records().iter().collect(),
    };
    records.sort_by(|a, b| a.review_id.cmp(&b.review_id));

    let mut rows: Vec<AspectMatrixRow> = Vec::new();
    let mut failures: Vec<ReviewFailure> = Vec::new();
    for record in &records {
        match score_review(record, &lexicon, &dictionary, scorer)? {
            Ok(scored) => rows.push(build_row(record, &scored)?),
            Err(failure) => failures.push(failure),
        }
    }

    // Summaries cover every observed airport plus any explicitly requested.
    let mut airports: BTreeSet<String> =
        records.iter().map(|r| r.airport.clone()).collect();
    if let Some(filter) = &config.airport_filter {
        airports.extend(filter.iter().cloned());
    }

    let mut artifacts: Vec<(String, Vec<u8>)> = Vec::new();

    let mut matrix_bytes = Vec::new();
    write_matrix_csv(&rows, &mut matrix_bytes)?;
    artifacts.push(("matrix.csv".to_string(), matrix_bytes));

    let mut summary_names: BTreeMap<String, String> = BTreeMap::new();
    for airport in &airports {
        let stem = summary_file_stem(airport);
        if let Some(existing) = summary_names.insert(stem.clone(), airport.clone()) {
            return Err(PipelineError::SummaryFileCollision {
                first: existing,
                second: airport.clone(),
            });
        }
        let airport_rows: Vec<AspectMatrixRow> = rows
            .iter()
            .filter(|r| &r.airport == airport)
            .cloned()
            .collect();
        let summary = summarize(&airport_rows, airport)?;
        let mut csv_bytes = Vec::new();
        write_summary_csv(&summary, &mut csv_bytes)?;
        artifacts.push((format!("summary_{stem}.csv"), csv_bytes));
        let mut json_bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
        json_bytes.push(b'\n');
        artifacts.push((format!("summary_{stem}.json"), json_bytes));
    }

    let mut airport_review_counts: BTreeMap<String, u64> =
        airports.iter().map(|a| (a.clone(), 0)).collect();
    for record in &records {
        *airport_review_counts.entry(record.airport.clone()).or_insert(0) += 1;
    }

    if config.evaluation_enabled {
        let report: EvaluationReport =
            compute_accuracy_with_threshold(&rows, &corpus, config.positive_threshold)?;
        let mut json_bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
        json_bytes.push(b'\n');
        artifacts.push(("evaluation.json".to_string(), json_bytes));
        artifacts.push(("evaluation.txt".to_string(), report.to_text().into_bytes()));
    }

    let manifest = RunManifest {
        config: ConfigSnapshot::of(config),
        airport_review_counts,
        lexicon_term_count: lexicon.term_count(),
        scorer: scorer.descriptor(),
        duration_ms: started.elapsed().as_millis() as u64,
        metadata: RunMetadata {
            empty_text_reviews: "retained; they yield all-absent rows".to_string(),
            summary_mean: "arithmetic mean over rows where the aspect is present".to_string(),
            review_polarity_policy: REVIEW_POLARITY_POLICY.to_string(),
        },
        failures,
        artifacts: artifacts
            .iter()
            .map(|(filename, bytes)| ArtifactRecord {
                filename: filename.clone(),
                sha256: sha256_hex(bytes),
            })
            .collect(),
    };

    write_outputs(&config.output_dir, &artifacts, &manifest)?;
    Ok(manifest)
}

/// Segment, correct, match, and score one review. The outer error aborts
/// the run; the inner one fails just this review.
fn score_review(
    record: &ReviewRecord,
    lexicon: &AspectLexicon,
    dictionary: &SpellDictionary,
    scorer: &dyn Scorer,
) -> Result<Result<Vec<ScoredMention>, ReviewFailure>, PipelineError> {
    let mut scored = Vec::new();
    for sentence in segment_sentences(&record.review_id, &record.text) {
        let corrected = correct_spelling(&sentence, dictionary);
        for mention in find_mentions(&corrected, lexicon) {
            match scorer.score(&corrected.corrected_text, &mention.matched_term) {
                Ok(score) => scored.push(ScoredMention::new(mention, score)),
                Err(source @ ScoreError::Unavailable { .. }) => {
                    return Err(PipelineError::Scorer {
                        review_id: record.review_id.clone(),
                        sentence_index: sentence.index,
                        source,
                    });
                }
                Err(ScoreError::InvalidScore { reason }) => {
                    return Ok(Err(ReviewFailure {
                        review_id: record.review_id.clone(),
                        error: format!(
                            "invalid score at sentence {}: {reason}",
                            sentence.index
                        ),
                    }));
                }
            }
        }
    }
    Ok(Ok(scored))
}

/// Path-safe stem for an airport's summary files.
fn summary_file_stem(airport: &str) -> String {
    airport
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Create the output directory and write all artifacts plus the manifest.
/// On a write error, files written by this call are removed again.
fn write_outputs(
    dir: &Path,
    artifacts: &[(String, Vec<u8>)],
    manifest: &RunManifest,
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let write_one = |filename: &str, bytes: &[u8], written: &mut Vec<PathBuf>| {
        let path = dir.join(filename);
        match std::fs::write(&path, bytes) {
            Ok(()) => {
                written.push(path);
                Ok(())
            }
            Err(e) => Err(e),
        }
    };

    let mut manifest_bytes = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    manifest_bytes.push(b'\n');

    let result = artifacts
        .iter()
        .try_for_each(|(filename, bytes)| write_one(filename, bytes, &mut written))
        .and_then(|_| write_one(MANIFEST_FILENAME, &manifest_bytes, &mut written));
    if let Err(e) = result {
        for path in written {
            let _ = std::fs::remove_file(path);
        }
        return Err(e.into());
    }
    Ok(())
}

/// Recompute every artifact hash recorded in `dir`'s manifest and compare.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest, PipelineError> {
    let path = dir.join(MANIFEST_FILENAME);
    let text = std::fs::read_to_string(&path)?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| PipelineError::ManifestInvalid {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    for artifact in &manifest.artifacts {
        let bytes = std::fs::read(dir.join(&artifact.filename))?;
        if sha256_hex(&bytes) != artifact.sha256 {
            return Err(PipelineError::ManifestMismatch {
                filename: artifact.filename.clone(),
            });
        }
    }
    Ok(manifest)
}
