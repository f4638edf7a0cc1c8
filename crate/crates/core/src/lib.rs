//! Aspect-based sentiment analysis for traveller reviews.
//!
//! The pipeline turns a corpus of venue reviews (text + 1..5 star rating) into
//! per-review aspect polarity matrices and per-airport aspect summaries:
//!
//! 1. [`corpus`] — load and scrub review records from CSV or JSONL.
//! 2. [`preprocess`] — split reviews into sentences and correct misspellings
//!    with a deterministic frequency-weighted edit-distance corrector.
//! 3. [`lexicon`] — find mentions of the eight canonical service aspects via
//!    a term lexicon with token-boundary, longest-match semantics.
//! 4. [`scoring`] — score each mention's polarity through a pluggable scorer
//!    (bundled deterministic oracle, or an external process adapter).
//! 5. [`aggregate`] — build the per-review aspect matrix and per-airport
//!    summaries.
//! 6. [`evaluate`] — derive gold labels from star ratings and measure
//!    review-level accuracy of the aspect matrix.
//! 7. [`pipeline`] — orchestrate a full deterministic run with a manifest.
//! 8. [`report`] — render tables, CSV, and static charts.

pub mod aggregate;
pub mod corpus;
pub mod evaluate;
pub mod lexicon;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod scoring;

pub use aggregate::{AirportAspectSummary, AspectMatrixRow};
pub use corpus::{Corpus, ReviewRecord};
pub use evaluate::{EvaluationReport, PolarityLabel};
pub use lexicon::{AspectId, AspectLexicon, AspectMention, PerAspect};
pub use pipeline::{PipelineConfig, RunManifest};
pub use preprocess::{Sentence, SpellDictionary};
pub use scoring::{OracleScorer, PolarityScore, ScoredMention, Scorer, ScorerDescriptor};
