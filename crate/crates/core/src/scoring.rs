//! Polarity scoring: the pluggable scorer contract, the signed-value rule,
//! and two implementations (bundled oracle, external stdio adapter).
//!
//! The oracle rule is fixed so an independent reimplementation reproduces
//! it bit for bit:
//!
//! 1. Tokenize the sentence into lowercase word tokens (alphanumeric runs).
//! 2. Anchor on the first occurrence of the aspect term's token sequence
//!    (final token may carry a plural "s"); if the term is not found the
//!    window is the whole sentence.
//! 3. The window spans 5 tokens on each side of the term, term tokens
//!    excluded. Count window hits P in the bundled positive word list and
//!    N in the negative list; a negator (not / no / never) at most 2
//!    positions before an opinion word flips that hit's polarity.
//! 4. With `mass = (P+N)/(P+N+1)`:
//!    `positive = (1+P)/(2+P+N) * mass`, `negative = (1+N)/(2+P+N) * mass`,
//!    `neutral = 1 - mass`.
//!
//! No opinion words near the term therefore means a fully neutral score,
//! and evidence shifts mass smoothly toward the dominant polarity.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::AspectMention;

/// Normalized polarity distribution over positive/negative/neutral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarityScore {
    positive: f64,
    negative: f64,
    neutral: f64,
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("scorer unavailable: {reason}")]
    Unavailable { reason: String },
    #[error("invalid score: {reason}")]
    InvalidScore { reason: String },
}

impl PolarityScore {
    /// Validate components: each in [0,1], sum within 1e-6 of 1.
    pub fn try_new(positive: f64, negative: f64, neutral: f64) -> Result<PolarityScore, ScoreError> {
        for (name, value) in [("positive", positive), ("negative", negative), ("neutral", neutral)] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(ScoreError::InvalidScore {
                    reason: format!("{name} component {value} outside [0,1]"),
                });
            }
        }
        let sum = positive + negative + neutral;
        if (sum - 1.0).abs() > 1e-6 {
            return Err(ScoreError::InvalidScore {
                reason: format!("components sum to {sum}, not 1"),
            });
        }
        Ok(PolarityScore {
            positive,
            negative,
            neutral,
        })
    }

    pub fn positive(&self) -> f64 {
        self.positive
    }

    pub fn negative(&self) -> f64 {
        self.negative
    }

    pub fn neutral(&self) -> f64 {
        self.neutral
    }

    /// The signed tag: +positive if positive >= negative, else -negative.
    /// Neutral never wins; ties resolve positive.
    pub fn signed_value(&self) -> f64 {
        if self.positive >= self.negative {
            self.positive
        } else {
            -self.negative
        }
    }
}

/// A mention paired with its score and derived signed value.
#[derive(Debug, Clone, Serialize)]
pub struct ScoredMention {
    pub mention: AspectMention,
    pub score: PolarityScore,
    pub signed: f64,
}

impl ScoredMention {
    pub fn new(mention: AspectMention, score: PolarityScore) -> ScoredMention {
        ScoredMention {
            mention,
            score,
            signed: score.signed_value(),
        }
    }
}

/// Static facts about a scorer the pipeline needs for scheduling and
/// provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerDescriptor {
    pub name: String,
    /// Safe for concurrent calls.
    pub reentrant: bool,
    /// Same inputs always produce the same output.
    pub deterministic: bool,
}

/// Per-(sentence, aspect-term) polarity scorer.
pub trait Scorer {
    fn descriptor(&self) -> ScorerDescriptor;
    fn score(&self, sentence_text: &str, aspect_term: &str) -> Result<PolarityScore, ScoreError>;
}

const NEGATORS: [&str; 3] = ["not", "no", "never"];
const WINDOW: usize = 5;
const NEGATION_LOOKBACK: usize = 2;

/// Bundled deterministic scorer; a test double standing in for a trained
/// polarity model.
#[derive(Debug, Clone)]
pub struct OracleScorer {
    positive_words: HashSet<String>,
    negative_words: HashSet<String>,
}

impl Default for OracleScorer {
    fn default() -> Self {
        OracleScorer::new()
    }
}

impl OracleScorer {
    pub fn new() -> OracleScorer {
        let parse = |text: &str| {
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect::<HashSet<_>>()
        };
        OracleScorer {
            positive_words: parse(include_str!("data/positive_words.txt")),
            negative_words: parse(include_str!("data/negative_words.txt")),
        }
    }
}

impl Scorer for OracleScorer {
    fn descriptor(&self) -> ScorerDescriptor {
        ScorerDescriptor {
            name: "oracle".to_string(),
            reentrant: true,
            deterministic: true,
        }
    }

    fn score(&self, sentence_text: &str, aspect_term: &str) -> Result<PolarityScore, ScoreError> {
        let tokens: Vec<String> = sentence_text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(|t| t.to_lowercase())
            .collect();
        let term_tokens: Vec<String> = aspect_term
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(|t| t.to_lowercase())
            .collect();

        let occurrence = find_term(&tokens, &term_tokens);
        let (window_start, window_end, term_range) = match occurrence {
            Some(start) => {
                let end = start + term_tokens.len();
                (
                    start.saturating_sub(WINDOW),
                    (end + WINDOW).min(tokens.len()),
                    start..end,
                )
            }
            None => (0, tokens.len(), 0..0),
        };

        let mut p = 0u32;
        let mut n = 0u32;
        for j in window_start..window_end {
            if term_range.contains(&j) {
                continue;
            }
            let token = tokens[j].as_str();
            let base = if self.positive_words.contains(token) {
                Some(true)
            } else if self.negative_words.contains(token) {
                Some(false)
            } else {
                None
            };
            let Some(mut is_positive) = base else { continue };
            // Negation flips polarity; the lookback inspects the raw token
            // stream, so a negator just outside the window still counts.
            let lookback_start = j.saturating_sub(NEGATION_LOOKBACK);
            if tokens[lookback_start..j]
                .iter()
                .any(|t| NEGATORS.contains(&t.as_str()))
            {
                is_positive = !is_positive;
            }
            if is_positive {
                p += 1;
            } else {
                n += 1;
            }
        }

        Ok(oracle_formula(p, n))
    }
}

/// The fixed scoring formula. Public so test oracles can cross-check the
/// windowing logic separately from the arithmetic.
pub fn oracle_formula(p: u32, n: u32) -> PolarityScore {
    let (p, n) = (p as f64, n as f64);
    let mass = (p + n) / (p + n + 1.0);
    let positive = (1.0 + p) / (2.0 + p + n) * mass;
    let negative = (1.0 + n) / (2.0 + p + n) * mass;
    let neutral = 1.0 - mass;
    PolarityScore {
        positive,
        negative,
        neutral,
    }
}

/// First index where the term's token sequence occurs (final token may
/// carry a plural "s").
fn find_term(tokens: &[String], term_tokens: &[String]) -> Option<usize> {
    if term_tokens.is_empty() || term_tokens.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - term_tokens.len()).find(|&i| {
        term_tokens.iter().enumerate().all(|(j, expected)| {
            let actual = tokens[i + j].as_str();
            actual == expected
                || (j == term_tokens.len() - 1
                    && actual.strip_suffix('s') == Some(expected.as_str()))
        })
    })
}

/// External scorer reached over stdio: one JSON request per line in, one
/// JSON response per line out.
///
/// The child is spawned once and reused across calls. A reader thread
/// forwards child stdout lines through a channel so each call can time
/// out instead of blocking forever on a hung backend. Calls are
/// serialized through a mutex; the descriptor reports non-reentrant.
pub struct StdioScorerAdapter {
    command_line: String,
    io: Mutex<AdapterIo>,
    timeout: Duration,
}

struct AdapterIo {
    child: Child,
    stdin: std::process::ChildStdin,
    responses: Receiver<std::io::Result<String>>,
}

#[derive(Serialize)]
struct AdapterRequest<'a> {
    sentence: &'a str,
    aspect_term: &'a str,
}

#[derive(Deserialize)]
struct AdapterResponse {
    positive: f64,
    negative: f64,
    #[serde(default)]
    neutral: f64,
}

impl StdioScorerAdapter {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

    /// Spawn `program args...` and hold it for the adapter's lifetime.
    pub fn spawn(program: &str, args: &[String]) -> Result<StdioScorerAdapter, ScoreError> {
        StdioScorerAdapter::spawn_with_timeout(program, args, StdioScorerAdapter::DEFAULT_TIMEOUT)
    }

    pub fn spawn_with_timeout(
        program: &str,
        args: &[String],
        timeout: Duration,
    ) -> Result<StdioScorerAdapter, ScoreError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| ScoreError::Unavailable {
                reason: format!("failed to spawn {program:?}: {e}"),
            })?;
        let stdin = child.stdin.take().expect("stdin piped");
        let stdout = child.stdout.take().expect("stdout piped");

        let (sender, responses) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if sender.send(line).is_err() {
                    break;
                }
            }
        });

        let command_line = std::iter::once(program.to_string())
            .chain(args.iter().cloned())
            .collect::<Vec<_>>()
            .join(" ");
        Ok(StdioScorerAdapter {
            command_line,
            io: Mutex::new(AdapterIo {
                child,
                stdin,
                responses,
            }),
            timeout,
        })
    }
}

impl Scorer for StdioScorerAdapter {
    fn descriptor(&self) -> ScorerDescriptor {
        ScorerDescriptor {
            name: format!("adapter:{}", self.command_line),
            reentrant: false,
            deterministic: false,
        }
    }

    fn score(&self, sentence_text: &str, aspect_term: &str) -> Result<PolarityScore, ScoreError> {
        let mut io = self.io.lock().map_err(|_| ScoreError::Unavailable {
            reason: "adapter mutex poisoned".into(),
        })?;
        let request = serde_json::to_string(&AdapterRequest {
            sentence: sentence_text,
            aspect_term,
        })
        .expect("request serializes");
        writeln!(io.stdin, "{request}").map_err(|e| ScoreError::Unavailable {
            reason: format!("failed to write request: {e}"),
        })?;
        io.stdin.flush().map_err(|e| ScoreError::Unavailable {
            reason: format!("failed to flush request: {e}"),
        })?;

        let line = match io.responses.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                return Err(ScoreError::Unavailable {
                    reason: format!("failed to read response: {e}"),
                })
            }
            Err(RecvTimeoutError::Timeout) => {
                return Err(ScoreError::Unavailable {
                    reason: format!("no response within {:?}", self.timeout),
                })
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(ScoreError::Unavailable {
                    reason: "scorer process closed its stdout".into(),
                })
            }
        };

        let response: AdapterResponse =
            serde_json::from_str(&line).map_err(|e| ScoreError::Unavailable {
                reason: format!("malformed response line: {e}"),
            })?;
        PolarityScore::try_new(response.positive, response.negative, response.neutral)
    }
}

impl Drop for StdioScorerAdapter {
    fn drop(&mut self) {
        if let Ok(mut io) = self.io.lock() {
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}
