//! The eight-aspect service taxonomy and mention matching.
//!
//! An [`AspectLexicon`] maps each [`AspectId`] to a set of lowercase surface
//! terms. [`find_mentions`] locates those terms inside a corrected sentence
//! using token-boundary matching with leftmost-longest precedence:
//!
//! - matching is case-insensitive and operates on word tokens (maximal runs
//!   of alphanumeric characters);
//! - multi-token surfaces match token sequences whose gaps contain only
//!   whitespace or hyphens, so "check-in", "check in" and "check  in" are
//!   equivalent;
//! - a trailing "s" on the sentence token matches a surface's final token
//!   ("gates" matches the surface "gate");
//! - at a given position the candidate covering the most tokens wins, an
//!   exact match beats a plural match, and remaining ties resolve to the
//!   lexicographically smallest surface;
//! - mentions never overlap and are returned in span order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::preprocess::Sentence;

/// The closed set of service aspects, in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AspectId {
    Facilities,
    Terminal,
    Access,
    Security,
    CheckIn,
    Wayfinding,
    Arrival,
    Staff,
}

impl AspectId {
    /// All aspects in canonical (output column) order.
    pub const ALL: [AspectId; 8] = [
        AspectId::Facilities,
        AspectId::Terminal,
        AspectId::Access,
        AspectId::Security,
        AspectId::CheckIn,
        AspectId::Wayfinding,
        AspectId::Arrival,
        AspectId::Staff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AspectId::Facilities => "facilities",
            AspectId::Terminal => "terminal",
            AspectId::Access => "access",
            AspectId::Security => "security",
            AspectId::CheckIn => "check_in",
            AspectId::Wayfinding => "wayfinding",
            AspectId::Arrival => "arrival",
            AspectId::Staff => "staff",
        }
    }

    pub fn from_name(name: &str) -> Option<AspectId> {
        AspectId::ALL.into_iter().find(|a| a.as_str() == name)
    }

    fn ordinal(self) -> usize {
        AspectId::ALL.iter().position(|a| *a == self).unwrap()
    }
}

impl fmt::Display for AspectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value per aspect, iterated and serialized in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerAspect<T> {
    items: [T; 8],
}

impl<T> PerAspect<T> {
    pub fn from_fn(mut f: impl FnMut(AspectId) -> T) -> Self {
        PerAspect {
            items: AspectId::ALL.map(&mut f),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (AspectId, &T)> {
        AspectId::ALL.iter().map(move |a| (*a, &self[*a]))
    }

    pub fn map<U>(&self, mut f: impl FnMut(AspectId, &T) -> U) -> PerAspect<U> {
        PerAspect::from_fn(|a| f(a, &self[a]))
    }
}

impl<T: Default> Default for PerAspect<T> {
    fn default() -> Self {
        PerAspect::from_fn(|_| T::default())
    }
}

impl<T> Index<AspectId> for PerAspect<T> {
    type Output = T;
    fn index(&self, aspect: AspectId) -> &T {
        &self.items[aspect.ordinal()]
    }
}

impl<T> IndexMut<AspectId> for PerAspect<T> {
    fn index_mut(&mut self, aspect: AspectId) -> &mut T {
        &mut self.items[aspect.ordinal()]
    }
}

impl<T: Serialize> Serialize for PerAspect<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(8))?;
        for (aspect, value) in self.iter() {
            map.serialize_entry(aspect.as_str(), value)?;
        }
        map.end()
    }
}

/// One lexicon entry: a lowercase surface of 1..=4 word tokens and its aspect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectTerm {
    pub surface: String,
    pub aspect: AspectId,
}

/// An occurrence of a lexicon surface inside a sentence.
///
/// `span` is a character (not byte) `[start, end)` range into the sentence's
/// `corrected_text`; the covered slice normalizes to `matched_term`, modulo
/// a trailing plural "s" ("queues" may carry `matched_term: "queue"`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectMention {
    pub review_id: String,
    pub sentence_index: usize,
    pub aspect: AspectId,
    pub matched_term: String,
    pub span: (usize, usize),
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read lexicon file: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon document is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("lexicon document must be a JSON object mapping aspect names to term arrays")]
    NotAnObject,
    #[error("unknown aspect name {name:?}")]
    UnknownAspectName { name: String },
    #[error("aspect {name:?} has no terms")]
    EmptyAspect { name: String },
    #[error("term {term:?} appears under both {first} and {second}")]
    DuplicateTerm {
        term: String,
        first: AspectId,
        second: AspectId,
    },
    #[error("invalid term {term:?}: {reason}")]
    InvalidTerm { term: String, reason: String },
}

/// Default lexicon contents. Terms are reconstructed from the service
/// taxonomies this tool targets; environment terms (clean, ambience) are
/// routed to the terminal aspect so the output schema stays at eight columns.
const BUILTIN_TERMS: [(AspectId, &[&str]); 8] = [
    (
        AspectId::Facilities,
        &[
            "facilities",
            "food",
            "seats",
            "toilet",
            "toilets",
            "wifi",
            "restaurants",
            "atm",
            "shops",
            "amenities",
            "lounge",
            "shuttle",
        ],
    ),
    (
        AspectId::Terminal,
        &[
            "terminal",
            "terminals",
            "gate",
            "gates",
            "clean",
            "cleanliness",
            "ambience",
        ],
    ),
    (
        AspectId::Access,
        &[
            "access",
            "transportation",
            "parking",
            "trolleys",
            "baggage",
            "taxi",
        ],
    ),
    (AspectId::Security, &["security", "inspection"]),
    (
        AspectId::CheckIn,
        &["check-in", "check in", "checkin", "queue", "line"],
    ),
    (
        AspectId::Wayfinding,
        &["wayfinding", "signs", "signage", "screens"],
    ),
    (AspectId::Arrival, &["arrival", "immigration", "passport"]),
    (AspectId::Staff, &["staff", "personnel", "crew"]),
];

/// A surface compiled to its token sequence for matching.
#[derive(Debug, Clone)]
struct Pattern {
    surface: String,
    tokens: Vec<String>,
    aspect: AspectId,
}

/// Validated aspect lexicon with a first-token index over all surfaces.
#[derive(Debug, Clone)]
pub struct AspectLexicon {
    terms: Vec<AspectTerm>,
    patterns: Vec<Pattern>,
    // first normalized token -> indices into `patterns`
    index: HashMap<String, Vec<usize>>,
}

impl AspectLexicon {
    /// The lexicon bundled into the artifact.
    pub fn builtin() -> AspectLexicon {
        let entries = BUILTIN_TERMS
            .iter()
            .flat_map(|(aspect, terms)| terms.iter().map(|t| (t.to_string(), *aspect)))
            .collect::<Vec<_>>();
        AspectLexicon::from_entries(entries).expect("builtin lexicon is valid")
    }

    /// Load a lexicon document: a JSON object whose keys are exactly the
    /// eight aspect names and whose values are arrays of term strings.
    pub fn load(path: &Path) -> Result<AspectLexicon, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        AspectLexicon::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<AspectLexicon, LexiconError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let object = value.as_object().ok_or(LexiconError::NotAnObject)?;

        let mut per_aspect: HashMap<AspectId, Vec<String>> = HashMap::new();
        for (key, terms) in object {
            let aspect = AspectId::from_name(key).ok_or_else(|| LexiconError::UnknownAspectName {
                name: key.clone(),
            })?;
            let list = terms
                .as_array()
                .ok_or_else(|| LexiconError::InvalidTerm {
                    term: key.clone(),
                    reason: "aspect value must be an array of strings".into(),
                })?
                .iter()
                .map(|t| {
                    t.as_str().map(str::to_owned).ok_or_else(|| LexiconError::InvalidTerm {
                        term: t.to_string(),
                        reason: "terms must be strings".into(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            per_aspect.insert(aspect, list);
        }

        let mut entries = Vec::new();
        for aspect in AspectId::ALL {
            let terms = per_aspect.remove(&aspect).unwrap_or_default();
            if terms.is_empty() {
                return Err(LexiconError::EmptyAspect {
                    name: aspect.as_str().to_string(),
                });
            }
            entries.extend(terms.into_iter().map(|t| (t, aspect)));
        }
        AspectLexicon::from_entries(entries)
    }

    /// Build from (surface, aspect) pairs. Surfaces are trimmed and
    /// lowercased; duplicates (after normalization) are rejected.
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, AspectId)>,
    ) -> Result<AspectLexicon, LexiconError> {
        let mut terms: Vec<AspectTerm> = Vec::new();
        let mut seen: HashMap<String, AspectId> = HashMap::new();
        let mut patterns = Vec::new();
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();

        for (raw, aspect) in entries {
            let surface = raw.trim().to_lowercase();
            if surface.is_empty() {
                return Err(LexiconError::InvalidTerm {
                    term: raw,
                    reason: "term is empty".into(),
                });
            }
            if surface.contains(';') {
                return Err(LexiconError::InvalidTerm {
                    term: surface,
                    reason: "terms must not contain ';'".into(),
                });
            }
            let tokens = surface_tokens(&surface);
            if tokens.is_empty() {
                return Err(LexiconError::InvalidTerm {
                    term: surface,
                    reason: "term has no word characters".into(),
                });
            }
            if tokens.len() > 4 {
                return Err(LexiconError::InvalidTerm {
                    term: surface,
                    reason: "terms are limited to 4 tokens".into(),
                });
            }
            if let Some(first) = seen.get(&surface) {
                return Err(LexiconError::DuplicateTerm {
                    term: surface,
                    first: *first,
                    second: aspect,
                });
            }
            seen.insert(surface.clone(), aspect);

            index
                .entry(tokens[0].clone())
                .or_default()
                .push(patterns.len());
            patterns.push(Pattern {
                surface: surface.clone(),
                tokens,
                aspect,
            });
            terms.push(AspectTerm { surface, aspect });
        }

        for aspect in AspectId::ALL {
            if !terms.iter().any(|t| t.aspect == aspect) {
                return Err(LexiconError::EmptyAspect {
                    name: aspect.as_str().to_string(),
                });
            }
        }

        Ok(AspectLexicon {
            terms,
            patterns,
            index,
        })
    }

    pub fn terms(&self) -> &[AspectTerm] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Aspect of an exact (normalized) surface, if present.
    pub fn lookup(&self, surface: &str) -> Option<AspectId> {
        let surface = surface.trim().to_lowercase();
        self.terms
            .iter()
            .find(|t| t.surface == surface)
            .map(|t| t.aspect)
    }

    /// Every distinct word token appearing in any surface. Used to seed the
    /// spelling dictionary so misspelled aspect terms stay recoverable.
    pub fn surface_tokens(&self) -> Vec<String> {
        let mut tokens: Vec<String> = self
            .terms
            .iter()
            .flat_map(|t| t.surface.split_whitespace().map(str::to_owned))
            .collect();
        tokens.sort();
        tokens.dedup();
        tokens
    }

    /// Serialize as the canonical lexicon document (aspect name -> terms).
    pub fn to_json_pretty(&self) -> String {
        let by_aspect = PerAspect::from_fn(|aspect| {
            self.terms
                .iter()
                .filter(|t| t.aspect == aspect)
                .map(|t| t.surface.clone())
                .collect::<Vec<_>>()
        });
        serde_json::to_string_pretty(&by_aspect).expect("lexicon serializes")
    }
}

/// Normalize a surface to its token sequence: split on any non-alphanumeric
/// character, lowercase. "check-in" and "check in" both become ["check","in"].
fn surface_tokens(surface: &str) -> Vec<String> {
    surface
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// A word token of the sentence, with char offsets into the original text.
#[derive(Debug, Clone)]
pub(crate) struct WordToken {
    pub text: String, // lowercased
    pub start: usize, // char offset
    pub end: usize,   // char offset, exclusive
}

/// Split `chars` into maximal alphanumeric runs with char offsets.
pub(crate) fn word_tokens(chars: &[char]) -> Vec<WordToken> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_alphanumeric() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect::<String>().to_lowercase();
            tokens.push(WordToken {
                text,
                start,
                end: i,
            });
        } else {
            i += 1;
        }
    }
    tokens
}

/// How a candidate matched at a position; exact beats plural on ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MatchKind {
    Exact,
    Plural,
}

/// Find all aspect mentions in the sentence's corrected text.
pub fn find_mentions(sentence: &Sentence, lexicon: &AspectLexicon) -> Vec<AspectMention> {
    let chars: Vec<char> = sentence.corrected_text.chars().collect();
    let tokens = word_tokens(&chars);
    let mut mentions = Vec::new();

    let mut i = 0;
    while i < tokens.len() {
        let mut best: Option<(usize, MatchKind, &Pattern)> = None;
        let mut candidates: Vec<usize> = Vec::new();
        if let Some(list) = lexicon.index.get(&tokens[i].text) {
            candidates.extend_from_slice(list);
        }
        // Single-token surfaces may match this token through the plural rule.
        if let Some(stem) = tokens[i].text.strip_suffix('s') {
            if let Some(list) = lexicon.index.get(stem) {
                candidates.extend(
                    list.iter()
                        .copied()
                        .filter(|&p| lexicon.patterns[p].tokens.len() == 1),
                );
            }
        }

        for &pattern_idx in &candidates {
            let pattern = &lexicon.patterns[pattern_idx];
            if let Some(kind) = match_at(&chars, &tokens, i, &pattern.tokens) {
                let len = pattern.tokens.len();
                // More tokens wins; then exact over plural; then smallest surface.
                let key = (usize::MAX - len, kind_rank(kind), pattern.surface.clone());
                let better = match &best {
                    None => true,
                    Some((best_len, best_kind, best_pattern)) => {
                        key < (
                            usize::MAX - best_len,
                            kind_rank(*best_kind),
                            best_pattern.surface.clone(),
                        )
                    }
                };
                if better {
                    best = Some((len, kind, pattern));
                }
            }
        }

        if let Some((len, _, pattern)) = best {
            let span = (tokens[i].start, tokens[i + len - 1].end);
            mentions.push(AspectMention {
                review_id: sentence.review_id.clone(),
                sentence_index: sentence.index,
                aspect: pattern.aspect,
                matched_term: pattern.surface.clone(),
                span,
            });
            i += len;
        } else {
            i += 1;
        }
    }
    mentions
}

fn kind_rank(kind: MatchKind) -> u8 {
    match kind {
        MatchKind::Exact => 0,
        MatchKind::Plural => 1,
    }
}

/// Try to match `pattern_tokens` starting at token index `at`. Gaps between
/// consecutive matched tokens may contain only whitespace or hyphens.
fn match_at(
    chars: &[char],
    tokens: &[WordToken],
    at: usize,
    pattern_tokens: &[String],
) -> Option<MatchKind> {
    if at + pattern_tokens.len() > tokens.len() {
        return None;
    }
    let mut kind = MatchKind::Exact;
    for (j, expected) in pattern_tokens.iter().enumerate() {
        let token = &tokens[at + j];
        let is_final = j == pattern_tokens.len() - 1;
        if token.text == *expected {
            // exact token
        } else if is_final && token.text.strip_suffix('s') == Some(expected.as_str()) {
            kind = MatchKind::Plural;
        } else {
            return None;
        }
        if j > 0 {
            let gap = &chars[tokens[at + j - 1].end..token.start];
            if !gap.iter().all(|c| c.is_whitespace() || *c == '-') {
                return None;
            }
        }
    }
    Some(kind)
}
