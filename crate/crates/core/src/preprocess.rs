//! Sentence segmentation and spelling correction, the first two pipeline
//! stages.
//!
//! Segmentation is rule-based: a boundary is a maximal run of `.` `!` `?`
//! (kept on the sentence it ends) or a newline run (dropped). A trailing
//! fragment without terminal punctuation still becomes a sentence, since
//! review text is full of them.
//!
//! Correction is a deterministic frequency-weighted edit-distance lookup
//! (distance <= 2 by default). A token found in the dictionary passes
//! through; otherwise the candidate set is every dictionary entry within
//! the distance bound, ranked by higher frequency, then lower distance,
//! then lexicographic order. No candidate means the token passes through
//! unchanged. Tokens carrying digits, "@", or "://" are exempt so gate
//! codes and handles survive. Output is lowercase; punctuation attached
//! to a token is preserved around the corrected core.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::lexicon::AspectLexicon;

/// One segment of a review, before and after spelling correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub review_id: String,
    /// 0-based position within the review.
    pub index: usize,
    pub raw_text: String,
    pub corrected_text: String,
}

/// Split review text into sentences. `corrected_text` starts equal to
/// `raw_text`; [`correct_spelling`] rewrites it.
pub fn segment_sentences(review_id: &str, text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;

    let push = |piece: &[char], sentences: &mut Vec<Sentence>| {
        let text: String = piece.iter().collect::<String>().trim().to_string();
        if !text.is_empty() {
            sentences.push(Sentence {
                review_id: review_id.to_string(),
                index: sentences.len(),
                raw_text: text.clone(),
                corrected_text: text,
            });
        }
    };

    while i < chars.len() {
        if matches!(chars[i], '.' | '!' | '?') {
            // Terminal run stays attached to its sentence.
            while i < chars.len() && matches!(chars[i], '.' | '!' | '?') {
                i += 1;
            }
            push(&chars[start..i], &mut sentences);
            start = i;
        } else if chars[i] == '\n' {
            // Newline runs separate sentences but are not kept.
            push(&chars[start..i], &mut sentences);
            while i < chars.len() && chars[i] == '\n' {
                i += 1;
            }
            start = i;
        } else {
            i += 1;
        }
    }
    push(&chars[start..], &mut sentences);
    sentences
}

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("failed to read dictionary file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("duplicate dictionary token {token:?}")]
    DuplicateToken { token: String },
}

/// Frequency given to lexicon surface tokens absent from the word list.
/// Above every bundled common-word frequency, so an aspect term always
/// outranks a same-distance competitor.
const LEXICON_TOKEN_FREQUENCY: u64 = 1_000_000;

/// Token -> corpus frequency map driving spelling correction.
#[derive(Debug, Clone)]
pub struct SpellDictionary {
    entries: HashMap<String, u64>,
    max_edit_distance: usize,
}

impl SpellDictionary {
    /// Bundled common-English word list plus every surface token of the
    /// given lexicon, so misspelled aspect terms stay recoverable.
    pub fn builtin(lexicon: &AspectLexicon) -> SpellDictionary {
        let text = include_str!("data/common_words.tsv");
        let mut dict =
            SpellDictionary::parse(text).expect("bundled word list is well-formed");
        dict.absorb_lexicon(lexicon);
        dict
    }

    /// Load a "token<TAB>frequency" file, then add any missing lexicon
    /// surface tokens.
    pub fn load(path: &Path, lexicon: &AspectLexicon) -> Result<SpellDictionary, DictionaryError> {
        let text = std::fs::read_to_string(path)?;
        let mut dict = SpellDictionary::parse(&text)?;
        dict.absorb_lexicon(lexicon);
        Ok(dict)
    }

    /// Build from explicit entries (tests and embedders).
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, u64)>,
        lexicon: &AspectLexicon,
    ) -> Result<SpellDictionary, DictionaryError> {
        let mut map = HashMap::new();
        for (token, frequency) in entries {
            validate_entry(&token, frequency, 0)?;
            if map.insert(token.clone(), frequency).is_some() {
                return Err(DictionaryError::DuplicateToken { token });
            }
        }
        let mut dict = SpellDictionary {
            entries: map,
            max_edit_distance: 2,
        };
        dict.absorb_lexicon(lexicon);
        Ok(dict)
    }

    fn parse(text: &str) -> Result<SpellDictionary, DictionaryError> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_number = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (token, frequency) =
                line.split_once('\t')
                    .ok_or_else(|| DictionaryError::MalformedLine {
                        line: line_number,
                        reason: "expected token<TAB>frequency".into(),
                    })?;
            let frequency: u64 =
                frequency
                    .trim()
                    .parse()
                    .map_err(|_| DictionaryError::MalformedLine {
                        line: line_number,
                        reason: format!("frequency {frequency:?} is not a positive integer"),
                    })?;
            validate_entry(token, frequency, line_number)?;
            if entries.insert(token.to_string(), frequency).is_some() {
                return Err(DictionaryError::DuplicateToken {
                    token: token.to_string(),
                });
            }
        }
        Ok(SpellDictionary {
            entries,
            max_edit_distance: 2,
        })
    }

    fn absorb_lexicon(&mut self, lexicon: &AspectLexicon) {
        for token in lexicon.surface_tokens() {
            self.entries
                .entry(token)
                .or_insert(LEXICON_TOKEN_FREQUENCY);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    /// All (token, frequency) entries, in arbitrary order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(t, f)| (t.as_str(), *f))
    }

    pub fn max_edit_distance(&self) -> usize {
        self.max_edit_distance
    }

    /// Best correction for a lowercase core token, or None to pass through.
    /// Candidates within the distance bound rank by (frequency desc,
    /// distance asc, token asc).
    fn best_candidate(&self, core: &str) -> Option<&str> {
        let mut best: Option<(u64, usize, &str)> = None;
        for (token, &frequency) in &self.entries {
            let Some(distance) = edit_distance_within(core, token, self.max_edit_distance) else {
                continue;
            };
            let better = match best {
                None => true,
                Some((best_frequency, best_distance, best_token)) => {
                    (std::cmp::Reverse(frequency), distance, token.as_str())
                        < (std::cmp::Reverse(best_frequency), best_distance, best_token)
                }
            };
            if better {
                best = Some((frequency, distance, token));
            }
        }
        best.map(|(_, _, token)| token)
    }
}

fn validate_entry(token: &str, frequency: u64, line: usize) -> Result<(), DictionaryError> {
    if token.is_empty() || token.chars().any(|c| c.is_whitespace()) {
        return Err(DictionaryError::MalformedLine {
            line,
            reason: format!("token {token:?} is empty or contains whitespace"),
        });
    }
    if token.chars().any(|c| c.is_uppercase()) {
        return Err(DictionaryError::MalformedLine {
            line,
            reason: format!("token {token:?} must be lowercase"),
        });
    }
    if frequency == 0 {
        return Err(DictionaryError::MalformedLine {
            line,
            reason: "frequency must be positive".into(),
        });
    }
    Ok(())
}

/// Levenshtein distance if it is <= `bound`, else None. Rows are pruned
/// with the classic band optimization so the common reject case is cheap.
fn edit_distance_within(a: &str, b: &str, bound: usize) -> Option<usize> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.len().abs_diff(b.len()) > bound {
        return None;
    }
    let mut previous: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        current[0] = i;
        let mut row_min = current[0];
        for j in 1..=b.len() {
            let substitution = previous[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            current[j] = substitution.min(previous[j] + 1).min(current[j - 1] + 1);
            row_min = row_min.min(current[j]);
        }
        if row_min > bound {
            return None;
        }
        std::mem::swap(&mut previous, &mut current);
    }
    (previous[b.len()] <= bound).then_some(previous[b.len()])
}

/// Rewrite `corrected_text` token by token. See the module doc for the
/// exact policy; whitespace layout is preserved.
pub fn correct_spelling(sentence: &Sentence, dict: &SpellDictionary) -> Sentence {
    let mut output = String::new();
    let mut rest = sentence.corrected_text.as_str();
    while !rest.is_empty() {
        let ws_end = rest
            .find(|c: char| !c.is_whitespace())
            .unwrap_or(rest.len());
        output.push_str(&rest[..ws_end]);
        rest = &rest[ws_end..];
        if rest.is_empty() {
            break;
        }
        let token_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        output.push_str(&correct_token(&rest[..token_end], dict));
        rest = &rest[token_end..];
    }
    Sentence {
        review_id: sentence.review_id.clone(),
        index: sentence.index,
        raw_text: sentence.raw_text.clone(),
        corrected_text: output,
    }
}

fn correct_token(token: &str, dict: &SpellDictionary) -> String {
    // Gate codes, handles, and URLs are never touched, casing included.
    if token.chars().any(|c| c.is_ascii_digit() || c == '@') || token.contains("://") {
        return token.to_string();
    }

    // Peel leading/trailing punctuation; correct only the core.
    let chars: Vec<char> = token.chars().collect();
    let core_start = chars
        .iter()
        .position(|c| c.is_alphanumeric())
        .unwrap_or(chars.len());
    let core_end = chars
        .iter()
        .rposition(|c| c.is_alphanumeric())
        .map_or(core_start, |p| p + 1);
    let prefix: String = chars[..core_start].iter().collect();
    let suffix: String = chars[core_end.max(core_start)..].iter().collect();
    let core: String = chars[core_start..core_end]
        .iter()
        .collect::<String>()
        .to_lowercase();

    if core.is_empty() || dict.contains(&core) {
        return format!("{prefix}{core}{suffix}");
    }
    let corrected = dict.best_candidate(&core).unwrap_or(core.as_str());
    format!("{prefix}{corrected}{suffix}")
}
