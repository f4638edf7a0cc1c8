//! Shared test support: brute-force reference implementations written
//! independently of the library (straight-line, no indexing, no banding),
//! a seeded synthetic corpus generator, and stub scorers.
//!
//! The reference code deliberately re-derives every rule from the documented
//! behavior instead of calling into the library, so agreement between the
//! two is evidence, not tautology.

#![allow(dead_code)]

use std::collections::HashMap;

use absa_core::corpus::ReviewRecord;
use absa_core::lexicon::{AspectId, AspectLexicon};
use absa_core::scoring::{PolarityScore, ScoreError, Scorer, ScorerDescriptor};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

// ---------------------------------------------------------------------------
// Reference: sentence segmentation

pub fn ref_segment(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '.' || c == '!' || c == '?' {
            current.push(c);
            let next_is_terminal = matches!(chars.peek(), Some('.') | Some('!') | Some('?'));
            if !next_is_terminal {
                let trimmed = current.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_string());
                }
                current.clear();
            }
        } else if c == '\n' {
            let trimmed = current.trim();
            if !trimmed.is_empty() {
                sentences.push(trimmed.to_string());
            }
            current.clear();
            while matches!(chars.peek(), Some('\n')) {
                chars.next();
            }
        } else {
            current.push(c);
        }
    }
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
    sentences
}

// ---------------------------------------------------------------------------
// Reference: spelling correction

/// Full-matrix Levenshtein distance, no banding, no early exit.
pub fn ref_edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        table[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            table[i][j] = (table[i - 1][j - 1] + cost)
                .min(table[i - 1][j] + 1)
                .min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()]
}

/// The corrector's candidate choice, recomputed by exhaustive ranking.
/// Returns None when the core should pass through (in dictionary, or no
/// candidate within the distance bound).
pub fn ref_best_candidate<'a>(
    core: &str,
    entries: &'a [(String, u64)],
    max_distance: usize,
) -> Option<&'a str> {
    let mut candidates: Vec<(u64, usize, &str)> = Vec::new();
    for (token, frequency) in entries {
        let distance = ref_edit_distance(core, token);
        if distance <= max_distance {
            candidates.push((*frequency, distance, token.as_str()));
        }
    }
    candidates.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(b.2))
    });
    candidates.first().map(|(_, _, token)| *token)
}

/// Token-by-token reimplementation of the correction policy over a whole
/// sentence, preserving whitespace runs verbatim.
pub fn ref_correct_text(text: &str, entries: &[(String, u64)], max_distance: usize) -> String {
    let in_dict: HashMap<&str, u64> = entries.iter().map(|(t, f)| (t.as_str(), *f)).collect();
    let mut output = String::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            while i < chars.len() && chars[i].is_whitespace() {
                output.push(chars[i]);
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let token: String = chars[start..i].iter().collect();
        output.push_str(&ref_correct_token(&token, &in_dict, entries, max_distance));
    }
    output
}

fn ref_correct_token(
    token: &str,
    in_dict: &HashMap<&str, u64>,
    entries: &[(String, u64)],
    max_distance: usize,
) -> String {
    let exempt = token.chars().any(|c| c.is_ascii_digit() || c == '@') || token.contains("://");
    if exempt {
        return token.to_string();
    }
    let chars: Vec<char> = token.chars().collect();
    let mut first_alnum = None;
    let mut last_alnum = None;
    for (i, c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            if first_alnum.is_none() {
                first_alnum = Some(i);
            }
            last_alnum = Some(i);
        }
    }
    let (Some(first), Some(last)) = (first_alnum, last_alnum) else {
        return token.to_string();
    };
    let prefix: String = chars[..first].iter().collect();
    let suffix: String = chars[last + 1..].iter().collect();
    let core: String = chars[first..=last].iter().collect::<String>().to_lowercase();
    if in_dict.contains_key(core.as_str()) {
        return format!("{prefix}{core}{suffix}");
    }
    match ref_best_candidate(&core, entries, max_distance) {
        Some(candidate) => format!("{prefix}{candidate}{suffix}"),
        None => format!("{prefix}{core}{suffix}"),
    }
}

// ---------------------------------------------------------------------------
// Reference: mention matching

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefMention {
    pub aspect: AspectId,
    pub surface: String,
    pub span: (usize, usize),
}

fn ref_word_tokens(chars: &[char]) -> Vec<(String, usize, usize)> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            let text: String = chars[s..i].iter().collect::<String>().to_lowercase();
            tokens.push((text, s, i));
        }
    }
    if let Some(s) = start {
        let text: String = chars[s..].iter().collect::<String>().to_lowercase();
        tokens.push((text, s, chars.len()));
    }
    tokens
}

fn ref_surface_tokens(surface: &str) -> Vec<String> {
    surface
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Exhaustive matcher: at every token position, try every surface in the
/// term list, then apply the documented precedence by explicit comparison.
pub fn ref_find_mentions(text: &str, terms: &[(String, AspectId)]) -> Vec<RefMention> {
    let chars: Vec<char> = text.chars().collect();
    let tokens = ref_word_tokens(&chars);
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        // (token_len, plural, surface, aspect)
        let mut candidates: Vec<(usize, bool, &str, AspectId)> = Vec::new();
        for (surface, aspect) in terms {
            let pattern = ref_surface_tokens(surface);
            if pattern.is_empty() || i + pattern.len() > tokens.len() {
                continue;
            }
            let mut plural = false;
            let mut matched = true;
            for (j, expected) in pattern.iter().enumerate() {
                let (actual, _, _) = &tokens[i + j];
                let last = j + 1 == pattern.len();
                if actual == expected {
                    continue;
                }
                if last && actual.len() > 1 && actual[..actual.len() - 1] == *expected.as_str() && actual.ends_with('s') {
                    plural = true;
                    continue;
                }
                matched = false;
                break;
            }
            if !matched {
                continue;
            }
            let mut gaps_clean = true;
            for j in 1..pattern.len() {
                let previous_end = tokens[i + j - 1].2;
                let this_start = tokens[i + j].1;
                if !chars[previous_end..this_start]
                    .iter()
                    .all(|c| c.is_whitespace() || *c == '-')
                {
                    gaps_clean = false;
                    break;
                }
            }
            if gaps_clean {
                candidates.push((pattern.len(), plural, surface.as_str(), *aspect));
            }
        }
        if candidates.is_empty() {
            i += 1;
            continue;
        }
        candidates.sort_by(|a, b| {
            b.0.cmp(&a.0)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(b.2))
        });
        let (token_len, _, surface, aspect) = candidates[0];
        mentions.push(RefMention {
            aspect,
            surface: surface.to_string(),
            span: (tokens[i].1, tokens[i + token_len - 1].2),
        });
        i += token_len;
    }
    mentions
}

// ---------------------------------------------------------------------------
// Reference: oracle scoring

pub const REF_POSITIVE_WORDS: &str = include_str!("../../src/data/positive_words.txt");
pub const REF_NEGATIVE_WORDS: &str = include_str!("../../src/data/negative_words.txt");

/// The bundled scorer rule, recomputed: tokenize, anchor on the first term
/// occurrence, count opinion words in a +/-5 window with 2-token negation
/// lookback, then apply the documented formula.
pub fn ref_oracle(sentence: &str, term: &str) -> (f64, f64, f64) {
    let positive: Vec<&str> = REF_POSITIVE_WORDS.split_whitespace().collect();
    let negative: Vec<&str> = REF_NEGATIVE_WORDS.split_whitespace().collect();
    let tokens: Vec<String> = sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect();
    let term_tokens = ref_surface_tokens(term);

    let mut anchor = None;
    if !term_tokens.is_empty() {
        'outer: for start in 0..tokens.len() {
            if start + term_tokens.len() > tokens.len() {
                break;
            }
            for (j, expected) in term_tokens.iter().enumerate() {
                let actual = &tokens[start + j];
                let last = j + 1 == term_tokens.len();
                let plural_ok = last
                    && actual.len() == expected.len() + 1
                    && actual.starts_with(expected.as_str())
                    && actual.ends_with('s');
                if actual != expected && !plural_ok {
                    continue 'outer;
                }
            }
            anchor = Some(start);
            break;
        }
    }

    let (low, high, skip_low, skip_high) = match anchor {
        Some(start) => {
            let end = start + term_tokens.len();
            (
                start.saturating_sub(5),
                (end + 5).min(tokens.len()),
                start,
                end,
            )
        }
        None => (0, tokens.len(), 0, 0),
    };

    let mut p = 0.0f64;
    let mut n = 0.0f64;
    for j in low..high {
        if j >= skip_low && j < skip_high {
            continue;
        }
        let word = tokens[j].as_str();
        let polarity = if positive.contains(&word) {
            1
        } else if negative.contains(&word) {
            -1
        } else {
            0
        };
        if polarity == 0 {
            continue;
        }
        let mut negated = false;
        for back in 1..=2usize {
            if back <= j {
                let before = tokens[j - back].as_str();
                if before == "not" || before == "no" || before == "never" {
                    negated = true;
                }
            }
        }
        let effective = if negated { -polarity } else { polarity };
        if effective > 0 {
            p += 1.0;
        } else {
            n += 1.0;
        }
    }

    let mass = (p + n) / (p + n + 1.0);
    let pos = (1.0 + p) / (2.0 + p + n) * mass;
    let neg = (1.0 + n) / (2.0 + p + n) * mass;
    (pos, neg, 1.0 - mass)
}

pub fn ref_signed(pos: f64, neg: f64) -> f64 {
    if pos >= neg {
        pos
    } else {
        -neg
    }
}

// ---------------------------------------------------------------------------
// Reference: straight-line pipeline (segment -> correct -> match -> score
// -> average), producing per-review aspect means in review_id order.

pub struct RefRow {
    pub review_id: String,
    pub airport: String,
    pub keywords: Vec<String>,
    pub values: Vec<f64>,  // indexed by AspectId::ALL order
    pub counts: Vec<u32>,
}

pub fn ref_rows(records: &[ReviewRecord], lexicon: &AspectLexicon, entries: &[(String, u64)]) -> Vec<RefRow> {
    let terms: Vec<(String, AspectId)> = lexicon
        .terms()
        .iter()
        .map(|t| (t.surface.clone(), t.aspect))
        .collect();
    let mut sorted: Vec<&ReviewRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.review_id.cmp(&b.review_id));

    let mut rows = Vec::new();
    for record in sorted {
        let mut sums = vec![0.0f64; 8];
        let mut counts = vec![0u32; 8];
        let mut keywords: Vec<String> = Vec::new();
        for raw in ref_segment(&record.text) {
            let corrected = ref_correct_text(&raw, entries, 2);
            for mention in ref_find_mentions(&corrected, &terms) {
                let (pos, neg, _) = ref_oracle(&corrected, &mention.surface);
                let signed = ref_signed(pos, neg);
                let index = AspectId::ALL
                    .iter()
                    .position(|a| *a == mention.aspect)
                    .unwrap();
                sums[index] += signed;
                counts[index] += 1;
                if !keywords.contains(&mention.surface) {
                    keywords.push(mention.surface.clone());
                }
            }
        }
        let values = sums
            .iter()
            .zip(&counts)
            .map(|(s, c)| if *c > 0 { s / *c as f64 } else { 0.0 })
            .collect();
        rows.push(RefRow {
            review_id: record.review_id.clone(),
            airport: record.airport.clone(),
            keywords,
            values,
            counts,
        });
    }
    rows
}

// ---------------------------------------------------------------------------
// Synthetic corpus generator

pub const GENERATOR_AIRPORTS: [&str; 3] = ["DXB", "DOH", "IST"];

const FILLER: [&str; 20] = [
    "the", "was", "is", "and", "at", "very", "quite", "really", "but", "so", "this", "that",
    "a", "we", "they", "it", "for", "with", "again", "during",
];
const POSITIVE_OPINIONS: [&str; 8] = [
    "good", "great", "clean", "friendly", "helpful", "fast", "comfortable", "spacious",
];
const NEGATIVE_OPINIONS: [&str; 8] = [
    "bad", "slow", "dirty", "rude", "expensive", "bland", "long", "crowded",
];
const NEGATORS: [&str; 3] = ["not", "no", "never"];

/// Deterministic synthetic review corpus built from lexicon terms, opinion
/// words, fillers, negators, casing noise, and occasional typos.
pub fn generate_corpus(seed: u64, count: usize) -> Vec<ReviewRecord> {
    let lexicon = AspectLexicon::builtin();
    let surfaces: Vec<String> = lexicon.terms().iter().map(|t| t.surface.clone()).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut records = Vec::new();
    for index in 0..count {
        let airport = GENERATOR_AIRPORTS[rng.gen_range(0..GENERATOR_AIRPORTS.len())];
        let rating = rng.gen_range(1..=5u8);
        let text = if rng.gen_ratio(1, 20) {
            String::new()
        } else {
            generate_text(&mut rng, &surfaces)
        };
        records.push(ReviewRecord {
            review_id: format!("r{index:04}"),
            airport: airport.to_string(),
            text,
            rating,
        });
    }
    records
}

fn generate_text(rng: &mut StdRng, surfaces: &[String]) -> String {
    let sentence_count = rng.gen_range(1..=4);
    let mut text = String::new();
    for s in 0..sentence_count {
        let mut words: Vec<String> = Vec::new();
        for _ in 0..rng.gen_range(3..=9) {
            match rng.gen_range(0..10) {
                0..=4 => words.push(FILLER[rng.gen_range(0..FILLER.len())].to_string()),
                5..=6 => {
                    let surface = &surfaces[rng.gen_range(0..surfaces.len())];
                    for token in surface.split_whitespace() {
                        words.push(token.to_string());
                    }
                }
                7 => words.push(POSITIVE_OPINIONS[rng.gen_range(0..POSITIVE_OPINIONS.len())].to_string()),
                8 => words.push(NEGATIVE_OPINIONS[rng.gen_range(0..NEGATIVE_OPINIONS.len())].to_string()),
                _ => {
                    words.push(NEGATORS[rng.gen_range(0..NEGATORS.len())].to_string());
                    let opinion = if rng.gen_bool(0.5) {
                        POSITIVE_OPINIONS[rng.gen_range(0..POSITIVE_OPINIONS.len())]
                    } else {
                        NEGATIVE_OPINIONS[rng.gen_range(0..NEGATIVE_OPINIONS.len())]
                    };
                    words.push(opinion.to_string());
                }
            }
        }
        // Casing noise: capitalize or upper-case a few words.
        for word in words.iter_mut() {
            match rng.gen_range(0..10) {
                0 => *word = word.to_uppercase(),
                1 => {
                    let mut chars = word.chars();
                    if let Some(first) = chars.next() {
                        *word = first.to_uppercase().collect::<String>() + chars.as_str();
                    }
                }
                _ => {}
            }
        }
        // Occasional single-letter typo in one word.
        if rng.gen_ratio(1, 6) {
            let at = rng.gen_range(0..words.len());
            words[at] = corrupt_word(rng, &words[at]);
        }
        text.push_str(&words.join(" "));
        match rng.gen_range(0..6) {
            0 => text.push('!'),
            1 => text.push('?'),
            2..=4 => text.push('.'),
            _ => {}
        }
        if s + 1 < sentence_count {
            if rng.gen_ratio(1, 5) {
                text.push('\n');
            } else {
                text.push(' ');
            }
        }
    }
    text
}

/// One random lowercase-letter edit: substitution, deletion, or insertion.
pub fn corrupt_word(rng: &mut StdRng, word: &str) -> String {
    let letters: Vec<char> = "abcdefghijklmnopqrstuvwxyz".chars().collect();
    let chars: Vec<char> = word.chars().collect();
    if chars.is_empty() {
        return word.to_string();
    }
    let mut out = chars.clone();
    match rng.gen_range(0..3) {
        0 => {
            let at = rng.gen_range(0..out.len());
            out[at] = letters[rng.gen_range(0..letters.len())];
        }
        1 => {
            let at = rng.gen_range(0..out.len());
            out.remove(at);
        }
        _ => {
            let at = rng.gen_range(0..=out.len());
            out.insert(at, letters[rng.gen_range(0..letters.len())]);
        }
    }
    out.into_iter().collect()
}

/// Shuffle a record list deterministically.
pub fn shuffle_records(records: &mut [ReviewRecord], seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    records.shuffle(&mut rng);
}

// ---------------------------------------------------------------------------
// Stub scorers

/// Scorer returning fixed component triples keyed by aspect term; any term
/// not in the table gets a neutral score.
pub struct TableScorer {
    pub name: String,
    pub table: HashMap<String, (f64, f64, f64)>,
}

impl TableScorer {
    pub fn new(entries: &[(&str, (f64, f64, f64))]) -> TableScorer {
        TableScorer {
            name: "table-stub".to_string(),
            table: entries
                .iter()
                .map(|(term, triple)| (term.to_string(), *triple))
                .collect(),
        }
    }
}

impl Scorer for TableScorer {
    fn descriptor(&self) -> ScorerDescriptor {
        ScorerDescriptor {
            name: self.name.clone(),
            reentrant: true,
            deterministic: true,
        }
    }

    fn score(&self, _sentence: &str, aspect_term: &str) -> Result<PolarityScore, ScoreError> {
        let (pos, neg, neu) = self
            .table
            .get(aspect_term)
            .copied()
            .unwrap_or((0.0, 0.0, 1.0));
        PolarityScore::try_new(pos, neg, neu)
    }
}

/// Scorer wrapping the library oracle but shifting every score toward
/// neutral; used to check that swapping scorers never changes which cells
/// are populated.
pub struct DampenedOracle {
    inner: absa_core::scoring::OracleScorer,
}

impl DampenedOracle {
    pub fn new() -> DampenedOracle {
        DampenedOracle {
            inner: absa_core::scoring::OracleScorer::new(),
        }
    }
}

impl Scorer for DampenedOracle {
    fn descriptor(&self) -> ScorerDescriptor {
        ScorerDescriptor {
            name: "dampened-oracle".to_string(),
            reentrant: true,
            deterministic: true,
        }
    }

    fn score(&self, sentence: &str, aspect_term: &str) -> Result<PolarityScore, ScoreError> {
        let base = self.inner.score(sentence, aspect_term)?;
        let pos = base.positive() * 0.5;
        let neg = base.negative() * 0.5;
        PolarityScore::try_new(pos, neg, 1.0 - pos - neg)
    }
}
