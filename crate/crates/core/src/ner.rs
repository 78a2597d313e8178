//! Named-entity counting behind a provider boundary.
//!
//! [`PatternNer`] is a small rule-based recognizer. [`AnnotationFile`] serves
//! spans produced elsewhere (for instance by a statistical NER model) from a
//! JSON-lines file keyed by sentence id.

use std::collections::HashMap;
use std::io::BufRead;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityLabel {
    PersonOrOrgOrLoc,
    Temporal,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    pub token_range: Range<usize>,
    pub label: EntityLabel,
}

#[derive(Debug, Error)]
pub enum NerError {
    #[error("annotation line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no annotations for sentence id {0:?}")]
    UnknownId(String),
    #[error("annotations for {id:?} reach token {end} but the sentence has {len} tokens")]
    OutOfRange { id: String, end: usize, len: usize },
    #[error("failed to read annotations: {0}")]
    Io(#[from] std::io::Error),
}

pub trait NerProvider: Send + Sync {
    fn name(&self) -> &str;

    /// Entity spans for one sentence, sorted and non-overlapping.
    fn annotate(&self, id: &str, tokens: &[Token]) -> Result<Vec<EntitySpan>, NerError>;
}

/// Function words never taken as an entity at the head of a sentence.
const HEAD_FUNCTION_WORDS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "it", "its", "he", "she", "they", "we", "you", "i", "there",
    "here", "some", "many", "most", "all", "any", "each", "every", "no", "not", "of", "at", "in", "on", "for", "to",
    "from", "by", "with", "and", "or", "but", "if", "when", "while", "what", "which", "who", "how", "why", "as",
    "after", "before", "my", "our", "your", "his", "her", "their", "one", "so", "yes",
];

const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

const WEEKDAYS: &[&str] = &[
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

fn is_temporal_word(token: &Token) -> bool {
    if token.kind != TokenKind::Word {
        return false;
    }
    let lower = token.text.to_lowercase();
    // lowercase "may" and "march" are usually verbs
    if matches!(lower.as_str(), "may" | "march") && !token.is_capitalized() {
        return false;
    }
    MONTHS.contains(&lower.as_str()) || WEEKDAYS.contains(&lower.as_str())
}

fn is_year(token: &Token) -> bool {
    token.kind == TokenKind::Number && token.text.len() == 4 && token.text.bytes().all(|b| b.is_ascii_digit())
}

/// Capitalized word that may be part of a name. The pronoun "I" never is.
fn is_name_word(token: &Token) -> bool {
    token.is_capitalized() && token.text != "I"
}

/// Rule-based entity spans:
///
/// * maximal runs of capitalized words, where the sentence head counts unless
///   it is a common function word;
/// * month names, weekday names and four-digit years (temporal);
/// * any other number token.
///
/// Capitalized runs take precedence over temporal words, which take
/// precedence over plain numbers. A run made only of month or weekday names
/// is labelled temporal.
pub fn pattern_annotate(tokens: &[Token]) -> Vec<EntitySpan> {
    let head = tokens.iter().position(|t| t.kind != TokenKind::Punctuation);
    let mut name_word: Vec<bool> = tokens.iter().map(is_name_word).collect();
    if let Some(h) = head {
        let lower = tokens[h].text.to_lowercase();
        if HEAD_FUNCTION_WORDS.contains(&lower.as_str()) {
            name_word[h] = false;
        }
    }

    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if name_word[i] {
            let start = i;
            while i < tokens.len() && name_word[i] {
                i += 1;
            }
            let label = if tokens[start..i].iter().all(is_temporal_word) {
                EntityLabel::Temporal
            } else {
                EntityLabel::PersonOrOrgOrLoc
            };
            spans.push(EntitySpan {
                token_range: start..i,
                label,
            });
            continue;
        }
        let token = &tokens[i];
        if is_temporal_word(token) || is_year(token) {
            spans.push(EntitySpan {
                token_range: i..i + 1,
                label: EntityLabel::Temporal,
            });
        } else if token.kind == TokenKind::Number {
            spans.push(EntitySpan {
                token_range: i..i + 1,
                label: EntityLabel::Number,
            });
        }
        i += 1;
    }
    spans
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PatternNer;

impl NerProvider for PatternNer {
    fn name(&self) -> &str {
        "pattern"
    }

    fn annotate(&self, _id: &str, tokens: &[Token]) -> Result<Vec<EntitySpan>, NerError> {
        Ok(pattern_annotate(tokens))
    }
}

#[derive(Deserialize)]
struct AnnotationLine {
    id: String,
    entities: Vec<(usize, usize, EntityLabel)>,
}

/// Precomputed entity spans keyed by sentence id.
#[derive(Debug, Clone, Default)]
pub struct AnnotationFile {
    spans: HashMap<String, Vec<EntitySpan>>,
}

impl AnnotationFile {
    pub fn load<R: BufRead>(source: R) -> Result<Self, NerError> {
        let mut spans = HashMap::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| NerError::Parse { line: line_no, message };
            let record: AnnotationLine = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
            let mut entities: Vec<EntitySpan> = record
                .entities
                .into_iter()
                .map(|(start, end, label)| EntitySpan {
                    token_range: start..end,
                    label,
                })
                .collect();
            if let Some(bad) = entities.iter().find(|e| e.token_range.is_empty()) {
                return Err(parse_err(format!("empty entity range {:?}", bad.token_range)));
            }
            entities.sort_by_key(|e| (e.token_range.start, e.token_range.end));
            if entities
                .windows(2)
                .any(|w| w[0].token_range.end > w[1].token_range.start)
            {
                return Err(parse_err("overlapping entity ranges".to_string()));
            }
            if spans.insert(record.id.clone(), entities).is_some() {
                return Err(parse_err(format!("duplicate sentence id {:?}", record.id)));
            }
        }
        Ok(Self { spans })
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }
}

impl NerProvider for AnnotationFile {
    fn name(&self) -> &str {
        "file"
    }

    fn annotate(&self, id: &str, tokens: &[Token]) -> Result<Vec<EntitySpan>, NerError> {
        let spans = self.spans.get(id).ok_or_else(|| NerError::UnknownId(id.to_string()))?;
        if let Some(last) = spans.last() {
            if last.token_range.end > tokens.len() {
                return Err(NerError::OutOfRange {
                    id: id.to_string(),
                    end: last.token_range.end,
                    len: tokens.len(),
                });
            }
        }
        Ok(spans.clone())
    }
}

pub fn load_external_annotations<R: BufRead>(source: R) -> Result<AnnotationFile, NerError> {
    AnnotationFile::load(source)
}
