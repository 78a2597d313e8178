//! The vagueness/subjectivity lexicon and multiword term matching.
//!
//! Lexicon files are UTF-8 TSV, one `term<TAB>category` entry per line.
//! Terms may span several words. Blank lines and lines starting with `#` are
//! ignored.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::ops::{Index, Range};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::{self, QuoteSpan, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VagoCategory {
    /// Approximation vagueness ("approximately").
    VA,
    /// Generality vagueness ("some", "at most").
    VG,
    /// Degree vagueness, one-dimensional gradable adjectives ("tall").
    VD,
    /// Combinatorial vagueness, multidimensional and evaluative adjectives ("beautiful").
    VC,
    /// Explicit subjectivity markers ("!", "I").
    ES,
}

impl VagoCategory {
    pub const ALL: [VagoCategory; 5] = [Self::VA, Self::VG, Self::VD, Self::VC, Self::ES];

    pub fn label(self) -> &'static str {
        match self {
            Self::VA => "VA",
            Self::VG => "VG",
            Self::VD => "VD",
            Self::VC => "VC",
            Self::ES => "ES",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::VA => "Approximation",
            Self::VG => "Generality",
            Self::VD => "Degree vagueness",
            Self::VC => "Combinatorial vagueness",
            Self::ES => "Explicit subjectivity",
        }
    }

    pub fn is_vague(self) -> bool {
        self != Self::ES
    }

    /// VD, VC and ES count as subjective; VA and VG are objective vagueness.
    pub fn is_subjective(self) -> bool {
        matches!(self, Self::VD | Self::VC | Self::ES)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for VagoCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category {0}")]
pub struct UnknownCategory(pub String);

impl FromStr for VagoCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "VA" => Ok(Self::VA),
            "VG" => Ok(Self::VG),
            "VD" => Ok(Self::VD),
            "VC" => Ok(Self::VC),
            "ES" => Ok(Self::ES),
            other => Err(UnknownCategory(other.to_string())),
        }
    }
}

/// Per-category counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryHistogram([usize; 5]);

impl CategoryHistogram {
    pub fn add(&mut self, category: VagoCategory) {
        self.0[category.index()] += 1;
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VagoCategory, usize)> + '_ {
        VagoCategory::ALL.into_iter().map(|c| (c, self[c]))
    }
}

impl Index<VagoCategory> for CategoryHistogram {
    type Output = usize;

    fn index(&self, category: VagoCategory) -> &usize {
        &self.0[category.index()]
    }
}

impl FromIterator<VagoCategory> for CategoryHistogram {
    fn from_iter<I: IntoIterator<Item = VagoCategory>>(iter: I) -> Self {
        let mut hist = Self::default();
        for category in iter {
            hist.add(category);
        }
        hist
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexiconEntry {
    /// Lowercased tokens of the term, never empty.
    pub surface: Vec<String>,
    pub category: VagoCategory,
}

impl LexiconEntry {
    /// Tokenizes and lowercases `term`. Returns `None` for terms without tokens.
    pub fn new(term: &str, category: VagoCategory) -> Option<Self> {
        let surface: Vec<String> = textprep::tokenize(term)
            .into_iter()
            .map(|t| t.text.to_lowercase())
            .collect();
        if surface.is_empty() {
            return None;
        }
        Some(Self { surface, category })
    }

    pub fn term(&self) -> String {
        self.surface.join(" ")
    }

    pub fn len(&self) -> usize {
        self.surface.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surface.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("malformed line {line}: expected 2 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("empty term at line {line}")]
    EmptyTerm { line: usize },
    #[error("unknown category {label} at line {line}")]
    UnknownCategory { label: String, line: usize },
    #[error("failed to read lexicon: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    histogram: CategoryHistogram,
    /// First surface token -> entry indices, longest surface first.
    by_first: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    /// Builds a lexicon, dropping repeated (surface, category) pairs. When the
    /// same surface appears under two categories, matching prefers the entry
    /// that came first.
    pub fn from_entries(entries: impl IntoIterator<Item = LexiconEntry>) -> Self {
        let mut seen = HashSet::new();
        let mut lexicon = Self::default();
        for entry in entries {
            if !seen.insert(entry.clone()) {
                continue;
            }
            let idx = lexicon.entries.len();
            lexicon.histogram.add(entry.category);
            lexicon.by_first.entry(entry.surface[0].clone()).or_default().push(idx);
            lexicon.entries.push(entry);
        }
        for candidates in lexicon.by_first.values_mut() {
            // stable: ties keep insertion order
            candidates.sort_by_key(|&i| std::cmp::Reverse(lexicon.entries[i].len()));
        }
        lexicon
    }

    pub fn load<R: BufRead>(source: R) -> Result<Self, LexiconError> {
        let mut entries = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(LexiconError::FieldCount {
                    line: line_no,
                    found: fields.len(),
                });
            }
            let label = fields[1].trim();
            let category: VagoCategory = label.parse().map_err(|_| LexiconError::UnknownCategory {
                label: label.to_string(),
                line: line_no,
            })?;
            let entry = LexiconEntry::new(fields[0], category).ok_or(LexiconError::EmptyTerm { line: line_no })?;
            entries.push(entry);
        }
        Ok(Self::from_entries(entries))
    }

    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        Self::load(text.as_bytes())
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn histogram(&self) -> CategoryHistogram {
        self.histogram
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Category of the first entry whose surface equals `term` (tokenized, case-insensitive).
    pub fn category_of(&self, term: &str) -> Option<VagoCategory> {
        let probe = LexiconEntry::new(term, VagoCategory::VA)?;
        self.by_first
            .get(&probe.surface[0])?
            .iter()
            .map(|&i| &self.entries[i])
            .find(|e| e.surface == probe.surface)
            .map(|e| e.category)
    }

    fn longest_at(&self, lowered: &[String], start: usize) -> Option<&LexiconEntry> {
        let rest = &lowered[start..];
        self.by_first
            .get(&rest[0])?
            .iter()
            .map(|&i| &self.entries[i])
            .find(|e| e.len() <= rest.len() && rest[..e.len()] == e.surface[..])
    }

    /// Greedy left-to-right, longest-match-first scan. After a match the scan
    /// resumes past it, so matches never overlap.
    pub fn match_terms(&self, tokens: &[Token], quotes: &[QuoteSpan]) -> Vec<TermMatch> {
        let lowered: Vec<String> = tokens.iter().map(|t| t.text.to_lowercase()).collect();
        let mut matches = Vec::new();
        let mut i = 0;
        while i < lowered.len() {
            match self.longest_at(&lowered, i) {
                Some(entry) => {
                    let token_range = i..i + entry.len();
                    let quoted = quotes.iter().any(|q| q.contains(&token_range));
                    i = token_range.end;
                    matches.push(TermMatch {
                        entry: entry.clone(),
                        token_range,
                        quoted,
                        cancelled: false,
                    });
                }
                None => i += 1,
            }
        }
        matches
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermMatch {
    pub entry: LexiconEntry,
    pub token_range: Range<usize>,
    /// Lies entirely inside a quotation.
    pub quoted: bool,
    /// Set by the measure-phrase rule.
    pub cancelled: bool,
}

impl TermMatch {
    pub fn category(&self) -> VagoCategory {
        self.entry.category
    }
}

pub fn match_terms(tokens: &[Token], quotes: &[QuoteSpan], lexicon: &Lexicon) -> Vec<TermMatch> {
    lexicon.match_terms(tokens, quotes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{detect_quotes, tokenize};

    const L0: &str = include_str!("../fixtures/lexicon_l0.tsv");

    fn l0() -> Lexicon {
        Lexicon::from_tsv(L0).unwrap()
    }

    fn scan(text: &str, lex: &Lexicon) -> Vec<(String, VagoCategory, Range<usize>)> {
        let tokens = tokenize(text);
        let quotes = detect_quotes(&tokens);
        lex.match_terms(&tokens, &quotes)
            .into_iter()
            .map(|m| (m.entry.term(), m.category(), m.token_range))
            .collect()
    }

    #[test]
    fn l0_histogram() {
        let lex = l0();
        let hist = lex.histogram();
        assert_eq!(hist[VagoCategory::VA], 1);
        assert_eq!(hist[VagoCategory::VG], 2);
        assert_eq!(hist[VagoCategory::VD], 3);
        assert_eq!(hist[VagoCategory::VC], 4);
        assert_eq!(hist[VagoCategory::ES], 3);
        assert_eq!(hist.total(), lex.len());
    }

    #[test]
    fn multiword_and_pronoun() {
        assert_eq!(
            scan("of course I will", &l0()),
            vec![
                ("of course".to_string(), VagoCategory::ES, 0..2),
                ("i".to_string(), VagoCategory::ES, 2..3),
            ]
        );
    }

    #[test]
    fn single_term() {
        assert_eq!(
            scan("Mary is tall", &l0()),
            vec![("tall".to_string(), VagoCategory::VD, 2..3)]
        );
    }

    #[test]
    fn empty_lexicon_matches_nothing() {
        assert!(scan("Mary is tall!", &Lexicon::default()).is_empty());
    }

    #[test]
    fn longest_match_wins() {
        let lex = Lexicon::from_tsv("of\tVG\nof course\tES\n").unwrap();
        assert_eq!(
            scan("of course", &lex),
            vec![("of course".to_string(), VagoCategory::ES, 0..2)]
        );
        assert_eq!(scan("of the", &lex), vec![("of".to_string(), VagoCategory::VG, 0..1)]);
    }

    #[test]
    fn quoted_flag() {
        let tokens = tokenize("He said Mary is \"beautiful\" and tall");
        let quotes = detect_quotes(&tokens);
        let matches = l0().match_terms(&tokens, &quotes);
        assert_eq!(matches.len(), 2);
        assert!(matches[0].quoted);
        assert!(!matches[1].quoted);
    }

    #[test]
    fn duplicates_and_comments() {
        let lex = Lexicon::from_tsv("# header\n\ntall\tVD\nTall\tVD\ntall\tVC\r\n").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.category_of("TALL"), Some(VagoCategory::VD));
    }

    #[test]
    fn load_errors() {
        let err = Lexicon::from_tsv("good\tVC\ntall\tVX\n").unwrap_err();
        assert_eq!(err.to_string(), "unknown category VX at line 2");
        let err = Lexicon::from_tsv("tall VD\n").unwrap_err();
        assert!(matches!(err, LexiconError::FieldCount { line: 1, found: 1 }));
        let err = Lexicon::from_tsv("a\tVD\tx\n").unwrap_err();
        assert!(matches!(err, LexiconError::FieldCount { line: 1, found: 3 }));
        let err = Lexicon::from_tsv("  \tVD\n").unwrap_err();
        assert!(matches!(err, LexiconError::EmptyTerm { line: 1 }));
    }

    #[test]
    fn empty_file() {
        let lex = Lexicon::from_tsv("").unwrap();
        assert!(lex.is_empty());
        assert_eq!(lex.histogram(), CategoryHistogram::default());
    }
}
