//! Sentence corpora in the task's TSV layout.
//!
//! The header names the columns: `sentence_id` and `sentence`, plus `label`
//! (SUBJ or OBJ) for labeled corpora. Other columns are ignored.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, LexiconEntry, VagoCategory};
use crate::textprep::{self, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "SUBJ")]
    Subj,
    #[serde(rename = "OBJ")]
    Obj,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Subj => "SUBJ",
            Self::Obj => "OBJ",
        }
    }

    pub fn is_subj(self) -> bool {
        self == Self::Subj
    }

    pub fn flip(self) -> Self {
        match self {
            Self::Subj => Self::Obj,
            Self::Obj => Self::Subj,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SUBJ" => Ok(Self::Subj),
            "OBJ" => Ok(Self::Obj),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("header lacks required column {0:?}")]
    MissingHeaderColumn(&'static str),
    #[error("line {line}: expected {expected} columns, found {found}")]
    MissingColumn { line: usize, expected: usize, found: usize },
    #[error("line {line}: unknown label {label:?} (expected SUBJ or OBJ)")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: duplicate sentence id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: sentence {id:?} is empty")]
    EmptyText { line: usize, id: String },
    #[error("corpus is unlabeled")]
    Unlabeled,
    #[error("failed to read corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub labeled: bool,
    pub clean_brackets: bool,
}

/// Reads records in file order. Blank lines are skipped, and a file with no
/// lines at all is an empty corpus.
pub fn load_corpus<R: BufRead>(source: R, options: LoadOptions) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut lines = source.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Ok(Vec::new()),
        }
    };
    let columns: Vec<&str> = header.trim_end_matches('\r').split('\t').map(str::trim).collect();
    let position = |name: &'static str| {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or(CorpusError::MissingHeaderColumn(name))
    };
    let id_col = position("sentence_id")?;
    let text_col = position("sentence")?;
    let label_col = if options.labeled {
        Some(position("label")?)
    } else {
        None
    };

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < columns.len() {
            return Err(CorpusError::MissingColumn {
                line: line_no,
                expected: columns.len(),
                found: fields.len(),
            });
        }
        let id = fields[id_col].trim().to_string();
        let mut text = fields[text_col].to_string();
        if options.clean_brackets {
            text = textprep::clean_brackets(&text);
        }
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText { line: line_no, id });
        }
        let label = match label_col {
            Some(col) => {
                let raw = fields[col].trim();
                Some(
                    raw.parse()
                        .map_err(|label| CorpusError::UnknownLabel { line: line_no, label })?,
                )
            }
            None => None,
        };
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { line: line_no, id });
        }
        records.push(CorpusRecord { id, text, label });
    }
    Ok(records)
}

/// Writes the canonical layout. Labels are written when every record has one.
pub fn write_corpus<W: Write>(mut out: W, records: &[CorpusRecord]) -> std::io::Result<()> {
    let labeled = !records.is_empty() && records.iter().all(|r| r.label.is_some());
    if labeled {
        writeln!(out, "sentence_id\tsentence\tlabel")?;
    } else {
        writeln!(out, "sentence_id\tsentence")?;
    }
    for r in records {
        match r.label.filter(|_| labeled) {
            Some(label) => writeln!(out, "{}\t{}\t{}", r.id, r.text, label)?,
            None => writeln!(out, "{}\t{}", r.id, r.text)?,
        }
    }
    Ok(())
}

/// Maps a non-English sentence into the lexicon's language. Translations
/// produced by an external service are supplied as pre-translated corpora, so
/// the only built-in translator is the identity.
pub trait Translator {
    fn translate(&self, text: &str) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate(&self, text: &str) -> String {
        text.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermAudit {
    pub term: String,
    /// Lexicon category of the term, if it is an entry.
    pub category: Option<VagoCategory>,
    pub containing: usize,
    pub objective: usize,
}

/// Counts the sentences containing `term` as a contiguous, case-insensitive
/// token sequence, and how many of them are labeled OBJ.
pub fn audit_term(corpus: &[CorpusRecord], term: &str, lexicon: &Lexicon) -> Result<TermAudit, CorpusError> {
    if corpus.iter().any(|r| r.label.is_none()) {
        return Err(CorpusError::Unlabeled);
    }
    let category = lexicon.category_of(term);
    let Some(probe) = LexiconEntry::new(term, VagoCategory::VA) else {
        return Ok(TermAudit {
            term: term.to_string(),
            category,
            containing: 0,
            objective: 0,
        });
    };
    let needle = probe.surface;
    let mut containing = 0;
    let mut objective = 0;
    for record in corpus {
        let lowered: Vec<String> = tokenize(&record.text)
            .into_iter()
            .map(|t| t.text.to_lowercase())
            .collect();
        if lowered.windows(needle.len()).any(|w| w == needle.as_slice()) {
            containing += 1;
            if record.label == Some(Label::Obj) {
                objective += 1;
            }
        }
    }
    Ok(TermAudit {
        term: needle.join(" "),
        category,
        containing,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(text: &str) -> Result<Vec<CorpusRecord>, CorpusError> {
        load_corpus(
            text.as_bytes(),
            LoadOptions {
                labeled: true,
                clean_brackets: false,
            },
        )
    }

    #[test]
    fn two_rows() {
        let records = labeled("sentence_id\tsentence\tlabel\ns1\tMary is tall\tSUBJ\ns2\tIt rained\tOBJ\n").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].label, Some(Label::Subj));
        assert_eq!(records[1].text, "It rained");
    }

    #[test]
    fn unknown_label() {
        let err = labeled("sentence_id\tsentence\tlabel\ns1\tx\tSUBJECTIVE\n").unwrap_err();
        assert!(matches!(err, CorpusError::UnknownLabel { line: 2, .. }));
    }

    #[test]
    fn bracket_cleaning() {
        let records = load_corpus(
            "sentence_id\tsentence\tlabel\ns1\t[x] is [y]\tOBJ\n".as_bytes(),
            LoadOptions {
                labeled: true,
                clean_brackets: true,
            },
        )
        .unwrap();
        assert_eq!(records[0].text, "x is y");
    }

    #[test]
    fn format_errors() {
        assert!(labeled("").unwrap().is_empty());
        assert!(matches!(
            labeled("sentence_id\tsentence\n"),
            Err(CorpusError::MissingHeaderColumn("label"))
        ));
        assert!(matches!(
            labeled("sentence_id\tsentence\tlabel\ns1\tonly two\n"),
            Err(CorpusError::MissingColumn { line: 2, .. })
        ));
        let err = labeled("sentence_id\tsentence\tlabel\ns1\ta\tOBJ\ns1\tb\tOBJ\n").unwrap_err();
        assert!(err.to_string().contains("\"s1\""));
        assert!(matches!(
            labeled("sentence_id\tsentence\tlabel\ns1\t  \tOBJ\n"),
            Err(CorpusError::EmptyText { .. })
        ));
    }

    #[test]
    fn extra_columns_and_crlf() {
        let records =
            labeled("sentence_id\tsentence\tlabel\tsolved_conflict\r\nb1\tSome text\tOBJ\tFalse\r\n").unwrap();
        assert_eq!(records[0].label, Some(Label::Obj));
        assert_eq!(records[0].text, "Some text");
    }

    #[test]
    fn unlabeled_corpus() {
        let records = load_corpus("sentence_id\tsentence\ns1\thello\n".as_bytes(), LoadOptions::default()).unwrap();
        assert_eq!(records[0].label, None);
        let lex = Lexicon::default();
        assert!(matches!(
            audit_term(&records, "hello", &lex),
            Err(CorpusError::Unlabeled)
        ));
    }

    #[test]
    fn audit_counts() {
        let lex = Lexicon::from_tsv("many\tVD\n").unwrap();
        let corpus = labeled(
            "sentence_id\tsentence\tlabel\n\
             a\tMany people came\tOBJ\n\
             b\tthere were many\tSUBJ\n\
             c\thow many cats\tOBJ\n\
             d\tnone here\tOBJ\n",
        )
        .unwrap();
        let audit = audit_term(&corpus, "many", &lex).unwrap();
        assert_eq!((audit.containing, audit.objective), (3, 2));
        assert_eq!(audit.category, Some(VagoCategory::VD));
        let none = audit_term(&corpus, "absent", &lex).unwrap();
        assert_eq!((none.containing, none.objective), (0, 0));
        assert_eq!(none.category, None);
    }

    #[test]
    fn identity_translation() {
        assert_eq!(IdentityTranslator.translate("Hallo Welt"), "Hallo Welt");
    }
}
