//! Sentence analysis, cancellation rules and the four VAGO scores.
//!
//! For a sentence with `N` words (words and numbers, punctuation excluded):
//!
//! * vagueness = |V| / N, where |V| = |VA| + |VG| + |VD| + |VC|
//! * subjectivity = |S| / N, where |S| = |ES| + |VD| + |VC|
//! * detail vs vagueness = |NE| / (|NE| + |V|)
//! * objectivity vs subjectivity = |O| / (|O| + |S|), where |O| = |NE| + |VA| + |VG|
//!
//! The two proportion scores are 0.5 when their denominator is zero.
//!
//! Two rules adjust the counts. A degree or combinatorial term preceded within
//! two tokens by a number (`180cm tall`, `180 cm tall`) is cancelled and
//! leaves every count. Subjective terms inside quotation marks leave the
//! subjectivity counts but still count as vague.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{CategoryHistogram, Lexicon, TermMatch, VagoCategory};
use crate::ner::{EntitySpan, NerError, NerProvider};
use crate::textprep::{self, QuoteSpan, Token, TokenKind};

/// How many tokens before a gradable term a number may sit and still cancel it.
pub const MEASURE_WINDOW: usize = 2;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("sentence has no words")]
    EmptySentence,
    #[error(transparent)]
    Ner(#[from] NerError),
}

/// Counts feeding the scores.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Non-cancelled matches per category; feeds |V| and |O|.
    pub vague: CategoryHistogram,
    /// Matches that also survive the quotation rule; feeds |S|.
    pub subjective: CategoryHistogram,
    pub entities: usize,
}

impl Counts {
    pub fn vague_total(&self) -> usize {
        use VagoCategory::*;
        self.vague[VA] + self.vague[VG] + self.vague[VD] + self.vague[VC]
    }

    pub fn subjective_total(&self) -> usize {
        use VagoCategory::*;
        self.subjective[ES] + self.subjective[VD] + self.subjective[VC]
    }

    pub fn objective_total(&self) -> usize {
        use VagoCategory::*;
        self.entities + self.vague[VA] + self.vague[VG]
    }
}

#[derive(Debug, Clone)]
pub struct SentenceAnalysis {
    pub tokens: Vec<Token>,
    pub matches: Vec<TermMatch>,
    pub entities: Vec<EntitySpan>,
    pub quotes: Vec<QuoteSpan>,
    pub n_words: usize,
    pub counts: Counts,
}

impl SentenceAnalysis {
    /// Tokenizes, matches terms and collects entities. Cancellation rules are
    /// not applied yet, so every match counts everywhere.
    pub fn new(id: &str, text: &str, lexicon: &Lexicon, ner: &dyn NerProvider) -> Result<Self, NerError> {
        let tokens = textprep::tokenize(text);
        let quotes = textprep::detect_quotes(&tokens);
        let matches = lexicon.match_terms(&tokens, &quotes);
        let entities = ner.annotate(id, &tokens)?;
        let n_words = textprep::word_count(&tokens);
        let counts = Counts {
            vague: matches.iter().map(TermMatch::category).collect(),
            subjective: matches.iter().map(TermMatch::category).collect(),
            entities: entities.len(),
        };
        Ok(Self {
            tokens,
            matches,
            entities,
            quotes,
            n_words,
            counts,
        })
    }
}

/// Full pipeline for one sentence: analysis followed by the cancellation rules.
pub fn analyze(id: &str, text: &str, lexicon: &Lexicon, ner: &dyn NerProvider) -> Result<SentenceAnalysis, NerError> {
    SentenceAnalysis::new(id, text, lexicon, ner).map(apply_cancellations)
}

fn follows_number(tokens: &[Token], start: usize) -> bool {
    tokens[start.saturating_sub(MEASURE_WINDOW)..start]
        .iter()
        .any(|t| t.kind == TokenKind::Number)
}

pub fn apply_cancellations(mut analysis: SentenceAnalysis) -> SentenceAnalysis {
    let mut vague = CategoryHistogram::default();
    let mut subjective = CategoryHistogram::default();
    for m in &mut analysis.matches {
        let category = m.category();
        if matches!(category, VagoCategory::VD | VagoCategory::VC)
            && follows_number(&analysis.tokens, m.token_range.start)
        {
            m.cancelled = true;
            continue;
        }
        vague.add(category);
        if !(m.quoted && category.is_subjective()) {
            subjective.add(category);
        }
    }
    analysis.counts.vague = vague;
    analysis.counts.subjective = subjective;
    analysis
}

/// Non-negative fraction kept exact until emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: usize,
    pub den: usize,
}

impl Ratio {
    fn proportion(part: usize, other: usize) -> Self {
        if part + other == 0 {
            Self { num: 1, den: 2 }
        } else {
            Self {
                num: part,
                den: part + other,
            }
        }
    }

    /// Correctly rounded, since both integers are exact in f64 at these sizes.
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactScores {
    pub vagueness: Ratio,
    pub subjectivity: Ratio,
    pub detail_vs_vagueness: Ratio,
    pub objectivity_vs_subjectivity: Ratio,
}

impl ExactScores {
    pub fn to_f64(self) -> VagoScores {
        VagoScores {
            vagueness: self.vagueness.to_f64(),
            subjectivity: self.subjectivity.to_f64(),
            detail_vs_vagueness: self.detail_vs_vagueness.to_f64(),
            objectivity_vs_subjectivity: self.objectivity_vs_subjectivity.to_f64(),
        }
    }
}

/// The four sentence scores, S1 to S4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VagoScores {
    pub vagueness: f64,
    pub subjectivity: f64,
    pub detail_vs_vagueness: f64,
    pub objectivity_vs_subjectivity: f64,
}

impl VagoScores {
    pub fn to_array(self) -> [f64; 4] {
        [
            self.vagueness,
            self.subjectivity,
            self.detail_vs_vagueness,
            self.objectivity_vs_subjectivity,
        ]
    }
}

pub fn compute_exact(analysis: &SentenceAnalysis) -> Result<ExactScores, ScoringError> {
    let n = analysis.n_words;
    if n == 0 {
        return Err(ScoringError::EmptySentence);
    }
    let c = &analysis.counts;
    let (v, s, ne, o) = (c.vague_total(), c.subjective_total(), c.entities, c.objective_total());
    Ok(ExactScores {
        // punctuation markers such as "!" can match without counting as words,
        // so a term count may exceed n; cap the per-word ratios at 1
        vagueness: Ratio { num: v.min(n), den: n },
        subjectivity: Ratio { num: s.min(n), den: n },
        detail_vs_vagueness: Ratio::proportion(ne, v),
        objectivity_vs_subjectivity: Ratio::proportion(o, s),
    })
}

pub fn compute_scores(analysis: &SentenceAnalysis) -> Result<VagoScores, ScoringError> {
    compute_exact(analysis).map(ExactScores::to_f64)
}

/// Text of every non-cancelled term, in sentence order.
pub fn vago_terms(analysis: &SentenceAnalysis) -> Vec<String> {
    analysis
        .matches
        .iter()
        .filter(|m| !m.cancelled)
        .map(|m| {
            analysis.tokens[m.token_range.clone()]
                .iter()
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Analysis and scores for one sentence in a single call.
pub fn score_sentence(
    id: &str,
    text: &str,
    lexicon: &Lexicon,
    ner: &dyn NerProvider,
) -> Result<(SentenceAnalysis, VagoScores), ScoringError> {
    let analysis = analyze(id, text, lexicon, ner)?;
    let scores = compute_scores(&analysis)?;
    Ok((analysis, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ner::PatternNer;

    fn l0() -> Lexicon {
        Lexicon::from_tsv(include_str!("../fixtures/lexicon_l0.tsv")).unwrap()
    }

    fn scores(text: &str, lexicon: &Lexicon) -> [f64; 4] {
        score_sentence("x", text, lexicon, &PatternNer).unwrap().1.to_array()
    }

    #[test]
    fn mary_is_tall() {
        assert_eq!(scores("Mary is tall", &l0()), [1.0 / 3.0, 1.0 / 3.0, 0.5, 0.5]);
    }

    #[test]
    fn measure_phrase_cancels() {
        let (analysis, s) = score_sentence("x", "Mary is 180cm tall", &l0(), &PatternNer).unwrap();
        assert_eq!(s.to_array(), [0.0, 0.0, 1.0, 1.0]);
        assert_eq!(analysis.counts.vague[VagoCategory::VD], 0);
        assert!(analysis.matches[0].cancelled);
        assert!(vago_terms(&analysis).is_empty());
        let spaced = scores("Mary is 180 cm tall", &l0());
        assert_eq!(spaced[..2], [0.0, 0.0]);
    }

    #[test]
    fn quotes_leave_vagueness() {
        let (analysis, _) = score_sentence("x", "He said Mary is \"beautiful\"", &l0(), &PatternNer).unwrap();
        assert_eq!(analysis.counts.vague_total(), 1);
        assert_eq!(analysis.counts.subjective_total(), 0);
    }

    #[test]
    fn no_rule_applies() {
        let before = SentenceAnalysis::new("x", "Mary is tall", &l0(), &PatternNer).unwrap();
        let after = apply_cancellations(before.clone());
        assert_eq!(before.counts, after.counts);
        assert_eq!(before.matches, after.matches);
    }

    #[test]
    fn zero_denominators() {
        assert_eq!(scores("it is nice here", &Lexicon::default()), [0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn exclamation_counts_but_not_as_word() {
        let s = scores("Mary is beautiful!", &l0());
        assert_eq!(s[0], 1.0 / 3.0);
        assert_eq!(s[1], 2.0 / 3.0);
    }

    #[test]
    fn punctuation_markers_cannot_push_past_one() {
        // many (VD) and ! (ES) are both subjective, but only "many" is a word
        let (analysis, s) = score_sentence("x", "many !", &l0(), &PatternNer).unwrap();
        assert_eq!(analysis.counts.subjective_total(), 2);
        assert_eq!(analysis.n_words, 1);
        assert_eq!(s.subjectivity, 1.0);
        assert_eq!(s.objectivity_vs_subjectivity, 0.0);
    }

    #[test]
    fn empty_sentence() {
        let analysis = analyze("x", "!!", &l0(), &PatternNer).unwrap();
        assert!(matches!(compute_scores(&analysis), Err(ScoringError::EmptySentence)));
    }

    #[test]
    fn terms_in_order() {
        let analysis = analyze("x", "Of course Mary is tall", &l0(), &PatternNer).unwrap();
        assert_eq!(vago_terms(&analysis), vec!["Of course", "tall"]);
    }
}
