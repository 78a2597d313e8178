//! Seeded synthetic corpora for demos, benchmarks and learning checks.
//!
//! Sentences mix filler words (`w000` ... `w499`), capitalized names and terms
//! drawn from a lexicon. Labels come from the sentence's own subjectivity
//! score plus uniform noise, so a classifier that sees the scores can learn
//! them while one that only sees bag-of-words vectors has to memorize terms.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusRecord, Label};
use crate::lexicon::{Lexicon, LexiconEntry};
use crate::ner::PatternNer;
use crate::scoring;

const FILLER_WORDS: usize = 500;
const NAME_SYLLABLES: &[&str] = &["ka", "lo", "mir", "ta", "ven", "dor", "sa", "bel", "ru", "nik"];

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub sentences: usize,
    pub min_words: usize,
    pub max_words: usize,
    /// Maximum subjective (VD, VC, ES) terms per sentence.
    pub max_subjective: usize,
    /// Maximum objective vague (VA, VG) terms per sentence.
    pub max_objective: usize,
    pub max_names: usize,
    /// SUBJ when subjectivity + noise reaches this.
    pub label_threshold: f64,
    /// Half-width of the uniform label noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            sentences: 400,
            min_words: 6,
            max_words: 20,
            max_subjective: 3,
            max_objective: 2,
            max_names: 2,
            label_threshold: 0.1,
            noise: 0.01,
            seed: 0,
        }
    }
}

fn name<R: Rng>(rng: &mut R) -> String {
    let parts = rng.gen_range(2..=3);
    let mut s: String = (0..parts).map(|_| *NAME_SYLLABLES.choose(rng).unwrap()).collect();
    s[..1].make_ascii_uppercase();
    s
}

/// Generates a labeled corpus with ids `syn00000`, `syn00001`, ...
pub fn subjectivity_corpus(lexicon: &Lexicon, spec: &SyntheticSpec) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (subjective, objective): (Vec<&LexiconEntry>, Vec<&LexiconEntry>) = lexicon
        .entries()
        .iter()
        .filter(|e| e.category.is_vague() || e.surface.iter().all(|t| t.chars().any(char::is_alphanumeric)))
        .partition(|e| e.category.is_subjective());
    let mut records = Vec::with_capacity(spec.sentences);
    for i in 0..spec.sentences {
        let len = rng.gen_range(spec.min_words..=spec.max_words);
        let mut words: Vec<String> = (0..len)
            .map(|_| format!("w{:03}", rng.gen_range(0..FILLER_WORDS)))
            .collect();
        let mut inserts = Vec::new();
        if !subjective.is_empty() {
            for _ in 0..rng.gen_range(0..=spec.max_subjective) {
                inserts.push(subjective.choose(&mut rng).unwrap().term());
            }
        }
        if !objective.is_empty() {
            for _ in 0..rng.gen_range(0..=spec.max_objective) {
                inserts.push(objective.choose(&mut rng).unwrap().term());
            }
        }
        for _ in 0..rng.gen_range(0..=spec.max_names) {
            inserts.push(name(&mut rng));
        }
        for word in inserts {
            let at = rng.gen_range(1..=words.len());
            words.insert(at, word);
        }
        let id = format!("syn{i:05}");
        let text = words.join(" ");
        let (_, scores) = scoring::score_sentence(&id, &text, lexicon, &PatternNer)
            .expect("synthetic sentences always contain words");
        let noisy = scores.subjectivity + rng.gen_range(-spec.noise..=spec.noise);
        let label = if noisy >= spec.label_threshold {
            Label::Subj
        } else {
            Label::Obj
        };
        records.push(CorpusRecord {
            id,
            text,
            label: Some(label),
        });
    }
    records
}
