//! Subjectivity detection with a lexicon-driven expert scorer.
//!
//! Sentences are tokenized ([`textprep`]), matched against a lexicon of vague
//! and subjective expressions ([`lexicon`]) and scanned for named entities
//! ([`ner`]). [`scoring`] turns the counts into four scores: vagueness,
//! subjectivity, detail-vs-vagueness and objectivity-vs-subjectivity. The
//! [`fusion`] classifier combines those scores with sentence embeddings
//! ([`embeddings`]), and [`evaluation`] provides macro F1, ROC curves and
//! threshold sweeps.
//!
//! ```
//! use hybrid_subjectivity::{lexicon::Lexicon, ner::PatternNer, scoring};
//!
//! let lexicon = Lexicon::from_tsv("tall\tVD\n").unwrap();
//! let (_, scores) = scoring::score_sentence("s1", "Mary is tall", &lexicon, &PatternNer).unwrap();
//! assert_eq!(scores.vagueness, 1.0 / 3.0);
//! assert_eq!(scores.detail_vs_vagueness, 0.5);
//! ```

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod evaluation;
pub mod fusion;
pub mod lexicon;
pub mod ner;
pub mod scoring;
pub mod synthetic;
pub mod textprep;

pub use corpus::{CorpusRecord, Label};
pub use fusion::{FusionConfig, FusionModel, Variant};
pub use lexicon::{Lexicon, VagoCategory};
pub use scoring::VagoScores;
