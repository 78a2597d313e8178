//! Scores a few sentences against the small fixture lexicon and prints the
//! matched terms, entity count and the four scores.
//!
//!     cargo run --example score_sentences

use hybrid_subjectivity::ner::PatternNer;
use hybrid_subjectivity::scoring::{score_sentence, vago_terms};
use hybrid_subjectivity::Lexicon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lexicon = Lexicon::from_tsv(include_str!("../fixtures/lexicon_l0.tsv"))?;
    let sentences = [
        "Mary is tall",
        "Mary is 180cm tall",
        "He said Mary is \"beautiful\"",
        "Of course the weather was good!",
        "The United Nations met in New York on 12 May 2023",
    ];
    println!(
        "{:<52} {:>6} {:>6} {:>6} {:>6}  terms",
        "sentence", "vague", "subj", "detail", "obj"
    );
    for (i, text) in sentences.iter().enumerate() {
        let (analysis, s) = score_sentence(&format!("ex{i}"), text, &lexicon, &PatternNer)?;
        println!(
            "{:<52} {:>6.3} {:>6.3} {:>6.3} {:>6.3}  {:?} ({} entities)",
            text,
            s.vagueness,
            s.subjectivity,
            s.detail_vs_vagueness,
            s.objectivity_vs_subjectivity,
            vago_terms(&analysis),
            analysis.counts.entities,
        );
    }
    Ok(())
}
