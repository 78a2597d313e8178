//! How often a lexicon term appears in objective sentences of a labeled
//! corpus. A term that shows up mostly in OBJ sentences is a candidate for
//! recategorization.
//!
//!     cargo run --example audit_term [term]

use hybrid_subjectivity::corpus::{audit_term, load_corpus, LoadOptions};
use hybrid_subjectivity::Lexicon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lexicon = Lexicon::from_tsv(include_str!("../fixtures/lexicon_l0.tsv"))?;
    let corpus = load_corpus(
        include_str!("../fixtures/scoring_corpus.tsv").as_bytes(),
        LoadOptions {
            labeled: true,
            clean_brackets: false,
        },
    )?;
    let terms: Vec<String> = match std::env::args().nth(1) {
        Some(t) => vec![t],
        None => ["many", "approximately", "good", "old", "of course"]
            .map(String::from)
            .to_vec(),
    };
    for term in terms {
        let a = audit_term(&corpus, &term, &lexicon)?;
        let category = a.category.map_or("-".to_string(), |c| c.to_string());
        println!(
            "{:<14} {:<3} in {:>2} sentences, {:>2} objective",
            a.term, category, a.containing, a.objective
        );
    }
    Ok(())
}
