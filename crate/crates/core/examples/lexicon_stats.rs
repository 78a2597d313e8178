//! Loads a lexicon and prints its per-category histogram.
//!
//!     cargo run --example lexicon_stats [path/to/lexicon.tsv]

use std::fs::File;
use std::io::BufReader;

use hybrid_subjectivity::cli::format_lexicon_stats;
use hybrid_subjectivity::{Lexicon, VagoCategory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lexicon = match std::env::args().nth(1) {
        Some(path) => Lexicon::load(BufReader::new(File::open(path)?))?,
        None => Lexicon::from_tsv(include_str!("../fixtures/lexicon_1614.tsv"))?,
    };
    print!("{}", format_lexicon_stats(&lexicon));
    for category in VagoCategory::ALL {
        if let Some(entry) = lexicon.entries().iter().find(|e| e.category == category) {
            println!("first {category} entry: {}", entry.term());
        }
    }
    Ok(())
}
