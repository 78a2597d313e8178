//! Trains two fusion variants on a synthetic corpus whose labels follow the
//! lexicon-driven subjectivity score, then compares them on a fresh draw.
//!
//!     cargo run --release --example train_fusion

use hybrid_subjectivity::corpus::CorpusRecord;
use hybrid_subjectivity::embeddings::HashEmbedder;
use hybrid_subjectivity::evaluation::{confusion_at, default_grid, sweep_threshold, Metrics};
use hybrid_subjectivity::fusion::{train, FeatureExtractor, LabeledExample};
use hybrid_subjectivity::ner::PatternNer;
use hybrid_subjectivity::synthetic::{subjectivity_corpus, SyntheticSpec};
use hybrid_subjectivity::{FusionConfig, Label, Lexicon, Variant};

fn examples(records: &[CorpusRecord]) -> Vec<LabeledExample> {
    records
        .iter()
        .map(|r| LabeledExample {
            id: r.id.clone(),
            text: r.text.clone(),
            label: r.label.expect("synthetic corpora are labeled"),
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lexicon = Lexicon::from_tsv(include_str!("../fixtures/lexicon_1614.tsv"))?;
    let train_set = subjectivity_corpus(
        &lexicon,
        &SyntheticSpec {
            seed: 1,
            ..Default::default()
        },
    );
    let test_set = subjectivity_corpus(
        &lexicon,
        &SyntheticSpec {
            seed: 2,
            ..Default::default()
        },
    );
    let a = HashEmbedder::new(4, 0)?;
    let b = HashEmbedder::new(4, 1)?;

    for variant in [Variant::RobertaSbert, Variant::RobertaSbertScores] {
        let config = FusionConfig {
            learning_rate: 2.0,
            ..variant.config()
        };
        let extractor = FeatureExtractor {
            config: &config,
            embed_a: Some(&a),
            embed_b: Some(&b),
            lexicon: &lexicon,
            ner: &PatternNer,
        };
        let outcome = train(&examples(&train_set), &extractor)?;
        let predict = |rows: &[CorpusRecord]| -> Result<(Vec<Label>, Vec<f64>), Box<dyn std::error::Error>> {
            let mut y = Vec::new();
            let mut p = Vec::new();
            for r in rows {
                p.push(outcome.model.forward(&extractor.extract(&r.id, &r.text)?)?);
                y.push(r.label.expect("labeled"));
            }
            Ok((y, p))
        };
        let (y, p) = predict(&train_set)?;
        let threshold = sweep_threshold(&y, &p, &default_grid())?.threshold;
        let (y, p) = predict(&test_set)?;
        let held_out = Metrics::from_confusion(confusion_at(&y, &p, threshold));
        println!(
            "{variant:<22} loss {:.4} -> {:.4}  threshold {threshold:.2}  held-out macro F1 {:.4}",
            outcome.initial_loss,
            outcome.final_loss(),
            held_out.macro_f1
        );
    }
    Ok(())
}
