#![allow(dead_code)]

use std::path::PathBuf;

use hybrid_subjectivity::corpus::{load_corpus, CorpusRecord, LoadOptions};
use hybrid_subjectivity::Lexicon;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn l0() -> Lexicon {
    Lexicon::from_tsv(include_str!("../../fixtures/lexicon_l0.tsv")).expect("L0 fixture parses")
}

pub fn lexicon_1614() -> Lexicon {
    Lexicon::from_tsv(include_str!("../../fixtures/lexicon_1614.tsv")).expect("table fixture parses")
}

pub fn scoring_corpus() -> Vec<CorpusRecord> {
    load_corpus(
        include_str!("../../fixtures/scoring_corpus.tsv").as_bytes(),
        LoadOptions {
            labeled: true,
            clean_brackets: false,
        },
    )
    .expect("scoring fixture parses")
}

/// Counted by hand against the L0 lexicon: (id, N, V, S, NE, O).
pub const HAND_COUNTS: [(&str, usize, usize, usize, usize, usize); 30] = [
    ("s01", 3, 1, 1, 1, 1),
    ("s02", 4, 0, 0, 2, 2),
    ("s03", 3, 1, 2, 1, 1),
    ("s04", 4, 0, 0, 0, 0),
    ("s05", 4, 0, 2, 0, 0),
    ("s06", 5, 1, 0, 1, 1),
    ("s07", 7, 2, 1, 1, 2),
    ("s08", 4, 2, 1, 0, 1),
    ("s09", 5, 1, 0, 1, 2),
    ("s10", 5, 2, 2, 1, 1),
    ("s11", 9, 0, 0, 5, 5),
    ("s12", 5, 1, 2, 0, 0),
    ("s13", 6, 1, 0, 1, 2),
    ("s14", 8, 2, 2, 0, 0),
    ("s15", 6, 0, 0, 1, 1),
    ("s16", 3, 1, 2, 0, 0),
    ("s17", 7, 2, 2, 0, 0),
    ("s18", 8, 2, 0, 0, 0),
    ("s19", 9, 3, 2, 1, 2),
    ("s20", 5, 0, 0, 1, 1),
    ("s21", 6, 1, 2, 0, 0),
    ("s22", 6, 0, 0, 1, 1),
    ("s23", 7, 2, 1, 2, 3),
    ("s24", 5, 0, 0, 0, 0),
    ("s25", 7, 2, 2, 0, 0),
    ("s26", 5, 1, 0, 2, 3),
    ("s27", 11, 0, 0, 5, 5),
    ("s28", 7, 2, 1, 0, 1),
    ("s29", 5, 0, 2, 1, 1),
    ("s30", 9, 3, 2, 1, 2),
];

fn share(part: usize, other: usize) -> f64 {
    if part + other == 0 {
        0.5
    } else {
        part as f64 / (part + other) as f64
    }
}

/// Expected scores derived from a hand-count row.
pub fn expected_scores(n: usize, v: usize, s: usize, ne: usize, o: usize) -> [f64; 4] {
    [v as f64 / n as f64, s as f64 / n as f64, share(ne, v), share(o, s)]
}

/// Hand-computed binary metrics: (truth, prediction, SUBJ F1, OBJ F1, macro F1)
/// with each F1 as a fraction.
pub type MetricCase = (&'static str, &'static str, (u32, u32), (u32, u32), (u32, u32));

pub const METRIC_CASES: [MetricCase; 20] = [
    ("SSOO", "SOOO", (2, 3), (4, 5), (11, 15)),
    ("SSOO", "OOOO", (0, 1), (2, 3), (1, 3)),
    ("SSOO", "SSOO", (1, 1), (1, 1), (1, 1)),
    ("SOSO", "OSOS", (0, 1), (0, 1), (0, 1)),
    ("SSSO", "SSSS", (6, 7), (0, 1), (3, 7)),
    ("SOOO", "SSSS", (2, 5), (0, 1), (1, 5)),
    ("SOOO", "OOOO", (0, 1), (6, 7), (3, 7)),
    ("SSOOO", "SOSOO", (1, 2), (2, 3), (7, 12)),
    ("SSSOO", "SSOSO", (2, 3), (1, 2), (7, 12)),
    ("SOSOSO", "SSSOOO", (2, 3), (2, 3), (2, 3)),
    ("SSSSOOOO", "SSSOSOOO", (3, 4), (3, 4), (3, 4)),
    ("SSSSOOOO", "SOOOOOOS", (1, 3), (3, 5), (7, 15)),
    ("SO", "SO", (1, 1), (1, 1), (1, 1)),
    ("SO", "OS", (0, 1), (0, 1), (0, 1)),
    ("SSSSSO", "SSSSSS", (10, 11), (0, 1), (5, 11)),
    ("OOOOOS", "OOOOOO", (0, 1), (10, 11), (5, 11)),
    ("SSOOSSOO", "SOSOSOSO", (1, 2), (1, 2), (1, 2)),
    ("SSSOOOOOOO", "SSOOOOOOOS", (2, 3), (6, 7), (16, 21)),
    ("SOOSOOSOO", "SSOSSOSSO", (2, 3), (2, 3), (2, 3)),
    ("SSSSSSSOOO", "SSSSOOOSOO", (2, 3), (1, 2), (7, 12)),
];

pub fn labels(code: &str) -> Vec<hybrid_subjectivity::Label> {
    use hybrid_subjectivity::Label;
    code.chars()
        .map(|c| match c {
            'S' => Label::Subj,
            'O' => Label::Obj,
            other => panic!("bad label code {other}"),
        })
        .collect()
}

pub fn frac((n, d): (u32, u32)) -> f64 {
    n as f64 / d as f64
}

pub mod fusion_checks {
    use hybrid_subjectivity::embeddings::HashEmbedder;
    use hybrid_subjectivity::fusion::{Dims, FeatureExtractor, Features, FusionModel, SCORE_DIM};
    use hybrid_subjectivity::ner::PatternNer;
    use hybrid_subjectivity::{FusionConfig, Variant};
    use rand::Rng;

    const FD_STEP: f64 = 1e-5;
    const REL_TOL: f64 = 1e-4;
    const ABS_FLOOR: f64 = 1e-8;

    fn close(analytic: f64, numeric: f64) -> bool {
        let diff = (analytic - numeric).abs();
        diff <= ABS_FLOOR || diff <= REL_TOL * analytic.abs().max(numeric.abs())
    }

    /// Compares every analytic gradient entry of a random small model against
    /// central differences. Returns a description of the first mismatch.
    pub fn random_gradient_check<R: Rng>(rng: &mut R) -> Result<(), String> {
        let variant = Variant::ALL[rng.gen_range(0..Variant::ALL.len())];
        let config = FusionConfig {
            proj_dim: rng.gen_range(1..=5),
            ..variant.config()
        };
        let (wa, wb) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let mut model = FusionModel::zeros(config, wa, wb).map_err(|e| e.to_string())?;
        for row in &mut model.projection {
            row.iter_mut().for_each(|w| *w = rng.gen_range(-1.0..1.0));
        }
        model
            .head_weights
            .iter_mut()
            .for_each(|w| *w = rng.gen_range(-1.0..1.0));
        model.head_bias = rng.gen_range(-1.0..1.0);

        let n_scores = model.dims.head_in - model.config.proj_dim;
        let data: Vec<(Features, f64)> = (0..rng.gen_range(1..=6))
            .map(|_| {
                let features = Features {
                    embedding: (0..model.dims.proj_in).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    scores: (0..n_scores).map(|_| rng.gen_range(0.0..1.0)).collect(),
                };
                (features, f64::from(rng.gen_range(0u8..2)))
            })
            .collect();
        let batch: Vec<(&Features, f64)> = data.iter().map(|(f, t)| (f, *t)).collect();
        let (_, grad) = model.loss_and_gradients(&batch);

        let loss_with = |m: &FusionModel| m.loss_and_gradients(&batch).0;
        let numeric = |edit: &dyn Fn(&mut FusionModel, f64)| {
            let mut plus = model.clone();
            edit(&mut plus, FD_STEP);
            let mut minus = model.clone();
            edit(&mut minus, -FD_STEP);
            (loss_with(&plus) - loss_with(&minus)) / (2.0 * FD_STEP)
        };

        for i in 0..model.projection.len() {
            for j in 0..model.dims.proj_in {
                let n = numeric(&|m, h| m.projection[i][j] += h);
                if !close(grad.projection[i][j], n) {
                    return Err(format!("projection[{i}][{j}]: {} vs {n}", grad.projection[i][j]));
                }
            }
        }
        for k in 0..model.dims.head_in {
            let n = numeric(&|m, h| m.head_weights[k] += h);
            if !close(grad.head_weights[k], n) {
                return Err(format!("head_weights[{k}]: {} vs {n}", grad.head_weights[k]));
            }
        }
        let n = numeric(&|m, h| m.head_bias += h);
        if !close(grad.head_bias, n) {
            return Err(format!("head_bias: {} vs {n}", grad.head_bias));
        }
        Ok(())
    }

    /// Builds each preset with embedding widths (7, 3) and checks the
    /// parameter shapes and the extracted feature widths.
    pub fn variant_shapes() -> Result<Vec<(Variant, Dims)>, String> {
        let lexicon = super::l0();
        let a = HashEmbedder::new(7, 0).unwrap();
        let b = HashEmbedder::new(3, 1).unwrap();
        let mut out = Vec::new();
        for variant in Variant::ALL {
            let config = variant.config();
            let model = FusionModel::zeros(config.clone(), 7, 3).map_err(|e| e.to_string())?;
            let d = model.dims;
            let proj_in = 7 * usize::from(config.use_embed_a) + 3 * usize::from(config.use_embed_b);
            let head_in = config.proj_dim + SCORE_DIM * usize::from(config.use_vago_scores);
            if d.proj_in != proj_in || d.head_in != head_in {
                return Err(format!("{variant}: dims {d:?}"));
            }
            if model.projection.len() != config.proj_dim
                || model.projection.iter().any(|r| r.len() != proj_in)
                || model.head_weights.len() != head_in
            {
                return Err(format!("{variant}: parameter shapes disagree with {d:?}"));
            }
            let extractor = FeatureExtractor {
                config: &config,
                embed_a: Some(&a),
                embed_b: Some(&b),
                lexicon: &lexicon,
                ner: &PatternNer,
            };
            let input = extractor
                .extract("s", "Mary is approximately tall")
                .map_err(|e| e.to_string())?;
            let features = model.features(&input).map_err(|e| e.to_string())?;
            if features.embedding.len() != proj_in || features.scores.len() + config.proj_dim != head_in {
                return Err(format!("{variant}: extracted features do not fit"));
            }
            model.forward(&input).map_err(|e| e.to_string())?;
            out.push((variant, d));
        }
        Ok(out)
    }
}
