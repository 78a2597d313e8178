//! The hybrid classifier.
//!
//! Active sentence embeddings are concatenated and linearly projected to a
//! small dimension (5 by default). The four VAGO scores are appended, giving
//! the 9-dimensional input of a logistic head:
//!
//! ```text
//! p = sigmoid(w . [P x ; s] + b)
//! ```
//!
//! `P`, `w` and `b` are trained with mean binary cross-entropy by plain
//! mini-batch gradient descent. The embeddings themselves are frozen.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;
use crate::embeddings::{EmbeddingError, EmbeddingProvider};
use crate::lexicon::Lexicon;
use crate::ner::{NerError, NerProvider};
use crate::scoring::{self, ScoringError, VagoScores};

pub const SCORE_DIM: usize = 4;
const INIT_RANGE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch for {what}: expected {expected}, got {actual}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{0} is required by the model configuration but was not provided")]
    MissingInput(&'static str),
    #[error("{0} was provided but the model configuration does not use it")]
    UnexpectedInput(&'static str),
    #[error("training data is empty")]
    EmptyData,
    #[error("training data contains a single class ({0})")]
    DegenerateData(Label),
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error("sentence {id}: {source}")]
    Scoring {
        id: String,
        #[source]
        source: ScoringError,
    },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Ner(#[from] NerError),
}

/// Named presets for the six system variants compared during development.
/// The names only set flags; the encoders are whatever providers are plugged in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Roberta,
    RobertaSbert,
    RobertaTerms,
    RobertaScores,
    RobertaSbertScores,
    RobertaSbertTermsScores,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Self::Roberta,
        Self::RobertaSbert,
        Self::RobertaTerms,
        Self::RobertaScores,
        Self::RobertaSbertScores,
        Self::RobertaSbertTermsScores,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Roberta => "roberta",
            Self::RobertaSbert => "roberta+sbert",
            Self::RobertaTerms => "roberta+terms",
            Self::RobertaScores => "roberta+scores",
            Self::RobertaSbertScores => "roberta+sbert+scores",
            Self::RobertaSbertTermsScores => "roberta+sbert+terms+scores",
        }
    }

    /// (embed_a, embed_b, scores, terms)
    fn flags(self) -> (bool, bool, bool, bool) {
        match self {
            Self::Roberta => (true, false, false, false),
            Self::RobertaSbert => (true, true, false, false),
            Self::RobertaTerms => (true, false, false, true),
            Self::RobertaScores => (true, false, true, false),
            Self::RobertaSbertScores => (true, true, true, false),
            Self::RobertaSbertTermsScores => (true, true, true, true),
        }
    }

    pub fn config(self) -> FusionConfig {
        FusionConfig::default().with_variant(self)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
            FusionError::Config(format!("unknown variant {s:?} (expected one of {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub use_embed_a: bool,
    pub use_embed_b: bool,
    pub use_vago_scores: bool,
    /// Append detected terms to the text fed to embedding A.
    pub use_vago_terms: bool,
    pub proj_dim: usize,
    pub separator: String,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            use_embed_a: true,
            use_embed_b: true,
            use_vago_scores: true,
            use_vago_terms: false,
            proj_dim: 5,
            separator: "[SEP]".to_string(),
            epochs: 30,
            batch_size: 6,
            learning_rate: DEFAULT_LEARNING_RATE,
            seed: 0,
        }
    }
}

/// Step size for the projection and head.
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;

impl FusionConfig {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        let (a, b, scores, terms) = variant.flags();
        self.use_embed_a = a;
        self.use_embed_b = b;
        self.use_vago_scores = scores;
        self.use_vago_terms = terms;
        self
    }

    /// The preset these flags correspond to, if any.
    pub fn variant(&self) -> Option<Variant> {
        let flags = (
            self.use_embed_a,
            self.use_embed_b,
            self.use_vago_scores,
            self.use_vago_terms,
        );
        Variant::ALL.into_iter().find(|v| v.flags() == flags)
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        let bad = |msg: &str| Err(FusionError::Config(msg.to_string()));
        if !self.use_embed_a && !self.use_embed_b {
            return bad("at least one embedding must be enabled");
        }
        if self.use_vago_terms && !self.use_embed_a {
            return bad("term augmentation applies to embedding A, which is disabled");
        }
        if self.proj_dim == 0 {
            return bad("proj_dim must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.separator.is_empty() {
            return bad("separator must not be empty");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive and finite");
        }
        Ok(())
    }
}

/// Input widths. An unused embedding has width 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub embed_a: usize,
    pub embed_b: usize,
    pub proj_in: usize,
    pub head_in: usize,
}

impl Dims {
    pub fn new(config: &FusionConfig, embed_a: usize, embed_b: usize) -> Self {
        let embed_a = if config.use_embed_a { embed_a } else { 0 };
        let embed_b = if config.use_embed_b { embed_b } else { 0 };
        Self {
            embed_a,
            embed_b,
            proj_in: embed_a + embed_b,
            head_in: config.proj_dim + if config.use_vago_scores { SCORE_DIM } else { 0 },
        }
    }
}

/// `text [SEP] term term ...`
pub fn augment_with_terms(text: &str, terms: &[String], separator: &str) -> String {
    let mut out = format!("{text} {separator}");
    for term in terms {
        out.push(' ');
        out.push_str(term);
    }
    out
}

/// Raw per-sentence inputs to the classifier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FusionInput {
    pub embed_a: Option<Vec<f64>>,
    pub embed_b: Option<Vec<f64>>,
    pub scores: Option<VagoScores>,
}

/// Validated, flattened classifier input: the concatenated embeddings and the
/// (possibly empty) score vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub embedding: Vec<f64>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub projection: Vec<Vec<f64>>,
    pub head_weights: Vec<f64>,
    pub head_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    pub config: FusionConfig,
    /// `proj_dim` rows of `dims.proj_in` columns.
    pub projection: Vec<Vec<f64>>,
    pub head_weights: Vec<f64>,
    pub head_bias: f64,
    pub dims: Dims,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(logit)` against `target`, computed from
/// the logit directly.
pub fn bce_with_logit(logit: f64, target: f64) -> f64 {
    logit.max(0.0) - logit * target + (-logit.abs()).exp().ln_1p()
}

impl FusionModel {
    /// All-zero parameters.
    pub fn zeros(config: FusionConfig, embed_a: usize, embed_b: usize) -> Result<Self, FusionError> {
        config.validate()?;
        let dims = Dims::new(&config, embed_a, embed_b);
        if config.use_embed_a && embed_a == 0 || config.use_embed_b && embed_b == 0 {
            return Err(FusionError::Config("enabled embeddings need a positive width".into()));
        }
        Ok(Self {
            projection: vec![vec![0.0; dims.proj_in]; config.proj_dim],
            head_weights: vec![0.0; dims.head_in],
            head_bias: 0.0,
            dims,
            config,
        })
    }

    /// Weights uniform in [-0.1, 0.1] drawn from `rng`, bias 0.
    pub fn initialize<R: Rng>(
        config: FusionConfig,
        embed_a: usize,
        embed_b: usize,
        rng: &mut R,
    ) -> Result<Self, FusionError> {
        let mut model = Self::zeros(config, embed_a, embed_b)?;
        for row in &mut model.projection {
            for w in row.iter_mut() {
                *w = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
            }
        }
        for w in &mut model.head_weights {
            *w = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
        }
        Ok(model)
    }

    /// Checks that the parameter shapes agree with `dims` and the config.
    pub fn validate(&self) -> Result<(), FusionError> {
        self.config.validate()?;
        let expected = Dims::new(&self.config, self.dims.embed_a, self.dims.embed_b);
        if expected != self.dims {
            return Err(FusionError::Config(format!(
                "dims {:?} disagree with the configuration (expected {:?})",
                self.dims, expected
            )));
        }
        let check = |what, expected, actual| {
            if expected == actual {
                Ok(())
            } else {
                Err(FusionError::Shape { what, expected, actual })
            }
        };
        check("projection rows", self.config.proj_dim, self.projection.len())?;
        for row in &self.projection {
            check("projection columns", self.dims.proj_in, row.len())?;
        }
        check("head weights", self.dims.head_in, self.head_weights.len())?;
        let finite = self
            .projection
            .iter()
            .flatten()
            .chain(&self.head_weights)
            .chain(std::iter::once(&self.head_bias))
            .all(|x| x.is_finite());
        if !finite {
            return Err(FusionError::Config("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model parameters are finite")
    }

    pub fn from_json(text: &str) -> Result<Self, FusionError> {
        let model: Self =
            serde_json::from_str(text).map_err(|e| FusionError::Config(format!("invalid model file: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    /// Validates and flattens one input.
    pub fn features(&self, input: &FusionInput) -> Result<Features, FusionError> {
        let mut embedding = Vec::with_capacity(self.dims.proj_in);
        for (used, width, vector, what) in [
            (
                self.config.use_embed_a,
                self.dims.embed_a,
                &input.embed_a,
                "embedding A",
            ),
            (
                self.config.use_embed_b,
                self.dims.embed_b,
                &input.embed_b,
                "embedding B",
            ),
        ] {
            match (used, vector) {
                (true, Some(v)) => {
                    if v.len() != width {
                        return Err(FusionError::Shape {
                            what,
                            expected: width,
                            actual: v.len(),
                        });
                    }
                    embedding.extend_from_slice(v);
                }
                (true, None) => return Err(FusionError::MissingInput(what)),
                (false, Some(_)) => return Err(FusionError::UnexpectedInput(what)),
                (false, None) => {}
            }
        }
        let scores = match (self.config.use_vago_scores, &input.scores) {
            (true, Some(s)) => s.to_array().to_vec(),
            (true, None) => return Err(FusionError::MissingInput("VAGO scores")),
            (false, Some(_)) => return Err(FusionError::UnexpectedInput("VAGO scores")),
            (false, None) => Vec::new(),
        };
        Ok(Features { embedding, scores })
    }

    fn head_input(&self, features: &Features) -> Vec<f64> {
        let mut h: Vec<f64> = self
            .projection
            .iter()
            .map(|row| row.iter().zip(&features.embedding).map(|(w, x)| w * x).sum())
            .collect();
        h.extend_from_slice(&features.scores);
        h
    }

    fn logit_of(&self, head_input: &[f64]) -> f64 {
        self.head_weights
            .iter()
            .zip(head_input)
            .map(|(w, h)| w * h)
            .sum::<f64>()
            + self.head_bias
    }

    pub fn logit(&self, features: &Features) -> f64 {
        self.logit_of(&self.head_input(features))
    }

    pub fn probability(&self, features: &Features) -> f64 {
        sigmoid(self.logit(features))
    }

    pub fn forward(&self, input: &FusionInput) -> Result<f64, FusionError> {
        Ok(self.probability(&self.features(input)?))
    }

    /// SUBJ iff the probability reaches `threshold`.
    pub fn predict(&self, threshold: f64, input: &FusionInput) -> Result<Label, FusionError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(FusionError::Threshold(threshold));
        }
        Ok(decide(self.forward(input)?, threshold))
    }

    /// Mean BCE over `batch` and its gradient with respect to every parameter.
    /// Targets are 1.0 for SUBJ and 0.0 for OBJ.
    pub fn loss_and_gradients(&self, batch: &[(&Features, f64)]) -> (f64, Gradients) {
        let mut grad = Gradients {
            projection: vec![vec![0.0; self.dims.proj_in]; self.config.proj_dim],
            head_weights: vec![0.0; self.dims.head_in],
            head_bias: 0.0,
        };
        if batch.is_empty() {
            return (0.0, grad);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for &(features, target) in batch {
            let h = self.head_input(features);
            let logit = self.logit_of(&h);
            loss += bce_with_logit(logit, target);
            let delta = (sigmoid(logit) - target) * scale;
            for (g, hi) in grad.head_weights.iter_mut().zip(&h) {
                *g += delta * hi;
            }
            grad.head_bias += delta;
            for (row, w) in grad.projection.iter_mut().zip(&self.head_weights) {
                let dz = delta * w;
                for (g, x) in row.iter_mut().zip(&features.embedding) {
                    *g += dz * x;
                }
            }
        }
        (loss * scale, grad)
    }

    pub fn mean_loss(&self, data: &[(&Features, f64)]) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        data.iter().map(|&(f, t)| bce_with_logit(self.logit(f), t)).sum::<f64>() / data.len() as f64
    }

    fn step(&mut self, grad: &Gradients, lr: f64) {
        for (row, grow) in self.projection.iter_mut().zip(&grad.projection) {
            for (w, g) in row.iter_mut().zip(grow) {
                *w -= lr * g;
            }
        }
        for (w, g) in self.head_weights.iter_mut().zip(&grad.head_weights) {
            *w -= lr * g;
        }
        self.head_bias -= lr * grad.head_bias;
    }
}

pub fn decide(probability: f64, threshold: f64) -> Label {
    if probability >= threshold {
        Label::Subj
    } else {
        Label::Obj
    }
}

pub fn target(label: Label) -> f64 {
    match label {
        Label::Subj => 1.0,
        Label::Obj => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: Label,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: FusionModel,
    /// Mean training loss of the initialized model.
    pub initial_loss: f64,
    /// Mean training loss after each epoch.
    pub loss_trace: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(self.initial_loss)
    }
}

/// Turns sentences into classifier inputs: runs the VAGO analysis, applies
/// term augmentation to embedding A's text and queries the providers.
pub struct FeatureExtractor<'a> {
    pub config: &'a FusionConfig,
    pub embed_a: Option<&'a dyn EmbeddingProvider>,
    pub embed_b: Option<&'a dyn EmbeddingProvider>,
    pub lexicon: &'a Lexicon,
    pub ner: &'a dyn NerProvider,
}

impl<'a> FeatureExtractor<'a> {
    fn provider(
        used: bool,
        provider: Option<&'a dyn EmbeddingProvider>,
        what: &'static str,
    ) -> Result<Option<&'a dyn EmbeddingProvider>, FusionError> {
        match (used, provider) {
            (true, None) => Err(FusionError::MissingInput(what)),
            (true, p) => Ok(p),
            (false, _) => Ok(None),
        }
    }

    /// Embedding widths as seen by the model (0 for unused embeddings).
    pub fn widths(&self) -> Result<(usize, usize), FusionError> {
        let a = Self::provider(self.config.use_embed_a, self.embed_a, "embedding A")?;
        let b = Self::provider(self.config.use_embed_b, self.embed_b, "embedding B")?;
        Ok((a.map_or(0, |p| p.dim()), b.map_or(0, |p| p.dim())))
    }

    pub fn extract(&self, id: &str, text: &str) -> Result<FusionInput, FusionError> {
        let config = self.config;
        let mut input = FusionInput::default();
        if config.use_vago_scores || config.use_vago_terms {
            let analysis = scoring::analyze(id, text, self.lexicon, self.ner)?;
            if config.use_vago_scores {
                let scores = scoring::compute_scores(&analysis).map_err(|source| FusionError::Scoring {
                    id: id.to_string(),
                    source,
                })?;
                input.scores = Some(scores);
            }
            if config.use_vago_terms {
                let terms = scoring::vago_terms(&analysis);
                let augmented = augment_with_terms(text, &terms, &config.separator);
                let a = Self::provider(true, self.embed_a, "embedding A")?.expect("checked");
                input.embed_a = Some(a.embed(id, &augmented)?);
            }
        }
        if config.use_embed_a && input.embed_a.is_none() {
            let a = Self::provider(true, self.embed_a, "embedding A")?.expect("checked");
            input.embed_a = Some(a.embed(id, text)?);
        }
        if config.use_embed_b {
            let b = Self::provider(true, self.embed_b, "embedding B")?.expect("checked");
            input.embed_b = Some(b.embed(id, text)?);
        }
        Ok(input)
    }
}

/// Gradient descent on prepared features. Shuffling and initialization draw
/// from one ChaCha8 stream seeded with `config.seed`, so identical inputs give
/// bit-identical models.
pub fn train_features(
    config: &FusionConfig,
    embed_a: usize,
    embed_b: usize,
    data: &[(Features, Label)],
) -> Result<TrainOutcome, FusionError> {
    config.validate()?;
    check_classes(data.iter().map(|(_, l)| *l))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = FusionModel::initialize(config.clone(), embed_a, embed_b, &mut rng)?;
    let pairs: Vec<(&Features, f64)> = data.iter().map(|(f, l)| (f, target(*l))).collect();
    for (f, _) in &pairs {
        if f.embedding.len() != model.dims.proj_in {
            return Err(FusionError::Shape {
                what: "embedding features",
                expected: model.dims.proj_in,
                actual: f.embedding.len(),
            });
        }
        if f.scores.len() != model.dims.head_in - config.proj_dim {
            return Err(FusionError::Shape {
                what: "score features",
                expected: model.dims.head_in - config.proj_dim,
                actual: f.scores.len(),
            });
        }
    }
    let initial_loss = model.mean_loss(&pairs);
    let mut loss_trace = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| pairs[i]));
            let (_, grad) = model.loss_and_gradients(&batch);
            model.step(&grad, config.learning_rate);
        }
        let loss = model.mean_loss(&pairs);
        if !loss.is_finite() {
            return Err(FusionError::Divergence { epoch });
        }
        loss_trace.push(loss);
    }
    Ok(TrainOutcome {
        model,
        initial_loss,
        loss_trace,
    })
}

fn check_classes(labels: impl Iterator<Item = Label>) -> Result<(), FusionError> {
    let (mut subj, mut obj) = (false, false);
    let mut any = false;
    for label in labels {
        any = true;
        match label {
            Label::Subj => subj = true,
            Label::Obj => obj = true,
        }
    }
    match (any, subj, obj) {
        (false, _, _) => Err(FusionError::EmptyData),
        (true, true, false) => Err(FusionError::DegenerateData(Label::Subj)),
        (true, false, true) => Err(FusionError::DegenerateData(Label::Obj)),
        _ => Ok(()),
    }
}

/// Extracts features for every example, then trains.
pub fn train(data: &[LabeledExample], extractor: &FeatureExtractor<'_>) -> Result<TrainOutcome, FusionError> {
    extractor.config.validate()?;
    check_classes(data.iter().map(|e| e.label))?;
    let (wa, wb) = extractor.widths()?;
    let shape = FusionModel::zeros(extractor.config.clone(), wa, wb)?;
    let prepared = data
        .iter()
        .map(|e| {
            let input = extractor.extract(&e.id, &e.text)?;
            Ok((shape.features(&input)?, e.label))
        })
        .collect::<Result<Vec<_>, FusionError>>()?;
    train_features(extractor.config, wa, wb, &prepared)
}
