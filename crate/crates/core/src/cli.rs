//! The `hysubj` command line.
//!
//! Every command reads its inputs, runs to completion and writes its outputs
//! through a single writer. All randomness comes from `--seed`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{self, CorpusError, CorpusRecord, Label, LoadOptions};
use crate::embeddings::{EmbeddingError, EmbeddingProvider, EmbeddingSelector};
use crate::evaluation::{self, EvalError, EvalReport, SweepResult};
use crate::fusion::{self, FeatureExtractor, FusionConfig, FusionError, FusionModel, LabeledExample, Variant};
use crate::lexicon::{Lexicon, LexiconError, VagoCategory};
use crate::ner::{AnnotationFile, NerError, NerProvider, PatternNer};
use crate::scoring::{self, ScoringError};

pub const DEFAULT_VARIANT: Variant = Variant::RobertaSbertScores;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Lexicon {
        path: PathBuf,
        #[source]
        source: LexiconError,
    },
    #[error("{}: {source}", path.display())]
    Corpus {
        path: PathBuf,
        #[source]
        source: CorpusError,
    },
    #[error("sentence {id}: {source}")]
    Sentence {
        id: String,
        #[source]
        source: ScoringError,
    },
    #[error(transparent)]
    Ner(#[from] NerError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("write failed: {0}")]
    Write(#[from] io::Error),
}

/// `pattern` or `file:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NerSelector {
    Pattern,
    File(PathBuf),
}

impl FromStr for NerSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pattern" => Ok(Self::Pattern),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Self::File(path.into())),
                _ => Err(format!("expected pattern or file:<path>, got {s:?}")),
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hysubj",
    version,
    about = "Lexicon-driven subjectivity scoring and hybrid classification"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Lexicon TSV (`term<TAB>category`).
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Entity recognizer: `pattern` or `file:<annotations.jsonl>`.
    #[arg(long, global = true, default_value = "pattern")]
    pub ner: NerSelector,
    /// Provider for embedding A: `hash[:<dim>[:<seed>]]` or `file:<vectors.jsonl>`.
    #[arg(long = "embed-a", global = true, default_value = "hash:768:0")]
    pub embed_a: EmbeddingSelector,
    /// Provider for embedding B.
    #[arg(long = "embed-b", global = true, default_value = "hash:768:1")]
    pub embed_b: EmbeddingSelector,
    /// System variant preset (training defaults to roberta+sbert+scores).
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// Decision threshold: SUBJ when the probability reaches it.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long = "grid-step", global = true, default_value_t = evaluation::DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Strip square brackets from sentences while loading corpora.
    #[arg(long = "clean-brackets", global = true)]
    pub clean_brackets: bool,
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every sentence of a corpus; writes JSON lines.
    Analyze { corpus: PathBuf },
    /// Train the fusion classifier on a labeled corpus; writes the model JSON.
    Train {
        corpus: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long = "batch-size")]
        batch_size: Option<usize>,
        #[arg(long = "learning-rate")]
        learning_rate: Option<f64>,
        #[arg(long = "proj-dim")]
        proj_dim: Option<usize>,
        /// Per-epoch loss CSV (defaults next to the model as `<stem>.loss.csv`).
        #[arg(long = "loss-csv")]
        loss_csv: Option<PathBuf>,
    },
    /// Evaluate a trained model on a labeled corpus; writes the report JSON.
    Evaluate {
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Also search the threshold grid for the best macro F1.
        #[arg(long)]
        sweep: bool,
        #[arg(long = "roc-csv")]
        roc_csv: Option<PathBuf>,
        /// Per-sentence scores as TSV (`sentence_id`, `score`, `label`).
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Find the macro-F1-optimal threshold for a predictions TSV.
    Sweep { predictions: PathBuf },
    /// Count labeled sentences containing a term, and how many are OBJ.
    Audit {
        corpus: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Print the lexicon's entry count per category.
    LexiconStats,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

impl GlobalArgs {
    fn lexicon(&self) -> Result<Lexicon, CliError> {
        let path = self
            .lexicon
            .as_deref()
            .ok_or_else(|| CliError::Usage("--lexicon is required for this command".into()))?;
        Lexicon::load(open(path)?).map_err(|source| CliError::Lexicon {
            path: path.to_path_buf(),
            source,
        })
    }

    fn ner(&self) -> Result<Box<dyn NerProvider>, CliError> {
        Ok(match &self.ner {
            NerSelector::Pattern => Box::new(PatternNer),
            NerSelector::File(path) => Box::new(AnnotationFile::load(open(path)?)?),
        })
    }

    fn corpus(&self, path: &Path, labeled: bool) -> Result<Vec<CorpusRecord>, CliError> {
        let options = LoadOptions {
            labeled,
            clean_brackets: self.clean_brackets,
        };
        corpus::load_corpus(open(path)?, options).map_err(|source| CliError::Corpus {
            path: path.to_path_buf(),
            source,
        })
    }

    fn variant(&self) -> Result<Option<Variant>, CliError> {
        self.variant
            .as_deref()
            .map(|v| v.parse().map_err(CliError::from))
            .transpose()
    }

    fn input_paths(&self) -> Vec<&Path> {
        let mut paths: Vec<&Path> = self.lexicon.iter().map(PathBuf::as_path).collect();
        if let NerSelector::File(p) = &self.ner {
            paths.push(p);
        }
        for sel in [&self.embed_a, &self.embed_b] {
            if let EmbeddingSelector::File(p) = sel {
                paths.push(p);
            }
        }
        paths
    }
}

fn check_distinct(inputs: &[&Path], outputs: &[&Path]) -> Result<(), CliError> {
    for (i, out) in outputs.iter().enumerate() {
        if inputs.contains(out) || outputs[..i].contains(out) {
            return Err(CliError::Usage(format!(
                "output path {} collides with another input or output",
                out.display()
            )));
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze { corpus } => cmd_analyze(g, corpus),
        Command::Train {
            corpus,
            epochs,
            batch_size,
            learning_rate,
            proj_dim,
            loss_csv,
        } => {
            let mut config = FusionConfig {
                seed: g.seed,
                ..g.variant()?.unwrap_or(DEFAULT_VARIANT).config()
            };
            if let Some(e) = epochs {
                config.epochs = *e;
            }
            if let Some(b) = batch_size {
                config.batch_size = *b;
            }
            if let Some(lr) = learning_rate {
                config.learning_rate = *lr;
            }
            if let Some(d) = proj_dim {
                config.proj_dim = *d;
            }
            cmd_train(g, corpus, config, loss_csv.as_deref())
        }
        Command::Evaluate {
            corpus,
            model,
            sweep,
            roc_csv,
            predictions,
        } => cmd_evaluate(g, corpus, model, *sweep, roc_csv.as_deref(), predictions.as_deref()),
        Command::Sweep { predictions } => cmd_sweep(g, predictions),
        Command::Audit { corpus, term } => cmd_audit(g, corpus, term),
        Command::LexiconStats => cmd_lexicon_stats(g),
    }
}

#[derive(Serialize)]
struct AnalyzeCounts {
    #[serde(rename = "VA")]
    va: usize,
    #[serde(rename = "VG")]
    vg: usize,
    #[serde(rename = "VD")]
    vd: usize,
    #[serde(rename = "VC")]
    vc: usize,
    #[serde(rename = "ES")]
    es: usize,
    #[serde(rename = "NE")]
    ne: usize,
    #[serde(rename = "V")]
    vague: usize,
    #[serde(rename = "S")]
    subjective: usize,
    #[serde(rename = "O")]
    objective: usize,
}

#[derive(Serialize)]
struct AnalyzeLine<'a> {
    id: &'a str,
    n_words: usize,
    counts: AnalyzeCounts,
    scores: [f64; 4],
    terms: Vec<String>,
    entities: usize,
}

/// Scores each record and writes one JSON line per sentence.
pub fn analyze_records<W: Write>(
    records: &[CorpusRecord],
    lexicon: &Lexicon,
    ner: &dyn NerProvider,
    mut out: W,
) -> Result<(), CliError> {
    use VagoCategory::*;
    for record in records {
        let sentence_err = |source| CliError::Sentence {
            id: record.id.clone(),
            source,
        };
        let analysis = scoring::analyze(&record.id, &record.text, lexicon, ner)?;
        let scores = scoring::compute_scores(&analysis).map_err(sentence_err)?;
        let c = &analysis.counts;
        let line = AnalyzeLine {
            id: &record.id,
            n_words: analysis.n_words,
            counts: AnalyzeCounts {
                va: c.vague[VA],
                vg: c.vague[VG],
                vd: c.vague[VD],
                vc: c.vague[VC],
                es: c.vague[ES],
                ne: c.entities,
                vague: c.vague_total(),
                subjective: c.subjective_total(),
                objective: c.objective_total(),
            },
            scores: scores.to_array(),
            terms: scoring::vago_terms(&analysis),
            entities: c.entities,
        };
        serde_json::to_writer(&mut out, &line).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_analyze(g: &GlobalArgs, corpus_path: &Path) -> Result<(), CliError> {
    let mut inputs = g.input_paths();
    inputs.push(corpus_path);
    check_distinct(&inputs, &g.out.as_deref().into_iter().collect::<Vec<_>>())?;
    let lexicon = g.lexicon()?;
    let ner = g.ner()?;
    let records = g.corpus(corpus_path, false)?;
    analyze_records(&records, &lexicon, ner.as_ref(), output(g.out.as_deref())?)
}

fn labeled_examples(records: Vec<CorpusRecord>) -> Vec<LabeledExample> {
    records
        .into_iter()
        .map(|r| LabeledExample {
            label: r.label.expect("loaded as labeled"),
            id: r.id,
            text: r.text,
        })
        .collect()
}

type Provider = Box<dyn EmbeddingProvider>;

fn providers(g: &GlobalArgs, config: &FusionConfig) -> Result<(Option<Provider>, Option<Provider>), CliError> {
    let a = config.use_embed_a.then(|| g.embed_a.build()).transpose()?;
    let b = config.use_embed_b.then(|| g.embed_b.build()).transpose()?;
    Ok((a, b))
}

/// `model.json` -> `model.loss.csv`
pub fn default_loss_path(model: &Path) -> PathBuf {
    let stem = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    model.with_file_name(format!("{stem}.loss.csv"))
}

fn cmd_train(
    g: &GlobalArgs,
    corpus_path: &Path,
    config: FusionConfig,
    loss_csv: Option<&Path>,
) -> Result<(), CliError> {
    let model_path = g
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("train needs --out for the model file".into()))?;
    let loss_path = loss_csv.map_or_else(|| default_loss_path(model_path), Path::to_path_buf);
    let mut inputs = g.input_paths();
    inputs.push(corpus_path);
    check_distinct(&inputs, &[model_path, &loss_path])?;

    config.validate()?;
    let lexicon = g.lexicon()?;
    let ner = g.ner()?;
    let data = labeled_examples(g.corpus(corpus_path, true)?);
    let (a, b) = providers(g, &config)?;
    let extractor = FeatureExtractor {
        config: &config,
        embed_a: a.as_deref(),
        embed_b: b.as_deref(),
        lexicon: &lexicon,
        ner: ner.as_ref(),
    };
    let outcome = fusion::train(&data, &extractor)?;

    let mut model_out = create(model_path)?;
    model_out.write_all(outcome.model.to_json().as_bytes())?;
    model_out.write_all(b"\n")?;
    model_out.flush()?;

    let mut loss_out = create(&loss_path)?;
    writeln!(loss_out, "epoch,loss")?;
    writeln!(loss_out, "0,{}", outcome.initial_loss)?;
    for (i, loss) in outcome.loss_trace.iter().enumerate() {
        writeln!(loss_out, "{},{}", i + 1, loss)?;
    }
    loss_out.flush()?;

    println!("final training loss: {}", outcome.final_loss());
    Ok(())
}

fn cmd_evaluate(
    g: &GlobalArgs,
    corpus_path: &Path,
    model_path: &Path,
    sweep: bool,
    roc_csv: Option<&Path>,
    predictions: Option<&Path>,
) -> Result<(), CliError> {
    let mut inputs = g.input_paths();
    inputs.extend([corpus_path, model_path]);
    let outputs: Vec<&Path> = g.out.as_deref().into_iter().chain(roc_csv).chain(predictions).collect();
    check_distinct(&inputs, &outputs)?;
    if !(0.0..=1.0).contains(&g.threshold) {
        return Err(FusionError::Threshold(g.threshold).into());
    }

    let text = std::fs::read_to_string(model_path).map_err(|source| CliError::Io {
        path: model_path.to_path_buf(),
        source,
    })?;
    let model = FusionModel::from_json(&text)?;
    if let Some(requested) = g.variant()? {
        if model.config.variant() != Some(requested) {
            return Err(CliError::Usage(format!(
                "--variant {requested} does not match the model (use_vago_terms={}, use_vago_scores={}, use_embed_b={})",
                model.config.use_vago_terms, model.config.use_vago_scores, model.config.use_embed_b
            )));
        }
    }
    let (a, b) = providers(g, &model.config)?;
    for (provider, expected, what) in [(&a, model.dims.embed_a, "A"), (&b, model.dims.embed_b, "B")] {
        if let Some(p) = provider {
            if p.dim() != expected {
                return Err(CliError::Usage(format!(
                    "embedding {what} has dimension {} but the model expects {expected}",
                    p.dim()
                )));
            }
        }
    }
    let lexicon = if model.config.use_vago_scores || model.config.use_vago_terms {
        g.lexicon()?
    } else {
        Lexicon::default()
    };
    let ner = g.ner()?;
    let records = g.corpus(corpus_path, true)?;
    let extractor = FeatureExtractor {
        config: &model.config,
        embed_a: a.as_deref(),
        embed_b: b.as_deref(),
        lexicon: &lexicon,
        ner: ner.as_ref(),
    };
    let mut labels = Vec::with_capacity(records.len());
    let mut scores = Vec::with_capacity(records.len());
    for record in &records {
        let input = extractor.extract(&record.id, &record.text)?;
        scores.push(model.forward(&input)?);
        labels.push(record.label.expect("loaded as labeled"));
    }

    let mut report = EvalReport::build(&labels, &scores, g.threshold)?;
    if sweep {
        let grid = evaluation::threshold_grid(g.grid_step)?;
        report.sweep = Some(evaluation::sweep_threshold(&labels, &scores, &grid)?);
    }
    if let Some(path) = roc_csv {
        let mut out = create(path)?;
        out.write_all(report.roc_csv().as_bytes())?;
        out.flush()?;
    }
    if let Some(path) = predictions {
        let mut out = create(path)?;
        writeln!(out, "sentence_id\tscore\tlabel")?;
        for ((record, score), label) in records.iter().zip(&scores).zip(&labels) {
            writeln!(out, "{}\t{}\t{}", record.id, score, label)?;
        }
        out.flush()?;
    }
    let mut out = output(g.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Reads `sentence_id<TAB>score<TAB>label` rows after a header.
pub fn load_predictions<R: BufRead>(source: R) -> Result<(Vec<Label>, Vec<f64>), String> {
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    let mut lines = source.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header)))
            if header
                .trim_end_matches('\r')
                .split('\t')
                .eq(["sentence_id", "score", "label"]) => {}
        _ => return Err("predictions need the header sentence_id<TAB>score<TAB>label".into()),
    }
    for (idx, line) in lines {
        let line = line.map_err(|e| e.to_string())?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(format!("line {}: expected 3 columns, found {}", idx + 1, fields.len()));
        }
        let score: f64 = fields[1]
            .parse()
            .map_err(|_| format!("line {}: bad score {:?}", idx + 1, fields[1]))?;
        let label: Label = fields[2]
            .parse()
            .map_err(|l| format!("line {}: unknown label {l:?}", idx + 1))?;
        scores.push(score);
        labels.push(label);
    }
    Ok((labels, scores))
}

fn cmd_sweep(g: &GlobalArgs, path: &Path) -> Result<(), CliError> {
    check_distinct(&[path], &g.out.as_deref().into_iter().collect::<Vec<_>>())?;
    let (labels, scores) = load_predictions(open(path)?).map_err(|message| CliError::Io {
        path: path.to_path_buf(),
        source: io::Error::new(io::ErrorKind::InvalidData, message),
    })?;
    let grid = evaluation::threshold_grid(g.grid_step)?;
    let SweepResult { threshold, macro_f1 } = evaluation::sweep_threshold(&labels, &scores, &grid)?;
    let subj_f1 = evaluation::Metrics::from_confusion(evaluation::confusion_at(&labels, &scores, threshold)).subj_f1();
    let mut out = output(g.out.as_deref())?;
    serde_json::to_writer_pretty(
        &mut out,
        &serde_json::json!({
            "threshold": threshold,
            "macro_f1": macro_f1,
            "subj_f1": subj_f1,
            "grid_step": g.grid_step,
        }),
    )
    .map_err(io::Error::from)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn cmd_audit(g: &GlobalArgs, corpus_path: &Path, term: &str) -> Result<(), CliError> {
    let lexicon = g.lexicon()?;
    let records = g.corpus(corpus_path, true)?;
    let audit = corpus::audit_term(&records, term, &lexicon).map_err(|source| CliError::Corpus {
        path: corpus_path.to_path_buf(),
        source,
    })?;
    let mut out = output(g.out.as_deref())?;
    serde_json::to_writer(&mut out, &audit).map_err(io::Error::from)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Table of entries per category, ending with the total.
pub fn format_lexicon_stats(lexicon: &Lexicon) -> String {
    let hist = lexicon.histogram();
    let mut out = format!("{:<26}{:<10}{:>8}\n", "Category", "Label", "Entries");
    for (category, count) in hist.iter() {
        out.push_str(&format!(
            "{:<26}{:<10}{:>8}\n",
            category.description(),
            category.label(),
            count
        ));
    }
    out.push_str(&format!("{:<26}{:<10}{:>8}\n", "All categories", "", hist.total()));
    out
}

fn cmd_lexicon_stats(g: &GlobalArgs) -> Result<(), CliError> {
    let lexicon = g.lexicon()?;
    let mut out = output(g.out.as_deref())?;
    out.write_all(format_lexicon_stats(&lexicon).as_bytes())?;
    out.flush()?;
    Ok(())
}
