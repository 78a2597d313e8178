//! Sentence vectors behind a provider boundary.
//!
//! Transformer encoders run out of process: their vectors are precomputed and
//! read back with [`EmbeddingFile`]. [`HashEmbedder`] is a deterministic
//! bag-of-words stand-in for tests and demos.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::textprep::{self, TokenKind};

/// Width of a base BERT sentence embedding.
pub const DEFAULT_DIM: usize = 768;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
    #[error("embedding line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent vector lengths: {expected} vs {found} at line {line}")]
    Inconsistent { expected: usize, found: usize, line: usize },
    #[error("embedding file contains no vectors")]
    Empty,
    #[error("no embedding for id {0:?}")]
    UnknownId(String),
    #[error("invalid embedding selector {0:?}: expected hash[:<dim>[:<seed>]] or file:<path>")]
    Selector(String),
    #[error("failed to read embeddings: {0}")]
    Io(#[from] std::io::Error),
}

pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Vector for one sentence. File-backed providers look up `id`; computed
    /// providers use `text`.
    fn embed(&self, id: &str, text: &str) -> Result<Vec<f64>, EmbeddingError>;
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded token hash: `mix64(fnv1a64(token) ^ mix64(seed))`.
pub fn token_hash(token: &str, seed: u64) -> u64 {
    mix64(fnv1a64(token.as_bytes()) ^ mix64(seed))
}

/// Signed feature hashing of lowercased word and number tokens, L2-normalized.
/// The low bits of the token hash pick the slot, the top bit picks the sign.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Result<Vec<f64>, EmbeddingError> {
    if dim == 0 {
        return Err(EmbeddingError::ZeroDim);
    }
    let mut v = vec![0.0; dim];
    for token in textprep::tokenize(text) {
        if token.kind == TokenKind::Punctuation {
            continue;
        }
        let h = token_hash(&token.text.to_lowercase(), seed);
        let slot = (h % dim as u64) as usize;
        v[slot] += if h >> 63 == 0 { 1.0 } else { -1.0 };
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct HashEmbedder {
    name: String,
    dim: usize,
    seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        Ok(Self {
            name: format!("hash:{dim}:{seed}"),
            dim,
            seed,
        })
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, _id: &str, text: &str) -> Result<Vec<f64>, EmbeddingError> {
        hash_embed(text, self.dim, self.seed)
    }
}

#[derive(Deserialize)]
struct VectorLine {
    id: String,
    vector: Vec<f64>,
}

/// Precomputed vectors keyed by sentence id, read from JSON lines
/// `{"id": "...", "vector": [...]}`.
#[derive(Debug, Clone)]
pub struct EmbeddingFile {
    name: String,
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingFile {
    pub fn load<R: BufRead>(source: R) -> Result<Self, EmbeddingError> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: VectorLine = serde_json::from_str(&line).map_err(|e| EmbeddingError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let found = record.vector.len();
            if found == 0 {
                return Err(EmbeddingError::ZeroDim);
            }
            match dim {
                None => dim = Some(found),
                Some(expected) if expected != found => {
                    return Err(EmbeddingError::Inconsistent {
                        expected,
                        found,
                        line: line_no,
                    })
                }
                Some(_) => {}
            }
            if vectors.insert(record.id.clone(), record.vector).is_some() {
                return Err(EmbeddingError::Parse {
                    line: line_no,
                    message: format!("duplicate id {:?}", record.id),
                });
            }
        }
        let dim = dim.ok_or(EmbeddingError::Empty)?;
        Ok(Self {
            name: "file".to_string(),
            dim,
            vectors,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for EmbeddingFile {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, id: &str, _text: &str) -> Result<Vec<f64>, EmbeddingError> {
        self.vectors
            .get(id)
            .cloned()
            .ok_or_else(|| EmbeddingError::UnknownId(id.to_string()))
    }
}

pub fn load_embedding_file<R: BufRead>(source: R) -> Result<EmbeddingFile, EmbeddingError> {
    EmbeddingFile::load(source)
}

/// Provider choice as written on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbeddingSelector {
    Hash { dim: usize, seed: u64 },
    File(PathBuf),
}

impl EmbeddingSelector {
    pub fn build(&self) -> Result<Box<dyn EmbeddingProvider>, EmbeddingError> {
        match self {
            Self::Hash { dim, seed } => Ok(Box::new(HashEmbedder::new(*dim, *seed)?)),
            Self::File(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
                let provider = EmbeddingFile::load(std::io::BufReader::new(file))?;
                Ok(Box::new(provider.with_name(self.to_string())))
            }
        }
    }
}

impl Default for EmbeddingSelector {
    fn default() -> Self {
        Self::Hash {
            dim: DEFAULT_DIM,
            seed: 0,
        }
    }
}

impl fmt::Display for EmbeddingSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hash { dim, seed } => write!(f, "hash:{dim}:{seed}"),
            Self::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for EmbeddingSelector {
    type Err = EmbeddingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EmbeddingError::Selector(s.to_string());
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(Self::File(PathBuf::from(path)));
        }
        let mut parts = s.split(':');
        if parts.next() != Some("hash") {
            return Err(bad());
        }
        let dim = match parts.next() {
            Some(d) => d.parse().map_err(|_| bad())?,
            None => DEFAULT_DIM,
        };
        let seed = match parts.next() {
            Some(x) => x.parse().map_err(|_| bad())?,
            None => 0,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        Ok(Self::Hash { dim, seed })
    }
}
