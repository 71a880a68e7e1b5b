//! TextTiling over embedding similarity (the TeT+CLS family).
//!
//! Vectors come from an OpenAI-style `/embeddings` service or from a
//! precomputed JSONL vector file. HTTP results are cached by
//! `(model_id, sha256(text))` in memory and, optionally, in an append-only
//! JSONL file.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classical::tiling::{boundaries_from_scores, gap_scores};
use crate::classical::{ClassicalError, Segmented, TilingParams};
use crate::corpus::{Document, LineId};
use crate::http::{self, HttpError, RetryPolicy};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("no precomputed vector for ({doc_id}, {line_id})")]
    MissingVector { doc_id: String, line_id: LineId },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector contains a non-finite value")]
    NonFinite,
    #[error("embedding response: {0}")]
    Response(String),
    #[error(transparent)]
    Http(#[from] HttpError),
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error(transparent)]
    Params(#[from] ClassicalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    HttpService,
    VectorFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub provider_kind: ProviderKind,
    /// Base URL (`/embeddings` is appended) or vector file path.
    pub endpoint_or_path: String,
    pub model_id: String,
    pub dimension: usize,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_batch() -> usize {
    32
}

/// One utterance to embed, keyed for vector-file lookup.
#[derive(Debug, Clone, Copy)]
pub struct EmbedItem<'a> {
    pub doc_id: &'a str,
    pub line_id: LineId,
    pub text: &'a str,
}

impl<'a> EmbedItem<'a> {
    pub fn from_document(doc: &'a Document) -> Vec<Self> {
        doc.utterances()
            .iter()
            .map(|u| EmbedItem {
                doc_id: doc.id(),
                line_id: u.line_id,
                text: &u.text,
            })
            .collect()
    }
}

fn check_vector(v: &[f64], dimension: usize) -> Result<(), EmbeddingError> {
    if v.len() != dimension {
        return Err(EmbeddingError::DimensionMismatch {
            expected: dimension,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(EmbeddingError::NonFinite);
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    vector: Vec<f64>,
}

/// Concurrent-read, serialized-write embedding cache.
#[derive(Debug, Default)]
pub struct EmbeddingCache {
    mem: RwLock<HashMap<String, Vec<f64>>>,
    file: Option<Mutex<File>>,
}

impl EmbeddingCache {
    pub fn key(model_id: &str, text: &str) -> String {
        let mut h = Sha256::new();
        h.update(model_id.as_bytes());
        h.update([0u8]);
        h.update(text.as_bytes());
        hex::encode(h.finalize())
    }

    /// Loads existing entries from `path` and appends new ones to it.
    pub fn open(path: &Path) -> Result<Self, EmbeddingError> {
        let err = |message: String| EmbeddingError::File {
            path: path.to_path_buf(),
            message,
        };
        let mut mem = HashMap::new();
        if path.exists() {
            let f = File::open(path).map_err(|e| err(e.to_string()))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| err(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheLine = serde_json::from_str(&line).map_err(|e| err(format!("line {}: {e}", i + 1)))?;
                mem.insert(entry.key, entry.vector);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| err(e.to_string()))?;
        Ok(Self {
            mem: RwLock::new(mem),
            file: Some(Mutex::new(file)),
        })
    }

    pub fn get(&self, key: &str) -> Option<Vec<f64>> {
        self.mem.read().expect("cache lock").get(key).cloned()
    }

    pub fn insert(&self, key: String, vector: Vec<f64>) {
        if let Some(f) = &self.file {
            let line = serde_json::to_string(&CacheLine {
                key: key.clone(),
                vector: vector.clone(),
            })
            .expect("cache entry serializes");
            let mut f = f.lock().expect("cache file lock");
            if let Err(e) = writeln!(f, "{line}") {
                tracing::warn!("embedding cache write failed: {e}");
            }
        }
        self.mem.write().expect("cache lock").insert(key, vector);
    }

    pub fn len(&self) -> usize {
        self.mem.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug)]
pub struct HttpEmbedder {
    config: EmbeddingConfig,
    client: reqwest::Client,
    key: Option<String>,
    cache: EmbeddingCache,
}

impl HttpEmbedder {
    pub fn new(config: EmbeddingConfig) -> Result<Self, EmbeddingError> {
        let key = http::api_key(config.api_key_env.as_deref())?;
        let cache = match &config.cache_path {
            Some(p) => EmbeddingCache::open(p)?,
            None => EmbeddingCache::default(),
        };
        Ok(Self {
            client: http::client(&config.retry),
            key,
            cache,
            config,
        })
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }

    async fn fetch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        let url = http::join_url(&self.config.endpoint_or_path, "embeddings");
        let body = json!({ "model": self.config.model_id, "input": texts });
        let (resp, _) = http::post_json(&self.client, &url, self.key.as_deref(), &body, &self.config.retry).await?;
        let data = resp
            .get("data")
            .and_then(|d| d.as_array())
            .ok_or_else(|| EmbeddingError::Response("missing data array".into()))?;
        if data.len() != texts.len() {
            return Err(EmbeddingError::Response(format!(
                "{} inputs but {} embeddings",
                texts.len(),
                data.len()
            )));
        }
        let mut out: Vec<(usize, Vec<f64>)> = Vec::with_capacity(data.len());
        for (i, item) in data.iter().enumerate() {
            let index = item.get("index").and_then(|x| x.as_u64()).map_or(i, |x| x as usize);
            let vector: Vec<f64> = serde_json::from_value(item.get("embedding").cloned().unwrap_or_default())
                .map_err(|e| EmbeddingError::Response(format!("embedding {i}: {e}")))?;
            check_vector(&vector, self.config.dimension)?;
            out.push((index, vector));
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out.into_iter().map(|(_, v)| v).collect())
    }

    pub async fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        let keys: Vec<String> = items
            .iter()
            .map(|it| EmbeddingCache::key(&self.config.model_id, it.text))
            .collect();
        let mut missing: Vec<(&str, &str)> = Vec::new();
        for (k, it) in keys.iter().zip(items) {
            if self.cache.get(k).is_none() && !missing.iter().any(|(mk, _)| mk == k) {
                missing.push((k, it.text));
            }
        }
        for chunk in missing.chunks(self.config.batch_size.max(1)) {
            let texts: Vec<&str> = chunk.iter().map(|(_, t)| *t).collect();
            for ((k, _), v) in chunk.iter().zip(self.fetch(&texts).await?) {
                self.cache.insert(k.to_string(), v);
            }
        }
        Ok(keys
            .iter()
            .map(|k| self.cache.get(k).expect("fetched or cached"))
            .collect())
    }
}

#[derive(Deserialize)]
struct VectorLine {
    doc_id: String,
    line_id: LineId,
    vector: Vec<f64>,
}

/// Precomputed vectors keyed by `(doc_id, line_id)`.
#[derive(Debug, Clone)]
pub struct VectorFile {
    dimension: usize,
    vectors: HashMap<(String, LineId), Vec<f64>>,
}

impl VectorFile {
    pub fn open(path: &Path, dimension: usize) -> Result<Self, EmbeddingError> {
        let err = |message: String| EmbeddingError::File {
            path: path.to_path_buf(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut vectors = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let v: VectorLine = serde_json::from_str(line).map_err(|e| err(format!("line {}: {e}", i + 1)))?;
            check_vector(&v.vector, dimension).map_err(|e| err(format!("line {}: {e}", i + 1)))?;
            vectors.insert((v.doc_id, v.line_id), v.vector);
        }
        Ok(Self { dimension, vectors })
    }

    pub fn from_map(dimension: usize, vectors: HashMap<(String, LineId), Vec<f64>>) -> Self {
        Self { dimension, vectors }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lookup(&self, items: &[EmbedItem<'_>]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        items
            .iter()
            .map(|it| {
                self.vectors
                    .get(&(it.doc_id.to_string(), it.line_id))
                    .cloned()
                    .ok_or_else(|| EmbeddingError::MissingVector {
                        doc_id: it.doc_id.to_string(),
                        line_id: it.line_id,
                    })
            })
            .collect()
    }
}

#[derive(Debug)]
pub enum EmbeddingProvider {
    Http(HttpEmbedder),
    File(VectorFile),
}

impl EmbeddingProvider {
    pub fn from_config(config: &EmbeddingConfig) -> Result<Self, EmbeddingError> {
        match config.provider_kind {
            ProviderKind::HttpService => Ok(Self::Http(HttpEmbedder::new(config.clone())?)),
            ProviderKind::VectorFile => Ok(Self::File(VectorFile::open(
                Path::new(&config.endpoint_or_path),
                config.dimension,
            )?)),
        }
    }

    /// One vector per item, in input order.
    pub async fn embed_block(&self, items: &[EmbedItem<'_>]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
        match self {
            Self::Http(h) => h.embed(items).await,
            Self::File(f) => f.lookup(items),
        }
    }
}

fn cosine_dense(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn block_sum(vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vectors.first().map_or(0, Vec::len)];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    out
}

/// TextTiling over precomputed utterance vectors. Blocks are mean-pooled;
/// the `1/w` factor cancels in the cosine, so sums are compared directly.
pub fn tet_cls_from_vectors(doc: &Document, vectors: &[Vec<f64>], params: &TilingParams) -> Result<Segmented, EmbeddingError> {
    params.check()?;
    let n = doc.len();
    if n < 2 * params.block_size {
        return Ok(Segmented::single(
            doc,
            format!("{n} utterances is shorter than two blocks of {}", params.block_size),
        ));
    }
    let scores = gap_scores(n, params.block_size, |l, r| {
        cosine_dense(&block_sum(&vectors[l]), &block_sum(&vectors[r]))
    });
    Ok(Segmented::from_gaps(doc, boundaries_from_scores(&scores, params)))
}

pub async fn tet_cls_segment(
    doc: &Document,
    provider: &EmbeddingProvider,
    params: &TilingParams,
) -> Result<Segmented, EmbeddingError> {
    let vectors = provider.embed_block(&EmbedItem::from_document(doc)).await?;
    tet_cls_from_vectors(doc, &vectors, params)
}
