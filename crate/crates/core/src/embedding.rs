//! Embedding vectors, the provider interface and the offline hashing embedder.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::text;

pub const DEFAULT_DIMENSION: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Scales to unit length; fails on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(CoreError::input("cannot normalize a zero or non-finite vector"));
        }
        self.0.iter_mut().for_each(|x| *x /= norm);
        Ok(self)
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    /// Raw provider call; `embed_text` validates and normalizes the result.
    fn embed_raw(&self, text: &str) -> Result<Vec<f64>>;
    /// Non-deterministic providers are excluded from reproducible builds.
    fn is_deterministic(&self) -> bool {
        true
    }
}

pub fn embed_text(provider: &dyn EmbeddingProvider, text: &str) -> Result<EmbeddingVector> {
    if text.trim().is_empty() {
        return Err(CoreError::input("cannot embed empty text"));
    }
    let raw = provider.embed_raw(text)?;
    if raw.len() != provider.dimension() {
        return Err(CoreError::Provider {
            provider: provider.name().to_owned(),
            message: format!("returned dimension {}, expected {}", raw.len(), provider.dimension()),
            retryable: false,
        });
    }
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(CoreError::Provider {
            provider: provider.name().to_owned(),
            message: "returned non-finite values".into(),
            retryable: false,
        });
    }
    EmbeddingVector(raw).normalized()
}

/// Embeds many texts, preserving input order.
pub fn embed_batch(provider: &dyn EmbeddingProvider, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
    texts.iter().map(|t| embed_text(provider, t)).collect()
}

/// Cosine similarity in `[-1, 1]`.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(CoreError::input(format!(
            "dimension mismatch: {} vs {}",
            u.dim(),
            v.dim()
        )));
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(CoreError::input("cosine similarity undefined for a zero vector"));
    }
    if u == v {
        return Ok(1.0);
    }
    Ok((u.dot(v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// FNV-1a 64-bit offset basis; the hash seed of the offline embedder.
pub const HASH_SEED: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the UTF-8 bytes followed by the SplitMix64 finalizer, so that
/// both the low bits (bucket) and the top bit (sign) are well mixed.
pub fn stable_hash(token: &str) -> u64 {
    let mut h = HASH_SEED;
    for &b in token.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Signed feature hashing of the bag of lowercase word tokens.
pub fn hash_embed(text: &str, dim: usize) -> Result<EmbeddingVector> {
    if dim < 8 {
        return Err(CoreError::input(format!("embedding dimension {dim} below 8")));
    }
    let mut tokens = text::tokenize(text);
    if tokens.is_empty() {
        // texts made only of stopwords still deserve a vector
        tokens = text::raw_tokens(text).collect();
    }
    if tokens.is_empty() {
        return Err(CoreError::input("cannot embed text without word tokens"));
    }
    let mut values = vec![0.0; dim];
    for tok in &tokens {
        let h = stable_hash(tok);
        let bucket = (h % dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        values[bucket] += sign;
    }
    EmbeddingVector(values)
        .normalized()
        .map_err(|_| CoreError::input("token hashes cancelled to a zero vector"))
}

#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 8 {
            return Err(CoreError::Config(format!("embedding dimension {dim} below 8")));
        }
        Ok(HashEmbedder { dim })
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder {
            dim: DEFAULT_DIMENSION,
        }
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn name(&self) -> &str {
        "hash"
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>> {
        hash_embed(text, self.dim).map(|v| v.0)
    }
}
