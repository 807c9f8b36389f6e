//! Keyword index, BM25 scoring and hybrid (embedding + keyword) ranking.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, ItemId};
use crate::embedding::{embed_text, EmbeddingProvider, EmbeddingVector};
use crate::error::{CoreError, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalParams {
    /// Weight of the embedding component; `1 − alpha` goes to BM25.
    pub alpha: f64,
    pub top_n: usize,
    pub bm25_k1: f64,
    pub bm25_b: f64,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        RetrievalParams {
            alpha: 0.5,
            top_n: 50,
            bm25_k1: 1.2,
            bm25_b: 0.75,
        }
    }
}

impl RetrievalParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(CoreError::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.top_n == 0 {
            return Err(CoreError::Config("top_n must be at least 1".into()));
        }
        if !(self.bm25_k1 >= 0.0) || !(0.0..=1.0).contains(&self.bm25_b) {
            return Err(CoreError::Config("bm25 k1 must be >= 0 and b in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub n_docs: usize,
    pub vocabulary: usize,
    pub avg_doc_len: f64,
}

#[derive(Debug, Clone)]
pub struct CorpusIndex {
    item_ids: Vec<ItemId>,
    /// term -> (doc, term frequency), docs ascending
    postings: HashMap<String, Vec<(u32, u32)>>,
    doc_len: Vec<u32>,
    avg_len: f64,
    embeddings: Vec<EmbeddingVector>,
}

impl CorpusIndex {
    /// Indexes every corpus item; `embeddings` align with `corpus.items`.
    pub fn build(corpus: &Corpus, embeddings: Vec<EmbeddingVector>) -> Result<Self> {
        if corpus.items.is_empty() {
            return Err(CoreError::input("cannot index an empty corpus"));
        }
        if embeddings.len() != corpus.items.len() {
            return Err(CoreError::Integrity(format!(
                "{} embeddings for {} items",
                embeddings.len(),
                corpus.items.len()
            )));
        }
        let mut postings: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
        let mut doc_len = Vec::with_capacity(corpus.items.len());
        for (doc, item) in corpus.items.iter().enumerate() {
            let tokens = text::tokenize(&corpus.searchable_text(item));
            doc_len.push(tokens.len() as u32);
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in tokens {
                *tf.entry(t).or_insert(0) += 1;
            }
            for (t, c) in tf {
                postings.entry(t).or_default().push((doc as u32, c));
            }
        }
        let total: u64 = doc_len.iter().map(|&l| u64::from(l)).sum();
        let avg_len = (total as f64 / doc_len.len() as f64).max(f64::MIN_POSITIVE);
        Ok(CorpusIndex {
            item_ids: corpus.items.iter().map(|i| i.id.clone()).collect(),
            postings,
            doc_len,
            avg_len,
            embeddings,
        })
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    pub fn item_ids(&self) -> &[ItemId] {
        &self.item_ids
    }

    pub fn embeddings(&self) -> &[EmbeddingVector] {
        &self.embeddings
    }

    pub fn doc_len(&self, doc: usize) -> usize {
        self.doc_len[doc] as usize
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_len
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn term_freq(&self, term: &str, doc: usize) -> usize {
        self.postings
            .get(term)
            .and_then(|p| p.binary_search_by_key(&(doc as u32), |&(d, _)| d).ok().map(|i| p[i].1 as usize))
            .unwrap_or(0)
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            n_docs: self.len(),
            vocabulary: self.postings.len(),
            avg_doc_len: self.avg_len,
        }
    }

    /// `ln(1 + (N − df + 0.5)/(df + 0.5))`, never negative.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.len() as f64;
        let df = self.doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0)
    }

    /// BM25 scores of every document, accumulated through the postings.
    pub fn bm25_all(&self, query: &[String], params: &RetrievalParams) -> Vec<f64> {
        let mut scores = vec![0.0; self.len()];
        for term in distinct(query) {
            let Some(post) = self.postings.get(term) else {
                continue;
            };
            let idf = self.idf(term);
            for &(doc, tf) in post {
                scores[doc as usize] += self.term_weight(idf, tf as f64, doc as usize, params);
            }
        }
        scores
    }

    fn term_weight(&self, idf: f64, tf: f64, doc: usize, params: &RetrievalParams) -> f64 {
        let norm = 1.0 - params.bm25_b + params.bm25_b * self.doc_len[doc] as f64 / self.avg_len;
        idf * tf * (params.bm25_k1 + 1.0) / (tf + params.bm25_k1 * norm)
    }
}

fn distinct(query: &[String]) -> BTreeSet<&str> {
    query.iter().map(String::as_str).collect()
}

/// BM25 of one document; repeated query tokens count once.
pub fn bm25_score(query: &[String], doc: usize, index: &CorpusIndex, params: &RetrievalParams) -> f64 {
    distinct(query)
        .into_iter()
        .map(|term| {
            let tf = index.term_freq(term, doc);
            if tf == 0 {
                0.0
            } else {
                index.term_weight(index.idf(term), tf as f64, doc, params)
            }
        })
        .sum()
}

/// Min-max normalization; a constant component maps to all zeros.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub item_id: ItemId,
    pub score: f64,
}

/// Ranks the whole corpus by `alpha·cos' + (1−alpha)·bm25'`, each component
/// min-max normalized for this query; ties by item id, truncated to `top_n`.
pub fn hybrid_retrieve(
    prompt: &str,
    index: &CorpusIndex,
    embedder: &dyn EmbeddingProvider,
    params: &RetrievalParams,
) -> Result<Vec<ScoredItem>> {
    params.validate()?;
    if prompt.trim().is_empty() {
        return Err(CoreError::input("prompt is empty"));
    }
    let query_vec = embed_text(embedder, prompt)?;
    if query_vec.dim() != index.embeddings[0].dim() {
        return Err(CoreError::Integrity(format!(
            "query embedding has dimension {}, index has {}",
            query_vec.dim(),
            index.embeddings[0].dim()
        )));
    }
    let cos: Vec<f64> = index.embeddings.iter().map(|e| e.dot(&query_vec)).collect();
    let bm25 = index.bm25_all(&text::tokenize(prompt), params);
    let (cos, bm25) = (min_max(&cos), min_max(&bm25));

    let mut ranked: Vec<ScoredItem> = index
        .item_ids
        .iter()
        .enumerate()
        .map(|(i, id)| ScoredItem {
            item_id: id.clone(),
            score: params.alpha * cos[i] + (1.0 - params.alpha) * bm25[i],
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.item_id.cmp(&b.item_id)));
    ranked.truncate(params.top_n);
    Ok(ranked)
}
