//! Topic partitioning (spherical k-means), budgeted sampling and labeling.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::ItemId;
use crate::embedding::EmbeddingVector;
use crate::error::{CoreError, Result};
use crate::text;

pub const DEFAULT_K: usize = 7;
pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_LABEL_BUDGET: usize = 8000;
pub const MAX_LABEL_WORDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: usize,
    pub label: String,
    pub member_ids: Vec<ItemId>,
    pub centroid: EmbeddingVector,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub assignment: Vec<usize>,
    pub centroids: Vec<EmbeddingVector>,
    pub iterations: usize,
    /// Sum of member-to-centroid cosines after every recentering step.
    pub objective_trace: Vec<f64>,
}

/// Spherical k-means over unit vectors with farthest-point initialization.
pub fn cluster_topics(
    embeddings: &[EmbeddingVector],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Clustering> {
    let n = embeddings.len();
    if k == 0 {
        return Err(CoreError::input("k must be at least 1"));
    }
    if n < k {
        return Err(CoreError::input(format!("{n} items cannot form {k} topics")));
    }
    let dim = embeddings[0].dim();
    if embeddings.iter().any(|e| e.dim() != dim) {
        return Err(CoreError::input("embeddings have mixed dimensions"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = farthest_point_init(embeddings, k, rng.random_range(0..n));
    let mut assignment = vec![usize::MAX; n];
    let mut objective_trace = Vec::new();
    let mut iterations = 0;

    while iterations < max_iters.max(1) {
        iterations += 1;
        let next: Vec<usize> = embeddings.iter().map(|e| nearest(e, &centroids)).collect();
        let changed = next != assignment;
        assignment = next;
        repair_empty(embeddings, &mut assignment, &mut centroids, k);
        centroids = recenter(embeddings, &assignment, &centroids);
        objective_trace.push(objective(embeddings, &assignment, &centroids));
        if !changed {
            break;
        }
    }

    Ok(Clustering {
        assignment,
        centroids,
        iterations,
        objective_trace,
    })
}

fn farthest_point_init(embeddings: &[EmbeddingVector], k: usize, start: usize) -> Vec<EmbeddingVector> {
    let mut centers = vec![embeddings[start].clone()];
    let mut best_sim: Vec<f64> = embeddings.iter().map(|e| e.dot(&centers[0])).collect();
    while centers.len() < k {
        let (far, _) = best_sim
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bs), (i, &s)| if s < bs { (i, s) } else { (bi, bs) });
        let c = embeddings[far].clone();
        for (s, e) in best_sim.iter_mut().zip(embeddings) {
            *s = s.max(e.dot(&c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(e: &EmbeddingVector, centroids: &[EmbeddingVector]) -> usize {
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let s = e.dot(c);
        if s > best_sim {
            best = j;
            best_sim = s;
        }
    }
    best
}

/// Gives every empty cluster the member of the largest cluster that is
/// farthest from that cluster's centroid.
fn repair_empty(
    embeddings: &[EmbeddingVector],
    assignment: &mut [usize],
    centroids: &mut [EmbeddingVector],
    k: usize,
) {
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let largest = (0..k).max_by_key(|&j| (sizes[j], std::cmp::Reverse(j))).expect("k >= 1");
        let far = (0..assignment.len())
            .filter(|&i| assignment[i] == largest)
            .min_by(|&a, &b| {
                embeddings[a]
                    .dot(&centroids[largest])
                    .total_cmp(&embeddings[b].dot(&centroids[largest]))
                    .then(a.cmp(&b))
            })
            .expect("largest cluster is non-empty");
        assignment[far] = empty;
        centroids[empty] = embeddings[far].clone();
    }
}

fn recenter(
    embeddings: &[EmbeddingVector],
    assignment: &[usize],
    previous: &[EmbeddingVector],
) -> Vec<EmbeddingVector> {
    let dim = embeddings[0].dim();
    let mut sums = vec![vec![0.0; dim]; previous.len()];
    for (e, &a) in embeddings.iter().zip(assignment) {
        for (s, x) in sums[a].iter_mut().zip(&e.0) {
            *s += x;
        }
    }
    sums.into_iter()
        .enumerate()
        .map(|(j, s)| {
            EmbeddingVector(s).normalized().unwrap_or_else(|_| {
                // members cancel out exactly; keep any member as the direction
                let first = assignment.iter().position(|&a| a == j);
                first.map_or_else(|| previous[j].clone(), |i| embeddings[i].clone())
            })
        })
        .collect()
}

fn objective(embeddings: &[EmbeddingVector], assignment: &[usize], centroids: &[EmbeddingVector]) -> f64 {
    embeddings
        .iter()
        .zip(assignment)
        .map(|(e, &a)| e.dot(&centroids[a]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    pub budget: usize,
    pub seed: u64,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        SamplingPolicy {
            budget: DEFAULT_LABEL_BUDGET,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sampled {
    /// Position in the member list handed to `sample_items`.
    pub index: usize,
    pub text: String,
}

/// Seeded sample without replacement that stops before the character budget
/// would overflow. The result is in member order.
pub fn sample_items(texts: &[&str], policy: SamplingPolicy) -> Result<Vec<Sampled>> {
    if policy.budget == 0 {
        return Err(CoreError::Config("sampling budget must be positive".into()));
    }
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..texts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(policy.seed));

    let mut used = 0;
    let mut picked = Vec::new();
    for &i in &order {
        let len = texts[i].chars().count();
        if used + len > policy.budget {
            break;
        }
        used += len;
        picked.push(Sampled {
            index: i,
            text: texts[i].to_owned(),
        });
    }
    if picked.is_empty() {
        let i = order[0];
        picked.push(Sampled {
            index: i,
            text: texts[i].chars().take(policy.budget).collect(),
        });
    }
    picked.sort_by_key(|s| s.index);
    Ok(picked)
}

pub trait TopicLabeler: Send + Sync {
    fn name(&self) -> &str;
    fn label(&self, sample: &[&str]) -> Result<String>;
}

/// Corpus document frequencies for TF-IDF term ranking.
#[derive(Debug, Clone, Default)]
pub struct TermStats {
    n_docs: usize,
    df: HashMap<String, usize>,
}

impl TermStats {
    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut stats = TermStats::default();
        for doc in docs {
            stats.n_docs += 1;
            let uniq: HashSet<String> = text::tokenize(doc).into_iter().collect();
            for t in uniq {
                *stats.df.entry(t).or_insert(0) += 1;
            }
        }
        stats
    }

    /// Smoothed inverse document frequency `ln((1+N)/(1+df)) + 1`.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        ((1.0 + self.n_docs as f64) / (1.0 + df)).ln() + 1.0
    }

    /// Terms of `texts` by descending aggregate TF-IDF, ties alphabetical.
    pub fn top_terms(&self, texts: &[&str], limit: usize) -> Vec<(String, f64)> {
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for t in texts.iter().flat_map(|s| text::tokenize(s)) {
            *tf.entry(t).or_insert(0) += 1;
        }
        let mut scored: Vec<(String, f64)> = tf
            .into_iter()
            .map(|(t, c)| {
                let w = c as f64 * self.idf(&t);
                (t, w)
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(limit);
        scored
    }
}

/// Offline labeler: the top three TF-IDF terms, title-cased.
#[derive(Debug, Clone)]
pub struct TfIdfLabeler {
    pub stats: TermStats,
}

impl TopicLabeler for TfIdfLabeler {
    fn name(&self) -> &str {
        "tfidf"
    }

    fn label(&self, sample: &[&str]) -> Result<String> {
        let terms = self.stats.top_terms(sample, 3);
        if terms.is_empty() {
            return Ok("Miscellaneous".to_owned());
        }
        Ok(terms
            .iter()
            .map(|(t, _)| text::title_case(t))
            .collect::<Vec<_>>()
            .join(" "))
    }
}

/// Labels a sample with `labeler`, falling back to the offline labeler on
/// failure. Labels are capped at eight words.
pub fn label_topic(sample: &[&str], labeler: &dyn TopicLabeler, fallback: &TfIdfLabeler) -> Result<String> {
    if sample.is_empty() {
        return Err(CoreError::input("cannot label an empty sample"));
    }
    let label = match labeler.label(sample) {
        Ok(l) if !l.trim().is_empty() => l,
        _ => fallback.label(sample)?,
    };
    Ok(label.split_whitespace().take(MAX_LABEL_WORDS).collect::<Vec<_>>().join(" "))
}
