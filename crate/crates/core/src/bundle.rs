//! The persisted pipeline output and the build that produces it:
//! embed, partition into topics, project, find subtopics, lay out.

use serde::{Deserialize, Serialize};

use crate::corpus::{fingerprint, Corpus, ItemId};
use crate::embedding::{embed_batch, EmbeddingProvider, EmbeddingVector, DEFAULT_DIMENSION};
use crate::error::{CoreError, Result};
use crate::hdbscan::{hdbscan, HdbscanParams};
use crate::layout::{compute_layout, LayoutItem, LayoutModel, TopicLayoutInput};
use crate::projection::{fit_kernel_pca, ProjectionModel};
use crate::retrieval::{CorpusIndex, IndexStats, RetrievalParams};
use crate::subtopics::{collect_subtopics, Subtopic};
use crate::topics::{
    cluster_topics, label_topic, sample_items, SamplingPolicy, TermStats, TfIdfLabeler, Topic, TopicLabeler,
    DEFAULT_K, DEFAULT_LABEL_BUDGET, DEFAULT_MAX_ITERS,
};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedderInfo {
    pub provider: String,
    pub dimension: usize,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub seed: u64,
    pub k: usize,
    pub max_iters: usize,
    pub label_budget: usize,
    pub embedding_dimension: usize,
    pub hdbscan: HdbscanParams,
    pub retrieval: RetrievalParams,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            seed: 0,
            k: DEFAULT_K,
            max_iters: DEFAULT_MAX_ITERS,
            label_budget: DEFAULT_LABEL_BUDGET,
            embedding_dimension: DEFAULT_DIMENSION,
            hdbscan: HdbscanParams::default(),
            retrieval: RetrievalParams::default(),
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(CoreError::Config("k must be at least 1".into()));
        }
        if self.label_budget == 0 {
            return Err(CoreError::Config("label_budget must be positive".into()));
        }
        self.hdbscan.validate()?;
        self.retrieval.validate()
    }

    fn sampling(&self, salt: u64) -> SamplingPolicy {
        SamplingPolicy {
            budget: self.label_budget,
            seed: self.seed.wrapping_add(salt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub schema_version: u32,
    pub corpus_fingerprint: String,
    pub build_config: BuildConfig,
    pub embedder: EmbedderInfo,
    /// Item embeddings aligned with the corpus item order.
    pub embeddings: Vec<EmbeddingVector>,
    pub topics: Vec<Topic>,
    pub subtopics: Vec<Subtopic>,
    pub projections: Vec<ProjectionModel>,
    pub layout: LayoutModel,
    pub index_stats: IndexStats,
}

/// Text embedded for each item.
pub fn embedding_text(item: &crate::corpus::DataItem) -> String {
    format!("{} {}", item.title, item.content)
}

pub fn build_bundle(
    corpus: &Corpus,
    config: &BuildConfig,
    embedder: &dyn EmbeddingProvider,
    labeler: Option<&dyn TopicLabeler>,
) -> Result<ModelBundle> {
    config.validate()?;
    corpus.validate().map_err(|e| e.in_stage("corpus"))?;
    if embedder.dimension() != config.embedding_dimension {
        return Err(CoreError::Config(format!(
            "embedder `{}` has dimension {}, config asks for {}",
            embedder.name(),
            embedder.dimension(),
            config.embedding_dimension
        )));
    }

    let texts: Vec<String> = corpus.items.iter().map(embedding_text).collect();
    let embeddings = embed_batch(embedder, &texts).map_err(|e| e.in_stage("embed"))?;

    let clustering =
        cluster_topics(&embeddings, config.k, config.seed, config.max_iters).map_err(|e| e.in_stage("topics"))?;
    let offline = TfIdfLabeler {
        stats: TermStats::from_documents(texts.iter().map(String::as_str)),
    };
    let labeler = labeler.unwrap_or(&offline);

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); config.k];
    for (i, &t) in clustering.assignment.iter().enumerate() {
        members[t].push(i);
    }
    let label_of = |idx: &[usize], salt: u64| -> Result<String> {
        let sample_src: Vec<&str> = idx.iter().map(|&i| texts[i].as_str()).collect();
        let sample = sample_items(&sample_src, config.sampling(salt))?;
        let sampled: Vec<&str> = sample.iter().map(|s| s.text.as_str()).collect();
        label_topic(&sampled, labeler, &offline)
    };

    let mut topics = Vec::with_capacity(config.k);
    let mut projections = Vec::with_capacity(config.k);
    let mut subtopics = Vec::new();
    let mut layout_inputs = Vec::with_capacity(config.k);
    for (topic_id, idx) in members.iter().enumerate() {
        let ids: Vec<ItemId> = idx.iter().map(|&i| corpus.items[i].id.clone()).collect();
        let label = label_of(idx, topic_id as u64).map_err(|e| e.in_stage("labels"))?;
        topics.push(Topic {
            id: topic_id,
            label,
            member_ids: ids.clone(),
            centroid: clustering.centroids[topic_id].clone(),
        });

        let topic_emb: Vec<EmbeddingVector> = idx.iter().map(|&i| embeddings[i].clone()).collect();
        let proj = fit_kernel_pca(topic_id, &ids, &topic_emb).map_err(|e| e.in_stage("projection"))?;

        let result = hdbscan(&proj.coords, config.hdbscan).map_err(|e| e.in_stage("subtopics"))?;
        let position: std::collections::HashMap<&ItemId, usize> =
            ids.iter().enumerate().map(|(p, id)| (id, idx[p])).collect();
        let subs = collect_subtopics(topic_id, &ids, &result.labels, |m| {
            let corpus_idx: Vec<usize> = m.iter().map(|id| position[id]).collect();
            label_of(&corpus_idx, (topic_id as u64 + 1) << 16 | m.len() as u64)
        })
        .map_err(|e| e.in_stage("subtopics"))?;

        layout_inputs.push(layout_input(topic_id, &proj, &subs));
        subtopics.extend(subs);
        projections.push(proj);
    }

    let layout = compute_layout(&layout_inputs, None).map_err(|e| e.in_stage("layout"))?;
    let index = CorpusIndex::build(corpus, embeddings.clone()).map_err(|e| e.in_stage("index"))?;

    Ok(ModelBundle {
        schema_version: BUNDLE_SCHEMA_VERSION,
        corpus_fingerprint: fingerprint(corpus),
        build_config: config.clone(),
        embedder: EmbedderInfo {
            provider: embedder.name().to_owned(),
            dimension: embedder.dimension(),
            deterministic: embedder.is_deterministic(),
        },
        embeddings,
        topics,
        subtopics,
        projections,
        layout,
        index_stats: index.stats(),
    })
}

fn layout_input(topic_id: usize, proj: &ProjectionModel, subs: &[Subtopic]) -> TopicLayoutInput {
    let mut items = Vec::with_capacity(proj.training_ids.len());
    for s in subs {
        for m in &s.member_ids {
            items.push(LayoutItem {
                item_id: m.clone(),
                subtopic_id: s.id.clone(),
                coord: proj.coord_of(m).unwrap_or([0.0, 0.0]),
            });
        }
    }
    TopicLayoutInput { topic_id, items }
}

impl ModelBundle {
    pub fn layout_inputs(&self) -> Vec<TopicLayoutInput> {
        self.projections
            .iter()
            .map(|p| {
                let subs: Vec<Subtopic> = self.subtopics.iter().filter(|s| s.topic_id == p.topic_id).cloned().collect();
                layout_input(p.topic_id, p, &subs)
            })
            .collect()
    }

    /// The stored layout, or a recomputed one with `expanded` enlarged.
    pub fn layout_for(&self, expanded: Option<usize>) -> Result<LayoutModel> {
        match expanded {
            None => Ok(self.layout.clone()),
            Some(t) => compute_layout(&self.layout_inputs(), Some(t)),
        }
    }

    pub fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        let fp = fingerprint(corpus);
        if fp != self.corpus_fingerprint {
            return Err(CoreError::Integrity(format!(
                "bundle was built from corpus {}, got {}",
                self.corpus_fingerprint, fp
            )));
        }
        if self.embeddings.len() != corpus.items.len() {
            return Err(CoreError::Integrity("embedding count does not match corpus".into()));
        }
        Ok(())
    }

    /// Every id referenced by topics, subtopics and the layout resolves.
    pub fn check_self_consistent(&self) -> Result<()> {
        let topic_items: std::collections::HashSet<&ItemId> = self.topics.iter().flat_map(|t| &t.member_ids).collect();
        let sub_items: std::collections::HashSet<&ItemId> = self.subtopics.iter().flat_map(|s| &s.member_ids).collect();
        let placed: std::collections::HashSet<&ItemId> = self.layout.placements.iter().map(|p| &p.item_id).collect();
        if topic_items != sub_items || topic_items != placed {
            return Err(CoreError::Integrity("topics, subtopics and layout cover different items".into()));
        }
        Ok(())
    }
}

pub fn serialize_bundle(bundle: &ModelBundle) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(bundle).expect("bundle serialization is infallible");
    bytes.push(b'\n');
    bytes
}

pub fn load_bundle(bytes: &[u8]) -> Result<ModelBundle> {
    let bundle: ModelBundle = serde_json::from_slice(bytes)?;
    if bundle.schema_version != BUNDLE_SCHEMA_VERSION {
        return Err(CoreError::Integrity(format!(
            "unsupported bundle schema_version {}",
            bundle.schema_version
        )));
    }
    bundle.check_self_consistent()?;
    Ok(bundle)
}

/// Retrieval index over a corpus using the bundle's stored embeddings.
pub fn index_for(bundle: &ModelBundle, corpus: &Corpus) -> Result<CorpusIndex> {
    bundle.check_corpus(corpus)?;
    CorpusIndex::build(corpus, bundle.embeddings.clone())
}
