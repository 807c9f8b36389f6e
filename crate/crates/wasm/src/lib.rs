//! Browser demo: builds a small corpus and model in-page, then serves the
//! layout and retrieval highlights to the canvas as JSON strings.

use std::collections::HashMap;

use ctxscope_core::bundle::{build_bundle, BuildConfig};
use ctxscope_core::corpus::{generate_corpus, GenConfig, ItemId};
use ctxscope_core::embedding::HashEmbedder;
use ctxscope_core::engine::Engine;
use ctxscope_core::retrieval::{hybrid_retrieve, RetrievalParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct TopicSummary<'a> {
    id: usize,
    label: &'a str,
    size: usize,
}

#[derive(Serialize)]
struct Hit<'a> {
    item_id: &'a ItemId,
    score: f64,
    topic_id: Option<usize>,
    title: &'a str,
}

#[derive(Serialize)]
struct Retrieval<'a> {
    hits: Vec<Hit<'a>>,
    topic_counts: Vec<usize>,
}

/// The demo's state, usable from native code and tests.
pub struct DemoCore {
    engine: Engine,
    topic_of: HashMap<ItemId, usize>,
}

impl DemoCore {
    pub fn build(seed: u32, employees: usize, items: usize) -> Result<DemoCore, String> {
        let corpus = generate_corpus(&GenConfig {
            n_employees: employees,
            n_items: items,
            ..GenConfig::with_seed(u64::from(seed))
        })
        .map_err(|e| e.to_string())?;
        let config = BuildConfig {
            seed: u64::from(seed),
            ..BuildConfig::default()
        };
        let bundle = build_bundle(&corpus, &config, &HashEmbedder::default(), None).map_err(|e| e.to_string())?;
        let topic_of = bundle
            .topics
            .iter()
            .flat_map(|t| t.member_ids.iter().map(move |m| (m.clone(), t.id)))
            .collect();
        let engine = Engine::new(corpus, bundle, Box::new(HashEmbedder::default())).map_err(|e| e.to_string())?;
        Ok(DemoCore { engine, topic_of })
    }

    pub fn topics(&self) -> String {
        let topics: Vec<TopicSummary> = self
            .engine
            .bundle
            .topics
            .iter()
            .map(|t| TopicSummary {
                id: t.id,
                label: &t.label,
                size: t.member_ids.len(),
            })
            .collect();
        serde_json::to_string(&topics).expect("topics serialize")
    }

    /// Layout JSON; a negative `expanded` means the collapsed treemap.
    pub fn layout(&self, expanded: i32) -> Result<String, String> {
        let expanded = usize::try_from(expanded).ok();
        let layout = self.engine.bundle.layout_for(expanded).map_err(|e| e.to_string())?;
        Ok(serde_json::to_string(&layout).expect("layout serializes"))
    }

    pub fn retrieve(&self, prompt: &str, alpha: f64) -> Result<String, String> {
        let params = RetrievalParams {
            alpha,
            ..self.engine.bundle.build_config.retrieval
        };
        let ranked = hybrid_retrieve(prompt, &self.engine.index, self.engine.embedder.as_ref(), &params).map_err(|e| e.to_string())?;
        let mut topic_counts = vec![0; self.engine.bundle.topics.len()];
        let hits: Vec<Hit> = ranked
            .iter()
            .map(|s| {
                let topic_id = self.topic_of.get(&s.item_id).copied();
                if let Some(t) = topic_id {
                    topic_counts[t] += 1;
                }
                Hit {
                    item_id: &s.item_id,
                    score: s.score,
                    topic_id,
                    title: self.engine.corpus.item(&s.item_id).map_or("", |i| i.title.as_str()),
                }
            })
            .collect();
        Ok(serde_json::to_string(&Retrieval { hits, topic_counts }).expect("retrieval serializes"))
    }
}

#[wasm_bindgen]
pub struct Demo {
    inner: DemoCore,
}

#[wasm_bindgen]
impl Demo {
    /// Generates a corpus and builds the model; takes a moment for a few
    /// thousand items.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, employees: usize, items: usize) -> Result<Demo, JsError> {
        Ok(Demo {
            inner: DemoCore::build(seed, employees, items).map_err(|e| JsError::new(&e))?,
        })
    }

    pub fn topics(&self) -> String {
        self.inner.topics()
    }

    pub fn layout(&self, expanded: i32) -> Result<String, JsError> {
        self.inner.layout(expanded).map_err(|e| JsError::new(&e))
    }

    pub fn retrieve(&self, prompt: &str, alpha: f64) -> Result<String, JsError> {
        self.inner.retrieve(prompt, alpha).map_err(|e| JsError::new(&e))
    }
}
