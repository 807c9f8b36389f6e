//! Runtime view over a loaded corpus and bundle: what the service and the demo
//! query against.

use crate::bundle::{embedding_text, index_for, ModelBundle};
use crate::chat::{respond, ChatEnv, ChatSession, ChatTurn, ExtractiveSummarizer, ResponseProvider, StubResponder, SummaryProvider};
use crate::context::SubtopicIndex;
use crate::corpus::Corpus;
use crate::embedding::EmbeddingProvider;
use crate::error::Result;
use crate::retrieval::CorpusIndex;
use crate::topics::{SamplingPolicy, TermStats};

pub struct Engine {
    pub corpus: Corpus,
    pub bundle: ModelBundle,
    pub index: CorpusIndex,
    pub subtopic_index: SubtopicIndex,
    pub embedder: Box<dyn EmbeddingProvider>,
    pub responder: Box<dyn ResponseProvider>,
    pub summarizer: Option<Box<dyn SummaryProvider>>,
    pub fallback_summarizer: ExtractiveSummarizer,
}

impl Engine {
    /// Pairs a corpus with its bundle using the offline responder.
    pub fn new(corpus: Corpus, bundle: ModelBundle, embedder: Box<dyn EmbeddingProvider>) -> Result<Self> {
        let index = index_for(&bundle, &corpus)?;
        let subtopic_index = SubtopicIndex::new(&bundle.subtopics);
        let texts: Vec<String> = corpus.items.iter().map(embedding_text).collect();
        let fallback_summarizer = ExtractiveSummarizer {
            stats: TermStats::from_documents(texts.iter().map(String::as_str)),
        };
        Ok(Engine {
            corpus,
            bundle,
            index,
            subtopic_index,
            embedder,
            responder: Box::new(StubResponder),
            summarizer: None,
            fallback_summarizer,
        })
    }

    pub fn with_responder(mut self, responder: Box<dyn ResponseProvider>) -> Self {
        self.responder = responder;
        self
    }

    pub fn with_summarizer(mut self, summarizer: Box<dyn SummaryProvider>) -> Self {
        self.summarizer = Some(summarizer);
        self
    }

    pub fn chat_env(&self) -> ChatEnv<'_> {
        ChatEnv {
            corpus: &self.corpus,
            index: &self.index,
            embedder: self.embedder.as_ref(),
            subtopics: &self.bundle.subtopics,
            retrieval: self.bundle.build_config.retrieval,
            sampling: SamplingPolicy {
                budget: self.bundle.build_config.label_budget,
                seed: self.bundle.build_config.seed,
            },
            responder: self.responder.as_ref(),
            summarizer: self.summarizer.as_deref().unwrap_or(&self.fallback_summarizer),
            fallback_summarizer: &self.fallback_summarizer,
        }
    }

    pub fn respond(&self, session: &mut ChatSession, prompt: &str) -> Result<ChatTurn> {
        respond(session, prompt, &self.chat_env())
    }
}
