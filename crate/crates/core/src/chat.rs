//! Conversation turns over a fixed context block, the offline extractive
//! responder, per-subtopic summaries and the file view.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::context::{build_context_block, modify_context, parse_sentinel, render_context_text, ContextBlock, Origin, SubtopicIndex};
use crate::corpus::{Corpus, DataItem, Employee, ItemId};
use crate::embedding::EmbeddingProvider;
use crate::error::{CoreError, Result};
use crate::retrieval::{CorpusIndex, RetrievalParams};
use crate::subtopics::{Subtopic, SubtopicId};
use crate::text;
use crate::topics::{sample_items, SamplingPolicy, TermStats};

pub const NO_CONTEXT_RESPONSE: &str = "No relevant context was found for this prompt.";
pub const DEFAULT_SYSTEM_PROMPT: &str =
    "You are an enterprise assistant. Answer using only the context block and cite item ids.";
const ANSWER_SENTENCES: usize = 5;
const SUMMARY_SENTENCES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtopicSummary {
    pub subtopic_id: SubtopicId,
    pub summary: String,
    pub relevance_explanation: String,
    pub covered_item_ids: Vec<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub prompt: String,
    pub response: String,
    pub citations: Vec<ItemId>,
    /// Filled on the first turn only.
    pub retrieved_ids: Vec<ItemId>,
    pub summaries: Vec<SubtopicSummary>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ChatSession {
    pub id: String,
    pub system_prompt: String,
    pub context_block: Option<ContextBlock>,
    pub turns: Vec<ChatTurn>,
    #[serde(skip)]
    summary_cache: HashMap<(String, String), Vec<SubtopicSummary>>,
}

impl PartialEq for ChatSession {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.system_prompt == other.system_prompt
            && self.context_block == other.context_block
            && self.turns == other.turns
    }
}

impl ChatSession {
    pub fn new(id: impl Into<String>) -> Self {
        ChatSession {
            id: id.into(),
            system_prompt: DEFAULT_SYSTEM_PROMPT.to_owned(),
            ..ChatSession::default()
        }
    }

    /// Group-level edit of the context block. Requires a block to exist.
    pub fn modify_context(
        &mut self,
        add: &[SubtopicId],
        remove: &[SubtopicId],
        subtopics: &SubtopicIndex,
    ) -> Result<&ContextBlock> {
        let Some(block) = &self.context_block else {
            return Err(CoreError::input("session has no context block yet; send a prompt first"));
        };
        let next = modify_context(block, add, remove, subtopics)?;
        Ok(self.context_block.insert(next))
    }
}

pub trait ResponseProvider: Send + Sync {
    fn name(&self) -> &str;
    /// Returns the answer and the ids it cites.
    fn respond(&self, system_prompt: &str, prompt: &str, rendered_context: &str) -> Result<(String, Vec<ItemId>)>;
}

pub trait SummaryProvider: Send + Sync {
    fn name(&self) -> &str;
    /// Returns `(summary, relevance_explanation)`.
    fn summarize(&self, prompt: &str, subtopic_label: &str, texts: &[&str]) -> Result<(String, String)>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StubResponder;

impl ResponseProvider for StubResponder {
    fn name(&self) -> &str {
        "stub"
    }

    fn respond(&self, _system_prompt: &str, prompt: &str, rendered_context: &str) -> Result<(String, Vec<ItemId>)> {
        Ok(stub_respond(prompt, rendered_context))
    }
}

/// Extractive answer: the five context sentences with the highest query-token
/// counts, in context order, each followed by its item citation.
pub fn stub_respond(prompt: &str, rendered_context: &str) -> (String, Vec<ItemId>) {
    let query: BTreeSet<String> = text::tokenize(prompt).into_iter().collect();
    let mut candidates: Vec<(usize, usize, &str, ItemId)> = Vec::new(); // (score, order, sentence, id)
    let mut current: Option<ItemId> = None;
    for line in rendered_context.lines() {
        if let Some(id) = parse_sentinel(line) {
            current = Some(id);
            continue;
        }
        let Some(id) = &current else { continue };
        for sentence in text::sentences(line) {
            let score = text::tokenize(sentence).iter().filter(|t| query.contains(*t)).count();
            if score > 0 {
                candidates.push((score, candidates.len(), sentence, id.clone()));
            }
        }
    }
    if candidates.is_empty() {
        return (NO_CONTEXT_RESPONSE.to_owned(), Vec::new());
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    candidates.truncate(ANSWER_SENTENCES);
    candidates.sort_by_key(|c| c.1);

    let mut citations: Vec<ItemId> = Vec::new();
    let mut answer = Vec::with_capacity(candidates.len());
    for (_, _, sentence, id) in candidates {
        answer.push(format!("{sentence} [{id}]"));
        if !citations.contains(&id) {
            citations.push(id);
        }
    }
    (answer.join("\n"), citations)
}

/// Offline summarizer: top TF-IDF sentences plus the prompt terms found.
#[derive(Debug, Clone)]
pub struct ExtractiveSummarizer {
    pub stats: TermStats,
}

impl SummaryProvider for ExtractiveSummarizer {
    fn name(&self) -> &str {
        "extractive"
    }

    fn summarize(&self, prompt: &str, _subtopic_label: &str, texts: &[&str]) -> Result<(String, String)> {
        Ok(extractive_summary(&self.stats, prompt, texts))
    }
}

pub fn extractive_summary(stats: &TermStats, prompt: &str, texts: &[&str]) -> (String, String) {
    let mut tf: HashMap<String, usize> = HashMap::new();
    for t in texts.iter().flat_map(|s| text::tokenize(s)) {
        *tf.entry(t).or_insert(0) += 1;
    }
    let mut scored: Vec<(f64, usize, &str)> = texts
        .iter()
        .flat_map(|t| text::sentences(t))
        .enumerate()
        .map(|(order, s)| {
            let toks = text::tokenize(s);
            let score = if toks.is_empty() {
                0.0
            } else {
                toks.iter().map(|t| tf[t] as f64 * stats.idf(t)).sum::<f64>() / toks.len() as f64
            };
            (score, order, s)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(SUMMARY_SENTENCES);
    scored.sort_by_key(|s| s.1);
    let summary = scored.iter().map(|s| s.2).collect::<Vec<_>>().join(" ");

    let query: BTreeSet<String> = text::tokenize(prompt).into_iter().collect();
    let per_item: Vec<HashSet<String>> = texts.iter().map(|t| text::tokenize(t).into_iter().collect()).collect();
    let found: Vec<&String> = query.iter().filter(|q| per_item.iter().any(|s| s.contains(*q))).collect();
    let explanation = if found.is_empty() {
        "None of the prompt terms appear in these items; they are in the context through \
         embedding similarity or a manual addition."
            .to_owned()
    } else {
        let hits = per_item.iter().filter(|s| found.iter().any(|q| s.contains(*q))).count();
        format!(
            "Mentions {} in {hits} of {} sampled items.",
            found.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "),
            texts.len()
        )
    };
    let summary = if summary.is_empty() { texts.join(" ") } else { summary };
    (summary, explanation)
}

pub struct SummaryRequest<'a> {
    pub subtopic: &'a Subtopic,
    pub block: &'a ContextBlock,
    pub prompt: &'a str,
    pub corpus: &'a Corpus,
    pub policy: SamplingPolicy,
}

/// Summarizes the subtopic's members that are in the block, sampling them
/// under the policy budget. Provider failures fall back to `fallback`.
pub fn summarize_subtopic(
    req: &SummaryRequest<'_>,
    provider: &dyn SummaryProvider,
    fallback: &ExtractiveSummarizer,
) -> Result<SubtopicSummary> {
    let in_block: HashSet<&ItemId> = req.block.ids().collect();
    let members: Vec<&DataItem> = req
        .subtopic
        .member_ids
        .iter()
        .filter(|m| in_block.contains(m))
        .map(|m| {
            req.corpus
                .item(m)
                .ok_or_else(|| CoreError::Integrity(format!("subtopic member {m} missing from corpus")))
        })
        .collect::<Result<_>>()?;
    if members.is_empty() {
        return Err(CoreError::input(format!(
            "subtopic {} has no items in the context block",
            req.subtopic.id
        )));
    }
    let texts: Vec<&str> = members.iter().map(|m| m.content.as_str()).collect();
    let sample = sample_items(&texts, req.policy)?;
    let sampled: Vec<&str> = sample.iter().map(|s| s.text.as_str()).collect();
    let (summary, relevance_explanation) = provider
        .summarize(req.prompt, &req.subtopic.label, &sampled)
        .or_else(|_| fallback.summarize(req.prompt, &req.subtopic.label, &sampled))?;
    Ok(SubtopicSummary {
        subtopic_id: req.subtopic.id.clone(),
        summary,
        relevance_explanation,
        covered_item_ids: sample.iter().map(|s| members[s.index].id.clone()).collect(),
    })
}

/// Everything a turn needs besides the session itself.
pub struct ChatEnv<'a> {
    pub corpus: &'a Corpus,
    pub index: &'a CorpusIndex,
    pub embedder: &'a dyn EmbeddingProvider,
    pub subtopics: &'a [Subtopic],
    pub retrieval: RetrievalParams,
    pub sampling: SamplingPolicy,
    pub responder: &'a dyn ResponseProvider,
    pub summarizer: &'a dyn SummaryProvider,
    pub fallback_summarizer: &'a ExtractiveSummarizer,
}

/// Runs one turn. Retrieval happens only when the session has no block yet;
/// on any error the session is left untouched.
pub fn respond(session: &mut ChatSession, prompt: &str, env: &ChatEnv<'_>) -> Result<ChatTurn> {
    if prompt.trim().is_empty() {
        return Err(CoreError::input("prompt is empty"));
    }
    let (block, first) = match &session.context_block {
        Some(b) => (b.clone(), false),
        None => (build_context_block(prompt, env.index, env.embedder, &env.retrieval)?, true),
    };
    let rendered = render_context_text(&block, env.corpus)?;
    let (response, cited) = env.responder.respond(&session.system_prompt, prompt, &rendered)?;
    let citations: Vec<ItemId> = cited.into_iter().filter(|c| block.contains(c)).collect();

    let cache_key = (block.digest(), prompt.to_owned());
    let summaries = match session.summary_cache.get(&cache_key) {
        Some(s) => s.clone(),
        None => summarize_block(&block, prompt, env)?,
    };

    let retrieved_ids = if first {
        block
            .entries
            .iter()
            .filter(|e| e.origin == Origin::Retrieved)
            .map(|e| e.item_id.clone())
            .collect()
    } else {
        Vec::new()
    };
    let turn = ChatTurn {
        prompt: prompt.to_owned(),
        response,
        citations,
        retrieved_ids,
        summaries: summaries.clone(),
    };
    session.summary_cache.insert(cache_key, summaries);
    session.context_block = Some(block);
    session.turns.push(turn.clone());
    Ok(turn)
}

fn summarize_block(block: &ContextBlock, prompt: &str, env: &ChatEnv<'_>) -> Result<Vec<SubtopicSummary>> {
    let in_block: HashSet<&ItemId> = block.ids().collect();
    let mut relevant: Vec<&Subtopic> = env
        .subtopics
        .iter()
        .filter(|s| s.member_ids.iter().any(|m| in_block.contains(m)))
        .collect();
    relevant.sort_by_key(|s| s.id.sort_key());
    relevant
        .into_iter()
        .map(|subtopic| {
            let req = SummaryRequest {
                subtopic,
                block,
                prompt,
                corpus: env.corpus,
                policy: env.sampling,
            };
            summarize_subtopic(&req, env.summarizer, env.fallback_summarizer)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileView {
    pub item: DataItem,
    /// Full records, so employees sharing a name stay distinguishable.
    pub participants: Vec<Employee>,
}

pub fn get_file_view(item_id: &ItemId, corpus: &Corpus) -> Result<FileView> {
    let item = corpus
        .item(item_id)
        .ok_or_else(|| CoreError::NotFound(format!("item {item_id}")))?;
    let participants = item
        .participants
        .iter()
        .map(|p| {
            corpus
                .employee(p)
                .cloned()
                .ok_or_else(|| CoreError::Integrity(format!("item {item_id} references unknown employee {p}")))
        })
        .collect::<Result<_>>()?;
    Ok(FileView {
        item: item.clone(),
        participants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::sentinel;

    #[test]
    fn empty_context_gives_no_context_answer() {
        let (answer, cites) = stub_respond("marketing plans", "");
        assert_eq!(answer, NO_CONTEXT_RESPONSE);
        assert!(cites.is_empty());
    }

    #[test]
    fn single_matching_sentence_selected() {
        let ctx = format!(
            "{}\nFILE | Notes | The budget is fixed. Marketing starts soon.\n{}\nCHAT from A <E1> | Database work continues.",
            sentinel(&ItemId("I1".into())),
            sentinel(&ItemId("I2".into()))
        );
        let (answer, cites) = stub_respond("marketing", &ctx);
        assert_eq!(answer, "Marketing starts soon. [I1]");
        assert_eq!(cites, vec![ItemId("I1".into())]);
    }

    #[test]
    fn at_most_five_sentences_in_context_order() {
        let mut ctx = String::new();
        for i in 0..8 {
            ctx.push_str(&format!("{}\nFILE | t | alpha {}.\n", sentinel(&ItemId(format!("I{i}"))), "alpha ".repeat(i)));
        }
        let (answer, cites) = stub_respond("alpha", &ctx);
        assert_eq!(answer.lines().count(), 5);
        let ids: Vec<&str> = cites.iter().map(|c| c.0.as_str()).collect();
        assert_eq!(ids, vec!["I3", "I4", "I5", "I6", "I7"]);
    }

    #[test]
    fn explanation_lists_found_terms() {
        let stats = TermStats::from_documents(["launch plan", "audit"]);
        let (summary, why) = extractive_summary(&stats, "launch budget", &["The launch plan is ready.", "Audit is due."]);
        assert!(!summary.is_empty());
        assert_eq!(why, "Mentions launch in 1 of 2 sampled items.");
    }
}
