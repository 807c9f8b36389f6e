//! The context block handed to the chatbot and its group-level editing.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, ItemId, ItemKind};
use crate::embedding::EmbeddingProvider;
use crate::error::{CoreError, Result};
use crate::retrieval::{hybrid_retrieve, CorpusIndex, RetrievalParams};
use crate::subtopics::{Subtopic, SubtopicId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Retrieved,
    UserAdded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub item_id: ItemId,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBlock {
    pub entries: Vec<ContextEntry>,
    pub created_from_prompt: String,
}

impl ContextBlock {
    pub fn ids(&self) -> impl Iterator<Item = &ItemId> {
        self.entries.iter().map(|e| &e.item_id)
    }

    pub fn contains(&self, id: &ItemId) -> bool {
        self.entries.iter().any(|e| &e.item_id == id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Content hash of the entries, used as a cache key.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.entries {
            h.update(e.item_id.0.as_bytes());
            h.update(if e.origin == Origin::Retrieved { b"R" } else { b"U" });
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// Subtopic membership lookup in both directions.
#[derive(Debug, Clone, Default)]
pub struct SubtopicIndex {
    members: BTreeMap<SubtopicId, Vec<ItemId>>,
    of_item: HashMap<ItemId, SubtopicId>,
}

impl SubtopicIndex {
    pub fn new(subtopics: &[Subtopic]) -> Self {
        let mut idx = SubtopicIndex::default();
        for s in subtopics {
            for m in &s.member_ids {
                idx.of_item.insert(m.clone(), s.id.clone());
            }
            idx.members.insert(s.id.clone(), s.member_ids.clone());
        }
        idx
    }

    pub fn members(&self, id: &SubtopicId) -> Option<&[ItemId]> {
        self.members.get(id).map(Vec::as_slice)
    }

    pub fn subtopic_of(&self, item: &ItemId) -> Option<&SubtopicId> {
        self.of_item.get(item)
    }

    pub fn ids(&self) -> impl Iterator<Item = &SubtopicId> {
        self.members.keys()
    }
}

pub fn build_context_block(
    prompt: &str,
    index: &CorpusIndex,
    embedder: &dyn EmbeddingProvider,
    params: &RetrievalParams,
) -> Result<ContextBlock> {
    let ranked = hybrid_retrieve(prompt, index, embedder, params)?;
    Ok(ContextBlock {
        entries: ranked
            .into_iter()
            .map(|s| ContextEntry {
                item_id: s.item_id,
                origin: Origin::Retrieved,
            })
            .collect(),
        created_from_prompt: prompt.to_owned(),
    })
}

/// Applies removals first, then appends the absent members of each added
/// subtopic as user additions. An id both removed and added ends present.
pub fn modify_context(
    block: &ContextBlock,
    add: &[SubtopicId],
    remove: &[SubtopicId],
    subtopics: &SubtopicIndex,
) -> Result<ContextBlock> {
    let unknown: Vec<&str> = add
        .iter()
        .chain(remove)
        .filter(|s| subtopics.members(s).is_none())
        .map(|s| s.0.as_str())
        .collect();
    if !unknown.is_empty() {
        return Err(CoreError::input(format!("unknown subtopic ids: {}", unknown.join(", "))));
    }

    let removed: HashSet<&ItemId> = remove
        .iter()
        .flat_map(|s| subtopics.members(s).unwrap_or_default())
        .collect();
    let mut entries: Vec<ContextEntry> = block
        .entries
        .iter()
        .filter(|e| !removed.contains(&e.item_id))
        .cloned()
        .collect();
    let mut present: HashSet<ItemId> = entries.iter().map(|e| e.item_id.clone()).collect();
    for s in add {
        for m in subtopics.members(s).unwrap_or_default() {
            if present.insert(m.clone()) {
                entries.push(ContextEntry {
                    item_id: m.clone(),
                    origin: Origin::UserAdded,
                });
            }
        }
    }
    Ok(ContextBlock {
        entries,
        created_from_prompt: block.created_from_prompt.clone(),
    })
}

pub fn sentinel(id: &ItemId) -> String {
    format!("[[item:{id}]]")
}

/// Extracts the item id from a sentinel line.
pub fn parse_sentinel(line: &str) -> Option<ItemId> {
    let inner = line.trim().strip_prefix("[[item:")?.strip_suffix("]]")?;
    (!inner.is_empty()).then(|| ItemId(inner.to_owned()))
}

/// One section per entry: a sentinel line followed by the kind template.
pub fn render_context_text(block: &ContextBlock, corpus: &Corpus) -> Result<String> {
    let employees = corpus.employee_index();
    let person = |id| -> String {
        employees
            .get(id)
            .map_or_else(|| format!("<{id}>"), |e| format!("{} <{}>", e.full_name, e.id))
    };
    let mut out = String::new();
    for entry in &block.entries {
        let item = corpus
            .item(&entry.item_id)
            .ok_or_else(|| CoreError::Integrity(format!("context references unknown item {}", entry.item_id)))?;
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&sentinel(&item.id));
        out.push('\n');
        let sender = item.participants.first().map(&person).unwrap_or_default();
        let everyone = || item.participants.iter().map(&person).collect::<Vec<_>>().join(", ");
        let _ = match item.kind {
            ItemKind::Email => {
                let to = item.participants[1..].iter().map(&person).collect::<Vec<_>>().join(", ");
                write!(out, "EMAIL from {sender} to {to} | {} | {}", item.title, item.content)
            }
            ItemKind::File => write!(out, "FILE | {} | {}", item.title, item.content),
            ItemKind::CalendarEvent => {
                write!(out, "EVENT | {} | {} | {}", item.created_at, everyone(), item.content)
            }
            ItemKind::ChatMessage => write!(out, "CHAT from {sender} | {}", item.content),
        };
    }
    Ok(out)
}
