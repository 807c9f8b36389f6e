//! Enterprise corpus types, canonical serialization and the seeded generator.

mod synth;
pub mod vocab;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub use synth::{generate_corpus, inject_duplicate_names, GenConfig};

pub const CORPUS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmployeeId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub String);

impl fmt::Display for EmployeeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        ItemId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Department {
    ProductDesign,
    Marketing,
    SoftwareDev,
    UserResearch,
    Operations,
}

impl Department {
    pub const ALL: [Department; 5] = [
        Department::ProductDesign,
        Department::Marketing,
        Department::SoftwareDev,
        Department::UserResearch,
        Department::Operations,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            Department::ProductDesign => "Product Design",
            Department::Marketing => "Marketing",
            Department::SoftwareDev => "Software Development",
            Department::UserResearch => "User Research",
            Department::Operations => "Operations",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ItemKind {
    Email,
    File,
    CalendarEvent,
    ChatMessage,
}

impl ItemKind {
    pub const ALL: [ItemKind; 4] = [
        ItemKind::Email,
        ItemKind::File,
        ItemKind::CalendarEvent,
        ItemKind::ChatMessage,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Employee {
    pub id: EmployeeId,
    pub full_name: String,
    pub title: String,
    pub department: Department,
    pub profile: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataItem {
    pub id: ItemId,
    pub kind: ItemKind,
    pub title: String,
    pub content: String,
    pub participants: Vec<EmployeeId>,
    pub created_at: NaiveDate,
    /// Vocabulary pool the content was drawn from (generator ground truth).
    pub department: Department,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub schema_version: u32,
    pub employees: Vec<Employee>,
    pub items: Vec<DataItem>,
}

impl Corpus {
    pub fn employee_index(&self) -> HashMap<&EmployeeId, &Employee> {
        self.employees.iter().map(|e| (&e.id, e)).collect()
    }

    pub fn item(&self, id: &ItemId) -> Option<&DataItem> {
        // ids are generated in sorted order; fall back to a scan for hand-built corpora
        match self.items.binary_search_by(|it| it.id.cmp(id)) {
            Ok(pos) => Some(&self.items[pos]),
            Err(_) => self.items.iter().find(|it| &it.id == id),
        }
    }

    pub fn employee(&self, id: &EmployeeId) -> Option<&Employee> {
        match self.employees.binary_search_by(|e| e.id.cmp(id)) {
            Ok(pos) => Some(&self.employees[pos]),
            Err(_) => self.employees.iter().find(|e| &e.id == id),
        }
    }

    /// Text the keyword index sees: title, content and participant names.
    pub fn searchable_text(&self, item: &DataItem) -> String {
        let mut text = format!("{} {}", item.title, item.content);
        for pid in &item.participants {
            if let Some(emp) = self.employee(pid) {
                text.push(' ');
                text.push_str(&emp.full_name);
            }
        }
        text
    }

    /// Multiplicity of every full name, for duplicate-name scenarios.
    pub fn name_histogram(&self) -> BTreeMap<&str, usize> {
        let mut hist = BTreeMap::new();
        for e in &self.employees {
            *hist.entry(e.full_name.as_str()).or_insert(0) += 1;
        }
        hist
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CORPUS_SCHEMA_VERSION {
            return Err(CoreError::Integrity(format!(
                "unsupported corpus schema_version {}",
                self.schema_version
            )));
        }
        let mut employee_ids = HashSet::new();
        for e in &self.employees {
            if !employee_ids.insert(&e.id) {
                return Err(CoreError::Integrity(format!("duplicate employee id {}", e.id)));
            }
            if e.profile.trim().is_empty() {
                return Err(CoreError::Integrity(format!("employee {} has empty profile", e.id)));
            }
        }
        let mut item_ids = HashSet::new();
        for item in &self.items {
            if !item_ids.insert(&item.id) {
                return Err(CoreError::Integrity(format!("duplicate item id {}", item.id)));
            }
            if item.content.trim().is_empty() {
                return Err(CoreError::Integrity(format!("item {} has empty content", item.id)));
            }
            if item.participants.is_empty() {
                return Err(CoreError::Integrity(format!("item {} has no participants", item.id)));
            }
            if let Some(p) = item.participants.iter().find(|p| !employee_ids.contains(p)) {
                return Err(CoreError::Integrity(format!(
                    "item {} references unknown employee {}",
                    item.id, p
                )));
            }
        }
        Ok(())
    }
}

/// Canonical pretty-printed form; field order is fixed by the type definitions.
pub fn serialize_corpus(corpus: &Corpus) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(corpus).expect("corpus serialization is infallible");
    bytes.push(b'\n');
    bytes
}

pub fn load_corpus(bytes: &[u8]) -> Result<Corpus> {
    let corpus: Corpus = serde_json::from_slice(bytes)?;
    corpus.validate()?;
    Ok(corpus)
}

/// SHA-256 of the canonical serialization.
pub fn fingerprint(corpus: &Corpus) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(serialize_corpus(corpus)))
}
