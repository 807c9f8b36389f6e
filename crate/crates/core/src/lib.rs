//! Context-engineering engine: organizes an enterprise corpus into topics and
//! subtopics, lays it out as an occlusion-free extended treemap, retrieves the
//! chatbot's context block and lets users edit it at group level.

pub mod bundle;
pub mod chat;
pub mod context;
pub mod corpus;
pub mod embedding;
pub mod engine;
pub mod error;
pub mod hdbscan;
pub mod layout;
pub mod projection;
pub mod retrieval;
pub mod subtopics;
pub mod text;
pub mod topics;

pub use error::{CoreError, Result};
