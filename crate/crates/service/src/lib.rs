//! HTTP API, command line and remote providers for ctxscope.

pub mod api;
pub mod cli;
pub mod error;
pub mod remote;

/// Version stamped on every JSON response body.
pub const API_SCHEMA_VERSION: u32 = 1;
