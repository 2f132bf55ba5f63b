//! JSON export of run outcomes, for machine consumers of the CLI.
//!
//! One schema covers both rewriting and chase runs; fields that do not apply
//! to a run kind are zero/empty rather than absent, so consumers can parse
//! every run with a single struct.

use serde::{Deserialize, Serialize};

/// `status` values: `complete`, `budget_exhausted` (rewriting);
/// `entailed`, `not_entailed`, `unknown` (chase).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonSummary {
    pub status: String,
    pub iterations: u64,
    pub generated_count: u64,
    pub cover_size: u64,
    pub cqs: Vec<String>,
    pub elapsed_ms: u64,
}

pub fn export_json(summary: &JsonSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}
