//! Sound and complete reasoning with disjunctive existential rules.
//!
//! The crate provides, on top of a shared first-order vocabulary
//! ([`model`]):
//!
//! - UCQ rewriting with disjunctive piece-unifiers and a breadth-first
//!   engine that prunes to covers ([`rewrite`]), including the
//!   source-to-target variant for mappings;
//! - a disjunctive chase producing derivation trees, and certain-answer
//!   entailment on top of it ([`chase`]);
//! - generators for structurally hard inputs: queries witnessing
//!   non-termination of rewriting for a pair of disjunctive mapping rules,
//!   and a reduction from rule-set entailment to UCQ entailment
//!   ([`construct`]);
//! - a randomized harness cross-checking rewriting against the chase and
//!   exercising the algebraic identities the rewriting relies on
//!   ([`harness`]);
//! - a text format for rule bases and queries ([`textio`]) and a command
//!   line interface ([`cli`]).

pub mod chase;
pub mod cli;
pub mod construct;
pub mod harness;
pub mod model;
pub mod rewrite;
pub mod textio;
