//! Query rewriting with disjunctive existential rules: piece-unifiers, the
//! one-step operator, breadth-first rewriting, and source-projected rewriting
//! for mappings.

pub mod engine;
pub mod unify;

pub use engine::{
    rewrite, rewrite_with, s_rewrite, w_step, RewriteBudget, RewriteError, RewriteOptions,
    RewriteOutcome, RewriteStatus,
};
pub use unify::{
    apply_beta, apply_beta_conjunctive, enumerate_disjunctive_piece_unifiers,
    enumerate_disjunctive_piece_unifiers_filtered, enumerate_piece_unifiers,
    DisjunctivePieceUnifier, PieceUnifier,
};
