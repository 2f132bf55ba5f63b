//! Core vocabulary: terms, atoms, substitutions, partitions, homomorphisms,
//! queries, and disjunctive existential rules.

pub mod atom;
pub mod hom;
pub mod partition;
pub mod query;
pub mod rule;
pub mod subst;
pub mod term;

pub use atom::{Atom, AtomSet, Predicate};
pub use hom::{
    all_homomorphisms, all_homomorphisms_capped, homomorphism, homomorphism_extending, isomorphic,
};
pub use partition::{PartitionError, TermPartition};
pub use query::{cover, fact_entails, remove_more_specific, ucq_entails, ucq_equivalent, Cq, Ucq};
pub use rule::{DisjunctiveRule, Mapping, RuleError, RuleSet};
pub use subst::Substitution;
pub use term::{Symbol, Term, VarGen, Variable};
