//! Text format for fact/rule/query documents, plus JSON result export.
//!
//! The wire format, by example:
//!
//! ```text
//! % comments run to end of line
//! @source v .
//! @facts
//! e(a,b), e(b,a).
//! @rules
//! coloring: v(X) -> g(X) | r(X).
//! @queries
//! q: ? :- t1(U), t2(U).
//! ```
//!
//! Sections are optional and may appear in any order. Variables are
//! uppercase-initial identifiers scoped to one statement; predicates and
//! constants are lowercase-initial identifiers or digit strings. Facts must
//! be ground. When `@source` is present the document is a mapping: rule
//! bodies may use only source predicates and rule heads none of them.

mod json;
mod lex;
mod parse;
mod print;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{AtomSet, Cq, Mapping, RuleError, RuleSet, Symbol, Ucq, VarGen};

pub use json::{export_json, JsonSummary};
pub use parse::parse;
pub use print::{serialize_document, serialize_ucq};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TextError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error(
        "line {line}, column {col}: predicate {pred} used with arity {found}, previously {expected}"
    )]
    ArityMismatch { pred: String, expected: usize, found: usize, line: usize, col: usize },
    #[error("line {line}, column {col}: facts must be ground, found variable {var}")]
    NonGroundFact { var: String, line: usize, col: usize },
    #[error("predicate {pred} used with arities {a} and {b}")]
    InconsistentArity { pred: String, a: usize, b: usize },
    #[error("document has no @source section")]
    MissingSource,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// A query together with the label it carried in source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedQuery {
    pub name: Option<Symbol>,
    pub cq: Cq,
}

/// Everything one input file describes: a fact base, a rule set, a query
/// list, and optionally the source vocabulary that makes the rule set a
/// mapping.
#[derive(Debug, Clone)]
pub struct Document {
    facts: AtomSet,
    rules: RuleSet,
    queries: Vec<NamedQuery>,
    source: Option<BTreeSet<Symbol>>,
    var_floor: u64,
}

impl Document {
    /// Validates arity consistency per predicate name across the whole
    /// document, and the mapping conditions when a source vocabulary is
    /// given.
    pub fn new(
        facts: AtomSet,
        rules: RuleSet,
        queries: Vec<NamedQuery>,
        source: Option<BTreeSet<Symbol>>,
    ) -> Result<Self, TextError> {
        let mut arities: std::collections::BTreeMap<Symbol, usize> = Default::default();
        let atom_groups = facts
            .iter()
            .cloned()
            .chain(rules.iter().flat_map(|r| {
                r.body().iter().cloned().chain(r.disjuncts().iter().flat_map(|d| d.iter().cloned()))
            }))
            .chain(queries.iter().flat_map(|q| q.cq.atoms().iter().cloned()));
        for atom in atom_groups {
            let p = atom.predicate();
            match arities.get(p.name()) {
                None => {
                    arities.insert(p.name().clone(), p.arity());
                }
                Some(&a) if a != p.arity() => {
                    return Err(TextError::InconsistentArity {
                        pred: p.name().to_string(),
                        a,
                        b: p.arity(),
                    });
                }
                Some(_) => {}
            }
        }
        if let Some(src) = &source {
            Mapping::new(src.clone(), rules.clone())?;
        }
        let var_floor = Self::max_var_id(&facts, &rules, &queries).map_or(0, |id| id + 1);
        Ok(Document { facts, rules, queries, source, var_floor })
    }

    fn max_var_id(facts: &AtomSet, rules: &RuleSet, queries: &[NamedQuery]) -> Option<u64> {
        facts
            .variables()
            .into_iter()
            .chain(rules.iter().flat_map(|r| r.variables()))
            .chain(queries.iter().flat_map(|q| q.cq.variables()))
            .map(|v| v.id())
            .max()
    }

    pub fn facts(&self) -> &AtomSet {
        &self.facts
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn queries(&self) -> &[NamedQuery] {
        &self.queries
    }

    pub fn source(&self) -> Option<&BTreeSet<Symbol>> {
        self.source.as_ref()
    }

    /// The document's queries as a UCQ (duplicates collapsed).
    pub fn ucq(&self) -> Ucq {
        let mut u = Ucq::new();
        for q in &self.queries {
            u.push(q.cq.clone());
        }
        u
    }

    /// A generator guaranteed not to collide with any variable id already in
    /// the document.
    pub fn var_gen(&self) -> VarGen {
        VarGen::starting_at(self.var_floor)
    }

    pub fn mapping(&self) -> Result<Mapping, TextError> {
        let source = self.source.clone().ok_or(TextError::MissingSource)?;
        Ok(Mapping::new(source, self.rules.clone())?)
    }
}
