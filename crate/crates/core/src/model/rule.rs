//! Disjunctive existential rules, rule sets, and mappings.
//!
//! A rule is `body → H1 ∨ ... ∨ Hn` where each disjunct is a nonempty atom
//! conjunction. The frontier of a disjunct is its variables shared with the
//! body; the remaining disjunct variables are existential. A mapping is a
//! rule set whose bodies speak only source predicates and whose heads avoid
//! them entirely.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::atom::{Atom, AtomSet, Predicate};
use super::subst::Substitution;
use super::term::{Symbol, Term, VarGen, Variable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {0}: empty body")]
    EmptyBody(String),
    #[error("rule {0}: no head disjuncts")]
    NoDisjuncts(String),
    #[error("rule {0}: empty head disjunct")]
    EmptyDisjunct(String),
    #[error("mapping rule {rule}: body predicate {pred} is not a source predicate")]
    BodyNotSource { rule: String, pred: String },
    #[error("mapping rule {rule}: head predicate {pred} is a source predicate")]
    HeadIsSource { rule: String, pred: String },
}

#[derive(Clone, PartialEq, Eq)]
pub struct DisjunctiveRule {
    name: Option<Symbol>,
    body: AtomSet,
    disjuncts: Vec<AtomSet>,
}

impl DisjunctiveRule {
    pub fn new(
        name: Option<Symbol>,
        body: AtomSet,
        disjuncts: Vec<AtomSet>,
    ) -> Result<Self, RuleError> {
        let label = || name.as_ref().map_or_else(|| "<unnamed>".to_string(), |n| n.to_string());
        if body.is_empty() {
            return Err(RuleError::EmptyBody(label()));
        }
        if disjuncts.is_empty() {
            return Err(RuleError::NoDisjuncts(label()));
        }
        if disjuncts.iter().any(AtomSet::is_empty) {
            return Err(RuleError::EmptyDisjunct(label()));
        }
        Ok(DisjunctiveRule { name, body, disjuncts })
    }

    pub fn name(&self) -> Option<&Symbol> {
        self.name.as_ref()
    }

    pub fn body(&self) -> &AtomSet {
        &self.body
    }

    pub fn disjuncts(&self) -> &[AtomSet] {
        &self.disjuncts
    }

    pub fn disjunct(&self, i: usize) -> &AtomSet {
        &self.disjuncts[i]
    }

    pub fn is_conjunctive(&self) -> bool {
        self.disjuncts.len() == 1
    }

    /// No existential variables in any disjunct.
    pub fn is_datalog(&self) -> bool {
        (0..self.disjuncts.len()).all(|i| self.existentials(i).is_empty())
    }

    /// Conjunctive with a single head atom: the shape the reduction and the
    /// unfolding machinery work on.
    pub fn head_atom(&self) -> Option<&Atom> {
        if self.is_conjunctive() && self.disjuncts[0].len() == 1 {
            self.disjuncts[0].iter().next()
        } else {
            None
        }
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut vars = self.body.variables();
        for d in &self.disjuncts {
            vars.extend(d.variables());
        }
        vars
    }

    /// Variables shared between the body and any disjunct.
    pub fn frontier(&self) -> BTreeSet<Variable> {
        let body_vars = self.body.variables();
        let mut head_vars = BTreeSet::new();
        for d in &self.disjuncts {
            head_vars.extend(d.variables());
        }
        body_vars.intersection(&head_vars).cloned().collect()
    }

    /// Frontier of one disjunct: its variables that also occur in the body.
    pub fn disjunct_frontier(&self, i: usize) -> BTreeSet<Variable> {
        let body_vars = self.body.variables();
        self.disjuncts[i]
            .variables()
            .intersection(&body_vars)
            .cloned()
            .collect()
    }

    /// Frontier of a disjunct in first-occurrence order over its atoms.
    pub fn disjunct_frontier_ordered(&self, i: usize) -> Vec<Variable> {
        let frontier = self.disjunct_frontier(i);
        let mut out = Vec::new();
        for atom in self.disjuncts[i].iter() {
            for v in atom.variables() {
                if frontier.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// Existential variables of one disjunct.
    pub fn existentials(&self, i: usize) -> BTreeSet<Variable> {
        let body_vars = self.body.variables();
        self.disjuncts[i]
            .variables()
            .difference(&body_vars)
            .cloned()
            .collect()
    }

    /// A rule is disconnected when the atoms of body ∪ heads do not form a
    /// single component under shared variables.
    pub fn is_disconnected(&self) -> bool {
        let atoms: Vec<&Atom> = self
            .body
            .iter()
            .chain(self.disjuncts.iter().flat_map(|d| d.iter()))
            .collect();
        if atoms.len() <= 1 {
            return false;
        }
        let mut component = vec![0usize];
        let mut seen = vec![false; atoms.len()];
        seen[0] = true;
        while let Some(i) = component.pop() {
            let vars: BTreeSet<&Variable> = atoms[i].variables().collect();
            for (j, other) in atoms.iter().enumerate() {
                if !seen[j] && other.variables().any(|v| vars.contains(v)) {
                    seen[j] = true;
                    component.push(j);
                }
            }
        }
        !seen.iter().all(|s| *s)
    }

    /// Fresh-variable copy of the whole rule; names are not kept on copies.
    pub fn safe_copy(&self, gen: &VarGen) -> (DisjunctiveRule, Substitution) {
        let renaming = Substitution::renaming(self.variables().iter(), gen);
        (
            DisjunctiveRule {
                name: self.name.clone(),
                body: self.body.apply(&renaming),
                disjuncts: self.disjuncts.iter().map(|d| d.apply(&renaming)).collect(),
            },
            renaming,
        )
    }

    pub fn apply(&self, s: &Substitution) -> DisjunctiveRule {
        DisjunctiveRule {
            name: self.name.clone(),
            body: self.body.apply(s),
            disjuncts: self.disjuncts.iter().map(|d| d.apply(s)).collect(),
        }
    }

    /// Rename existential variables so no two disjuncts share one.
    ///
    /// Existentials are quantified per disjunct, so a non-body variable
    /// written in two disjuncts denotes two unrelated variables; splitting
    /// them apart here lets the rest of the crate treat equal ids as equal
    /// variables. Body and frontier variables are untouched.
    pub fn separate_existentials(&self, gen: &VarGen) -> DisjunctiveRule {
        let mut seen: BTreeSet<Variable> = BTreeSet::new();
        let mut disjuncts = Vec::with_capacity(self.disjuncts.len());
        for i in 0..self.disjuncts.len() {
            let mut renaming = Substitution::new();
            for v in self.existentials(i) {
                if !seen.insert(v.clone()) {
                    let fresh = match v.display_name() {
                        Some(n) => gen.fresh_named(n.as_str()),
                        None => gen.fresh(),
                    };
                    renaming.bind(v, Term::Var(fresh));
                }
            }
            disjuncts.push(self.disjuncts[i].apply(&renaming));
        }
        DisjunctiveRule {
            name: self.name.clone(),
            body: self.body.clone(),
            disjuncts,
        }
    }

    pub fn predicates(&self) -> BTreeSet<Predicate> {
        let mut preds = self.body.predicates();
        for d in &self.disjuncts {
            preds.extend(d.predicates());
        }
        preds
    }
}

impl fmt::Display for DisjunctiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            write!(f, "{n}: ")?;
        }
        write!(f, "{} -> ", self.body)?;
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DisjunctiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An ordered rule collection whose members use pairwise disjoint variable
/// ids; construction renames any rule violating that.
#[derive(Clone, Default, Debug)]
pub struct RuleSet {
    rules: Vec<DisjunctiveRule>,
}

impl RuleSet {
    pub fn new(rules: Vec<DisjunctiveRule>, gen: &VarGen) -> Self {
        let mut seen: BTreeSet<Variable> = BTreeSet::new();
        let mut out = Vec::with_capacity(rules.len());
        for rule in rules {
            let rule = rule.separate_existentials(gen);
            let rule = if rule.variables().is_disjoint(&seen) {
                rule
            } else {
                rule.safe_copy(gen).0
            };
            seen.extend(rule.variables());
            out.push(rule);
        }
        RuleSet { rules: out }
    }

    pub fn rules(&self) -> &[DisjunctiveRule] {
        &self.rules
    }

    pub fn get(&self, i: usize) -> &DisjunctiveRule {
        &self.rules[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DisjunctiveRule> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn is_datalog(&self) -> bool {
        self.rules.iter().all(DisjunctiveRule::is_datalog)
    }

    pub fn predicates(&self) -> BTreeSet<Predicate> {
        self.rules.iter().flat_map(|r| r.predicates()).collect()
    }
}

/// A source-to-target rule set: bodies on source predicates only, heads on
/// target (non-source) predicates only.
#[derive(Clone, Debug)]
pub struct Mapping {
    source: BTreeSet<Symbol>,
    rules: RuleSet,
}

impl Mapping {
    pub fn new(source: BTreeSet<Symbol>, rules: RuleSet) -> Result<Self, RuleError> {
        for rule in rules.iter() {
            let label = rule.name().map_or_else(|| "<unnamed>".to_string(), |n| n.to_string());
            for atom in rule.body().iter() {
                if !source.contains(atom.predicate().name()) {
                    return Err(RuleError::BodyNotSource {
                        rule: label,
                        pred: atom.predicate().name().to_string(),
                    });
                }
            }
            for d in rule.disjuncts() {
                for atom in d.iter() {
                    if source.contains(atom.predicate().name()) {
                        return Err(RuleError::HeadIsSource {
                            rule: label,
                            pred: atom.predicate().name().to_string(),
                        });
                    }
                }
            }
        }
        Ok(Mapping { source, rules })
    }

    pub fn source(&self) -> &BTreeSet<Symbol> {
        &self.source
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn is_source(&self, pred: &Predicate) -> bool {
        self.source.contains(pred.name())
    }

    /// Is every atom of the set on source predicates?
    pub fn all_source(&self, atoms: &AtomSet) -> bool {
        atoms.iter().all(|a| self.is_source(a.predicate()))
    }

    /// Is every atom of the set on target predicates?
    pub fn all_target(&self, atoms: &AtomSet) -> bool {
        atoms.iter().all(|a| !self.is_source(a.predicate()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(id: u64) -> Term {
        Term::Var(Variable::new(id))
    }

    fn atoms(spec: &[(&str, &[Term])]) -> AtomSet {
        spec.iter()
            .map(|(p, args)| Atom::new(Predicate::new(*p, args.len()), args.to_vec()))
            .collect()
    }

    fn vset(ids: &[u64]) -> BTreeSet<Variable> {
        ids.iter().map(|i| Variable::new(*i)).collect()
    }

    /// v(x) → g(x) ∨ r(x)
    fn coloring_rule() -> DisjunctiveRule {
        DisjunctiveRule::new(
            None,
            atoms(&[("v", &[var(0)])]),
            vec![atoms(&[("g", &[var(0)])]), atoms(&[("r", &[var(0)])])],
        )
        .unwrap()
    }

    #[test]
    fn frontier_and_existentials() {
        // p(x,y) → r(x,z1) ∨ r(y,z2)
        let rule = DisjunctiveRule::new(
            None,
            atoms(&[("p", &[var(0), var(1)])]),
            vec![
                atoms(&[("r", &[var(0), var(2)])]),
                atoms(&[("r", &[var(1), var(3)])]),
            ],
        )
        .unwrap();
        assert_eq!(rule.frontier(), vset(&[0, 1]));
        assert_eq!(rule.disjunct_frontier(0), vset(&[0]));
        assert_eq!(rule.disjunct_frontier(1), vset(&[1]));
        assert_eq!(rule.existentials(0), vset(&[2]));
        assert_eq!(rule.existentials(1), vset(&[3]));
        assert!(!rule.is_datalog());
        assert!(!rule.is_conjunctive());

        let c = coloring_rule();
        assert!(c.is_datalog());
        assert_eq!(c.frontier(), vset(&[0]));
    }

    #[test]
    fn connectivity() {
        let connected = DisjunctiveRule::new(
            None,
            atoms(&[("p", &[var(0), var(1)])]),
            vec![atoms(&[("t1", &[var(0)])]), atoms(&[("t2", &[var(1)])])],
        )
        .unwrap();
        assert!(!connected.is_disconnected());

        // b(x) → t1(x) ∨ t2(z): the second disjunct shares no variable.
        let disconnected = DisjunctiveRule::new(
            None,
            atoms(&[("b", &[var(0)])]),
            vec![atoms(&[("t1", &[var(0)])]), atoms(&[("t2", &[var(9)])])],
        )
        .unwrap();
        assert!(disconnected.is_disconnected());
    }

    #[test]
    fn construction_rejects_degenerate_shapes() {
        assert!(matches!(
            DisjunctiveRule::new(None, AtomSet::new(), vec![atoms(&[("t", &[var(0)])])]),
            Err(RuleError::EmptyBody(_))
        ));
        assert!(matches!(
            DisjunctiveRule::new(None, atoms(&[("b", &[var(0)])]), vec![]),
            Err(RuleError::NoDisjuncts(_))
        ));
        assert!(matches!(
            DisjunctiveRule::new(
                None,
                atoms(&[("b", &[var(0)])]),
                vec![atoms(&[("t", &[var(0)])]), AtomSet::new()]
            ),
            Err(RuleError::EmptyDisjunct(_))
        ));
    }

    #[test]
    fn rule_set_construction_separates_variables() {
        let gen = VarGen::starting_at(50);
        let r1 = coloring_rule();
        let r2 = coloring_rule(); // same ids on purpose
        let set = RuleSet::new(vec![r1, r2], &gen);
        let v1 = set.get(0).variables();
        let v2 = set.get(1).variables();
        assert!(v1.is_disjoint(&v2));
        // Copies preserve structure.
        assert_eq!(set.get(1).disjuncts().len(), 2);
    }

    #[test]
    fn rule_set_construction_separates_shared_existentials() {
        // b(0) → p(0,1) | q(0,1): the 1 in each disjunct is a distinct
        // existential, so construction must pull them apart.
        let rule = DisjunctiveRule::new(
            None,
            atoms(&[("b", &[var(0)])]),
            vec![
                atoms(&[("p", &[var(0), var(1)])]),
                atoms(&[("q", &[var(0), var(1)])]),
            ],
        )
        .unwrap();
        let gen = VarGen::starting_at(10);
        let set = RuleSet::new(vec![rule], &gen);
        let r = set.get(0);
        assert!(r.existentials(0).is_disjoint(&r.existentials(1)));
        assert_eq!(r.existentials(0).len(), 1);
        assert_eq!(r.existentials(1).len(), 1);
        // Frontier variables stay shared.
        assert_eq!(r.disjunct_frontier(0), r.disjunct_frontier(1));

        // A rule whose disjuncts already use distinct existentials is kept
        // verbatim.
        let clean = coloring_rule();
        let before = clean.clone();
        assert_eq!(clean.separate_existentials(&gen), before);
    }

    #[test]
    fn mapping_validation() {
        let gen = VarGen::new();
        let source: BTreeSet<Symbol> = [Symbol::new("v")].into_iter().collect();
        let rules = RuleSet::new(vec![coloring_rule()], &gen);
        assert!(Mapping::new(source, rules.clone()).is_ok());

        let bad_source: BTreeSet<Symbol> = [Symbol::new("g")].into_iter().collect();
        assert!(matches!(
            Mapping::new(bad_source, rules),
            Err(RuleError::BodyNotSource { .. })
        ));
    }
}
