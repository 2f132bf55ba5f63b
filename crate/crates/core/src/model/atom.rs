//! Atoms over a predicate vocabulary, and ordered atom sets.
//!
//! `AtomSet` is the shared currency of the crate: fact bases, conjunctive
//! query bodies, rule bodies and rule disjuncts are all atom sets. Backing the
//! set with a `BTreeSet` gives every consumer a deterministic iteration order
//! for free, which the deterministic pipelines (cover, unifier enumeration,
//! canonical printing) lean on.

use std::collections::BTreeSet;
use std::fmt;

use super::subst::Substitution;
use super::term::{Symbol, Term, VarGen, Variable};

/// A predicate: a name with a fixed arity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    name: Symbol,
    arity: usize,
}

impl Predicate {
    pub fn new(name: impl Into<Symbol>, arity: usize) -> Self {
        Predicate { name: name.into(), arity }
    }

    pub fn name(&self) -> &Symbol {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An atom `p(t1, ..., tk)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pred: Predicate,
    args: Vec<Term>,
}

impl Atom {
    /// Panics if the argument count does not match the predicate arity;
    /// arity errors on user input are caught earlier, by the parser.
    pub fn new(pred: Predicate, args: Vec<Term>) -> Self {
        assert_eq!(pred.arity(), args.len(), "arity mismatch building atom {}", pred);
        Atom { pred, args }
    }

    pub fn predicate(&self) -> &Predicate {
        &self.pred
    }

    pub fn args(&self) -> &[Term] {
        &self.args
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_const)
    }

    pub fn apply(&self, s: &Substitution) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|t| s.apply_term(t)).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred.name())?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An ordered, duplicate-free set of atoms.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomSet(BTreeSet<Atom>);

impl AtomSet {
    pub fn new() -> Self {
        AtomSet(BTreeSet::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> + Clone {
        self.0.iter()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.0.insert(atom)
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.0.remove(atom)
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        AtomSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn extend(&mut self, atoms: impl IntoIterator<Item = Atom>) {
        self.0.extend(atoms);
    }

    /// Atoms of `self` that are not in `other`.
    pub fn difference(&self, other: &AtomSet) -> AtomSet {
        AtomSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.0.iter().flat_map(|a| a.variables().cloned()).collect()
    }

    pub fn terms(&self) -> BTreeSet<Term> {
        self.0.iter().flat_map(|a| a.args().iter().cloned()).collect()
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.0
            .iter()
            .flat_map(|a| a.args())
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect()
    }

    pub fn predicates(&self) -> BTreeSet<Predicate> {
        self.0.iter().map(|a| a.predicate().clone()).collect()
    }

    pub fn is_ground(&self) -> bool {
        self.0.iter().all(Atom::is_ground)
    }

    pub fn apply(&self, s: &Substitution) -> AtomSet {
        AtomSet(self.0.iter().map(|a| a.apply(s)).collect())
    }

    /// Rename every variable to a fresh one, returning the copy together with
    /// the renaming that produced it. Copies are anonymous: display names are
    /// a property of source text, not of machine-invented variables.
    pub fn safe_copy(&self, gen: &VarGen) -> (AtomSet, Substitution) {
        let renaming = Substitution::renaming(self.variables().iter(), gen);
        (self.apply(&renaming), renaming)
    }
}

impl FromIterator<Atom> for AtomSet {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        AtomSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a AtomSet {
    type Item = &'a Atom;
    type IntoIter = std::collections::btree_set::Iter<'a, Atom>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(id: u64) -> Term {
        Term::Var(Variable::new(id))
    }

    #[test]
    fn atom_set_dedupes_and_orders() {
        let p = Predicate::new("p", 2);
        let a1 = Atom::new(p.clone(), vec![Term::constant("a"), var(1)]);
        let a2 = Atom::new(p.clone(), vec![Term::constant("a"), var(0)]);
        let set: AtomSet = [a1.clone(), a2.clone(), a1.clone()].into_iter().collect();
        assert_eq!(set.len(), 2);
        // Constants order before variables, then by id: a2 (var 0) < a1 (var 1).
        let order: Vec<&Atom> = set.iter().collect();
        assert_eq!(order, vec![&a2, &a1]);
    }

    #[test]
    fn safe_copy_is_fresh_and_structure_preserving() {
        let gen = VarGen::starting_at(10);
        let p = Predicate::new("p", 2);
        let set: AtomSet = [
            Atom::new(p.clone(), vec![var(0), var(1)]),
            Atom::new(p.clone(), vec![var(1), Term::constant("c")]),
        ]
        .into_iter()
        .collect();
        let (copy, renaming) = set.safe_copy(&gen);
        assert_eq!(copy.len(), 2);
        assert!(copy.variables().is_disjoint(&set.variables()));
        assert_eq!(set.apply(&renaming), copy);
        // Shared variables stay shared in the copy.
        assert_eq!(copy.variables().len(), 2);
    }

    #[test]
    fn ground_checks() {
        let p = Predicate::new("p", 1);
        let ground = Atom::new(p.clone(), vec![Term::constant("a")]);
        let open = Atom::new(p, vec![var(0)]);
        assert!(ground.is_ground());
        assert!(!open.is_ground());
    }
}
