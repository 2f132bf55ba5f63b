//! Partitions of terms, as produced by unification.
//!
//! A partition is admissible when no class holds two distinct constants. Each
//! class designates a representative: the class constant if there is one,
//! otherwise a variable — preferring variables in the partition's priority
//! set (unifier construction marks rule variables as preferred), breaking
//! ties by smallest id. `associated_substitution` maps every term of every
//! class to its class representative.
//!
//! Terms never mentioned in any merge are implicitly in singleton classes;
//! only non-singleton classes are stored.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::subst::Substitution;
use super::term::{Term, Variable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition not admissible: class {{{0}}} contains two constants")]
    NotAdmissible(String),
}

#[derive(Clone, Default, PartialEq, Eq)]
pub struct TermPartition {
    /// Non-singleton classes, kept sorted by their smallest element.
    classes: Vec<BTreeSet<Term>>,
    /// Variables preferred as class representatives.
    priority: BTreeSet<Variable>,
}

impl TermPartition {
    pub fn new() -> Self {
        TermPartition::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Term, Term)>) -> Self {
        let mut p = TermPartition::new();
        for (a, b) in pairs {
            p.merge(&a, &b);
        }
        p
    }

    /// Mark variables that should win representative elections.
    pub fn add_priority(&mut self, vars: impl IntoIterator<Item = Variable>) {
        self.priority.extend(vars);
    }

    pub fn priority(&self) -> &BTreeSet<Variable> {
        &self.priority
    }

    /// Non-singleton classes, in deterministic order.
    pub fn classes(&self) -> &[BTreeSet<Term>] {
        &self.classes
    }

    /// The class containing `t`, if `t` is in a non-singleton class.
    pub fn class_of(&self, t: &Term) -> Option<&BTreeSet<Term>> {
        self.classes.iter().find(|c| c.contains(t))
    }

    /// Put `a` and `b` in the same class, merging classes as needed.
    pub fn merge(&mut self, a: &Term, b: &Term) {
        if a == b {
            // A pair of equal terms adds no constraint.
            return;
        }
        let ia = self.classes.iter().position(|c| c.contains(a));
        let ib = self.classes.iter().position(|c| c.contains(b));
        match (ia, ib) {
            (None, None) => {
                self.classes.push([a.clone(), b.clone()].into_iter().collect());
            }
            (Some(i), None) => {
                self.classes[i].insert(b.clone());
            }
            (None, Some(j)) => {
                self.classes[j].insert(a.clone());
            }
            (Some(i), Some(j)) if i != j => {
                let absorbed = self.classes.remove(j.max(i));
                let keep = j.min(i);
                self.classes[keep].extend(absorbed);
            }
            (Some(_), Some(_)) => {}
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        self.classes.sort_by(|c1, c2| c1.iter().next().cmp(&c2.iter().next()));
    }

    /// The finest partition coarser than both inputs: classes sharing a term
    /// are merged, to fixpoint. Priorities are unioned.
    pub fn join(&self, other: &TermPartition) -> TermPartition {
        let mut out = self.clone();
        out.add_priority(other.priority.iter().cloned());
        for class in &other.classes {
            let mut it = class.iter();
            if let Some(first) = it.next() {
                for t in it {
                    out.merge(first, t);
                }
            }
        }
        out
    }

    /// Distinct constants of each class; admissibility wants at most one.
    fn class_constants(class: &BTreeSet<Term>) -> Vec<&Term> {
        class.iter().filter(|t| t.is_const()).collect()
    }

    pub fn is_admissible(&self) -> bool {
        self.classes.iter().all(|c| Self::class_constants(c).len() <= 1)
    }

    /// The representative of a class under this partition's priority set.
    pub fn representative<'a>(&self, class: &'a BTreeSet<Term>) -> Result<&'a Term, PartitionError> {
        let consts = Self::class_constants(class);
        match consts.len() {
            0 => {}
            1 => return Ok(consts[0]),
            _ => {
                let shown = class.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
                return Err(PartitionError::NotAdmissible(shown));
            }
        }
        let preferred = class
            .iter()
            .filter(|t| t.as_var().is_some_and(|v| self.priority.contains(v)))
            .min();
        // Classes are nonempty and constant-free here, so min() exists.
        Ok(preferred.unwrap_or_else(|| class.iter().min().unwrap()))
    }

    /// Map every term in a non-singleton class to its class representative.
    pub fn associated_substitution(&self) -> Result<Substitution, PartitionError> {
        let mut s = Substitution::new();
        for class in &self.classes {
            let rep = self.representative(class)?.clone();
            for t in class {
                if let Term::Var(v) = t {
                    if Term::Var(v.clone()) != rep {
                        s.bind(v.clone(), rep.clone());
                    }
                }
            }
        }
        Ok(s)
    }
}

impl fmt::Display for TermPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.classes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{")?;
            for (j, t) in c.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for TermPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u64) -> Term {
        Term::Var(Variable::new(id))
    }

    fn class(terms: &[&Term]) -> BTreeSet<Term> {
        terms.iter().map(|t| (*t).clone()).collect()
    }

    #[test]
    fn join_merges_overlapping_classes() {
        // {{x,u},{y,v}} joined with {{u,w}} = {{x,u,w},{y,v}}
        let (x, y, u, vv, w) = (v(0), v(1), v(2), v(3), v(4));
        let p1 = TermPartition::from_pairs([(x.clone(), u.clone()), (y.clone(), vv.clone())]);
        let p2 = TermPartition::from_pairs([(u.clone(), w.clone())]);
        let joined = p1.join(&p2);
        assert_eq!(joined.classes().len(), 2);
        assert_eq!(joined.class_of(&x).unwrap(), &class(&[&x, &u, &w]));
        assert_eq!(joined.class_of(&y).unwrap(), &class(&[&y, &vv]));
    }

    /// Independent oracle: the join of two partitions is the set of connected
    /// components of the graph whose edges link members of any input class.
    fn join_oracle(p1: &TermPartition, p2: &TermPartition) -> Vec<BTreeSet<Term>> {
        let mut nodes: BTreeSet<Term> = BTreeSet::new();
        let mut edges: Vec<(Term, Term)> = Vec::new();
        for c in p1.classes().iter().chain(p2.classes()) {
            let members: Vec<&Term> = c.iter().collect();
            nodes.extend(members.iter().map(|t| (*t).clone()));
            for w in members.windows(2) {
                edges.push((w[0].clone(), w[1].clone()));
            }
        }
        let mut components: Vec<BTreeSet<Term>> = nodes
            .into_iter()
            .map(|n| [n].into_iter().collect::<BTreeSet<_>>())
            .collect();
        loop {
            let mut changed = false;
            for (a, b) in &edges {
                let ia = components.iter().position(|c| c.contains(a)).unwrap();
                let ib = components.iter().position(|c| c.contains(b)).unwrap();
                if ia != ib {
                    let moved = components.remove(ia.max(ib));
                    components[ia.min(ib)].extend(moved);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        components.retain(|c| c.len() > 1);
        components.sort_by(|c1, c2| c1.iter().next().cmp(&c2.iter().next()));
        components
    }

    #[test]
    fn join_agrees_with_component_oracle() {
        // Enumerate many small pair lists deterministically.
        let terms: Vec<Term> = (0..5).map(v).collect();
        let mut cases = Vec::new();
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    for d in 0..5 {
                        cases.push((
                            TermPartition::from_pairs([
                                (terms[a].clone(), terms[b].clone()),
                            ]),
                            TermPartition::from_pairs([
                                (terms[c].clone(), terms[d].clone()),
                                (terms[a].clone(), terms[d].clone()),
                            ]),
                        ));
                    }
                }
            }
        }
        for (p1, p2) in cases {
            let joined = p1.join(&p2);
            assert_eq!(joined.classes(), join_oracle(&p1, &p2).as_slice());
        }
    }

    #[test]
    fn representative_prefers_constant_then_priority_then_id() {
        let c = Term::constant("a");
        let (x, u) = (v(7), v(3));
        let mut p = TermPartition::from_pairs([(x.clone(), u.clone()), (u.clone(), c.clone())]);
        assert_eq!(p.representative(p.class_of(&x).unwrap()).unwrap(), &c);

        let mut q = TermPartition::from_pairs([(x.clone(), u.clone())]);
        // Without priority: smallest id wins.
        assert_eq!(q.representative(q.class_of(&x).unwrap()).unwrap(), &u);
        // With priority on the larger id: priority wins.
        q.add_priority([Variable::new(7)]);
        assert_eq!(q.representative(q.class_of(&x).unwrap()).unwrap(), &x);

        p.merge(&x, &Term::constant("b"));
        assert!(!p.is_admissible());
        assert!(p.associated_substitution().is_err());
    }

    #[test]
    fn associated_substitution_maps_to_representatives() {
        // Classes {{x,u},{y},{z,w}} with priority {x,z}: u↦x, w↦z.
        let (x, u, z, w) = (v(10), v(20), v(11), v(21));
        let mut p = TermPartition::from_pairs([(u.clone(), x.clone()), (w.clone(), z.clone())]);
        p.add_priority([Variable::new(10), Variable::new(11)]);
        let s = p.associated_substitution().unwrap();
        assert_eq!(s.apply_term(&u), x);
        assert_eq!(s.apply_term(&w), z);
        assert_eq!(s.apply_term(&x), x);
        assert!(s.is_solved());
    }
}
