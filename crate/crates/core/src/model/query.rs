//! Conjunctive queries and unions of conjunctive queries.
//!
//! A CQ is an existentially closed atom set; a UCQ is an ordered, exactly
//! deduplicated collection of CQs. Entailment between CQs is homomorphism
//! (q1 ⊨ q2 iff q2 maps into q1), UCQ entailment is the pointwise lift, and
//! `cover` reduces a UCQ to a minimal equivalent subset.
//!
//! `canonical_string` is a printing/ordering device only: it renames
//! variables by first occurrence over the sorted atom list. Equal strings
//! imply isomorphic CQs, and the library's deterministic pipelines produce
//! stable strings, but it is not a general isomorphism decision procedure
//! and is never used as one.

use std::collections::BTreeSet;
use std::fmt;

use super::atom::AtomSet;
use super::hom::{homomorphism, isomorphic};
use super::subst::Substitution;
use super::term::{Term, VarGen, Variable};

/// A conjunctive query. The empty CQ is representable (it is entailed by
/// everything); the text format refuses to parse one, but intermediate
/// algebra may produce it.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cq {
    atoms: AtomSet,
}

impl Cq {
    pub fn new(atoms: AtomSet) -> Self {
        Cq { atoms }
    }

    pub fn atoms(&self) -> &AtomSet {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.atoms.variables()
    }

    pub fn apply(&self, s: &Substitution) -> Cq {
        Cq::new(self.atoms.apply(s))
    }

    pub fn safe_copy(&self, gen: &VarGen) -> (Cq, Substitution) {
        let (atoms, renaming) = self.atoms.safe_copy(gen);
        (Cq::new(atoms), renaming)
    }

    /// `self ⊨ other`: every model of `self` satisfies `other`, decided by a
    /// homomorphism from `other` into `self`.
    pub fn entails(&self, other: &Cq) -> bool {
        homomorphism(&other.atoms, &self.atoms).is_some()
    }

    pub fn equivalent(&self, other: &Cq) -> bool {
        self.entails(other) && other.entails(self)
    }

    pub fn isomorphic_to(&self, other: &Cq) -> bool {
        isomorphic(&self.atoms, &other.atoms)
    }

    /// Stable, readable serialization: atoms in set order, variables renamed
    /// V0, V1, ... by first occurrence.
    pub fn canonical_string(&self) -> String {
        let mut names: Vec<(Variable, String)> = Vec::new();
        let mut parts = Vec::new();
        for atom in self.atoms.iter() {
            let mut args = Vec::new();
            for t in atom.args() {
                match t {
                    Term::Const(c) => args.push(c.to_string()),
                    Term::Var(v) => {
                        let name = match names.iter().find(|(w, _)| w == v) {
                            Some((_, n)) => n.clone(),
                            None => {
                                let n = format!("V{}", names.len());
                                names.push((v.clone(), n.clone()));
                                n
                            }
                        };
                        args.push(name);
                    }
                }
            }
            let pred = atom.predicate().name().to_string();
            parts.push(if args.is_empty() { pred } else { format!("{}({})", pred, args.join(",")) });
        }
        parts.join(", ")
    }

    /// Rename to fresh ids assigned by first occurrence over the sorted atom
    /// list, iterating until the printed form stabilizes. Engine pipelines
    /// canonicalize every generated CQ before storing it, which keeps stored
    /// CQs variable-disjoint from everything else in the session.
    pub fn canonicalized(&self, gen: &VarGen) -> Cq {
        let mut cur = self.rename_first_occurrence(gen);
        let mut cur_str = cur.canonical_string();
        // A handful of rounds settles any sort-order churn from renaming;
        // keep the lexicographically smallest form if a cycle shows up.
        for _ in 0..4 {
            let next = cur.rename_first_occurrence(gen);
            let next_str = next.canonical_string();
            if next_str == cur_str {
                break;
            }
            if next_str < cur_str {
                cur = next;
                cur_str = next_str;
            } else {
                break;
            }
        }
        cur
    }

    fn rename_first_occurrence(&self, gen: &VarGen) -> Cq {
        let mut renaming = Substitution::new();
        for atom in self.atoms.iter() {
            for t in atom.args() {
                if let Term::Var(v) = t {
                    if renaming.get(v).is_none() {
                        renaming.bind(v.clone(), Term::Var(gen.fresh()));
                    }
                }
            }
        }
        self.apply(&renaming)
    }
}

impl fmt::Display for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_string())
    }
}

impl fmt::Debug for Cq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atoms)
    }
}

/// A union of conjunctive queries: ordered, deduplicated by exact atom-set
/// equality. Semantic duplicates are the business of [`cover`].
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Ucq {
    cqs: Vec<Cq>,
}

impl Ucq {
    pub fn new() -> Self {
        Ucq::default()
    }

    pub fn push(&mut self, cq: Cq) -> bool {
        if self.cqs.iter().any(|c| c.atoms == cq.atoms) {
            false
        } else {
            self.cqs.push(cq);
            true
        }
    }

    pub fn cqs(&self) -> &[Cq] {
        &self.cqs
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cq> {
        self.cqs.iter()
    }

    pub fn len(&self) -> usize {
        self.cqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cqs.is_empty()
    }

    /// True if some disjunct maps into the (frozen) atom set `f`.
    pub fn holds_in(&self, f: &AtomSet) -> bool {
        self.cqs.iter().any(|cq| homomorphism(&cq.atoms, f).is_some())
    }

    /// Canonical strings of all disjuncts, sorted; the CLI's output order.
    pub fn canonical_strings(&self) -> Vec<String> {
        let mut out: Vec<String> = self.cqs.iter().map(Cq::canonical_string).collect();
        out.sort();
        out
    }
}

impl FromIterator<Cq> for Ucq {
    fn from_iter<I: IntoIterator<Item = Cq>>(iter: I) -> Self {
        let mut u = Ucq::new();
        for cq in iter {
            u.push(cq);
        }
        u
    }
}

impl fmt::Debug for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.cqs.iter()).finish()
    }
}

/// `q1 ⊨ q2` for UCQs: every disjunct of `q1` entails some disjunct of `q2`.
pub fn ucq_entails(q1: &Ucq, q2: &Ucq) -> bool {
    q1.iter().all(|a| q2.iter().any(|b| a.entails(b)))
}

pub fn ucq_equivalent(q1: &Ucq, q2: &Ucq) -> bool {
    ucq_entails(q1, q2) && ucq_entails(q2, q1)
}

/// `f1 ⊨ f2` for (possibly null-carrying) fact bases: f2 maps into f1.
pub fn fact_entails(f1: &AtomSet, f2: &AtomSet) -> bool {
    homomorphism(f2, f1).is_some()
}

/// Minimal equivalent subset of a UCQ.
///
/// Deterministic: disjuncts are visited in canonical-string order (ties keep
/// insertion order); a disjunct is dropped iff it is more specific than some
/// other surviving disjunct, with mutual entailment resolved in favor of the
/// canonically smaller one.
pub fn cover(u: &Ucq) -> Ucq {
    let mut items: Vec<Cq> = u.cqs.clone();
    items.sort_by_cached_key(Cq::canonical_string);
    let n = items.len();
    let mut retained = vec![true; n];
    for i in 0..n {
        if !retained[i] {
            continue;
        }
        for j in 0..n {
            if i == j || !retained[j] {
                continue;
            }
            if items[i].entails(&items[j]) {
                let equivalent = items[j].entails(&items[i]);
                if !equivalent || j < i {
                    retained[i] = false;
                    break;
                }
            }
        }
    }
    items
        .into_iter()
        .zip(retained)
        .filter_map(|(cq, keep)| keep.then_some(cq))
        .collect()
}

/// Disjuncts of `q1` that are not more specific than any disjunct of `q2`.
pub fn remove_more_specific(q1: &Ucq, q2: &Ucq) -> Ucq {
    q1.iter()
        .filter(|a| !q2.iter().any(|b| a.entails(b)))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::atom::{Atom, Predicate};

    fn var(id: u64) -> Term {
        Term::Var(Variable::new(id))
    }

    fn cq(spec: &[(&str, &[Term])]) -> Cq {
        Cq::new(
            spec.iter()
                .map(|(p, args)| Atom::new(Predicate::new(*p, args.len()), args.to_vec()))
                .collect(),
        )
    }

    /// t2–p–t1 path with `len` middle edges, on fresh ids above `base`.
    fn path(base: u64, len: u64) -> Cq {
        let mut atoms: Vec<(String, Vec<Term>)> = Vec::new();
        atoms.push(("t2".into(), vec![var(base)]));
        for i in 0..len {
            atoms.push(("p".into(), vec![var(base + i), var(base + i + 1)]));
        }
        atoms.push(("t1".into(), vec![var(base + len)]));
        Cq::new(
            atoms
                .into_iter()
                .map(|(p, args)| Atom::new(Predicate::new(p.as_str(), args.len()), args))
                .collect(),
        )
    }

    #[test]
    fn specialization_entails_generalization() {
        let general = cq(&[("p", &[var(0), var(1)])]);
        let loop_cq = cq(&[("p", &[var(5), var(5)])]);
        assert!(loop_cq.entails(&general));
        assert!(!general.entails(&loop_cq));
    }

    #[test]
    fn distinct_length_paths_are_incomparable() {
        let q1 = path(0, 1);
        let q2 = path(10, 2);
        assert!(!q1.entails(&q2));
        assert!(!q2.entails(&q1));
    }

    #[test]
    fn cover_keeps_most_general_and_is_minimal() {
        let general = cq(&[("p", &[var(0), var(1)])]);
        let loop_cq = cq(&[("p", &[var(5), var(5)])]);
        let other = cq(&[("q", &[var(7)])]);
        let u: Ucq = [loop_cq, general.clone(), other.clone()].into_iter().collect();
        let c = cover(&u);
        assert_eq!(c.len(), 2);
        assert!(c.iter().any(|q| q.equivalent(&general)));
        assert!(c.iter().any(|q| q.equivalent(&other)));
        // Equivalent to the input...
        assert!(ucq_equivalent(&u, &c));
        // ...and minimal: dropping any element loses equivalence.
        for skip in 0..c.len() {
            let smaller: Ucq = c
                .iter()
                .enumerate()
                .filter_map(|(i, q)| (i != skip).then(|| q.clone()))
                .collect();
            assert!(!ucq_equivalent(&u, &smaller));
        }
    }

    #[test]
    fn cover_breaks_equivalence_ties_deterministically() {
        let a = cq(&[("p", &[var(0), var(1)])]);
        let b = cq(&[("p", &[var(2), var(3)])]);
        let u: Ucq = [a, b].into_iter().collect();
        let c = cover(&u);
        assert_eq!(c.len(), 1);
        // Rerunning with the opposite insertion order picks the same shape.
        let a2 = cq(&[("p", &[var(2), var(3)])]);
        let b2 = cq(&[("p", &[var(0), var(1)])]);
        let u2: Ucq = [a2, b2].into_iter().collect();
        let c2 = cover(&u2);
        assert_eq!(c.cqs()[0].canonical_string(), c2.cqs()[0].canonical_string());
    }

    #[test]
    fn ucq_entailment_quantifies_correctly() {
        let general: Ucq = [cq(&[("p", &[var(0), var(1)])])].into_iter().collect();
        let mixed: Ucq = [
            cq(&[("p", &[var(2), var(2)])]),
            cq(&[("p", &[var(3), var(4)]), ("q", &[var(3)])]),
        ]
        .into_iter()
        .collect();
        assert!(ucq_entails(&mixed, &general));
        assert!(!ucq_entails(&general, &mixed));
    }

    #[test]
    fn canonical_string_renames_by_first_occurrence() {
        let q = cq(&[("p", &[var(41), var(7)])]);
        assert_eq!(q.canonical_string(), "p(V0,V1)");
        let q2 = cq(&[("p", &[var(3), var(3)]), ("s", &[var(3)])]);
        assert_eq!(q2.canonical_string(), "p(V0,V0), s(V0)");
    }

    #[test]
    fn canonicalized_is_stable_and_isomorphic() {
        let gen = VarGen::starting_at(100);
        // A shape whose naive renaming flips sort order: regression guard.
        let q = cq(&[
            ("m", &[var(9)]),
            ("n", &[var(1)]),
            ("p", &[var(1), Term::constant("a")]),
            ("p", &[var(9), Term::constant("a")]),
        ]);
        let c1 = q.canonicalized(&gen);
        assert!(c1.isomorphic_to(&q));
        let c2 = c1.canonicalized(&gen);
        assert_eq!(c1.canonical_string(), c2.canonical_string());
    }

    #[test]
    fn empty_cq_is_entailed_by_everything() {
        let empty = Cq::default();
        let q = cq(&[("p", &[var(0), var(1)])]);
        assert!(q.entails(&empty));
        assert!(!empty.entails(&q));
    }

    #[test]
    fn remove_more_specific_prefers_the_reference_side() {
        let general: Ucq = [cq(&[("p", &[var(0), var(1)])])].into_iter().collect();
        let incoming: Ucq = [
            cq(&[("p", &[var(2), var(3)])]),            // equivalent: dropped
            cq(&[("p", &[var(4), var(4)])]),            // more specific: dropped
            cq(&[("q", &[var(5)])]),                    // unrelated: kept
        ]
        .into_iter()
        .collect();
        let kept = remove_more_specific(&incoming, &general);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.cqs()[0].canonical_string(), "q(V0)");
    }
}
