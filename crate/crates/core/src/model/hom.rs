//! Homomorphism search between atom sets.
//!
//! A homomorphism maps the variables of the source set to terms of the target
//! set so that every source atom lands in the target set; constants are fixed
//! and target variables act as frozen values. The search is backtracking with
//! forward checking: at every node the remaining source atom with the fewest
//! surviving candidate target atoms is matched next, and a dead remaining atom
//! fails the node immediately. Candidate order follows the target set order,
//! so results are deterministic.

use std::collections::BTreeSet;

use super::atom::{Atom, AtomSet};
use super::subst::Substitution;
use super::term::Term;

/// First homomorphism from `source` into `target`, if any.
pub fn homomorphism(source: &AtomSet, target: &AtomSet) -> Option<Substitution> {
    Searcher::new(source, target).first(Substitution::new())
}

/// First homomorphism extending `seed` (whose bindings are kept verbatim).
pub fn homomorphism_extending(
    seed: &Substitution,
    source: &AtomSet,
    target: &AtomSet,
) -> Option<Substitution> {
    Searcher::new(source, target).first(seed.clone())
}

/// All homomorphisms from `source` into `target`, deduplicated and in
/// lexicographic binding order.
pub fn all_homomorphisms(source: &AtomSet, target: &AtomSet) -> Vec<Substitution> {
    // The search space is finite, so the uncapped call cannot fail.
    all_homomorphisms_capped(source, target, usize::MAX).unwrap()
}

/// Like [`all_homomorphisms`], giving up with `None` once the search has
/// visited more than `node_cap` nodes.
pub fn all_homomorphisms_capped(
    source: &AtomSet,
    target: &AtomSet,
    node_cap: usize,
) -> Option<Vec<Substitution>> {
    let mut s = Searcher::new(source, target);
    s.node_cap = node_cap;
    let mut out = BTreeSet::new();
    let complete = s.collect(Substitution::new(), &mut out);
    complete.then(|| out.into_iter().collect())
}

/// True when the two sets are equal up to a variable renaming.
pub fn isomorphic(a: &AtomSet, b: &AtomSet) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut s = Searcher::new(a, b);
    s.vars_to_vars_injective = true;
    s.require_surjective_atoms = true;
    s.first(Substitution::new()).is_some()
}

/// Working bindings during search. A variable mapped to itself carries real
/// information (it must stay the identity), but `Substitution` deliberately
/// drops identity pairs, so those variables are tracked separately as pinned.
#[derive(Clone)]
struct Bindings {
    map: Substitution,
    pinned: BTreeSet<crate::model::term::Variable>,
}

impl Bindings {
    fn seeded(seed: Substitution) -> Self {
        Bindings { map: seed, pinned: BTreeSet::new() }
    }

    fn image(&self, v: &crate::model::term::Variable) -> Option<Term> {
        if let Some(t) = self.map.get(v) {
            Some(t.clone())
        } else if self.pinned.contains(v) {
            Some(Term::Var(v.clone()))
        } else {
            None
        }
    }

    fn set(&mut self, v: crate::model::term::Variable, t: Term) {
        if Term::Var(v.clone()) == t {
            self.pinned.insert(v);
        } else {
            self.map.bind(v, t);
        }
    }

    /// Is some decided variable other than `v` already mapped to `t`?
    fn image_taken(&self, v: &crate::model::term::Variable, t: &Term) -> bool {
        self.map.iter().any(|(w, img)| w != v && img == t)
            || self
                .pinned
                .iter()
                .any(|w| w != v && Term::Var(w.clone()) == *t)
    }
}

struct Searcher<'a> {
    source: Vec<&'a Atom>,
    target: &'a AtomSet,
    vars_to_vars_injective: bool,
    require_surjective_atoms: bool,
    node_cap: usize,
    nodes: usize,
}

impl<'a> Searcher<'a> {
    fn new(source: &'a AtomSet, target: &'a AtomSet) -> Self {
        Searcher {
            source: source.iter().collect(),
            target,
            vars_to_vars_injective: false,
            require_surjective_atoms: false,
            node_cap: usize::MAX,
            nodes: 0,
        }
    }

    fn first(&mut self, seed: Substitution) -> Option<Substitution> {
        let mut found = None;
        self.run(Bindings::seeded(seed), self.source.clone(), &mut |h| {
            found = Some(h);
            false
        });
        found
    }

    /// Returns false if the node cap was hit (results incomplete).
    fn collect(&mut self, seed: Substitution, out: &mut BTreeSet<Substitution>) -> bool {
        self.run(Bindings::seeded(seed), self.source.clone(), &mut |h| {
            out.insert(h);
            true
        })
    }

    /// Core backtracking loop. The visitor returns false to stop the search.
    /// Returns false when stopped early (by the visitor or the node cap).
    fn run(
        &mut self,
        bindings: Bindings,
        remaining: Vec<&'a Atom>,
        visit: &mut dyn FnMut(Substitution) -> bool,
    ) -> bool {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return false;
        }
        if remaining.is_empty() {
            if self.require_surjective_atoms {
                let image: AtomSet =
                    self.source.iter().map(|a| a.apply(&bindings.map)).collect();
                if image.len() != self.target.len() || !image.is_subset(self.target) {
                    return true;
                }
            }
            return visit(bindings.map);
        }
        // Forward checking: compute surviving candidates for every remaining
        // atom and branch on the most constrained one.
        let mut best: Option<(usize, Vec<&Atom>)> = None;
        for (i, atom) in remaining.iter().enumerate() {
            let cands: Vec<&Atom> = self
                .target
                .iter()
                .filter(|t| self.matches(atom, t, &bindings).is_some())
                .collect();
            let n = cands.len();
            if best.as_ref().map_or(true, |(_, b)| n < b.len()) {
                let dead = n == 0;
                best = Some((i, cands));
                if dead {
                    break;
                }
            }
        }
        let (idx, candidates) = best.unwrap();
        if candidates.is_empty() {
            return true;
        }
        let mut rest = remaining.clone();
        let atom = rest.remove(idx);
        for cand in candidates {
            if let Some(extended) = self.matches(atom, cand, &bindings) {
                if !self.run(extended, rest.clone(), visit) {
                    return false;
                }
            }
        }
        true
    }

    /// Try to map `atom` onto `cand` under `bindings`; `Some` holds the
    /// extended bindings.
    fn matches(&self, atom: &Atom, cand: &Atom, bindings: &Bindings) -> Option<Bindings> {
        if atom.predicate() != cand.predicate() {
            return None;
        }
        let mut ext = bindings.clone();
        for (s, t) in atom.args().iter().zip(cand.args()) {
            match s {
                Term::Const(_) => {
                    if s != t {
                        return None;
                    }
                }
                Term::Var(v) => match ext.image(v) {
                    Some(bound) => {
                        if bound != *t {
                            return None;
                        }
                    }
                    None => {
                        if self.vars_to_vars_injective {
                            if !t.is_var() || ext.image_taken(v, t) {
                                return None;
                            }
                        }
                        ext.set(v.clone(), t.clone());
                    }
                },
            }
        }
        Some(ext)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::atom::Predicate;
    use crate::model::term::Variable;

    fn var(id: u64) -> Term {
        Term::Var(Variable::new(id))
    }

    fn atoms(spec: &[(&str, &[Term])]) -> AtomSet {
        spec.iter()
            .map(|(p, args)| Atom::new(Predicate::new(*p, args.len()), args.to_vec()))
            .collect()
    }

    /// Brute-force oracle: try every total map from source variables to
    /// target terms and keep the ones that are homomorphisms.
    fn oracle(source: &AtomSet, target: &AtomSet) -> BTreeSet<Substitution> {
        let vars: Vec<Variable> = source.variables().into_iter().collect();
        let terms: Vec<Term> = target.terms().into_iter().collect();
        let mut found = BTreeSet::new();
        if terms.is_empty() {
            if source.variables().is_empty() && source.is_subset(target) {
                found.insert(Substitution::new());
            }
            return found;
        }
        let mut counters = vec![0usize; vars.len()];
        loop {
            let sub: Substitution = vars
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), terms[counters[i]].clone()))
                .collect();
            if source.apply(&sub).is_subset(target) {
                found.insert(sub);
            }
            // Odometer increment.
            let mut i = 0;
            loop {
                if i == counters.len() {
                    return found;
                }
                counters[i] += 1;
                if counters[i] < terms.len() {
                    break;
                }
                counters[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn no_hom_when_constants_break_the_path() {
        // {p(a,b)} has no image in {p(a,c), p(c,b)}.
        let a = Term::constant("a");
        let b = Term::constant("b");
        let c = Term::constant("c");
        let source = atoms(&[("p", &[a.clone(), b.clone()])]);
        let target = atoms(&[("p", &[a, c.clone()]), ("p", &[c, b])]);
        assert!(homomorphism(&source, &target).is_none());
        assert!(oracle(&source, &target).is_empty());
    }

    #[test]
    fn search_agrees_with_brute_force_oracle() {
        let a = Term::constant("a");
        let cases: Vec<(AtomSet, AtomSet)> = vec![
            (
                atoms(&[("p", &[var(0), var(1)]), ("p", &[var(1), var(2)])]),
                atoms(&[("p", &[a.clone(), a.clone()])]),
            ),
            (
                atoms(&[("p", &[var(0), var(1)])]),
                atoms(&[("p", &[var(10), var(11)]), ("p", &[var(11), var(10)])]),
            ),
            (
                atoms(&[("e", &[var(0), var(1)]), ("e", &[var(1), var(0)])]),
                atoms(&[
                    ("e", &[var(7), var(8)]),
                    ("e", &[var(8), var(9)]),
                    ("e", &[var(9), var(7)]),
                ]),
            ),
            (
                atoms(&[("q", &[var(0)]), ("r", &[var(0)])]),
                atoms(&[("q", &[a.clone()]), ("r", &[var(5)])]),
            ),
        ];
        for (source, target) in cases {
            let got: BTreeSet<Substitution> =
                all_homomorphisms(&source, &target).into_iter().collect();
            // The oracle enumerates total maps; the search drops identity
            // bindings, so compare by the applied images instead.
            let got_images: BTreeSet<AtomSet> =
                got.iter().map(|h| source.apply(h)).collect();
            let want_images: BTreeSet<AtomSet> =
                oracle(&source, &target).iter().map(|h| source.apply(h)).collect();
            assert_eq!(got_images, want_images, "images differ for {source} -> {target}");
            // And every reported map must actually be a homomorphism.
            for h in &got {
                assert!(source.apply(h).is_subset(&target));
            }
        }
    }

    #[test]
    fn identity_bindings_stay_consistent() {
        // X0 must map to itself for the p-atom, which blocks q(X0) -> q(b).
        let a = Term::constant("a");
        let source = atoms(&[("p", &[var(0), a.clone()]), ("q", &[var(0)])]);
        let bad_target = atoms(&[("p", &[var(0), a.clone()]), ("q", &[Term::constant("b")])]);
        assert!(homomorphism(&source, &bad_target).is_none());

        let good_target = atoms(&[("p", &[var(0), a]), ("q", &[var(0)])]);
        let h = homomorphism(&source, &good_target).unwrap();
        assert!(source.apply(&h).is_subset(&good_target));
    }

    #[test]
    fn extension_respects_seed() {
        let source = atoms(&[("g", &[var(0)])]);
        let target = atoms(&[("g", &[Term::constant("a")]), ("g", &[Term::constant("b")])]);
        let mut seed = Substitution::new();
        seed.bind(Variable::new(0), Term::constant("b"));
        let h = homomorphism_extending(&seed, &source, &target).unwrap();
        assert_eq!(h.apply_term(&var(0)), Term::constant("b"));

        seed = Substitution::new();
        seed.bind(Variable::new(0), Term::constant("z"));
        assert!(homomorphism_extending(&seed, &source, &target).is_none());
    }

    #[test]
    fn isomorphism_is_renaming_only() {
        let p1 = atoms(&[("p", &[var(0), var(1)])]);
        let p2 = atoms(&[("p", &[var(5), var(9)])]);
        let p3 = atoms(&[("p", &[var(5), var(5)])]);
        assert!(isomorphic(&p1, &p2));
        assert!(!isomorphic(&p1, &p3));
        assert!(!isomorphic(&p3, &p1));

        // Hom-equivalent but not isomorphic: extra atom collapses.
        let big = atoms(&[("p", &[var(0), var(1)]), ("p", &[var(2), var(3)])]);
        assert!(!isomorphic(&p1, &big));
    }

    #[test]
    fn cap_detects_truncation() {
        let source = atoms(&[("p", &[var(0), var(1)]), ("p", &[var(1), var(2)])]);
        let target = atoms(&[
            ("p", &[var(10), var(11)]),
            ("p", &[var(11), var(12)]),
            ("p", &[var(12), var(10)]),
        ]);
        assert!(all_homomorphisms_capped(&source, &target, 2).is_none());
        assert!(all_homomorphisms_capped(&source, &target, 100_000).is_some());
    }
}
