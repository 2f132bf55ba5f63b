//! Piece-unifiers between conjunctive queries and rule-head disjuncts.
//!
//! A piece-unifier picks a nonempty subset Q′ of a CQ and a subset H′ of one
//! head disjunct, together with an admissible partition of their terms whose
//! associated substitution makes u(Q′) = u(H′). Classes holding an
//! existential variable may otherwise hold only variables of Q′ that do not
//! occur in the rest of the query (non-separating variables); anything else
//! would leak an existential into atoms that survive the rewriting step.
//!
//! A disjunctive piece-unifier aggregates one piece-unifier per head
//! disjunct, each built on its own fresh copy of some CQ of the input UCQ,
//! and requires the join of the part partitions to stay admissible. Applying
//! it yields the rule body plus every copy's un-unified remainder, all under
//! the joined substitution.
//!
//! Enumeration grows predicate-matched (query atom, head atom) pairs: every
//! subset of pairs induces the finest partition unifying those pairs, which
//! is checked against the conditions above. Coarser partitions over the same
//! pairs are specializations and are deliberately not produced — later
//! rewriting steps recover anything they would contribute.

use std::collections::BTreeSet;

use crate::model::{
    Atom, AtomSet, Cq, DisjunctiveRule, Substitution, Term, TermPartition, Ucq, VarGen, Variable,
};

/// A piece-unifier of one CQ with one head disjunct (`B → H_i`).
#[derive(Clone, Debug)]
pub struct PieceUnifier {
    /// The whole CQ the unifier was built on (a safe copy in disjunctive use).
    query: Cq,
    /// Q′: the unified query atoms, nonempty.
    q_sub: AtomSet,
    /// H′: the unified head atoms, nonempty.
    h_sub: AtomSet,
    /// Index of the head disjunct H′ was drawn from.
    disjunct: usize,
    /// Admissible partition on terms(Q′) ∪ terms(H′); rule variables are
    /// marked as preferred representatives.
    partition: TermPartition,
}

impl PieceUnifier {
    pub fn query(&self) -> &Cq {
        &self.query
    }

    pub fn q_sub(&self) -> &AtomSet {
        &self.q_sub
    }

    pub fn h_sub(&self) -> &AtomSet {
        &self.h_sub
    }

    pub fn disjunct(&self) -> usize {
        self.disjunct
    }

    pub fn partition(&self) -> &TermPartition {
        &self.partition
    }

    /// The query atoms that survive the unification: Q ∖ Q′.
    pub fn remainder(&self) -> AtomSet {
        self.query.atoms().difference(&self.q_sub)
    }

    /// The substitution associated with the partition.
    pub fn substitution(&self) -> Substitution {
        self.partition
            .associated_substitution()
            .expect("piece-unifier partitions are admissible by construction")
    }

    /// Variables of Q′ that also occur in Q ∖ Q′.
    pub fn separating_variables(&self) -> BTreeSet<Variable> {
        let inside = self.q_sub.variables();
        let outside = self.remainder().variables();
        inside.intersection(&outside).cloned().collect()
    }

    /// Re-check every defining condition against the rule this unifier was
    /// enumerated for. Enumeration asserts this in debug builds; tests lean
    /// on it as an independent oracle.
    pub fn validate(&self, rule: &DisjunctiveRule) -> Result<(), String> {
        if self.q_sub.is_empty() {
            return Err("Q′ is empty".into());
        }
        if !self.q_sub.is_subset(self.query.atoms()) {
            return Err("Q′ is not a subset of the query".into());
        }
        if self.disjunct >= rule.disjuncts().len() {
            return Err("disjunct index out of range".into());
        }
        let head = rule.disjunct(self.disjunct);
        if !self.h_sub.is_subset(head) {
            return Err("H′ is not a subset of the head disjunct".into());
        }
        if self.h_sub.is_empty() {
            return Err("H′ is empty".into());
        }
        if !self.query.variables().is_disjoint(&rule.variables()) {
            return Err("query shares variables with the rule".into());
        }
        // The partition must stay within terms(Q′) ∪ terms(H′).
        let domain: BTreeSet<Term> = self.q_sub.terms().union(&self.h_sub.terms()).cloned().collect();
        for class in self.partition.classes() {
            if let Some(t) = class.iter().find(|t| !domain.contains(t)) {
                return Err(format!("partition mentions foreign term {t}"));
            }
        }
        if !self.partition.is_admissible() {
            return Err("partition is not admissible".into());
        }
        // Condition 1: u(Q′) = u(H′) as atom sets.
        let u = self
            .partition
            .associated_substitution()
            .map_err(|e| e.to_string())?;
        if self.q_sub.apply(&u) != self.h_sub.apply(&u) {
            return Err("u(Q′) ≠ u(H′)".into());
        }
        // Condition 2: existential classes hold otherwise only non-separating
        // variables of Q′.
        let existentials = rule.existentials(self.disjunct);
        let q_vars = self.q_sub.variables();
        let separating = self.separating_variables();
        for class in self.partition.classes() {
            let in_class_exts: Vec<&Term> = class
                .iter()
                .filter(|t| t.as_var().is_some_and(|v| existentials.contains(v)))
                .collect();
            let Some(first) = in_class_exts.first() else {
                continue;
            };
            if in_class_exts.len() > 1 {
                return Err(format!("class merges two existential variables: {first}, ..."));
            }
            for t in class {
                if t == *first {
                    continue;
                }
                let ok = t
                    .as_var()
                    .is_some_and(|v| q_vars.contains(v) && !separating.contains(v));
                if !ok {
                    return Err(format!("existential class holds non-eligible term {t}"));
                }
            }
        }
        Ok(())
    }
}

/// All piece-unifiers of `query` with `B → H_i`, most-general per atom
/// pairing, deduplicated, in deterministic order.
///
/// The query must be variable-disjoint from the rule; pass a safe copy.
pub fn enumerate_piece_unifiers(
    query: &Cq,
    rule: &DisjunctiveRule,
    disjunct: usize,
) -> Vec<PieceUnifier> {
    assert!(
        query.variables().is_disjoint(&rule.variables()),
        "piece-unification requires the query to be variable-disjoint from the rule"
    );
    let head = rule.disjunct(disjunct);
    let mut pairs: Vec<(Atom, Atom)> = Vec::new();
    for qa in query.atoms().iter() {
        for ha in head.iter() {
            if qa.predicate() == ha.predicate() {
                pairs.push((qa.clone(), ha.clone()));
            }
        }
    }
    let mut base = TermPartition::new();
    base.add_priority(rule.variables());

    let mut search = Search {
        query,
        rule,
        disjunct,
        pairs,
        existentials: rule.existentials(disjunct),
        rule_vars: rule.variables(),
        seen: BTreeSet::new(),
        out: Vec::new(),
    };
    let mut chosen = Vec::new();
    search.dfs(0, &base, &mut chosen);
    search.out
}

type UnifierKey = (Vec<Atom>, Vec<Atom>, Vec<Vec<Term>>);

struct Search<'a> {
    query: &'a Cq,
    rule: &'a DisjunctiveRule,
    disjunct: usize,
    pairs: Vec<(Atom, Atom)>,
    existentials: BTreeSet<Variable>,
    rule_vars: BTreeSet<Variable>,
    seen: BTreeSet<UnifierKey>,
    out: Vec<PieceUnifier>,
}

impl Search<'_> {
    fn dfs(&mut self, idx: usize, partition: &TermPartition, chosen: &mut Vec<usize>) {
        if idx == self.pairs.len() {
            self.emit(partition, chosen);
            return;
        }
        // Exclude pairs[idx].
        self.dfs(idx + 1, partition, chosen);
        // Include pairs[idx]: merge argument terms positionwise.
        let (qa, ha) = self.pairs[idx].clone();
        let mut grown = partition.clone();
        for (tq, th) in qa.args().iter().zip(ha.args()) {
            grown.merge(tq, th);
        }
        if self.doomed(&grown) {
            return;
        }
        chosen.push(idx);
        self.dfs(idx + 1, &grown, chosen);
        chosen.pop();
    }

    /// Violations that can only get worse as classes grow: a class with two
    /// constants, or an existential sharing a class with a constant, a
    /// non-existential rule variable, or a second existential. Separating
    /// variables are not monotone (Q′ still grows), so they wait for emit.
    fn doomed(&self, partition: &TermPartition) -> bool {
        if !partition.is_admissible() {
            return true;
        }
        for class in partition.classes() {
            let mut exts = 0usize;
            let mut poison = false;
            for t in class {
                match t.as_var() {
                    Some(v) if self.existentials.contains(v) => exts += 1,
                    Some(v) if self.rule_vars.contains(v) => poison = true,
                    Some(_) => {}
                    None => poison = true,
                }
            }
            if exts >= 2 || (exts == 1 && poison) {
                return true;
            }
        }
        false
    }

    fn emit(&mut self, partition: &TermPartition, chosen: &[usize]) {
        if chosen.is_empty() {
            return;
        }
        let q_sub: AtomSet = chosen.iter().map(|&i| self.pairs[i].0.clone()).collect();
        let h_sub: AtomSet = chosen.iter().map(|&i| self.pairs[i].1.clone()).collect();
        let candidate = PieceUnifier {
            query: self.query.clone(),
            q_sub,
            h_sub,
            disjunct: self.disjunct,
            partition: partition.clone(),
        };
        // Full condition 2, now that Q′ is final.
        let q_vars = candidate.q_sub.variables();
        let separating = candidate.separating_variables();
        for class in partition.classes() {
            let has_ext = class
                .iter()
                .any(|t| t.as_var().is_some_and(|v| self.existentials.contains(v)));
            if !has_ext {
                continue;
            }
            let all_eligible = class.iter().all(|t| {
                t.as_var().is_some_and(|v| {
                    self.existentials.contains(v) || (q_vars.contains(v) && !separating.contains(v))
                })
            });
            if !all_eligible {
                return;
            }
        }
        let key = (
            candidate.q_sub.iter().cloned().collect::<Vec<_>>(),
            candidate.h_sub.iter().cloned().collect::<Vec<_>>(),
            partition.classes().iter().map(|c| c.iter().cloned().collect()).collect::<Vec<Vec<Term>>>(),
        );
        if !self.seen.insert(key) {
            return;
        }
        debug_assert_eq!(candidate.validate(self.rule), Ok(()));
        self.out.push(candidate);
    }
}

/// β for a conjunctive rule: u(B) ∪ u(Q ∖ Q′).
pub fn apply_beta_conjunctive(rule: &DisjunctiveRule, mu: &PieceUnifier) -> Cq {
    assert!(rule.is_conjunctive(), "conjunctive β needs a single-head rule");
    let u = mu.substitution();
    Cq::new(rule.body().apply(&u).union(&mu.remainder().apply(&u)))
}

/// A disjunctive piece-unifier: one part per head disjunct, each on its own
/// fresh copy of a CQ from the input UCQ, with an admissible joined
/// partition.
#[derive(Clone, Debug)]
pub struct DisjunctivePieceUnifier {
    rule: DisjunctiveRule,
    rule_idx: usize,
    /// parts[i] unifies disjunct i; its `query` is the safe copy used.
    parts: Vec<PieceUnifier>,
    /// sources[i] identifies the CQ parts[i] copied, as given by the caller.
    sources: Vec<usize>,
    joined: TermPartition,
}

impl DisjunctivePieceUnifier {
    pub fn rule(&self) -> &DisjunctiveRule {
        &self.rule
    }

    pub fn rule_idx(&self) -> usize {
        self.rule_idx
    }

    pub fn parts(&self) -> &[PieceUnifier] {
        &self.parts
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn joined(&self) -> &TermPartition {
        &self.joined
    }

    /// Do all parts unify exactly one query atom? The restriction that is
    /// complete for conjunctive rules but loses results on disjunctive ones.
    pub fn is_single_piece(&self) -> bool {
        self.parts.iter().all(|p| p.q_sub().len() == 1)
    }

    /// Re-check the defining conditions; tests use this as an oracle.
    pub fn validate(&self) -> Result<(), String> {
        if self.parts.len() != self.rule.disjuncts().len() {
            return Err("one part per head disjunct is required".into());
        }
        let mut seen_vars: BTreeSet<Variable> = self.rule.variables();
        for (i, part) in self.parts.iter().enumerate() {
            if part.disjunct != i {
                return Err(format!("part {i} targets disjunct {}", part.disjunct));
            }
            part.validate(&self.rule)?;
            let vars = part.query.variables();
            if !vars.is_disjoint(&seen_vars) {
                return Err(format!("copy {i} shares variables with another copy or the rule"));
            }
            seen_vars.extend(vars);
        }
        let rejoined = self
            .parts
            .iter()
            .fold(TermPartition::new(), |acc, p| acc.join(p.partition()));
        if rejoined != self.joined {
            return Err("joined partition is not the join of the part partitions".into());
        }
        if !self.joined.is_admissible() {
            return Err("joined partition is not admissible".into());
        }
        Ok(())
    }
}

/// All disjunctive piece-unifiers of a UCQ with one rule.
///
/// Each CQ is safe-copied once per disjunct; every combination of one
/// per-disjunct unifier whose joined partition is admissible is emitted.
pub fn enumerate_disjunctive_piece_unifiers(
    ucq: &Ucq,
    rule: &DisjunctiveRule,
    rule_idx: usize,
    gen: &VarGen,
) -> Vec<DisjunctivePieceUnifier> {
    let entries: Vec<(usize, &Cq)> = ucq.iter().enumerate().collect();
    enumerate_disjunctive_piece_unifiers_filtered(&entries, rule, rule_idx, None, gen)
}

/// As [`enumerate_disjunctive_piece_unifiers`], over caller-identified CQs.
///
/// When `new_filter` is set, only combinations where at least one part copies
/// a CQ whose id is in the filter are emitted — the bookkeeping behind "only
/// consider unifiers that involve a CQ generated at the previous step".
pub fn enumerate_disjunctive_piece_unifiers_filtered(
    entries: &[(usize, &Cq)],
    rule: &DisjunctiveRule,
    rule_idx: usize,
    new_filter: Option<&BTreeSet<usize>>,
    gen: &VarGen,
) -> Vec<DisjunctivePieceUnifier> {
    let n = rule.disjuncts().len();
    let mut per_disjunct: Vec<Vec<(usize, PieceUnifier)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut cands = Vec::new();
        for (id, cq) in entries {
            let (copy, _) = cq.safe_copy(gen);
            for pu in enumerate_piece_unifiers(&copy, rule, i) {
                cands.push((*id, pu));
            }
        }
        if cands.is_empty() {
            // Some disjunct cannot contribute, so no disjunctive unifier
            // exists for this rule at all.
            return Vec::new();
        }
        per_disjunct.push(cands);
    }

    let mut out = Vec::new();
    let mut combo = vec![0usize; n];
    loop {
        let involves_new = new_filter
            .is_none_or(|f| combo.iter().enumerate().any(|(i, &j)| f.contains(&per_disjunct[i][j].0)));
        if involves_new {
            let joined = combo
                .iter()
                .enumerate()
                .fold(TermPartition::new(), |acc, (i, &j)| acc.join(per_disjunct[i][j].1.partition()));
            if joined.is_admissible() {
                let mu = DisjunctivePieceUnifier {
                    rule: rule.clone(),
                    rule_idx,
                    parts: combo.iter().enumerate().map(|(i, &j)| per_disjunct[i][j].1.clone()).collect(),
                    sources: combo.iter().enumerate().map(|(i, &j)| per_disjunct[i][j].0).collect(),
                    joined,
                };
                debug_assert_eq!(mu.validate(), Ok(()));
                out.push(mu);
            }
        }
        // Odometer step through the cartesian product.
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            combo[pos] += 1;
            if combo[pos] < per_disjunct[pos].len() {
                break;
            }
            combo[pos] = 0;
        }
    }
}

/// β∨: the rule body plus every copy's remainder, under the joined
/// substitution.
pub fn apply_beta(mu: &DisjunctivePieceUnifier) -> Cq {
    let u = mu
        .joined
        .associated_substitution()
        .expect("joined partitions are admissible by construction");
    let mut atoms = mu.rule.body().apply(&u);
    for part in &mu.parts {
        atoms = atoms.union(&part.remainder().apply(&u));
    }
    Cq::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::parse;

    /// Parse, returning (rules-with-separated-existentials, queries, gen).
    fn fixture(input: &str) -> (crate::model::RuleSet, Vec<Cq>, VarGen) {
        let doc = parse(input).expect("fixture parses");
        let gen = doc.var_gen();
        let queries = doc.queries().iter().map(|q| q.cq.clone()).collect();
        (doc.rules().clone(), queries, gen)
    }

    const EXISTENTIAL_PAIR_RULE: &str = "@rules\nr1: p(X,Y) -> p1(X,Z), p2(Y,Z).\n";

    #[test]
    fn separating_variable_blocks_unification() {
        let (rules, queries, _gen) = fixture(&format!(
            "{EXISTENTIAL_PAIR_RULE}@queries\nq1: ? :- p1(U,V), s(V).\n"
        ));
        let found = enumerate_piece_unifiers(&queries[0], rules.get(0), 0);
        assert!(found.is_empty(), "V is separating yet must unify with the existential");
    }

    #[test]
    fn single_atom_unifier_matches_hand_computation() {
        let (rules, queries, _gen) = fixture(&format!(
            "{EXISTENTIAL_PAIR_RULE}@queries\nq2: ? :- p1(U,V), s(U).\n"
        ));
        let rule = rules.get(0);
        let found = enumerate_piece_unifiers(&queries[0], rule, 0);
        assert_eq!(found.len(), 1);
        let mu = &found[0];
        assert_eq!(mu.validate(rule), Ok(()));
        assert_eq!(mu.q_sub().len(), 1);
        assert_eq!(mu.h_sub().len(), 1);
        // Partition is {{x,u},{z,v}} (body-only y stays out of the domain).
        let classes: Vec<BTreeSet<String>> = mu
            .partition()
            .classes()
            .iter()
            .map(|c| c.iter().map(|t| t.to_string()).collect())
            .collect();
        let want = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(classes.len(), 2);
        assert!(classes.contains(&want(&["X", "U"])));
        assert!(classes.contains(&want(&["Z", "V"])));
        // β rewrites to the rule body plus the remainder, on rule variables.
        let beta = apply_beta_conjunctive(rule, mu);
        assert_eq!(beta.canonical_string(), "p(V0,V1), s(V0)");
    }

    #[test]
    fn merging_unifier_matches_hand_computation() {
        let (rules, queries, _gen) = fixture(&format!(
            "{EXISTENTIAL_PAIR_RULE}@queries\nq3: ? :- p1(U,V), p2(U,W), p1(T,V), s(T).\n"
        ));
        let rule = rules.get(0);
        let found = enumerate_piece_unifiers(&queries[0], rule, 0);
        // One unifier uses the whole head with partition {{x,y,t,u},{z,v,w}}.
        let full = found
            .iter()
            .find(|mu| mu.q_sub().len() == 3 && mu.h_sub().len() == 2)
            .expect("the three-atom unifier must be enumerated");
        let classes: Vec<BTreeSet<String>> = full
            .partition()
            .classes()
            .iter()
            .map(|c| c.iter().map(|t| t.to_string()).collect())
            .collect();
        let want = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(classes.len(), 2);
        assert!(classes.contains(&want(&["X", "Y", "T", "U"])));
        assert!(classes.contains(&want(&["Z", "V", "W"])));
        let beta = apply_beta_conjunctive(rule, full);
        assert_eq!(beta.canonical_string(), "p(V0,V0), s(V0)");
        for mu in &found {
            assert_eq!(mu.validate(rule), Ok(()));
        }
    }

    #[test]
    fn disjunctive_unifier_needs_two_copies_of_the_same_cq() {
        let (rules, queries, gen) = fixture(
            "@rules\nr: p(X,Y) -> r(X,Z1) | r(Y,Z2).\n@queries\nq: ? :- s(U), r(U,V).\n",
        );
        let mut ucq = Ucq::new();
        ucq.push(queries[0].clone());
        let found = enumerate_disjunctive_piece_unifiers(&ucq, rules.get(0), 0, &gen);
        assert_eq!(found.len(), 1);
        let mu = &found[0];
        assert_eq!(mu.validate(), Ok(()));
        assert_eq!(mu.sources(), &[0, 0], "both parts copy the single CQ");
        let copy_vars_0 = mu.parts()[0].query().variables();
        let copy_vars_1 = mu.parts()[1].query().variables();
        assert!(copy_vars_0.is_disjoint(&copy_vars_1));
        assert_eq!(apply_beta(mu).canonical_string(), "p(V0,V1), s(V0), s(V1)");
    }

    #[test]
    fn coloring_cycle_needs_a_multi_atom_part() {
        let (rules, queries, gen) = fixture(
            "@rules\ncol: v(X) -> g(X) | r(X).\n@queries\nq1: ? :- g(U), e(U,W), g(W).\nq2: ? :- r(U), e(U,W), r(W).\n",
        );
        let mut ucq = Ucq::new();
        ucq.push(queries[0].clone());
        ucq.push(queries[1].clone());
        let found = enumerate_disjunctive_piece_unifiers(&ucq, rules.get(0), 0, &gen);
        // Per disjunct: three unifiers on the matching CQ (each endpoint atom
        // alone, or both together), none on the other CQ.
        assert_eq!(found.len(), 9);
        let loops: Vec<&DisjunctivePieceUnifier> = found
            .iter()
            .filter(|mu| apply_beta(mu).canonical_string() == "e(V0,V0), v(V0)")
            .collect();
        assert_eq!(loops.len(), 1, "exactly one unifier folds the edge onto itself");
        assert!(!loops[0].is_single_piece());
        assert!(loops[0].parts().iter().all(|p| p.q_sub().len() == 2));
        // Single-piece unifiers never produce the loop CQ.
        for mu in found.iter().filter(|mu| mu.is_single_piece()) {
            assert_ne!(apply_beta(mu).canonical_string(), "e(V0,V0), v(V0)");
        }
        for mu in &found {
            assert_eq!(mu.validate(), Ok(()));
        }
    }

    #[test]
    fn new_filter_keeps_combinations_with_a_new_source() {
        let (rules, queries, gen) = fixture(
            "@rules\nnf: p(X,Y) -> t1(X) | t2(Y).\n@queries\nq: ? :- t1(U), t2(U).\npath: ? :- t2(A), p(A,B), t1(B).\n",
        );
        let entries: Vec<(usize, &Cq)> = vec![(0, &queries[0]), (1, &queries[1])];
        let rule = rules.get(0);
        let all =
            enumerate_disjunctive_piece_unifiers_filtered(&entries, rule, 0, None, &gen);
        assert_eq!(all.len(), 4, "two t1 candidates × two t2 candidates");
        let only_new: BTreeSet<usize> = [1].into();
        let fresh = enumerate_disjunctive_piece_unifiers_filtered(
            &entries,
            rule,
            0,
            Some(&only_new),
            &gen,
        );
        assert_eq!(fresh.len(), 3, "the copy-of-q-only combination is filtered out");
        assert!(fresh.iter().all(|mu| mu.sources().contains(&1)));
        let nothing_new: BTreeSet<usize> = [7].into();
        let none = enumerate_disjunctive_piece_unifiers_filtered(
            &entries,
            rule,
            0,
            Some(&nothing_new),
            &gen,
        );
        assert!(none.is_empty());
    }

    #[test]
    fn unifier_over_empty_ucq_is_empty() {
        let (rules, _queries, gen) = fixture("@rules\ncol: v(X) -> g(X) | r(X).\n");
        let ucq = Ucq::new();
        assert!(enumerate_disjunctive_piece_unifiers(&ucq, rules.get(0), 0, &gen).is_empty());
    }

    #[test]
    fn validate_rejects_tampered_unifiers() {
        let (rules, queries, _gen) = fixture(&format!(
            "{EXISTENTIAL_PAIR_RULE}@queries\nq2: ? :- p1(U,V), s(U).\n"
        ));
        let rule = rules.get(0);
        let mut mu = enumerate_piece_unifiers(&queries[0], rule, 0).remove(0);
        // Grow Q′ with the s-atom: u(Q′) = u(H′) breaks.
        mu.q_sub = queries[0].atoms().clone();
        assert!(mu.validate(rule).is_err());
    }

    #[test]
    fn constants_block_inadmissible_joins() {
        // Two parts force the frontier variable onto two different constants.
        let (rules, queries, gen) = fixture(
            "@rules\nnf: p(X,Y) -> t1(X) | t2(X).\n@queries\nqa: ? :- t1(a), t2(b).\n",
        );
        let mut ucq = Ucq::new();
        ucq.push(queries[0].clone());
        let found = enumerate_disjunctive_piece_unifiers(&ucq, rules.get(0), 0, &gen);
        assert!(found.is_empty(), "a and b cannot both become X");
    }
}
