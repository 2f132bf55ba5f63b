//! Breadth-first rewriting, the unpruned one-step reference operator, and
//! source-projected rewriting for mappings.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::{
    cover, remove_more_specific, Cq, Mapping, RuleSet, Symbol, Ucq, VarGen,
};

use super::unify::{
    apply_beta, enumerate_disjunctive_piece_unifiers, enumerate_disjunctive_piece_unifiers_filtered,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("query mentions source predicate {0}; mapping queries must be on target predicates")]
    InvalidQuery(String),
}

/// Safety rails for a rewriting run. The procedure need not terminate, so
/// every run is bounded; tripping a bound is a status, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteBudget {
    /// Generate/prune rounds to run before giving up.
    pub max_iterations: usize,
    /// Generated CQs larger than this are dropped (and completeness with
    /// them).
    pub max_cq_atoms: usize,
    /// Total number of unifier applications across the whole run.
    pub max_generated: usize,
    /// Wall-clock limit, checked between unifier applications.
    pub time_limit: Option<Duration>,
}

impl Default for RewriteBudget {
    fn default() -> Self {
        RewriteBudget {
            max_iterations: 10,
            max_cq_atoms: 24,
            max_generated: 100_000,
            time_limit: None,
        }
    }
}

impl RewriteBudget {
    /// A budget that differs from the default only in the iteration count.
    pub fn iterations(n: usize) -> Self {
        RewriteBudget { max_iterations: n, ..RewriteBudget::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteStatus {
    /// The final round produced nothing new and nothing was ever dropped:
    /// the result is a sound and complete rewriting.
    Complete,
    /// A bound tripped (or a CQ was dropped for size); the result is sound
    /// but may be incomplete.
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct RewriteOutcome {
    pub status: RewriteStatus,
    /// The maintained cover: pairwise hom-incomparable CQs.
    pub result: Ucq,
    /// Generate/prune rounds executed.
    pub iterations: usize,
    /// Unifier applications performed.
    pub generated_count: usize,
    pub elapsed: Duration,
}

/// Extra switches for [`rewrite_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RewriteOptions {
    /// Restrict every part to unify exactly one query atom. Complete for
    /// conjunctive rules, incomplete for disjunctive ones; kept to make that
    /// incompleteness observable.
    pub single_piece: bool,
}

/// Breadth-first rewriting: start from the cover of the input, repeatedly
/// apply every disjunctive piece-unifier that involves at least one CQ
/// added in the previous round, prune each batch against the accumulated
/// set (dropping the newcomer on equivalence), and stop when a round adds
/// nothing.
pub fn rewrite(q: &Ucq, rules: &RuleSet, budget: &RewriteBudget, gen: &VarGen) -> RewriteOutcome {
    rewrite_with(q, rules, budget, RewriteOptions::default(), gen)
}

pub fn rewrite_with(
    q: &Ucq,
    rules: &RuleSet,
    budget: &RewriteBudget,
    options: RewriteOptions,
    gen: &VarGen,
) -> RewriteOutcome {
    assert_generator_dominates(rules, gen);
    let start = Instant::now();

    // Stored CQs carry a stable id so "involves a CQ from the previous
    // round" survives any pruning of their neighbours. Everything stored is
    // canonically renamed to fresh ids, keeping stored CQs variable-disjoint
    // from the rules and from each other.
    let mut next_id = 0usize;
    let mut qstar: Vec<(usize, Cq)> = Vec::new();
    let mut new_ids: BTreeSet<usize> = BTreeSet::new();
    for cq in cover(q).iter() {
        qstar.push((next_id, cq.canonicalized(gen)));
        new_ids.insert(next_id);
        next_id += 1;
    }

    let mut iterations = 0usize;
    let mut generated_count = 0usize;
    let mut truncated = false;

    let status = 'run: loop {
        if new_ids.is_empty() {
            break if truncated { RewriteStatus::BudgetExhausted } else { RewriteStatus::Complete };
        }
        if iterations >= budget.max_iterations || overtime(start, budget) {
            break RewriteStatus::BudgetExhausted;
        }
        iterations += 1;

        // Generate: β∨ over every new unifier, against the current set.
        let mut batch: Vec<Cq> = Vec::new();
        let mut tripped = false;
        'generate: for (rule_idx, rule) in rules.iter().enumerate() {
            let entries: Vec<(usize, &Cq)> = qstar.iter().map(|(id, cq)| (*id, cq)).collect();
            let unifiers = enumerate_disjunctive_piece_unifiers_filtered(
                &entries,
                rule,
                rule_idx,
                Some(&new_ids),
                gen,
            );
            for mu in unifiers {
                if options.single_piece && !mu.is_single_piece() {
                    continue;
                }
                if generated_count >= budget.max_generated || overtime(start, budget) {
                    tripped = true;
                    break 'generate;
                }
                generated_count += 1;
                let cq = apply_beta(&mu);
                if cq.len() > budget.max_cq_atoms {
                    truncated = true;
                    continue;
                }
                batch.push(cq.canonicalized(gen));
            }
        }

        // Cover the batch; prune it against the accumulated set (equivalence
        // favours the older CQ), then prune the accumulated set against the
        // survivors, and merge.
        let mut batch_ucq = Ucq::new();
        let mut seen = BTreeSet::new();
        for cq in batch {
            if seen.insert(cq.canonical_string()) {
                batch_ucq.push(cq);
            }
        }
        let batch_ucq = cover(&batch_ucq);
        let qstar_ucq: Ucq = qstar.iter().map(|(_, cq)| cq.clone()).collect();
        let fresh = remove_more_specific(&batch_ucq, &qstar_ucq);
        qstar.retain(|(_, cq)| !fresh.iter().any(|newer| cq.entails(newer)));
        new_ids.clear();
        for cq in fresh.iter() {
            qstar.push((next_id, cq.clone()));
            new_ids.insert(next_id);
            next_id += 1;
        }

        if tripped {
            break 'run RewriteStatus::BudgetExhausted;
        }
    };

    RewriteOutcome {
        status,
        result: qstar.into_iter().map(|(_, cq)| cq).collect(),
        iterations,
        generated_count,
        elapsed: start.elapsed(),
    }
}

/// One unpruned step: the input plus every single-application result over
/// every rule, with no novelty filter and no cover. Iterating this from a
/// query gives the reference sequence the engine is validated against.
pub fn w_step(q: &Ucq, rules: &RuleSet, gen: &VarGen) -> Ucq {
    assert_generator_dominates(rules, gen);
    let mut out = q.clone();
    for (rule_idx, rule) in rules.iter().enumerate() {
        for mu in enumerate_disjunctive_piece_unifiers(q, rule, rule_idx, gen) {
            out.push(apply_beta(&mu).canonicalized(gen));
        }
    }
    out
}

/// Rewriting for mappings: rewrite over the mapping rules, keeping CQs with
/// target atoms in play as unification material, then keep only the CQs
/// whose predicates are all on the source side.
///
/// Before running, a predicate-level reachability analysis checks whether a
/// source-only CQ is derivable at all; when it provably is not, the complete
/// answer is already known to be empty and the loop is skipped. This is what
/// lets queries with no source rewriting finish with a definitive status even
/// though the underlying CQ-level loop would generate forever.
pub fn s_rewrite(
    q: &Ucq,
    m: &Mapping,
    budget: &RewriteBudget,
    gen: &VarGen,
) -> Result<RewriteOutcome, RewriteError> {
    let start = Instant::now();
    for cq in q.iter() {
        for atom in cq.atoms().iter() {
            if m.is_source(atom.predicate()) {
                return Err(RewriteError::InvalidQuery(atom.predicate().name().to_string()));
            }
        }
    }

    if !source_cq_reachable(q, m) {
        // No derivable CQ can shed all its target atoms, so no source fact
        // base ever entails the query and the empty rewriting is complete.
        return Ok(RewriteOutcome {
            status: RewriteStatus::Complete,
            result: Ucq::new(),
            iterations: 0,
            generated_count: 0,
            elapsed: start.elapsed(),
        });
    }

    let out = rewrite(q, m.rules(), budget, gen);
    let mut projected = Ucq::new();
    for cq in out.result.iter() {
        if m.all_source(cq.atoms()) {
            projected.push(cq.clone());
        }
    }
    Ok(RewriteOutcome {
        status: out.status,
        result: projected,
        iterations: out.iterations,
        generated_count: out.generated_count,
        elapsed: start.elapsed(),
    })
}

/// Can any rewriting step sequence reach a CQ without target atoms?
///
/// Works on an abstraction: a CQ is summarized by its set of target
/// predicates. Unifying a copy against disjunct i can erase only atoms whose
/// predicate occurs in that disjunct, and rule bodies contribute no target
/// atoms, so a step's result always keeps, for each chosen summary `A_i`, at
/// least `A_i` minus the disjunct-i head predicates. Closing the summary set
/// under that operation over-approximates reachability; if the empty summary
/// is never reached, no source-only CQ is derivable from the query.
fn source_cq_reachable(q: &Ucq, m: &Mapping) -> bool {
    let summaries = |cq: &Cq| -> BTreeSet<Symbol> {
        cq.atoms()
            .predicates()
            .into_iter()
            .filter(|p| !m.is_source(p))
            .map(|p| p.name().clone())
            .collect()
    };
    let mut reach: BTreeSet<BTreeSet<Symbol>> = q.iter().map(summaries).collect();
    if reach.iter().any(|a| a.is_empty()) {
        return true;
    }
    let head_preds: Vec<Vec<BTreeSet<Symbol>>> = m
        .rules()
        .iter()
        .map(|rule| {
            (0..rule.disjuncts().len())
                .map(|i| rule.disjunct(i).predicates().into_iter().map(|p| p.name().clone()).collect())
                .collect()
        })
        .collect();
    loop {
        let snapshot: Vec<BTreeSet<Symbol>> = reach.iter().cloned().collect();
        let mut grew = false;
        for heads in &head_preds {
            let n = heads.len();
            let mut combo = vec![0usize; n];
            'tuples: loop {
                let mut next: BTreeSet<Symbol> = BTreeSet::new();
                for (i, &j) in combo.iter().enumerate() {
                    next.extend(snapshot[j].difference(&heads[i]).cloned());
                }
                if next.is_empty() {
                    return true;
                }
                if reach.insert(next) {
                    grew = true;
                }
                let mut pos = n;
                loop {
                    if pos == 0 {
                        break 'tuples;
                    }
                    pos -= 1;
                    combo[pos] += 1;
                    if combo[pos] < snapshot.len() {
                        break;
                    }
                    combo[pos] = 0;
                }
            }
        }
        if !grew {
            return false;
        }
    }
}

fn overtime(start: Instant, budget: &RewriteBudget) -> bool {
    budget.time_limit.is_some_and(|limit| start.elapsed() >= limit)
}

fn assert_generator_dominates(rules: &RuleSet, gen: &VarGen) {
    let max_id = rules
        .iter()
        .flat_map(|r| r.variables())
        .map(|v| v.id())
        .max();
    if let Some(max_id) = max_id {
        assert!(
            gen.watermark() > max_id,
            "variable generator must produce ids above every rule variable"
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ucq_entails, ucq_equivalent};
    use crate::textio::parse;

    fn fixture(input: &str) -> (crate::textio::Document, VarGen) {
        let doc = parse(input).expect("fixture parses");
        let gen = doc.var_gen();
        (doc, gen)
    }

    fn ucq_of(doc: &crate::textio::Document) -> Ucq {
        doc.ucq()
    }

    const TRANSITIVITY: &str = "@rules\ntr: p(X,Y), p(Y,Z) -> p(X,Z).\n";
    const COLORING: &str = "@rules\ncol: v(X) -> g(X) | r(X).\n@queries\nq1: ? :- g(U), e(U,W), g(W).\nq2: ? :- r(U), e(U,W), r(W).\n";
    const NOT_FUS: &str = "@rules\nnf: p(X,Y) -> t1(X) | t2(Y).\n@queries\nq: ? :- t1(U), t2(U).\n";

    #[test]
    fn variable_query_under_transitivity_is_its_own_rewriting() {
        let (doc, gen) = fixture(&format!("{TRANSITIVITY}@queries\nq: ? :- p(U,V).\n"));
        let out = rewrite(&ucq_of(&doc), doc.rules(), &RewriteBudget::default(), &gen);
        assert_eq!(out.status, RewriteStatus::Complete);
        assert!(out.iterations <= 2);
        assert_eq!(out.result.len(), 1);
        assert_eq!(out.result.cqs()[0].canonical_string(), "p(V0,V1)");
    }

    #[test]
    fn constant_query_under_transitivity_grows_paths_forever() {
        let (doc, gen) = fixture(&format!("{TRANSITIVITY}@queries\nq: ? :- p(a,b).\n"));
        let out = rewrite(&ucq_of(&doc), doc.rules(), &RewriteBudget::iterations(2), &gen);
        assert_eq!(out.status, RewriteStatus::BudgetExhausted);
        // Paths a→b of lengths 1..=3, pairwise incomparable.
        assert_eq!(out.result.len(), 3);
        let mut lens: Vec<usize> = out.result.iter().map(Cq::len).collect();
        lens.sort_unstable();
        assert_eq!(lens, vec![1, 2, 3]);
        for a in out.result.iter() {
            for b in out.result.iter() {
                if a.len() != b.len() {
                    assert!(!a.entails(b), "{a} should not entail {b}");
                }
            }
        }
    }

    /// The CQ t2(u0) ∧ p(u0,u1) ∧ … ∧ p(u_{k−1},u_k) ∧ t1(u_k).
    fn marked_path(k: usize) -> Cq {
        let mut body: Vec<String> = vec!["t2(U0)".into()];
        for i in 0..k {
            body.push(format!("p(U{},U{})", i, i + 1));
        }
        body.push(format!("t1(U{k})"));
        let (doc, _) = fixture(&format!("@queries\nq: ? :- {}.\n", body.join(", ")));
        doc.queries()[0].cq.clone()
    }

    #[test]
    fn shared_variable_target_query_grows_marked_paths() {
        let (doc, gen) = fixture(NOT_FUS);
        let out = rewrite(&ucq_of(&doc), doc.rules(), &RewriteBudget::iterations(3), &gen);
        assert_eq!(out.status, RewriteStatus::BudgetExhausted);
        // Both parts of a unifier may source a newly added CQ, so paths
        // t2 … p-path … t1 of lengths j and l combine into length j+l+1:
        // three rounds reach every length up to 7, besides the original.
        assert_eq!(out.result.len(), 8);
        for k in 1..=7 {
            let path = marked_path(k);
            let hits = out
                .result
                .iter()
                .filter(|cq| cq.entails(&path) && path.entails(cq))
                .count();
            assert_eq!(hits, 1, "expected exactly one CQ equivalent to the length-{k} path");
        }
        assert!(out.result.iter().any(|cq| cq.canonical_string() == "t1(V0), t2(V0)"));
        for a in out.result.iter() {
            for b in out.result.iter() {
                if a != b {
                    assert!(!a.entails(b), "{a} and {b} must be incomparable");
                }
            }
        }
    }

    #[test]
    fn coloring_rewrite_reaches_odd_cycles_only_with_multi_atom_parts() {
        let (doc, gen) = fixture(COLORING);
        let loop_cq = "e(V0,V0), v(V0)";
        let out = rewrite(&ucq_of(&doc), doc.rules(), &RewriteBudget::iterations(2), &gen);
        assert!(
            out.result.iter().any(|cq| cq.canonical_string() == loop_cq),
            "full enumeration must find the length-1 cycle"
        );
        // Capping the CQ size keeps the third round tractable without
        // weakening the claim: the cycle in question has two atoms.
        let mut budget = RewriteBudget::iterations(3);
        budget.max_cq_atoms = 8;
        let single = rewrite_with(
            &ucq_of(&doc),
            doc.rules(),
            &budget,
            RewriteOptions { single_piece: true },
            &gen,
        );
        assert!(
            single.result.iter().all(|cq| cq.canonical_string() != loop_cq),
            "single-piece unification cannot merge the two endpoints"
        );
    }

    #[test]
    fn w_step_is_monotone_and_matches_first_rewriting_step() {
        let (doc, gen) = fixture(NOT_FUS);
        let q = ucq_of(&doc);
        let w1 = w_step(&q, doc.rules(), &gen);
        assert!(w1.len() > q.len());
        for cq in q.iter() {
            assert!(w1.cqs().contains(cq), "w_step keeps the input");
        }
        assert!(
            w1.iter().any(|cq| cq.canonical_string() == "p(V0,V1), t1(V1), t2(V0)"),
            "the first path CQ appears after one step"
        );
        // A UCQ nothing unifies with is returned unchanged.
        let (inert_doc, inert_gen) = fixture("@rules\ncol: v(X) -> g(X) | r(X).\n@queries\nq: ? :- s(U).\n");
        let inert = ucq_of(&inert_doc);
        assert_eq!(w_step(&inert, inert_doc.rules(), &inert_gen), inert);
    }

    #[test]
    fn accumulated_set_stays_equivalent_to_unpruned_iterates() {
        let (doc, gen) = fixture(COLORING);
        let q = ucq_of(&doc);
        let mut w = q.clone();
        for i in 1..=2 {
            w = w_step(&w, doc.rules(), &gen);
            let out = rewrite(&q, doc.rules(), &RewriteBudget::iterations(i), &gen);
            assert!(ucq_entails(&out.result, &w), "iterate {i}: maintained set must entail the reference");
            assert!(ucq_entails(&w, &out.result), "iterate {i}: reference must entail the maintained set");
            assert!(ucq_equivalent(&out.result, &w));
        }
    }

    #[test]
    fn size_cap_forces_budget_exhausted_status() {
        let (doc, gen) = fixture(&format!("{TRANSITIVITY}@queries\nq: ? :- p(a,b).\n"));
        let budget = RewriteBudget { max_cq_atoms: 2, ..RewriteBudget::iterations(10) };
        let out = rewrite(&ucq_of(&doc), doc.rules(), &budget, &gen);
        // Lengths 1 and 2 fit; length 3 is dropped, so the loop drains but
        // must not report completeness.
        assert_eq!(out.status, RewriteStatus::BudgetExhausted);
        assert_eq!(out.result.len(), 2);
    }

    #[test]
    fn generation_cap_stops_the_run() {
        let (doc, gen) = fixture(&format!("{TRANSITIVITY}@queries\nq: ? :- p(a,b).\n"));
        let budget = RewriteBudget { max_generated: 1, ..RewriteBudget::default() };
        let out = rewrite(&ucq_of(&doc), doc.rules(), &budget, &gen);
        assert_eq!(out.status, RewriteStatus::BudgetExhausted);
        assert_eq!(out.generated_count, 1);
    }

    #[test]
    fn mapping_with_unreachable_source_finishes_complete_and_empty() {
        let (doc, gen) = fixture(&format!("@source p.\n{NOT_FUS}"));
        let mapping = doc.mapping().expect("valid mapping");
        let out = s_rewrite(&ucq_of(&doc), &mapping, &RewriteBudget::default(), &gen).unwrap();
        assert_eq!(out.status, RewriteStatus::Complete);
        assert!(out.result.is_empty());
    }

    #[test]
    fn mapping_query_on_dead_target_predicate_is_complete_and_empty() {
        let (doc, gen) = fixture(
            "@source p.\n@rules\nnf: p(X,Y) -> t1(X) | t2(Y).\n@queries\nq: ? :- t3(U).\n",
        );
        let mapping = doc.mapping().expect("valid mapping");
        let out = s_rewrite(&ucq_of(&doc), &mapping, &RewriteBudget::default(), &gen).unwrap();
        assert_eq!(out.status, RewriteStatus::Complete);
        assert!(out.result.is_empty());
    }

    #[test]
    fn mapping_rejects_source_predicates_in_the_query() {
        let (doc, gen) = fixture(
            "@source p.\n@rules\nnf: p(X,Y) -> t1(X) | t2(Y).\n@queries\nq: ? :- t1(U), p(U,U).\n",
        );
        let mapping = doc.mapping().expect("valid mapping");
        let err = s_rewrite(&ucq_of(&doc), &mapping, &RewriteBudget::default(), &gen).unwrap_err();
        assert_eq!(err, RewriteError::InvalidQuery("p".into()));
    }

    #[test]
    fn colorability_mapping_projects_to_odd_cycles() {
        let (doc, gen) = fixture(
            "@source v, e.\n@rules\nm1: e(X,Y) -> he(X,Y).\nm2: v(X) -> g(X) | r(X).\n@queries\nq1: ? :- g(U), he(U,W), g(W).\nq2: ? :- r(U), he(U,W), r(W).\n",
        );
        let mapping = doc.mapping().expect("valid mapping");
        let out = s_rewrite(&ucq_of(&doc), &mapping, &RewriteBudget::iterations(2), &gen).unwrap();
        assert_eq!(out.status, RewriteStatus::BudgetExhausted);
        // Two rounds reach exactly the length-1 cycle.
        assert_eq!(out.result.len(), 1);
        let one_cycle: Ucq = [out.result.cqs()[0].clone()].into_iter().collect();
        let (oracle_doc, _) = fixture("@queries\nc1: ? :- v(U), e(U,U).\n");
        assert!(ucq_equivalent(&one_cycle, &ucq_of(&oracle_doc)));
    }
}
