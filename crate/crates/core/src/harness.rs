//! Randomized validation of the forward/backward duality.
//!
//! The chase step and the rewriting step are two sides of one coin: applying
//! a rule to a fact base ([`crate::chase::apply_trigger`]) and unifying a
//! query with a rule head ([`crate::rewrite::apply_beta`]) preserve
//! entailment in opposite directions, and each can be replayed through the
//! other. This module turns those four preservation/composition properties,
//! plus the two lemmas composing them, into executable checks, generates
//! small random instances to feed them, and cross-validates the chase
//! against the rewriting engine on bounded derivations.
//!
//! All enumerations here are exhaustive at instance scale: a returned
//! `false` is a definite implementation bug, never a search-budget artifact.
//! Instances whose enumerations would exceed the candidate cap are
//! regenerated, never silently passed.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chase::{
    apply_trigger, chase_entails, find_triggers, ChaseBudget, ChaseVerdict, Trigger,
};
use crate::model::{
    fact_entails, homomorphism, Atom, AtomSet, Cq, DisjunctiveRule, Predicate, RuleSet,
    Substitution, Symbol, Term, Ucq, VarGen, Variable,
};
use crate::rewrite::{
    apply_beta, enumerate_disjunctive_piece_unifiers, w_step, DisjunctivePieceUnifier,
};

/// Bounds and distribution knobs for [`gen_instance`]. The same seed always
/// produces the same instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_predicates: usize,
    /// Predicate arity bound; keep at 3 or below.
    pub max_arity: usize,
    pub max_rules: usize,
    /// Disjuncts per rule head; keep at 3 or below.
    pub max_rule_disjuncts: usize,
    /// Atoms per fact base, rule body, head disjunct, and CQ; keep at 5 or
    /// below.
    pub max_atoms_per_set: usize,
    pub max_constants: usize,
    /// CQs per generated UCQ.
    pub max_queries: usize,
    /// Probability that a head argument is a fresh existential variable.
    pub p_existential: f64,
    /// Probability that an argument is a constant rather than a variable.
    pub p_constant: f64,
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            max_predicates: 4,
            max_arity: 2,
            max_rules: 3,
            max_rule_disjuncts: 2,
            max_atoms_per_set: 3,
            max_constants: 3,
            max_queries: 2,
            p_existential: 0.3,
            p_constant: 0.4,
        }
    }

    fn validate(&self) {
        assert!(
            self.max_predicates > 0
                && self.max_arity > 0
                && self.max_rules > 0
                && self.max_rule_disjuncts > 0
                && self.max_atoms_per_set > 0
                && self.max_constants > 0
                && self.max_queries > 0,
            "all generator bounds must be positive"
        );
        assert!(
            (0.0..=1.0).contains(&self.p_existential) && (0.0..=1.0).contains(&self.p_constant),
            "probabilities must lie in [0, 1]"
        );
    }
}

/// A generated instance, together with the variable generator that owns its
/// variable identifiers (pass it on to the engines).
pub struct Instance {
    pub facts: AtomSet,
    pub rules: RuleSet,
    pub query: Ucq,
    pub gen: VarGen,
}

/// Generates a small well-formed instance within the configured bounds,
/// deterministically per seed.
pub fn gen_instance(cfg: &GenConfig) -> Instance {
    cfg.validate();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gen = VarGen::new();

    let n_preds = rng.gen_range(1..=cfg.max_predicates);
    let preds: Vec<Predicate> = (0..n_preds)
        .map(|i| Predicate::new(format!("p{i}"), rng.gen_range(1..=cfg.max_arity)))
        .collect();
    let consts: Vec<Symbol> =
        (0..cfg.max_constants).map(|i| Symbol::new(&format!("c{i}"))).collect();

    let pick_atom = |rng: &mut ChaCha8Rng, pool: &[Variable], p_const: f64| {
        let pred = preds[rng.gen_range(0..preds.len())].clone();
        let args = (0..pred.arity())
            .map(|_| {
                if rng.gen_bool(p_const) {
                    Term::Const(consts[rng.gen_range(0..consts.len())].clone())
                } else {
                    Term::Var(pool[rng.gen_range(0..pool.len())].clone())
                }
            })
            .collect();
        Atom::new(pred, args)
    };

    let mut rules = Vec::new();
    for r in 0..rng.gen_range(1..=cfg.max_rules) {
        let body_pool: Vec<Variable> = (0..3).map(|_| gen.fresh_named("x")).collect();
        let mut body = AtomSet::new();
        for _ in 0..rng.gen_range(1..=cfg.max_atoms_per_set) {
            body.insert(pick_atom(&mut rng, &body_pool, cfg.p_constant / 2.0));
        }
        let frontier_pool: Vec<Variable> = body.variables().into_iter().collect();
        let mut disjuncts = Vec::new();
        for _ in 0..rng.gen_range(1..=cfg.max_rule_disjuncts) {
            let existentials: Vec<Variable> = (0..2).map(|_| gen.fresh_named("z")).collect();
            let mut head = AtomSet::new();
            for _ in 0..rng.gen_range(1..=cfg.max_atoms_per_set) {
                let pred = preds[rng.gen_range(0..preds.len())].clone();
                let args = (0..pred.arity())
                    .map(|_| {
                        if rng.gen_bool(cfg.p_existential) {
                            Term::Var(existentials[rng.gen_range(0..existentials.len())].clone())
                        } else if frontier_pool.is_empty() || rng.gen_bool(cfg.p_constant) {
                            Term::Const(consts[rng.gen_range(0..consts.len())].clone())
                        } else {
                            Term::Var(
                                frontier_pool[rng.gen_range(0..frontier_pool.len())].clone(),
                            )
                        }
                    })
                    .collect();
                head.insert(Atom::new(pred, args));
            }
            disjuncts.push(head);
        }
        let rule =
            DisjunctiveRule::new(Some(Symbol::new(&format!("g{r}"))), body, disjuncts)
                .expect("generated rules have nonempty bodies and disjuncts");
        rules.push(rule);
    }

    let fact_pool: Vec<Variable> = (0..3).map(|_| gen.fresh_named("n")).collect();
    let mut facts = AtomSet::new();
    for _ in 0..rng.gen_range(1..=cfg.max_atoms_per_set) {
        facts.insert(pick_atom(&mut rng, &fact_pool, 1.0 - cfg.p_constant / 2.0));
    }

    let mut query = Ucq::new();
    for _ in 0..rng.gen_range(1..=cfg.max_queries) {
        let cq_pool: Vec<Variable> = (0..3).map(|_| gen.fresh_named("u")).collect();
        let mut atoms = AtomSet::new();
        for _ in 0..rng.gen_range(1..=cfg.max_atoms_per_set) {
            atoms.insert(pick_atom(&mut rng, &cq_pool, cfg.p_constant / 2.0));
        }
        query.push(Cq::new(atoms));
    }

    let rules = RuleSet::new(rules, &gen);
    Instance { facts, rules, query, gen }
}

/// Set-level entailment between chase outputs: every branch of `a` maps some
/// branch of `b` into itself.
fn branches_entail(a: &[AtomSet], b: &[AtomSet]) -> bool {
    a.iter().all(|fa| b.iter().any(|fb| fact_entails(fa, fb)))
}

/// Every branch satisfies the UCQ.
fn branches_hold(branches: &[AtomSet], q: &Ucq) -> bool {
    branches.iter().all(|f| q.holds_in(f))
}

/// Entailment is preserved by the chase step: if `f1 ⊨ f2` and `t2` is a
/// trigger on `f2`, some trigger of the same rule on `f1` yields branches
/// entailing the branches of `t2`.
///
/// Panics if `f1` does not entail `f2`.
pub fn check_alpha_specialization(
    f1: &AtomSet,
    f2: &AtomSet,
    rules: &RuleSet,
    t2: &Trigger,
    gen: &VarGen,
) -> bool {
    assert!(fact_entails(f1, f2), "precondition: f1 must entail f2");
    let target = apply_trigger(f2, t2, rules, gen);
    find_triggers(f1, rules)
        .iter()
        .filter(|t1| t1.rule_idx() == t2.rule_idx())
        .any(|t1| branches_entail(&apply_trigger(f1, t1, rules, gen), &target))
}

/// Entailment is preserved by the rewriting step: if `q2 ⊨ q1` and `mu2`
/// unifies `q2` with a rule, then the rewriting of `q2` either entails `q1`
/// directly or entails some rewriting of `q1` with the same rule.
///
/// Panics if `q2` does not entail `q1`.
pub fn check_beta_specialization(
    q1: &Ucq,
    q2: &Ucq,
    rules: &RuleSet,
    mu2: &DisjunctivePieceUnifier,
    gen: &VarGen,
) -> bool {
    assert!(
        q2.iter().all(|b| q1.iter().any(|a| b.entails(a))),
        "precondition: q2 must entail q1"
    );
    let beta2 = apply_beta(mu2);
    if q1.iter().any(|cq1| beta2.entails(cq1)) {
        return true;
    }
    let rule = rules.get(mu2.rule_idx());
    enumerate_disjunctive_piece_unifiers(q1, rule, mu2.rule_idx(), gen)
        .iter()
        .any(|mu1| beta2.entails(&apply_beta(mu1)))
}

/// A chase step can be undone by a rewriting step: reading the branches of a
/// trigger as a UCQ, some unifier with the same rule produces a CQ that maps
/// back into the original fact base.
pub fn check_beta_reverse_alpha(
    f: &AtomSet,
    rules: &RuleSet,
    t: &Trigger,
    gen: &VarGen,
) -> bool {
    let q: Ucq = apply_trigger(f, t, rules, gen).into_iter().map(Cq::new).collect();
    let rule = rules.get(t.rule_idx());
    enumerate_disjunctive_piece_unifiers(&q, rule, t.rule_idx(), gen)
        .iter()
        .any(|mu| homomorphism(apply_beta(mu).atoms(), f).is_some())
}

/// A rewriting step can be undone by a chase step: reading the rewriting
/// output as a fact base, some trigger of the same rule yields branches that
/// all satisfy the original UCQ.
pub fn check_alpha_reverse_beta(
    q: &Ucq,
    rules: &RuleSet,
    mu: &DisjunctivePieceUnifier,
    gen: &VarGen,
) -> bool {
    let f = apply_beta(mu).atoms().clone();
    find_triggers(&f, rules)
        .iter()
        .filter(|t| t.rule_idx() == mu.rule_idx())
        .any(|t| branches_hold(&apply_trigger(&f, t, rules, gen), q))
}

/// If a fact base satisfies a rewriting of `q`, some trigger of the same
/// rule takes it to branches that all satisfy `q`. Exhaustive over triggers.
///
/// Panics if `f` does not satisfy the rewriting `apply_beta(mu)`.
pub fn check_backward_forward(
    f: &AtomSet,
    q: &Ucq,
    rules: &RuleSet,
    mu: &DisjunctivePieceUnifier,
    gen: &VarGen,
) -> bool {
    let beta = apply_beta(mu);
    assert!(
        homomorphism(beta.atoms(), f).is_some(),
        "precondition: f must satisfy the rewriting"
    );
    find_triggers(f, rules)
        .iter()
        .filter(|t| t.rule_idx() == mu.rule_idx())
        .any(|t| branches_hold(&apply_trigger(f, t, rules, gen), q))
}

/// If all branches of a trigger satisfy `q`, then either the fact base
/// already does, or some unifier of `q` with the trigger's rule produces a
/// CQ the fact base satisfies. Exhaustive over unifiers.
///
/// Panics if some branch of the trigger does not satisfy `q`.
pub fn check_forward_backward(
    f: &AtomSet,
    q: &Ucq,
    rules: &RuleSet,
    t: &Trigger,
    gen: &VarGen,
) -> bool {
    assert!(
        branches_hold(&apply_trigger(f, t, rules, gen), q),
        "precondition: all branches must satisfy q"
    );
    if q.holds_in(f) {
        return true;
    }
    let rule = rules.get(t.rule_idx());
    enumerate_disjunctive_piece_unifiers(q, rule, t.rule_idx(), gen)
        .iter()
        .any(|mu| homomorphism(apply_beta(mu).atoms(), f).is_some())
}

/// One rewriting CQ that maps to the fact base although the chase refutes
/// the query — this should never happen.
#[derive(Debug, Clone, Serialize)]
pub struct SoundnessViolation {
    pub cq: String,
    pub verdict: String,
}

/// A derivation whose branches all satisfy the query although no CQ of the
/// matching rewriting iterate maps to the fact base.
#[derive(Debug, Clone, Serialize)]
pub struct CompletenessViolation {
    pub length: usize,
    pub branches: Vec<String>,
}

/// Outcome of [`cross_check`]; serializable for the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub depth: usize,
    /// CQ count of each unpruned rewriting iterate, from 0 to `depth`.
    pub rewriting_sizes: Vec<usize>,
    /// Rewriting CQs that map to the fact base.
    pub soundness_checked: usize,
    pub soundness_violations: Vec<SoundnessViolation>,
    /// Mapping CQs whose chase verification ran out of budget: not
    /// violations, but not confirmations either.
    pub inconclusive: usize,
    /// Derivation endpoints that satisfy the query and were compared against
    /// the rewriting iterates.
    pub derivations_checked: usize,
    pub completeness_violations: Vec<CompletenessViolation>,
    /// Some enumeration hit its cap; the report covers only what was
    /// explored. Callers should regenerate smaller instances.
    pub cap_exceeded: bool,
}

impl CrossCheckReport {
    pub fn is_clean(&self) -> bool {
        self.soundness_violations.is_empty() && self.completeness_violations.is_empty()
    }
}

const REWRITE_CQ_CAP: usize = 20_000;
const STATE_CAP: usize = 50_000;
/// Tighter screen for the iterated rewriting inside [`cross_check`]: an
/// instance whose unifier space crosses this at any step is reported capped
/// before the iterate is materialized, keeping discards cheap.
const CROSS_REWRITE_BOUND: f64 = 2_000.0;

/// Cross-validates the two engines on one instance.
///
/// Soundness: every CQ of the depth-bounded unpruned rewriting that maps to
/// `f` must be confirmed by the chase (a saturated refutation is a definite
/// violation). Bounded completeness: every derivation of at most `depth`
/// trigger applications whose branches all satisfy `q` must be matched by a
/// CQ of the same-depth rewriting iterate mapping to `f`.
pub fn cross_check(
    f: &AtomSet,
    rules: &RuleSet,
    q: &Ucq,
    depth: usize,
    gen: &VarGen,
) -> CrossCheckReport {
    cross_check_with_bound(f, rules, q, depth, CANDIDATE_CAP, gen)
}

/// [`cross_check`] with an explicit unifier-space screen. The seeded suite
/// passes a tight bound so oversized instances are discarded before any
/// iterate is materialized; direct callers get the generous default.
fn cross_check_with_bound(
    f: &AtomSet,
    rules: &RuleSet,
    q: &Ucq,
    depth: usize,
    screen: f64,
    gen: &VarGen,
) -> CrossCheckReport {
    let mut report = CrossCheckReport {
        depth,
        rewriting_sizes: Vec::new(),
        soundness_checked: 0,
        soundness_violations: Vec::new(),
        inconclusive: 0,
        derivations_checked: 0,
        completeness_violations: Vec::new(),
        cap_exceeded: false,
    };

    let mut iterates = vec![q.clone()];
    for _ in 0..depth {
        let current = iterates.last().expect("nonempty");
        // Screen the enumeration itself, not just its output: the unifier
        // search is exponential in the number of matching atom pairs.
        let bound: f64 =
            (0..rules.len()).map(|i| dpu_candidate_bound(current, rules.get(i))).sum();
        if bound > screen {
            report.cap_exceeded = true;
            break;
        }
        let next = w_step(current, rules, gen);
        if next.len() > REWRITE_CQ_CAP {
            report.cap_exceeded = true;
            break;
        }
        iterates.push(next);
    }
    report.rewriting_sizes = iterates.iter().map(Ucq::len).collect();

    let mappers: Vec<&Cq> = iterates
        .last()
        .expect("nonempty")
        .iter()
        .filter(|cq| homomorphism(cq.atoms(), f).is_some())
        .collect();
    report.soundness_checked = mappers.len();
    if !mappers.is_empty() {
        let budget =
            ChaseBudget { max_depth: depth + 3, max_nodes: 4000, restricted: true };
        match chase_entails(f, rules, q, budget, gen) {
            ChaseVerdict::Entailed(_) => {}
            ChaseVerdict::NotEntailed(_, _) => {
                for cq in &mappers {
                    report.soundness_violations.push(SoundnessViolation {
                        cq: cq.canonical_string(),
                        verdict: "not_entailed".to_string(),
                    });
                }
            }
            ChaseVerdict::Unknown(_) => report.inconclusive = mappers.len(),
        }
    }

    // Breadth-first derivation states: a state is the multiset of fact bases
    // produced by replacing one member by the branches of one of its
    // triggers. States are deduplicated by per-member canonical form, which
    // is sound because each fact base is closed independently.
    let state_key =
        |s: &[AtomSet]| -> Vec<String> {
            let mut key: Vec<String> =
                s.iter().map(|m| Cq::new(m.clone()).canonical_string()).collect();
            key.sort();
            key
        };
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut level: Vec<Vec<AtomSet>> = vec![vec![f.clone()]];
    seen.insert(state_key(&level[0]));
    'levels: for k in 0..=depth {
        if k >= iterates.len() {
            report.cap_exceeded = true;
            break;
        }
        for state in &level {
            if state.iter().all(|m| q.holds_in(m)) {
                report.derivations_checked += 1;
                let matched =
                    iterates[k].iter().any(|cq| homomorphism(cq.atoms(), f).is_some());
                if !matched {
                    report.completeness_violations.push(CompletenessViolation {
                        length: k,
                        branches: state_key(state),
                    });
                }
            }
        }
        if k == depth {
            break;
        }
        let mut next: Vec<Vec<AtomSet>> = Vec::new();
        for state in &level {
            for (m, member) in state.iter().enumerate() {
                for t in find_triggers(member, rules) {
                    let mut succ: Vec<AtomSet> = Vec::with_capacity(state.len() + 1);
                    succ.extend(state.iter().take(m).cloned());
                    succ.extend(state.iter().skip(m + 1).cloned());
                    succ.extend(apply_trigger(member, &t, rules, gen));
                    if seen.insert(state_key(&succ)) {
                        next.push(succ);
                    }
                    if seen.len() > STATE_CAP {
                        report.cap_exceeded = true;
                        break 'levels;
                    }
                }
            }
        }
        level = next;
    }

    report
}

/// One failed check inside a [`SuiteReport`].
#[derive(Debug, Clone, Serialize)]
pub struct SuiteFailure {
    pub seed: u64,
    pub property: String,
    pub detail: String,
}

/// Outcome of [`run_property_suite`]; serializable for the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub instances: usize,
    pub checks: usize,
    /// Instances discarded because an enumeration exceeded the candidate
    /// cap.
    pub regenerated: usize,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Candidate cap per exhaustive enumeration; oversized instances are
/// regenerated.
const CANDIDATE_CAP: f64 = 20_000.0;

/// Upper bound on the number of disjunctive piece-unifiers of `q` with
/// `rule`: per disjunct, each CQ copy contributes one nonempty subset of its
/// predicate-compatible atom pairs, and parts combine freely.
fn dpu_candidate_bound(q: &Ucq, rule: &DisjunctiveRule) -> f64 {
    let mut product = 1f64;
    for d in rule.disjuncts() {
        let mut options = 0f64;
        for cq in q.iter() {
            let pairs = cq
                .atoms()
                .iter()
                .map(|a| d.iter().filter(|h| h.predicate() == a.predicate()).count())
                .sum::<usize>();
            if pairs > 0 {
                options += 2f64.powi(pairs.min(60) as i32) - 1.0;
            }
        }
        product *= options;
        if product == 0.0 || product > 1e18 {
            return product;
        }
    }
    product
}

/// Runs all six duality checks on `instances` generated instances starting
/// at `base_seed`. Deterministic: the same arguments give the same report.
pub fn run_property_suite(base_seed: u64, instances: usize) -> SuiteReport {
    let mut report =
        SuiteReport { instances: 0, checks: 0, regenerated: 0, failures: Vec::new() };
    let mut seed = base_seed;
    while report.instances < instances {
        let cfg = GenConfig::with_seed(seed);
        seed = seed.wrapping_add(1);
        let inst = gen_instance(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9E37_79B9_7F4A_7C15);

        // Draw the derived inputs up front, then screen every planned
        // enumeration against the candidate cap. Oversized instances are
        // regenerated, never silently passed.
        let f1 = specialize_facts(&inst.facts, &mut rng, &inst.gen);
        let q2 = specialize_ucq(&inst.query, &mut rng, &inst.gen);
        let triggers = find_triggers(&inst.facts, &inst.rules);

        let mut work = triggers.len() as f64;
        for i in 0..inst.rules.len() {
            let rule = inst.rules.get(i);
            let base = dpu_candidate_bound(&inst.query, rule);
            let spec = dpu_candidate_bound(&q2, rule);
            // The specialization check re-enumerates base-query unifiers
            // for each specialized one, so its candidate space is the
            // product of the two.
            work += base + spec + spec * base;
        }
        for t in &triggers {
            let branch_q: Ucq =
                apply_trigger(&inst.facts, t, &inst.rules, &inst.gen)
                    .into_iter()
                    .map(Cq::new)
                    .collect();
            work += dpu_candidate_bound(&branch_q, inst.rules.get(t.rule_idx()));
        }
        if work > CANDIDATE_CAP {
            report.regenerated += 1;
            continue;
        }
        report.instances += 1;

        let unifiers: Vec<DisjunctivePieceUnifier> = (0..inst.rules.len())
            .flat_map(|i| {
                enumerate_disjunctive_piece_unifiers(
                    &inst.query,
                    inst.rules.get(i),
                    i,
                    &inst.gen,
                )
            })
            .collect();

        let fail = |report: &mut SuiteReport, property: &str, detail: String| {
            report.failures.push(SuiteFailure {
                seed: cfg.seed,
                property: property.to_string(),
                detail,
            });
        };

        // Chase-step preservation, on a specialization of the fact base.
        for t2 in &triggers {
            report.checks += 1;
            if !check_alpha_specialization(&f1, &inst.facts, &inst.rules, t2, &inst.gen) {
                fail(&mut report, "alpha_specialization", format!("rule {}", t2.rule_idx()));
            }
        }

        // Rewriting-step preservation, on a specialization of the query.
        for i in 0..inst.rules.len() {
            for mu2 in
                enumerate_disjunctive_piece_unifiers(&q2, inst.rules.get(i), i, &inst.gen)
            {
                report.checks += 1;
                if !check_beta_specialization(&inst.query, &q2, &inst.rules, &mu2, &inst.gen)
                {
                    fail(&mut report, "beta_specialization", format!("rule {i}"));
                }
            }
        }

        // Round trips.
        for t in &triggers {
            report.checks += 1;
            if !check_beta_reverse_alpha(&inst.facts, &inst.rules, t, &inst.gen) {
                fail(&mut report, "beta_reverse_alpha", format!("rule {}", t.rule_idx()));
            }
        }
        for mu in &unifiers {
            report.checks += 1;
            if !check_alpha_reverse_beta(&inst.query, &inst.rules, mu, &inst.gen) {
                fail(&mut report, "alpha_reverse_beta", format!("rule {}", mu.rule_idx()));
            }
        }

        // Backward-forward, on the frozen rewriting image.
        for mu in &unifiers {
            let frozen = freeze(apply_beta(mu).atoms());
            report.checks += 1;
            if !check_backward_forward(&frozen, &inst.query, &inst.rules, mu, &inst.gen) {
                fail(&mut report, "backward_forward", format!("rule {}", mu.rule_idx()));
            }
        }

        // Forward-backward, on queries mined from the trigger's own
        // branches so the precondition holds by construction.
        for t in &triggers {
            let branches = apply_trigger(&inst.facts, t, &inst.rules, &inst.gen);
            let mined = mine_query(&branches, &mut rng);
            report.checks += 1;
            if !check_forward_backward(&inst.facts, &mined, &inst.rules, t, &inst.gen) {
                fail(&mut report, "forward_backward", format!("rule {}", t.rule_idx()));
            }
        }
    }
    report
}

/// Aggregate of [`cross_check`] over generated instances.
#[derive(Debug, Clone, Serialize)]
pub struct CrossSuiteReport {
    pub instances: usize,
    /// Instances discarded because a cross-check cap tripped; every counted
    /// instance was fully explored.
    pub regenerated: usize,
    pub soundness_checked: usize,
    pub derivations_checked: usize,
    pub inconclusive: usize,
    pub failures: Vec<SuiteFailure>,
}

impl CrossSuiteReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs [`cross_check`] at `depth` on `instances` generated instances
/// starting at `base_seed`. Deterministic in its arguments.
pub fn run_cross_check_suite(base_seed: u64, instances: usize, depth: usize) -> CrossSuiteReport {
    let mut report = CrossSuiteReport {
        instances: 0,
        regenerated: 0,
        soundness_checked: 0,
        derivations_checked: 0,
        inconclusive: 0,
        failures: Vec::new(),
    };
    let mut seed = base_seed;
    while report.instances < instances {
        let cfg = GenConfig::with_seed(seed);
        seed = seed.wrapping_add(1);
        let inst = gen_instance(&cfg);
        let r = cross_check_with_bound(
            &inst.facts,
            &inst.rules,
            &inst.query,
            depth,
            CROSS_REWRITE_BOUND,
            &inst.gen,
        );
        if r.cap_exceeded {
            report.regenerated += 1;
            continue;
        }
        report.instances += 1;
        report.soundness_checked += r.soundness_checked;
        report.derivations_checked += r.derivations_checked;
        report.inconclusive += r.inconclusive;
        for v in r.soundness_violations {
            report.failures.push(SuiteFailure {
                seed: cfg.seed,
                property: "cross_check_soundness".to_string(),
                detail: v.cq,
            });
        }
        for v in r.completeness_violations {
            report.failures.push(SuiteFailure {
                seed: cfg.seed,
                property: "cross_check_completeness".to_string(),
                detail: format!("derivation of length {}", v.length),
            });
        }
    }
    report
}

/// A fact base entailing the input: variables are partly collapsed onto
/// constants or each other, and a renamed copy may be added.
fn specialize_facts(f: &AtomSet, rng: &mut ChaCha8Rng, gen: &VarGen) -> AtomSet {
    let vars: Vec<Variable> = f.variables().into_iter().collect();
    let mut sub = Substitution::new();
    for v in &vars {
        match rng.gen_range(0..3u8) {
            0 => sub.bind(v.clone(), Term::constant(format!("d{}", rng.gen_range(0..3u8)))),
            1 => sub.bind(v.clone(), Term::Var(vars[rng.gen_range(0..vars.len())].clone())),
            _ => {}
        }
    }
    let mut out = f.apply(&sub);
    if rng.gen_bool(0.5) {
        let (copy, _) = f.safe_copy(gen);
        out.extend(copy.iter().cloned());
    }
    out
}

/// A UCQ entailing the input: a nonempty subset of its CQs, each specialized
/// and possibly padded with atoms from a sibling CQ.
fn specialize_ucq(q: &Ucq, rng: &mut ChaCha8Rng, gen: &VarGen) -> Ucq {
    let keep = rng.gen_range(1..=q.len());
    let mut out = Ucq::new();
    for cq in q.iter().take(keep) {
        let vars: Vec<Variable> = cq.variables().into_iter().collect();
        let mut sub = Substitution::new();
        for v in &vars {
            match rng.gen_range(0..3u8) {
                0 => {
                    sub.bind(v.clone(), Term::constant(format!("d{}", rng.gen_range(0..3u8))))
                }
                1 => sub.bind(v.clone(), Term::Var(vars[rng.gen_range(0..vars.len())].clone())),
                _ => {}
            }
        }
        let mut atoms = cq.atoms().apply(&sub);
        if rng.gen_bool(0.4) {
            let sibling = &q.cqs()[rng.gen_range(0..q.len())];
            let (copy, _) = sibling.safe_copy(gen);
            atoms.extend(copy.atoms().iter().cloned());
        }
        out.push(Cq::new(atoms));
    }
    out
}

/// Replaces every variable by a fresh constant.
fn freeze(atoms: &AtomSet) -> AtomSet {
    let sub = Substitution::from_pairs(
        atoms
            .variables()
            .into_iter()
            .map(|v| (v.clone(), Term::constant(format!("fz{}", v.id())))),
    );
    atoms.apply(&sub)
}

/// A UCQ satisfied by every branch: one random nonempty subset per branch.
fn mine_query(branches: &[AtomSet], rng: &mut ChaCha8Rng) -> Ucq {
    let mut q = Ucq::new();
    for branch in branches {
        let atoms: Vec<Atom> = branch.iter().cloned().collect();
        let n = rng.gen_range(1..=atoms.len().min(2));
        let mut subset = AtomSet::new();
        for _ in 0..n {
            subset.insert(atoms[rng.gen_range(0..atoms.len())].clone());
        }
        q.push(Cq::new(subset));
    }
    q
}
