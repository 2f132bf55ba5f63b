//! Generators for structurally hard inputs.
//!
//! Two constructions are provided, plus the bookkeeping needed to read
//! their outputs back:
//!
//! - From a single two-disjunct source-to-target rule, a Boolean query whose
//!   rewriting never terminates: the query chains fresh copies of the two
//!   head disjuncts through a fresh "link" predicate, and each rewriting
//!   round inserts one more body copy between two link atoms, giving an
//!   infinite family of pairwise incomparable CQs ([`build_nonfus_query`],
//!   [`build_nonfus_family`]).
//! - From a conjunctive datalog instance (query + rules), a disjunctive
//!   mapping instance whose source rewritings correspond exactly to the
//!   datalog rewritings ([`build_reduction`]). Each datalog rule becomes a
//!   query carrying a private marker predicate and a two-disjunct mapping
//!   rule that either keeps the marker or replays the rule head; a
//!   [`reverse`] function maps CQs from rewritings of the instance back to
//!   plain CQs or datalog rules, and [`unfold_closure`] builds the bounded
//!   rule compositions those reversed rules live in.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{
    all_homomorphisms, homomorphism, homomorphism_extending, Atom, AtomSet, Cq, DisjunctiveRule,
    Mapping, Predicate, RuleSet, Substitution, Symbol, Term, TermPartition, Ucq, VarGen, Variable,
};

/// Source-side type predicate added by the reduction.
const TYPE_PRED: &str = "tt_T";
/// Its renamed (target-side) counterpart.
const TYPE_PRED_HAT: &str = "hat_T";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("rule has {0} disjuncts; the construction needs exactly 2")]
    WrongDisjunctCount(usize),
    #[error("predicate {0} occurs in both body and head; the rule must be source-to-target")]
    NotSourceToTarget(String),
    #[error("rule is disconnected (or a disjunct has an empty frontier)")]
    Disconnected,
    #[error("rule is equivalent to one of its conjunctive halves")]
    ConjunctiveEquivalent,
    #[error("invalid reduction input: {0}")]
    InvalidInput(String),
    #[error("query carries {0} marker atoms; at most one is allowed")]
    TooManySpecialAtoms(usize),
    #[error("predicate {0} is not part of the reduction vocabulary")]
    UnknownSpecialPredicate(String),
}

/// The query built by [`build_nonfus_family`] with `k = 0`: two safe copies
/// of the rule's head disjuncts joined by a fresh link predicate over their
/// frontier tuples.
pub fn build_nonfus_query(rule: &DisjunctiveRule, gen: &VarGen) -> Result<Cq, ConstructError> {
    Ok(build_nonfus_family(rule, 0, gen)?.pop().expect("family of size 1"))
}

/// The first `k + 1` members of the infinite incomparable family for a
/// two-disjunct source-to-target rule.
///
/// Member `i` realizes one rewriting step over member `i − 1`: a copy of the
/// first disjunct, then `i + 1` link atoms with `i` rule-body copies between
/// them, then a copy of the second disjunct. Each body copy takes its
/// second-disjunct frontier from the link atom before it and its
/// first-disjunct frontier from the link atom after it, which is exactly
/// what unifying a fresh copy of member 0 with the first disjunct and a copy
/// of member `i − 1` with the second produces.
pub fn build_nonfus_family(
    rule: &DisjunctiveRule,
    k: usize,
    gen: &VarGen,
) -> Result<Vec<Cq>, ConstructError> {
    let rule = rule.separate_existentials(gen);
    if rule.disjuncts().len() != 2 {
        return Err(ConstructError::WrongDisjunctCount(rule.disjuncts().len()));
    }
    let body_preds = rule.body().predicates();
    for d in rule.disjuncts() {
        for p in d.predicates() {
            if body_preds.contains(&p) {
                return Err(ConstructError::NotSourceToTarget(p.name().to_string()));
            }
        }
    }
    let fr1 = rule.disjunct_frontier_ordered(0);
    let fr2 = rule.disjunct_frontier_ordered(1);
    if fr1.is_empty() || fr2.is_empty() || rule.is_disconnected() {
        return Err(ConstructError::Disconnected);
    }
    if disjunct_implies(&rule, 0, 1) || disjunct_implies(&rule, 1, 0) {
        return Err(ConstructError::ConjunctiveEquivalent);
    }

    let link = link_predicate(&rule, fr1.len() + fr2.len());
    let shared: Vec<(usize, usize)> = fr1
        .iter()
        .enumerate()
        .filter_map(|(j, x)| fr2.iter().position(|y| y == x).map(|l| (j, l)))
        .collect();

    let fresh_like = |v: &Variable| match v.display_name() {
        Some(n) => gen.fresh_named(n.as_str()),
        None => gen.fresh(),
    };
    let fresh_tuple = |vars: &[Variable]| -> Vec<Variable> { vars.iter().map(fresh_like).collect() };

    let mut family = Vec::with_capacity(k + 1);
    for i in 0..=k {
        // Frontier tuples for the i+1 link atoms. Where the two disjuncts
        // share a frontier variable, the body copy between two links forces
        // the second tuple of one to overlap the first tuple of the next.
        let v1: Vec<Vec<Variable>> = (0..=i).map(|_| fresh_tuple(&fr1)).collect();
        let mut v2: Vec<Vec<Variable>> = Vec::with_capacity(i + 1);
        for step in 0..=i {
            let mut tuple = fresh_tuple(&fr2);
            if step < i {
                for &(j, l) in &shared {
                    tuple[l] = v1[step + 1][j].clone();
                }
            }
            v2.push(tuple);
        }

        let mut atoms = AtomSet::new();
        let sub1 = copy_substitution(&rule, 0, &fr1, &v1[0], gen);
        atoms.extend(rule.disjunct(0).apply(&sub1).iter().cloned());
        for step in 0..=i {
            let args = v1[step]
                .iter()
                .chain(v2[step].iter())
                .map(|v| Term::Var(v.clone()))
                .collect();
            atoms.insert(Atom::new(link.clone(), args));
        }
        for step in 1..=i {
            let mut body_sub = Substitution::new();
            for (l, y) in fr2.iter().enumerate() {
                body_sub.bind(y.clone(), Term::Var(v2[step - 1][l].clone()));
            }
            for (j, x) in fr1.iter().enumerate() {
                body_sub.bind(x.clone(), Term::Var(v1[step][j].clone()));
            }
            for v in rule.body().variables() {
                if body_sub.get(&v).is_none() {
                    let img = fresh_like(&v);
                    body_sub.bind(v, Term::Var(img));
                }
            }
            atoms.extend(rule.body().apply(&body_sub).iter().cloned());
        }
        let sub2 = copy_substitution(&rule, 1, &fr2, &v2[i], gen);
        atoms.extend(rule.disjunct(1).apply(&sub2).iter().cloned());

        debug_assert_eq!(
            atoms.len(),
            rule.disjunct(0).len() + rule.disjunct(1).len() + i * rule.body().len() + (i + 1),
            "family member {i} must not collapse atoms"
        );
        family.push(Cq::new(atoms));
    }
    Ok(family)
}

/// Renames one head disjunct onto the given frontier tuple, with fresh
/// existentials.
fn copy_substitution(
    rule: &DisjunctiveRule,
    disjunct: usize,
    frontier: &[Variable],
    tuple: &[Variable],
    gen: &VarGen,
) -> Substitution {
    let mut sub = Substitution::new();
    for (x, v) in frontier.iter().zip(tuple) {
        sub.bind(x.clone(), Term::Var(v.clone()));
    }
    for z in rule.existentials(disjunct) {
        let named = match z.display_name() {
            Some(n) => gen.fresh_named(n.as_str()),
            None => gen.fresh(),
        };
        sub.bind(z, Term::Var(named));
    }
    sub
}

fn link_predicate(rule: &DisjunctiveRule, arity: usize) -> Predicate {
    let base = match rule.name() {
        Some(n) => format!("link_{n}"),
        None => "link_rule".to_string(),
    };
    let taken = rule.predicates();
    let mut name = base;
    while taken.iter().any(|p| p.name().as_str() == name) {
        name.push('x');
    }
    Predicate::new(name.as_str(), arity)
}

/// Does `B → H_j ⊨ B → H_i` hold? Decided on the canonical instance: freeze
/// the body, apply the j-th disjunct once per body endomorphism (the "body
/// folding" triggers), and look for a homomorphism from the i-th disjunct
/// that is the identity on its frozen frontier. When this holds, the
/// disjunction collapses to the weaker disjunct and the rule is equivalent
/// to a conjunctive rule.
fn disjunct_implies(rule: &DisjunctiveRule, i: usize, j: usize) -> bool {
    let freeze: Substitution = Substitution::from_pairs(
        rule.body()
            .variables()
            .into_iter()
            .map(|v| (v.clone(), Term::constant(format!("_frz{}", v.id())))),
    );
    let frozen_body = rule.body().apply(&freeze);
    let mut canonical = frozen_body.clone();
    for (idx, endo) in all_homomorphisms(rule.body(), &frozen_body).into_iter().enumerate() {
        let mut sub = endo;
        for z in rule.existentials(j) {
            let null = Term::constant(format!("_nul{}_{}", idx, z.id()));
            sub.bind(z, null);
        }
        canonical.extend(rule.disjunct(j).apply(&sub).iter().cloned());
    }
    let premise = rule.disjunct(i).apply(&freeze);
    homomorphism(&premise, &canonical).is_some()
}

/// One datalog rule's artifacts inside a [`ReductionOutput`].
#[derive(Debug, Clone)]
pub struct ReductionEntry {
    /// Name of the datalog rule this entry encodes.
    pub rule_name: Symbol,
    /// The marker predicate private to this rule.
    pub special: Predicate,
    /// The query carrying the hatted rule body and the marker atom.
    pub query: Cq,
    /// The mapping rule that trades the marker for the hatted rule head.
    pub mapping_rule: DisjunctiveRule,
    /// The original rule head.
    pub head: Atom,
    /// The frontier tuple, in the marker atom's argument order.
    pub frontier: Vec<Variable>,
}

/// A datalog instance translated to a disjunctive mapping instance.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    /// The translated query set: the hatted input query plus one query per
    /// rule.
    pub ucq: Ucq,
    /// Renaming rules for every source predicate plus one disjunctive rule
    /// per datalog rule.
    pub mapping: Mapping,
    /// Per-rule bookkeeping, in input rule order.
    pub entries: Vec<ReductionEntry>,
}

/// Translates a conjunctive datalog instance (Boolean CQ + rules) into a
/// disjunctive mapping instance whose source rewritings are in bijection
/// with the datalog rewritings.
///
/// The source schema is the input vocabulary plus a type predicate applied
/// to every term; the target schema carries a renamed copy of each source
/// predicate plus one marker predicate per rule, with the rule's frontier as
/// arity.
pub fn build_reduction(
    q: &Cq,
    datalog_rules: &RuleSet,
    gen: &VarGen,
) -> Result<ReductionOutput, ConstructError> {
    let mut preds: BTreeSet<Predicate> = q.atoms().predicates();
    preds.extend(datalog_rules.predicates());
    for p in &preds {
        let name = p.name().as_str();
        if name == TYPE_PRED || name.starts_with("hat_") || name.starts_with("pr_") {
            return Err(ConstructError::InvalidInput(format!(
                "predicate name {name} is reserved for the generated vocabulary"
            )));
        }
    }
    for rule in datalog_rules.iter() {
        let label = rule_label(rule);
        if !rule.is_datalog() || rule.head_atom().is_none() {
            return Err(ConstructError::InvalidInput(format!(
                "rule {label} is not conjunctive datalog with an atomic head"
            )));
        }
        if !rule.body().constants().is_empty()
            || rule.disjuncts().iter().any(|d| !d.constants().is_empty())
        {
            return Err(ConstructError::InvalidInput(format!("rule {label} uses constants")));
        }
        if rule.frontier().is_empty() {
            return Err(ConstructError::InvalidInput(format!(
                "rule {label} has an empty frontier"
            )));
        }
    }

    let mut ucq = Ucq::new();
    ucq.push(Cq::new(hat_atoms(&with_type_atoms(q.atoms()))));

    let mut entries = Vec::with_capacity(datalog_rules.len());
    let mut mapping_rules = Vec::new();
    for rule in datalog_rules.iter() {
        let name = Symbol::new(&rule_label(rule));
        let head = rule.head_atom().expect("datalog rule has an atomic head").clone();
        let frontier = rule.disjunct_frontier_ordered(0);
        let special = Predicate::new(format!("pr_{name}").as_str(), frontier.len());
        let marker_args: Vec<Term> = frontier.iter().map(|v| Term::Var(v.clone())).collect();
        let marker = Atom::new(special.clone(), marker_args.clone());

        let mut query_atoms = hat_atoms(&with_type_atoms(rule.body()));
        query_atoms.insert(marker.clone());
        let query = Cq::new(query_atoms);

        let type_pred = Predicate::new(TYPE_PRED, 1);
        let mut body = AtomSet::new();
        for v in &frontier {
            body.insert(Atom::new(type_pred.clone(), vec![Term::Var(v.clone())]));
        }
        let mut hatted_head = AtomSet::new();
        hatted_head.insert(hat_atom(&head));
        let mut marker_head = AtomSet::new();
        marker_head.insert(marker);
        let mapping_rule = DisjunctiveRule::new(
            Some(Symbol::new(&format!("m_{name}"))),
            body,
            vec![marker_head, hatted_head],
        )
        .expect("nonempty body and disjuncts by construction");

        ucq.push(query.clone());
        mapping_rules.push(mapping_rule.clone());
        entries.push(ReductionEntry { rule_name: name, special, query, mapping_rule, head, frontier });
    }

    let mut source: BTreeSet<Symbol> = preds.iter().map(|p| p.name().clone()).collect();
    source.insert(Symbol::new(TYPE_PRED));
    let mut source_preds: Vec<Predicate> = preds.into_iter().collect();
    source_preds.push(Predicate::new(TYPE_PRED, 1));
    source_preds.sort();
    for p in source_preds {
        let args: Vec<Term> = (0..p.arity()).map(|_| Term::Var(gen.fresh_named("X"))).collect();
        let mut body = AtomSet::new();
        body.insert(Atom::new(p.clone(), args.clone()));
        let mut head = AtomSet::new();
        head.insert(Atom::new(hat_predicate(&p), args));
        let rule = DisjunctiveRule::new(
            Some(Symbol::new(&format!("t_{}", p.name()))),
            body,
            vec![head],
        )
        .expect("translation rules are well-formed");
        mapping_rules.push(rule);
    }

    let rules = RuleSet::new(mapping_rules, gen);
    let mapping = Mapping::new(source, rules).expect("generated rules are source-to-target");
    Ok(ReductionOutput { ucq, mapping, entries })
}

fn rule_label(rule: &DisjunctiveRule) -> String {
    rule.name().map_or_else(|| "<unnamed>".to_string(), |n| n.to_string())
}

/// The input atoms plus a type atom on each of their terms.
fn with_type_atoms(atoms: &AtomSet) -> AtomSet {
    let type_pred = Predicate::new(TYPE_PRED, 1);
    let mut out = atoms.clone();
    for t in atoms.terms() {
        out.insert(Atom::new(type_pred.clone(), vec![t]));
    }
    out
}

fn hat_predicate(p: &Predicate) -> Predicate {
    let name = if p.name().as_str() == TYPE_PRED {
        TYPE_PRED_HAT.to_string()
    } else {
        format!("hat_{}", p.name())
    };
    Predicate::new(name.as_str(), p.arity())
}

fn hat_atom(atom: &Atom) -> Atom {
    Atom::new(hat_predicate(atom.predicate()), atom.args().to_vec())
}

fn hat_atoms(atoms: &AtomSet) -> AtomSet {
    let mut out = AtomSet::new();
    for atom in atoms.iter() {
        out.insert(hat_atom(atom));
    }
    out
}

/// What [`reverse`] recovers from a CQ of a rewriting of a reduction
/// instance.
#[derive(Debug, Clone)]
pub enum Reversed {
    /// The CQ carried no marker atom: its unhatted, type-free core.
    Query(Cq),
    /// The CQ carried one marker atom: the datalog rule it encodes.
    Rule(DisjunctiveRule),
}

/// Maps a CQ from a rewriting of a reduction instance back to the datalog
/// side: strip the hats, drop the type atoms, and — when a marker atom is
/// present — rebuild the rule whose body is the remaining conjunction and
/// whose head is the marked rule's head on the marker's arguments.
pub fn reverse(q: &Cq, red: &ReductionOutput) -> Result<Reversed, ConstructError> {
    let mut specials: Vec<(&ReductionEntry, &Atom)> = Vec::new();
    for atom in q.atoms().iter() {
        if let Some(entry) =
            red.entries.iter().find(|e| e.special.name() == atom.predicate().name())
        {
            specials.push((entry, atom));
        }
    }
    if specials.len() > 1 {
        return Err(ConstructError::TooManySpecialAtoms(specials.len()));
    }

    let mut core = AtomSet::new();
    for atom in q.atoms().iter() {
        let name = atom.predicate().name().as_str();
        if specials.iter().any(|(_, a)| *a == atom) {
            continue;
        }
        let unhatted = if name == TYPE_PRED_HAT || name == TYPE_PRED {
            continue;
        } else if let Some(stripped) = name.strip_prefix("hat_") {
            stripped.to_string()
        } else if red.mapping.source().contains(atom.predicate().name()) {
            name.to_string()
        } else {
            return Err(ConstructError::UnknownSpecialPredicate(name.to_string()));
        };
        core.insert(Atom::new(
            Predicate::new(unhatted.as_str(), atom.predicate().arity()),
            atom.args().to_vec(),
        ));
    }

    match specials.pop() {
        None => Ok(Reversed::Query(Cq::new(core))),
        Some((entry, marker)) => {
            if core.is_empty() {
                return Err(ConstructError::InvalidInput(
                    "marker query reverses to a rule with an empty body".to_string(),
                ));
            }
            let sub = Substitution::from_pairs(
                entry.frontier.iter().cloned().zip(marker.args().iter().cloned()),
            );
            let mut head = AtomSet::new();
            head.insert(entry.head.apply(&sub));
            let rule =
                DisjunctiveRule::new(Some(entry.rule_name.clone()), core, vec![head])
                    .expect("nonempty body checked above");
            Ok(Reversed::Rule(rule))
        }
    }
}

/// All rules obtainable from a conjunctive datalog rule set by at most
/// `max_compositions` unfoldings, deduplicated up to mutual subsumption.
///
/// The unfolding of `R2` by `R1` resolves one body atom of `R2` against the
/// head of (a fresh copy of) `R1`: the result keeps `R1`'s body, the rest of
/// `R2`'s body, and `R2`'s head, all under the most general unifier. Input
/// rules count as zero compositions.
pub fn unfold_closure(datalog_rules: &RuleSet, max_compositions: usize, gen: &VarGen) -> RuleSet {
    assert!(datalog_rules.is_datalog(), "unfolding is defined for conjunctive datalog rules");
    let mut acc: Vec<DisjunctiveRule> = Vec::new();
    for rule in datalog_rules.iter() {
        if !acc.iter().any(|r| datalog_rules_equivalent(r, rule, gen)) {
            acc.push(rule.clone());
        }
    }
    let mut level: Vec<DisjunctiveRule> = acc.clone();
    for _ in 0..max_compositions {
        let mut next: Vec<DisjunctiveRule> = Vec::new();
        for outer in &level {
            for inner in datalog_rules.iter() {
                for composed in unfold_pairs(outer, inner, gen) {
                    if !acc.iter().any(|r| datalog_rules_equivalent(r, &composed, gen))
                        && !next.iter().any(|r| datalog_rules_equivalent(r, &composed, gen))
                    {
                        next.push(composed);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        acc.extend(next.iter().cloned());
        level = next;
    }
    RuleSet::new(acc, gen)
}

/// Every unfolding of `outer` by `inner`: one per body atom of `outer` that
/// unifies with `inner`'s head.
fn unfold_pairs(
    outer: &DisjunctiveRule,
    inner: &DisjunctiveRule,
    gen: &VarGen,
) -> Vec<DisjunctiveRule> {
    let (inner, _) = inner.safe_copy(gen);
    let inner_head = inner.head_atom().expect("datalog head").clone();
    let outer_head = outer.head_atom().expect("datalog head").clone();
    let mut out = Vec::new();
    for atom in outer.body().iter() {
        if atom.predicate() != inner_head.predicate() {
            continue;
        }
        let Some(u) = most_general_unifier(atom, &inner_head) else { continue };
        let mut body = inner.body().apply(&u);
        let mut rest = outer.body().clone();
        rest.remove(atom);
        body.extend(rest.apply(&u).iter().cloned());
        let mut head = AtomSet::new();
        head.insert(outer_head.apply(&u));
        // Underscore-joined so the name stays a single identifier in the
        // wire format.
        let name = format!(
            "{}_{}",
            outer.name().map_or("rule", |n| n.as_str()),
            inner.name().map_or("rule", |n| n.as_str())
        );
        let rule = DisjunctiveRule::new(Some(Symbol::new(&name)), body, vec![head])
            .expect("unfolded rule keeps a nonempty body");
        out.push(rule);
    }
    out
}

/// Most general unifier of two atoms over the same predicate, as a
/// substitution to class representatives. `None` when a position forces two
/// distinct constants together.
fn most_general_unifier(a: &Atom, b: &Atom) -> Option<Substitution> {
    if a.predicate() != b.predicate() {
        return None;
    }
    let mut partition = TermPartition::new();
    for (s, t) in a.args().iter().zip(b.args()) {
        partition.merge(s, t);
    }
    if !partition.is_admissible() {
        return None;
    }
    partition.associated_substitution().ok()
}

/// Rule equivalence for deduplication: mutual subsumption, i.e. a
/// substitution each way that maps head onto head and body into body.
pub fn datalog_rules_equivalent(
    a: &DisjunctiveRule,
    b: &DisjunctiveRule,
    gen: &VarGen,
) -> bool {
    subsumes(a, b, gen) && subsumes(b, a, gen)
}

/// Is there a substitution mapping `a`'s head onto `b`'s head and `a`'s body
/// into `b`'s body?
fn subsumes(a: &DisjunctiveRule, b: &DisjunctiveRule, gen: &VarGen) -> bool {
    let (b, _) = b.safe_copy(gen);
    let (Some(head_a), Some(head_b)) = (a.head_atom(), b.head_atom()) else {
        return false;
    };
    if head_a.predicate() != head_b.predicate() {
        return false;
    }
    let mut seed = Substitution::new();
    for (s, t) in head_a.args().iter().zip(head_b.args()) {
        match s {
            Term::Var(v) => match seed.get(v) {
                None => seed.bind(v.clone(), t.clone()),
                Some(existing) if existing == t => {}
                Some(_) => return false,
            },
            Term::Const(_) => {
                if s != t {
                    return false;
                }
            }
        }
    }
    homomorphism_extending(&seed, a.body(), b.body()).is_some()
}
