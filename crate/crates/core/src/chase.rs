//! The disjunctive chase: triggers, one-step application, derivation trees,
//! and entailment checking over them.
//!
//! A trigger is a rule paired with a homomorphism from its body into a fact
//! base. Applying one to a fact base yields one extended fact base per head
//! disjunct (existential head variables renamed fresh), and iterating this
//! grows a derivation tree whose branches jointly stand for the disjunctive
//! case split. A UCQ is entailed exactly when some finite tree has every
//! branch label entailing it; a saturated branch that does not entail the UCQ
//! is a counter-model.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::model::{
    homomorphism_extending, AtomSet, DisjunctiveRule, RuleSet, Substitution, Term, Ucq, VarGen,
};

/// A rule (by index into its set) with a homomorphism from its body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trigger {
    rule_idx: usize,
    hom: Substitution,
    key: TriggerKey,
}

/// Identity of a trigger on any fact base: the rule and the image tuple of
/// its body variables (in variable order). Distinct homomorphisms from one
/// body always differ on this tuple.
pub type TriggerKey = (usize, Vec<Term>);

impl Trigger {
    /// Builds and validates: `hom(body)` must be inside `f`.
    pub fn new(
        rules: &RuleSet,
        rule_idx: usize,
        hom: Substitution,
        f: &AtomSet,
    ) -> Option<Trigger> {
        let rule = rules.get(rule_idx);
        if !rule.body().apply(&hom).is_subset(f) {
            return None;
        }
        let key = Self::key_for(rule, rule_idx, &hom);
        Some(Trigger { rule_idx, hom, key })
    }

    fn key_for(rule: &DisjunctiveRule, rule_idx: usize, hom: &Substitution) -> TriggerKey {
        let image: Vec<Term> = rule
            .body()
            .variables()
            .iter()
            .map(|v| hom.apply_term(&Term::Var(v.clone())))
            .collect();
        (rule_idx, image)
    }

    pub fn rule_idx(&self) -> usize {
        self.rule_idx
    }

    pub fn hom(&self) -> &Substitution {
        &self.hom
    }

    pub fn key(&self) -> &TriggerKey {
        &self.key
    }
}

/// All triggers of all rules on `f`, rule-major, then lexicographic on the
/// image tuple of the body variables.
pub fn find_triggers(f: &AtomSet, rules: &RuleSet) -> Vec<Trigger> {
    let mut out = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        out.extend(rule_triggers(f, rule, i));
    }
    out
}

/// All triggers of one rule on `f`; `rule_idx` is the rule's position in its
/// set and only feeds the trigger key.
pub fn rule_triggers(f: &AtomSet, rule: &DisjunctiveRule, rule_idx: usize) -> Vec<Trigger> {
    let mut out: Vec<Trigger> = crate::model::all_homomorphisms(rule.body(), f)
        .into_iter()
        .map(|hom| {
            let key = Trigger::key_for(rule, rule_idx, &hom);
            Trigger { rule_idx, hom, key }
        })
        .collect();
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out.dedup_by(|a, b| a.key == b.key);
    out
}

/// Is the trigger satisfied by `f`: does some disjunct have an extension of
/// the trigger's homomorphism mapping it into `f`? Satisfaction is monotone
/// in `f`, since any witnessing extension keeps working in supersets.
pub fn is_satisfied(t: &Trigger, f: &AtomSet, rules: &RuleSet) -> bool {
    let rule = rules.get(t.rule_idx);
    rule.disjuncts()
        .iter()
        .any(|d| homomorphism_extending(&t.hom, d, f).is_some())
}

/// One chase step: one extended fact base per disjunct, in disjunct order,
/// with that disjunct's existential variables renamed fresh.
pub fn apply_trigger(f: &AtomSet, t: &Trigger, rules: &RuleSet, gen: &VarGen) -> Vec<AtomSet> {
    let rule = rules.get(t.rule_idx);
    (0..rule.disjuncts().len())
        .map(|i| {
            let mut h_safe = t.hom.clone();
            for v in rule.existentials(i) {
                h_safe.bind(v, Term::Var(gen.fresh()));
            }
            f.union(&rule.disjunct(i).apply(&h_safe))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeState {
    /// Unexpanded leaf with (potentially) more triggers to process.
    Open,
    /// Leaf with no unprocessed trigger left: its label is a model of the
    /// rule set.
    Saturated,
    /// Leaf whose label entails the query under test; never expanded further.
    Closed,
    /// Expanded vertex; its children are the one-step results.
    Inner,
}

impl NodeState {
    fn tag(self) -> &'static str {
        match self {
            NodeState::Open => "open",
            NodeState::Saturated => "saturated",
            NodeState::Closed => "closed",
            NodeState::Inner => "inner",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub label: AtomSet,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Trigger applied *at* this vertex to produce its children.
    pub trigger: Option<Trigger>,
    pub depth: usize,
    pub state: NodeState,
    /// FIFO queue of triggers discovered on this branch and not yet handled.
    pending: VecDeque<Trigger>,
    /// Keys of triggers already applied or skipped on this branch.
    handled: BTreeSet<TriggerKey>,
}

#[derive(Debug, Clone)]
pub struct DerivationTree {
    nodes: Vec<Node>,
}

impl DerivationTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // there is always a root
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &Node)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.state != NodeState::Inner)
    }

    pub fn open_leaves(&self) -> impl Iterator<Item = (usize, &Node)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.state == NodeState::Open)
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn is_saturated(&self) -> bool {
        self.open_leaves().next().is_none()
    }

    /// Structural re-validation, used by tests on every stored tree: root
    /// label, child labels exactly matching a re-application of the stored
    /// trigger (modulo the fresh names it drew), and label growth along
    /// edges.
    pub fn validate(&self, f: &AtomSet, rules: &RuleSet) -> Result<(), String> {
        if &self.nodes[0].label != f {
            return Err("root label differs from input fact base".into());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match (&n.trigger, n.children.is_empty()) {
                (Some(t), false) => {
                    let rule = rules.get(t.rule_idx);
                    if n.children.len() != rule.disjuncts().len() {
                        return Err(format!("node {i}: child count != disjunct count"));
                    }
                    if !rule.body().apply(&t.hom).is_subset(&n.label) {
                        return Err(format!("node {i}: stored trigger invalid on label"));
                    }
                    // Fresh names differ between runs, so compare one-step
                    // results up to a variable bijection.
                    let gen = VarGen::starting_at(self.max_var_id() + 1);
                    let expect = apply_trigger(&n.label, t, rules, &gen);
                    for (child, want) in n.children.iter().zip(expect) {
                        let got = &self.nodes[*child].label;
                        if !crate::model::isomorphic(got, &want) {
                            return Err(format!(
                                "node {i}: child {child} label differs from one-step result"
                            ));
                        }
                        if !n.label.is_subset(got) {
                            return Err(format!("node {i}: label shrank toward child {child}"));
                        }
                        if self.nodes[*child].depth != n.depth + 1 {
                            return Err(format!("node {i}: child depth mismatch"));
                        }
                    }
                }
                (None, true) => {}
                (Some(_), true) => return Err(format!("node {i}: trigger without children")),
                (None, false) => return Err(format!("node {i}: children without a trigger")),
            }
        }
        Ok(())
    }

    fn max_var_id(&self) -> u64 {
        self.nodes
            .iter()
            .flat_map(|n| n.label.variables())
            .map(|v| v.id())
            .max()
            .unwrap_or(0)
    }

    /// Indented one-line-per-vertex rendering with trigger annotations.
    pub fn render(&self, rules: &RuleSet) -> String {
        let mut out = String::new();
        self.render_node(0, rules, &mut out);
        out
    }

    fn render_node(&self, i: usize, rules: &RuleSet, out: &mut String) {
        let n = &self.nodes[i];
        let indent = "  ".repeat(n.depth);
        let _ = write!(out, "{indent}#{i} [{}] {}", n.state.tag(), n.label);
        if let Some(t) = &n.trigger {
            let rule = rules.get(t.rule_idx);
            let label = rule
                .name()
                .map_or_else(|| format!("rule#{}", t.rule_idx), |s| s.to_string());
            let bindings: Vec<String> = rule
                .body()
                .variables()
                .iter()
                .map(|v| format!("{v}={}", t.hom.apply_term(&Term::Var(v.clone()))))
                .collect();
            let _ = write!(out, "  <- {label}({})", bindings.join(", "));
        }
        out.push('\n');
        for &c in &n.children {
            self.render_node(c, rules, out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChaseBudget {
    /// Leaves at this depth are not expanded further.
    pub max_depth: usize,
    /// No trigger application may push the vertex count past this.
    pub max_nodes: usize,
    /// Skip triggers already satisfied where they would be applied.
    pub restricted: bool,
}

impl Default for ChaseBudget {
    fn default() -> Self {
        ChaseBudget { max_depth: 8, max_nodes: 2000, restricted: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChaseStats {
    pub nodes: usize,
    pub depth: usize,
    pub open_leaves: usize,
}

#[derive(Debug, Clone)]
pub enum ChaseVerdict {
    /// Every branch of the witness tree reached a label entailing the query.
    Entailed(DerivationTree),
    /// The indexed leaf is saturated and its label does not entail the
    /// query: a counter-model.
    NotEntailed(DerivationTree, usize),
    /// Budget ran out with undecided branches.
    Unknown(ChaseStats),
}

impl ChaseVerdict {
    pub fn status(&self) -> &'static str {
        match self {
            ChaseVerdict::Entailed(_) => "entailed",
            ChaseVerdict::NotEntailed(..) => "not_entailed",
            ChaseVerdict::Unknown(_) => "unknown",
        }
    }
}

/// Breadth-first expansion without a query: grows the tree until saturation
/// or budget. Fresh existentials come from `gen`, which must clear every
/// variable id in `f` and `rules`.
pub fn expand_chase(
    f: &AtomSet,
    rules: &RuleSet,
    budget: ChaseBudget,
    gen: &VarGen,
) -> DerivationTree {
    Expansion::new(f, rules, budget, None, gen).run().0
}

/// Certain-answer entailment on top of the chase. Leaves entailing `q` are
/// closed eagerly; the first saturated leaf that does not entail `q` decides
/// the question negatively.
pub fn chase_entails(
    f: &AtomSet,
    rules: &RuleSet,
    q: &Ucq,
    budget: ChaseBudget,
    gen: &VarGen,
) -> ChaseVerdict {
    // Keep query variables clear of the nulls the expansion will invent:
    // shared ids would wrongly constrain the entailment checks.
    let mut q_fresh = Ucq::new();
    for cq in q.iter() {
        q_fresh.push(cq.safe_copy(gen).0);
    }
    let (tree, witness) = Expansion::new(f, rules, budget, Some(&q_fresh), gen).run();
    if let Some(leaf) = witness {
        return ChaseVerdict::NotEntailed(tree, leaf);
    }
    let open = tree.open_leaves().count();
    if open == 0 {
        ChaseVerdict::Entailed(tree)
    } else {
        ChaseVerdict::Unknown(ChaseStats { nodes: tree.len(), depth: tree.depth(), open_leaves: open })
    }
}

struct Expansion<'a> {
    rules: &'a RuleSet,
    budget: ChaseBudget,
    q: Option<&'a Ucq>,
    gen: &'a VarGen,
    nodes: Vec<Node>,
    queue: VecDeque<usize>,
}

impl<'a> Expansion<'a> {
    fn new(
        f: &AtomSet,
        rules: &'a RuleSet,
        budget: ChaseBudget,
        q: Option<&'a Ucq>,
        gen: &'a VarGen,
    ) -> Self {
        let root = Node {
            label: f.clone(),
            parent: None,
            children: Vec::new(),
            trigger: None,
            depth: 0,
            state: NodeState::Open,
            pending: find_triggers(f, rules).into(),
            handled: BTreeSet::new(),
        };
        Expansion { rules, budget, q, gen, nodes: vec![root], queue: VecDeque::new() }
    }

    /// Returns the tree and, when a query was given, the first saturated
    /// non-entailing leaf found (if any).
    fn run(mut self) -> (DerivationTree, Option<usize>) {
        if self.close_if_entailing(0) {
            return (DerivationTree { nodes: self.nodes }, None);
        }
        self.queue.push_back(0);
        let mut witness = None;
        'expansion: while let Some(v) = self.queue.pop_front() {
            if self.nodes[v].depth >= self.budget.max_depth {
                continue; // stays open: undecided within this budget
            }
            let trigger = loop {
                match self.nodes[v].pending.pop_front() {
                    None => break None,
                    Some(t) => {
                        if self.budget.restricted
                            && is_satisfied(&t, &self.nodes[v].label, self.rules)
                        {
                            // Satisfaction is monotone along a branch, so a
                            // skip here is a skip forever.
                            let key = t.key.clone();
                            self.nodes[v].handled.insert(key);
                            continue;
                        }
                        break Some(t);
                    }
                }
            };
            let Some(t) = trigger else {
                self.nodes[v].state = NodeState::Saturated;
                if self.q.is_some() {
                    // Entailing leaves were closed at creation, so this
                    // saturated label is a counter-model: stop early.
                    witness = Some(v);
                    break 'expansion;
                }
                continue;
            };
            let fanout = self.rules.get(t.rule_idx).disjuncts().len();
            if self.nodes.len() + fanout > self.budget.max_nodes {
                self.nodes[v].pending.push_front(t); // keep tree state honest
                break 'expansion;
            }
            self.apply_at(v, t);
        }
        (DerivationTree { nodes: self.nodes }, witness)
    }

    fn apply_at(&mut self, v: usize, t: Trigger) {
        let results = apply_trigger(&self.nodes[v].label, &t, self.rules, self.gen);
        self.nodes[v].handled.insert(t.key.clone());
        for label in results {
            let mut pending = self.nodes[v].pending.clone();
            let handled = self.nodes[v].handled.clone();
            let known: BTreeSet<TriggerKey> = pending
                .iter()
                .map(|p| p.key.clone())
                .chain(handled.iter().cloned())
                .collect();
            pending.extend(
                find_triggers(&label, self.rules)
                    .into_iter()
                    .filter(|t| !known.contains(&t.key)),
            );
            let id = self.nodes.len();
            self.nodes.push(Node {
                label,
                parent: Some(v),
                children: Vec::new(),
                trigger: None,
                depth: self.nodes[v].depth + 1,
                state: NodeState::Open,
                pending,
                handled,
            });
            self.nodes[v].children.push(id);
            if !self.close_if_entailing(id) {
                self.queue.push_back(id);
            }
        }
        self.nodes[v].state = NodeState::Inner;
        self.nodes[v].trigger = Some(t);
    }

    /// Eager query check; closing a leaf prunes the branch.
    fn close_if_entailing(&mut self, v: usize) -> bool {
        match self.q {
            Some(q) if q.holds_in(&self.nodes[v].label) => {
                self.nodes[v].state = NodeState::Closed;
                true
            }
            _ => false,
        }
    }
}
