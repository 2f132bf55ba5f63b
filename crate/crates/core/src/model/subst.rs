//! Substitutions: finite maps from variables to terms.
//!
//! Application is simultaneous — every variable is looked up exactly once —
//! so a swap like {x↦y, y↦x} behaves correctly. Constructors that build a map
//! from possibly-chained bindings normalize to solved form (no mapped variable
//! appears in any image) where that is achievable; genuine cycles such as the
//! swap are left as-is, which simultaneous application handles.

use std::collections::BTreeMap;
use std::fmt;

use super::term::{Term, VarGen, Variable};

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(BTreeMap<Variable, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    /// Build from pairs, resolving chains like {x↦y, y↦z} to {x↦z, y↦z}.
    /// Cyclic chains stop at the point of revisiting.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Variable, Term)>) -> Self {
        let raw: BTreeMap<Variable, Term> = pairs.into_iter().collect();
        let mut resolved = BTreeMap::new();
        for v in raw.keys() {
            let mut seen = vec![v.clone()];
            let mut cur = raw.get(v).cloned().unwrap();
            let mut cyclic = false;
            while let Term::Var(ref next) = cur {
                if seen.contains(next) {
                    cyclic = true;
                    break;
                }
                match raw.get(next) {
                    Some(t) => {
                        seen.push(next.clone());
                        cur = t.clone();
                    }
                    None => break,
                }
            }
            // A cyclic chain cannot be solved; keep the immediate binding and
            // rely on simultaneous application.
            let image = if cyclic { raw.get(v).cloned().unwrap() } else { cur };
            if image != Term::Var(v.clone()) {
                resolved.insert(v.clone(), image);
            }
        }
        Substitution(resolved)
    }

    /// A renaming that maps each listed variable to a fresh anonymous one.
    pub fn renaming<'a>(vars: impl Iterator<Item = &'a Variable>, gen: &VarGen) -> Self {
        Substitution(vars.map(|v| (v.clone(), Term::Var(gen.fresh()))).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, v: &Variable) -> Option<&Term> {
        self.0.get(v)
    }

    /// Add a binding. Identity bindings are dropped rather than stored.
    pub fn bind(&mut self, v: Variable, t: Term) {
        if Term::Var(v.clone()) != t {
            self.0.insert(v, t);
        }
    }

    pub fn domain(&self) -> impl Iterator<Item = &Variable> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    }

    /// True when no mapped variable appears in any image.
    pub fn is_solved(&self) -> bool {
        self.0.values().all(|t| match t {
            Term::Var(v) => !self.0.contains_key(v),
            Term::Const(_) => true,
        })
    }
}

impl FromIterator<(Variable, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Variable, Term)>>(iter: I) -> Self {
        Substitution(
            iter.into_iter()
                .filter(|(v, t)| Term::Var(v.clone()) != *t)
                .collect(),
        )
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}->{t}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u64) -> Variable {
        Variable::new(id)
    }

    #[test]
    fn chains_resolve_to_solved_form() {
        let s = Substitution::from_pairs([
            (v(0), Term::Var(v(1))),
            (v(1), Term::Var(v(2))),
        ]);
        assert!(s.is_solved());
        assert_eq!(s.apply_term(&Term::Var(v(0))), Term::Var(v(2)));
        assert_eq!(s.apply_term(&Term::Var(v(1))), Term::Var(v(2)));
    }

    #[test]
    fn solved_form_application_is_idempotent() {
        let s = Substitution::from_pairs([
            (v(0), Term::Var(v(2))),
            (v(1), Term::constant("a")),
        ]);
        assert!(s.is_solved());
        let once = s.apply_term(&Term::Var(v(0)));
        let twice = s.apply_term(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn swap_applies_simultaneously() {
        let s: Substitution =
            [(v(0), Term::Var(v(1))), (v(1), Term::Var(v(0)))].into_iter().collect();
        assert_eq!(s.apply_term(&Term::Var(v(0))), Term::Var(v(1)));
        assert_eq!(s.apply_term(&Term::Var(v(1))), Term::Var(v(0)));
    }

    #[test]
    fn from_pairs_keeps_cyclic_bindings() {
        let s = Substitution::from_pairs([
            (v(0), Term::Var(v(1))),
            (v(1), Term::Var(v(0))),
        ]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.apply_term(&Term::Var(v(0))), Term::Var(v(1)));
        assert_eq!(s.apply_term(&Term::Var(v(1))), Term::Var(v(0)));
    }

    #[test]
    fn identity_bindings_are_dropped() {
        let mut s = Substitution::new();
        s.bind(v(3), Term::Var(v(3)));
        assert!(s.is_empty());
    }
}
