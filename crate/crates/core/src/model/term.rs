//! Terms: constants, variables, and the session-wide variable-id source.
//!
//! Variables are identified by an opaque integer id; the display name, when
//! present, is kept only for round-tripping parsed input and never takes part
//! in equality, ordering, or hashing. Fresh ids come from a [`VarGen`] that
//! only counts upward, so an id handed out once is never reissued within a
//! session and safe copies can never collide with existing variables.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// An interned-ish string: cheap to clone, compared by content.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s.as_str()))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A variable, identified by its id alone.
#[derive(Clone)]
pub struct Variable {
    id: u64,
    name: Option<Symbol>,
}

impl Variable {
    pub fn new(id: u64) -> Self {
        Variable { id, name: None }
    }

    pub fn named(id: u64, name: impl Into<Symbol>) -> Self {
        Variable { id, name: Some(name.into()) }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// The display name from the source text, if this variable has one.
    pub fn display_name(&self) -> Option<&Symbol> {
        self.name.as_ref()
    }
}

impl PartialEq for Variable {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Variable {}

impl PartialOrd for Variable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Variable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl std::hash::Hash for Variable {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "X{}", self.id),
        }
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A term is a constant or a variable. Constants order before variables,
/// which gives every deterministic pipeline in the crate its tie-break.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Symbol),
    Var(Variable),
}

impl Term {
    pub fn constant(name: impl Into<Symbol>) -> Self {
        Term::Const(name.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl From<Variable> for Term {
    fn from(v: Variable) -> Self {
        Term::Var(v)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Monotone source of fresh variable ids for one reasoning session.
///
/// Everything that invents variables (safe copies, chase existentials,
/// canonical renaming) draws from the same generator, which is what makes
/// "fresh" mean fresh across the whole session.
#[derive(Debug, Default)]
pub struct VarGen {
    next: AtomicU64,
}

impl VarGen {
    pub fn new() -> Self {
        VarGen { next: AtomicU64::new(0) }
    }

    /// Start above `floor`; used when ids already exist (e.g. after parsing).
    pub fn starting_at(floor: u64) -> Self {
        VarGen { next: AtomicU64::new(floor) }
    }

    pub fn fresh_id(&self) -> u64 {
        self.next.fetch_add(1, Ordering::Relaxed)
    }

    pub fn fresh(&self) -> Variable {
        Variable::new(self.fresh_id())
    }

    pub fn fresh_named(&self, name: impl Into<Symbol>) -> Variable {
        Variable::named(self.fresh_id(), name)
    }

    /// Highest id handed out so far plus one (zero if none).
    pub fn watermark(&self) -> u64 {
        self.next.load(Ordering::Relaxed)
    }
}
