//! Serializers: documents back to the wire format, UCQs as query lines.
//!
//! Round-tripping is modulo variable renaming — parsed variable ids are
//! session-local — so printing recovers surface names where they exist and
//! invents `X<id>` (disambiguated per statement) where they do not.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::Document;
use crate::model::{Atom, AtomSet, Term, Ucq, Variable};

/// Per-statement display names: surface name if present, usable, and
/// unclaimed, otherwise `X<id>`, and as a last resort `<base>_<id>` (ids are
/// unique, so that always settles it). A surface name is usable only if the
/// parser would read it back as a variable, i.e. it is uppercase-initial;
/// programmatically built variables may carry arbitrary display names.
fn assign_names<'a>(vars: impl Iterator<Item = &'a Variable>) -> BTreeMap<Variable, String> {
    let mut names: BTreeMap<Variable, String> = BTreeMap::new();
    let mut taken: BTreeSet<String> = BTreeSet::new();
    for v in vars {
        if names.contains_key(v) {
            continue;
        }
        let base = v
            .display_name()
            .filter(|s| s.as_str().starts_with(|c: char| c.is_ascii_uppercase()))
            .map_or_else(|| format!("X{}", v.id()), |s| s.to_string());
        let name = if taken.contains(&base) { format!("{}_{}", base, v.id()) } else { base };
        taken.insert(name.clone());
        names.insert(v.clone(), name);
    }
    names
}

fn atom_text(atom: &Atom, names: &BTreeMap<Variable, String>) -> String {
    let args: Vec<String> = atom
        .args()
        .iter()
        .map(|t| match t {
            Term::Const(c) => c.to_string(),
            Term::Var(v) => names[v].clone(),
        })
        .collect();
    if args.is_empty() {
        atom.predicate().name().to_string()
    } else {
        format!("{}({})", atom.predicate().name(), args.join(","))
    }
}

fn atom_list_text(atoms: &AtomSet, names: &BTreeMap<Variable, String>) -> String {
    atoms.iter().map(|a| atom_text(a, names)).collect::<Vec<_>>().join(", ")
}

pub fn serialize_document(doc: &Document) -> String {
    let mut out = String::new();
    if let Some(source) = doc.source() {
        let names: Vec<&str> = source.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "@source {}.", names.join(", "));
    }
    if !doc.facts().is_empty() {
        out.push_str("@facts\n");
        let empty = BTreeMap::new();
        for atom in doc.facts().iter() {
            let _ = writeln!(out, "{}.", atom_text(atom, &empty));
        }
    }
    if !doc.rules().is_empty() {
        out.push_str("@rules\n");
        for rule in doc.rules().iter() {
            let names = assign_names(
                rule.body()
                    .iter()
                    .chain(rule.disjuncts().iter().flat_map(|d| d.iter()))
                    .flat_map(Atom::variables),
            );
            if let Some(name) = rule.name() {
                let _ = write!(out, "{name}: ");
            }
            let heads: Vec<String> =
                rule.disjuncts().iter().map(|d| atom_list_text(d, &names)).collect();
            let _ = writeln!(out, "{} -> {}.", atom_list_text(rule.body(), &names), heads.join(" | "));
        }
    }
    if !doc.queries().is_empty() {
        out.push_str("@queries\n");
        for q in doc.queries() {
            let names = assign_names(q.cq.atoms().iter().flat_map(Atom::variables));
            if let Some(name) = &q.name {
                let _ = write!(out, "{name}: ");
            }
            let _ = writeln!(out, "? :- {}.", atom_list_text(q.cq.atoms(), &names));
        }
    }
    out
}

/// One query line per CQ, in canonical-string order; an empty UCQ prints as a
/// lone comment so the output is never silently blank.
pub fn serialize_ucq(ucq: &Ucq) -> String {
    if ucq.is_empty() {
        return "% empty UCQ (no disjuncts)\n".to_string();
    }
    let mut out = String::new();
    for s in ucq.canonical_strings() {
        let _ = writeln!(out, "? :- {s}.");
    }
    out
}
