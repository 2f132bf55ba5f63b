//! Recursive-descent parser over the token stream.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use super::lex::{lex, Pos, Tok};
use super::{Document, NamedQuery, TextError};
use crate::model::{
    Atom, AtomSet, Cq, DisjunctiveRule, Predicate, Symbol, Term, VarGen, Variable,
};

pub fn parse(input: &str) -> Result<Document, TextError> {
    Parser::new(lex(input)?).document()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Facts,
    Rules,
    Queries,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    gen: VarGen,
    /// First-use arity per predicate name, with the position that fixed it.
    arities: BTreeMap<String, usize>,
}

/// Variable scope of a single statement: same surface name, same variable.
type Scope = BTreeMap<String, Variable>;

fn syntax(pos: Pos, msg: impl Into<String>) -> TextError {
    TextError::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
}

fn is_variable_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase())
}

impl Parser {
    fn new(toks: Vec<(Tok, Pos)>) -> Self {
        Parser { toks, i: 0, gen: VarGen::new(), arities: BTreeMap::new() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.i + 1).map(|(t, _)| t)
    }

    /// Position of the next token, or just past the last one at EOF.
    fn pos(&self) -> Pos {
        match self.toks.get(self.i) {
            Some((_, p)) => *p,
            None => self.toks.last().map_or(Pos { line: 1, col: 1 }, |(t, p)| Pos {
                line: p.line,
                col: p.col + t.describe().len(),
            }),
        }
    }

    fn advance(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.i).cloned();
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, ctx: &str) -> Result<Pos, TextError> {
        match self.advance() {
            Some((t, p)) if &t == want => Ok(p),
            Some((t, p)) => {
                Err(syntax(p, format!("expected {} {ctx}, found {}", want.describe(), t.describe())))
            }
            None => Err(syntax(self.pos(), format!("expected {} {ctx}", want.describe()))),
        }
    }

    fn expect_ident(&mut self, ctx: &str) -> Result<(String, Pos), TextError> {
        match self.advance() {
            Some((Tok::Ident(s), p)) => Ok((s, p)),
            Some((t, p)) => Err(syntax(p, format!("expected {ctx}, found {}", t.describe()))),
            None => Err(syntax(self.pos(), format!("expected {ctx}"))),
        }
    }

    fn document(mut self) -> Result<Document, TextError> {
        let mut facts = AtomSet::new();
        let mut rules = Vec::new();
        let mut queries = Vec::new();
        let mut source: Option<BTreeSet<Symbol>> = None;
        let mut section: Option<Section> = None;
        while let Some(tok) = self.peek() {
            if let Tok::Section(name) = tok {
                let name = name.clone();
                let pos = self.pos();
                self.i += 1;
                match name.as_str() {
                    "facts" => section = Some(Section::Facts),
                    "rules" => section = Some(Section::Rules),
                    "queries" => section = Some(Section::Queries),
                    "source" => {
                        let names = self.source_list()?;
                        source.get_or_insert_with(BTreeSet::new).extend(names);
                        section = None;
                    }
                    other => return Err(syntax(pos, format!("unknown section '@{other}'"))),
                }
                continue;
            }
            match section {
                None => {
                    return Err(syntax(self.pos(), "statement before any section header"));
                }
                Some(Section::Facts) => self.fact_statement(&mut facts)?,
                Some(Section::Rules) => rules.push(self.rule_statement()?),
                Some(Section::Queries) => queries.push(self.query_statement()?),
            }
        }
        let rules = crate::model::RuleSet::new(rules, &self.gen);
        // Re-raise arity conflicts with positions via our own table; the
        // document constructor would catch them too, but without location.
        Document::new(facts, rules, queries, source)
    }

    fn source_list(&mut self) -> Result<Vec<Symbol>, TextError> {
        let mut names = Vec::new();
        loop {
            let (name, pos) = self.expect_ident("predicate name in @source")?;
            if is_variable_name(&name) {
                return Err(syntax(pos, format!("'{name}' cannot name a predicate (uppercase-initial identifiers are variables)")));
            }
            names.push(Symbol::new(&name));
            match self.advance() {
                Some((Tok::Comma, _)) => continue,
                Some((Tok::Dot, _)) => return Ok(names),
                Some((t, p)) => {
                    return Err(syntax(p, format!("expected ',' or '.' in @source, found {}", t.describe())));
                }
                None => return Err(syntax(self.pos(), "unterminated @source list")),
            }
        }
    }

    fn fact_statement(&mut self, facts: &mut AtomSet) -> Result<(), TextError> {
        let mut scope = Scope::new();
        loop {
            let atom = self.atom(&mut scope, true)?;
            facts.insert(atom);
            match self.advance() {
                Some((Tok::Comma, _)) => continue,
                Some((Tok::Dot, _)) => return Ok(()),
                Some((t, p)) => {
                    return Err(syntax(p, format!("expected ',' or '.' after fact, found {}", t.describe())));
                }
                None => return Err(syntax(self.pos(), "unterminated fact statement")),
            }
        }
    }

    fn statement_name(&mut self) -> Option<Symbol> {
        if let (Some(Tok::Ident(name)), Some(Tok::Colon)) = (self.peek(), self.peek2()) {
            let name = Symbol::new(name);
            self.i += 2;
            Some(name)
        } else {
            None
        }
    }

    fn rule_statement(&mut self) -> Result<DisjunctiveRule, TextError> {
        let name = self.statement_name();
        let mut scope = Scope::new();
        let (body, stop) = self.atom_list(&mut scope, &[Tok::Arrow], "'->'")?;
        debug_assert_eq!(stop, Tok::Arrow);
        let mut disjuncts = Vec::new();
        loop {
            let (head, stop) = self.atom_list(&mut scope, &[Tok::Pipe, Tok::Dot], "'|' or '.'")?;
            disjuncts.push(head);
            if stop == Tok::Dot {
                break;
            }
        }
        Ok(DisjunctiveRule::new(name, body, disjuncts)?)
    }

    fn query_statement(&mut self) -> Result<NamedQuery, TextError> {
        let name = self.statement_name();
        self.expect(&Tok::Question, "to open a query")?;
        self.expect(&Tok::Turnstile, "after '?'")?;
        let mut scope = Scope::new();
        let (atoms, _) = self.atom_list(&mut scope, &[Tok::Dot], "'.'")?;
        Ok(NamedQuery { name, cq: Cq::new(atoms) })
    }

    /// `atom ("," atom)*` followed by one of `enders`, which is consumed and
    /// returned.
    fn atom_list(
        &mut self,
        scope: &mut Scope,
        enders: &[Tok],
        ender_desc: &str,
    ) -> Result<(AtomSet, Tok), TextError> {
        let mut atoms = AtomSet::new();
        loop {
            atoms.insert(self.atom(scope, false)?);
            match self.advance() {
                Some((Tok::Comma, _)) => continue,
                Some((t, _)) if enders.contains(&t) => return Ok((atoms, t)),
                Some((t, p)) => {
                    return Err(syntax(p, format!("expected ',' or {ender_desc}, found {}", t.describe())));
                }
                None => {
                    return Err(syntax(self.pos(), format!("expected ',' or {ender_desc}")));
                }
            }
        }
    }

    fn atom(&mut self, scope: &mut Scope, ground_only: bool) -> Result<Atom, TextError> {
        let (pred_name, pred_pos) = self.expect_ident("a predicate")?;
        if is_variable_name(&pred_name) {
            return Err(syntax(
                pred_pos,
                format!("'{pred_name}' cannot name a predicate (uppercase-initial identifiers are variables)"),
            ));
        }
        self.expect(&Tok::LParen, "after predicate")?;
        let mut args = Vec::new();
        loop {
            let (term_name, term_pos) = self.expect_ident("a term")?;
            if is_variable_name(&term_name) {
                if ground_only {
                    return Err(TextError::NonGroundFact {
                        var: term_name,
                        line: term_pos.line,
                        col: term_pos.col,
                    });
                }
                let v = scope
                    .entry(term_name.clone())
                    .or_insert_with(|| self.gen.fresh_named(&*term_name))
                    .clone();
                args.push(Term::Var(v));
            } else {
                args.push(Term::constant(&*term_name));
            }
            match self.advance() {
                Some((Tok::Comma, _)) => continue,
                Some((Tok::RParen, _)) => break,
                Some((t, p)) => {
                    return Err(syntax(p, format!("expected ',' or ')', found {}", t.describe())));
                }
                None => return Err(syntax(self.pos(), "unterminated argument list")),
            }
        }
        let arity = args.len();
        match self.arities.get(&pred_name) {
            None => {
                self.arities.insert(pred_name.clone(), arity);
            }
            Some(&expected) if expected != arity => {
                return Err(TextError::ArityMismatch {
                    pred: pred_name,
                    expected,
                    found: arity,
                    line: pred_pos.line,
                    col: pred_pos.col,
                });
            }
            Some(_) => {}
        }
        Ok(Atom::new(Predicate::new(&*pred_name, arity), args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variable;

    #[test]
    fn parses_the_three_section_kinds() {
        let doc = parse(
            "% 3-colorability, one edge\n\
             @facts\n\
             e(a,b), e(b,a).\n\
             v(a). v(b).\n\
             @rules\n\
             color: v(X) -> g(X) | r(X).\n\
             @queries\n\
             q: ? :- e(U,V), g(U), g(V).\n",
        )
        .unwrap();
        assert_eq!(doc.facts().len(), 4);
        assert_eq!(doc.rules().len(), 1);
        let rule = doc.rules().get(0);
        assert_eq!(rule.name().unwrap().as_str(), "color");
        assert_eq!(rule.disjuncts().len(), 2);
        assert!(rule.is_datalog());
        assert_eq!(doc.queries().len(), 1);
        assert_eq!(doc.queries()[0].cq.len(), 3);
        // U and V in the query are distinct variables; X is scoped to the rule.
        assert_eq!(doc.queries()[0].cq.variables().len(), 2);
    }

    #[test]
    fn head_variables_absent_from_body_are_existential() {
        let doc = parse("@rules r: p(X,Y) -> p1(X,Z), p2(Y,Z).").unwrap();
        let rule = doc.rules().get(0);
        assert!(rule.is_conjunctive());
        assert_eq!(rule.existentials(0).len(), 1);
        assert_eq!(rule.frontier().len(), 2);
    }

    #[test]
    fn statement_scopes_are_independent() {
        let doc = parse("@rules v(X) -> g(X). v(X) -> r(X).").unwrap();
        let v1 = doc.rules().get(0).variables();
        let v2 = doc.rules().get(1).variables();
        assert!(v1.is_disjoint(&v2));
    }

    #[test]
    fn source_section_builds_a_mapping() {
        let doc = parse("@source v, e.\n@rules v(X) -> g(X) | r(X).").unwrap();
        let mapping = doc.mapping().unwrap();
        assert_eq!(mapping.source().len(), 2);
        assert!(mapping.rules().get(0).is_datalog());
    }

    #[test]
    fn mapping_violations_are_rejected() {
        let err = parse("@source v.\n@rules g(X) -> h(X).").unwrap_err();
        assert!(matches!(err, TextError::Rule(_)), "{err}");
        let err = parse("@source v, g.\n@rules v(X) -> g(X).").unwrap_err();
        assert!(matches!(err, TextError::Rule(_)), "{err}");
    }

    #[test]
    fn facts_must_be_ground() {
        let err = parse("@facts p(a,X).").unwrap_err();
        match err {
            TextError::NonGroundFact { var, line, col } => {
                assert_eq!(var, "X");
                assert_eq!((line, col), (1, 12));
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn arity_is_fixed_by_first_use() {
        let err = parse("@facts p(a). p(a,b).").unwrap_err();
        match err {
            TextError::ArityMismatch { pred, expected, found, line, col } => {
                assert_eq!(pred, "p");
                assert_eq!((expected, found), (1, 2));
                assert_eq!((line, col), (1, 14));
            }
            other => panic!("wrong error: {other}"),
        }
        // Across sections too.
        assert!(matches!(
            parse("@facts p(a).\n@queries ? :- p(X,Y)."),
            Err(TextError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("@facts\np(a)").unwrap_err(); // missing '.'
        assert!(matches!(err, TextError::Syntax { line: 1.., .. }), "{err}");
        let err = parse("@rules X(a) -> p(a).").unwrap_err();
        assert!(matches!(err, TextError::Syntax { line: 1, col: 8, .. }), "{err}");
        let err = parse("p(a).").unwrap_err();
        assert!(
            matches!(&err, TextError::Syntax { msg, .. } if msg.contains("section")),
            "{err}"
        );
        let err = parse("@rules -> p(a).").unwrap_err();
        assert!(matches!(err, TextError::Syntax { .. }), "{err}");
        let err = parse("@nonsense p(a).").unwrap_err();
        assert!(
            matches!(&err, TextError::Syntax { msg, .. } if msg.contains("nonsense")),
            "{err}"
        );
    }

    #[test]
    fn digit_strings_are_constants() {
        let doc = parse("@facts p(0,1). p(0,42).").unwrap();
        assert!(doc.facts().is_ground());
        assert_eq!(doc.facts().constants().len(), 3);
    }

    #[test]
    fn queries_may_share_a_document_with_rules_in_any_order() {
        let doc = parse(
            "@queries ? :- t(U).\n@rules b(X) -> t(X).\n@queries ? :- b(U).",
        )
        .unwrap();
        assert_eq!(doc.queries().len(), 2);
        assert_eq!(doc.ucq().len(), 2);
        assert_eq!(doc.rules().len(), 1);
    }

    #[test]
    fn var_gen_floor_clears_document_variables(){
        let doc = parse("@rules p(X,Y) -> q(Y,Z).").unwrap();
        let gen = doc.var_gen();
        let fresh = gen.fresh();
        let used: std::collections::BTreeSet<Variable> = doc.rules().get(0).variables();
        assert!(!used.contains(&fresh));
    }
}
