//! The KKIR text format: S-expressions carrying a universe, relation bounds
//! and formulas.
//!
//! ```text
//! (univ B$0 B$1 C$0)
//! (rel B 1 ((B$0) (B$1)))
//! (rel r 2 ((B$0 C$0) (B$1 C$0)))
//! (formula (all ((b B)) (one (join b r))))
//! (goal run)
//! ```
//!
//! Multiple `formula` items are conjoined. `;` starts a line comment.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{ParseError, Pos};
use crate::ir::{Atom, Goal, Multiplicity, QuantDecl, RelDecl, RelExpr, RelFormula, RelModel};

/// Nesting beyond this depth is rejected instead of risking the stack.
pub const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone)]
enum Sexp {
    Sym(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Sym(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    let mut token = String::new();
    let mut token_pos = Pos::default();

    fn flush(
        token: &mut String,
        pos: Pos,
        stack: &mut [(Vec<Sexp>, Pos)],
    ) -> Result<(), ParseError> {
        if token.is_empty() {
            return Ok(());
        }
        let sym = Sexp::Sym(std::mem::take(token), pos);
        match stack.last_mut() {
            Some((items, _)) => items.push(sym),
            None => return Err(syntax(pos, "symbol outside of an item")),
        }
        Ok(())
    }

    while let Some(c) = chars.next() {
        let here = Pos { line, column };
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
        match c {
            ';' => {
                flush(&mut token, token_pos, &mut stack)?;
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '(' => {
                flush(&mut token, token_pos, &mut stack)?;
                if stack.len() >= MAX_DEPTH {
                    return Err(syntax(here, "nesting too deep"));
                }
                stack.push((Vec::new(), here));
            }
            ')' => {
                flush(&mut token, token_pos, &mut stack)?;
                let (items, open) = stack.pop().ok_or_else(|| syntax(here, "unbalanced `)`"))?;
                let list = Sexp::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            c if c.is_whitespace() => flush(&mut token, token_pos, &mut stack)?,
            c => {
                if token.is_empty() {
                    token_pos = here;
                }
                token.push(c);
            }
        }
    }
    flush(&mut token, token_pos, &mut stack)?;
    if let Some((_, open)) = stack.last() {
        return Err(syntax(*open, "unclosed `(`"));
    }
    Ok(top)
}

fn parse_atom(tok: &str, pos: Pos) -> Result<Atom, ParseError> {
    let bad = || ParseError::MalformedAtom {
        pos,
        token: tok.to_string(),
    };
    let (prefix, index) = tok.split_once('$').ok_or_else(bad)?;
    if !is_name(prefix) || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let index = index.parse::<u32>().map_err(|_| bad())?;
    Ok(Atom::new(prefix, index))
}

fn is_name(s: &str) -> bool {
    !s.is_empty()
        && !s.contains('$')
        && !s.starts_with(|c: char| c.is_ascii_digit())
}

fn expect_name(e: &Sexp, what: &str) -> Result<String, ParseError> {
    match e.sym() {
        Some(s) if is_name(s) => Ok(s.to_string()),
        _ => Err(syntax(e.pos(), format!("expected {what}"))),
    }
}

struct FormulaReader<'a> {
    arities: &'a HashMap<String, usize>,
    scope: Vec<String>,
}

impl FormulaReader<'_> {
    fn formula(&mut self, e: &Sexp) -> Result<RelFormula, ParseError> {
        let (items, pos) = match e {
            Sexp::Sym(s, p) => {
                return match s.as_str() {
                    "true" => Ok(RelFormula::True),
                    "false" => Ok(RelFormula::False),
                    _ => Err(syntax(*p, format!("expected a formula, found `{s}`"))),
                }
            }
            Sexp::List(items, p) => (items, *p),
        };
        let head = items
            .first()
            .and_then(Sexp::sym)
            .ok_or_else(|| syntax(pos, "expected a formula operator"))?;
        let args = &items[1..];
        let want = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(pos, format!("`{head}` takes {n} argument(s)")))
            }
        };
        Ok(match head {
            "not" => {
                want(1)?;
                RelFormula::not(self.formula(&args[0])?)
            }
            "and" => RelFormula::And(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?),
            "or" => RelFormula::Or(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?),
            "=>" => {
                want(2)?;
                RelFormula::implies(self.formula(&args[0])?, self.formula(&args[1])?)
            }
            "<=>" => {
                want(2)?;
                RelFormula::iff(self.formula(&args[0])?, self.formula(&args[1])?)
            }
            "=" | "subset" | "in" => {
                want(2)?;
                let (a, ka) = self.expr(&args[0])?;
                let (b, kb) = self.expr(&args[1])?;
                if ka != kb {
                    return Err(ParseError::Arity {
                        pos,
                        msg: format!("`{head}` over arities {ka} and {kb}"),
                    });
                }
                match head {
                    "=" => RelFormula::Equal(a, b),
                    "subset" => RelFormula::Subset(a, b),
                    _ => RelFormula::In(a, b),
                }
            }
            "one" | "lone" | "someof" | "no" => {
                want(1)?;
                let kind = match head {
                    "one" => Multiplicity::One,
                    "lone" => Multiplicity::Lone,
                    "someof" => Multiplicity::Some,
                    _ => Multiplicity::No,
                };
                RelFormula::Mult(kind, self.expr(&args[0])?.0)
            }
            "all" | "exists" => {
                want(2)?;
                let decl_list = match &args[0] {
                    Sexp::List(ds, _) if !ds.is_empty() => ds,
                    other => return Err(syntax(other.pos(), "expected ((VAR E)+)")),
                };
                let mark = self.scope.len();
                let mut decls: Vec<QuantDecl> = Vec::new();
                for d in decl_list {
                    let (var, bound) = match d {
                        Sexp::List(pair, _) if pair.len() == 2 => (&pair[0], &pair[1]),
                        other => return Err(syntax(other.pos(), "expected (VAR E)")),
                    };
                    let name = expect_name(var, "a variable name")?;
                    if self.scope.contains(&name) {
                        return Err(ParseError::Shadowing {
                            pos: var.pos(),
                            name,
                            what: "an enclosing variable",
                        });
                    }
                    if self.arities.contains_key(&name) {
                        return Err(ParseError::Shadowing {
                            pos: var.pos(),
                            name,
                            what: "a relation",
                        });
                    }
                    let (bound, k) = self.expr(bound)?;
                    if k != 1 {
                        return Err(ParseError::Arity {
                            pos: d.pos(),
                            msg: format!("quantifier bound for `{name}` has arity {k}"),
                        });
                    }
                    self.scope.push(name.clone());
                    decls.push((name, bound));
                }
                let body = self.formula(&args[1]);
                self.scope.truncate(mark);
                let body = body?;
                if head == "all" {
                    RelFormula::forall(decls, body)
                } else {
                    RelFormula::exists(decls, body)
                }
            }
            other => return Err(syntax(pos, format!("unknown formula operator `{other}`"))),
        })
    }

    fn expr(&mut self, e: &Sexp) -> Result<(RelExpr, usize), ParseError> {
        let (items, pos) = match e {
            Sexp::Sym(s, p) => {
                if self.scope.iter().any(|v| v == s) {
                    return Ok((RelExpr::Var(s.clone()), 1));
                }
                return match self.arities.get(s) {
                    Some(&k) => Ok((RelExpr::Rel(s.clone()), k)),
                    None => Err(ParseError::UnknownName {
                        pos: *p,
                        name: s.clone(),
                    }),
                };
            }
            Sexp::List(items, p) => (items, *p),
        };
        let head = items
            .first()
            .and_then(Sexp::sym)
            .ok_or_else(|| syntax(pos, "expected an expression operator"))?;
        let args = &items[1..];
        let arity_err = |msg: String| ParseError::Arity { pos, msg };
        match head {
            "transpose" => {
                if args.len() != 1 {
                    return Err(syntax(pos, "`transpose` takes 1 argument"));
                }
                let (a, k) = self.expr(&args[0])?;
                if k != 2 {
                    return Err(arity_err(format!("transpose of arity {k}")));
                }
                Ok((RelExpr::transpose(a), 2))
            }
            "join" | "union" | "inter" | "diff" | "prod" => {
                if args.len() != 2 {
                    return Err(syntax(pos, format!("`{head}` takes 2 arguments")));
                }
                let (a, ka) = self.expr(&args[0])?;
                let (b, kb) = self.expr(&args[1])?;
                match head {
                    "join" => {
                        if ka + kb < 3 {
                            return Err(arity_err(format!("join of arities {ka} and {kb}")));
                        }
                        Ok((RelExpr::join(a, b), ka + kb - 2))
                    }
                    "prod" => Ok((RelExpr::product(a, b), ka + kb)),
                    _ => {
                        if ka != kb {
                            return Err(arity_err(format!("`{head}` of arities {ka} and {kb}")));
                        }
                        let e = match head {
                            "union" => RelExpr::union(a, b),
                            "inter" => RelExpr::inter(a, b),
                            _ => RelExpr::diff(a, b),
                        };
                        Ok((e, ka))
                    }
                }
            }
            other => Err(syntax(pos, format!("unknown expression operator `{other}`"))),
        }
    }
}

/// Parses KKIR text into a validated [`RelModel`].
pub fn parse_model(text: &str) -> Result<RelModel, ParseError> {
    let items = read_sexps(text)?;
    let mut universe: Option<Vec<Atom>> = None;
    let mut relations: Vec<RelDecl> = Vec::new();
    let mut formulas: Vec<&Sexp> = Vec::new();
    let mut goal: Option<Goal> = None;

    // Pass 1: universe and bounds.
    let mut rel_items = Vec::new();
    for item in &items {
        let Sexp::List(parts, pos) = item else {
            unreachable!("top level only holds lists")
        };
        let head = parts
            .first()
            .and_then(Sexp::sym)
            .ok_or_else(|| syntax(*pos, "expected an item keyword"))?;
        match head {
            "univ" => {
                if universe.is_some() {
                    return Err(syntax(*pos, "duplicate `univ` item"));
                }
                let mut atoms = Vec::with_capacity(parts.len() - 1);
                let mut seen = HashSet::new();
                for p in &parts[1..] {
                    let tok = p.sym().ok_or_else(|| syntax(p.pos(), "expected an atom"))?;
                    let atom = parse_atom(tok, p.pos())?;
                    if !seen.insert(atom.clone()) {
                        return Err(syntax(p.pos(), format!("duplicate atom `{atom}`")));
                    }
                    atoms.push(atom);
                }
                universe = Some(atoms);
            }
            "rel" => rel_items.push((parts, *pos)),
            "formula" => {
                if parts.len() != 2 {
                    return Err(syntax(*pos, "`formula` takes exactly one formula"));
                }
                formulas.push(&parts[1]);
            }
            "goal" => {
                if goal.is_some() {
                    return Err(syntax(*pos, "duplicate `goal` item"));
                }
                goal = Some(match parts.get(1).and_then(Sexp::sym) {
                    Some("run") if parts.len() == 2 => Goal::Run,
                    Some("check") if parts.len() == 2 => Goal::Check,
                    _ => return Err(syntax(*pos, "expected (goal run|check)")),
                });
            }
            other => return Err(syntax(*pos, format!("unknown item `{other}`"))),
        }
    }
    let universe = universe.unwrap_or_default();
    if universe.is_empty() {
        return Err(ParseError::EmptyUniverse);
    }
    let known: HashSet<&Atom> = universe.iter().collect();

    let mut arities = HashMap::new();
    for (parts, pos) in rel_items {
        if parts.len() != 4 {
            return Err(syntax(pos, "expected (rel NAME ARITY (TUPLE*))"));
        }
        let name = expect_name(&parts[1], "a relation name")?;
        let arity = parts[2]
            .sym()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&k| k > 0)
            .ok_or_else(|| syntax(parts[2].pos(), "expected a positive arity"))?;
        let Sexp::List(tuples, _) = &parts[3] else {
            return Err(syntax(parts[3].pos(), "expected a tuple list"));
        };
        let mut bound = Vec::with_capacity(tuples.len());
        let mut seen = HashSet::new();
        for t in tuples {
            let Sexp::List(elems, tpos) = t else {
                return Err(syntax(t.pos(), "expected a tuple"));
            };
            if elems.len() != arity {
                return Err(ParseError::Arity {
                    pos: *tpos,
                    msg: format!("tuple of length {} in relation `{name}` of arity {arity}", elems.len()),
                });
            }
            let mut tuple = Vec::with_capacity(arity);
            for el in elems {
                let tok = el.sym().ok_or_else(|| syntax(el.pos(), "expected an atom"))?;
                let atom = parse_atom(tok, el.pos())?;
                if !known.contains(&atom) {
                    return Err(ParseError::UnknownAtom {
                        pos: el.pos(),
                        atom: atom.to_string(),
                    });
                }
                tuple.push(atom);
            }
            if !seen.insert(tuple.clone()) {
                return Err(syntax(*tpos, format!("duplicate tuple in relation `{name}`")));
            }
            bound.push(tuple);
        }
        if arities.insert(name.clone(), arity).is_some() {
            return Err(ParseError::DuplicateRelation {
                pos: parts[1].pos(),
                name,
            });
        }
        relations.push(RelDecl {
            name,
            arity,
            upper_bound: bound,
        });
    }

    // Pass 2: formulas, now that every relation arity is known.
    let mut reader = FormulaReader {
        arities: &arities,
        scope: Vec::new(),
    };
    let mut fs = formulas
        .into_iter()
        .map(|f| reader.formula(f))
        .collect::<Result<Vec<_>, _>>()?;
    let formula = match fs.len() {
        0 => RelFormula::True,
        1 => fs.pop().unwrap(),
        _ => RelFormula::And(fs),
    };

    Ok(RelModel {
        universe,
        relations,
        formula,
        goal: goal.unwrap_or_default(),
    })
}

pub fn render_expr(e: &RelExpr, out: &mut String) {
    let bin = |op: &str, a: &RelExpr, b: &RelExpr, out: &mut String| {
        out.push('(');
        out.push_str(op);
        out.push(' ');
        render_expr(a, out);
        out.push(' ');
        render_expr(b, out);
        out.push(')');
    };
    match e {
        RelExpr::Rel(n) | RelExpr::Var(n) => out.push_str(n),
        RelExpr::Union(a, b) => bin("union", a, b, out),
        RelExpr::Inter(a, b) => bin("inter", a, b, out),
        RelExpr::Diff(a, b) => bin("diff", a, b, out),
        RelExpr::Join(a, b) => bin("join", a, b, out),
        RelExpr::Product(a, b) => bin("prod", a, b, out),
        RelExpr::Transpose(a) => {
            out.push_str("(transpose ");
            render_expr(a, out);
            out.push(')');
        }
    }
}

pub fn render_formula(f: &RelFormula, out: &mut String) {
    let nary = |op: &str, fs: &[RelFormula], out: &mut String| {
        out.push('(');
        out.push_str(op);
        for g in fs {
            out.push(' ');
            render_formula(g, out);
        }
        out.push(')');
    };
    let two_exprs = |op: &str, a: &RelExpr, b: &RelExpr, out: &mut String| {
        let _ = write!(out, "({op} ");
        render_expr(a, out);
        out.push(' ');
        render_expr(b, out);
        out.push(')');
    };
    match f {
        RelFormula::True => out.push_str("true"),
        RelFormula::False => out.push_str("false"),
        RelFormula::Not(g) => nary("not", std::slice::from_ref(g), out),
        RelFormula::And(fs) => nary("and", fs, out),
        RelFormula::Or(fs) => nary("or", fs, out),
        RelFormula::Implies(a, b) => nary("=>", &[(**a).clone(), (**b).clone()], out),
        RelFormula::Iff(a, b) => nary("<=>", &[(**a).clone(), (**b).clone()], out),
        RelFormula::Equal(a, b) => two_exprs("=", a, b, out),
        RelFormula::Subset(a, b) => two_exprs("subset", a, b, out),
        RelFormula::In(a, b) => two_exprs("in", a, b, out),
        RelFormula::Forall(ds, body) | RelFormula::Exists(ds, body) => {
            let op = if matches!(f, RelFormula::Forall(..)) { "all" } else { "exists" };
            let _ = write!(out, "({op} (");
            for (i, (v, e)) in ds.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({v} ");
                render_expr(e, out);
                out.push(')');
            }
            out.push_str(") ");
            render_formula(body, out);
            out.push(')');
        }
        RelFormula::Mult(k, e) => {
            let _ = write!(out, "({} ", k.keyword());
            render_expr(e, out);
            out.push(')');
        }
    }
}

/// Canonical KKIR text for a model; `parse_model` inverts it.
pub fn render_model(m: &RelModel) -> String {
    let mut out = String::from("(univ");
    for a in &m.universe {
        let _ = write!(out, " {a}");
    }
    out.push_str(")\n");
    for r in &m.relations {
        let _ = write!(out, "(rel {} {} (", r.name, r.arity);
        for (i, t) in r.upper_bound.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push('(');
            for (j, a) in t.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{a}");
            }
            out.push(')');
        }
        out.push_str("))\n");
    }
    // A root conjunction of two or more is split back into separate items.
    let items: Vec<&RelFormula> = match &m.formula {
        RelFormula::And(fs) if fs.len() >= 2 => fs.iter().collect(),
        f => vec![f],
    };
    for f in items {
        out.push_str("(formula ");
        render_formula(f, &mut out);
        out.push_str(")\n");
    }
    let goal = match m.goal {
        Goal::Run => "run",
        Goal::Check => "check",
    };
    let _ = writeln!(out, "(goal {goal})");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIJECTION: &str = include_str!("../../../corpus/bijection.kkir");

    #[test]
    fn minimal_model() {
        let m = parse_model("(univ ID$0) (rel ID 1 ((ID$0))) (formula true)").unwrap();
        assert_eq!(m.universe, vec![Atom::new("ID", 0)]);
        assert_eq!(m.relations.len(), 1);
        assert!(m.is_type_relation(&m.relations[0]));
        assert_eq!(m.formula, RelFormula::True);
        assert_eq!(m.goal, Goal::Run);
    }

    #[test]
    fn bijection_parses() {
        let m = parse_model(BIJECTION).unwrap();
        assert_eq!(m.universe.len(), 12);
        assert_eq!(m.prefixes(), vec!["B", "C", "ID"]);
        let names: Vec<&str> = m.relations.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["B", "C", "ID", "id", "toC", "toB"]);
        assert_eq!(m.relation("id").unwrap().upper_bound.len(), 36);
        assert_eq!(m.formula.conjuncts().len(), 3);
    }

    #[test]
    fn empty_universe() {
        assert_eq!(parse_model("(formula (and))"), Err(ParseError::EmptyUniverse));
    }

    #[test]
    fn error_cases() {
        let cases = [
            ("(univ B$0) (rel r 2 ((B$0)))", "arity mismatch"),
            ("(univ B$0) (rel r 1 ((B$1)))", "not in the universe"),
            ("(univ B$0) (rel r 1 ()) (rel r 1 ())", "duplicate relation"),
            ("(univ B0)", "malformed atom"),
            ("(univ B$x)", "malformed atom"),
            ("(univ $1)", "malformed atom"),
            ("(univ B$0) (formula (one q))", "unknown relation"),
            ("(univ B$0 (", "unclosed"),
            ("(univ B$0))", "unbalanced"),
            ("(univ B$0) (rel B 1 ((B$0))) (formula (all ((x B)) (all ((x B)) true)))", "shadows"),
            ("(univ B$0) (rel B 1 ((B$0))) (formula (all ((B B)) true))", "shadows"),
            ("(univ B$0) (rel B 1 ((B$0))) (formula (one (join B B)))", "join of arities 1 and 1"),
            ("(univ B$0) (rel B 1 ((B$0))) (formula (one (transpose B)))", "transpose"),
        ];
        for (src, needle) in cases {
            let err = parse_model(src).unwrap_err().to_string();
            assert!(err.contains(needle), "{src}: {err}");
        }
    }

    #[test]
    fn syntax_error_positions() {
        let err = parse_model("(univ B$0)\n  (formula (frob))").unwrap_err();
        match err {
            ParseError::Syntax { pos, .. } => assert_eq!(pos, Pos { line: 2, column: 12 }),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deep_nesting_rejected() {
        let src = format!("(univ A$0) (formula {}true{})", "(not ".repeat(500), ")".repeat(500));
        assert!(parse_model(&src).unwrap_err().to_string().contains("too deep"));
    }

    #[test]
    fn render_is_stable_and_round_trips() {
        let m = parse_model(BIJECTION).unwrap();
        let text = render_model(&m);
        assert_eq!(text, render_model(&m));
        assert_eq!(parse_model(&text).unwrap(), m);

        let minimal = parse_model("(univ ID$0) (rel ID 1 ((ID$0))) (formula true)").unwrap();
        assert_eq!(
            render_model(&minimal),
            "(univ ID$0)\n(rel ID 1 ((ID$0)))\n(formula true)\n(goal run)\n"
        );
    }

    #[test]
    fn nested_quantifiers_round_trip() {
        let src = "(univ A$0 A$1) (rel A 1 ((A$0) (A$1))) (rel r 2 ((A$0 A$1)))
            (formula (all ((x A) (y A)) (exists ((z (join x r))) (in z (join y r)))))
            (goal check)";
        let m = parse_model(src).unwrap();
        assert_eq!(m.goal, Goal::Check);
        assert_eq!(parse_model(&render_model(&m)).unwrap(), m);
    }
}
