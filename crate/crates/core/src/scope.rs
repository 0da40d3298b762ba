//! Finite scopes for a translated theory: domain constants, range formulas,
//! and optionally full quantifier expansion.

use std::collections::{BTreeMap, HashSet};

use crate::error::ScopeError;
use crate::options::ScopeMode;
use crate::simplify::{equality, negate, simplify};
use crate::smtlib::is_reserved;
use crate::tfol::{Formula, FuncDecl, ResultSort, Sort, Term, Theory};

pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct ScopedTheory {
    pub theory: Theory,
    pub mode: ScopeMode,
    /// Constants per sort, in index order. Empty when unscoped.
    pub domain_constants: BTreeMap<Sort, Vec<String>>,
}

/// Scopes `t` using the sort sizes recorded in its metadata, with the
/// default node budget for expansion.
pub fn apply_scope(t: Theory, mode: ScopeMode) -> Result<ScopedTheory, ScopeError> {
    apply_scope_with_budget(t, mode, DEFAULT_NODE_BUDGET)
}

pub fn apply_scope_with_budget(
    t: Theory,
    mode: ScopeMode,
    budget: usize,
) -> Result<ScopedTheory, ScopeError> {
    if mode == ScopeMode::Unscoped {
        return Ok(ScopedTheory {
            theory: t,
            mode,
            domain_constants: BTreeMap::new(),
        });
    }
    let mut t = t;
    let mut used: HashSet<String> = t
        .sorts
        .iter()
        .map(|s| s.name().to_string())
        .chain(t.decls.iter().map(|d| d.name.clone()))
        .collect();

    let mut consts: BTreeMap<Sort, Vec<String>> = BTreeMap::new();
    let mut axioms = Vec::new();
    for sort in t.sorts.clone() {
        let n = t
            .meta
            .sort_scopes
            .iter()
            .find(|(s, _)| *s == sort)
            .map(|(_, n)| *n)
            .ok_or_else(|| ScopeError::MissingScope(sort.to_string()))?;
        if n == 0 {
            return Err(ScopeError::ZeroScope(sort.to_string()));
        }
        let names: Vec<String> = (0..n)
            .map(|i| {
                let mut name = format!("{}$c{i}", sort.name());
                while used.contains(&name) || is_reserved(&name) {
                    name.push('_');
                }
                used.insert(name.clone());
                name
            })
            .collect();
        for c in &names {
            t.decls.push(FuncDecl::constant(c.clone(), sort.clone()));
        }
        if n >= 2 {
            axioms.push(Formula::Distinct(names.iter().map(Term::constant).collect()));
        }
        if mode == ScopeMode::SolverFmf {
            let x = "x".to_string();
            axioms.push(Formula::forall(
                vec![(x.clone(), sort.clone())],
                one_of(&Term::var(x), &names),
            ));
        }
        consts.insert(sort, names);
    }

    if let [univ] = t.sorts.as_slice() {
        let univ_consts = &consts[univ];
        for tp in &t.meta.type_predicates {
            let x = Term::var("x");
            let members: Vec<String> = tp.members.iter().map(|&i| univ_consts[i].clone()).collect();
            let head = Formula::pred(tp.name.clone(), vec![x.clone()]);
            let body = one_of(&x, &members);
            let link = if tp.exact {
                Formula::iff(head, body)
            } else {
                Formula::implies(head, body)
            };
            axioms.push(Formula::forall(vec![("x".into(), univ.clone())], link));
        }
    }

    for b in &t.meta.bounds {
        let decl = t
            .decl(&b.decl)
            .ok_or_else(|| ScopeError::MissingScope(b.decl.clone()))?;
        let vars: Vec<(String, Sort)> = decl
            .args
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("x{i}"), s.clone()))
            .collect();
        let args: Vec<Term> = vars.iter().map(|(v, _)| Term::var(v.clone())).collect();
        let allowed = Formula::or(
            b.allowed
                .iter()
                .map(|tuple| {
                    Formula::and(
                        tuple
                            .iter()
                            .zip(&vars)
                            .map(|(&i, (v, s))| Formula::Eq(Term::var(v.clone()), Term::constant(consts[s][i].clone())))
                            .collect(),
                    )
                })
                .collect(),
        );
        axioms.push(Formula::forall(
            vars,
            Formula::implies(Formula::pred(decl.name.clone(), args), allowed),
        ));
    }

    for d in &t.decls {
        let ResultSort::Sort(range) = &d.result else {
            continue;
        };
        if d.args.is_empty() {
            continue;
        }
        let vars: Vec<(String, Sort)> = d
            .args
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("x{i}"), s.clone()))
            .collect();
        let app = Term::apply(d.name.clone(), vars.iter().map(|(v, _)| Term::var(v.clone())).collect());
        axioms.push(Formula::forall(vars, one_of(&app, &consts[range])));
    }

    axioms.append(&mut t.assertions);
    t.assertions = axioms;

    if mode == ScopeMode::Expand {
        let mut ex = Expander {
            consts: &consts,
            budget,
            used: 0,
        };
        let mut out = Vec::with_capacity(t.assertions.len());
        for a in &t.assertions {
            let e = simplify(ex.formula(a, &mut Vec::new())?);
            if e != Formula::True {
                out.push(e);
            }
        }
        t.assertions = out;
    }

    Ok(ScopedTheory {
        theory: t,
        mode,
        domain_constants: consts,
    })
}

fn one_of(t: &Term, consts: &[String]) -> Formula {
    Formula::or(
        consts
            .iter()
            .map(|c| Formula::Eq(t.clone(), Term::constant(c.clone())))
            .collect(),
    )
}

struct Expander<'a> {
    consts: &'a BTreeMap<Sort, Vec<String>>,
    budget: usize,
    used: usize,
}

impl Expander<'_> {
    fn charge(&mut self, n: usize) -> Result<(), ScopeError> {
        self.used += n;
        if self.used > self.budget {
            return Err(ScopeError::Budget {
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn term(&self, t: &Term, sub: &[(String, Term)]) -> Term {
        match t {
            Term::Var(v) => sub
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, c)| c.clone())
                .unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
            Term::Apply(f, args) => Term::Apply(f.clone(), args.iter().map(|a| self.term(a, sub)).collect()),
        }
    }

    fn terms(&mut self, ts: &[Term], sub: &[(String, Term)]) -> Result<Vec<Term>, ScopeError> {
        self.charge(1 + ts.len())?;
        Ok(ts.iter().map(|a| self.term(a, sub)).collect())
    }

    /// Junction of `items`, short-circuiting on the absorbing element.
    fn junction(
        &mut self,
        conj: bool,
        n: usize,
        mut item: impl FnMut(&mut Self, usize) -> Result<Formula, ScopeError>,
    ) -> Result<Formula, ScopeError> {
        let (unit, absorb) = if conj {
            (Formula::True, Formula::False)
        } else {
            (Formula::False, Formula::True)
        };
        let mut parts = Vec::new();
        for i in 0..n {
            let f = item(self, i)?;
            if f == absorb {
                return Ok(absorb);
            }
            if f != unit {
                parts.push(f);
            }
        }
        self.charge(1)?;
        Ok(match parts.len() {
            0 => unit,
            1 => parts.pop().unwrap(),
            _ if conj => Formula::And(parts),
            _ => Formula::Or(parts),
        })
    }

    fn quantified(
        &mut self,
        universal: bool,
        vars: &[(String, Sort)],
        body: &Formula,
        sub: &mut Vec<(String, Term)>,
    ) -> Result<Formula, ScopeError> {
        let Some(((v, s), rest)) = vars.split_first() else {
            return self.formula(body, sub);
        };
        let consts = self
            .consts
            .get(s)
            .ok_or_else(|| ScopeError::MissingScope(s.to_string()))?;
        self.junction(universal, consts.len(), |ex, i| {
            sub.push((v.clone(), Term::constant(consts[i].clone())));
            let r = ex.quantified(universal, rest, body, sub);
            sub.pop();
            r
        })
    }

    fn formula(&mut self, f: &Formula, sub: &mut Vec<(String, Term)>) -> Result<Formula, ScopeError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Pred(p, args) => Formula::Pred(p.clone(), self.terms(args, sub)?),
            Formula::Distinct(ts) => Formula::Distinct(self.terms(ts, sub)?),
            Formula::Eq(a, b) => {
                let ts = self.terms(&[a.clone(), b.clone()], sub)?;
                let [a, b]: [Term; 2] = ts.try_into().unwrap();
                equality(a, b)
            }
            Formula::Not(g) => negate(self.formula(g, sub)?),
            Formula::And(fs) => self.junction(true, fs.len(), |ex, i| ex.formula(&fs[i], sub))?,
            Formula::Or(fs) => self.junction(false, fs.len(), |ex, i| ex.formula(&fs[i], sub))?,
            Formula::Implies(a, b) => {
                let a = self.formula(a, sub)?;
                if a == Formula::False {
                    return Ok(Formula::True);
                }
                let b = self.formula(b, sub)?;
                self.charge(1)?;
                simplify(Formula::implies(a, b))
            }
            Formula::Iff(a, b) => {
                let a = self.formula(a, sub)?;
                let b = self.formula(b, sub)?;
                self.charge(1)?;
                simplify(Formula::iff(a, b))
            }
            Formula::Forall(vs, body) => self.quantified(true, vs, body, sub)?,
            Formula::Exists(vs, body) => self.quantified(false, vs, body, sub)?,
        })
    }
}
