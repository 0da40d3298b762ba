//! Brute-force model finder working directly on the relational IR.
//!
//! Relations are searched tuple by tuple (false before true) in declaration
//! and bound order. Every partial assignment is evaluated in three-valued
//! logic, so a subtree is cut as soon as the formula is already false under
//! every completion, and the search stops as soon as it is true under every
//! completion. Type relations are fixed to their full bound.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use relog2smt_core::ir::{Multiplicity, RelExpr, RelFormula, RelModel, Tuple};
use thiserror::Error;

pub const DEFAULT_NODE_BUDGET: u64 = 1 << 24;

/// An interpretation: the tuples of every relation.
pub type Instance = BTreeMap<String, Vec<Tuple>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub verdict: Verdict,
    pub witness: Option<Instance>,
    /// Search nodes visited.
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle search exceeded {budget} nodes")]
    Budget { budget: u64 },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Tv {
    F,
    U,
    T,
}

impl Tv {
    fn not(self) -> Tv {
        match self {
            Tv::F => Tv::T,
            Tv::U => Tv::U,
            Tv::T => Tv::F,
        }
    }

    fn and(self, o: Tv) -> Tv {
        self.min(o)
    }

    fn or(self, o: Tv) -> Tv {
        self.max(o)
    }

    fn implies(self, o: Tv) -> Tv {
        self.not().or(o)
    }

    fn iff(self, o: Tv) -> Tv {
        self.implies(o).and(o.implies(self))
    }
}

/// Tuples (as universe indices) that are certainly (`T`) or possibly (`U`)
/// in a relation; absent tuples are certainly out.
type Val = BTreeMap<Vec<u32>, Tv>;

struct Search<'a> {
    model: &'a RelModel,
    /// (relation, tuple) pairs being decided, in search order.
    bits: Vec<(String, Vec<u32>)>,
    vals: HashMap<String, Val>,
    env: Vec<(String, u32)>,
    nodes: u64,
    budget: u64,
}

fn mentioned(f: &RelFormula, out: &mut BTreeSet<String>) {
    fn expr(e: &RelExpr, out: &mut BTreeSet<String>) {
        match e {
            RelExpr::Rel(n) => {
                out.insert(n.clone());
            }
            RelExpr::Var(_) => {}
            RelExpr::Transpose(a) => expr(a, out),
            RelExpr::Union(a, b)
            | RelExpr::Inter(a, b)
            | RelExpr::Diff(a, b)
            | RelExpr::Join(a, b)
            | RelExpr::Product(a, b) => {
                expr(a, out);
                expr(b, out);
            }
        }
    }
    match f {
        RelFormula::True | RelFormula::False => {}
        RelFormula::Not(g) => mentioned(g, out),
        RelFormula::And(fs) | RelFormula::Or(fs) => fs.iter().for_each(|g| mentioned(g, out)),
        RelFormula::Implies(a, b) | RelFormula::Iff(a, b) => {
            mentioned(a, out);
            mentioned(b, out);
        }
        RelFormula::Equal(a, b) | RelFormula::Subset(a, b) | RelFormula::In(a, b) => {
            expr(a, out);
            expr(b, out);
        }
        RelFormula::Forall(decls, body) | RelFormula::Exists(decls, body) => {
            decls.iter().for_each(|(_, e)| expr(e, out));
            mentioned(body, out);
        }
        RelFormula::Mult(_, e) => expr(e, out),
    }
}

impl<'a> Search<'a> {
    fn new(model: &'a RelModel, budget: u64, fixed: Option<&Instance>) -> Result<Self, OracleError> {
        let index: HashMap<_, u32> = model
            .universe
            .iter()
            .enumerate()
            .map(|(i, a)| (a, i as u32))
            .collect();
        let encode = |t: &Tuple| t.iter().map(|a| index[a]).collect::<Vec<u32>>();
        let mut used = BTreeSet::new();
        mentioned(&model.formula, &mut used);

        let mut bits = Vec::new();
        let mut vals = HashMap::new();
        for r in &model.relations {
            let mut val = Val::new();
            if let Some(inst) = fixed {
                for t in inst.get(&r.name).into_iter().flatten() {
                    let Some(enc) = t.iter().map(|a| index.get(a).copied()).collect::<Option<Vec<u32>>>() else {
                        continue;
                    };
                    val.insert(enc, Tv::T);
                }
            } else if model.is_type_relation(r) {
                val.extend(r.upper_bound.iter().map(|t| (encode(t), Tv::T)));
            } else if used.contains(&r.name) {
                for t in &r.upper_bound {
                    val.insert(encode(t), Tv::U);
                    bits.push((r.name.clone(), encode(t)));
                }
            }
            vals.insert(r.name.clone(), val);
        }
        Ok(Search {
            model,
            bits,
            vals,
            env: Vec::new(),
            nodes: 0,
            budget,
        })
    }

    fn expr(&self, e: &RelExpr) -> Result<Val, OracleError> {
        Ok(match e {
            RelExpr::Rel(n) => self
                .vals
                .get(n)
                .cloned()
                .ok_or_else(|| OracleError::UnknownRelation(n.clone()))?,
            RelExpr::Var(v) => {
                let (_, a) = self
                    .env
                    .iter()
                    .rev()
                    .find(|(n, _)| n == v)
                    .ok_or_else(|| OracleError::Unbound(v.clone()))?;
                std::iter::once((vec![*a], Tv::T)).collect()
            }
            RelExpr::Union(a, b) => {
                let mut out = self.expr(a)?;
                for (t, tv) in self.expr(b)? {
                    let e = out.entry(t).or_insert(Tv::F);
                    *e = e.or(tv);
                }
                out
            }
            RelExpr::Inter(a, b) => {
                let vb = self.expr(b)?;
                self.expr(a)?
                    .into_iter()
                    .filter_map(|(t, tv)| vb.get(&t).map(|&u| (t, tv.and(u))))
                    .collect()
            }
            RelExpr::Diff(a, b) => {
                let vb = self.expr(b)?;
                self.expr(a)?
                    .into_iter()
                    .filter_map(|(t, tv)| {
                        let r = tv.and(vb.get(&t).copied().unwrap_or(Tv::F).not());
                        (r != Tv::F).then_some((t, r))
                    })
                    .collect()
            }
            RelExpr::Transpose(a) => self
                .expr(a)?
                .into_iter()
                .map(|(mut t, tv)| {
                    t.reverse();
                    (t, tv)
                })
                .collect(),
            RelExpr::Product(a, b) => {
                let (va, vb) = (self.expr(a)?, self.expr(b)?);
                let mut out = Val::new();
                for (x, p) in &va {
                    for (y, q) in &vb {
                        let mut t = x.clone();
                        t.extend(y);
                        out.insert(t, p.and(*q));
                    }
                }
                out
            }
            RelExpr::Join(a, b) => {
                let (va, vb) = (self.expr(a)?, self.expr(b)?);
                let mut by_first: HashMap<u32, Vec<(&Vec<u32>, Tv)>> = HashMap::new();
                for (t, tv) in &vb {
                    by_first.entry(t[0]).or_default().push((t, *tv));
                }
                let mut out = Val::new();
                for (x, p) in &va {
                    let (last, init) = x.split_last().unwrap();
                    for (y, q) in by_first.get(last).into_iter().flatten() {
                        let mut t = init.to_vec();
                        t.extend(&y[1..]);
                        let e = out.entry(t).or_insert(Tv::F);
                        *e = e.or(p.and(*q));
                    }
                }
                out
            }
        })
    }

    fn quantifier(&mut self, universal: bool, decls: &[(String, RelExpr)], body: &RelFormula) -> Result<Tv, OracleError> {
        let Some(((v, bound), rest)) = decls.split_first() else {
            return self.formula(body);
        };
        let val = self.expr(bound)?;
        let (mut acc, stop) = if universal { (Tv::T, Tv::F) } else { (Tv::F, Tv::T) };
        for (t, tv) in val {
            self.env.push((v.clone(), t[0]));
            let inner = self.quantifier(universal, rest, body);
            self.env.pop();
            acc = if universal {
                acc.and(tv.implies(inner?))
            } else {
                acc.or(tv.and(inner?))
            };
            if acc == stop {
                break;
            }
        }
        Ok(acc)
    }

    fn formula(&mut self, f: &RelFormula) -> Result<Tv, OracleError> {
        Ok(match f {
            RelFormula::True => Tv::T,
            RelFormula::False => Tv::F,
            RelFormula::Not(g) => self.formula(g)?.not(),
            RelFormula::And(fs) => {
                let mut acc = Tv::T;
                for g in fs {
                    acc = acc.and(self.formula(g)?);
                    if acc == Tv::F {
                        break;
                    }
                }
                acc
            }
            RelFormula::Or(fs) => {
                let mut acc = Tv::F;
                for g in fs {
                    acc = acc.or(self.formula(g)?);
                    if acc == Tv::T {
                        break;
                    }
                }
                acc
            }
            RelFormula::Implies(a, b) => {
                let a = self.formula(a)?;
                if a == Tv::F {
                    Tv::T
                } else {
                    a.implies(self.formula(b)?)
                }
            }
            RelFormula::Iff(a, b) => {
                let a = self.formula(a)?;
                a.iff(self.formula(b)?)
            }
            RelFormula::Equal(a, b) => {
                let (va, vb) = (self.expr(a)?, self.expr(b)?);
                let keys: BTreeSet<&Vec<u32>> = va.keys().chain(vb.keys()).collect();
                keys.into_iter().fold(Tv::T, |acc, t| {
                    let p = va.get(t).copied().unwrap_or(Tv::F);
                    let q = vb.get(t).copied().unwrap_or(Tv::F);
                    acc.and(p.iff(q))
                })
            }
            RelFormula::Subset(a, b) | RelFormula::In(a, b) => {
                let (va, vb) = (self.expr(a)?, self.expr(b)?);
                va.iter().fold(Tv::T, |acc, (t, p)| {
                    acc.and(p.implies(vb.get(t).copied().unwrap_or(Tv::F)))
                })
            }
            RelFormula::Forall(decls, body) => self.quantifier(true, decls, body)?,
            RelFormula::Exists(decls, body) => self.quantifier(false, decls, body)?,
            RelFormula::Mult(kind, e) => {
                let v = self.expr(e)?;
                let sure = v.values().filter(|&&tv| tv == Tv::T).count();
                let maybe = v.len();
                let some = if sure > 0 {
                    Tv::T
                } else if maybe == 0 {
                    Tv::F
                } else {
                    Tv::U
                };
                let lone = if maybe <= 1 {
                    Tv::T
                } else if sure >= 2 {
                    Tv::F
                } else {
                    Tv::U
                };
                match kind {
                    Multiplicity::Some => some,
                    Multiplicity::No => some.not(),
                    Multiplicity::Lone => lone,
                    Multiplicity::One => some.and(lone),
                }
            }
        })
    }

    fn set(&mut self, bit: usize, value: Option<bool>) {
        let (rel, t) = &self.bits[bit];
        let val = self.vals.get_mut(rel).unwrap();
        match value {
            Some(true) => {
                val.insert(t.clone(), Tv::T);
            }
            Some(false) => {
                val.remove(t);
            }
            None => {
                val.insert(t.clone(), Tv::U);
            }
        }
    }

    fn dfs(&mut self, next: usize) -> Result<bool, OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::Budget {
                budget: self.budget,
            });
        }
        match self.formula(&self.model.formula)? {
            Tv::T => return Ok(true),
            Tv::F => return Ok(false),
            Tv::U => {}
        }
        if next == self.bits.len() {
            return Ok(false);
        }
        for value in [false, true] {
            self.set(next, Some(value));
            if self.dfs(next + 1)? {
                return Ok(true);
            }
        }
        self.set(next, None);
        Ok(false)
    }

    fn instance(&self) -> Instance {
        self.model
            .relations
            .iter()
            .map(|r| {
                let val = &self.vals[&r.name];
                let tuples = val
                    .iter()
                    .filter(|(_, tv)| **tv == Tv::T)
                    .map(|(t, _)| t.iter().map(|&i| self.model.universe[i as usize].clone()).collect())
                    .collect();
                (r.name.clone(), tuples)
            })
            .collect()
    }
}

/// Decides `m` within its bounds with the default node budget.
pub fn brute_force_solve(m: &RelModel) -> Result<OracleResult, OracleError> {
    brute_force_solve_with(m, DEFAULT_NODE_BUDGET)
}

pub fn brute_force_solve_with(m: &RelModel, budget: u64) -> Result<OracleResult, OracleError> {
    let mut s = Search::new(m, budget, None)?;
    let sat = s.dfs(0)?;
    Ok(OracleResult {
        verdict: if sat { Verdict::Sat } else { Verdict::Unsat },
        witness: sat.then(|| s.instance()),
        nodes: s.nodes,
    })
}

/// Whether `inst` satisfies the formula of `m` (bounds are not checked).
pub fn satisfies(m: &RelModel, inst: &Instance) -> Result<bool, OracleError> {
    let mut s = Search::new(m, 0, Some(inst))?;
    Ok(s.formula(&m.formula)? == Tv::T)
}

/// Whether every tuple of `inst` lies within its relation's upper bound and
/// type relations hold their full bound.
pub fn within_bounds(m: &RelModel, inst: &Instance) -> bool {
    m.relations.iter().all(|r| {
        let tuples = inst.get(&r.name).map(Vec::as_slice).unwrap_or_default();
        let inside = tuples.iter().all(|t| r.upper_bound.contains(t));
        inside && (!m.is_type_relation(r) || tuples.len() == r.upper_bound.len())
    })
}
