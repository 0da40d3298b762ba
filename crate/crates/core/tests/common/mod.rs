//! Random well-formed relational models for property tests.

#![allow(dead_code)]

pub mod qf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use relog2smt_core::ir::{Atom, Goal, Multiplicity, RelDecl, RelExpr, RelFormula, RelModel};

const LEAVES: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_atoms: u32,
    pub max_arity: usize,
    pub max_depth: u32,
    pub max_conjuncts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_atoms: 2,
            max_arity: 3,
            max_depth: 3,
            max_conjuncts: 3,
        }
    }
}

struct Gen<'a> {
    rng: StdRng,
    cfg: GenConfig,
    /// Relation names by arity; index 1 includes type relations.
    by_arity: Vec<Vec<String>>,
    types: Vec<String>,
    vars: Vec<String>,
    next_var: usize,
    model: &'a RelModel,
}

impl Gen<'_> {
    fn expr(&mut self, arity: usize, depth: u32) -> RelExpr {
        let leaf_only = depth == 0 || self.rng.gen_bool(0.4);
        if leaf_only {
            if arity == 1 && !self.vars.is_empty() && self.rng.gen_bool(0.5) {
                return RelExpr::var(self.vars.choose(&mut self.rng).unwrap().clone());
            }
            if let Some(names) = self.by_arity.get(arity).filter(|n| !n.is_empty()) {
                return RelExpr::rel(names.choose(&mut self.rng).unwrap().clone());
            }
            if arity == 1 {
                return RelExpr::rel(self.types.choose(&mut self.rng).unwrap().clone());
            }
            let k = self.rng.gen_range(1..arity);
            return RelExpr::product(self.expr(k, 0), self.expr(arity - k, 0));
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => RelExpr::union(self.expr(arity, d), self.expr(arity, d)),
            1 => RelExpr::inter(self.expr(arity, d), self.expr(arity, d)),
            2 => RelExpr::diff(self.expr(arity, d), self.expr(arity, d)),
            3 if arity == 2 => RelExpr::transpose(self.expr(2, d)),
            4 if arity >= 2 => {
                let k = self.rng.gen_range(1..arity);
                RelExpr::product(self.expr(k, d), self.expr(arity - k, d))
            }
            _ => {
                // a.b has arity |a| + |b| - 2
                let max = self.cfg.max_arity.min(arity + 1);
                let ka = self.rng.gen_range(1..=max);
                let kb = arity + 2 - ka;
                if kb == 0 || kb > self.cfg.max_arity {
                    return self.expr(arity, d);
                }
                RelExpr::join(self.expr(ka, d), self.expr(kb, d))
            }
        }
    }

    fn quantified(&mut self, depth: u32) -> RelFormula {
        let n = self.rng.gen_range(1..=2);
        let mark = self.vars.len();
        let mut decls = Vec::new();
        for _ in 0..n {
            let bound = if self.rng.gen_bool(0.6) {
                let mut e = RelExpr::rel(self.types.choose(&mut self.rng).unwrap().clone());
                if self.types.len() > 1 && self.rng.gen_bool(0.3) {
                    e = RelExpr::union(e, RelExpr::rel(self.types.choose(&mut self.rng).unwrap().clone()));
                }
                e
            } else {
                self.expr(1, 1)
            };
            let v = format!("v{}", self.next_var);
            self.next_var += 1;
            decls.push((v.clone(), bound));
            self.vars.push(v);
        }
        let body = self.formula(depth.saturating_sub(1));
        self.vars.truncate(mark);
        if self.rng.gen_bool(0.5) {
            RelFormula::forall(decls, body)
        } else {
            RelFormula::exists(decls, body)
        }
    }

    fn formula(&mut self, depth: u32) -> RelFormula {
        let atomic = depth == 0 || self.rng.gen_bool(0.3);
        if atomic {
            let k = self.rng.gen_range(1..=2usize);
            let ed = self.rng.gen_range(0..=1);
            return match self.rng.gen_range(0..6) {
                0 => RelFormula::Equal(self.expr(k, ed), self.expr(k, ed)),
                1 => RelFormula::Subset(self.expr(k, ed), self.expr(k, ed)),
                2 => RelFormula::In(self.expr(k, ed), self.expr(k, ed)),
                _ => {
                    let kind = *[Multiplicity::One, Multiplicity::Lone, Multiplicity::Some, Multiplicity::No]
                        .choose(&mut self.rng)
                        .unwrap();
                    RelFormula::Mult(kind, self.expr(k, ed))
                }
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => RelFormula::not(self.formula(d)),
            1 => RelFormula::And(vec![self.formula(d), self.formula(d)]),
            2 => RelFormula::Or(vec![self.formula(d), self.formula(d)]),
            3 => RelFormula::implies(self.formula(d), self.formula(d)),
            4 => RelFormula::iff(self.formula(d), self.formula(d)),
            _ => self.quantified(depth),
        }
    }

    /// `(all ((x T)) (one (join x r)))` for a binary relation with a full
    /// single-leaf first column.
    fn totality(&mut self) -> Option<RelFormula> {
        let candidates: Vec<&RelDecl> = self
            .model
            .relations
            .iter()
            .filter(|r| r.arity == 2 && !self.types.contains(&r.name))
            .collect();
        let r = candidates.choose(&mut self.rng)?;
        let first = &r.upper_bound.first()?[0].prefix;
        if !self.types.contains(first) {
            return None;
        }
        Some(RelFormula::forall(
            vec![("f0".into(), RelExpr::rel(first.clone()))],
            RelFormula::Mult(Multiplicity::One, RelExpr::join(RelExpr::var("f0"), RelExpr::rel(r.name.clone()))),
        ))
    }
}

fn product(cols: &[Vec<Atom>]) -> Vec<Vec<Atom>> {
    let mut out = vec![Vec::new()];
    for col in cols {
        out = out
            .into_iter()
            .flat_map(|p: Vec<Atom>| {
                col.iter().map(move |a| {
                    let mut t = p.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// A random arity-correct model over up to three leaf types.
pub fn random_model(seed: u64, cfg: GenConfig) -> RelModel {
    let mut rng = StdRng::seed_from_u64(seed);
    let nleaves = rng.gen_range(1..=LEAVES.len());
    let mut universe = Vec::new();
    let mut leaf_atoms = Vec::new();
    for leaf in &LEAVES[..nleaves] {
        let n = rng.gen_range(1..=cfg.max_atoms);
        let atoms: Vec<Atom> = (0..n).map(|i| Atom::new(*leaf, i)).collect();
        universe.extend(atoms.iter().cloned());
        leaf_atoms.push(atoms);
    }
    let mut relations = Vec::new();
    let mut types = Vec::new();
    for (i, leaf) in LEAVES[..nleaves].iter().enumerate() {
        // The first leaf always has a type relation so unary expressions
        // can always be built.
        if i == 0 || rng.gen_bool(0.8) {
            relations.push(RelDecl {
                name: leaf.to_string(),
                arity: 1,
                upper_bound: leaf_atoms[i].iter().map(|a| vec![a.clone()]).collect(),
            });
            types.push(leaf.to_string());
        }
    }
    let nrels = rng.gen_range(1..=3);
    for r in 0..nrels {
        let arity = rng.gen_range(1..=cfg.max_arity);
        let cols: Vec<Vec<Atom>> = (0..arity)
            .map(|_| {
                let mut col = leaf_atoms.choose(&mut rng).unwrap().clone();
                if nleaves > 1 && rng.gen_bool(0.2) {
                    col.extend(leaf_atoms.choose(&mut rng).unwrap().iter().cloned());
                    col.sort();
                    col.dedup();
                }
                col
            })
            .collect();
        let mut bound = product(&cols);
        if rng.gen_bool(0.2) && bound.len() > 1 {
            let keep = rng.gen_range(0..bound.len());
            bound.retain(|_| rng.gen_bool(0.7));
            if bound.is_empty() {
                bound = vec![product(&cols).swap_remove(keep)];
            }
        }
        relations.push(RelDecl {
            name: format!("r{r}"),
            arity,
            upper_bound: bound,
        });
    }
    let mut model = RelModel {
        universe,
        relations,
        formula: RelFormula::True,
        goal: Goal::Run,
    };
    let mut by_arity = vec![Vec::new(); cfg.max_arity + 1];
    for r in &model.relations {
        by_arity[r.arity].push(r.name.clone());
    }
    let snapshot = model.clone();
    let mut g = Gen {
        rng,
        cfg,
        by_arity,
        types,
        vars: Vec::new(),
        next_var: 0,
        model: &snapshot,
    };
    let mut conjuncts = Vec::new();
    if g.rng.gen_bool(0.4) {
        conjuncts.extend(g.totality());
    }
    let n = g.rng.gen_range(1..=cfg.max_conjuncts);
    for _ in 0..n {
        conjuncts.push(g.formula(cfg.max_depth));
    }
    model.formula = match conjuncts.len() {
        1 => conjuncts.pop().unwrap(),
        _ => RelFormula::And(conjuncts),
    };
    model
}
