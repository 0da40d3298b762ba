//! Relational formulas to typed first-order logic.
//!
//! Translation is bottom-up. Every relational expression becomes a
//! [`Denotation`]: nothing (`Empty`), a tuple of scalar terms (`Tuple`), or a
//! possibly partially applied predicate family (`Rel`). Compound expressions
//! that are not scalar get a fresh helper relation `_hN` defined by a
//! biconditional axiom; helpers take the expression's free quantified
//! variables as leading parameters.
//!
//! In typed mode each leaf type is a sort and every relation is split into
//! one copy per leaf-type signature (`r#B_ID`). In untyped mode there is a
//! single sort `Univ` and leaf types are the unary predicates `is_T`.

mod denote;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::analysis::{analyze, leaf_splits, product, LeafId, LeafSet, TypeEnv};
use crate::error::TranslateError;
use crate::ir::{Multiplicity, QuantDecl, RelExpr, RelFormula, RelModel};
use crate::options::Options;
use crate::smtlib::{is_reserved, mangle};
use crate::tfol::{
    DeclBound, Formula, FuncDecl, Sort, Term, Theory, TheoryMeta, TypePredicate,
};

pub use denote::{Denotation, Operand, SymRef};

pub type Result<T> = std::result::Result<T, TranslateError>;

pub const UNIV: &str = "Univ";

/// Output of [`translate`].
#[derive(Debug, Clone)]
pub struct TransResult {
    pub theory: Theory,
    /// Helper relations introduced; in typed mode one helper may be declared
    /// as several split copies.
    pub helper_count: usize,
    /// Relation (or helper) name to the names of its declared copies.
    pub split_map: BTreeMap<String, Vec<String>>,
    /// Top-level conjuncts skipped because a function declaration already
    /// guarantees them.
    pub consumed: BTreeSet<usize>,
    pub env: TypeEnv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SymKind {
    Pred,
    Func,
}

#[derive(Debug, Clone)]
struct SymInfo {
    kind: SymKind,
    cols: Vec<LeafSet>,
    /// Typed mode: signature (all columns for predicates, domain columns for
    /// functions) to declared name.
    splits: BTreeMap<Vec<LeafId>, String>,
    /// Untyped mode: the single declared name.
    name: String,
}

/// Translation state for one model under one option combination.
pub struct Translator<'a> {
    model: &'a RelModel,
    env: &'a TypeEnv,
    opts: Options,
    used: HashSet<String>,
    sorts: Vec<Sort>,
    /// Typed: sort per leaf. Untyped: unused.
    leaf_sorts: Vec<Sort>,
    /// Untyped: `is_T` per leaf.
    type_preds: Vec<String>,
    syms: Vec<SymInfo>,
    rel_syms: BTreeMap<String, usize>,
    decls: Vec<FuncDecl>,
    assertions: Vec<Formula>,
    bounds: Vec<DeclBound>,
    split_map: BTreeMap<String, Vec<String>>,
    ctx: Vec<(String, Operand)>,
    helper_count: usize,
    fresh: usize,
}

fn imp(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, b) => b,
        (Formula::False, _) | (_, Formula::True) => Formula::True,
        (a, Formula::False) => Formula::not(a),
        (a, b) => Formula::implies(a, b),
    }
}

fn iff(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, b) => b,
        (a, Formula::True) => a,
        (a, b) if a == b => Formula::True,
        (a, b) => Formula::iff(a, b),
    }
}

fn not(a: Formula) -> Formula {
    match a {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(inner) => *inner,
        a => Formula::not(a),
    }
}

fn forall(vars: Vec<(String, Sort)>, body: Formula) -> Formula {
    match body {
        Formula::True | Formula::False => body,
        body => Formula::forall(vars, body),
    }
}

fn exists(vars: Vec<(String, Sort)>, body: Formula) -> Formula {
    match body {
        Formula::True | Formula::False => body,
        body => Formula::exists(vars, body),
    }
}

impl<'a> Translator<'a> {
    pub fn new(model: &'a RelModel, env: &'a TypeEnv, opts: Options) -> Self {
        Translator {
            model,
            env,
            opts,
            used: HashSet::new(),
            sorts: Vec::new(),
            leaf_sorts: Vec::new(),
            type_preds: Vec::new(),
            syms: Vec::new(),
            rel_syms: BTreeMap::new(),
            decls: Vec::new(),
            assertions: Vec::new(),
            bounds: Vec::new(),
            split_map: BTreeMap::new(),
            ctx: Vec::new(),
            helper_count: 0,
            fresh: 0,
        }
    }

    fn typed(&self) -> bool {
        self.opts.typed()
    }

    fn claim(&mut self, base: String) -> String {
        let mut name = base;
        while self.used.contains(&name) || is_reserved(&name) {
            name.push('_');
        }
        self.used.insert(name.clone());
        name
    }

    fn univ(&self) -> Sort {
        self.sorts[0].clone()
    }

    fn sort_of(&self, leaf: LeafId) -> Sort {
        self.leaf_sorts[leaf.index()].clone()
    }

    fn all_leaves(&self) -> LeafSet {
        self.env.all_leaves()
    }

    /// `⋁_{T ∈ set} is_T(term)`, or true when `set` covers every leaf.
    fn leaf_guard(&self, term: &Term, set: &LeafSet) -> Formula {
        if *set == self.all_leaves() {
            return Formula::True;
        }
        Formula::or(
            set.iter()
                .map(|l| Formula::pred(self.type_preds[l.index()].clone(), vec![term.clone()]))
                .collect(),
        )
    }

    fn fresh_name(&mut self) -> String {
        let n = format!("_x{}", self.fresh);
        self.fresh += 1;
        n
    }

    /// Fresh typed variables for one leaf signature.
    fn fresh_typed(&mut self, sig: &[LeafId]) -> (Vec<(String, Sort)>, Vec<Operand>) {
        sig.iter()
            .map(|&l| {
                let n = self.fresh_name();
                (
                    (n.clone(), self.sort_of(l)),
                    Operand::new(Term::Var(n), std::iter::once(l).collect()),
                )
            })
            .unzip()
    }

    /// Fresh `Univ` variables; `leaves` records what is known about them.
    fn fresh_untyped(&mut self, leaves: &[LeafSet]) -> (Vec<(String, Sort)>, Vec<Operand>) {
        leaves
            .iter()
            .map(|set| {
                let n = self.fresh_name();
                ((n.clone(), self.univ()), Operand::new(Term::Var(n), set.clone()))
            })
            .unzip()
    }

    /// Declares sorts, and in untyped mode the `is_T` predicates with their
    /// partition axiom.
    pub fn declare_types(&mut self) {
        if self.typed() {
            for leaf in &self.env.leaf_types {
                let name = self.claim(mangle(leaf));
                self.sorts.push(Sort::new(name.clone()));
                self.leaf_sorts.push(Sort::new(name));
            }
            return;
        }
        let univ = self.claim(UNIV.to_string());
        self.sorts.push(Sort::new(univ.clone()));
        for leaf in &self.env.leaf_types {
            let name = self.claim(format!("is_{}", mangle(leaf)));
            self.decls
                .push(FuncDecl::predicate(name.clone(), vec![Sort::new(univ.clone())]));
            self.type_preds.push(name);
        }
        let x = self.fresh_name();
        let is = |p: &String| Formula::pred(p.clone(), vec![Term::var(x.clone())]);
        let cases = self
            .type_preds
            .iter()
            .map(|p| {
                let mut conj = vec![is(p)];
                conj.extend(
                    self.type_preds
                        .iter()
                        .filter(|q| *q != p)
                        .map(|q| Formula::not(is(q))),
                );
                Formula::and(conj)
            })
            .collect();
        self.assertions
            .push(Formula::forall(vec![(x.clone(), Sort::new(univ))], Formula::or(cases)));
    }

    fn sig_name(&self, base: &str, sig: &[LeafId]) -> String {
        let parts: Vec<&str> = sig.iter().map(|l| self.leaf_sorts[l.index()].name()).collect();
        format!("{base}#{}", parts.join("_"))
    }

    /// Declares every non-type relation as predicates or functions and
    /// returns the conjuncts made redundant by function declarations.
    pub fn declare_functions(&mut self) -> BTreeSet<usize> {
        let mut consumed = BTreeSet::new();
        let model = self.model;
        for rel in &model.relations {
            if self.env.type_relations.contains(&rel.name) {
                continue;
            }
            let cols = self.env.column_types[&rel.name].clone();
            if cols.iter().any(BTreeSet::is_empty) {
                self.split_map.insert(rel.name.clone(), Vec::new());
                continue;
            }
            let base = mangle(&rel.name);
            let function = self
                .opts
                .functions()
                .then(|| self.env.total_functions.get(&rel.name))
                .flatten()
                .filter(|f| !self.typed() || f.range.len() == 1)
                .cloned();

            let idx = self.syms.len();
            let mut info = SymInfo {
                kind: if function.is_some() { SymKind::Func } else { SymKind::Pred },
                cols: cols.clone(),
                splits: BTreeMap::new(),
                name: String::new(),
            };
            let mut names = Vec::new();

            match (&function, self.typed()) {
                (Some(f), true) => {
                    let range = self.sort_of(*f.range.first().unwrap());
                    for sig in product(&f.domain) {
                        let name = self.claim(self.sig_name(&base, &sig));
                        let args = sig.iter().map(|&l| self.sort_of(l)).collect();
                        self.decls.push(FuncDecl::function(name.clone(), args, range.clone()));
                        info.splits.insert(sig, name.clone());
                        names.push(name);
                    }
                }
                (Some(f), false) => {
                    let name = self.claim(base);
                    let k = f.domain.len();
                    self.decls
                        .push(FuncDecl::function(name.clone(), vec![self.univ(); k], self.univ()));
                    let (vars, xs) = self.fresh_untyped(&vec![self.all_leaves(); k]);
                    let dom = Formula::and(
                        xs.iter()
                            .zip(&f.domain)
                            .map(|(x, set)| self.leaf_guard(&x.term, set))
                            .collect(),
                    );
                    let app = Term::apply(name.clone(), xs.into_iter().map(|x| x.term).collect());
                    let ran = self.leaf_guard(&app, &f.range);
                    let axiom = forall(vars, imp(dom, ran));
                    if axiom != Formula::True {
                        self.assertions.push(axiom);
                    }
                    info.name = name.clone();
                    names.push(name);
                }
                (None, true) => {
                    for sig in leaf_splits(&rel.name, self.env) {
                        let name = self.claim(self.sig_name(&base, &sig));
                        let args = sig.iter().map(|&l| self.sort_of(l)).collect();
                        self.decls.push(FuncDecl::predicate(name.clone(), args));
                        if !self.env.full_bounds.contains(&rel.name) {
                            let allowed = rel
                                .upper_bound
                                .iter()
                                .filter_map(|t| {
                                    let pos: Vec<(LeafId, usize)> = t
                                        .iter()
                                        .map(|a| self.env.position_in_leaf(a).unwrap())
                                        .collect();
                                    pos.iter()
                                        .map(|p| p.0)
                                        .eq(sig.iter().copied())
                                        .then(|| pos.iter().map(|p| p.1).collect())
                                })
                                .collect();
                            self.bounds.push(DeclBound {
                                decl: name.clone(),
                                allowed,
                            });
                        }
                        info.splits.insert(sig, name.clone());
                        names.push(name);
                    }
                }
                (None, false) => {
                    let name = self.claim(base);
                    let k = rel.arity;
                    self.decls
                        .push(FuncDecl::predicate(name.clone(), vec![self.univ(); k]));
                    let (vars, xs) = self.fresh_untyped(&vec![self.all_leaves(); k]);
                    let guard = Formula::and(
                        xs.iter()
                            .zip(&cols)
                            .map(|(x, set)| self.leaf_guard(&x.term, set))
                            .collect(),
                    );
                    let head = Formula::pred(name.clone(), xs.into_iter().map(|x| x.term).collect());
                    let axiom = forall(vars, imp(head, guard));
                    if axiom != Formula::True {
                        self.assertions.push(axiom);
                    }
                    if !self.env.full_bounds.contains(&rel.name) {
                        let allowed = rel
                            .upper_bound
                            .iter()
                            .map(|t| t.iter().map(|a| self.env.position_in_universe(a).unwrap()).collect())
                            .collect();
                        self.bounds.push(DeclBound {
                            decl: name.clone(),
                            allowed,
                        });
                    }
                    info.name = name.clone();
                    names.push(name);
                }
            }
            if let Some(f) = &function {
                consumed.extend(f.conjuncts.iter().copied());
            }
            self.syms.push(info);
            self.rel_syms.insert(rel.name.clone(), idx);
            self.split_map.insert(rel.name.clone(), names);
        }
        consumed
    }

    fn lookup(&self, var: &str) -> Result<Operand> {
        self.ctx
            .iter()
            .rev()
            .find(|(n, _)| n == var)
            .map(|(_, o)| o.clone())
            .ok_or_else(|| TranslateError::UnboundVariable(var.to_string()))
    }

    /// SMT name for a quantified source variable, distinct from every global
    /// symbol and every variable in scope.
    fn var_name(&self, var: &str) -> String {
        let mut name = mangle(var);
        while self.used.contains(&name)
            || is_reserved(&name)
            || self.ctx.iter().any(|(_, o)| o.term == Term::Var(name.clone()))
        {
            name.push('_');
        }
        name
    }

    /// Declares a helper relation over `cols` whose meaning is `body`, and
    /// returns its denotation.
    fn helper<F>(&mut self, e: &RelExpr, cols: Vec<LeafSet>, body: F) -> Result<Denotation>
    where
        F: Fn(&mut Self, &[Operand]) -> Formula,
    {
        let id = self.helper_count;
        self.helper_count += 1;
        let base = format!("_h{id}");
        let params: Vec<Operand> = e
            .free_vars()
            .iter()
            .map(|v| self.lookup(v))
            .collect::<Result<_>>()?;
        let param_terms: Vec<Term> = params.iter().map(|p| p.term.clone()).collect();
        let param_vars: Vec<(String, Sort)> = params
            .iter()
            .map(|p| {
                let Term::Var(n) = &p.term else {
                    unreachable!("helper parameters are variables")
                };
                let sort = if self.typed() {
                    self.sort_of(p.leaf())
                } else {
                    self.univ()
                };
                (n.clone(), sort)
            })
            .collect();

        let mut info = SymInfo {
            kind: SymKind::Pred,
            cols: cols.clone(),
            splits: BTreeMap::new(),
            name: String::new(),
        };
        let mut names = Vec::new();
        if self.typed() {
            for sig in product(&cols) {
                let name = self.claim(self.sig_name(&base, &sig));
                let args = param_vars
                    .iter()
                    .map(|(_, s)| s.clone())
                    .chain(sig.iter().map(|&l| self.sort_of(l)))
                    .collect();
                self.decls.push(FuncDecl::predicate(name.clone(), args));
                let (vars, xs) = self.fresh_typed(&sig);
                let meaning = body(self, &xs);
                let head = Formula::pred(
                    name.clone(),
                    param_terms.iter().cloned().chain(xs.iter().map(|x| x.term.clone())).collect(),
                );
                let all_vars = param_vars.iter().cloned().chain(vars).collect();
                self.assertions.push(Formula::forall(all_vars, Formula::iff(head, meaning)));
                info.splits.insert(sig, name.clone());
                names.push(name);
            }
        } else {
            let name = self.claim(base.clone());
            let arity = param_vars.len() + cols.len();
            self.decls
                .push(FuncDecl::predicate(name.clone(), vec![self.univ(); arity]));
            let (vars, xs) = self.fresh_untyped(&cols);
            let guard = Formula::and(
                xs.iter()
                    .zip(&cols)
                    .map(|(x, set)| self.leaf_guard(&x.term, set))
                    .collect(),
            );
            let meaning = body(self, &xs);
            let head = Formula::pred(
                name.clone(),
                param_terms.iter().cloned().chain(xs.iter().map(|x| x.term.clone())).collect(),
            );
            let all_vars: Vec<(String, Sort)> = param_vars.iter().cloned().chain(vars).collect();
            self.assertions.push(Formula::forall(
                all_vars.clone(),
                imp(guard.clone(), Formula::iff(head.clone(), meaning)),
            ));
            if guard != Formula::True {
                self.assertions.push(Formula::forall(all_vars, imp(head, guard)));
            }
            info.name = name.clone();
            names.push(name);
        }
        let idx = self.syms.len();
        self.syms.push(info);
        self.split_map.insert(base, names);
        Ok(Denotation::Rel {
            sym: SymRef::Decl(idx),
            params: param_terms,
            slots: vec![None; cols.len()],
            cols,
        })
    }

    /// Translates a relational expression.
    pub fn translate_expr(&mut self, e: &RelExpr) -> Result<Denotation> {
        use Denotation as D;
        match e {
            RelExpr::Var(v) => Ok(D::Tuple(vec![self.lookup(v)?])),
            RelExpr::Rel(name) => {
                if self.env.type_relations.contains(name) {
                    let leaf = self.env.leaf(name).expect("type relation names a leaf");
                    return Ok(D::Rel {
                        sym: SymRef::Type(leaf),
                        params: Vec::new(),
                        slots: vec![None],
                        cols: vec![std::iter::once(leaf).collect()],
                    });
                }
                let decl = self
                    .model
                    .relation(name)
                    .ok_or_else(|| TranslateError::UnknownRelation(name.clone()))?;
                match self.rel_syms.get(name) {
                    Some(&idx) => Ok(D::Rel {
                        sym: SymRef::Decl(idx),
                        params: Vec::new(),
                        slots: vec![None; decl.arity],
                        cols: self.syms[idx].cols.clone(),
                    }),
                    None => Ok(D::Empty(decl.arity)),
                }
            }
            RelExpr::Union(a, b) | RelExpr::Inter(a, b) | RelExpr::Diff(a, b) => {
                let da = self.translate_expr(a)?;
                let db = self.translate_expr(b)?;
                if da.arity() != db.arity() {
                    return Err(TranslateError::Arity(format!(
                        "set operation over arities {} and {}",
                        da.arity(),
                        db.arity()
                    )));
                }
                let (ca, cb) = (da.free_cols(), db.free_cols());
                match e {
                    RelExpr::Union(..) => {
                        if da.is_empty() {
                            return Ok(db);
                        }
                        if db.is_empty() {
                            return Ok(da);
                        }
                        let cols = ca.iter().zip(&cb).map(|(x, y)| x | y).collect();
                        self.helper(e, cols, move |t, xs| {
                            Formula::or(vec![t.member(&da, xs), t.member(&db, xs)])
                        })
                    }
                    RelExpr::Inter(..) => {
                        let cols: Vec<LeafSet> = ca.iter().zip(&cb).map(|(x, y)| x & y).collect();
                        if da.is_empty() || db.is_empty() || cols.iter().any(BTreeSet::is_empty) {
                            return Ok(D::Empty(da.arity()));
                        }
                        self.helper(e, cols, move |t, xs| {
                            Formula::and(vec![t.member(&da, xs), t.member(&db, xs)])
                        })
                    }
                    _ => {
                        if da.is_empty() || db.is_empty() {
                            return Ok(da);
                        }
                        self.helper(e, ca, move |t, xs| {
                            Formula::and(vec![t.member(&da, xs), not(t.member(&db, xs))])
                        })
                    }
                }
            }
            RelExpr::Transpose(a) => {
                let da = self.translate_expr(a)?;
                if da.arity() != 2 {
                    return Err(TranslateError::Arity(format!("transpose of arity {}", da.arity())));
                }
                match da {
                    D::Empty(_) => Ok(D::Empty(2)),
                    D::Tuple(mut ts) => {
                        ts.reverse();
                        Ok(D::Tuple(ts))
                    }
                    da => {
                        let mut cols = da.free_cols();
                        cols.reverse();
                        self.helper(e, cols, move |t, xs| {
                            t.member(&da, &[xs[1].clone(), xs[0].clone()])
                        })
                    }
                }
            }
            RelExpr::Product(a, b) => {
                let da = self.translate_expr(a)?;
                let db = self.translate_expr(b)?;
                let (ka, kb) = (da.arity(), db.arity());
                match (da, db) {
                    (D::Tuple(mut x), D::Tuple(y)) => {
                        x.extend(y);
                        Ok(D::Tuple(x))
                    }
                    (da, db) if da.is_empty() || db.is_empty() => Ok(D::Empty(ka + kb)),
                    (da, db) => {
                        let mut cols = da.free_cols();
                        cols.extend(db.free_cols());
                        self.helper(e, cols, move |t, xs| {
                            let (x, y) = xs.split_at(ka);
                            Formula::and(vec![t.member(&da, x), t.member(&db, y)])
                        })
                    }
                }
            }
            RelExpr::Join(a, b) => {
                let da = self.translate_expr(a)?;
                let db = self.translate_expr(b)?;
                let (ka, kb) = (da.arity(), db.arity());
                if ka + kb < 3 {
                    return Err(TranslateError::Arity(format!("join of arities {ka} and {kb}")));
                }
                if da.is_empty() || db.is_empty() {
                    return Ok(D::Empty(ka + kb - 2));
                }
                if let D::Tuple(ts) = &da {
                    if ts.len() == 1 && matches!(db, D::Rel { .. }) {
                        return Ok(self.fill(db, ts[0].clone(), true));
                    }
                }
                if let D::Tuple(ts) = &db {
                    if ts.len() == 1 && matches!(da, D::Rel { .. }) {
                        return Ok(self.fill(da, ts[0].clone(), false));
                    }
                }
                let (ca, cb) = (da.free_cols(), db.free_cols());
                let middle: LeafSet = &ca[ka - 1] & &cb[0];
                if middle.is_empty() {
                    return Ok(D::Empty(ka + kb - 2));
                }
                let cols: Vec<LeafSet> = ca[..ka - 1].iter().chain(&cb[1..]).cloned().collect();
                self.helper(e, cols, move |t, xs| {
                    let (x, y) = xs.split_at(ka - 1);
                    let mut parts = Vec::new();
                    let witnesses: Vec<Option<LeafId>> = if t.typed() {
                        middle.iter().copied().map(Some).collect()
                    } else {
                        vec![None]
                    };
                    for leaf in witnesses {
                        let (zv, z) = match leaf {
                            Some(l) => t.fresh_typed(&[l]),
                            None => t.fresh_untyped(&[t.all_leaves()]),
                        };
                        let left: Vec<Operand> = x.iter().cloned().chain(z.iter().cloned()).collect();
                        let right: Vec<Operand> = z.iter().cloned().chain(y.iter().cloned()).collect();
                        parts.push(exists(
                            zv,
                            Formula::and(vec![t.member(&da, &left), t.member(&db, &right)]),
                        ));
                    }
                    Formula::or(parts)
                })
            }
        }
    }

    /// Joins a scalar into the first (`front`) or last free column of `den`
    /// without a helper; a total function with all domain columns filled
    /// collapses to an application term.
    fn fill(&self, den: Denotation, scalar: Operand, front: bool) -> Denotation {
        let Denotation::Rel {
            sym,
            params,
            mut slots,
            mut cols,
        } = den
        else {
            unreachable!("fill is only called on relations")
        };
        let free: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].is_none()).collect();
        let pos = if front { free[0] } else { *free.last().unwrap() };
        let narrowed: LeafSet = &cols[pos] & &scalar.leaves;
        if narrowed.is_empty() {
            return Denotation::Empty(free.len() - 1);
        }
        cols[pos] = narrowed;
        slots[pos] = Some(scalar);

        if let SymRef::Decl(idx) = sym {
            let info = &self.syms[idx];
            let last = slots.len() - 1;
            let only_range_free = slots[..last].iter().all(Option::is_some) && slots[last].is_none();
            if info.kind == SymKind::Func && only_range_free {
                let dom: Vec<&Operand> = slots[..last].iter().map(|s| s.as_ref().unwrap()).collect();
                if self.typed() {
                    let sig: Vec<LeafId> = dom.iter().map(|o| o.leaf()).collect();
                    if let Some(name) = info.splits.get(&sig) {
                        let term = Term::apply(
                            name.clone(),
                            params.iter().cloned().chain(dom.iter().map(|o| o.term.clone())).collect(),
                        );
                        return Denotation::Tuple(vec![Operand::new(term, info.cols[last].clone())]);
                    }
                    return Denotation::Empty(1);
                }
                let inside = dom.iter().zip(&info.cols).all(|(o, c)| o.leaves.is_subset(c));
                if inside {
                    let term = Term::apply(
                        info.name.clone(),
                        params.iter().cloned().chain(dom.iter().map(|o| o.term.clone())).collect(),
                    );
                    return Denotation::Tuple(vec![Operand::new(term, info.cols[last].clone())]);
                }
            }
        }
        Denotation::Rel {
            sym,
            params,
            slots,
            cols,
        }
    }

    fn eq(&self, a: &Operand, b: &Operand) -> Formula {
        if a.leaves.is_disjoint(&b.leaves) {
            return Formula::False;
        }
        if a.term == b.term {
            return Formula::True;
        }
        Formula::Eq(a.term.clone(), b.term.clone())
    }

    /// `[den](args)`: the formula stating that `args` is a tuple of `den`.
    pub fn member(&self, den: &Denotation, args: &[Operand]) -> Formula {
        match den {
            Denotation::Empty(_) => Formula::False,
            Denotation::Tuple(ts) => {
                Formula::and(ts.iter().zip(args).map(|(t, a)| self.eq(t, a)).collect())
            }
            Denotation::Rel {
                sym, params, slots, ..
            } => {
                let mut it = args.iter();
                let full: Vec<&Operand> = slots
                    .iter()
                    .map(|s| s.as_ref().unwrap_or_else(|| it.next().expect("argument count")))
                    .collect();
                self.apply_sym(*sym, params, &full)
            }
        }
    }

    fn apply_sym(&self, sym: SymRef, params: &[Term], full: &[&Operand]) -> Formula {
        match sym {
            SymRef::Type(leaf) => {
                let x = full[0];
                if !x.leaves.contains(&leaf) {
                    Formula::False
                } else if x.leaves.len() == 1 {
                    Formula::True
                } else {
                    Formula::pred(self.type_preds[leaf.index()].clone(), vec![x.term.clone()])
                }
            }
            SymRef::Decl(idx) => {
                let info = &self.syms[idx];
                if full.iter().zip(&info.cols).any(|(o, c)| o.leaves.is_disjoint(c)) {
                    return Formula::False;
                }
                let terms = |xs: &[&Operand]| -> Vec<Term> {
                    params.iter().cloned().chain(xs.iter().map(|o| o.term.clone())).collect()
                };
                let k = full.len() - 1;
                match (info.kind, self.typed()) {
                    (SymKind::Pred, true) => {
                        let sig: Vec<LeafId> = full.iter().map(|o| o.leaf()).collect();
                        match info.splits.get(&sig) {
                            Some(name) => Formula::pred(name.clone(), terms(full)),
                            None => Formula::False,
                        }
                    }
                    (SymKind::Pred, false) => Formula::pred(info.name.clone(), terms(full)),
                    (SymKind::Func, true) => {
                        let sig: Vec<LeafId> = full[..k].iter().map(|o| o.leaf()).collect();
                        match info.splits.get(&sig) {
                            Some(name) => Formula::Eq(
                                Term::apply(name.clone(), terms(&full[..k])),
                                full[k].term.clone(),
                            ),
                            None => Formula::False,
                        }
                    }
                    (SymKind::Func, false) => {
                        let mut conj: Vec<Formula> = full[..k]
                            .iter()
                            .zip(&info.cols)
                            .filter(|(o, c)| !o.leaves.is_subset(c))
                            .map(|(o, c)| self.leaf_guard(&o.term, c))
                            .collect();
                        conj.push(Formula::Eq(
                            Term::apply(info.name.clone(), terms(&full[..k])),
                            full[k].term.clone(),
                        ));
                        Formula::and(conj)
                    }
                }
            }
        }
    }

    /// Quantifies fresh variables over every tuple position of `cols`:
    /// typed mode yields one quantifier per leaf signature, combined with
    /// `and` (universal) or `or` (existential).
    fn over_tuples<F>(&mut self, cols: &[LeafSet], universal: bool, mut body: F) -> Formula
    where
        F: FnMut(&mut Self, &[Operand]) -> Formula,
    {
        if self.typed() {
            let mut parts = Vec::new();
            for sig in product(cols) {
                let (vars, xs) = self.fresh_typed(&sig);
                let b = body(self, &xs);
                parts.push(if universal { forall(vars, b) } else { exists(vars, b) });
            }
            if universal {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        } else {
            let (vars, xs) = self.fresh_untyped(&vec![self.all_leaves(); cols.len()]);
            let b = body(self, &xs);
            if universal {
                forall(vars, b)
            } else {
                exists(vars, b)
            }
        }
    }

    fn some(&mut self, den: &Denotation) -> Formula {
        match den {
            Denotation::Empty(_) => Formula::False,
            Denotation::Tuple(_) => Formula::True,
            den => {
                let cols = den.free_cols();
                self.over_tuples(&cols, false, |t, xs| t.member(den, xs))
            }
        }
    }

    fn lone(&mut self, den: &Denotation) -> Formula {
        match den {
            Denotation::Empty(_) | Denotation::Tuple(_) => Formula::True,
            den => {
                let cols = den.free_cols();
                if self.typed() {
                    let sigs = product(&cols);
                    let mut parts = Vec::new();
                    for (i, s1) in sigs.iter().enumerate() {
                        for s2 in &sigs[i..] {
                            let (v1, x) = self.fresh_typed(s1);
                            let (v2, y) = self.fresh_typed(s2);
                            let both = Formula::and(vec![self.member(den, &x), self.member(den, &y)]);
                            let same = Formula::and(x.iter().zip(&y).map(|(a, b)| self.eq(a, b)).collect());
                            parts.push(forall(v1.into_iter().chain(v2).collect(), imp(both, same)));
                        }
                    }
                    Formula::and(parts)
                } else {
                    let all = vec![self.all_leaves(); cols.len()];
                    let (v1, x) = self.fresh_untyped(&all);
                    let (v2, y) = self.fresh_untyped(&all);
                    let both = Formula::and(vec![self.member(den, &x), self.member(den, &y)]);
                    let same = Formula::and(x.iter().zip(&y).map(|(a, b)| self.eq(a, b)).collect());
                    forall(v1.into_iter().chain(v2).collect(), imp(both, same))
                }
            }
        }
    }

    fn union_cols(a: &Denotation, b: &Denotation) -> Vec<LeafSet> {
        a.free_cols()
            .iter()
            .zip(b.free_cols())
            .map(|(x, y)| x | &y)
            .collect()
    }

    fn quantifier(&mut self, universal: bool, decls: &[QuantDecl], body: &RelFormula) -> Result<Formula> {
        let Some(((var, bound), rest)) = decls.split_first() else {
            return self.translate_formula(body);
        };
        let type_leaves = self.env.type_union_leaves(bound);
        let den = match type_leaves {
            Some(_) => None,
            None => Some(self.translate_expr(bound)?),
        };
        let leaves = match (&type_leaves, &den) {
            (Some(l), _) => l.clone(),
            (None, Some(d)) => d.free_cols().into_iter().next().unwrap_or_default(),
            (None, None) => unreachable!(),
        };
        let name = self.var_name(var);
        let combine = |guard: Formula, inner: Formula| {
            if universal {
                imp(guard, inner)
            } else {
                Formula::and(vec![guard, inner])
            }
        };
        if self.typed() {
            let mut parts = Vec::new();
            for leaf in leaves {
                let x = Operand::new(Term::Var(name.clone()), std::iter::once(leaf).collect());
                let guard = match &den {
                    Some(d) => self.member(d, std::slice::from_ref(&x)),
                    None => Formula::True,
                };
                self.ctx.push((var.clone(), x));
                let inner = self.quantifier(universal, rest, body);
                self.ctx.pop();
                let q = vec![(name.clone(), self.sort_of(leaf))];
                let f = combine(guard, inner?);
                parts.push(if universal { forall(q, f) } else { exists(q, f) });
            }
            return Ok(if universal { Formula::and(parts) } else { Formula::or(parts) });
        }
        let unknown = Operand::new(Term::Var(name.clone()), self.all_leaves());
        let guard = match &den {
            Some(d) => self.member(d, std::slice::from_ref(&unknown)),
            None => self.leaf_guard(&unknown.term, &leaves),
        };
        if leaves.is_empty() {
            return Ok(if universal { Formula::True } else { Formula::False });
        }
        self.ctx
            .push((var.clone(), Operand::new(Term::Var(name.clone()), leaves)));
        let inner = self.quantifier(universal, rest, body);
        self.ctx.pop();
        let q = vec![(name, self.univ())];
        let f = combine(guard, inner?);
        Ok(if universal { forall(q, f) } else { exists(q, f) })
    }

    /// Translates a relational formula; helper declarations and their axioms
    /// are recorded as a side effect.
    pub fn translate_formula(&mut self, f: &RelFormula) -> Result<Formula> {
        Ok(match f {
            RelFormula::True => Formula::True,
            RelFormula::False => Formula::False,
            RelFormula::Not(g) => not(self.translate_formula(g)?),
            RelFormula::And(fs) => Formula::and(
                fs.iter().map(|g| self.translate_formula(g)).collect::<Result<_>>()?,
            ),
            RelFormula::Or(fs) => Formula::or(
                fs.iter().map(|g| self.translate_formula(g)).collect::<Result<_>>()?,
            ),
            RelFormula::Implies(a, b) => {
                let a = self.translate_formula(a)?;
                imp(a, self.translate_formula(b)?)
            }
            RelFormula::Iff(a, b) => {
                let a = self.translate_formula(a)?;
                iff(a, self.translate_formula(b)?)
            }
            RelFormula::Forall(decls, body) => self.quantifier(true, decls, body)?,
            RelFormula::Exists(decls, body) => self.quantifier(false, decls, body)?,
            RelFormula::Mult(kind, e) => {
                let d = self.translate_expr(e)?;
                match kind {
                    Multiplicity::Some => self.some(&d),
                    Multiplicity::No => not(self.some(&d)),
                    Multiplicity::Lone => self.lone(&d),
                    Multiplicity::One => {
                        let s = self.some(&d);
                        Formula::and(vec![s, self.lone(&d)])
                    }
                }
            }
            RelFormula::Equal(a, b) => {
                let da = self.translate_expr(a)?;
                let db = self.translate_expr(b)?;
                if da.arity() != db.arity() {
                    return Err(TranslateError::Arity(format!(
                        "equality over arities {} and {}",
                        da.arity(),
                        db.arity()
                    )));
                }
                match (&da, &db) {
                    (Denotation::Tuple(x), Denotation::Tuple(y)) => {
                        Formula::and(x.iter().zip(y).map(|(p, q)| self.eq(p, q)).collect())
                    }
                    (Denotation::Empty(_), other) | (other, Denotation::Empty(_)) => {
                        not(self.some(other))
                    }
                    _ => {
                        let cols = Self::union_cols(&da, &db);
                        self.over_tuples(&cols, true, |t, xs| iff(t.member(&da, xs), t.member(&db, xs)))
                    }
                }
            }
            RelFormula::Subset(a, b) | RelFormula::In(a, b) => {
                let da = self.translate_expr(a)?;
                let db = self.translate_expr(b)?;
                if da.arity() != db.arity() {
                    return Err(TranslateError::Arity(format!(
                        "subset over arities {} and {}",
                        da.arity(),
                        db.arity()
                    )));
                }
                match &da {
                    Denotation::Empty(_) => Formula::True,
                    Denotation::Tuple(ts) => self.member(&db, ts),
                    _ => {
                        let cols = da.free_cols();
                        self.over_tuples(&cols, true, |t, xs| imp(t.member(&da, xs), t.member(&db, xs)))
                    }
                }
            }
        })
    }

    fn finish(self, consumed: BTreeSet<usize>, name: &str) -> TransResult {
        let env = self.env;
        let sort_scopes = if self.typed() {
            self.leaf_sorts
                .iter()
                .zip(&env.scopes)
                .map(|(s, sc)| (s.clone(), sc.count))
                .collect()
        } else {
            vec![(self.sorts[0].clone(), env.universe.len())]
        };
        let type_predicates = self
            .type_preds
            .iter()
            .zip(env.leaves())
            .map(|(p, leaf)| TypePredicate {
                name: p.clone(),
                members: env
                    .universe
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.prefix == env.leaf_name(leaf))
                    .map(|(i, _)| i)
                    .collect(),
                exact: env.scope(leaf).exact,
            })
            .collect();
        TransResult {
            theory: Theory {
                sorts: self.sorts,
                decls: self.decls,
                assertions: self.assertions,
                meta: TheoryMeta {
                    model_name: name.to_string(),
                    options: Some(self.opts),
                    sort_scopes,
                    type_predicates,
                    bounds: self.bounds,
                },
            },
            helper_count: self.helper_count,
            split_map: self.split_map,
            consumed,
            env: env.clone(),
        }
    }
}

/// Runs analysis, type and function declaration, and formula translation of
/// every conjunct that a declaration does not already guarantee.
pub fn translate(m: &RelModel, opts: Options) -> Result<TransResult> {
    translate_named(m, opts, "")
}

pub fn translate_named(m: &RelModel, opts: Options, name: &str) -> Result<TransResult> {
    let env = analyze(m);
    let mut t = Translator::new(m, &env, opts);
    t.declare_types();
    let consumed = t.declare_functions();
    for (i, c) in m.formula.conjuncts().into_iter().enumerate() {
        if consumed.contains(&i) {
            continue;
        }
        let f = t.translate_formula(c)?;
        if f != Formula::True {
            t.assertions.push(f);
        }
    }
    Ok(t.finish(consumed, name))
}
