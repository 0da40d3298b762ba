//! Typed first-order logic: sorts, function/predicate declarations and
//! formulas, plus a sort checker.

use std::collections::HashMap;
use std::fmt;

use crate::options::Options;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(pub String);

impl Sort {
    pub fn new(name: impl Into<String>) -> Self {
        Sort(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ResultSort {
    Bool,
    Sort(Sort),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FuncDecl {
    pub name: String,
    pub args: Vec<Sort>,
    pub result: ResultSort,
}

impl FuncDecl {
    pub fn predicate(name: impl Into<String>, args: Vec<Sort>) -> Self {
        FuncDecl {
            name: name.into(),
            args,
            result: ResultSort::Bool,
        }
    }

    pub fn function(name: impl Into<String>, args: Vec<Sort>, result: Sort) -> Self {
        FuncDecl {
            name: name.into(),
            args,
            result: ResultSort::Sort(result),
        }
    }

    pub fn constant(name: impl Into<String>, sort: Sort) -> Self {
        Self::function(name, Vec::new(), sort)
    }

    pub fn is_predicate(&self) -> bool {
        self.result == ResultSort::Bool
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A nullary declared function; in scoped theories these are exactly the
    /// pairwise-distinct domain constants.
    Const(String),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn apply(f: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Apply(f.into(), args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Eq(Term, Term),
    Pred(String, Vec<Term>),
    Forall(Vec<(String, Sort)>, Box<Formula>),
    Exists(Vec<(String, Sort)>, Box<Formula>),
    Distinct(Vec<Term>),
}

impl Formula {
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn pred(p: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Pred(p.into(), args)
    }

    pub fn forall(vars: Vec<(String, Sort)>, body: Formula) -> Self {
        if vars.is_empty() {
            return body;
        }
        Formula::Forall(vars, Box::new(body))
    }

    pub fn exists(vars: Vec<(String, Sort)>, body: Formula) -> Self {
        if vars.is_empty() {
            return body;
        }
        Formula::Exists(vars, Box::new(body))
    }

    /// Conjunction with trivial cases folded.
    pub fn and(fs: Vec<Formula>) -> Self {
        if fs.contains(&Formula::False) {
            return Formula::False;
        }
        let mut fs: Vec<Formula> = fs.into_iter().filter(|f| *f != Formula::True).collect();
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    /// Disjunction with trivial cases folded.
    pub fn or(fs: Vec<Formula>) -> Self {
        if fs.contains(&Formula::True) {
            return Formula::True;
        }
        let mut fs: Vec<Formula> = fs.into_iter().filter(|f| *f != Formula::False).collect();
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => true,
            Formula::Not(f) => f.has_quantifier(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_quantifier),
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.has_quantifier() || b.has_quantifier(),
            Formula::True
            | Formula::False
            | Formula::Eq(..)
            | Formula::Pred(..)
            | Formula::Distinct(_) => false,
        }
    }

    /// Number of formula and term nodes.
    pub fn size(&self) -> usize {
        fn term(t: &Term) -> usize {
            match t {
                Term::Var(_) | Term::Const(_) => 1,
                Term::Apply(_, args) => 1 + args.iter().map(term).sum::<usize>(),
            }
        }
        match self {
            Formula::True | Formula::False => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + a.size() + b.size(),
            Formula::Eq(a, b) => 1 + term(a) + term(b),
            Formula::Pred(_, args) | Formula::Distinct(args) => 1 + args.iter().map(term).sum::<usize>(),
            Formula::Forall(vs, f) | Formula::Exists(vs, f) => 1 + vs.len() + f.size(),
        }
    }
}

/// An upper bound on a predicate known from the relational bounds, stated in
/// terms of domain-element positions within each argument sort. Only
/// materialized once a theory is scoped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclBound {
    pub decl: String,
    pub allowed: Vec<Vec<usize>>,
}

/// Provenance the scoper needs to add constants and range formulas.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TheoryMeta {
    pub model_name: String,
    pub options: Option<Options>,
    /// Sort name and domain size for every sort of the theory.
    pub sort_scopes: Vec<(Sort, usize)>,
    /// Untyped mode: type-membership predicate per leaf type, with the
    /// universe positions of that leaf's atoms and whether the scope is exact.
    pub type_predicates: Vec<TypePredicate>,
    pub bounds: Vec<DeclBound>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypePredicate {
    pub name: String,
    pub members: Vec<usize>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Theory {
    pub sorts: Vec<Sort>,
    pub decls: Vec<FuncDecl>,
    pub assertions: Vec<Formula>,
    pub meta: TheoryMeta,
}

impl Theory {
    pub fn decl(&self, name: &str) -> Option<&FuncDecl> {
        self.decls.iter().find(|d| d.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    UndeclaredSort(String),
    UndeclaredSymbol(String),
    UnboundVariable(String),
    Arity { symbol: String, expected: usize, found: usize },
    SortMismatch { context: String, expected: String, found: String },
    NotAPredicate(String),
    NotAFunction(String),
    Duplicate(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UndeclaredSort(s) => write!(f, "undeclared sort `{s}`"),
            Diagnostic::UndeclaredSymbol(s) => write!(f, "undeclared symbol `{s}`"),
            Diagnostic::UnboundVariable(s) => write!(f, "unbound variable `{s}`"),
            Diagnostic::Arity { symbol, expected, found } => {
                write!(f, "`{symbol}` expects {expected} argument(s), got {found}")
            }
            Diagnostic::SortMismatch { context, expected, found } => {
                write!(f, "{context}: expected sort {expected}, found {found}")
            }
            Diagnostic::NotAPredicate(s) => write!(f, "`{s}` is not a predicate"),
            Diagnostic::NotAFunction(s) => write!(f, "`{s}` is a predicate used as a term"),
            Diagnostic::Duplicate(s) => write!(f, "duplicate declaration `{s}`"),
        }
    }
}

struct Checker<'a> {
    decls: HashMap<&'a str, &'a FuncDecl>,
    sorts: Vec<&'a Sort>,
    vars: Vec<(String, Sort)>,
    out: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn term(&mut self, t: &Term) -> Option<Sort> {
        match t {
            Term::Var(v) => match self.vars.iter().rev().find(|(n, _)| n == v) {
                Some((_, s)) => Some(s.clone()),
                None => {
                    self.out.push(Diagnostic::UnboundVariable(v.clone()));
                    None
                }
            },
            Term::Const(c) => self.apply(c, &[]),
            Term::Apply(f, args) => self.apply(f, args),
        }
    }

    fn apply(&mut self, f: &str, args: &[Term]) -> Option<Sort> {
        let Some(decl) = self.decls.get(f).copied() else {
            self.out.push(Diagnostic::UndeclaredSymbol(f.to_string()));
            return None;
        };
        self.args(decl, args);
        match &decl.result {
            ResultSort::Sort(s) => Some(s.clone()),
            ResultSort::Bool => {
                self.out.push(Diagnostic::NotAFunction(f.to_string()));
                None
            }
        }
    }

    fn args(&mut self, decl: &FuncDecl, args: &[Term]) {
        if decl.args.len() != args.len() {
            self.out.push(Diagnostic::Arity {
                symbol: decl.name.clone(),
                expected: decl.args.len(),
                found: args.len(),
            });
            return;
        }
        for (i, (want, a)) in decl.args.iter().zip(args).enumerate() {
            if let Some(got) = self.term(a) {
                if &got != want {
                    self.out.push(Diagnostic::SortMismatch {
                        context: format!("argument {} of `{}`", i + 1, decl.name),
                        expected: want.to_string(),
                        found: got.to_string(),
                    });
                }
            }
        }
    }

    fn same_sort(&mut self, context: &str, terms: &[Term]) {
        let sorts: Vec<Option<Sort>> = terms.iter().map(|t| self.term(t)).collect();
        let mut known = sorts.into_iter().flatten();
        if let Some(first) = known.next() {
            for s in known {
                if s != first {
                    self.out.push(Diagnostic::SortMismatch {
                        context: context.to_string(),
                        expected: first.to_string(),
                        found: s.to_string(),
                    });
                }
            }
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Not(g) => self.formula(g),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| self.formula(g)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Eq(a, b) => self.same_sort("equality", &[a.clone(), b.clone()]),
            Formula::Distinct(ts) => self.same_sort("distinct", ts),
            Formula::Pred(p, args) => match self.decls.get(p.as_str()).copied() {
                None => self.out.push(Diagnostic::UndeclaredSymbol(p.clone())),
                Some(d) if !d.is_predicate() => self.out.push(Diagnostic::NotAPredicate(p.clone())),
                Some(d) => self.args(d, args),
            },
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                for (_, s) in vs {
                    if !self.sorts.contains(&s) {
                        self.out.push(Diagnostic::UndeclaredSort(s.to_string()));
                    }
                }
                let mark = self.vars.len();
                self.vars.extend(vs.iter().cloned());
                self.formula(body);
                self.vars.truncate(mark);
            }
        }
    }
}

/// Sort-checks every declaration and assertion; empty iff well-sorted.
pub fn check_well_sorted(t: &Theory) -> Vec<Diagnostic> {
    let mut c = Checker {
        decls: HashMap::new(),
        sorts: t.sorts.iter().collect(),
        vars: Vec::new(),
        out: Vec::new(),
    };
    for (i, s) in t.sorts.iter().enumerate() {
        if t.sorts[..i].contains(s) {
            c.out.push(Diagnostic::Duplicate(s.to_string()));
        }
    }
    for d in &t.decls {
        if c.decls.insert(&d.name, d).is_some() {
            c.out.push(Diagnostic::Duplicate(d.name.clone()));
        }
        let result = match &d.result {
            ResultSort::Sort(s) => Some(s),
            ResultSort::Bool => None,
        };
        for s in d.args.iter().chain(result) {
            if !t.sorts.contains(s) {
                c.out.push(Diagnostic::UndeclaredSort(s.to_string()));
            }
        }
    }
    for a in &t.assertions {
        c.formula(a);
    }
    c.out
}
