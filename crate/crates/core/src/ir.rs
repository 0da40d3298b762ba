//! Relational-logic IR: an atom universe, per-relation upper bounds and one
//! conjoined formula.

use std::fmt;

/// A universe element, rendered as `prefix$index`.
///
/// The prefix names the leaf type the atom belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub prefix: String,
    pub index: u32,
}

impl Atom {
    pub fn new(prefix: impl Into<String>, index: u32) -> Self {
        Atom {
            prefix: prefix.into(),
            index,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}${}", self.prefix, self.index)
    }
}

pub type Tuple = Vec<Atom>;

/// A declared relation together with the tuples it may contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelDecl {
    pub name: String,
    pub arity: usize,
    pub upper_bound: Vec<Tuple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelExpr {
    Rel(String),
    Var(String),
    Union(Box<RelExpr>, Box<RelExpr>),
    Inter(Box<RelExpr>, Box<RelExpr>),
    Diff(Box<RelExpr>, Box<RelExpr>),
    Transpose(Box<RelExpr>),
    Join(Box<RelExpr>, Box<RelExpr>),
    Product(Box<RelExpr>, Box<RelExpr>),
}

impl RelExpr {
    pub fn rel(name: impl Into<String>) -> Self {
        RelExpr::Rel(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        RelExpr::Var(name.into())
    }

    pub fn union(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Union(Box::new(a), Box::new(b))
    }

    pub fn inter(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Inter(Box::new(a), Box::new(b))
    }

    pub fn diff(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Diff(Box::new(a), Box::new(b))
    }

    pub fn transpose(a: RelExpr) -> Self {
        RelExpr::Transpose(Box::new(a))
    }

    pub fn join(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Join(Box::new(a), Box::new(b))
    }

    pub fn product(a: RelExpr, b: RelExpr) -> Self {
        RelExpr::Product(Box::new(a), Box::new(b))
    }

    /// Quantified variables occurring in the expression, first occurrence first.
    pub fn free_vars(&self) -> Vec<String> {
        fn walk(e: &RelExpr, out: &mut Vec<String>) {
            match e {
                RelExpr::Rel(_) => {}
                RelExpr::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                RelExpr::Transpose(a) => walk(a, out),
                RelExpr::Union(a, b)
                | RelExpr::Inter(a, b)
                | RelExpr::Diff(a, b)
                | RelExpr::Join(a, b)
                | RelExpr::Product(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    One,
    Lone,
    Some,
    No,
}

impl Multiplicity {
    pub fn keyword(self) -> &'static str {
        match self {
            Multiplicity::One => "one",
            Multiplicity::Lone => "lone",
            Multiplicity::Some => "someof",
            Multiplicity::No => "no",
        }
    }
}

/// A quantifier binding: variable name and its unary bounding expression.
pub type QuantDecl = (String, RelExpr);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelFormula {
    True,
    False,
    Not(Box<RelFormula>),
    And(Vec<RelFormula>),
    Or(Vec<RelFormula>),
    Implies(Box<RelFormula>, Box<RelFormula>),
    Iff(Box<RelFormula>, Box<RelFormula>),
    Equal(RelExpr, RelExpr),
    Subset(RelExpr, RelExpr),
    In(RelExpr, RelExpr),
    Forall(Vec<QuantDecl>, Box<RelFormula>),
    Exists(Vec<QuantDecl>, Box<RelFormula>),
    Mult(Multiplicity, RelExpr),
}

impl RelFormula {
    pub fn not(f: RelFormula) -> Self {
        RelFormula::Not(Box::new(f))
    }

    pub fn implies(a: RelFormula, b: RelFormula) -> Self {
        RelFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: RelFormula, b: RelFormula) -> Self {
        RelFormula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(decls: Vec<QuantDecl>, body: RelFormula) -> Self {
        RelFormula::Forall(decls, Box::new(body))
    }

    pub fn exists(decls: Vec<QuantDecl>, body: RelFormula) -> Self {
        RelFormula::Exists(decls, Box::new(body))
    }

    /// The top-level conjuncts: nested `And` nodes at the root are flattened.
    pub fn conjuncts(&self) -> Vec<&RelFormula> {
        fn walk<'a>(f: &'a RelFormula, out: &mut Vec<&'a RelFormula>) {
            match f {
                RelFormula::And(fs) => fs.iter().for_each(|g| walk(g, out)),
                RelFormula::True => {}
                other => out.push(other),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Goal {
    #[default]
    Run,
    Check,
}

/// A parsed relational problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelModel {
    pub universe: Vec<Atom>,
    pub relations: Vec<RelDecl>,
    pub formula: RelFormula,
    pub goal: Goal,
}

impl RelModel {
    pub fn relation(&self, name: &str) -> Option<&RelDecl> {
        self.relations.iter().find(|r| r.name == name)
    }

    /// Atom prefixes in order of first appearance in the universe.
    pub fn prefixes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in &self.universe {
            if !out.contains(&a.prefix.as_str()) {
                out.push(&a.prefix);
            }
        }
        out
    }

    /// Atoms carrying `prefix`, in universe order.
    pub fn atoms_of<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.universe.iter().filter(move |a| a.prefix == prefix)
    }

    /// A unary relation named after an atom prefix whose bound is exactly
    /// that prefix's atoms denotes the leaf type itself.
    pub fn is_type_relation(&self, decl: &RelDecl) -> bool {
        if decl.arity != 1 {
            return false;
        }
        let atoms: Vec<&Atom> = self.atoms_of(&decl.name).collect();
        !atoms.is_empty()
            && atoms.len() == decl.upper_bound.len()
            && decl
                .upper_bound
                .iter()
                .all(|t| t[0].prefix == decl.name)
    }
}
