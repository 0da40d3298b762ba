//! Recovers what a flat relational problem leaves implicit: leaf types (from
//! atom prefixes), the leaf types each relation column ranges over, which
//! relations are total functions, and the scope of every leaf type.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::ir::{Atom, Multiplicity, RelExpr, RelFormula, RelModel};

/// Index into [`TypeEnv::leaf_types`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeafId(pub u32);

impl LeafId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of leaf types, iterated in first-appearance order.
pub type LeafSet = BTreeSet<LeafId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scope {
    pub count: usize,
    pub exact: bool,
}

/// A relation recovered as a total function from its leading columns to
/// its last column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalFunction {
    pub domain: Vec<LeafSet>,
    pub range: LeafSet,
    /// Indices (into [`RelFormula::conjuncts`]) of the `one` conjuncts that
    /// state the totality and are redundant once the relation is declared as
    /// a function.
    pub conjuncts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEnv {
    pub leaf_types: Vec<String>,
    pub column_types: BTreeMap<String, Vec<LeafSet>>,
    pub type_relations: BTreeSet<String>,
    pub total_functions: BTreeMap<String, TotalFunction>,
    /// Indexed by [`LeafId`].
    pub scopes: Vec<Scope>,
    /// Relations whose upper bound is the full product of their column types.
    pub full_bounds: BTreeSet<String>,
    pub universe: Vec<Atom>,
}

impl TypeEnv {
    pub fn leaf(&self, name: &str) -> Option<LeafId> {
        self.leaf_types
            .iter()
            .position(|l| l == name)
            .map(|i| LeafId(i as u32))
    }

    pub fn leaf_name(&self, id: LeafId) -> &str {
        &self.leaf_types[id.index()]
    }

    pub fn leaves(&self) -> impl Iterator<Item = LeafId> {
        (0..self.leaf_types.len() as u32).map(LeafId)
    }

    pub fn all_leaves(&self) -> LeafSet {
        self.leaves().collect()
    }

    pub fn scope(&self, id: LeafId) -> Scope {
        self.scopes[id.index()]
    }

    /// Position of an atom among the atoms sharing its prefix.
    pub fn position_in_leaf(&self, atom: &Atom) -> Option<(LeafId, usize)> {
        let leaf = self.leaf(&atom.prefix)?;
        let pos = self
            .universe
            .iter()
            .filter(|a| a.prefix == atom.prefix)
            .position(|a| a == atom)?;
        Some((leaf, pos))
    }

    pub fn position_in_universe(&self, atom: &Atom) -> Option<usize> {
        self.universe.iter().position(|a| a == atom)
    }

    /// Leaf types denoted by an expression built only from type relations and
    /// unions; `None` for anything else.
    pub fn type_union_leaves(&self, e: &RelExpr) -> Option<LeafSet> {
        match e {
            RelExpr::Rel(name) if self.type_relations.contains(name) => {
                Some(std::iter::once(self.leaf(name)?).collect())
            }
            RelExpr::Union(a, b) => {
                let mut s = self.type_union_leaves(a)?;
                s.extend(self.type_union_leaves(b)?);
                Some(s)
            }
            _ => None,
        }
    }

    pub fn display_set(&self, s: &LeafSet) -> String {
        let names: Vec<&str> = s.iter().map(|&l| self.leaf_name(l)).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Display for LeafId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Leaf types, column types, type relations and scopes of `m`.
/// `total_functions` is left empty; see [`recover_total_functions`].
pub fn recover_leaf_types(m: &RelModel) -> TypeEnv {
    let leaf_types: Vec<String> = m.prefixes().into_iter().map(str::to_string).collect();
    let index: HashMap<&str, LeafId> = leaf_types
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), LeafId(i as u32)))
        .collect();

    let mut counts = vec![0usize; leaf_types.len()];
    for a in &m.universe {
        counts[index[a.prefix.as_str()].index()] += 1;
    }

    let mut column_types = BTreeMap::new();
    let mut type_relations = BTreeSet::new();
    let mut full_bounds = BTreeSet::new();
    for r in &m.relations {
        let mut cols = vec![LeafSet::new(); r.arity];
        for t in &r.upper_bound {
            for (col, atom) in cols.iter_mut().zip(t) {
                col.insert(index[atom.prefix.as_str()]);
            }
        }
        let product: usize = cols
            .iter()
            .map(|c| c.iter().map(|l| counts[l.index()]).sum::<usize>())
            .product();
        if !r.upper_bound.is_empty() && product == r.upper_bound.len() {
            full_bounds.insert(r.name.clone());
        }
        if m.is_type_relation(r) {
            type_relations.insert(r.name.clone());
        }
        column_types.insert(r.name.clone(), cols);
    }

    let scopes = leaf_types
        .iter()
        .zip(&counts)
        .map(|(l, &count)| Scope {
            count,
            exact: type_relations.contains(l),
        })
        .collect();

    TypeEnv {
        leaf_types,
        column_types,
        type_relations,
        total_functions: BTreeMap::new(),
        scopes,
        full_bounds,
        universe: m.universe.clone(),
    }
}

/// Matches `(all ((v1 T1) ...) (one (join vk (join ... (join v1 r)))))`
/// where the innermost variable binds column 0 of `r`, each bound is a union
/// of type relations covering exactly that column's leaf types, and `r` has
/// a full bound. Returns the relation name.
fn match_totality(f: &RelFormula, env: &TypeEnv) -> Option<String> {
    let RelFormula::Forall(decls, body) = f else {
        return None;
    };
    let RelFormula::Mult(Multiplicity::One, e) = &**body else {
        return None;
    };
    let mut e: &RelExpr = e;
    let mut vars = Vec::new();
    let rel = loop {
        match e {
            RelExpr::Join(lhs, rhs) => {
                let RelExpr::Var(v) = &**lhs else {
                    return None;
                };
                vars.push(v.as_str());
                e = rhs;
            }
            RelExpr::Rel(r) => break r,
            _ => return None,
        }
    };
    let cols = env.column_types.get(rel)?;
    if cols.len() < 2
        || vars.len() != cols.len() - 1
        || decls.len() != vars.len()
        || env.type_relations.contains(rel)
        || !env.full_bounds.contains(rel)
    {
        return None;
    }
    // vars are outermost join first; column 0 is bound by the innermost.
    for (col, v) in vars.iter().rev().enumerate() {
        let (_, bound) = decls.iter().find(|(name, _)| name == v)?;
        if env.type_union_leaves(bound)? != cols[col] {
            return None;
        }
    }
    let distinct: BTreeSet<&str> = vars.iter().copied().collect();
    (distinct.len() == vars.len()).then(|| rel.clone())
}

/// Adds every relation whose totality is stated by a top-level `one`
/// conjunct of the canonical shape to `env.total_functions`.
pub fn recover_total_functions(m: &RelModel, mut env: TypeEnv) -> TypeEnv {
    env.total_functions.clear();
    for (i, c) in m.formula.conjuncts().into_iter().enumerate() {
        let Some(rel) = match_totality(c, &env) else {
            continue;
        };
        let cols = &env.column_types[&rel];
        let entry = env
            .total_functions
            .entry(rel)
            .or_insert_with(|| TotalFunction {
                domain: cols[..cols.len() - 1].to_vec(),
                range: cols[cols.len() - 1].clone(),
                conjuncts: Vec::new(),
            });
        entry.conjuncts.push(i);
    }
    env
}

/// Both analysis passes.
pub fn analyze(m: &RelModel) -> TypeEnv {
    recover_total_functions(m, recover_leaf_types(m))
}

/// Leaf-type signatures of the split copies of `rel`: the Cartesian product
/// of its column leaf sets.
pub fn leaf_splits(rel: &str, env: &TypeEnv) -> Vec<Vec<LeafId>> {
    match env.column_types.get(rel) {
        Some(cols) => product(cols),
        None => Vec::new(),
    }
}

/// Cartesian product of leaf sets, first column varying slowest.
pub fn product(cols: &[LeafSet]) -> Vec<Vec<LeafId>> {
    let mut out: Vec<Vec<LeafId>> = vec![Vec::new()];
    for col in cols {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                col.iter().map(move |&l| {
                    let mut sig = prefix.clone();
                    sig.push(l);
                    sig
                })
            })
            .collect();
    }
    out
}
