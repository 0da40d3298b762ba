use crate::analysis::{LeafId, LeafSet};
use crate::tfol::Term;

/// A term together with the leaf types its value may belong to. In typed
/// mode the set is always a single leaf, the term's sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    pub term: Term,
    pub leaves: LeafSet,
}

impl Operand {
    pub fn new(term: Term, leaves: LeafSet) -> Self {
        Operand { term, leaves }
    }

    /// The unique leaf of a typed operand.
    pub fn leaf(&self) -> LeafId {
        debug_assert_eq!(self.leaves.len(), 1, "operand has no single sort");
        *self.leaves.first().expect("operand with no leaf")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymRef {
    /// A type relation.
    Type(LeafId),
    /// A declared relation, function or helper.
    Decl(usize),
}

/// What a relational expression translates to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Denotation {
    /// Statically empty, of the given arity.
    Empty(usize),
    /// A single tuple of terms.
    Tuple(Vec<Operand>),
    /// A symbol with some argument positions already fixed; the free
    /// positions, in order, are the columns of the relation.
    Rel {
        sym: SymRef,
        params: Vec<Term>,
        slots: Vec<Option<Operand>>,
        cols: Vec<LeafSet>,
    },
}

impl Denotation {
    pub fn arity(&self) -> usize {
        match self {
            Denotation::Empty(k) => *k,
            Denotation::Tuple(ts) => ts.len(),
            Denotation::Rel { slots, .. } => slots.iter().filter(|s| s.is_none()).count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Denotation::Empty(_))
    }

    /// Leaf types of each column.
    pub fn free_cols(&self) -> Vec<LeafSet> {
        match self {
            Denotation::Empty(k) => vec![LeafSet::new(); *k],
            Denotation::Tuple(ts) => ts.iter().map(|t| t.leaves.clone()).collect(),
            Denotation::Rel { slots, cols, .. } => slots
                .iter()
                .zip(cols)
                .filter(|(s, _)| s.is_none())
                .map(|(_, c)| c.clone())
                .collect(),
        }
    }
}
