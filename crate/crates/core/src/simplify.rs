//! Equivalence-preserving cleanup of TFOL formulas.

use std::collections::HashSet;

use crate::tfol::{Formula, Term};

/// Flattens same-connective children into `out`, dropping units and
/// duplicates. Returns `true` when an absorbing element was found.
fn collect(fs: Vec<Formula>, conj: bool, out: &mut Vec<Formula>, seen: &mut HashSet<Formula>) -> bool {
    for f in fs {
        match (step(f), conj) {
            (Formula::True, true) | (Formula::False, false) => {}
            (Formula::False, true) | (Formula::True, false) => return true,
            (Formula::And(inner), true) | (Formula::Or(inner), false) => {
                if collect(inner, conj, out, seen) {
                    return true;
                }
            }
            (g, _) => {
                if seen.insert(g.clone()) {
                    out.push(g);
                }
            }
        }
    }
    false
}

fn nary(fs: Vec<Formula>, conj: bool) -> Formula {
    let mut out = Vec::new();
    if collect(fs, conj, &mut out, &mut HashSet::new()) {
        return if conj { Formula::False } else { Formula::True };
    }
    match out.len() {
        0 if conj => Formula::True,
        0 => Formula::False,
        1 => out.pop().unwrap(),
        _ if conj => Formula::And(out),
        _ => Formula::Or(out),
    }
}

pub(crate) fn negate(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => *g,
        g => Formula::Not(Box::new(g)),
    }
}

pub(crate) fn equality(a: Term, b: Term) -> Formula {
    if a == b {
        return Formula::True;
    }
    if matches!((&a, &b), (Term::Const(_), Term::Const(_))) {
        // Domain constants are pairwise distinct.
        return Formula::False;
    }
    Formula::Eq(a, b)
}

fn step(f: Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Pred(..) | Formula::Distinct(_) => f,
        Formula::Eq(a, b) => equality(a, b),
        Formula::Not(g) => negate(step(*g)),
        Formula::And(fs) => nary(fs, true),
        Formula::Or(fs) => nary(fs, false),
        Formula::Implies(a, b) => match (step(*a), step(*b)) {
            (Formula::True, b) => b,
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (a, Formula::False) => negate(a),
            (a, b) if a == b => Formula::True,
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        },
        Formula::Iff(a, b) => match (step(*a), step(*b)) {
            (Formula::True, x) | (x, Formula::True) => x,
            (Formula::False, x) | (x, Formula::False) => negate(x),
            (a, b) if a == b => Formula::True,
            (a, b) => Formula::Iff(Box::new(a), Box::new(b)),
        },
        // Sorts are non-empty, so a constant body absorbs its quantifier.
        Formula::Forall(vs, body) => match step(*body) {
            b @ (Formula::True | Formula::False) => b,
            b => Formula::Forall(vs, Box::new(b)),
        },
        Formula::Exists(vs, body) => match step(*body) {
            b @ (Formula::True | Formula::False) => b,
            b => Formula::Exists(vs, Box::new(b)),
        },
    }
}

/// Constant folding, flattening, double-negation and duplicate removal, run
/// to a fixpoint. Two distinct `Const` terms are assumed unequal, which holds
/// for the domain constants of a scoped theory.
pub fn simplify(f: Formula) -> Formula {
    let mut cur = f;
    loop {
        let next = step(cur.clone());
        if next == cur {
            return next;
        }
        cur = next;
    }
}
