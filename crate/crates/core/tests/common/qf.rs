//! Quantifier-free formulas over two distinct constants and two unary
//! predicates, with a truth-table evaluator.

use rand::Rng;
use relog2smt_core::tfol::{Formula, Term};

pub const CONSTS: [&str; 2] = ["c0", "c1"];
/// Number of assignments to p(c0), p(c1), q(c0), q(c1).
pub const ASSIGNMENTS: u8 = 16;

fn constant<R: Rng>(rng: &mut R) -> Term {
    Term::constant(CONSTS[rng.gen_range(0..2)])
}

pub fn random_atom<R: Rng>(rng: &mut R) -> Formula {
    match rng.gen_range(0..5) {
        0 => Formula::True,
        1 => Formula::False,
        2 => Formula::Eq(constant(rng), constant(rng)),
        3 => Formula::Distinct(vec![constant(rng), constant(rng)]),
        _ => Formula::pred(["p", "q"][rng.gen_range(0..2)], vec![constant(rng)]),
    }
}

pub fn random_qf<R: Rng>(rng: &mut R, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return random_atom(rng);
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Formula::Not(Box::new(random_qf(rng, d))),
        1 => Formula::And((0..rng.gen_range(0..4)).map(|_| random_qf(rng, d)).collect()),
        2 => Formula::Or((0..rng.gen_range(0..4)).map(|_| random_qf(rng, d)).collect()),
        3 => Formula::Implies(Box::new(random_qf(rng, d)), Box::new(random_qf(rng, d))),
        _ => Formula::Iff(Box::new(random_qf(rng, d)), Box::new(random_qf(rng, d))),
    }
}

fn name(t: &Term) -> &str {
    match t {
        Term::Const(c) => c,
        t => panic!("unexpected term {t:?}"),
    }
}

/// Distinct constant names denote distinct elements. Bit `2p + c` of `bits`
/// is the value of predicate `p` (0 for `p`, 1 for `q`) at constant `c`.
pub fn eval(f: &Formula, bits: u8) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(g) => !eval(g, bits),
        Formula::And(fs) => fs.iter().all(|g| eval(g, bits)),
        Formula::Or(fs) => fs.iter().any(|g| eval(g, bits)),
        Formula::Implies(a, b) => !eval(a, bits) || eval(b, bits),
        Formula::Iff(a, b) => eval(a, bits) == eval(b, bits),
        Formula::Eq(a, b) => name(a) == name(b),
        Formula::Distinct(ts) => {
            let mut names: Vec<&str> = ts.iter().map(name).collect();
            names.sort();
            names.dedup();
            names.len() == ts.len()
        }
        Formula::Pred(p, args) => {
            let c = CONSTS.iter().position(|c| *c == name(&args[0])).unwrap();
            let p = usize::from(p != "p");
            bits >> (2 * p + c) & 1 == 1
        }
        Formula::Forall(..) | Formula::Exists(..) => panic!("quantifier in a quantifier-free formula"),
    }
}

pub fn same_truth_table(a: &Formula, b: &Formula) -> bool {
    (0..ASSIGNMENTS).all(|bits| eval(a, bits) == eval(b, bits))
}
