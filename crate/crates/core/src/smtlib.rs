//! SMT-LIB2 text emission.

use std::borrow::Cow;
use std::fmt::Write as _;

use crate::error::Error;
use crate::tfol::{check_well_sorted, Formula, ResultSort, Term, Theory};

pub const LOGIC: &str = "UF";

const RESERVED: &[&str] = &[
    "_", "!", "as", "let", "exists", "forall", "match", "par", "NUMERAL", "DECIMAL", "STRING",
    "BINARY", "HEXADECIMAL", "true", "false", "not", "and", "or", "xor", "=>", "=", "distinct",
    "ite", "Bool",
];

pub fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

fn is_simple_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
}

/// SMT-LIB rendering of an identifier: reserved words get a `_` suffix,
/// anything that is not a simple symbol is `|quoted|`.
pub fn symbol(s: &str) -> Cow<'_, str> {
    if is_reserved(s) {
        return Cow::Owned(format!("{s}_"));
    }
    let simple = !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(is_simple_char);
    if simple {
        Cow::Borrowed(s)
    } else {
        let inner: String = s.chars().map(|c| if c == '|' || c == '\\' { '_' } else { c }).collect();
        Cow::Owned(format!("|{inner}|"))
    }
}

/// Maps a source identifier to `[A-Za-z][A-Za-z0-9_]*`, replacing each
/// offending character with `_u<hex>_`.
pub fn mangle(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for (i, c) in name.chars().enumerate() {
        let ok = if i == 0 {
            c.is_ascii_alphabetic()
        } else {
            c.is_ascii_alphanumeric() || c == '_'
        };
        if ok {
            out.push(c);
        } else {
            let _ = write!(out, "_u{:x}_", c as u32);
        }
    }
    out
}

fn term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) | Term::Const(v) => out.push_str(&symbol(v)),
        Term::Apply(f, args) if args.is_empty() => out.push_str(&symbol(f)),
        Term::Apply(f, args) => {
            out.push('(');
            out.push_str(&symbol(f));
            for a in args {
                out.push(' ');
                term(a, out);
            }
            out.push(')');
        }
    }
}

fn nary(op: &str, fs: &[&Formula], out: &mut String) {
    out.push('(');
    out.push_str(op);
    for f in fs {
        out.push(' ');
        formula(f, out);
    }
    out.push(')');
}

pub fn formula(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Not(g) => nary("not", &[g], out),
        Formula::And(fs) | Formula::Or(fs) if fs.len() < 2 => match fs.first() {
            Some(g) => formula(g, out),
            None => out.push_str(if matches!(f, Formula::And(_)) { "true" } else { "false" }),
        },
        Formula::And(fs) => nary("and", &fs.iter().collect::<Vec<_>>(), out),
        Formula::Or(fs) => nary("or", &fs.iter().collect::<Vec<_>>(), out),
        Formula::Implies(a, b) => nary("=>", &[a, b], out),
        Formula::Iff(a, b) => nary("=", &[a, b], out),
        Formula::Eq(a, b) => {
            out.push_str("(= ");
            term(a, out);
            out.push(' ');
            term(b, out);
            out.push(')');
        }
        Formula::Pred(p, args) => term(&Term::Apply(p.clone(), args.clone()), out),
        Formula::Distinct(ts) if ts.len() < 2 => out.push_str("true"),
        Formula::Distinct(ts) => {
            out.push_str("(distinct");
            for t in ts {
                out.push(' ');
                term(t, out);
            }
            out.push(')');
        }
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            let q = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
            let _ = write!(out, "({q} (");
            for (i, (v, s)) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({} {})", symbol(v), symbol(s.name()));
            }
            out.push_str(") ");
            formula(body, out);
            out.push(')');
        }
    }
}

/// Renders a well-sorted theory as an SMT-LIB2 script ending in
/// `(check-sat)`. Ill-sorted input is a translator bug and is rejected.
pub fn emit_smtlib(t: &Theory) -> Result<String, Error> {
    let diags = check_well_sorted(t);
    if !diags.is_empty() {
        let msgs: Vec<String> = diags.iter().map(ToString::to_string).collect();
        return Err(Error::IllSorted(msgs.join("; ")));
    }
    Ok(emit_unchecked(t))
}

/// Emission without the sort check.
pub fn emit_unchecked(t: &Theory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {LOGIC})");
    for s in &t.sorts {
        let _ = writeln!(out, "(declare-sort {} 0)", symbol(s.name()));
    }
    for d in &t.decls {
        let result = match &d.result {
            ResultSort::Bool => Cow::Borrowed("Bool"),
            ResultSort::Sort(s) => symbol(s.name()),
        };
        if d.args.is_empty() {
            let _ = writeln!(out, "(declare-const {} {result})", symbol(&d.name));
        } else {
            let args: Vec<Cow<str>> = d.args.iter().map(|s| symbol(s.name())).collect();
            let _ = writeln!(
                out,
                "(declare-fun {} ({}) {result})",
                symbol(&d.name),
                args.join(" ")
            );
        }
    }
    for a in &t.assertions {
        out.push_str("(assert ");
        formula(a, &mut out);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n");
    out
}
