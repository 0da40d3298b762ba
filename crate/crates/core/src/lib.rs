//! Translation of bounded relational problems into many-sorted first-order
//! logic, printed as SMT-LIB2.
//!
//! The pipeline is [`kkir::parse_model`] → [`analysis::analyze`] →
//! [`translate::translate`] → [`scope::apply_scope`] → [`smtlib::emit_smtlib`];
//! [`compile`] runs all of it.

pub mod analysis;
pub mod error;
pub mod ir;
pub mod kkir;
pub mod options;
pub mod scope;
pub mod simplify;
pub mod smtlib;
pub mod tfol;
pub mod translate;

pub use error::Error;
pub use ir::RelModel;
pub use options::{Options, RelMode, ScopeMode, SortMode};

/// Everything produced for one model under one option combination.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub translation: translate::TransResult,
    pub scoped: scope::ScopedTheory,
    pub smtlib: String,
}

/// Translates, scopes and prints `m` under `opts`.
pub fn compile(m: &RelModel, opts: Options, node_budget: usize) -> Result<Compiled, Error> {
    compile_named(m, opts, node_budget, "")
}

pub fn compile_named(
    m: &RelModel,
    opts: Options,
    node_budget: usize,
    name: &str,
) -> Result<Compiled, Error> {
    let translation = translate::translate_named(m, opts, name)?;
    let scoped = scope::apply_scope_with_budget(translation.theory.clone(), opts.scope_mode, node_budget)?;
    let smtlib = smtlib::emit_smtlib(&scoped.theory)?;
    Ok(Compiled {
        translation,
        scoped,
        smtlib,
    })
}

/// Parses KKIR text and compiles it with the default node budget.
pub fn compile_text(text: &str, opts: Options) -> Result<Compiled, Error> {
    let m = kkir::parse_model(text)?;
    compile(&m, opts, scope::DEFAULT_NODE_BUDGET)
}
