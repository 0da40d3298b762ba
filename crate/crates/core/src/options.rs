use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SortMode {
    Typed,
    Untyped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelMode {
    Predicates,
    Functions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScopeMode {
    /// Sorts are left unbounded.
    Unscoped,
    /// Domain constants and range formulas, then quantifier expansion and
    /// simplification before the solver sees the problem.
    Expand,
    /// Domain constants and range formulas; the solver instantiates.
    SolverFmf,
}

/// One point in the translation option space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Options {
    pub sort_mode: SortMode,
    pub rel_mode: RelMode,
    pub scope_mode: ScopeMode,
}

impl Options {
    pub const fn new(sort_mode: SortMode, rel_mode: RelMode, scope_mode: ScopeMode) -> Self {
        Options {
            sort_mode,
            rel_mode,
            scope_mode,
        }
    }

    pub fn typed(self) -> bool {
        self.sort_mode == SortMode::Typed
    }

    pub fn functions(self) -> bool {
        self.rel_mode == RelMode::Functions
    }

    pub fn is_scoped(self) -> bool {
        self.scope_mode != ScopeMode::Unscoped
    }

    /// All twelve combinations, sort mode slowest, scope mode fastest.
    pub fn all() -> Vec<Options> {
        let mut out = Vec::with_capacity(12);
        for s in [SortMode::Typed, SortMode::Untyped] {
            for r in [RelMode::Functions, RelMode::Predicates] {
                for c in [ScopeMode::Unscoped, ScopeMode::Expand, ScopeMode::SolverFmf] {
                    out.push(Options::new(s, r, c));
                }
            }
        }
        out
    }

    /// The eight combinations with a finite scope.
    pub fn scoped() -> Vec<Options> {
        Self::all().into_iter().filter(|o| o.is_scoped()).collect()
    }
}

impl fmt::Display for SortMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SortMode::Typed => "typed",
            SortMode::Untyped => "untyped",
        })
    }
}

impl fmt::Display for RelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelMode::Predicates => "predicates",
            RelMode::Functions => "functions",
        })
    }
}

impl fmt::Display for ScopeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScopeMode::Unscoped => "unscoped",
            ScopeMode::Expand => "expand",
            ScopeMode::SolverFmf => "fmf",
        })
    }
}

impl fmt::Display for Options {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.sort_mode, self.rel_mode, self.scope_mode)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid option `{0}`")]
pub struct OptionParseError(pub String);

impl FromStr for SortMode {
    type Err = OptionParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "typed" => Ok(SortMode::Typed),
            "untyped" => Ok(SortMode::Untyped),
            _ => Err(OptionParseError(s.to_string())),
        }
    }
}

impl FromStr for RelMode {
    type Err = OptionParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "predicates" | "relations" => Ok(RelMode::Predicates),
            "functions" => Ok(RelMode::Functions),
            _ => Err(OptionParseError(s.to_string())),
        }
    }
}

impl FromStr for ScopeMode {
    type Err = OptionParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unscoped" => Ok(ScopeMode::Unscoped),
            "expand" | "fortress" => Ok(ScopeMode::Expand),
            "fmf" | "solver_fmf" => Ok(ScopeMode::SolverFmf),
            _ => Err(OptionParseError(s.to_string())),
        }
    }
}

/// Parses `sorts/rels/scope`, e.g. `typed/functions/expand`.
impl FromStr for Options {
    type Err = OptionParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('/').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(OptionParseError(s.to_string()));
        };
        Ok(Options::new(a.parse()?, b.parse()?, c.parse()?))
    }
}
