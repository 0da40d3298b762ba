//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use relog2smt_core::kkir::parse_model;
use relog2smt_core::scope::DEFAULT_NODE_BUDGET;
use relog2smt_core::{compile_named, Options, RelMode, ScopeMode, SortMode};

use crate::bench::{self, parse_combos, BenchConfig};
use crate::oracle::{self, Verdict};
use crate::solver::{run_solver, Outcome, SolverCmd};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "relog2smt", version, about = "Translate bounded relational problems to SMT-LIB2 and solve them")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct ComboFlags {
    /// typed | untyped
    #[arg(long)]
    sorts: Option<SortMode>,
    /// predicates | functions
    #[arg(long)]
    rels: Option<RelMode>,
    /// unscoped | expand | fmf
    #[arg(long)]
    scope: Option<ScopeMode>,
}

impl ComboFlags {
    fn options(&self) -> Options {
        Options::new(
            self.sorts.unwrap_or(SortMode::Typed),
            self.rels.unwrap_or(RelMode::Functions),
            self.scope.unwrap_or(ScopeMode::Expand),
        )
    }

    fn given(&self) -> bool {
        self.sorts.is_some() || self.rels.is_some() || self.scope.is_some()
    }
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    /// Wall-clock limit per solver run, in milliseconds.
    #[arg(long, default_value_t = 60_000)]
    timeout: u64,
    /// Command template with a `{file}` placeholder; defaults to
    /// $RELOG2SMT_SOLVER, then `z3 {file}`.
    #[arg(long)]
    solver_cmd: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the SMT-LIB2 translation of a model.
    Translate {
        model: PathBuf,
        #[command(flatten)]
        combo: ComboFlags,
        /// Node budget for quantifier expansion.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Translate a model and run the solver on it.
    Solve {
        model: PathBuf,
        #[command(flatten)]
        combo: ComboFlags,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
    },
    /// Decide a model by exhaustive search over its bounds.
    Oracle {
        model: PathBuf,
        /// Maximum number of search nodes.
        #[arg(long, default_value_t = oracle::DEFAULT_NODE_BUDGET)]
        budget: u64,
        /// Also print the satisfying instance.
        #[arg(long)]
        witness: bool,
    },
    /// Run every selected combination on every model of a directory.
    Bench {
        dir: PathBuf,
        /// all | interesting | comma-separated sorts/rels/scope list
        #[arg(long, value_parser = combo_list, conflicts_with_all = ["sorts", "rels", "scope"])]
        combos: Option<ComboList>,
        #[command(flatten)]
        combo: ComboFlags,
        #[command(flatten)]
        solver: SolverFlags,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: usize,
        /// Concurrent solver processes; defaults to the CPU count.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List option combinations.
    Combos {
        #[arg(long, value_parser = combo_list, default_value = "all")]
        combos: ComboList,
    },
}

#[derive(Debug, Clone)]
struct ComboList(Vec<Options>);

fn combo_list(s: &str) -> Result<ComboList, bench::ComboError> {
    parse_combos(s).map(ComboList)
}

enum Failure {
    Usage(String),
    Other(String),
}

fn other<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Other(e.to_string())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn name_of(path: &std::path::Path) -> String {
    bench::model_name(path)
}

fn solver(flags: &SolverFlags) -> Result<SolverCmd, Failure> {
    SolverCmd::resolve(flags.solver_cmd.as_deref()).map_err(|e| Failure::Usage(e.to_string()))
}

fn execute(cmd: Cmd, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Cmd::Translate {
            model,
            combo,
            budget,
            output,
        } => {
            let m = parse_model(&read(&model)?).map_err(other)?;
            let c = compile_named(&m, combo.options(), budget, &name_of(&model)).map_err(other)?;
            match output {
                Some(p) => fs::write(&p, c.smtlib).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?,
                None => out.write_all(c.smtlib.as_bytes()).map_err(other)?,
            }
            Ok(EXIT_OK)
        }
        Cmd::Solve {
            model,
            combo,
            solver: flags,
            budget,
        } => {
            let cmd = solver(&flags)?;
            let m = parse_model(&read(&model)?).map_err(other)?;
            let c = compile_named(&m, combo.options(), budget, &name_of(&model)).map_err(other)?;
            let run = run_solver(&c.smtlib, &cmd, Duration::from_millis(flags.timeout)).map_err(other)?;
            writeln!(out, "{}", run.outcome).map_err(other)?;
            if run.outcome == Outcome::Error {
                return Err(Failure::Other(format!("solver error: {}{}", run.stdout.trim(), run.stderr.trim())));
            }
            Ok(EXIT_OK)
        }
        Cmd::Oracle {
            model,
            budget,
            witness,
        } => {
            let m = parse_model(&read(&model)?).map_err(other)?;
            let r = oracle::brute_force_solve_with(&m, budget).map_err(other)?;
            writeln!(out, "{}", r.verdict).map_err(other)?;
            if let (true, Verdict::Sat, Some(w)) = (witness, r.verdict, &r.witness) {
                for (rel, tuples) in w {
                    let ts: Vec<String> = tuples
                        .iter()
                        .map(|t| {
                            let atoms: Vec<String> = t.iter().map(ToString::to_string).collect();
                            format!("({})", atoms.join(" "))
                        })
                        .collect();
                    writeln!(out, "{rel} = {{{}}}", ts.join(" ")).map_err(other)?;
                }
            }
            Ok(EXIT_OK)
        }
        Cmd::Bench {
            dir,
            combos,
            combo,
            solver: flags,
            csv,
            budget,
            jobs,
        } => {
            let combos = match combos {
                Some(c) => c.0,
                None if combo.given() => vec![combo.options()],
                None => Options::all(),
            };
            let cfg = BenchConfig {
                combos,
                solver: solver(&flags)?,
                timeout_ms: flags.timeout,
                node_budget: budget,
                workers: jobs.unwrap_or_else(thread_count),
            };
            let records = bench::bench(&dir, &cfg).map_err(other)?;
            match csv {
                Some(p) => {
                    let f = fs::File::create(&p).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?;
                    bench::write_csv(&records, f).map_err(other)?;
                }
                None => bench::write_csv(&records, &mut *out).map_err(other)?,
            }
            Ok(EXIT_OK)
        }
        Cmd::Combos { combos } => {
            for c in combos.0 {
                writeln!(out, "{c}").map_err(other)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn thread_count() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.cmd, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Other(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}
