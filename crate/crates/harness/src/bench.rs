//! Model × combination benchmark runs and their CSV report.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use relog2smt_core::kkir::parse_model;
use relog2smt_core::{compile_named, Options, RelMode, ScopeMode, SortMode};
use thiserror::Error;

use crate::solver::{run_solver, Outcome, SolverCmd};

pub const CSV_HEADER: [&str; 9] = [
    "model",
    "sort_mode",
    "rel_mode",
    "scope_mode",
    "translate_ms",
    "solve_ms",
    "result",
    "solver_id",
    "timeout_ms",
];

/// Combinations worth comparing side by side.
pub fn interesting() -> Vec<Options> {
    use RelMode::*;
    use ScopeMode::*;
    use SortMode::*;
    vec![
        Options::new(Typed, Functions, Expand),
        Options::new(Typed, Predicates, Unscoped),
        Options::new(Untyped, Predicates, Unscoped),
        Options::new(Untyped, Predicates, SolverFmf),
    ]
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid combination selection `{0}`")]
pub struct ComboError(pub String);

/// `all`, `interesting`, or a comma-separated list of `sorts/rels/scope`.
pub fn parse_combos(sel: &str) -> Result<Vec<Options>, ComboError> {
    match sel.trim() {
        "all" => Ok(Options::all()),
        "interesting" => Ok(interesting()),
        list => {
            let combos: Vec<Options> = list
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| ComboError(c.trim().to_string())))
                .collect::<Result<_, _>>()?;
            if combos.is_empty() {
                return Err(ComboError(sel.to_string()));
            }
            Ok(combos)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    pub model_name: String,
    pub options: Options,
    pub translate_ms: f64,
    pub solve_ms: f64,
    pub result: Outcome,
    pub solver_id: String,
    pub timeout_ms: u64,
    /// Why a row is ERROR, when the failure happened before the solver ran.
    pub peak_note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub combos: Vec<Options>,
    pub solver: SolverCmd,
    pub timeout_ms: u64,
    pub node_budget: usize,
    pub workers: usize,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read model directory {path}: {source}")]
    Dir { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
}

/// The `.kkir` files of `dir`, sorted by name.
pub fn model_files(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let err = |source| BenchError::Dir {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(err)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "kkir"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn model_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Translates and solves one model under one combination. Failures become
/// ERROR rows.
pub fn run_cell(name: &str, text: &str, options: Options, cfg: &BenchConfig) -> SolveRecord {
    let mut rec = SolveRecord {
        model_name: name.to_string(),
        options,
        translate_ms: 0.0,
        solve_ms: 0.0,
        result: Outcome::Error,
        solver_id: cfg.solver.solver_id(),
        timeout_ms: cfg.timeout_ms,
        peak_note: None,
    };
    let start = Instant::now();
    let compiled = parse_model(text)
        .map_err(relog2smt_core::Error::from)
        .and_then(|m| compile_named(&m, options, cfg.node_budget, name));
    rec.translate_ms = start.elapsed().as_secs_f64() * 1000.0;
    let compiled = match compiled {
        Ok(c) => c,
        Err(e) => {
            rec.peak_note = Some(e.to_string());
            return rec;
        }
    };
    match run_solver(&compiled.smtlib, &cfg.solver, Duration::from_millis(cfg.timeout_ms)) {
        Ok(run) => {
            rec.solve_ms = run.solve_ms;
            rec.result = run.outcome;
            if run.outcome == Outcome::Error {
                rec.peak_note = Some(run.stderr.trim().to_string());
            }
        }
        Err(e) => rec.peak_note = Some(e.to_string()),
    }
    rec
}

/// Runs every combination on every model of `dir`. Cells run on a bounded
/// pool; the result is in model-major, combination-minor order.
pub fn bench(dir: &Path, cfg: &BenchConfig) -> Result<Vec<SolveRecord>, BenchError> {
    let files = model_files(dir)?;
    let mut models = Vec::with_capacity(files.len());
    for f in &files {
        models.push((model_name(f), fs::read_to_string(f)?));
    }
    Ok(bench_models(&models, cfg))
}

pub fn bench_models(models: &[(String, String)], cfg: &BenchConfig) -> Vec<SolveRecord> {
    let cells: Vec<(usize, Options)> = (0..models.len())
        .flat_map(|m| cfg.combos.iter().map(move |&o| (m, o)))
        .collect();
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<Option<SolveRecord>>> = Mutex::new(vec![None; cells.len()]);
    thread::scope(|s| {
        for _ in 0..cfg.workers.max(1).min(cells.len().max(1)) {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(&(m, o)) = cells.get(i) else {
                    break;
                };
                let (name, text) = &models[m];
                let rec = run_cell(name, text, o, cfg);
                results.lock().unwrap()[i] = Some(rec);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// Writes the header and one row per record.
pub fn write_csv<W: io::Write>(records: &[SolveRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.model_name.clone(),
            r.options.sort_mode.to_string(),
            r.options.rel_mode.to_string(),
            r.options.scope_mode.to_string(),
            format!("{:.3}", r.translate_ms),
            format!("{:.3}", r.solve_ms),
            r.result.to_string(),
            r.solver_id.clone(),
            r.timeout_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
