//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod gen;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;
use relog2smt::bench::{interesting, CSV_HEADER};
use relog2smt::oracle::{brute_force_solve, Verdict};
use relog2smt::solver::{run_solver, syntax_errors, Outcome, SolverCmd};
use relog2smt_core::analysis::analyze;
use relog2smt_core::ir::{RelExpr, RelFormula, RelModel};
use relog2smt_core::kkir::parse_model;
use relog2smt_core::scope::DEFAULT_NODE_BUDGET;
use relog2smt_core::simplify::simplify;
use relog2smt_core::{compile, Compiled, Options, ScopeMode, SortMode};

const SCOPED_TIMEOUT: Duration = Duration::from_secs(30);
const UNSCOPED_TIMEOUT: Duration = Duration::from_secs(2);
const BIN: &str = env!("CARGO_BIN_EXE_relog2smt");

struct Cell {
    options: Options,
    compiled: Compiled,
    outcome: Outcome,
    /// Translation plus solving.
    elapsed: Duration,
}

struct Model {
    name: String,
    path: PathBuf,
    model: RelModel,
    oracle: Verdict,
    oracle_time: Duration,
    cells: Vec<Cell>,
}

impl Model {
    fn scoped(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.options.is_scoped())
    }
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, n: u32, title: &str, result: Result<String, String>) {
        match result {
            Ok(detail) => println!("PASS  {n}. {title}: {detail}"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL  {n}. {title}: {detail}");
            }
        }
    }
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn leaf_sizes(m: &RelModel) -> BTreeMap<String, usize> {
    let mut sizes = BTreeMap::new();
    for a in &m.universe {
        *sizes.entry(a.prefix.clone()).or_insert(0) += 1;
    }
    sizes
}

fn load(solver: &SolverCmd) -> Vec<Model> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "kkir"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let model = parse_model(&std::fs::read_to_string(&path).unwrap()).unwrap();
            let start = Instant::now();
            let oracle = brute_force_solve(&model).unwrap().verdict;
            let oracle_time = start.elapsed();
            let cells = Options::all()
                .into_iter()
                .map(|options| {
                    let start = Instant::now();
                    let compiled = compile(&model, options, DEFAULT_NODE_BUDGET).unwrap();
                    let timeout = if options.is_scoped() { SCOPED_TIMEOUT } else { UNSCOPED_TIMEOUT };
                    let outcome = run_solver(&compiled.smtlib, solver, timeout)
                        .map(|r| r.outcome)
                        .unwrap_or(Outcome::Error);
                    Cell {
                        options,
                        compiled,
                        outcome,
                        elapsed: start.elapsed(),
                    }
                })
                .collect();
            Model {
                name,
                path,
                model,
                oracle,
                oracle_time,
                cells,
            }
        })
        .collect()
}

fn as_outcome(v: Verdict) -> Outcome {
    match v {
        Verdict::Sat => Outcome::Sat,
        Verdict::Unsat => Outcome::Unsat,
    }
}

fn find<'a>(models: &'a [Model], name: &str) -> Result<&'a Model, String> {
    models
        .iter()
        .find(|m| m.name == name)
        .ok_or_else(|| format!("corpus model `{name}` missing"))
}

fn bijection(models: &[Model]) -> Result<String, String> {
    let m = find(models, "bijection")?;
    let sizes = leaf_sizes(&m.model);
    let want: BTreeMap<String, usize> = [("B", 3), ("C", 3), ("ID", 6)].map(|(k, v)| (k.to_string(), v)).into();
    if sizes != want {
        return Err(format!("scopes {sizes:?}"));
    }
    if m.oracle != Verdict::Sat {
        return Err("oracle says UNSAT".into());
    }
    let mut slowest = Duration::ZERO;
    for c in m.scoped() {
        if c.outcome != Outcome::Sat || c.elapsed >= SCOPED_TIMEOUT {
            return Err(format!("{}: {} in {:?}", c.options, c.outcome, c.elapsed));
        }
        slowest = slowest.max(c.elapsed);
    }
    Ok(format!("oracle SAT, 8/8 scoped combinations SAT, slowest {slowest:.2?}"))
}

fn pigeonhole(models: &[Model]) -> Result<String, String> {
    let m = find(models, "bijection_pigeonhole")?;
    if m.oracle != Verdict::Unsat {
        return Err("oracle says SAT".into());
    }
    for c in &m.cells {
        let ok = if c.options.is_scoped() {
            c.outcome == Outcome::Unsat
        } else {
            c.outcome != Outcome::Unsat && c.outcome != Outcome::Error
        };
        if !ok {
            return Err(format!("{}: {}", c.options, c.outcome));
        }
    }
    let unscoped: BTreeSet<String> = m
        .cells
        .iter()
        .filter(|c| !c.options.is_scoped())
        .map(|c| c.outcome.to_string())
        .collect();
    Ok(format!(
        "oracle UNSAT, 8/8 scoped UNSAT, unscoped {}",
        unscoped.into_iter().collect::<Vec<_>>().join("/")
    ))
}

#[derive(Default)]
struct Shape {
    join_chain: usize,
    forall_depth: usize,
    exists_depth: usize,
}

fn join_chain(e: &RelExpr) -> usize {
    match e {
        RelExpr::Join(a, b) => {
            let own = |x: &RelExpr| match x {
                RelExpr::Join(..) => join_chain(x),
                _ => 0,
            };
            1 + own(a) + own(b)
        }
        _ => 0,
    }
}

fn expr_shape(e: &RelExpr, s: &mut Shape) {
    s.join_chain = s.join_chain.max(join_chain(e));
    match e {
        RelExpr::Rel(_) | RelExpr::Var(_) => {}
        RelExpr::Transpose(a) => expr_shape(a, s),
        RelExpr::Union(a, b)
        | RelExpr::Inter(a, b)
        | RelExpr::Diff(a, b)
        | RelExpr::Join(a, b)
        | RelExpr::Product(a, b) => {
            expr_shape(a, s);
            expr_shape(b, s);
        }
    }
}

/// Quantified variables along the deepest path, counting each declared
/// variable as one level.
fn formula_shape(f: &RelFormula, all: usize, ex: usize, s: &mut Shape) {
    match f {
        RelFormula::True | RelFormula::False => {}
        RelFormula::Not(g) => formula_shape(g, all, ex, s),
        RelFormula::And(fs) | RelFormula::Or(fs) => fs.iter().for_each(|g| formula_shape(g, all, ex, s)),
        RelFormula::Implies(a, b) | RelFormula::Iff(a, b) => {
            formula_shape(a, all, ex, s);
            formula_shape(b, all, ex, s);
        }
        RelFormula::Equal(a, b) | RelFormula::Subset(a, b) | RelFormula::In(a, b) => {
            expr_shape(a, s);
            expr_shape(b, s);
        }
        RelFormula::Mult(_, e) => expr_shape(e, s),
        RelFormula::Forall(ds, body) => {
            ds.iter().for_each(|(_, e)| expr_shape(e, s));
            s.forall_depth = s.forall_depth.max(all + ds.len());
            formula_shape(body, all + ds.len(), ex, s);
        }
        RelFormula::Exists(ds, body) => {
            ds.iter().for_each(|(_, e)| expr_shape(e, s));
            s.exists_depth = s.exists_depth.max(ex + ds.len());
            formula_shape(body, all, ex + ds.len(), s);
        }
    }
}

fn axes(m: &Model) -> BTreeSet<&'static str> {
    let mut s = Shape::default();
    formula_shape(&m.model.formula, 0, 0, &mut s);
    let mut out = BTreeSet::new();
    if s.join_chain >= 3 {
        out.insert("join chain >= 3");
    }
    if s.forall_depth >= 3 {
        out.insert("forall nesting >= 3");
    }
    if s.exists_depth >= 2 {
        out.insert("exists nesting >= 2");
    }
    if m.model.relations.iter().any(|r| r.arity >= 3) {
        out.insert("arity >= 3");
    }
    let tf = m
        .cells
        .iter()
        .find(|c| c.options.sort_mode == SortMode::Typed && c.options.rel_mode == relog2smt_core::RelMode::Functions)
        .unwrap();
    let env = &tf.compiled.translation.env;
    let plain = m
        .model
        .relations
        .iter()
        .enumerate()
        .any(|(i, r)| !env.type_relations.contains(&r.name) && !tf.compiled.translation.consumed.contains(&i));
    if !tf.compiled.translation.consumed.is_empty() && plain {
        out.insert("mixed functions/relations");
    }
    out
}

const AXES: [&str; 5] = [
    "join chain >= 3",
    "forall nesting >= 3",
    "exists nesting >= 2",
    "arity >= 3",
    "mixed functions/relations",
];

fn oracle_suite(models: &[Model]) -> Result<String, String> {
    let suite: Vec<&Model> = models
        .iter()
        .filter(|m| !m.name.starts_with("bijection") && leaf_sizes(&m.model).values().all(|&n| n <= 3))
        .collect();
    if suite.len() < 15 {
        return Err(format!("only {} models with scopes <= 3", suite.len()));
    }
    let mut covered = BTreeSet::new();
    let mut runtime = Duration::ZERO;
    let mut disagreements = Vec::new();
    for m in &suite {
        covered.extend(axes(m));
        runtime += m.oracle_time;
        for c in m.scoped() {
            runtime += c.elapsed;
            if c.outcome != as_outcome(m.oracle) {
                disagreements.push(format!("{} {}: {} vs oracle {}", m.name, c.options, c.outcome, m.oracle));
            }
        }
    }
    let missing: Vec<&str> = AXES.iter().copied().filter(|a| !covered.contains(a)).collect();
    if !disagreements.is_empty() {
        return Err(disagreements.join("; "));
    }
    if !missing.is_empty() {
        return Err(format!("axes not covered: {}", missing.join(", ")));
    }
    if runtime >= Duration::from_secs(600) {
        return Err(format!("runtime {runtime:.1?}"));
    }
    Ok(format!(
        "{} models x 8 scoped combinations agree with the oracle, all {} axes covered, {runtime:.2?}",
        suite.len(),
        AXES.len()
    ))
}

fn cross_option(models: &[Model]) -> Result<String, String> {
    let mut cells = 0;
    let mut undecided = 0;
    for m in models {
        let decided: BTreeSet<String> = m
            .scoped()
            .inspect(|c| {
                cells += 1;
                if !c.outcome.is_decided() {
                    undecided += 1;
                }
            })
            .filter(|c| c.outcome.is_decided())
            .map(|c| c.outcome.to_string())
            .collect();
        if decided.len() > 1 {
            return Err(format!("{}: scoped combinations disagree", m.name));
        }
    }
    if undecided * 10 >= cells {
        return Err(format!("{undecided}/{cells} scoped cells undecided"));
    }
    Ok(format!("{} models agree, {undecided}/{cells} scoped cells undecided", models.len()))
}

fn structural(models: &[Model], solver: &SolverCmd) -> Result<String, String> {
    let mut files = 0;
    for m in models {
        let leaves = analyze(&m.model).leaf_types.len();
        for c in &m.cells {
            let o = c.options;
            let t = &c.compiled.scoped.theory;
            if o.scope_mode == ScopeMode::Expand && t.assertions.iter().any(|a| a.has_quantifier()) {
                return Err(format!("{} {o}: quantifier after expansion", m.name));
            }
            let sorts = c.compiled.smtlib.matches("(declare-sort ").count();
            let want = match o.sort_mode {
                SortMode::Typed => leaves,
                SortMode::Untyped => 1,
            };
            if sorts != want {
                return Err(format!("{} {o}: {sorts} sorts, expected {want}", m.name));
            }
            let errors = syntax_errors(&c.compiled.smtlib, solver, Duration::from_secs(30)).map_err(|e| e.to_string())?;
            if !errors.is_empty() {
                return Err(format!("{} {o}: {}", m.name, errors.join(" ")));
            }
            files += 1;
        }
    }
    Ok(format!("{files} files checked, accepted by {}", solver.solver_id()))
}

fn translate_cli(path: &Path, o: Options) -> Result<Vec<u8>, String> {
    let out = Command::new(BIN)
        .arg("translate")
        .arg(path)
        .args(["--sorts", &o.sort_mode.to_string()])
        .args(["--rels", &o.rel_mode.to_string()])
        .args(["--scope", &o.scope_mode.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn determinism(models: &[Model]) -> Result<String, String> {
    let mut n = 0;
    for m in models {
        for o in Options::all() {
            let a = translate_cli(&m.path, o)?;
            let b = translate_cli(&m.path, o)?;
            if a != b || a.is_empty() {
                return Err(format!("{} {o}: outputs differ", m.name));
            }
            n += 1;
        }
    }
    Ok(format!("{n} model x combination pairs byte-identical"))
}

fn simplifier() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x51_3b1f);
    let mut shrunk = 0;
    for i in 0..1000 {
        let f = gen::qf::random_qf(&mut rng, 5);
        let s = simplify(f.clone());
        if !gen::qf::same_truth_table(&f, &s) {
            return Err(format!("formula {i}: {f:?} simplified to {s:?}"));
        }
        if s.size() < f.size() {
            shrunk += 1;
        }
    }
    Ok(format!("1000/1000 truth tables preserved, {shrunk} formulas reduced"))
}

fn preset(models: &[Model]) -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for name in ["exists_sat", "set_algebra"] {
        std::fs::copy(&find(models, name)?.path, dir.path().join(format!("{name}.kkir"))).map_err(|e| e.to_string())?;
    }
    let out = Command::new(BIN)
        .arg("bench")
        .arg(dir.path())
        .args(["--combos", "interesting", "--timeout", "30000"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(format!("header {header:?}"));
    }
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let want = interesting();
    if rows.len() != 2 * want.len() {
        return Err(format!("{} rows", rows.len()));
    }
    for (i, row) in rows.iter().enumerate() {
        let o: Options = format!("{}/{}/{}", &row[1], &row[2], &row[3]).parse().map_err(|_| format!("row {i}"))?;
        if o != want[i % want.len()] || &row[6] != "SAT" {
            return Err(format!("row {i}: {row:?}"));
        }
        for col in [4, 5] {
            row[col].parse::<f64>().map_err(|_| format!("row {i}: bad time {}", &row[col]))?;
        }
    }
    let times: BTreeSet<&str> = rows.iter().map(|r| r.get(5).unwrap()).collect();
    Ok(format!(
        "{} preset combinations x 2 models, well-formed CSV, {} distinct solve times",
        want.len(),
        times.len()
    ))
}

fn main() -> ExitCode {
    let solver = SolverCmd::resolve(None).expect("solver command");
    let start = Instant::now();
    let models = load(&solver);
    println!("acceptance: {} corpus models, solver {}, corpus run {:.1?}", models.len(), solver, start.elapsed());

    let mut r = Report { failed: 0 };
    r.line(1, "bijection model", bijection(&models));
    r.line(2, "pigeonhole UNSAT", pigeonhole(&models));
    r.line(3, "oracle equivalence suite", oracle_suite(&models));
    r.line(4, "cross-option agreement", cross_option(&models));
    r.line(5, "structural invariants", structural(&models, &solver));
    r.line(6, "determinism", determinism(&models));
    r.line(7, "simplifier equivalence", simplifier());
    r.line(8, "interesting preset", preset(&models));
    if r.failed == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", r.failed);
        ExitCode::FAILURE
    }
}
