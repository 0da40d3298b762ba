//! Runs an external SMT solver on a script with a wall-clock limit.

use std::fmt;
use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

pub const SOLVER_ENV: &str = "RELOG2SMT_SOLVER";
pub const DEFAULT_SOLVER: &str = "z3 {file}";
const PLACEHOLDER: &str = "{file}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    Error,
}

impl Outcome {
    /// A definite verdict.
    pub fn is_decided(self) -> bool {
        matches!(self, Outcome::Sat | Outcome::Unsat)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Sat => "SAT",
            Outcome::Unsat => "UNSAT",
            Outcome::Unknown => "UNKNOWN",
            Outcome::Timeout => "TIMEOUT",
            Outcome::Error => "ERROR",
        })
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver command is empty")]
    EmptyCommand,
    #[error("solver command `{0}` has no `{{file}}` placeholder")]
    NoPlaceholder(String),
    #[error("solver `{0}` not found")]
    NotFound(String),
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// A whitespace-separated command line in which `{file}` stands for the
/// script path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCmd {
    argv: Vec<String>,
}

impl SolverCmd {
    pub fn parse(template: &str) -> Result<Self, SolverError> {
        let argv: Vec<String> = template.split_whitespace().map(str::to_string).collect();
        if argv.is_empty() {
            return Err(SolverError::EmptyCommand);
        }
        if !argv.iter().any(|a| a.contains(PLACEHOLDER)) {
            return Err(SolverError::NoPlaceholder(template.to_string()));
        }
        Ok(SolverCmd { argv })
    }

    /// `explicit`, else `$RELOG2SMT_SOLVER`, else `z3 {file}`.
    pub fn resolve(explicit: Option<&str>) -> Result<Self, SolverError> {
        match explicit {
            Some(t) => Self::parse(t),
            None => match std::env::var(SOLVER_ENV) {
                Ok(t) if !t.trim().is_empty() => Self::parse(&t),
                _ => Self::parse(DEFAULT_SOLVER),
            },
        }
    }

    /// File name of the solver program.
    pub fn solver_id(&self) -> String {
        std::path::Path::new(&self.argv[0])
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.argv[0].clone())
    }

    fn command(&self, file: &str) -> Command {
        let args: Vec<String> = self.argv.iter().map(|a| a.replace(PLACEHOLDER, file)).collect();
        let mut cmd = Command::new(&args[0]);
        cmd.args(&args[1..]);
        cmd
    }
}

impl fmt::Display for SolverCmd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.argv.join(" "))
    }
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub outcome: Outcome,
    pub solve_ms: f64,
    pub stdout: String,
    pub stderr: String,
}

/// Reads the verdict from solver output. Any `(error` line makes the run an
/// error even when a verdict follows.
pub fn parse_verdict(stdout: &str) -> Option<Outcome> {
    if stdout.lines().any(|l| l.trim_start().starts_with("(error")) {
        return Some(Outcome::Error);
    }
    let first = stdout.lines().map(str::trim).find(|l| !l.is_empty())?;
    match first {
        "sat" => Some(Outcome::Sat),
        "unsat" => Some(Outcome::Unsat),
        "unknown" => Some(Outcome::Unknown),
        _ => None,
    }
}

fn reader(mut r: impl Read + Send + 'static) -> mpsc::Receiver<String> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        let _ = tx.send(String::from_utf8_lossy(&buf).into_owned());
    });
    rx
}

#[cfg(unix)]
fn kill(child: &mut Child) {
    // The solver runs in its own process group so that helpers it spawned
    // die with it and release the output pipes.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill(child: &mut Child) {
    let _ = child.kill();
}

/// Writes `smtlib` to a temporary file and runs the solver on it. The
/// process is killed once `timeout` has elapsed.
pub fn run_solver(smtlib: &str, cmd: &SolverCmd, timeout: Duration) -> Result<SolverRun, SolverError> {
    let mut file = tempfile::Builder::new()
        .prefix("relog2smt-")
        .suffix(".smt2")
        .tempfile()?;
    file.write_all(smtlib.as_bytes())?;
    file.flush()?;
    let path = file.path().to_string_lossy().into_owned();

    let mut command = cmd.command(&path);
    command
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }
    let start = Instant::now();
    let mut child = command.spawn().map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => SolverError::NotFound(cmd.argv[0].clone()),
        _ => SolverError::Io(e),
    })?;
    let out = reader(child.stdout.take().expect("piped stdout"));
    let err = reader(child.stderr.take().expect("piped stderr"));

    let mut timed_out = false;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if start.elapsed() >= timeout {
            kill(&mut child);
            let _ = child.wait();
            timed_out = true;
            break;
        }
        thread::sleep(Duration::from_millis(2));
    }
    let elapsed = start.elapsed();
    let grace = Duration::from_millis(500);
    let stdout = out.recv_timeout(grace).unwrap_or_default();
    let stderr = err.recv_timeout(grace).unwrap_or_default();
    let ms = |d: Duration| d.as_secs_f64() * 1000.0;

    if timed_out {
        return Ok(SolverRun {
            outcome: Outcome::Timeout,
            solve_ms: ms(elapsed.max(timeout)),
            stdout,
            stderr,
        });
    }
    Ok(SolverRun {
        outcome: parse_verdict(&stdout).unwrap_or(Outcome::Error),
        solve_ms: ms(elapsed),
        stdout,
        stderr,
    })
}

/// Runs the solver on `smtlib` with `(check-sat)` removed and reports the
/// error lines it prints; empty means the script parsed and sort-checked.
pub fn syntax_errors(smtlib: &str, cmd: &SolverCmd, timeout: Duration) -> Result<Vec<String>, SolverError> {
    let script = smtlib.replace("(check-sat)\n", "");
    let run = run_solver(&script, cmd, timeout)?;
    let mut errors: Vec<String> = run
        .stdout
        .lines()
        .chain(run.stderr.lines())
        .filter(|l| l.contains("error"))
        .map(str::to_string)
        .collect();
    if run.outcome == Outcome::Timeout {
        errors.push("timeout while parsing".into());
    }
    Ok(errors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        assert_eq!(parse_verdict("sat\n"), Some(Outcome::Sat));
        assert_eq!(parse_verdict("\nunsat\n"), Some(Outcome::Unsat));
        assert_eq!(parse_verdict("unknown"), Some(Outcome::Unknown));
        assert_eq!(
            parse_verdict("(error \"line 3: unknown constant\")\nsat\n"),
            Some(Outcome::Error)
        );
        assert_eq!(parse_verdict(""), None);
        assert_eq!(parse_verdict("garbage"), None);
    }

    #[test]
    fn templates() {
        let c = SolverCmd::parse("z3 -T:5 {file}").unwrap();
        assert_eq!(c.solver_id(), "z3");
        assert_eq!(SolverCmd::parse("/opt/cvc5/bin/cvc5 {file}").unwrap().solver_id(), "cvc5");
        assert!(matches!(SolverCmd::parse("z3"), Err(SolverError::NoPlaceholder(_))));
        assert!(matches!(SolverCmd::parse("  "), Err(SolverError::EmptyCommand)));
    }
}
