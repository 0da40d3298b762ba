#![no_main]

use libfuzzer_sys::fuzz_target;
use relog2smt::solver::{parse_verdict, SolverCmd};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = parse_verdict(&text);
    if let Ok(cmd) = SolverCmd::parse(&text) {
        let _ = cmd.solver_id();
    }
});
