#![no_main]

use libfuzzer_sys::fuzz_target;
use relog2smt_core::kkir::parse_model;
use relog2smt_core::tfol::check_well_sorted;
use relog2smt_core::{compile, Options};

// Small budget: inputs with large scopes should fail fast, not hang.
const BUDGET: usize = 100_000;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = parse_model(text) else { return };
    if m.universe.len() > 12 {
        return;
    }
    for o in Options::all() {
        if let Ok(c) = compile(&m, o, BUDGET) {
            assert!(check_well_sorted(&c.scoped.theory).is_empty(), "{o}");
        }
    }
});
