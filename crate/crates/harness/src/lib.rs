//! Solver client, brute-force oracle, benchmark runner and the command-line
//! front end for `relog2smt_core`.

pub mod bench;
pub mod cli;
pub mod oracle;
pub mod solver;
