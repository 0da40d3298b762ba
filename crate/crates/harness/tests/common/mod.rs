#![allow(dead_code)]

use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_model(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(format!("{name}.kkir"))).unwrap()
}

pub fn z3_available() -> bool {
    std::process::Command::new("z3").arg("-version").output().is_ok()
}

/// An executable shell script in `dir` that runs `body`.
pub fn script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
    p
}
