//! Helpers shared by the binary-level tests.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_squeezevo"))
}

pub fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

pub fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Runs a shipped scenario with the fixed-step method; returns the exit code
/// and stderr.
pub fn run_shipped(name: &str, out: &Path) -> (Option<i32>, String) {
    let o = bin()
        .arg("run")
        .arg(scenario(name))
        .args(["--method", "rk4", "--out"])
        .arg(out)
        .output()
        .expect("binary runs");
    (o.status.code(), String::from_utf8_lossy(&o.stderr).into_owned())
}

/// Names of files present in either directory that are missing from the
/// other or differ byte for byte.
pub fn differing_files(a: &Path, b: &Path) -> Vec<String> {
    let names = |d: &Path| -> Vec<_> {
        fs::read_dir(d).map(|it| it.map(|e| e.unwrap().file_name()).collect()).unwrap_or_default()
    };
    let mut all = names(a);
    all.extend(names(b));
    all.sort();
    all.dedup();
    all.into_iter()
        .filter(|n| fs::read(a.join(n)).ok() != fs::read(b.join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect()
}
