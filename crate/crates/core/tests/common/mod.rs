#![allow(dead_code)]

use std::io::Cursor;
use std::path::{Path, PathBuf};

use evidence_kit::cli::{run_from, RunContext, Streams};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn golden_dir() -> PathBuf {
    fixtures().join("golden")
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line in-process with no timestamp and the given stdin.
pub fn evkit_with_stdin(args: &[&str], stdin: &str) -> Outcome {
    let mut input = Cursor::new(stdin.as_bytes().to_vec());
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let mut io = Streams {
        stdin: &mut input,
        stdout: &mut stdout,
        stderr: &mut stderr,
    };
    let argv = std::iter::once("evkit").chain(args.iter().copied());
    let code = run_from(argv, &RunContext::default(), &mut io);
    Outcome {
        code,
        stdout: String::from_utf8(stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(stderr).expect("utf-8 stderr"),
    }
}

pub fn evkit(args: &[&str]) -> Outcome {
    evkit_with_stdin(args, "")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn checked(args: &[&str]) {
    let out = evkit(args);
    assert_eq!(out.code, 0, "evkit {args:?} failed: {}", out.stderr);
}

/// Files produced by the end-to-end run, in a fixed order.
pub const PIPELINE_OUTPUTS: [&str; 8] = [
    "train.csv",
    "test.csv",
    "disc.csv",
    "frame.txt",
    "masses_m1.json",
    "report_m1.txt",
    "tally.txt",
    "tally.csv",
];

/// Synthesizes the frozen train/test sets, estimates Method 1 masses,
/// diagnoses the test set and tallies every method and variable set.
pub fn run_pipeline(dir: &Path) {
    let f = fixtures();
    let p = |name: &str| dir.join(name);
    checked(&[
        "synth",
        "--spec",
        s(&f.join("synth_train.json")),
        "--out",
        s(&p("train.csv")),
        "--disc-out",
        s(&p("disc.csv")),
        "--frame-out",
        s(&p("frame.txt")),
    ]);
    checked(&["synth", "--spec", s(&f.join("synth_test.json")), "--out", s(&p("test.csv"))]);
    checked(&[
        "estimate",
        "--method",
        "m1",
        "--frame",
        s(&p("frame.txt")),
        "--cases",
        s(&p("train.csv")),
        "--disc",
        s(&p("disc.csv")),
        "--out",
        s(&p("masses_m1.json")),
    ]);
    checked(&[
        "diagnose",
        "--masses",
        s(&p("masses_m1.json")),
        "--disc",
        s(&p("disc.csv")),
        "--cases",
        s(&p("test.csv")),
        "--out",
        s(&p("report_m1.txt")),
    ]);
    checked(&[
        "evaluate",
        "--frame",
        s(&p("frame.txt")),
        "--train",
        s(&p("train.csv")),
        "--test",
        s(&p("test.csv")),
        "--disc",
        s(&p("disc.csv")),
        "--methods",
        "m1,m2a,m2b",
        "--variants",
        "cd3,cd5,cd7",
        "--csv",
        s(&p("tally.csv")),
        "--out",
        s(&p("tally.txt")),
    ]);
}

/// Byte comparison of a fresh run against the committed golden files.
/// With `UPDATE_GOLDEN` set the golden files are rewritten instead.
pub fn compare_with_golden(dir: &Path) -> Result<(), String> {
    let golden = golden_dir();
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    if update {
        std::fs::create_dir_all(&golden).map_err(|e| e.to_string())?;
    }
    let mut diffs = Vec::new();
    for name in PIPELINE_OUTPUTS {
        let fresh = std::fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
        let target = golden.join(name);
        if update {
            std::fs::write(&target, &fresh).map_err(|e| e.to_string())?;
            continue;
        }
        match std::fs::read(&target) {
            Ok(committed) if committed == fresh => {}
            Ok(_) => diffs.push(format!("{name} differs")),
            Err(e) => diffs.push(format!("{name}: {e}")),
        }
    }
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(diffs.join("; "))
    }
}
