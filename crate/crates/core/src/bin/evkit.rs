use std::io;
use std::time::{SystemTime, UNIX_EPOCH};

use evidence_kit::cli::{run_from, RunContext, Streams};

fn main() {
    let timestamp = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs()));
    let ctx = RunContext { timestamp };
    let stdin = io::stdin();
    let mut io = Streams {
        stdin: &mut stdin.lock(),
        stdout: &mut io::stdout(),
        stderr: &mut io::stderr(),
    };
    std::process::exit(run_from(std::env::args_os(), &ctx, &mut io));
}
