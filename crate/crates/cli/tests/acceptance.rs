//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ocokit_cli::suite::{criterion_names, run_suite};

const SEED: u64 = 7;

fn line(pass: bool, id: usize, name: &str, seconds: f64, detail: &str) {
    println!("{} {:>2} {} ({:.1}s): {}", if pass { "PASS" } else { "FAIL" }, id, name, seconds, detail);
}

/// Runs `ocokit verify` and returns (exit ok, trace hash, trace.csv bytes).
fn verify_once(out: &Path) -> Result<(bool, String, Vec<u8>), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_ocokit"))
        .args(["verify", "--seed", &SEED.to_string(), "--out"])
        .arg(out)
        .output()
        .map_err(|e| format!("cannot spawn ocokit: {e}"))?;
    let stdout = String::from_utf8_lossy(&o.stdout);
    let hash = stdout
        .lines()
        .find_map(|l| l.strip_prefix("trace hash "))
        .ok_or("no trace hash in verify output")?
        .to_string();
    let csv = std::fs::read(out.join("trace.csv")).map_err(|e| format!("trace.csv: {e}"))?;
    Ok((o.status.success(), hash, csv))
}

fn main() -> ExitCode {
    let mut all = true;
    let report = run_suite(SEED, |c| {
        line(c.pass, c.id, c.name, c.seconds, &c.detail);
    });
    all &= report.all_pass();
    let expected = criterion_names().len();
    if report.checks.len() != expected {
        println!("FAIL suite ran {} of {} checks", report.checks.len(), expected);
        all = false;
    }

    let start = Instant::now();
    let base = std::env::temp_dir().join(format!("ocokit-acceptance-{}", std::process::id()));
    let runs = [verify_once(&base.join("a")), verify_once(&base.join("b"))];
    let _ = std::fs::remove_dir_all(&base);
    let (pass, detail) = match runs {
        [Ok(a), Ok(b)] => {
            let same = a.1 == b.1 && a.2 == b.2;
            let matches_in_process = a.1 == report.trace_hash;
            (
                same && matches_in_process && a.0 && b.0,
                format!(
                    "hashes {} / {}; trace.csv identical: {}; equals in-process hash: {}; verify exit ok: {}",
                    &a.1[..16],
                    &b.1[..16],
                    a.2 == b.2,
                    matches_in_process,
                    a.0 && b.0
                ),
            )
        }
        [a, b] => (false, format!("verify failed: {:?} {:?}", a.err(), b.err())),
    };
    all &= pass;
    line(pass, 11, "determinism of the verify suite", start.elapsed().as_secs_f64(), &detail);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
