//! Acceptance criteria 1–6, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always shown.

use std::process::ExitCode;

use fiberpoles::verify::{run, VerifyConfig};

fn main() -> ExitCode {
    let report = match run("all", &VerifyConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL acceptance suite did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for c in &report.criteria {
        println!("{}", c.line());
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
