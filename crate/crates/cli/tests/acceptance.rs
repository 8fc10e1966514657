//! The full acceptance suite. Criteria run one after another so that the
//! runtime budgets are measured without contention; a failure exits nonzero.

use std::process::Command;
use std::time::Instant;

use nilcurv_cli::acceptance::{self, CriterionId};

const SEED: u64 = 42;

fn verify_paper_json() -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_nilcurv"))
        .args(["verify-paper", "--json", "--only", "1,2,3,4", "--seed", &SEED.to_string()])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "verify-paper failed: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn main() {
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for id in CriterionId::ALL.into_iter().filter(|c| *c != CriterionId::Determinism) {
        let r = acceptance::run(id, SEED);
        println!("{}", r.line());
        if !r.passed {
            failures.push(format!("{} failed: {}", r.name, r.details));
        } else if !r.within_budget() {
            failures.push(format!("{} exceeded its budget: {:.2}s", r.name, r.elapsed.as_secs_f64()));
        }
        lines.push(r.line());
    }

    // Determinism: two consecutive runs of the binary give identical bytes.
    let start = Instant::now();
    let a = verify_paper_json();
    let first = start.elapsed();
    let b = verify_paper_json();
    let overhead = start.elapsed().saturating_sub(first * 2);
    let identical = a == b;
    let budget = CriterionId::Determinism.budget();
    println!(
        "criterion 9 {:<22} {}  ({} bytes, overhead {:.2}s, budget {}s)",
        CriterionId::Determinism.name(),
        if identical { "PASS" } else { "FAIL" },
        a.len(),
        overhead.as_secs_f64(),
        budget.as_secs()
    );
    if !identical {
        failures.push("determinism: verify-paper JSON differs between runs".into());
    }
    if start.elapsed() > first * 2 + budget {
        failures.push("determinism: rerun overhead exceeded its budget".into());
    }
    if !failures.is_empty() {
        eprintln!("{}", failures.join("\n"));
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
