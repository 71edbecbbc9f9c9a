//! Release gate: runs every core acceptance criterion at full trial counts
//! and prints one pass/fail line per criterion. CLI byte-determinism (the
//! remaining criterion) is exercised in the CLI crate's own test suite,
//! where the binary is available.

use sumlab::accept::{run_core_criteria, AcceptConfig};

#[test]
fn acceptance_criteria() {
    let cfg = AcceptConfig {
        quick: false,
        inject_conv_layout_fault: false,
    };
    let reports = run_core_criteria(&cfg);
    let mut all_passed = true;
    for report in &reports {
        println!("{}", report.line());
        all_passed &= report.passed;
    }
    assert!(all_passed, "one or more acceptance criteria failed");
}
