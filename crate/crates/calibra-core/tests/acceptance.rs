//! Acceptance suite: runs every criterion at its stated tolerance and
//! prints one pass/fail line per criterion. The whole suite is deterministic
//! under the fixed seed.

use calibra_core::selftest::{run_selftest, SelftestConfig, CRITERION_NAMES};

#[test]
fn acceptance_criteria() {
    let cfg = SelftestConfig::default();
    let reports = run_selftest(&cfg);
    assert_eq!(reports.len(), CRITERION_NAMES.len());
    let mut failed = Vec::new();
    for r in &reports {
        println!(
            "[{}] criterion {:2} {:<28} expected: {} | observed: {} | tolerance: {} | {} ms",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.expected,
            r.observed,
            r.tolerance,
            r.millis
        );
        if !r.passed {
            failed.push(r.name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
