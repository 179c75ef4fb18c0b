//! Acceptance criteria A1-A10. Each test prints one PASS/FAIL line.

use std::io::Write;

use holojet::verify::{run_check, Status, VerifyConfig};

fn criterion(name: &str) {
    let check = run_check(name, &VerifyConfig::default());
    // Straight to the process stdout so the line shows even when output is captured.
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", check.line()).unwrap();
    out.flush().unwrap();
    assert_eq!(check.status, Status::Pass, "{}", check.line());
}

#[test]
fn a01_operator_cross_validation() {
    criterion("A1");
}

#[test]
fn a02_monomial_closed_form() {
    criterion("A2");
}

#[test]
fn a03_mobius_equivariance() {
    criterion("A3");
}

#[test]
fn a04_norm_identity() {
    criterion("A4");
}

#[test]
fn a05_poincare_pair_series_identity() {
    criterion("A5");
}

#[test]
fn a06_dbar_structure() {
    criterion("A6");
}

#[test]
fn a07_eigenvalue_ladder() {
    criterion("A7");
}

#[test]
fn a08_hardy_divergence() {
    criterion("A8");
}

#[test]
fn a09_kernel_structure() {
    criterion("A9");
}

#[test]
fn a10_group_hygiene() {
    criterion("A10");
}
