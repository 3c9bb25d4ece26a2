//! Acceptance suite: each criterion runs at its pinned tolerance and prints
//! one pass/fail line. The checks live in `harness::verify` so the CLI
//! `verify` subcommand exercises exactly the same code.
//!
//! Criterion 4 contains one verdict that is mathematically unattainable on
//! the checker's default grid — `(t·log(1+t))^{0.9}` stops being convex past
//! `t ≈ e⁸ − 1 ≈ 2980`, and the suite pins the expected `convex` verdict
//! anyway. The check reports its witness honestly and stays red rather than
//! shrinking the grid to force a pass.

use ncergo::harness::verify;

fn run(id: usize, f: impl Fn() -> ncergo::Result<verify::CriterionResult>) {
    let result = f().unwrap_or_else(|e| panic!("criterion {id} errored: {e}"));
    println!("{}", result.line());
    assert!(result.passed, "criterion {id} failed:\n{}", result.details);
}

#[test]
fn criterion_1_oracle_equivalence_and_speedup() {
    run(1, verify::criterion_1_oracle_equivalence);
}

#[test]
fn criterion_2_contraction_suite() {
    run(2, verify::criterion_2_contraction);
}

#[test]
fn criterion_3_identity_suite() {
    run(3, verify::criterion_3_identities);
}

#[test]
fn criterion_4_orlicz_suite() {
    run(4, verify::criterion_4_orlicz);
}

#[test]
fn criterion_5_rota_suite() {
    run(5, verify::criterion_5_rota);
}

#[test]
fn criterion_6_convergence_regression() {
    run(6, verify::criterion_6_convergence);
}

#[test]
fn criterion_7_certification_suite() {
    run(7, verify::criterion_7_certification);
}

#[test]
fn criterion_8_determinism() {
    run(8, verify::criterion_8_determinism);
}
