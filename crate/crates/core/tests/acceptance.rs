//! Acceptance gate: every criterion at its stated tolerance. Each test prints
//! one PASS/FAIL line to stderr, bypassing the harness capture.

use std::io::Write;

use opnorm::selftest;

fn gate(id: usize) {
    let outcome = selftest::run(id);
    let _ = writeln!(std::io::stderr(), "{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_worked_example() {
    gate(1);
}

#[test]
fn criterion_02_inequality_fuzzing() {
    gate(2);
}

#[test]
fn criterion_03_unitarity() {
    gate(3);
}

#[test]
fn criterion_04_expansion_identity() {
    gate(4);
}

#[test]
fn criterion_05_boundary_max_modulus() {
    gate(5);
}

#[test]
fn criterion_06_poisson_machinery() {
    gate(6);
}

#[test]
fn criterion_07_equality_and_disjoint_spectra() {
    gate(7);
}

#[test]
fn criterion_08_certificate_soundness() {
    gate(8);
}

#[test]
fn criterion_09_lemma_checks() {
    gate(9);
}

#[test]
fn criterion_10_transfer_and_chain() {
    gate(10);
}

#[test]
fn criterion_11_sup_norm_explorer() {
    gate(11);
}

#[test]
fn criterion_12_campaign_reproducibility() {
    gate(12);
}
