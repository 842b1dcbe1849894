use std::f64::consts::PI;

use mweyl::error::Error;
use mweyl::hainlust::{FunctionPair, HainLustProblem};
use mweyl::speclimits::{essential_range, in_ranges, m_limit_scan, plemelj_jump_oracle, resolvent_limit_scan};
use num_complex::Complex64;

fn problem(u: &str) -> HainLustProblem {
    HainLustProblem::parse_with_angles("0", "0", u, PI / 2.0, PI / 2.0).unwrap()
}

#[test]
fn m_has_equal_limits_across_essential_spectrum() {
    let p = problem("x");
    let scan = m_limit_scan(&p, 0.5, 1e-1, 1e-4, 13).unwrap();
    assert!(scan.norm_difference < 1e-8, "{}", scan.norm_difference);
    // conjugate symmetry for real coefficients
    for (up, lo) in scan.upper.iter().zip(&scan.lower) {
        for (a, b) in up.iter().zip(lo) {
            assert!((a - b.conj()).norm() < 1e-9);
        }
    }
}

#[test]
fn m_difference_is_first_order_in_eps() {
    let p = problem("x");
    let scan = m_limit_scan(&p, 0.5, 1e-2, 5e-3, 3).unwrap();
    let ratio = scan.difference_at(0) / scan.difference_at(2);
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn m_is_analytic_off_the_spectrum() {
    let p = problem("x");
    let scan = m_limit_scan(&p, 3.0, 1e-1, 1e-4, 5).unwrap();
    // at eps_max the two sides still differ by O(eps); the limits agree
    assert!(scan.norm_difference < 1e-9);
}

#[test]
fn resolvent_jump_matches_plemelj() {
    let p = problem("x");
    let one = FunctionPair::parse("0", "1").unwrap();
    let scan = resolvent_limit_scan(&p, 0.5, &one, &one, 1e-1, 1e-4, 13).unwrap();
    let target = Complex64::new(0.0, 2.0 * PI);
    assert!((scan.jump[0] - target).norm() < 0.01 * target.norm(), "{:?}", scan.jump);
    assert_eq!(scan.plemelj, scan.literal);

    let lin = FunctionPair::parse("0", "x").unwrap();
    let scan = resolvent_limit_scan(&p, 0.5, &lin, &one, 1e-1, 1e-4, 13).unwrap();
    let target = Complex64::new(0.0, PI);
    assert!((scan.jump[0] - target).norm() < 0.01 * target.norm(), "{:?}", scan.jump);
    assert!((scan.plemelj.unwrap() - target).norm() < 1e-8);

    let first = FunctionPair::parse("1 + x", "0").unwrap();
    let scan = resolvent_limit_scan(&p, 0.5, &one, &first, 1e-1, 1e-4, 13).unwrap();
    assert!(scan.jump[0].norm() < 1e-6, "{:?}", scan.jump);
}

#[test]
fn derivative_factor() {
    let p = problem("2*x");
    let one = FunctionPair::parse("0", "1").unwrap();
    let scan = resolvent_limit_scan(&p, 1.0, &one, &one, 1e-1, 1e-4, 13).unwrap();
    let oracle = plemelj_jump_oracle(
        &"1".parse().unwrap(),
        &"1".parse().unwrap(),
        &"2*x".parse().unwrap(),
        1.0,
    )
    .unwrap();
    assert!((oracle - Complex64::new(0.0, PI)).norm() < 1e-8);
    assert!((scan.jump[0] - oracle).norm() < 0.01 * oracle.norm(), "{:?}", scan.jump);
}

#[test]
fn coupled_problem_with_w_gap() {
    // w vanishes on (0.4, 0.6), around u^{-1}(0.5); q keeps eigenvalues away from k
    let p = HainLustProblem::parse_with_angles("5 + x", "0.7*(1 - step(x-0.4) + step(x-0.6))", "x", PI / 2.0, PI / 2.0)
        .unwrap();
    let scan = m_limit_scan(&p, 0.5, 1e-1, 1e-4, 13).unwrap();
    assert!(scan.norm_difference < 1e-7, "{}", scan.norm_difference);
    let bad = HainLustProblem::parse_with_angles("0", "0.7", "x", PI / 2.0, PI / 2.0).unwrap();
    assert!(matches!(
        m_limit_scan(&bad, 0.5, 1e-1, 1e-4, 13),
        Err(Error::WGapViolation { .. })
    ));
}

#[test]
fn measured_jumps_lie_in_the_essential_range() {
    let one = FunctionPair::parse("0", "1").unwrap();
    for (u, k) in [("x", 0.5), ("x", 0.25), ("0.5 + x^3", 0.7), ("2*x", 1.0)] {
        let p = problem(u);
        let scan = resolvent_limit_scan(&p, k, &one, &one, 1e-1, 1e-4, 13).unwrap();
        let measured = scan.jump[0].norm();
        if measured > 10.0 * scan.jump_error {
            let ranges = essential_range(p.u_expr(), 1024).unwrap();
            assert!(in_ranges(&ranges, k, 0.0), "{u} at {k}");
        }
    }
}
