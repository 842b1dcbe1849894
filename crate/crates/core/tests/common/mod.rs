use std::f64::consts::PI;

use mweyl::hainlust::{FunctionPair, HainLustProblem};
use mweyl::linalg::Mat2;
use num_complex::Complex64;

/// Twelve problem/pair combinations for the Green identity, including
/// discontinuous `w` and complex `q`.
pub fn green_cases() -> Vec<(HainLustProblem, FunctionPair, FunctionPair)> {
    let b = Mat2::new(
        Complex64::new(0.3, 0.1),
        Complex64::new(0.0, -0.2),
        Complex64::new(0.5, 0.0),
        Complex64::new(-0.4, 0.2),
    );
    let problems = [
        HainLustProblem::parse_with_angles("x", "1", "2", 1.0, 1.0).unwrap(),
        HainLustProblem::parse_with_angles("x + i", "0.5", "2 + x", PI / 2.0, 0.7).unwrap(),
        HainLustProblem::parse_with_matrix("cos(x)", "step(x-0.3)", "x", b).unwrap(),
        HainLustProblem::parse_with_matrix("x^2 - 0.5*i*x", "1 - step(x-0.6) + 0.2*i", "1 + i*x", b).unwrap(),
    ];
    let pairs = [
        ("x^2*(1-x)^2", "0", "x^2*(1-x)^2", "0"),
        ("0", "sin(x)", "1 + x^3", "x"),
        ("exp(x) + i*x", "step(x-0.5)", "cos(2*x)", "1 - x + 0.3*i"),
    ];
    let mut cases = Vec::new();
    for p in &problems {
        for (uy, uz, vy, vz) in pairs {
            cases.push((
                p.clone(),
                FunctionPair::parse(uy, uz).unwrap(),
                FunctionPair::parse(vy, vz).unwrap(),
            ));
        }
    }
    cases
}
