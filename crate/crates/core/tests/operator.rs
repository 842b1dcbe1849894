use std::f64::consts::PI;

use mweyl::hainlust::{
    apply_maximal, fundamental_pair, l2_inner, m_matrix, m_matrix_angle_form, m_matrix_general, resolvent_apply,
    solution_operator, FunctionPair, HainLustProblem, SolverSettings,
};
use mweyl::linalg::BoundaryVector;
use mweyl::odecore::{solve_hl_ode, ScalarFn};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn free() -> HainLustProblem {
    HainLustProblem::parse_with_angles("0", "0", "0", PI / 2.0, PI / 2.0).unwrap()
}

#[test]
fn free_equation_examples() {
    let p = free();
    let y = solve_hl_ode(&p, c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), None).unwrap();
    for k in 0..=10 {
        let x = k as f64 / 10.0;
        let (v, dv) = y.eval(x);
        assert!((v - c(x, 0.0)).norm() < 1e-10 && (dv - c(1.0, 0.0)).norm() < 1e-10);
    }
    let y = solve_hl_ode(&p, c(PI * PI, 0.0), c(0.0, 0.0), c(1.0, 0.0), None).unwrap();
    let (v, dv) = y.at_one();
    assert!(v.norm() < 1e-8 && (dv + 1.0).norm() < 1e-8);
}

#[test]
fn error_follows_tolerance() {
    // endpoint error of sin(pi x)/pi against rtol; DOPRI5 error control is
    // tolerance-proportional, so the log-log slope is close to one
    let mut points = Vec::new();
    for k in 0..6 {
        let rtol = 1e-5 * 0.5f64.powi(2 * k);
        let settings = SolverSettings {
            rtol,
            atol: rtol * 1e-2,
            ..SolverSettings::default()
        };
        let p = free().with_settings(settings);
        let y = solve_hl_ode(&p, c(PI * PI, 0.0), c(0.0, 0.0), c(1.0, 0.0), None).unwrap();
        let (v, dv) = y.at_one();
        let err = v.norm() + (dv + 1.0).norm();
        points.push((rtol.ln(), err.ln()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!(slope > 0.6 && slope < 1.4, "slope {slope}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shooting_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, lr in -5.0f64..30.0, li in -3.0f64..3.0) {
        let p = HainLustProblem::parse_with_angles("x + 0.3*i", "0.5*cos(x)", "3 + x", 1.0, 1.0).unwrap();
        let lam = c(lr, li);
        prop_assume!((lam - c(3.5, 0.0)).norm() > 0.6);
        let u = solve_hl_ode(&p, lam, c(1.0, 0.0), c(0.2, 0.0), None).unwrap();
        let v = solve_hl_ode(&p, lam, c(-0.3, 0.0), c(1.0, 0.0), None).unwrap();
        let w = solve_hl_ode(&p, lam, c(a - 0.3 * b, 0.0), c(0.2 * a + b, 0.0), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(lr.to_bits());
        for _ in 0..20 {
            let x: f64 = rng.gen();
            let lhs = w.eval(x).0;
            let rhs = u.eval(x).0 * a + v.eval(x).0 * b;
            prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn wronskian_is_constant(lr in -5.0f64..60.0, li in -3.0f64..3.0, alpha in 0.3f64..2.8) {
        let p = HainLustProblem::parse_with_angles("sin(3*x)", "step(x-0.5)", "5", alpha, 1.0).unwrap();
        let lam = c(lr, li);
        prop_assume!((lam - c(5.0, 0.0)).norm() > 0.5);
        let (y1, y2) = fundamental_pair(&p, lam).unwrap();
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            let (a, da) = y1.eval(x);
            let (b, db) = y2.eval(x);
            let wr = a * db - da * b;
            prop_assert!((wr - c(1.0, 0.0)).norm() < 1e-8);
        }
    }
}

#[test]
fn traces_agree_with_dense_output() {
    let p = HainLustProblem::parse_with_angles("x", "0.4", "2", 1.0, 0.5).unwrap();
    let s = solution_operator(&p, c(3.0, 1.0), &BoundaryVector::new(c(1.0, 0.0), c(0.5, 0.5))).unwrap();
    let t = s.traces();
    let a = s.y3(0.0).unwrap();
    let b = s.y3(1.0).unwrap();
    assert!((t.y0 - a[0]).norm() < 1e-12 && (t.dy0 - a[1]).norm() < 1e-12);
    assert!((t.y1 - b[0]).norm() < 1e-12 && (t.dy1 - b[1]).norm() < 1e-12);
}

#[test]
fn angle_and_general_paths_agree() {
    let p = HainLustProblem::parse_with_angles("x + 0.2*i", "0.3", "4 + x", 1.1, 0.6).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let lam = c(-4.0 + 8.0 * i as f64, -2.0 + 1.0 * j as f64 + 0.5);
            let a = m_matrix_angle_form(&p, lam).unwrap().m;
            let g = m_matrix_general(&p, lam).unwrap().m;
            let scale = a.norm().max(1.0);
            assert!((a - g).norm() < 1e-9 * scale, "at {lam}: {a:?} vs {g:?}");
            assert!((a.get(0, 1) - a.get(1, 0)).norm() < 1e-10);
        }
    }
}

#[test]
fn gamma2_of_solution_operator_is_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = mweyl::triplet_verify::random_matrix(&mut rng);
    let p = HainLustProblem::parse_with_matrix("cos(x)", "0.5*x", "2", b).unwrap();
    let lam = c(1.5, 0.7);
    let m = m_matrix(&p, lam).unwrap();
    for _ in 0..20 {
        let f = BoundaryVector::new(
            mweyl::triplet_verify::random_disc(&mut rng),
            mweyl::triplet_verify::random_disc(&mut rng),
        );
        let s = solution_operator(&p, lam, &f).unwrap();
        assert!((s.gamma2() - m.apply(&f)).norm() < 1e-8);
        assert!((s.boundary_residual(&p.b()) - f).norm() < 1e-12);
    }
}

#[test]
fn resolvent_solves_the_boundary_value_problem() {
    let b = mweyl::linalg::Mat2::new(c(0.2, 0.1), c(0.0, 0.3), c(-0.1, 0.0), c(0.4, -0.2));
    let p = HainLustProblem::parse_with_matrix("x + 0.5*i", "1 - step(x-0.4)", "2 + x", b).unwrap();
    let lam = c(1.0, 2.0);
    let f = FunctionPair::parse("1 + x^2", "cos(3*x)").unwrap();
    let r = resolvent_apply(&p, lam, &f).unwrap();
    assert!(r.boundary_residual(&p.b()).norm() < 1e-9);
    // (A~* - lambda) r = f in L^2
    let (a1, a2) = apply_maximal(&p, &r);
    let (r1, r2) = (r.y_fn(), r.z_fn().clone());
    let (f1, f2) = (f.y_fn(), f.z_fn().clone());
    let jumps = r.jumps();
    let d1 = ScalarFn::new(
        move |x| Ok(a1.eval(x)? - lam * r1.eval(x)? - f1.eval(x)?),
        jumps.clone(),
    );
    let d2 = ScalarFn::new(
        move |x| Ok(a2.eval(x)? - lam * r2.eval(x)? - f2.eval(x)?),
        jumps.clone(),
    );
    let opts = p.settings().quad();
    let defect = l2_inner((&d1, &d2), (&d1, &d2), &jumps, &opts).unwrap().re.sqrt();
    assert!(defect < 1e-7, "{defect}");
    for k in 0..20 {
        let x = (k as f64 + 0.5) / 20.0;
        assert!(d1.eval(x).unwrap().norm() < 1e-6 && d2.eval(x).unwrap().norm() < 1e-9);
    }
}
