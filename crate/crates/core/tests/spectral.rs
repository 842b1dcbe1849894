use std::f64::consts::PI;

use mweyl::hainlust::{m_matrix, FunctionPair, HainLustProblem};
use mweyl::linalg::Mat2;
use mweyl::poles::{count_eigenvalues, find_eigenvalues, pole_order_compare, resolvent_spectral_data, Contour, Region};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn neumann() -> HainLustProblem {
    HainLustProblem::parse_with_angles("0", "0", "0", PI / 2.0, PI / 2.0).unwrap()
}

#[test]
fn neumann_eigenvalues() {
    let p = neumann();
    let region = Region::new(0.5, 120.0, -1.0, 1.0).unwrap();
    let eig = find_eigenvalues(&p, p.b(), &region).unwrap();
    assert_eq!(eig.len(), 3, "{eig:?}");
    for (k, e) in eig.iter().enumerate() {
        let exact = ((k + 1) as f64 * PI).powi(2);
        assert!((e.lambda - c(exact, 0.0)).norm() < 1e-6, "{e:?}");
        assert_eq!(e.multiplicity, 1);
    }
    let gap = Region::new(15.0, 25.0, -1.0, 1.0).unwrap();
    assert!(find_eigenvalues(&p, p.b(), &gap).unwrap().is_empty());
}

#[test]
fn winding_counts_are_additive() {
    let p = neumann();
    let region = Region::new(0.5, 50.0, -1.0, 1.0).unwrap();
    let whole = count_eigenvalues(&p, p.b(), &region).unwrap();
    let parts: i64 = region
        .quadrants()
        .iter()
        .map(|q| count_eigenvalues(&p, p.b(), q).unwrap())
        .sum();
    assert_eq!(whole, 2);
    assert_eq!(whole, parts);
}

#[test]
fn complex_potential_keeps_eigenvalue_count() {
    let region = Region::new(0.5, 120.0, -3.0, 3.0).unwrap();
    let mut counts = Vec::new();
    for q in ["x", "x + 0.01*i", "x + i"] {
        let p = HainLustProblem::parse_with_angles(q, "0", "0", PI / 2.0, PI / 2.0).unwrap();
        counts.push(count_eigenvalues(&p, p.b(), &region).unwrap());
    }
    assert_eq!(counts, vec![3, 3, 3]);
    let p = HainLustProblem::parse_with_angles("x + i", "0", "0", PI / 2.0, PI / 2.0).unwrap();
    let eig = find_eigenvalues(&p, p.b(), &region).unwrap();
    assert_eq!(eig.len(), 3);
    for e in &eig {
        assert!((e.lambda.im - 1.0).abs() < 1e-6, "{e:?}");
    }
}

#[test]
fn spectral_projection_of_neumann_eigenvalue() {
    let p = neumann();
    let contour = Contour::new(c(PI * PI, 0.0), 3.0, 16).unwrap();
    let f = FunctionPair::parse("1.4142135623730951*cos(3.141592653589793*x)", "0").unwrap();
    let data = resolvent_spectral_data(&p, p.b(), &contour, &f, &f, 2).unwrap();
    assert!((data.projection - c(1.0, 0.0)).norm() < 1e-6, "{data:?}");
    assert!(data.nilpotent[0].norm() < 1e-8, "{data:?}");

    // cos(2 pi x) is orthogonal to the eigenfunction
    let o = FunctionPair::parse("cos(6.283185307179586*x)", "0").unwrap();
    let data = resolvent_spectral_data(&p, p.b(), &contour, &o, &o, 1).unwrap();
    assert!(data.projection.norm() < 1e-6, "{data:?}");

    // sin(2 pi x) is not: <P f, f> = 2 (int sin(2 pi x) cos(pi x))^2 = 32 / (9 pi^2)
    let s = FunctionPair::parse("sin(6.283185307179586*x)", "0").unwrap();
    let data = resolvent_spectral_data(&p, p.b(), &contour, &s, &s, 1).unwrap();
    assert!((data.projection.re - 32.0 / (9.0 * PI * PI)).abs() < 1e-6, "{data:?}");
}

#[test]
fn projection_is_contour_independent() {
    let p = neumann();
    let f = FunctionPair::parse("1 + x", "0").unwrap();
    let g = FunctionPair::parse("x^2", "0").unwrap();
    let small = Contour::new(c(PI * PI, 0.0), 2.0, 16).unwrap();
    let large = Contour::new(c(PI * PI, 0.0), 4.0, 16).unwrap();
    let a = resolvent_spectral_data(&p, p.b(), &small, &f, &g, 1).unwrap();
    let b = resolvent_spectral_data(&p, p.b(), &large, &f, &g, 1).unwrap();
    assert!((a.projection - b.projection).norm() < 1e-8);
}

#[test]
fn spectrum_free_contour() {
    let p = neumann();
    let mu = c(20.0, 0.0);
    let contour = Contour::new(mu, 3.0, 16).unwrap();
    let f = FunctionPair::parse("1 + x", "0").unwrap();
    let data = resolvent_spectral_data(&p, p.b(), &contour, &f, &f, 2).unwrap();
    assert!(data.projection.norm() < 1e-9);
    assert!(data.nilpotent.iter().all(|d| d.norm() < 1e-9));
    // the reduced resolvent at a regular point is the resolvent itself
    let r = mweyl::hainlust::resolvent_apply(&p, mu, &f).unwrap();
    let direct = mweyl::hainlust::pair_inner_product(&r, &f).unwrap();
    assert!((data.reduced - direct).norm() < 1e-8, "{} vs {}", data.reduced, direct);

    let orders = pole_order_compare(&p, p.b(), &contour, 1).unwrap();
    assert_eq!((orders.m_order, orders.resolvent_order), (0, 0));
}

#[test]
fn pole_orders_match_for_neumann_and_robin() {
    let p = neumann();
    let contour = Contour::new(c(PI * PI, 0.0), 3.0, 16).unwrap();
    let orders = pole_order_compare(&p, p.b(), &contour, 1).unwrap();
    assert_eq!((orders.m_order, orders.resolvent_order), (1, 1));

    let robin = p.with_b(Mat2::IDENTITY);
    let region = Region::new(-20.0, 20.0, -1.0, 1.0).unwrap();
    let eig = find_eigenvalues(&robin, robin.b(), &region).unwrap();
    let first = eig[0].lambda;
    assert!(m_matrix(&robin, first).is_err());
    let contour = Contour::new(first, 0.5, 16).unwrap();
    let orders = pole_order_compare(&robin, robin.b(), &contour, 3).unwrap();
    assert_eq!(orders.m_order, orders.resolvent_order);
    assert_eq!(orders.m_order, 1);
}
