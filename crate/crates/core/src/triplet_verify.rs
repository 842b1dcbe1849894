//! Numerical checks of the boundary-triplet identities on Hain-Lust
//! problems. Each checker computes both sides independently and reports
//! the defect.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hainlust::{
    apply_maximal, l2_inner, m_matrix, pair_distance, pair_inner_product_with, pair_norm, resolvent_apply,
    solution_operator, FunctionPair, HainLustProblem, KernelBasis,
};
use crate::linalg::{BoundaryVector, Mat2};

/// Defect of one sub-identity: `|lhs - rhs|` against the larger side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defect {
    pub name: String,
    pub absolute: f64,
    pub scale: f64,
}

impl Defect {
    fn new(name: &str, absolute: f64, lhs: f64, rhs: f64) -> Self {
        Defect {
            name: name.to_string(),
            absolute,
            scale: lhs.max(rhs),
        }
    }

    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.absolute / self.scale
        } else {
            self.absolute
        }
    }

    /// Relative defect when the sides exceed 1 in size, absolute otherwise.
    pub fn acceptance(&self) -> f64 {
        if self.scale > 1.0 {
            self.relative()
        } else {
            self.absolute
        }
    }
}

/// Outcome of one identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub lambda: Complex64,
    pub lambda0: Option<Complex64>,
    pub b: Mat2,
    pub c: Option<Mat2>,
    pub absolute: f64,
    pub relative: f64,
    /// Per-part maximum of [`Defect::acceptance`].
    pub acceptance: f64,
    pub parts: Vec<Defect>,
    pub fingerprint: String,
}

impl IdentityReport {
    fn new(identity: &str, problem: &HainLustProblem, lambda: Complex64, parts: Vec<Defect>) -> Self {
        let fold = |f: &dyn Fn(&Defect) -> f64| parts.iter().map(f).fold(0.0, f64::max);
        IdentityReport {
            identity: identity.to_string(),
            lambda,
            lambda0: None,
            b: problem.b(),
            c: None,
            absolute: fold(&|d| d.absolute),
            relative: fold(&|d| d.relative()),
            acceptance: fold(&|d| d.acceptance()),
            parts,
            fingerprint: problem.fingerprint(),
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.acceptance.is_finite() && self.acceptance < tol
    }
}

fn basis() -> [BoundaryVector; 2] {
    [BoundaryVector::basis(0), BoundaryVector::basis(1)]
}

/// `M_{B+C}(I - C M_B) = M_B` and `S_{B+C}(I - C G2 S_B) = S_B` on both
/// canonical basis vectors.
pub fn check_m_transform(problem: &HainLustProblem, b: Mat2, c: Mat2, lambda: Complex64) -> Result<IdentityReport> {
    let pb = problem.with_b(b);
    let pbc = problem.with_b(b + c);
    let mb = m_matrix(&pb, lambda)?.m;
    let mbc = m_matrix(&pbc, lambda)?.m;
    let lhs = mbc * (Mat2::IDENTITY - c * mb);
    let mut parts = vec![Defect::new("M transform", (lhs - mb).norm(), lhs.norm(), mb.norm())];
    let opts = problem.settings().quad();
    for (i, e) in basis().iter().enumerate() {
        let sb = solution_operator(&pb, lambda, e)?;
        let seed = *e - c.apply(&sb.gamma2());
        let left = solution_operator(&pbc, lambda, &seed)?;
        parts.push(Defect::new(
            &format!("S transform e{}", i + 1),
            pair_distance(&left, &sb, &opts)?,
            pair_norm(&left, &opts)?,
            pair_norm(&sb, &opts)?,
        ));
    }
    let mut r = IdentityReport::new("m_transform", &pb, lambda, parts);
    r.c = Some(c);
    Ok(r)
}

/// `M(lambda) f = G2 [S_{lambda0} f + (lambda - lambda0)(A_B - lambda)^{-1} S_{lambda0} f]`.
pub fn check_resolvent_rep(
    problem: &HainLustProblem,
    b: Mat2,
    lambda: Complex64,
    lambda0: Complex64,
    f: &BoundaryVector,
) -> Result<IdentityReport> {
    let pb = problem.with_b(b);
    // M from its defining trace solve, so lambda = lambda0 collapses exactly
    let lhs = KernelBasis::new(&pb, lambda)?.m_matrix().apply(f);
    let s0 = solution_operator(&pb, lambda0, f)?;
    let rhs = if lambda == lambda0 {
        s0.gamma2()
    } else {
        let r = resolvent_apply(&pb, lambda, &s0)?;
        s0.gamma2() + r.gamma2().scale(lambda - lambda0)
    };
    let parts = vec![Defect::new(
        "resolvent representation",
        (lhs - rhs).norm(),
        lhs.norm(),
        rhs.norm(),
    )];
    let mut r = IdentityReport::new("resolvent_rep", &pb, lambda, parts);
    r.lambda0 = Some(lambda0);
    Ok(r)
}

/// `(A_B - lambda)^{-1} f = (A_C - lambda)^{-1} f - S_{B+C}(I - C M_B)(G1 - B G2)(A_C - lambda)^{-1} f`,
/// plus the form with `(C - B) G2 (A_C - lambda)^{-1} f` as the boundary datum.
pub fn check_krein(
    problem: &HainLustProblem,
    b: Mat2,
    c: Mat2,
    lambda: Complex64,
    f: &FunctionPair,
) -> Result<IdentityReport> {
    let pb = problem.with_b(b);
    let pc = problem.with_b(c);
    let pbc = problem.with_b(b + c);
    let opts = problem.settings().quad();
    let rb = resolvent_apply(&pb, lambda, f)?;
    let rc = resolvent_apply(&pc, lambda, f)?;
    let mb = m_matrix(&pb, lambda)?.m;
    let transfer = Mat2::IDENTITY - c * mb;
    let one = Complex64::new(1.0, 0.0);
    let lhs_norm = pair_norm(&rb, &opts)?;

    let mut parts = Vec::new();
    let data = [
        ("Krein", rc.boundary_residual(&b)),
        ("Krein (C - B) form", (c - b).apply(&rc.gamma2())),
    ];
    for (name, datum) in data {
        let correction = solution_operator(&pbc, lambda, &transfer.apply(&datum))?;
        let rhs = FunctionPair::combine(&[(one, &rc), (-one, &correction)]);
        parts.push(Defect::new(
            name,
            pair_distance(&rb, &rhs, &opts)?,
            lhs_norm,
            pair_norm(&rhs, &opts)?,
        ));
    }
    let mut r = IdentityReport::new("krein", &pb, lambda, parts);
    r.c = Some(c);
    Ok(r)
}

/// (a) `<A_B u, v> = <u, A~_{B*} v>` for `u = (A_B - lambda)^{-1} w` and
/// `v = (A~_{B*} - conj(lambda))^{-1} w`, both sides from the differential
/// expressions; (b) `-(u, w) = ((G1 - B G2) u, G2 (A~_{B*} - conj(lambda))^{-1} w)`
/// for `u = S_{lambda,B} u_seed`.
pub fn check_adjoint_identities(
    problem: &HainLustProblem,
    b: Mat2,
    lambda: Complex64,
    u_seed: &BoundaryVector,
    w_pair: &FunctionPair,
) -> Result<IdentityReport> {
    let pb = problem.with_b(b);
    let adj = pb.adjoint();
    let opts = problem.settings().quad();

    let u = resolvent_apply(&pb, lambda, w_pair)?;
    let v = resolvent_apply(&adj, lambda.conj(), w_pair)?;
    let (au1, au2) = apply_maximal(&pb, &u);
    let (av1, av2) = apply_maximal(&adj, &v);
    let mut jumps = u.jumps();
    jumps.extend(v.jumps());
    jumps.extend(pb.breakpoints());
    let left = l2_inner((&au1, &au2), (&v.y_fn(), v.z_fn()), &jumps, &opts)?;
    let right = l2_inner((&u.y_fn(), u.z_fn()), (&av1, &av2), &jumps, &opts)?;
    let pairing = Defect::new("adjoint pairing", (left - right).norm(), left.norm(), right.norm());

    let s = solution_operator(&pb, lambda, u_seed)?;
    let lhs = -pair_inner_product_with(&s, w_pair, &opts)?;
    let rhs = s.boundary_residual(&b).dot(&v.gamma2());
    let first_line = Defect::new("solution operator adjoint", (lhs - rhs).norm(), lhs.norm(), rhs.norm());

    Ok(IdentityReport::new("adjoint", &pb, lambda, vec![pairing, first_line]))
}

/// `S_{lambda,B} f = S_{lambda0,B} f + (lambda - lambda0)(A_B - lambda)^{-1} S_{lambda0,B} f`.
pub fn check_solution_analyticity(
    problem: &HainLustProblem,
    b: Mat2,
    lambda: Complex64,
    lambda0: Complex64,
    f: &BoundaryVector,
) -> Result<IdentityReport> {
    let pb = problem.with_b(b);
    let opts = problem.settings().quad();
    let direct = solution_operator(&pb, lambda, f)?;
    let s0 = solution_operator(&pb, lambda0, f)?;
    let formula = if lambda == lambda0 {
        s0
    } else {
        let r = resolvent_apply(&pb, lambda, &s0)?;
        s0.add(&r.scale(lambda - lambda0))
    };
    let parts = vec![Defect::new(
        "solution operator analyticity",
        pair_distance(&direct, &formula, &opts)?,
        pair_norm(&direct, &opts)?,
        pair_norm(&formula, &opts)?,
    )];
    let mut r = IdentityReport::new("solution_analyticity", &pb, lambda, parts);
    r.lambda0 = Some(lambda0);
    Ok(r)
}

/// A complex number with modulus below one.
pub fn random_disc(rng: &mut impl Rng) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() < 1.0 {
            return z;
        }
    }
}

pub fn random_matrix(rng: &mut impl Rng) -> Mat2 {
    Mat2::new(random_disc(rng), random_disc(rng), random_disc(rng), random_disc(rng))
}

/// A randomly drawn problem with smooth complex `q`, real `u` and
/// coupling `w`, and a random boundary parameter.
pub fn random_problem(rng: &mut impl Rng) -> Result<HainLustProblem> {
    let mut r = |a: f64, b: f64| rng.gen_range(a..b);
    let q = format!(
        "{:.4} + {:.4}*x + {:.4}*i*sin(3*x)",
        r(-2.0, 2.0),
        r(-2.0, 2.0),
        r(-0.5, 0.5)
    );
    let w = format!("{:.4}*cos({:.4}*x)", r(0.0, 1.0), r(0.5, 4.0));
    let u = format!("{:.4} + {:.4}*x", r(1.0, 3.0), r(0.5, 2.0));
    let b = Mat2::new(
        Complex64::new(r(-1.0, 1.0), r(-1.0, 1.0)),
        Complex64::new(r(-1.0, 1.0), r(-1.0, 1.0)),
        Complex64::new(r(-1.0, 1.0), r(-1.0, 1.0)),
        Complex64::new(r(-1.0, 1.0), r(-1.0, 1.0)),
    );
    HainLustProblem::parse_with_matrix(&q, &w, &u, b)
}

/// One drawn problem with its spectral points and perturbation.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub problem: HainLustProblem,
    pub c: Mat2,
    pub lambda: Complex64,
    pub lambda0: Complex64,
    pub f: FunctionPair,
}

/// Draws `n_problems x n_lambdas` cases. Spectral points that trip a
/// conditioning guard for `A_B`, `A_C` or `A_{B+C}` are redrawn.
pub fn random_cases(seed: u64, n_problems: usize, n_lambdas: usize) -> Result<Vec<SuiteCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for _ in 0..n_problems {
        let problem = random_problem(&mut rng)?;
        let c = random_matrix(&mut rng);
        let f = FunctionPair::parse(
            &format!("1 + {:.4}*x", rng.gen_range(-1.0..1.0)),
            &format!("cos({:.4}*x)", rng.gen_range(0.5..3.0)),
        )?;
        let mut drawn = 0;
        let mut attempts = 0;
        while drawn < n_lambdas {
            attempts += 1;
            if attempts > 50 * n_lambdas {
                return Err(Error::Invalid("could not draw regular spectral points".into()));
            }
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let lambda = Complex64::new(rng.gen_range(-5.0..30.0), sign * rng.gen_range(0.5..5.0));
            let lambda0 = Complex64::new(rng.gen_range(-5.0..30.0), -sign * rng.gen_range(0.5..5.0));
            let regular = [problem.b(), c, problem.b() + c].iter().all(|&m| {
                let p = problem.with_b(m);
                m_matrix(&p, lambda).is_ok() && m_matrix(&p, lambda0).is_ok()
            });
            if regular {
                cases.push(SuiteCase {
                    problem: problem.clone(),
                    c,
                    lambda,
                    lambda0,
                    f: f.clone(),
                });
                drawn += 1;
            }
        }
    }
    Ok(cases)
}

/// Runs every checker on every case, in parallel, with results in case order.
pub fn run_suite(cases: &[SuiteCase]) -> Result<Vec<IdentityReport>> {
    let per_case = cases
        .par_iter()
        .map(|case| {
            let p = &case.problem;
            let b = p.b();
            let e = BoundaryVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.5, -0.25));
            Ok(vec![
                check_m_transform(p, b, case.c, case.lambda)?,
                check_krein(p, b, case.c, case.lambda, &case.f)?,
                check_resolvent_rep(p, b, case.lambda, case.lambda0, &e)?,
                check_solution_analyticity(p, b, case.lambda, case.lambda0, &e)?,
                check_adjoint_identities(p, b, case.lambda, &e, &case.f)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_case.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn neumann() -> HainLustProblem {
        HainLustProblem::parse_with_angles("0", "0", "0", PI / 2.0, PI / 2.0).unwrap()
    }

    fn perturbation() -> Mat2 {
        Mat2::new(c(0.3, 0.0), c(0.1, 0.0), c(-0.2, 0.0), c(0.5, 0.0))
    }

    #[test]
    fn zero_perturbation_is_exact() {
        let p = neumann();
        let r = check_m_transform(&p, p.b(), Mat2::ZERO, c(2.0, 1.0)).unwrap();
        assert_eq!(r.absolute, 0.0);
    }

    #[test]
    fn transform_law_free_problem() {
        let p = neumann();
        let r = check_m_transform(&p, p.b(), perturbation(), c(2.0, 1.0)).unwrap();
        assert!(r.passes(1e-8), "{r:?}");
        let r = check_m_transform(&p, p.b(), -p.b(), c(2.0, 1.0)).unwrap();
        assert!(r.passes(1e-8), "{r:?}");
    }

    #[test]
    fn transform_difference_is_linear_in_c() {
        // M_{B+C} - M_B = M_{B+C} C M_B is first order in C
        let p = neumann();
        let lam = c(2.0, 1.0);
        let mb = m_matrix(&p, lam).unwrap().m;
        let diffs: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|s| {
                let cc = perturbation().scale(c(*s, 0.0));
                (m_matrix(&p.with_b(p.b() + cc), lam).unwrap().m - mb).norm()
            })
            .collect();
        for w in diffs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
        }
    }

    #[test]
    fn resolvent_representation() {
        let p = neumann();
        for e in basis() {
            let r = check_resolvent_rep(&p, p.b(), c(2.0, 1.0), c(-1.0, 0.0), &e).unwrap();
            assert!(r.passes(1e-7), "{r:?}");
            let r = check_resolvent_rep(&p, p.b(), c(-1.0, 0.0), c(-1.0, 0.0), &e).unwrap();
            assert!(r.absolute < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn krein_examples() {
        let p = HainLustProblem::parse_with_angles("x", "0.2", "2 + x", PI / 2.0, PI / 2.0).unwrap();
        let cc = Mat2::diag(c(0.4, 0.0), c(0.4, 0.0));
        let f = FunctionPair::parse("1", "x").unwrap();
        let r = check_krein(&p, p.b(), cc, c(5.0, 2.0), &f).unwrap();
        assert!(r.relative < 1e-6, "{r:?}");
        let zero = check_krein(&p, p.b(), cc, c(5.0, 2.0), &FunctionPair::zero()).unwrap();
        assert!(zero.absolute < 1e-15);
        let free = neumann();
        let r = check_krein(&free, Mat2::ZERO, Mat2::ZERO, c(2.0, 1.0), &f).unwrap();
        assert!(r.absolute < 1e-9, "{r:?}");
    }

    #[test]
    fn adjoint_examples() {
        let b = Mat2::diag(c(0.2, 0.0), c(0.0, 0.1));
        let p = HainLustProblem::parse_with_matrix("x + 0.5*i", "0", "0", b).unwrap();
        let w = FunctionPair::parse("1", "1").unwrap();
        let seed = BoundaryVector::basis(0);
        let r = check_adjoint_identities(&p, b, c(3.0, 1.0), &seed, &w).unwrap();
        assert!(r.passes(1e-6), "{r:?}");
        let r0 = check_adjoint_identities(&p, b, c(3.0, 1.0), &BoundaryVector::ZERO, &w).unwrap();
        assert!(r0.parts[1].absolute < 1e-15);

        let h = Mat2::new(c(0.5, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(-0.3, 0.0));
        let real = HainLustProblem::parse_with_matrix("x", "0.5", "3", h).unwrap();
        let r = check_adjoint_identities(&real, h, c(1.3, 0.0), &seed, &w).unwrap();
        assert!(r.parts[0].acceptance() < 1e-8, "{r:?}");
    }

    #[test]
    fn solution_analyticityity() {
        let p = neumann();
        let f = BoundaryVector::new(c(1.0, 0.0), c(1.0, 0.0));
        let r = check_solution_analyticity(&p, p.b(), c(-1.0, 0.0), c(-1.0, 0.0), &f).unwrap();
        assert!(r.absolute < 1e-12);
        let r = check_solution_analyticity(&p, p.b(), c(-2.0, 0.0), c(-1.0, 0.0), &f).unwrap();
        assert!(r.passes(1e-8), "{r:?}");
        let r = check_solution_analyticity(&p, p.b(), c(-1.0, 3.0), c(-1.0, 0.0), &f).unwrap();
        assert!(r.passes(1e-7), "{r:?}");
    }

    #[test]
    fn seed_choice_does_not_matter() {
        let p = neumann();
        for e in basis() {
            let r = check_solution_analyticity(&p, p.b(), c(1.0, 2.0), c(-1.0, 0.0), &e).unwrap();
            assert!(r.absolute < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn suite_is_reproducible() {
        let a = random_cases(7, 2, 1).unwrap();
        let b = random_cases(7, 2, 1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.lambda, y.lambda);
            assert_eq!(x.problem.fingerprint(), y.problem.fingerprint());
        }
    }
}
