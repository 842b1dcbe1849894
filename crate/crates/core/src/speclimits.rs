//! Essential-spectrum experiments: the essential range of `u`, boundary
//! values `M(k +- i eps)` and `<(A_B - (k +- i eps))^{-1} f, g>` on a
//! geometric eps grid, Richardson extrapolation to eps -> 0, and the
//! Sokhotski-Plemelj value of the jump.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coeffexpr::CoefficientExpr;
use crate::error::{Error, Result};
use crate::hainlust::{l2_inner, m_matrix, FunctionPair, HainLustProblem, Resolvent};

const SCAN_CELLS: usize = 2048;
const ROOT_TOL: f64 = 1e-12;
const GAP_HALF_WIDTH: f64 = 1e-3;
const DERIVATIVE_STEP: f64 = 1e-6;

fn real_value(u: &CoefficientExpr, x: f64) -> Result<f64> {
    let v = u.eval(x)?;
    if v.im.abs() >= 1e-12 {
        return Err(Error::ComplexCoefficient { x, imag: v.im });
    }
    Ok(v.re)
}

/// Closed intervals covering the sampled values of a real `u`. Adjacent
/// samples inside one continuity panel contribute their hull; jump points
/// are sampled from both sides. Intervals closer than `1/samples` merge.
pub fn essential_range(u: &CoefficientExpr, samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples == 0 {
        return Err(Error::Invalid("essential_range needs at least one sample".into()));
    }
    let jumps = u.jump_points();
    let mut xs: Vec<f64> = (0..=samples).map(|j| j as f64 / samples as f64).collect();
    for &j in jumps {
        xs.push(j);
        xs.push(f64::from_bits(j.to_bits() - 1));
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let vals = xs.iter().map(|&x| real_value(u, x)).collect::<Result<Vec<f64>>>()?;

    let mut pieces: Vec<(f64, f64)> = vals.iter().map(|&v| (v, v)).collect();
    for i in 0..xs.len() - 1 {
        let crosses = jumps.iter().any(|&j| j > xs[i] && j <= xs[i + 1]);
        if !crosses {
            pieces.push((vals[i].min(vals[i + 1]), vals[i].max(vals[i + 1])));
        }
    }
    pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    let gap = 1.0 / samples as f64;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in pieces {
        match merged.last_mut() {
            Some(last) if lo - last.1 <= gap => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    Ok(merged)
}

/// True when `k` lies in one of the intervals, widened by `tol`.
pub fn in_ranges(ranges: &[(f64, f64)], k: f64, tol: f64) -> bool {
    ranges.iter().any(|&(lo, hi)| k >= lo - tol && k <= hi + tol)
}

/// All solutions of `u(x) = k` in [0, 1], located by bisection on sign
/// changes of `u - k` over a fine grid. Sign changes across a jump of `u`
/// that skips over `k` are not solutions and are dropped.
pub fn level_set(u: &CoefficientExpr, k: f64) -> Result<Vec<f64>> {
    let g = |x: f64| -> Result<f64> { Ok(real_value(u, x)? - k) };
    let scale = k.abs().max(1.0);
    let mut roots: Vec<f64> = Vec::new();
    let mut a = 0.0;
    let mut ga = g(a)?;
    if ga == 0.0 {
        roots.push(a);
    }
    for i in 1..=SCAN_CELLS {
        let b = i as f64 / SCAN_CELLS as f64;
        let gb = g(b)?;
        if gb == 0.0 {
            roots.push(b);
        } else if ga != 0.0 && ga.signum() != gb.signum() {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid)?;
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            let x0 = 0.5 * (lo + hi);
            let near = g(lo)?.abs().min(g(hi)?.abs());
            if near <= 1e-6 * scale {
                roots.push(x0);
            }
        }
        a = b;
        ga = gb;
    }
    roots.dedup_by(|p, q| (*p - *q).abs() < 1e-9);
    Ok(roots)
}

/// The unique solution of `u(x) = k`.
pub fn unique_level_point(u: &CoefficientExpr, k: f64) -> Result<f64> {
    let roots = level_set(u, k)?;
    if roots.len() != 1 {
        return Err(Error::RootCount { k, count: roots.len() });
    }
    Ok(roots[0])
}

/// Checks that `w` vanishes within 1e-3 of every solution of `u(x) = k`.
/// Nothing is required when `k` is outside the essential range of `u`.
pub fn validate_w_gap(problem: &HainLustProblem, k: f64) -> Result<()> {
    let u = problem.u_expr();
    let ranges = essential_range(u, 1024)?;
    if !in_ranges(&ranges, k, 0.0) {
        return Ok(());
    }
    let eps = problem.settings().eps_sing;
    for x0 in level_set(u, k)? {
        for j in 0..=40 {
            let x = x0 - GAP_HALF_WIDTH + 2.0 * GAP_HALF_WIDTH * j as f64 / 40.0;
            if !(0.0..=1.0).contains(&x) {
                continue;
            }
            if problem.w(x)?.norm() >= eps {
                return Err(Error::WGapViolation { x, k });
            }
        }
    }
    Ok(())
}

/// `eps_max, ..., eps_min`, geometric, `steps` points.
pub fn eps_grid(eps_max: f64, eps_min: f64, steps: usize) -> Result<Vec<f64>> {
    if !(eps_max > eps_min && eps_min > 0.0) {
        return Err(Error::Invalid(format!(
            "eps grid needs eps_max > eps_min > 0, got {eps_max} and {eps_min}"
        )));
    }
    if steps < 3 {
        return Err(Error::Invalid("eps grid needs at least 3 steps".into()));
    }
    let ratio = eps_min / eps_max;
    Ok((0..steps)
        .map(|i| eps_max * ratio.powf(i as f64 / (steps - 1) as f64))
        .collect())
}

/// Extrapolated value at eps = 0 and an error estimate, assuming
/// `v(eps) = L + c eps + O(eps^2)`. The limit is the least-squares line
/// through the three smallest eps; the estimate is its distance from the
/// two-point line through the two smallest.
pub fn richardson(eps: &[f64], values: &[Complex64]) -> (Complex64, f64) {
    let n = eps.len();
    assert!(n >= 3 && values.len() == n);
    let e = &eps[n - 3..];
    let v = &values[n - 3..];
    let me = e.iter().sum::<f64>() / 3.0;
    let mv = v.iter().sum::<Complex64>() / 3.0;
    let sxx: f64 = e.iter().map(|x| (x - me) * (x - me)).sum();
    let sxy: Complex64 = e.iter().zip(v).map(|(x, y)| (y - mv) * (x - me)).sum();
    let slope = sxy / sxx;
    let l3 = mv - slope * me;
    let (e1, e2) = (e[1], e[2]);
    let l2 = (v[2] * e1 - v[1] * e2) / (e1 - e2);
    (l3, (l3 - l2).norm())
}

/// Upper (`k + i eps`) and lower (`k - i eps`) values on an eps grid.
/// Matrix values are stored row-major as four components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitScan {
    pub k: f64,
    pub eps: Vec<f64>,
    pub upper: Vec<Vec<Complex64>>,
    pub lower: Vec<Vec<Complex64>>,
    pub upper_limit: Vec<Complex64>,
    pub lower_limit: Vec<Complex64>,
    pub upper_error: f64,
    pub lower_error: f64,
    /// `upper_limit - lower_limit`.
    pub jump: Vec<Complex64>,
    pub jump_error: f64,
    /// Euclidean norm of `jump`.
    pub norm_difference: f64,
    pub x0: Option<f64>,
    /// `2 pi i f2(x0) conj(g2(x0)) / |u'(x0)|`.
    pub plemelj: Option<Complex64>,
    /// `2 pi i f2(x0) g2(x0)`.
    pub literal: Option<Complex64>,
}

impl LimitScan {
    fn assemble(k: f64, eps: Vec<f64>, upper: Vec<Vec<Complex64>>, lower: Vec<Vec<Complex64>>) -> Self {
        let width = upper[0].len();
        let extrapolate = |side: &[Vec<Complex64>]| {
            let mut lim = Vec::with_capacity(width);
            let mut err: f64 = 0.0;
            for c in 0..width {
                let col: Vec<Complex64> = side.iter().map(|v| v[c]).collect();
                let (l, e) = richardson(&eps, &col);
                lim.push(l);
                err = err.max(e);
            }
            (lim, err)
        };
        let (upper_limit, upper_error) = extrapolate(&upper);
        let (lower_limit, lower_error) = extrapolate(&lower);
        let jump: Vec<Complex64> = upper_limit.iter().zip(&lower_limit).map(|(a, b)| a - b).collect();
        let norm_difference = jump.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        LimitScan {
            k,
            eps,
            upper,
            lower,
            upper_limit,
            lower_limit,
            upper_error,
            lower_error,
            jump,
            jump_error: upper_error + lower_error,
            norm_difference,
            x0: None,
            plemelj: None,
            literal: None,
        }
    }

    /// Norm of `upper - lower` at grid index `i`.
    pub fn difference_at(&self, i: usize) -> f64 {
        self.upper[i]
            .iter()
            .zip(&self.lower[i])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `M(k + i eps)` and `M(k - i eps)` over the grid.
pub fn m_limit_scan(problem: &HainLustProblem, k: f64, eps_max: f64, eps_min: f64, steps: usize) -> Result<LimitScan> {
    validate_w_gap(problem, k)?;
    let eps = eps_grid(eps_max, eps_min, steps)?;
    let rows = eps
        .par_iter()
        .map(|&e| {
            let up = m_matrix(problem, Complex64::new(k, e))?;
            let lo = m_matrix(problem, Complex64::new(k, -e))?;
            Ok((up.m.entries().to_vec(), lo.m.entries().to_vec()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (upper, lower) = rows.into_iter().unzip();
    Ok(LimitScan::assemble(k, eps, upper, lower))
}

/// `<(A_B - (k +- i eps))^{-1} f, g>` over the grid, with the Plemelj
/// reference value of the jump.
pub fn resolvent_limit_scan(
    problem: &HainLustProblem,
    k: f64,
    f: &FunctionPair,
    g: &FunctionPair,
    eps_max: f64,
    eps_min: f64,
    steps: usize,
) -> Result<LimitScan> {
    validate_w_gap(problem, k)?;
    let u = problem.u_expr();
    let x0 = unique_level_point(u, k)?;
    let eps = eps_grid(eps_max, eps_min, steps)?;
    let opts = problem.settings().quad();
    let pairing = |lambda: Complex64| -> Result<Complex64> {
        let r = Resolvent::new(problem, lambda)?.apply(f)?;
        let mut jumps = r.jumps();
        jumps.extend(g.jumps());
        jumps.push(x0);
        l2_inner((&r.y_fn(), r.z_fn()), (&g.y_fn(), g.z_fn()), &jumps, &opts)
    };
    let rows = eps
        .par_iter()
        .map(|&e| {
            Ok((
                vec![pairing(Complex64::new(k, e))?],
                vec![pairing(Complex64::new(k, -e))?],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (upper, lower) = rows.into_iter().unzip();
    let mut scan = LimitScan::assemble(k, eps, upper, lower);
    let f2 = |x: f64| f.z(x);
    let g2 = |x: f64| g.z(x);
    scan.x0 = Some(x0);
    scan.plemelj = Some(plemelj_at(&f2, &g2, u, x0)?);
    scan.literal = Some(2.0 * PI * Complex64::i() * f2(x0)? * g2(x0)?);
    Ok(scan)
}

fn derivative_at(u: &CoefficientExpr, x0: f64) -> Result<f64> {
    let h = DERIVATIVE_STEP;
    let (a, b) = ((x0 - h).max(0.0), (x0 + h).min(1.0));
    Ok((real_value(u, b)? - real_value(u, a)?) / (b - a))
}

fn plemelj_at(
    f2: &dyn Fn(f64) -> Result<Complex64>,
    g2: &dyn Fn(f64) -> Result<Complex64>,
    u: &CoefficientExpr,
    x0: f64,
) -> Result<Complex64> {
    let du = derivative_at(u, x0)?;
    if du.abs() <= 1e-8 {
        return Err(Error::VanishingDerivative { x0 });
    }
    Ok(2.0 * PI * Complex64::i() * f2(x0)? * g2(x0)?.conj() / du.abs())
}

/// `2 pi i f2(x0) conj(g2(x0)) / |u'(x0)|` at the unique `x0` with `u(x0) = k`.
pub fn plemelj_jump_oracle(
    f2: &CoefficientExpr,
    g2: &CoefficientExpr,
    u: &CoefficientExpr,
    k: f64,
) -> Result<Complex64> {
    let x0 = unique_level_point(u, k)?;
    plemelj_at(&|x| f2.eval(x), &|x| g2.eval(x), u, x0)
}

/// `2 pi i f2(x0) g2(x0)`: the jump without derivative factor or conjugate.
pub fn literal_jump(f2: &CoefficientExpr, g2: &CoefficientExpr, u: &CoefficientExpr, k: f64) -> Result<Complex64> {
    let x0 = unique_level_point(u, k)?;
    Ok(2.0 * PI * Complex64::i() * f2.eval(x0)? * g2.eval(x0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(s: &str) -> CoefficientExpr {
        s.parse().unwrap()
    }

    #[test]
    fn range_of_identity() {
        assert_eq!(essential_range(&expr("x"), 256).unwrap(), vec![(0.0, 1.0)]);
    }

    #[test]
    fn range_of_sine() {
        let n = 512;
        let r = essential_range(&expr("2 + sin(6.2831853*x)"), n).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].0 - 1.0).abs() < 1.0 / n as f64);
        assert!((r[0].1 - 3.0).abs() < 1.0 / n as f64);
    }

    #[test]
    fn range_of_step_is_two_points() {
        let r = essential_range(&expr("step(x-0.5)"), 256).unwrap();
        assert_eq!(r, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn complex_u_is_rejected() {
        assert!(matches!(
            essential_range(&expr("x + 0.1*i"), 16),
            Err(Error::ComplexCoefficient { .. })
        ));
    }

    #[test]
    fn level_points() {
        assert!((unique_level_point(&expr("x"), 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!((unique_level_point(&expr("x^3"), 0.2).unwrap() - 0.2f64.cbrt()).abs() < 1e-11);
        assert!(matches!(
            unique_level_point(&expr("4*x*(1-x)"), 0.5),
            Err(Error::RootCount { count: 2, .. })
        ));
        assert!(matches!(
            unique_level_point(&expr("x"), 2.0),
            Err(Error::RootCount { count: 0, .. })
        ));
        // a jump over k is not a solution
        assert!(level_set(&expr("step(x-0.5)"), 0.5).unwrap().is_empty());
    }

    #[test]
    fn richardson_exact_on_lines() {
        let eps = [0.4, 0.2, 0.1, 0.05];
        let v: Vec<Complex64> = eps.iter().map(|e| Complex64::new(1.0 + 3.0 * e, -2.0 * e)).collect();
        let (l, err) = richardson(&eps, &v);
        assert!((l - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(err < 1e-14);
    }

    #[test]
    fn plemelj_examples() {
        let i = Complex64::i();
        let v = plemelj_jump_oracle(&expr("1"), &expr("1"), &expr("x"), 0.5).unwrap();
        assert!((v - 2.0 * PI * i).norm() < 1e-8);
        let v = plemelj_jump_oracle(&expr("x-0.5"), &expr("1"), &expr("x"), 0.5).unwrap();
        assert!(v.norm() < 1e-15);
        let v = plemelj_jump_oracle(&expr("1"), &expr("1"), &expr("2*x"), 1.0).unwrap();
        assert!((v - PI * i).norm() < 1e-8);
        let lit = literal_jump(&expr("1"), &expr("1"), &expr("2*x"), 1.0).unwrap();
        assert!((lit - 2.0 * PI * i).norm() < 1e-12);
        assert!(matches!(
            plemelj_jump_oracle(&expr("1"), &expr("1"), &expr("(x-0.5)^3"), 0.0),
            Err(Error::VanishingDerivative { .. })
        ));
    }

    #[test]
    fn w_gap_validation() {
        let pi2 = PI / 2.0;
        let ok = HainLustProblem::parse_with_angles("0", "step(x-0.7)", "x", pi2, pi2).unwrap();
        assert!(validate_w_gap(&ok, 0.5).is_ok());
        let bad = HainLustProblem::parse_with_angles("0", "1", "x", pi2, pi2).unwrap();
        assert!(matches!(validate_w_gap(&bad, 0.5), Err(Error::WGapViolation { .. })));
        // outside the essential range nothing is required
        assert!(validate_w_gap(&bad, 3.0).is_ok());
    }

    #[test]
    fn grid_is_geometric_and_decreasing() {
        let g = eps_grid(1e-1, 1e-4, 13).unwrap();
        assert_eq!(g.len(), 13);
        assert!((g[0] - 1e-1).abs() < 1e-17 && (g[12] - 1e-4).abs() < 1e-18);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(eps_grid(1e-4, 1e-1, 13).is_err());
    }
}
