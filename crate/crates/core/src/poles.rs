//! Contour-integral analysis of poles: Laurent coefficients on circles,
//! spectral projection and eigennilpotent data of the resolvent,
//! eigenvalue search by the argument principle, and comparison of the
//! pole orders of `M` and of the resolvent.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hainlust::{
    boundary_determinant, m_matrix, pair_inner_product_with, FunctionPair, HainLustProblem, Resolvent,
};
use crate::linalg::Mat2;
use crate::speclimits::{essential_range, in_ranges, validate_w_gap};

/// Successive contour estimates closer than this are converged.
pub const CONTOUR_TOL: f64 = 1e-9;
/// Default order threshold relative to the largest Laurent coefficient.
pub const ORDER_TOL: f64 = 1e-6;
const NODE_CAP: usize = 1024;
const SPLIT_FRACTION: f64 = 0.4871;
const MAX_DEPTH: usize = 60;
const NEWTON_TOL: f64 = 1e-10;

/// A positively oriented circle sampled at `nodes` equally spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        let c = Contour { center, radius, nodes };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Invalid(format!(
                "contour radius must be positive, got {}",
                self.radius
            )));
        }
        if self.nodes < 16 || !self.nodes.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "contour node count must be even and at least 16, got {}",
                self.nodes
            )));
        }
        Ok(())
    }

    fn offset(&self, j: usize, n: usize) -> Complex64 {
        Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / n as f64)
    }
}

/// Laurent coefficients `L_{-p}`, `p = 0..=max_order`, of a vector-valued
/// function around the contour center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentData {
    pub center: Complex64,
    /// `coefficients[p]` is `L_{-p}`.
    pub coefficients: Vec<Vec<Complex64>>,
    /// Change of each coefficient under the last node doubling.
    pub errors: Vec<f64>,
    pub order: usize,
    pub nodes: usize,
}

impl LaurentData {
    /// Euclidean norm of `L_{-p}`.
    pub fn norm(&self, p: usize) -> f64 {
        vec_norm(&self.coefficients[p])
    }

    /// Re-reads the order with another relative threshold.
    pub fn order_with(&self, tol: f64) -> usize {
        pole_order(&self.coefficients, tol)
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn pole_order(coefficients: &[Vec<Complex64>], tol: f64) -> usize {
    let largest = coefficients.iter().map(|c| vec_norm(c)).fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    (1..coefficients.len())
        .rev()
        .find(|&p| vec_norm(&coefficients[p]) > tol * largest)
        .unwrap_or(0)
}

/// `L_{-p} = (1/2 pi i) \oint (zeta - mu)^{p-1} F(zeta) dzeta` by the
/// trapezoidal rule, doubling the node count (reusing earlier samples)
/// until successive estimates agree.
pub fn laurent_coefficients<F>(sampler: F, contour: &Contour, max_order: usize) -> Result<LaurentData>
where
    F: Fn(Complex64) -> Result<Vec<Complex64>> + Sync,
{
    contour.validate()?;
    let sample = |offsets: Vec<Complex64>| -> Result<Vec<Vec<Complex64>>> {
        offsets
            .par_iter()
            .map(|&d| {
                let node = contour.center + d;
                let v = sampler(node).map_err(|e| Error::SamplerFailure {
                    node,
                    source: Box::new(e),
                })?;
                if v.iter().any(|z| !z.is_finite()) {
                    return Err(Error::SamplerFailure {
                        node,
                        source: Box::new(Error::Invalid("non-finite sample".into())),
                    });
                }
                Ok(v)
            })
            .collect()
    };
    let estimate = |offsets: &[Complex64], values: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        let n = offsets.len() as f64;
        let width = values[0].len();
        (0..=max_order)
            .map(|p| {
                let mut acc = vec![Complex64::new(0.0, 0.0); width];
                for (d, v) in offsets.iter().zip(values) {
                    let w = d.powu(p as u32);
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += w * x;
                    }
                }
                acc.into_iter().map(|a| a / n).collect()
            })
            .collect()
    };

    let mut n = contour.nodes;
    let mut offsets: Vec<Complex64> = (0..n).map(|j| contour.offset(j, n)).collect();
    let mut values = sample(offsets.clone())?;
    let mut current = estimate(&offsets, &values);
    loop {
        let fresh: Vec<Complex64> = (0..n).map(|j| contour.offset(2 * j + 1, 2 * n)).collect();
        let fresh_values = sample(fresh.clone())?;
        let mut merged_offsets = Vec::with_capacity(2 * n);
        let mut merged_values = Vec::with_capacity(2 * n);
        for j in 0..n {
            merged_offsets.push(offsets[j]);
            merged_values.push(values[j].clone());
            merged_offsets.push(fresh[j]);
            merged_values.push(fresh_values[j].clone());
        }
        offsets = merged_offsets;
        values = merged_values;
        n *= 2;
        let next = estimate(&offsets, &values);
        let errors: Vec<f64> = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
            .collect();
        let change = errors.iter().cloned().fold(0.0, f64::max);
        let scale = next.iter().map(|c| vec_norm(c)).fold(1.0, f64::max);
        current = next;
        if change < CONTOUR_TOL * scale {
            return Ok(LaurentData {
                center: contour.center,
                order: pole_order(&current, ORDER_TOL),
                coefficients: current,
                errors,
                nodes: n,
            });
        }
        if 2 * n > NODE_CAP {
            return Err(Error::ContourNonConvergence { nodes: n, change });
        }
    }
}

/// Contour data of `<R(zeta) f, g>` with `R(zeta) = (zeta - A_B)^{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    /// `<P f, g>`.
    pub projection: Complex64,
    /// `<D^n f, g>` for `n = 1..=max_power`.
    pub nilpotent: Vec<Complex64>,
    /// `<S f, g>`, the reduced resolvent at the center.
    pub reduced: Complex64,
    pub laurent: LaurentData,
}

/// `<P f, g>`, `<D^n f, g>` and `<S f, g>` from the Laurent coefficients of
/// `<(zeta - A_B)^{-1} f, g>` around the contour center.
pub fn resolvent_spectral_data(
    problem: &HainLustProblem,
    b: Mat2,
    contour: &Contour,
    f: &FunctionPair,
    g: &FunctionPair,
    max_power: usize,
) -> Result<SpectralData> {
    let pb = problem.with_b(b);
    let opts = pb.settings().quad();
    let sampler = |zeta: Complex64| -> Result<Vec<Complex64>> {
        let r = Resolvent::new(&pb, zeta)?.apply(f)?;
        Ok(vec![-pair_inner_product_with(&r, g, &opts)?])
    };
    let laurent = laurent_coefficients(sampler, contour, max_power + 1)?;
    Ok(SpectralData {
        projection: laurent.coefficients[1][0],
        nilpotent: (1..=max_power).map(|n| laurent.coefficients[n + 1][0]).collect(),
        reduced: -laurent.coefficients[0][0],
        laurent,
    })
}

/// Axis-aligned rectangle `[re_min, re_max] x [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Region {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.re_min < self.re_max && self.im_min < self.im_max) {
            return Err(Error::Invalid(
                "region must have re_min < re_max and im_min < im_max".into(),
            ));
        }
        Ok(())
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Splits the longer side off-center.
    fn split(&self) -> (Region, Region) {
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let m = self.re_min + SPLIT_FRACTION * (self.re_max - self.re_min);
            (Region { re_max: m, ..*self }, Region { re_min: m, ..*self })
        } else {
            let m = self.im_min + SPLIT_FRACTION * (self.im_max - self.im_min);
            (Region { im_max: m, ..*self }, Region { im_min: m, ..*self })
        }
    }

    /// The four quadrants around the off-center split point.
    pub fn quadrants(&self) -> [Region; 4] {
        let (l, r) = self.split_re();
        let (ll, lu) = l.split_im();
        let (rl, ru) = r.split_im();
        [ll, rl, ru, lu]
    }

    fn split_re(&self) -> (Region, Region) {
        let m = self.re_min + SPLIT_FRACTION * (self.re_max - self.re_min);
        (Region { re_max: m, ..*self }, Region { re_min: m, ..*self })
    }

    fn split_im(&self) -> (Region, Region) {
        let m = self.im_min + SPLIT_FRACTION * (self.im_max - self.im_min);
        (Region { im_max: m, ..*self }, Region { im_min: m, ..*self })
    }
}

/// An eigenvalue with the winding number of a small circle around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub lambda: Complex64,
    pub multiplicity: usize,
}

/// Accumulated change of `arg f` along the segment from `a` to `b`, refined
/// until every piece turns by less than pi/4 and agrees with its midpoint.
fn segment_arg<F>(f: &F, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    if fm == Complex64::new(0.0, 0.0) || depth > 50 {
        return Err(Error::ZeroOnBoundary { lambda: m });
    }
    let d1 = (fm / fa).arg();
    let d2 = (fb / fm).arg();
    let whole = (fb / fa).arg();
    let limit = PI / 4.0;
    if d1.abs() < limit && d2.abs() < limit && (d1 + d2 - whole).abs() < 1e-6 {
        return Ok(d1 + d2);
    }
    Ok(segment_arg(f, a, fa, m, fm, depth + 1)? + segment_arg(f, m, fm, b, fb, depth + 1)?)
}

/// Winding number of `f` around the closed polygon through `vertices`.
pub fn winding_number<F>(f: &F, vertices: &[Complex64], per_edge: usize) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let n = vertices.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|e| {
            let (a, b) = (vertices[e], vertices[(e + 1) % n]);
            let pts: Vec<Complex64> = (0..=per_edge)
                .map(|k| a + (b - a) * (k as f64 / per_edge as f64))
                .collect();
            let vals = pts.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
            if let Some(k) = vals.iter().position(|v| *v == Complex64::new(0.0, 0.0)) {
                return Err(Error::ZeroOnBoundary { lambda: pts[k] });
            }
            let mut acc = 0.0;
            for k in 0..per_edge {
                acc += segment_arg(f, pts[k], vals[k], pts[k + 1], vals[k + 1], 0)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

fn circle(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Newton iteration `z <- z - m d/d'` with a central-difference derivative.
fn newton<F>(f: &F, start: Complex64, m: usize) -> Result<Option<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut z = start;
    for _ in 0..60 {
        let h = 1e-6 * z.norm().max(1.0);
        let fz = f(z)?;
        if fz == Complex64::new(0.0, 0.0) {
            return Ok(Some(z));
        }
        let df = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if df == Complex64::new(0.0, 0.0) || !df.is_finite() {
            return Ok(None);
        }
        let step = fz / df * m as f64;
        z -= step;
        if !z.is_finite() {
            return Ok(None);
        }
        if step.norm() <= NEWTON_TOL * z.norm().max(1.0) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

fn check_essential_collision(problem: &HainLustProblem, region: &Region) -> Result<()> {
    if problem.w_expr().is_literal_zero() {
        return Ok(());
    }
    let eps = problem.settings().eps_sing;
    // complex u: any sampled value inside the region where w is active collides
    let samples = 1024;
    let mut real_u = true;
    for j in 0..=samples {
        let x = j as f64 / samples as f64;
        let u = problem.u(x)?;
        if u.im.abs() >= 1e-12 {
            real_u = false;
            if region.contains(u) && problem.w(x)?.norm() >= eps {
                return Err(Error::EssentialCollision { value: u.re });
            }
        }
    }
    if !real_u || region.im_min > 0.0 || region.im_max < 0.0 {
        return Ok(());
    }
    for (lo, hi) in essential_range(problem.u_expr(), samples)? {
        let (a, b) = (lo.max(region.re_min), hi.min(region.re_max));
        if a > b {
            continue;
        }
        let probes = if b > a { 33 } else { 1 };
        for k in 0..probes {
            let v = if probes == 1 {
                a
            } else {
                a + (b - a) * k as f64 / (probes - 1) as f64
            };
            if !in_ranges(&[(lo, hi)], v, 0.0) {
                continue;
            }
            if validate_w_gap(problem, v).is_err() {
                return Err(Error::EssentialCollision { value: v });
            }
        }
    }
    Ok(())
}

/// Zeros of `d(lambda) = det (G1 - B G2)[Y1 Y2]` in the region, by
/// recursive rectangle subdivision on the winding number, Newton
/// refinement, and the winding number of a small circle for multiplicity.
pub fn find_eigenvalues(problem: &HainLustProblem, b: Mat2, region: &Region) -> Result<Vec<Eigenvalue>> {
    region.validate()?;
    let pb = problem.with_b(b);
    check_essential_collision(&pb, region)?;
    let d = |z: Complex64| -> Result<Complex64> {
        boundary_determinant(&pb, z).map_err(|e| match e {
            Error::CoefficientSingularity { lambda, .. } => Error::EssentialCollision { value: lambda.re },
            other => other,
        })
    };
    let count = winding_number(&d, &region.corners(), 16)?;
    let mut found = search(&d, region, count, 0)?;
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    found.dedup_by(|a, b| (*a - *b).norm() < 1e-8 * a.norm().max(1.0));
    found
        .into_par_iter()
        .map(|z| {
            let r = 1e-3 * z.norm().max(1.0);
            let m = winding_number(&d, &circle(z, r, 16), 2)?;
            Ok(Eigenvalue {
                lambda: z,
                multiplicity: m.max(0) as usize,
            })
        })
        .collect()
}

fn search<F>(d: &F, region: &Region, count: i64, depth: usize) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if count <= 0 {
        return Ok(Vec::new());
    }
    if depth > MAX_DEPTH {
        return Err(Error::SubdivisionDepth {
            lambda: region.center(),
        });
    }
    let scale = region.center().norm().max(1.0);
    let tiny = region.diameter() < 1e-6 * scale;
    if count == 1 || tiny {
        if let Some(z) = newton(d, region.center(), count as usize)? {
            if region.contains(z) {
                return Ok(vec![z]);
            }
        }
        if tiny {
            return Ok(vec![region.center()]);
        }
    }
    let (lo, hi) = region.split();
    let (n_lo, n_hi) = rayon::join(
        || winding_number(d, &lo.corners(), 8),
        || winding_number(d, &hi.corners(), 8),
    );
    let (r_lo, r_hi) = rayon::join(|| search(d, &lo, n_lo?, depth + 1), || search(d, &hi, n_hi?, depth + 1));
    let mut out = r_lo?;
    out.extend(r_hi?);
    Ok(out)
}

/// Number of zeros of the boundary determinant inside the region.
pub fn count_eigenvalues(problem: &HainLustProblem, b: Mat2, region: &Region) -> Result<i64> {
    region.validate()?;
    let pb = problem.with_b(b);
    check_essential_collision(&pb, region)?;
    winding_number(&|z| boundary_determinant(&pb, z), &region.corners(), 16)
}

/// Pole orders of `M` and of the resolvent at the contour center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleOrders {
    pub m_order: usize,
    pub resolvent_order: usize,
    pub m_laurent: LaurentData,
    pub resolvent_laurent: LaurentData,
    pub probes: Vec<(String, String)>,
}

/// Probe pairs: three fixed polynomial/trigonometric seeds and one drawn
/// from `seed`.
pub fn probe_set(seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = |a: f64, b: f64| rng.gen_range(a..b);
    vec![
        ("1".into(), "0".into()),
        ("x^2".into(), "1".into()),
        ("cos(3.141592653589793*x)".into(), "sin(x)".into()),
        (
            format!("{:.6} + {:.6}*x + {:.6}*x^3", r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0)),
            format!("{:.6}*cos({:.6}*x)", r(-1.0, 1.0), r(0.5, 5.0)),
        ),
    ]
}

/// Orders of the poles of `M_B` and of `<(zeta - A_B)^{-1} f_i, f_j>` over
/// all probe pairs at the contour center.
pub fn pole_order_compare(problem: &HainLustProblem, b: Mat2, contour: &Contour, seed: u64) -> Result<PoleOrders> {
    let pb = problem.with_b(b);
    let max_order = 4;
    let m_laurent = laurent_coefficients(|z| Ok(m_matrix(&pb, z)?.m.entries().to_vec()), contour, max_order)?;
    let probes = probe_set(seed);
    let pairs = probes
        .iter()
        .map(|(y, z)| FunctionPair::parse(y, z))
        .collect::<Result<Vec<_>>>()?;
    let opts = pb.settings().quad();
    let resolvent_laurent = laurent_coefficients(
        |zeta| {
            let res = Resolvent::new(&pb, zeta)?;
            let mut out = Vec::with_capacity(pairs.len() * pairs.len());
            for f in &pairs {
                let r = res.apply(f)?;
                for g in &pairs {
                    out.push(-pair_inner_product_with(&r, g, &opts)?);
                }
            }
            Ok(out)
        },
        contour,
        max_order,
    )?;
    Ok(PoleOrders {
        m_order: m_laurent.order,
        resolvent_order: resolvent_laurent.order,
        m_laurent,
        resolvent_laurent,
        probes,
    })
}

/// Eigenvalues along a parameter family, with the smallest pairwise gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyStep {
    pub t: f64,
    pub eigenvalues: Vec<Eigenvalue>,
    pub min_gap: Option<f64>,
}

/// Tracks the eigenvalues in `region` along `family(t)`; used to drive two
/// eigenvalues towards each other and watch orders and multiplicities.
pub fn eigen_homotopy<F>(family: F, ts: &[f64], region: &Region) -> Result<Vec<HomotopyStep>>
where
    F: Fn(f64) -> Result<HainLustProblem> + Sync,
{
    ts.par_iter()
        .map(|&t| {
            let p = family(t)?;
            let eigenvalues = find_eigenvalues(&p, p.b(), region)?;
            let mut min_gap: Option<f64> = None;
            for i in 0..eigenvalues.len() {
                for j in i + 1..eigenvalues.len() {
                    let g = (eigenvalues[i].lambda - eigenvalues[j].lambda).norm();
                    min_gap = Some(min_gap.map_or(g, |m| m.min(g)));
                }
            }
            Ok(HomotopyStep {
                t,
                eigenvalues,
                min_gap,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cauchy_integrals() {
        let mu = c(0.3, -0.2);
        let contour = Contour::new(mu, 0.5, 16).unwrap();
        let l = laurent_coefficients(|z| Ok(vec![1.0 / (z - mu)]), &contour, 3).unwrap();
        assert_eq!(l.order, 1);
        assert!((l.coefficients[1][0] - c(1.0, 0.0)).norm() < 1e-14);
        let l = laurent_coefficients(|z| Ok(vec![(z - mu).powi(-2)]), &contour, 3).unwrap();
        assert_eq!(l.order, 2);
        assert!((l.coefficients[2][0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(l.coefficients[1][0].norm() < 1e-14);
        let l = laurent_coefficients(|z| Ok(vec![z.exp(), z * z]), &contour, 3).unwrap();
        assert_eq!(l.order, 0);
        for p in 1..=3 {
            assert!(l.norm(p) < 1e-10);
        }
        assert!((l.coefficients[0][0] - mu.exp()).norm() < 1e-12);
    }

    #[test]
    fn contour_validation() {
        assert!(Contour::new(c(0.0, 0.0), 1.0, 15).is_err());
        assert!(Contour::new(c(0.0, 0.0), 1.0, 18).is_ok());
        assert!(Contour::new(c(0.0, 0.0), 0.0, 16).is_err());
    }

    #[test]
    fn sampler_failure_names_node() {
        let contour = Contour::new(c(0.0, 0.0), 1.0, 16).unwrap();
        let err = laurent_coefficients(|_| Err(Error::Invalid("x".into())), &contour, 1).unwrap_err();
        assert!(matches!(err, Error::SamplerFailure { .. }));
    }

    #[test]
    fn winding_of_polynomial() {
        let f = |z: Complex64| Ok((z - 1.0) * (z - c(0.0, 0.5)) * (z + 3.0));
        let r = Region::new(-1.0, 2.0, -1.0, 1.0).unwrap();
        assert_eq!(winding_number(&f, &r.corners(), 8).unwrap(), 2);
        let quads: i64 = r
            .quadrants()
            .iter()
            .map(|q| winding_number(&f, &q.corners(), 8).unwrap())
            .sum();
        assert_eq!(quads, 2);
    }

    #[test]
    fn newton_finds_double_root_with_multiplicity() {
        let f = |z: Complex64| Ok((z - c(2.0, 0.0)).powi(2) * (z + 1.0));
        let z = newton(&f, c(2.3, 0.1), 2).unwrap().unwrap();
        assert!((z - c(2.0, 0.0)).norm() < 1e-8);
    }
}
