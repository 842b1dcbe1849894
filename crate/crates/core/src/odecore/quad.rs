use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol_abs: 1e-13,
            tol_rel: 1e-11,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions {
            tol_abs: tol,
            ..Default::default()
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return Err(Error::Invalid(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok(Panel {
        a,
        b,
        value,
        error: err,
    })
}

/// Adaptive integral over [0, 1]; panels never straddle a declared jump.
pub fn quad<F>(f: F, jumps: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    quad_interval(f, 0.0, 1.0, jumps, opts)
}

/// Globally adaptive Gauss-Kronrod integration over [a, b].
pub fn quad_interval<F>(f: F, a: f64, b: f64, jumps: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mut edges: Vec<f64> = jumps.iter().copied().filter(|&j| j > a && j < b).collect();
    edges.push(a);
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup();

    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    for w in edges.windows(2) {
        heap.push(kronrod(&f, w[0], w[1])?);
    }
    let mut count = heap.len();

    let totals = |heap: &BinaryHeap<Panel>, done: &[Panel]| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut e = 0.0;
        for p in heap.iter().chain(done.iter()) {
            v += p.value;
            e += p.error;
        }
        (v, e)
    };

    loop {
        let (value, error) = totals(&heap, &done);
        let target = opts.tol_abs.max(opts.tol_rel * value.norm());
        if error <= target || heap.is_empty() {
            // sum in abscissa order so the result does not depend on heap layout
            let mut all: Vec<Panel> = heap.into_iter().chain(done).collect();
            all.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = all.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
            let error = all.iter().map(|p| p.error).sum();
            return Ok(QuadResult {
                value,
                error,
                panels: count,
            });
        }
        if count + 1 > opts.max_panels {
            return Err(Error::QuadratureBudget {
                partial: value,
                estimate: error,
                panels: count,
            });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 {
            done.push(worst);
            continue;
        }
        heap.push(kronrod(&f, worst.a, mid)?);
        heap.push(kronrod(&f, mid, worst.b)?);
        count += 1;
    }
}
