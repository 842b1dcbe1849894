use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

type Eval = dyn Fn(f64) -> Result<Complex64> + Send + Sync;

/// A complex function on [0, 1] with the abscissae where it may jump.
#[derive(Clone)]
pub struct ScalarFn {
    f: Arc<Eval>,
    pub jumps: Vec<f64>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn").field("jumps", &self.jumps).finish()
    }
}

impl ScalarFn {
    pub fn new(f: impl Fn(f64) -> Result<Complex64> + Send + Sync + 'static, jumps: Vec<f64>) -> Self {
        ScalarFn { f: Arc::new(f), jumps }
    }

    pub fn zero() -> Self {
        ScalarFn::new(|_| Ok(Complex64::new(0.0, 0.0)), Vec::new())
    }

    pub fn from_expr(e: crate::coeffexpr::CoefficientExpr) -> Self {
        let jumps = e.jump_points().to_vec();
        ScalarFn::new(move |x| e.eval(x), jumps)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        (self.f)(x)
    }
}

/// Effective potential `p` of `y'' = p(x) y - r(x)`, plus breakpoints the
/// integrator must step onto exactly.
#[derive(Clone)]
pub struct OdeSystem {
    pub potential: ScalarFn,
    pub breakpoints: Vec<f64>,
    pub lambda: Complex64,
    pub fingerprint: String,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeSettings {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Step {
    xa: f64,
    xb: f64,
    /// Interleaved (y, y') per column.
    ya: Vec<Complex64>,
    yb: Vec<Complex64>,
    /// Interleaved (y', y'') per column, evaluated on this step's side of any jump.
    ka: Vec<Complex64>,
    kb: Vec<Complex64>,
}

/// Dense-output solution of several columns sharing one step sequence.
pub struct OdeSolution {
    steps: Vec<Step>,
    columns: usize,
    system: OdeSystem,
    sources: Vec<Option<ScalarFn>>,
}

impl fmt::Debug for OdeSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSolution")
            .field("steps", &self.steps.len())
            .field("columns", &self.columns)
            .field("lambda", &self.system.lambda)
            .finish()
    }
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Rhs<'a> {
    system: &'a OdeSystem,
    sources: &'a [Option<ScalarFn>],
    lo: f64,
    hi: f64,
    nudge_lo: bool,
    nudge_hi: bool,
}

impl Rhs<'_> {
    fn eval(&self, x: f64, y: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        // coefficients at an interior breakpoint are taken from this panel's side
        let eta = (1e-13f64).min(0.25 * (self.hi - self.lo));
        let mut xe = x;
        if self.nudge_lo && xe <= self.lo {
            xe = self.lo + eta;
        }
        if self.nudge_hi && xe >= self.hi {
            xe = self.hi - eta;
        }
        let p = self.system.potential.eval(xe)?;
        for (j, src) in self.sources.iter().enumerate() {
            let r = match src {
                Some(s) => s.eval(xe)?,
                None => Complex64::new(0.0, 0.0),
            };
            out[2 * j] = y[2 * j + 1];
            out[2 * j + 1] = p * y[2 * j] - r;
        }
        Ok(())
    }
}

/// Integrates every column `(y(0), y'(0), source)` over [0, 1].
pub fn integrate(
    system: &OdeSystem,
    columns: &[(Complex64, Complex64, Option<ScalarFn>)],
    settings: &OdeSettings,
) -> Result<OdeSolution> {
    let m = columns.len();
    let n = 2 * m;
    let sources: Vec<Option<ScalarFn>> = columns.iter().map(|c| c.2.clone()).collect();
    let mut panels: Vec<f64> = system
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| b > 0.0 && b < 1.0)
        .collect();
    for s in sources.iter().flatten() {
        panels.extend(s.jumps.iter().copied().filter(|&b| b > 0.0 && b < 1.0));
    }
    panels.push(0.0);
    panels.push(1.0);
    panels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    panels.dedup();

    let mut y: Vec<Complex64> = columns.iter().flat_map(|c| [c.0, c.1]).collect();
    let mut steps = Vec::new();
    let mut h = 0.01f64;
    let mut total = 0usize;

    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut ynew = vec![Complex64::new(0.0, 0.0); n];

    for w in panels.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let rhs = Rhs {
            system,
            sources: &sources,
            lo,
            hi,
            nudge_lo: lo > 0.0,
            nudge_hi: hi < 1.0,
        };
        let mut x = lo;
        h = h.min(hi - lo);
        rhs.eval(x, &y, &mut k[0])?;
        let mut last_rejected = false;
        while x < hi {
            total += 1;
            if total > settings.max_steps {
                return Err(Error::StepUnderflow { x, h });
            }
            let mut landing = false;
            if x + h >= hi || hi - (x + h) < 1e-12 * (hi - lo) {
                h = hi - x;
                landing = true;
            }
            if h < 1e-13 * x.abs().max(1.0) {
                return Err(Error::StepUnderflow { x, h });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (r, a) in A[s].iter().take(s).enumerate() {
                        if *a != 0.0 {
                            acc += k[r][i] * (h * a);
                        }
                    }
                    stage[i] = acc;
                }
                let xs = if landing && C[s] == 1.0 { hi } else { x + C[s] * h };
                rhs.eval(xs, &stage, &mut k[s])?;
                if s == 6 {
                    ynew.copy_from_slice(&stage);
                }
            }
            let mut err = 0.0;
            for i in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (s, coeff) in E.iter().enumerate() {
                    if *coeff != 0.0 {
                        e += k[s][i] * coeff;
                    }
                }
                e *= h;
                let sc = settings.atol + settings.rtol * y[i].norm().max(ynew[i].norm());
                err += (e.norm() / sc).powi(2);
            }
            err = (err / n as f64).sqrt();
            if !err.is_finite() {
                h *= 0.1;
                last_rejected = true;
                continue;
            }
            if err <= 1.0 {
                let xb = if landing { hi } else { x + h };
                steps.push(Step {
                    xa: x,
                    xb,
                    ya: y.clone(),
                    yb: ynew.clone(),
                    ka: k[0].clone(),
                    kb: k[6].clone(),
                });
                y.copy_from_slice(&ynew);
                let kb = k[6].clone();
                k[0] = kb;
                x = xb;
                let fac_max = if last_rejected { 1.0 } else { 5.0 };
                let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, fac_max);
                h *= fac;
                last_rejected = false;
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                h *= fac;
                last_rejected = true;
            }
        }
    }

    Ok(OdeSolution {
        steps,
        columns: m,
        system: system.clone(),
        sources,
    })
}

impl OdeSolution {
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn lambda(&self) -> Complex64 {
        self.system.lambda
    }

    pub fn fingerprint(&self) -> &str {
        &self.system.fingerprint
    }

    /// Breakpoints of the coefficients and of every source term.
    pub fn jumps(&self) -> Vec<f64> {
        let mut j = self.system.breakpoints.clone();
        for s in self.sources.iter().flatten() {
            j.extend_from_slice(&s.jumps);
        }
        j.sort_by(|a, b| a.partial_cmp(b).unwrap());
        j.dedup();
        j
    }

    /// Step endpoints `(x_a, x_b)` in order.
    pub fn mesh(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.steps.iter().map(|s| (s.xa, s.xb))
    }

    /// Stored state `(y, y')` of `col` at the left end of step `i`, or at
    /// x = 1 when `i` equals the step count.
    pub fn node_state(&self, i: usize, col: usize) -> (f64, Complex64, Complex64) {
        if i == self.steps.len() {
            let s = self.steps.last().unwrap();
            (s.xb, s.yb[2 * col], s.yb[2 * col + 1])
        } else {
            let s = &self.steps[i];
            (s.xa, s.ya[2 * col], s.ya[2 * col + 1])
        }
    }

    /// `(y(x), y'(x))` for column `col` from the quintic Hermite interpolant
    /// built on `y, y', y''` at both ends of the enclosing step.
    pub fn eval(&self, col: usize, x: f64) -> (Complex64, Complex64) {
        let idx = self.steps.partition_point(|s| s.xb < x).min(self.steps.len() - 1);
        let s = &self.steps[idx];
        let h = s.xb - s.xa;
        let t = (x - s.xa) / h;
        let (y0, d0, dd0) = (s.ya[2 * col], s.ka[2 * col], s.ka[2 * col + 1]);
        let (y1, d1, dd1) = (s.yb[2 * col], s.kb[2 * col], s.kb[2 * col + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 1.0 - h0;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
        let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let g5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        let y = y0 * h0 + d0 * (h * h1) + dd0 * (h * h * h2) + y1 * h3 + d1 * (h * h4) + dd1 * (h * h * h5);
        let dy = (y0 - y1) * (g0 / h) + d0 * g1 + dd0 * (h * g2) + d1 * g4 + dd1 * (h * g5);
        (y, dy)
    }

    /// `y''(x)` from the equation itself.
    pub fn second_derivative(&self, col: usize, x: f64, y: Complex64) -> Result<Complex64> {
        let p = self.system.potential.eval(x)?;
        let r = match &self.sources[col] {
            Some(s) => s.eval(x)?,
            None => Complex64::new(0.0, 0.0),
        };
        Ok(p * y - r)
    }
}

/// One column of an [`OdeSolution`].
#[derive(Clone, Debug)]
pub struct SolutionFn {
    sol: Arc<OdeSolution>,
    col: usize,
}

impl SolutionFn {
    pub fn new(sol: Arc<OdeSolution>, col: usize) -> Self {
        assert!(col < sol.columns);
        SolutionFn { sol, col }
    }

    pub fn solution(&self) -> &Arc<OdeSolution> {
        &self.sol
    }

    pub fn column(&self) -> usize {
        self.col
    }

    pub fn lambda(&self) -> Complex64 {
        self.sol.lambda()
    }

    /// `(y(x), y'(x))`.
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        self.sol.eval(self.col, x)
    }

    /// `(y, y', y'')` at x.
    pub fn eval3(&self, x: f64) -> Result<[Complex64; 3]> {
        let (y, dy) = self.eval(x);
        let ddy = self.sol.second_derivative(self.col, x, y)?;
        Ok([y, dy, ddy])
    }

    /// Stored `(y, y')` at x = 0.
    pub fn at_zero(&self) -> (Complex64, Complex64) {
        let (_, y, dy) = self.sol.node_state(0, self.col);
        (y, dy)
    }

    /// Stored `(y, y')` at x = 1.
    pub fn at_one(&self) -> (Complex64, Complex64) {
        let (_, y, dy) = self.sol.node_state(self.sol.step_count(), self.col);
        (y, dy)
    }
}
