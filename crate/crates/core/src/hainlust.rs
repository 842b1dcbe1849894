//! The Hain-Lust block operator
//!
//! ```text
//!     [ -d^2/dx^2 + q   w ]
//!     [       w         u ]
//! ```
//!
//! on H^2(0,1) x L^2(0,1), with boundary maps
//! `G1(y, z) = (-y'(1), y'(0))` and `G2(y, z) = (y(1), y(0))`. The extension
//! `A_B` is the restriction to `ker(G1 - B G2)` for a 2x2 complex `B`.
//!
//! Every computation is shooting-based: the kernel of `A~* - lambda` is
//! spanned by two solutions of the reduced scalar equation
//! `-y'' + (q - lambda) y + w^2/(lambda - u) y = 0`, and the second
//! component of each kernel element is `z = w y / (lambda - u)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffexpr::CoefficientExpr;
use crate::error::{Error, Result};
use crate::linalg::{BoundaryVector, Mat2};
use crate::odecore::{integrate, quad, OdeSettings, OdeSystem, QuadOptions, ScalarFn, SolutionFn};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Numerical settings shared by every operation on a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub rtol: f64,
    pub atol: f64,
    pub quad_tol: f64,
    pub quad_rel_tol: f64,
    pub panel_budget: usize,
    pub eps_sing: f64,
    pub condition_cap: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            rtol: 1e-10,
            atol: 1e-12,
            quad_tol: 1e-13,
            quad_rel_tol: 1e-11,
            panel_budget: 4000,
            eps_sing: 1e-10,
            condition_cap: 1e9,
        }
    }
}

impl SolverSettings {
    pub fn ode(&self) -> OdeSettings {
        OdeSettings {
            rtol: self.rtol,
            atol: self.atol,
            ..OdeSettings::default()
        }
    }

    pub fn quad(&self) -> QuadOptions {
        QuadOptions {
            tol_abs: self.quad_tol,
            tol_rel: self.quad_rel_tol,
            max_panels: self.panel_budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("quad_tol", self.quad_tol),
            ("eps_sing", self.eps_sing),
            ("condition_cap", self.condition_cap),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if self.quad_rel_tol.is_nan() || self.quad_rel_tol < 0.0 {
            return Err(Error::Invalid("solver.quad_rel_tol must be non-negative".into()));
        }
        if self.panel_budget == 0 {
            return Err(Error::Invalid("solver.panel_budget must be positive".into()));
        }
        Ok(())
    }
}

/// Coefficients `q, w, u` on [0, 1] together with the boundary parameter `B`.
#[derive(Clone)]
pub struct HainLustProblem {
    q: Arc<CoefficientExpr>,
    w: Arc<CoefficientExpr>,
    u: Arc<CoefficientExpr>,
    b: Mat2,
    angles: Option<(f64, f64)>,
    adjoint: bool,
    settings: SolverSettings,
}

impl fmt::Debug for HainLustProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fingerprint())
    }
}

fn cot(t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    // snap cot(pi/2) to an exact zero
    if c.abs() < 1e-15 {
        0.0
    } else {
        c / s
    }
}

impl HainLustProblem {
    /// `B = diag(cot beta, -cot alpha)`. Dirichlet angles (sin = 0) are rejected.
    pub fn from_angles(
        q: CoefficientExpr,
        w: CoefficientExpr,
        u: CoefficientExpr,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if alpha.sin().abs() < 1e-12 || beta.sin().abs() < 1e-12 {
            return Err(Error::Invalid(
                "boundary angles must satisfy sin(alpha) != 0 and sin(beta) != 0".into(),
            ));
        }
        let b = Mat2::diag(Complex64::new(cot(beta), 0.0), Complex64::new(-cot(alpha), 0.0));
        Ok(HainLustProblem {
            q: Arc::new(q),
            w: Arc::new(w),
            u: Arc::new(u),
            b,
            angles: Some((alpha, beta)),
            adjoint: false,
            settings: SolverSettings::default(),
        })
    }

    pub fn with_boundary_matrix(q: CoefficientExpr, w: CoefficientExpr, u: CoefficientExpr, b: Mat2) -> Self {
        HainLustProblem {
            q: Arc::new(q),
            w: Arc::new(w),
            u: Arc::new(u),
            b,
            angles: None,
            adjoint: false,
            settings: SolverSettings::default(),
        }
    }

    /// Parses the three coefficient sources; see [`Self::from_angles`].
    pub fn parse_with_angles(q: &str, w: &str, u: &str, alpha: f64, beta: f64) -> Result<Self> {
        Self::from_angles(q.parse()?, w.parse()?, u.parse()?, alpha, beta)
    }

    pub fn parse_with_matrix(q: &str, w: &str, u: &str, b: Mat2) -> Result<Self> {
        Ok(Self::with_boundary_matrix(q.parse()?, w.parse()?, u.parse()?, b))
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    /// Same coefficients, boundary parameter replaced by `b`.
    pub fn with_b(&self, b: Mat2) -> Self {
        let mut p = self.clone();
        if b != self.b {
            p.angles = None;
        }
        p.b = b;
        p
    }

    /// The adjoint problem: conjugated coefficients and `B*`.
    pub fn adjoint(&self) -> Self {
        let mut p = self.clone();
        p.adjoint = !self.adjoint;
        p.b = self.b.conj_transpose();
        p
    }

    pub fn is_adjoint(&self) -> bool {
        self.adjoint
    }

    pub fn b(&self) -> Mat2 {
        self.b
    }

    pub fn angles(&self) -> Option<(f64, f64)> {
        self.angles
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn q_expr(&self) -> &CoefficientExpr {
        &self.q
    }

    pub fn w_expr(&self) -> &CoefficientExpr {
        &self.w
    }

    pub fn u_expr(&self) -> &CoefficientExpr {
        &self.u
    }

    fn coef(&self, e: &CoefficientExpr, x: f64) -> Result<Complex64> {
        let v = e.eval(x)?;
        Ok(if self.adjoint { v.conj() } else { v })
    }

    pub fn q(&self, x: f64) -> Result<Complex64> {
        self.coef(&self.q, x)
    }

    pub fn w(&self, x: f64) -> Result<Complex64> {
        self.coef(&self.w, x)
    }

    pub fn u(&self, x: f64) -> Result<Complex64> {
        self.coef(&self.u, x)
    }

    /// Union of the jump abscissae of q, w and u.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = [&self.q, &self.w, &self.u]
            .iter()
            .flat_map(|e| e.jump_points().iter().copied())
            .collect();
        b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        b.dedup();
        b
    }

    pub fn fingerprint(&self) -> String {
        let b = self.b.entries();
        format!(
            "q={};w={};u={};B=[{},{};{},{}]{}",
            self.q.source(),
            self.w.source(),
            self.u.source(),
            b[0],
            b[1],
            b[2],
            b[3],
            if self.adjoint { ";adjoint" } else { "" }
        )
    }

    /// `w(x) / (lambda - u(x))`, zero where w vanishes.
    pub fn coupling(&self, x: f64, lambda: Complex64) -> Result<Complex64> {
        let w = self.w(x)?;
        if w.norm() < self.settings.eps_sing {
            return Ok(ZERO);
        }
        let d = lambda - self.u(x)?;
        if d.norm() <= self.settings.eps_sing {
            return Err(Error::CoefficientSingularity { x, lambda });
        }
        Ok(w / d)
    }

    /// Potential `p = q - lambda - w^2/(u - lambda)` of `y'' = p y - r`.
    pub fn potential(&self, lambda: Complex64) -> ScalarFn {
        let p = self.clone();
        ScalarFn::new(
            move |x| {
                let c = p.coupling(x, lambda)?;
                let w = if c == ZERO { ZERO } else { p.w(x)? };
                Ok(p.q(x)? - lambda + w * c)
            },
            self.breakpoints(),
        )
    }

    pub fn ode_system(&self, lambda: Complex64) -> OdeSystem {
        OdeSystem {
            potential: self.potential(lambda),
            breakpoints: self.breakpoints(),
            lambda,
            fingerprint: self.fingerprint(),
        }
    }
}

// ---------------------------------------------------------------------------
// Function pairs

type YEval = dyn Fn(f64) -> Result<[Complex64; 3]> + Send + Sync;

/// Boundary values `y(0), y'(0), y(1), y'(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Traces {
    pub y0: Complex64,
    pub dy0: Complex64,
    pub y1: Complex64,
    pub dy1: Complex64,
}

impl Traces {
    fn combine(terms: &[(Complex64, Traces)]) -> Traces {
        let mut t = Traces {
            y0: ZERO,
            dy0: ZERO,
            y1: ZERO,
            dy1: ZERO,
        };
        for (c, s) in terms {
            t.y0 += c * s.y0;
            t.dy0 += c * s.dy0;
            t.y1 += c * s.y1;
            t.dy1 += c * s.dy1;
        }
        t
    }
}

/// An element `(y, z)` of H^2(0,1) x L^2(0,1). `y` carries first and second
/// derivatives; `z` is only ever evaluated pointwise inside quadratures.
#[derive(Clone)]
pub struct FunctionPair {
    y: Arc<YEval>,
    z: ScalarFn,
    y_jumps: Vec<f64>,
    traces: Traces,
}

impl fmt::Debug for FunctionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionPair")
            .field("traces", &self.traces)
            .field("jumps", &self.jumps())
            .finish()
    }
}

impl FunctionPair {
    pub fn new(
        y: impl Fn(f64) -> Result<[Complex64; 3]> + Send + Sync + 'static,
        y_jumps: Vec<f64>,
        z: ScalarFn,
    ) -> Result<Self> {
        let a = y(0.0)?;
        let b = y(1.0)?;
        let traces = Traces {
            y0: a[0],
            dy0: a[1],
            y1: b[0],
            dy1: b[1],
        };
        Ok(FunctionPair {
            y: Arc::new(y),
            z,
            y_jumps,
            traces,
        })
    }

    pub fn zero() -> Self {
        FunctionPair {
            y: Arc::new(|_| Ok([ZERO; 3])),
            z: ScalarFn::zero(),
            y_jumps: Vec::new(),
            traces: Traces::combine(&[]),
        }
    }

    /// `y` and `z` from expressions; derivatives of `y` are exact.
    pub fn from_exprs(y: CoefficientExpr, z: CoefficientExpr) -> Result<Self> {
        let jumps = y.jump_points().to_vec();
        let y = Arc::new(y);
        FunctionPair::new(
            move |x| {
                let j = y.eval_jet(x)?;
                Ok([j.v, j.d1, j.d2])
            },
            jumps,
            ScalarFn::from_expr(z),
        )
    }

    pub fn parse(y: &str, z: &str) -> Result<Self> {
        Self::from_exprs(y.parse()?, z.parse()?)
    }

    /// Wraps a shooting solution; traces come from the stored end states.
    pub fn from_solution(y: SolutionFn, z: ScalarFn) -> Self {
        let (y0, dy0) = y.at_zero();
        let (y1, dy1) = y.at_one();
        let jumps = y.solution().jumps();
        FunctionPair {
            y: Arc::new(move |x| y.eval3(x)),
            z,
            y_jumps: jumps,
            traces: Traces { y0, dy0, y1, dy1 },
        }
    }

    /// `sum c_k P_k`.
    pub fn combine(terms: &[(Complex64, &FunctionPair)]) -> FunctionPair {
        let ys: Vec<(Complex64, Arc<YEval>)> = terms.iter().map(|(c, p)| (*c, p.y.clone())).collect();
        let zs: Vec<(Complex64, ScalarFn)> = terms.iter().map(|(c, p)| (*c, p.z.clone())).collect();
        let mut y_jumps: Vec<f64> = terms.iter().flat_map(|(_, p)| p.y_jumps.iter().copied()).collect();
        y_jumps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        y_jumps.dedup();
        let mut z_jumps: Vec<f64> = terms.iter().flat_map(|(_, p)| p.z.jumps.iter().copied()).collect();
        z_jumps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        z_jumps.dedup();
        let traces = Traces::combine(&terms.iter().map(|(c, p)| (*c, p.traces)).collect::<Vec<_>>());
        FunctionPair {
            y: Arc::new(move |x| {
                let mut acc = [ZERO; 3];
                for (c, f) in &ys {
                    let v = f(x)?;
                    for k in 0..3 {
                        acc[k] += c * v[k];
                    }
                }
                Ok(acc)
            }),
            z: ScalarFn::new(
                move |x| {
                    let mut acc = ZERO;
                    for (c, f) in &zs {
                        acc += c * f.eval(x)?;
                    }
                    Ok(acc)
                },
                z_jumps,
            ),
            y_jumps,
            traces,
        }
    }

    pub fn scale(&self, c: Complex64) -> FunctionPair {
        FunctionPair::combine(&[(c, self)])
    }

    pub fn add(&self, other: &FunctionPair) -> FunctionPair {
        let one = Complex64::new(1.0, 0.0);
        FunctionPair::combine(&[(one, self), (one, other)])
    }

    pub fn sub(&self, other: &FunctionPair) -> FunctionPair {
        let one = Complex64::new(1.0, 0.0);
        FunctionPair::combine(&[(one, self), (-one, other)])
    }

    /// `(y, y', y'')` at x.
    pub fn y3(&self, x: f64) -> Result<[Complex64; 3]> {
        (self.y)(x)
    }

    pub fn y(&self, x: f64) -> Result<Complex64> {
        Ok((self.y)(x)?[0])
    }

    pub fn z(&self, x: f64) -> Result<Complex64> {
        self.z.eval(x)
    }

    pub fn z_fn(&self) -> &ScalarFn {
        &self.z
    }

    /// `y` as a scalar function (drops derivative data).
    pub fn y_fn(&self) -> ScalarFn {
        let y = self.y.clone();
        ScalarFn::new(move |x| Ok(y(x)?[0]), self.y_jumps.clone())
    }

    pub fn traces(&self) -> Traces {
        self.traces
    }

    /// `(-y'(1), y'(0))`.
    pub fn gamma1(&self) -> BoundaryVector {
        BoundaryVector::new(-self.traces.dy1, self.traces.dy0)
    }

    /// `(y(1), y(0))`.
    pub fn gamma2(&self) -> BoundaryVector {
        BoundaryVector::new(self.traces.y1, self.traces.y0)
    }

    /// `(G1 - B G2)` applied to this pair.
    pub fn boundary_residual(&self, b: &Mat2) -> BoundaryVector {
        self.gamma1() - b.apply(&self.gamma2())
    }

    /// Union of the jump abscissae of both components.
    pub fn jumps(&self) -> Vec<f64> {
        let mut j = self.y_jumps.clone();
        j.extend_from_slice(&self.z.jumps);
        j.sort_by(|a, b| a.partial_cmp(b).unwrap());
        j.dedup();
        j
    }
}

/// `int_0^1 y_U conj(y_V) + z_U conj(z_V)`.
pub fn pair_inner_product(u: &FunctionPair, v: &FunctionPair) -> Result<Complex64> {
    pair_inner_product_with(u, v, &QuadOptions::default())
}

pub fn pair_inner_product_with(u: &FunctionPair, v: &FunctionPair, opts: &QuadOptions) -> Result<Complex64> {
    let mut jumps = u.jumps();
    jumps.extend(v.jumps());
    l2_inner((&u.y_fn(), &u.z), (&v.y_fn(), &v.z), &jumps, opts)
}

/// Inner product of two-component L^2 functions given as scalar pieces.
pub fn l2_inner(
    a: (&ScalarFn, &ScalarFn),
    b: (&ScalarFn, &ScalarFn),
    extra_jumps: &[f64],
    opts: &QuadOptions,
) -> Result<Complex64> {
    let mut jumps: Vec<f64> = extra_jumps.to_vec();
    for f in [a.0, a.1, b.0, b.1] {
        jumps.extend_from_slice(&f.jumps);
    }
    jumps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    jumps.dedup();
    let r = quad(
        |x| Ok(a.0.eval(x)? * b.0.eval(x)?.conj() + a.1.eval(x)? * b.1.eval(x)?.conj()),
        &jumps,
        opts,
    )?;
    Ok(r.value)
}

/// L^2 norm of a pair.
pub fn pair_norm(u: &FunctionPair, opts: &QuadOptions) -> Result<f64> {
    Ok(pair_inner_product_with(u, u, opts)?.re.max(0.0).sqrt())
}

/// L^2 distance between two pairs.
pub fn pair_distance(u: &FunctionPair, v: &FunctionPair, opts: &QuadOptions) -> Result<f64> {
    pair_norm(&u.sub(v), opts)
}

/// Image of `(y, z)` under the maximal operator of `problem`:
/// `(-y'' + q y + w z, w y + u z)`, as two scalar functions.
pub fn apply_maximal(problem: &HainLustProblem, f: &FunctionPair) -> (ScalarFn, ScalarFn) {
    let jumps = {
        let mut j = f.jumps();
        j.extend(problem.breakpoints());
        j
    };
    let (p1, f1) = (problem.clone(), f.clone());
    let first = ScalarFn::new(
        move |x| {
            let [y, _, ddy] = f1.y3(x)?;
            Ok(-ddy + p1.q(x)? * y + p1.w(x)? * f1.z(x)?)
        },
        jumps.clone(),
    );
    let (p2, f2) = (problem.clone(), f.clone());
    let second = ScalarFn::new(move |x| Ok(p2.w(x)? * f2.y(x)? + p2.u(x)? * f2.z(x)?), jumps);
    (first, second)
}

// ---------------------------------------------------------------------------
// Kernel basis, M-matrix and solution operator

/// Two solutions of the reduced equation with the stated initial data,
/// integrated together on one mesh.
pub fn fundamental_pair(problem: &HainLustProblem, lambda: Complex64) -> Result<(SolutionFn, SolutionFn)> {
    let (a, b) = match problem.angles {
        Some((alpha, _)) => {
            let (s, c) = alpha.sin_cos();
            ((c, s), (-s, c))
        }
        None => ((1.0, 0.0), (0.0, 1.0)),
    };
    shoot_pair(problem, lambda, a, b)
}

fn shoot_pair(
    problem: &HainLustProblem,
    lambda: Complex64,
    a: (f64, f64),
    b: (f64, f64),
) -> Result<(SolutionFn, SolutionFn)> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let sol = integrate(
        &problem.ode_system(lambda),
        &[(c(a.0), c(a.1), None), (c(b.0), c(b.1), None)],
        &problem.settings.ode(),
    )?;
    let sol = Arc::new(sol);
    Ok((SolutionFn::new(sol.clone(), 0), SolutionFn::new(sol, 1)))
}

fn gamma1_of(y: &SolutionFn) -> BoundaryVector {
    let (_, dy0) = y.at_zero();
    let (_, dy1) = y.at_one();
    BoundaryVector::new(-dy1, dy0)
}

fn gamma2_of(y: &SolutionFn) -> BoundaryVector {
    let (y0, _) = y.at_zero();
    let (y1, _) = y.at_one();
    BoundaryVector::new(y1, y0)
}

/// Kernel of `A~* - lambda` with the boundary data needed to invert
/// `(G1 - B G2)` on it.
#[derive(Clone)]
pub struct KernelBasis {
    problem: HainLustProblem,
    lambda: Complex64,
    pub y1: SolutionFn,
    pub y2: SolutionFn,
    /// `(G1 - B G2)` of the two basis columns.
    pub trace: Mat2,
    /// `G2` of the two basis columns.
    pub dirichlet: Mat2,
    trace_inv: Mat2,
}

impl KernelBasis {
    pub fn new(problem: &HainLustProblem, lambda: Complex64) -> Result<Self> {
        let (y1, y2) = fundamental_pair(problem, lambda)?;
        Self::from_pair(problem, lambda, y1, y2)
    }

    /// Uses y(0)=1, y'(0)=0 and y(0)=0, y'(0)=1 regardless of the problem's angles.
    pub fn canonical(problem: &HainLustProblem, lambda: Complex64) -> Result<Self> {
        let (y1, y2) = shoot_pair(problem, lambda, (1.0, 0.0), (0.0, 1.0))?;
        Self::from_pair(problem, lambda, y1, y2)
    }

    fn from_pair(problem: &HainLustProblem, lambda: Complex64, y1: SolutionFn, y2: SolutionFn) -> Result<Self> {
        let b = problem.b;
        let t1 = gamma1_of(&y1) - b.apply(&gamma2_of(&y1));
        let t2 = gamma1_of(&y2) - b.apply(&gamma2_of(&y2));
        let trace = Mat2::from_columns(t1, t2);
        let dirichlet = Mat2::from_columns(gamma2_of(&y1), gamma2_of(&y2));
        let condition = trace.condition();
        let trace_inv = match trace.inverse() {
            Some(inv) if condition < problem.settings.condition_cap => inv,
            _ => {
                return Err(Error::NearPole {
                    lambda,
                    det: trace.det(),
                    condition,
                })
            }
        };
        Ok(KernelBasis {
            problem: problem.clone(),
            lambda,
            y1,
            y2,
            trace,
            dirichlet,
            trace_inv,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// Kernel element `c1 Y1 + c2 Y2` with `z = w y / (lambda - u)`.
    pub fn element(&self, c: BoundaryVector) -> FunctionPair {
        let (y1, y2) = (self.y1.clone(), self.y2.clone());
        let (c1, c2) = (c.0[0], c.0[1]);
        let ycomb = move |x: f64| -> Result<[Complex64; 3]> {
            let a = y1.eval3(x)?;
            let b = y2.eval3(x)?;
            Ok([c1 * a[0] + c2 * b[0], c1 * a[1] + c2 * b[1], c1 * a[2] + c2 * b[2]])
        };
        let ycomb = Arc::new(ycomb);
        let yz = ycomb.clone();
        let problem = self.problem.clone();
        let lambda = self.lambda;
        let z = ScalarFn::new(
            move |x| {
                let k = problem.coupling(x, lambda)?;
                if k == ZERO {
                    return Ok(ZERO);
                }
                Ok(k * yz(x)?[0])
            },
            self.problem.breakpoints(),
        );
        let t1 = (c1, self.y1.at_zero(), self.y1.at_one());
        let t2 = (c2, self.y2.at_zero(), self.y2.at_one());
        let traces = Traces {
            y0: t1.0 * t1.1 .0 + t2.0 * t2.1 .0,
            dy0: t1.0 * t1.1 .1 + t2.0 * t2.1 .1,
            y1: t1.0 * t1.2 .0 + t2.0 * t2.2 .0,
            dy1: t1.0 * t1.2 .1 + t2.0 * t2.2 .1,
        };
        FunctionPair {
            y: ycomb,
            z,
            y_jumps: self.y1.solution().jumps(),
            traces,
        }
    }

    /// `S_{lambda,B} f`.
    pub fn solve(&self, f: &BoundaryVector) -> FunctionPair {
        self.element(self.trace_inv.apply(f))
    }

    /// `M_B(lambda) = G2 (G1 - B G2)^{-1}` on the kernel.
    pub fn m_matrix(&self) -> Mat2 {
        self.dirichlet * self.trace_inv
    }
}

/// `M_B(lambda)` tagged with its spectral parameter and boundary parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MMatrix {
    pub m: Mat2,
    pub lambda: Complex64,
    pub b: Mat2,
}

impl MMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m.get(i, j)
    }

    pub fn apply(&self, f: &BoundaryVector) -> BoundaryVector {
        self.m.apply(f)
    }
}

/// M-matrix of the problem. Angle-form problems use the closed expressions
/// in `y1, y2` (with `m21` set from the same expression as `m12`); general
/// `B` goes through the 2x2 trace solve.
pub fn m_matrix(problem: &HainLustProblem, lambda: Complex64) -> Result<MMatrix> {
    match problem.angles {
        Some(_) => m_matrix_angle_form(problem, lambda),
        None => m_matrix_general(problem, lambda),
    }
}

/// `G2 S_{lambda,B}` via the canonical basis, for any `B`.
pub fn m_matrix_general(problem: &HainLustProblem, lambda: Complex64) -> Result<MMatrix> {
    let basis = KernelBasis::canonical(problem, lambda)?;
    Ok(MMatrix {
        m: basis.m_matrix(),
        lambda,
        b: problem.b,
    })
}

/// Closed-form entries for `B = diag(cot beta, -cot alpha)`.
pub fn m_matrix_angle_form(problem: &HainLustProblem, lambda: Complex64) -> Result<MMatrix> {
    let (alpha, beta) = problem
        .angles
        .ok_or_else(|| Error::Invalid("problem has no angle form".into()))?;
    // the conditioning guard and the angle basis come from the same shooting run
    let basis = KernelBasis::new(problem, lambda)?;
    let (y1_1, dy1_1) = basis.y1.at_one();
    let (y2_1, dy2_1) = basis.y2.at_one();
    let cb = cot(beta);
    let (sa, ca) = alpha.sin_cos();
    let denom = dy2_1 + cb * y2_1;
    let m11 = -y2_1 / denom;
    let m12 = sa / denom;
    let m22 = Complex64::new(sa * ca, 0.0) + sa * sa * ((dy1_1 + cb * y1_1) / denom);
    let m = Mat2::new(m11, m12, m12, m22);
    if !m.is_finite() {
        return Err(Error::NearPole {
            lambda,
            det: denom,
            condition: f64::INFINITY,
        });
    }
    Ok(MMatrix {
        m,
        lambda,
        b: problem.b,
    })
}

/// `det (G1 - B G2)[Y1 Y2]` for the canonical basis; its zeros away from
/// the essential range are the eigenvalues of `A_B`.
pub fn boundary_determinant(problem: &HainLustProblem, lambda: Complex64) -> Result<Complex64> {
    let (y1, y2) = shoot_pair(problem, lambda, (1.0, 0.0), (0.0, 1.0))?;
    let b = problem.b;
    let t1 = gamma1_of(&y1) - b.apply(&gamma2_of(&y1));
    let t2 = gamma1_of(&y2) - b.apply(&gamma2_of(&y2));
    Ok(Mat2::from_columns(t1, t2).det())
}

/// `S_{lambda,B} f`: the kernel element with `(G1 - B G2) u = f`.
pub fn solution_operator(problem: &HainLustProblem, lambda: Complex64, f: &BoundaryVector) -> Result<FunctionPair> {
    Ok(KernelBasis::new(problem, lambda)?.solve(f))
}

// ---------------------------------------------------------------------------
// Resolvent

/// `(A_B - lambda)^{-1}` at a fixed lambda; reuses one kernel basis for
/// every right-hand side.
#[derive(Clone)]
pub struct Resolvent {
    basis: KernelBasis,
    real_axis_hit: bool,
}

impl Resolvent {
    pub fn new(problem: &HainLustProblem, lambda: Complex64) -> Result<Self> {
        let basis = KernelBasis::new(problem, lambda)?;
        let real_axis_hit = lambda.im.abs() <= problem.settings.eps_sing
            && crate::speclimits::essential_range(problem.u_expr(), 1024)
                .map(|ranges| {
                    ranges.iter().any(|r| {
                        lambda.re >= r.0 - problem.settings.eps_sing && lambda.re <= r.1 + problem.settings.eps_sing
                    })
                })
                .unwrap_or(false);
        Ok(Resolvent { basis, real_axis_hit })
    }

    pub fn lambda(&self) -> Complex64 {
        self.basis.lambda
    }

    pub fn basis(&self) -> &KernelBasis {
        &self.basis
    }

    /// `(y, z) = (A_B - lambda)^{-1} (f1, f2)`.
    pub fn apply(&self, f: &FunctionPair) -> Result<FunctionPair> {
        let problem = &self.basis.problem;
        let lambda = self.basis.lambda;
        if self.real_axis_hit {
            return Err(Error::EssentialSpectrum { lambda });
        }
        let settings = problem.settings;
        // source of y'' = p y - r: r = f1 - w f2 / (u - lambda)
        let (pr, fr) = (problem.clone(), f.clone());
        let source = ScalarFn::new(
            move |x| {
                let k = pr.coupling(x, lambda)?;
                let f1 = fr.y(x)?;
                if k == ZERO {
                    return Ok(f1);
                }
                Ok(f1 + k * fr.z(x)?)
            },
            f.jumps(),
        );
        let mut system = problem.ode_system(lambda);
        system.breakpoints.extend(f.jumps());
        let part = integrate(&system, &[(ZERO, ZERO, Some(source))], &settings.ode())?;
        let part = SolutionFn::new(Arc::new(part), 0);
        let particular = FunctionPair::from_solution(part, ScalarFn::zero());
        let c = self.basis.trace_inv.apply(&particular.boundary_residual(&problem.b));
        let hom = self.basis.element(c);
        let one = Complex64::new(1.0, 0.0);
        let y_only = FunctionPair::combine(&[(one, &particular), (-one, &hom)]);

        let (pz, fz, yz) = (problem.clone(), f.clone(), y_only.clone());
        let mut z_jumps = f.jumps();
        z_jumps.extend(problem.breakpoints());
        let z = ScalarFn::new(
            move |x| {
                let d = pz.u(x)? - lambda;
                if d.norm() == 0.0 {
                    return Err(Error::CoefficientSingularity { x, lambda });
                }
                let w = pz.w(x)?;
                let num = if w.norm() < pz.settings.eps_sing {
                    fz.z(x)?
                } else {
                    fz.z(x)? - w * yz.y(x)?
                };
                Ok(num / d)
            },
            z_jumps,
        );
        Ok(FunctionPair {
            y: y_only.y,
            z,
            y_jumps: y_only.y_jumps,
            traces: y_only.traces,
        })
    }
}

pub fn resolvent_apply(problem: &HainLustProblem, lambda: Complex64, f: &FunctionPair) -> Result<FunctionPair> {
    Resolvent::new(problem, lambda)?.apply(f)
}

/// `(A~* U, V) - (U, A* V) - [(G1 U, G2 V) - (G2 U, G1 V)]`.
pub fn green_residual(problem: &HainLustProblem, u: &FunctionPair, v: &FunctionPair) -> Result<Complex64> {
    let adj = problem.adjoint();
    let (au1, au2) = apply_maximal(problem, u);
    let (av1, av2) = apply_maximal(&adj, v);
    let opts = problem.settings.quad();
    let mut jumps = u.jumps();
    jumps.extend(v.jumps());
    jumps.extend(problem.breakpoints());
    let lhs = l2_inner((&au1, &au2), (&v.y_fn(), v.z_fn()), &jumps, &opts)?;
    let rhs = l2_inner((&u.y_fn(), u.z_fn()), (&av1, &av2), &jumps, &opts)?;
    let boundary = u.gamma1().dot(&v.gamma2()) - u.gamma2().dot(&v.gamma1());
    Ok(lhs - rhs - boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free(alpha: f64, beta: f64) -> HainLustProblem {
        HainLustProblem::parse_with_angles("0", "0", "0", alpha, beta).unwrap()
    }

    #[test]
    fn angle_constructor_builds_diagonal_b() {
        let p = HainLustProblem::parse_with_angles("0", "0", "0", 1.0, 0.5).unwrap();
        let b = p.b();
        assert!((b.get(0, 0).re - 0.5f64.cos() / 0.5f64.sin()).abs() < 1e-15);
        assert!((b.get(1, 1).re + 1.0f64.cos() / 1.0f64.sin()).abs() < 1e-15);
        assert_eq!(b.get(0, 1), ZERO);
        assert!(HainLustProblem::parse_with_angles("0", "0", "0", PI, 1.0).is_err());
        assert!(HainLustProblem::parse_with_angles("0", "0", "0", 1.0, 0.0).is_err());
    }

    #[test]
    fn adjoint_conjugates() {
        let b = Mat2::new(c(0.2, 0.0), c(0.0, 1.0), c(0.3, 0.0), c(0.0, 0.1));
        let p = HainLustProblem::parse_with_matrix("x + 0.5*i", "0", "0", b).unwrap();
        let a = p.adjoint();
        assert_eq!(a.q(0.5).unwrap(), c(0.5, -0.5));
        assert_eq!(a.b(), b.conj_transpose());
        assert_eq!(a.adjoint().b(), b);
    }

    #[test]
    fn fundamental_pair_free_closed_form() {
        let lam = PI * PI / 9.0;
        let s = lam.sqrt();
        let p = free(PI / 2.0, PI / 2.0);
        let (y1, y2) = fundamental_pair(&p, c(lam, 0.0)).unwrap();
        let (a, da) = y1.at_one();
        let (b, db) = y2.at_one();
        assert!((a.re - s.sin() / s).abs() < 1e-8);
        assert!((da.re - s.cos()).abs() < 1e-8);
        assert!((b.re + s.cos()).abs() < 1e-8);
        assert!((db.re - s * s.sin()).abs() < 1e-8);
        let (a0, da0) = y1.at_zero();
        let (b0, db0) = y2.at_zero();
        assert!((a0 * db0 - da0 * b0 - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn decoupled_u_is_irrelevant() {
        let p1 = HainLustProblem::parse_with_angles("x", "0", "x", 1.0, 1.2).unwrap();
        let p2 = HainLustProblem::parse_with_angles("x", "0", "x + 0.3*sin(x)", 1.0, 1.2).unwrap();
        let lam = c(3.0, 1.0);
        let a = fundamental_pair(&p1, lam).unwrap().0.at_one().0;
        let b = fundamental_pair(&p2, lam).unwrap().0.at_one().0;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn m_matrix_closed_form_and_zero_vector() {
        let p = free(PI / 2.0, PI / 2.0);
        let lam = c(PI * PI / 9.0, 0.0);
        let m = m_matrix(&p, lam).unwrap();
        let r3 = 3f64.sqrt();
        assert!((m.entry(0, 0).re - r3 / PI).abs() < 1e-8);
        assert!((m.entry(1, 1).re - r3 / PI).abs() < 1e-8);
        assert!((m.entry(0, 1).re - 2.0 * r3 / PI).abs() < 1e-8);
        assert_eq!(m.entry(0, 1), m.entry(1, 0));
        assert_eq!(m.apply(&BoundaryVector::ZERO), BoundaryVector::ZERO);
    }

    #[test]
    fn near_pole_is_reported() {
        // Neumann eigenvalue pi^2
        let p = free(PI / 2.0, PI / 2.0);
        let err = m_matrix_general(&p, c(PI * PI, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NearPole { .. }), "{err:?}");
    }

    #[test]
    fn solution_operator_boundary_data() {
        let p = free(PI / 2.0, PI / 2.0);
        let lam = c(PI * PI / 9.0, 0.0);
        let f = BoundaryVector::new(c(1.0, 0.0), ZERO);
        let s = solution_operator(&p, lam, &f).unwrap();
        let m = m_matrix(&p, lam).unwrap();
        assert!((s.gamma1() - f).norm() < 1e-12);
        assert!((s.gamma2() - m.apply(&f)).norm() < 1e-8);
        let zero = solution_operator(&p, lam, &BoundaryVector::ZERO).unwrap();
        assert_eq!(zero.gamma2(), BoundaryVector::ZERO);
        let s2 = solution_operator(&p, lam, &f.scale(c(2.0, 0.0))).unwrap();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert!((s2.y(x).unwrap() - 2.0 * s.y(x).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn resolvent_neumann_constant_rhs() {
        let p = free(PI / 2.0, PI / 2.0);
        let f = FunctionPair::parse("1", "0").unwrap();
        let r = resolvent_apply(&p, c(-1.0, 0.0), &f).unwrap();
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            assert!((r.y(x).unwrap() - c(1.0, 0.0)).norm() < 1e-9, "x = {x}");
        }
        let zero = resolvent_apply(&p, c(-1.0, 0.0), &FunctionPair::zero()).unwrap();
        assert!(zero.y(0.3).unwrap().norm() < 1e-15);
    }

    #[test]
    fn resolvent_decoupled_second_component() {
        let p = HainLustProblem::parse_with_angles("0", "0", "2 + x", PI / 2.0, PI / 2.0).unwrap();
        let lam = c(0.7, 0.4);
        let f = FunctionPair::parse("0", "cos(x)").unwrap();
        let r = resolvent_apply(&p, lam, &f).unwrap();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert!(r.y(x).unwrap().norm() < 1e-12);
            let expect = c(x.cos(), 0.0) / (c(2.0 + x, 0.0) - lam);
            assert!((r.z(x).unwrap() - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn resolvent_on_essential_range_is_rejected() {
        let p = HainLustProblem::parse_with_angles("0", "0", "x", PI / 2.0, PI / 2.0).unwrap();
        let f = FunctionPair::parse("0", "1").unwrap();
        assert!(matches!(
            resolvent_apply(&p, c(0.5, 0.0), &f),
            Err(Error::EssentialSpectrum { .. })
        ));
    }

    #[test]
    fn coefficient_singularity_names_position() {
        let p = HainLustProblem::parse_with_angles("0", "1", "x", PI / 2.0, PI / 2.0).unwrap();
        let err = fundamental_pair(&p, c(0.5, 0.0)).unwrap_err();
        match err {
            Error::CoefficientSingularity { x, .. } => assert!((x - 0.5).abs() < 1e-3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inner_products() {
        let one = FunctionPair::parse("1", "0").unwrap();
        assert!((pair_inner_product(&one, &one).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let s = FunctionPair::parse("sin(3.141592653589793*x)", "0").unwrap();
        let co = FunctionPair::parse("cos(3.141592653589793*x)", "0").unwrap();
        assert!(pair_inner_product(&s, &co).unwrap().norm() < 1e-12);
        let a = FunctionPair::parse("0", "x").unwrap();
        let b = FunctionPair::parse("0", "1").unwrap();
        assert!((pair_inner_product(&a, &b).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
        let ci = FunctionPair::parse("i", "0").unwrap();
        // conjugate-linear in the second slot
        assert!((pair_inner_product(&one, &ci).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn green_residual_polynomial_pair() {
        let p = HainLustProblem::parse_with_angles("x", "1", "2", 1.0, 1.0).unwrap();
        let u = FunctionPair::parse("x^2*(1-x)^2", "0").unwrap();
        assert!(green_residual(&p, &u, &u).unwrap().norm() < 1e-8);
        let y0 = FunctionPair::parse("0", "sin(x)").unwrap();
        let v = FunctionPair::parse("1 + x^3", "x").unwrap();
        assert!(green_residual(&p, &y0, &v).unwrap().norm() < 1e-9);
    }
}
