//! Complex shooting for `-y'' + p(x) y = -r(x)` style equations and
//! quadrature over [0, 1].

mod integrator;
mod quad;

pub use integrator::{integrate, OdeSettings, OdeSolution, OdeSystem, ScalarFn, SolutionFn};
pub use quad::{quad, quad_interval, QuadOptions, QuadResult};

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::hainlust::HainLustProblem;

/// Integrates `-y'' + (q - lambda) y - w^2/(u - lambda) y = rhs` from
/// `y(0) = y0`, `y'(0) = dy0`.
pub fn solve_hl_ode(
    problem: &HainLustProblem,
    lambda: Complex64,
    y0: Complex64,
    dy0: Complex64,
    rhs: Option<ScalarFn>,
) -> Result<SolutionFn> {
    let mut system = problem.ode_system(lambda);
    let mut breakpoints = system.breakpoints.clone();
    if let Some(r) = &rhs {
        breakpoints.extend_from_slice(&r.jumps);
    }
    system.breakpoints = breakpoints;
    let sol = integrate(&system, &[(y0, dy0, rhs)], &problem.settings().ode())?;
    Ok(SolutionFn::new(Arc::new(sol), 0))
}
