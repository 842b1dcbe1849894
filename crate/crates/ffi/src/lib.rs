//! C ABI over the mweyl core.
//!
//! Problems and function pairs are opaque heap handles created and freed by
//! this library. Every fallible call returns an `MweylStatus`; on failure a
//! description is available from `mweyl_last_error` on the same thread.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mweyl::hainlust::{boundary_determinant, m_matrix, resolvent_apply};
use mweyl::poles::{find_eigenvalues, Region};
use mweyl::{Error, FunctionPair, HainLustProblem, Mat2, SolverSettings};
use num_complex::Complex64;

/// Result of a call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MweylStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NearPole = 3,
    EssentialSpectrum = 4,
    BufferTooSmall = 5,
    Numerical = 6,
    Panic = 7,
}

/// A complex number laid out as two doubles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MweylComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for MweylComplex {
    fn from(z: Complex64) -> Self {
        MweylComplex { re: z.re, im: z.im }
    }
}

impl From<MweylComplex> for Complex64 {
    fn from(z: MweylComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Solver tolerances and guards.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MweylSettings {
    pub rtol: f64,
    pub atol: f64,
    pub quad_tol: f64,
    pub quad_rel_tol: f64,
    pub panel_budget: usize,
    pub eps_sing: f64,
    pub condition_cap: f64,
}

impl From<SolverSettings> for MweylSettings {
    fn from(s: SolverSettings) -> Self {
        MweylSettings {
            rtol: s.rtol,
            atol: s.atol,
            quad_tol: s.quad_tol,
            quad_rel_tol: s.quad_rel_tol,
            panel_budget: s.panel_budget,
            eps_sing: s.eps_sing,
            condition_cap: s.condition_cap,
        }
    }
}

impl From<MweylSettings> for SolverSettings {
    fn from(s: MweylSettings) -> Self {
        SolverSettings {
            rtol: s.rtol,
            atol: s.atol,
            quad_tol: s.quad_tol,
            quad_rel_tol: s.quad_rel_tol,
            panel_budget: s.panel_budget,
            eps_sing: s.eps_sing,
            condition_cap: s.condition_cap,
        }
    }
}

/// Opaque Hain-Lust problem.
pub struct MweylProblem(HainLustProblem);

/// Opaque pair `(y, z)` of functions on [0, 1].
pub struct MweylPair(FunctionPair);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MweylStatus {
    match e {
        _ if e.is_validation() => MweylStatus::InvalidInput,
        Error::NearPole { .. } => MweylStatus::NearPole,
        Error::EssentialSpectrum { .. } => MweylStatus::EssentialSpectrum,
        _ => MweylStatus::Numerical,
    }
}

struct Failure(MweylStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MweylStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, recording any failure or panic.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MweylStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MweylStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MweylStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(MweylStatus::InvalidInput, format!("`{what}` is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn labelled(field: &str, e: Error) -> Failure {
    Failure(status_of(&e), format!("{field}: {e}"))
}

unsafe fn parse_coefficients(
    q: *const c_char,
    w: *const c_char,
    u: *const c_char,
) -> Result<[mweyl::CoefficientExpr; 3], Failure> {
    let parse =
        |p, name| -> Result<mweyl::CoefficientExpr, Failure> { text(p, name)?.parse().map_err(|e| labelled(name, e)) };
    Ok([parse(q, "q")?, parse(w, "w")?, parse(u, "u")?])
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mweyl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mweyl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default solver settings.
#[no_mangle]
pub extern "C" fn mweyl_settings_default() -> MweylSettings {
    SolverSettings::default().into()
}

/// Creates a problem with separated conditions given by the angles `alpha`
/// (at x = 0) and `beta` (at x = 1).
#[no_mangle]
pub unsafe extern "C" fn mweyl_problem_new_angles(
    q: *const c_char,
    w: *const c_char,
    u: *const c_char,
    alpha: f64,
    beta: f64,
    problem: *mut *mut MweylProblem,
) -> MweylStatus {
    guard(|| {
        let slot = out(problem, "problem")?;
        let [q, w, u] = parse_coefficients(q, w, u)?;
        let p = HainLustProblem::from_angles(q, w, u, alpha, beta).map_err(|e| labelled("angles", e))?;
        *slot = Box::into_raw(Box::new(MweylProblem(p)));
        Ok(())
    })
}

/// Creates a problem with boundary matrix `b`, four entries in row-major order.
#[no_mangle]
pub unsafe extern "C" fn mweyl_problem_new_matrix(
    q: *const c_char,
    w: *const c_char,
    u: *const c_char,
    b: *const MweylComplex,
    problem: *mut *mut MweylProblem,
) -> MweylStatus {
    guard(|| {
        let slot = out(problem, "problem")?;
        if b.is_null() {
            return Err(null("b"));
        }
        let e = std::slice::from_raw_parts(b, 4);
        let m = Mat2::new(e[0].into(), e[1].into(), e[2].into(), e[3].into());
        if !m.is_finite() {
            return Err(Failure(MweylStatus::InvalidInput, "b: entries must be finite".into()));
        }
        let [q, w, u] = parse_coefficients(q, w, u)?;
        *slot = Box::into_raw(Box::new(MweylProblem(HainLustProblem::with_boundary_matrix(
            q, w, u, m,
        ))));
        Ok(())
    })
}

/// Replaces the solver settings of a problem.
#[no_mangle]
pub unsafe extern "C" fn mweyl_problem_set_settings(
    problem: *mut MweylProblem,
    settings: MweylSettings,
) -> MweylStatus {
    guard(|| {
        let p = out(problem, "problem")?;
        let s: SolverSettings = settings.into();
        s.validate().map_err(|e| labelled("settings", e))?;
        p.0 = p.0.clone().with_settings(s);
        Ok(())
    })
}

/// Releases a problem. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mweyl_problem_free(problem: *mut MweylProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Writes `M(lambda)` into `m`, four entries in row-major order.
#[no_mangle]
pub unsafe extern "C" fn mweyl_m_matrix(
    problem: *const MweylProblem,
    lambda: MweylComplex,
    m: *mut MweylComplex,
) -> MweylStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        if m.is_null() {
            return Err(null("m"));
        }
        let value = m_matrix(&p.0, lambda.into())?.m.entries();
        for (i, z) in value.iter().enumerate() {
            *m.add(i) = (*z).into();
        }
        Ok(())
    })
}

/// Determinant of the boundary map whose zeros are the eigenvalues.
#[no_mangle]
pub unsafe extern "C" fn mweyl_boundary_determinant(
    problem: *const MweylProblem,
    lambda: MweylComplex,
    det: *mut MweylComplex,
) -> MweylStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let slot = out(det, "det")?;
        *slot = boundary_determinant(&p.0, lambda.into())?.into();
        Ok(())
    })
}

/// Eigenvalues in `[re_min, re_max] x [im_min, im_max]`. Writes at most
/// `capacity` values and multiplicities and stores the number found in
/// `count`; returns `MWEYL_STATUS_BUFFER_TOO_SMALL` when `count > capacity`.
#[no_mangle]
pub unsafe extern "C" fn mweyl_find_eigenvalues(
    problem: *const MweylProblem,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    eigenvalues: *mut MweylComplex,
    multiplicities: *mut usize,
    capacity: usize,
    count: *mut usize,
) -> MweylStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let n = out(count, "count")?;
        let region = Region::new(re_min, re_max, im_min, im_max).map_err(|e| labelled("region", e))?;
        let found = find_eigenvalues(&p.0, p.0.b(), &region)?;
        *n = found.len();
        if found.len() > capacity {
            return Err(Failure(
                MweylStatus::BufferTooSmall,
                format!("{} eigenvalues found, capacity {capacity}", found.len()),
            ));
        }
        if !found.is_empty() && (eigenvalues.is_null() || multiplicities.is_null()) {
            return Err(null("eigenvalues"));
        }
        for (i, e) in found.iter().enumerate() {
            *eigenvalues.add(i) = e.lambda.into();
            *multiplicities.add(i) = e.multiplicity;
        }
        Ok(())
    })
}

/// Creates the pair `(y, z)` from two expressions in `x`.
#[no_mangle]
pub unsafe extern "C" fn mweyl_pair_new(y: *const c_char, z: *const c_char, pair: *mut *mut MweylPair) -> MweylStatus {
    guard(|| {
        let slot = out(pair, "pair")?;
        let y: mweyl::CoefficientExpr = text(y, "y")?.parse().map_err(|e| labelled("y", e))?;
        let z: mweyl::CoefficientExpr = text(z, "z")?.parse().map_err(|e| labelled("z", e))?;
        let f = FunctionPair::from_exprs(y, z).map_err(|e| labelled("pair", e))?;
        *slot = Box::into_raw(Box::new(MweylPair(f)));
        Ok(())
    })
}

/// Releases a pair. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mweyl_pair_free(pair: *mut MweylPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Writes `y(x)`, `y'(x)` and `z(x)` into `values`.
#[no_mangle]
pub unsafe extern "C" fn mweyl_pair_eval(pair: *const MweylPair, x: f64, values: *mut MweylComplex) -> MweylStatus {
    guard(|| {
        let f = handle(pair, "pair")?;
        if values.is_null() {
            return Err(null("values"));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Failure(MweylStatus::InvalidInput, format!("x = {x} is outside [0, 1]")));
        }
        let y = f.0.y3(x)?;
        let z = f.0.z(x)?;
        for (i, v) in [y[0], y[1], z].into_iter().enumerate() {
            *values.add(i) = v.into();
        }
        Ok(())
    })
}

/// Applies the resolvent `(A_B - lambda)^{-1}` to `f`; the result is a new
/// pair owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn mweyl_resolvent_apply(
    problem: *const MweylProblem,
    lambda: MweylComplex,
    f: *const MweylPair,
    result: *mut *mut MweylPair,
) -> MweylStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let f = handle(f, "f")?;
        let slot = out(result, "result")?;
        let r = resolvent_apply(&p.0, lambda.into(), &f.0)?;
        *slot = Box::into_raw(Box::new(MweylPair(r)));
        Ok(())
    })
}
