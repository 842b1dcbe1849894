use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::hainlust::{green_residual, m_matrix, resolvent_apply, FunctionPair};
use crate::poles::{find_eigenvalues, pole_order_compare, resolvent_spectral_data, Contour};
use crate::speclimits::{m_limit_scan, resolvent_limit_scan};
use crate::triplet_verify::{
    check_adjoint_identities, check_krein, check_m_transform, check_resolvent_rep, check_solution_analyticity,
    random_cases, run_suite, IdentityReport,
};

use super::output::Table;
use super::{CliError, Command, ErrorRecord, Outcome, RunConfig};

const EIG_CONTOUR_NODES: usize = 64;

fn to_json<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Green => green(cfg),
        Command::Mscan => mscan(cfg),
        Command::Eig => eig(cfg),
        Command::Laurent => laurent(cfg),
        Command::Krein => krein(cfg),
        Command::Identities => identities(cfg),
        Command::Limits => limits(cfg),
        Command::Resolvent => resolvent(cfg),
    }
}

fn green(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let pairs = cfg.green_pairs()?;
    let residuals = pairs
        .par_iter()
        .map(|(u, v)| green_residual(&problem, u, v))
        .collect::<Result<Vec<_>, Error>>()?;
    let max = residuals.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let cases: Vec<Value> = residuals
        .iter()
        .enumerate()
        .map(|(i, r)| json!({ "index": i, "residual": r, "abs": r.norm() }))
        .collect();
    Ok(Outcome::Json(json!({ "cases": cases, "max_abs": max }), Vec::new()))
}

fn mscan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let lambdas = cfg.lambdas()?;
    let mut header: Vec<String> = Table::complex_columns("lambda").to_vec();
    for name in ["m11", "m12", "m21", "m22"] {
        header.extend(Table::complex_columns(name));
    }
    let values: Vec<_> = lambdas.par_iter().map(|&l| m_matrix(&problem, l)).collect();
    let mut table = Table::new(header);
    let mut errors = Vec::new();
    for (&lambda, value) in lambdas.iter().zip(values) {
        match value {
            Ok(m) => table.push_row(&[], &[&[lambda][..], &m.m.entries()[..]].concat()),
            Err(e) if e.is_validation() => return Err(e.into()),
            Err(e) => {
                let nan = Complex64::new(f64::NAN, f64::NAN);
                table.push_row(&[], &[lambda, nan, nan, nan, nan]);
                errors.push(ErrorRecord::from(&e));
            }
        }
    }
    Ok(Outcome::Table(table, errors))
}

fn eig(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let region = cfg.region()?;
    let found = find_eigenvalues(&problem, problem.b(), &region)?;
    let with_orders = cfg.command.orders.unwrap_or(true);
    let seed = cfg.seed.unwrap_or(0);
    let mut rows = Vec::with_capacity(found.len());
    for (i, e) in found.iter().enumerate() {
        let mut row = json!({ "lambda": e.lambda, "multiplicity": e.multiplicity });
        if with_orders {
            let gap = found
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, o)| (o.lambda - e.lambda).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = (0.4 * gap).min(0.5);
            let contour = Contour::new(e.lambda, radius, EIG_CONTOUR_NODES)?;
            let orders = pole_order_compare(&problem, problem.b(), &contour, seed)?;
            row["m_order"] = json!(orders.m_order);
            row["resolvent_order"] = json!(orders.resolvent_order);
            row["contour_radius"] = json!(radius);
        }
        rows.push(row);
    }
    Ok(Outcome::Json(
        json!({ "region": region, "count": found.iter().map(|e| e.multiplicity).sum::<usize>(), "eigenvalues": rows }),
        Vec::new(),
    ))
}

fn laurent(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let contour = cfg.contour()?;
    let seed = cfg.seed.unwrap_or(0);
    let orders = pole_order_compare(&problem, problem.b(), &contour, seed)?;
    let mut results = json!({ "orders": to_json(&orders)? });
    if cfg.command.f.is_some() {
        let f = cfg.f()?;
        let g = cfg.g()?.unwrap_or_else(|| f.clone());
        let max_power = cfg.command.max_power.unwrap_or(2);
        let data = resolvent_spectral_data(&problem, problem.b(), &contour, &f, &g, max_power)?;
        results["spectral"] = to_json(&data)?;
    }
    Ok(Outcome::Json(results, Vec::new()))
}

fn krein(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let report = check_krein(&problem, problem.b(), cfg.c(), cfg.lambda()?, &cfg.f()?)?;
    Ok(Outcome::Json(to_json(&report)?, Vec::new()))
}

fn summarize(reports: &[IdentityReport]) -> Result<Value, CliError> {
    let max = reports.iter().map(|r| r.acceptance).fold(0.0, f64::max);
    Ok(json!({ "reports": to_json(&reports)?, "max_acceptance": max }))
}

fn identities(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(suite) = cfg.command.suite {
        let seed = cfg.seed.ok_or_else(|| {
            CliError::field(
                "seed",
                Error::Invalid("a random suite needs a seed (config `seed` or --seed)".into()),
            )
        })?;
        if suite.problems == 0 || suite.lambdas == 0 {
            return Err(CliError::field(
                "command.suite",
                Error::Invalid("counts must be positive".into()),
            ));
        }
        let cases = random_cases(seed, suite.problems, suite.lambdas)?;
        let reports = run_suite(&cases)?;
        return Ok(Outcome::Json(summarize(&reports)?, Vec::new()));
    }
    let problem = cfg.problem()?;
    let b = problem.b();
    let lambda = cfg.lambda()?;
    let lambda0 = cfg.command.lambda0.unwrap_or(lambda);
    let boundary = cfg.boundary();
    let c = cfg.c();
    let probe = match &cfg.command.f {
        Some(_) => cfg.f()?,
        None => FunctionPair::parse("1", "1")?,
    };
    let mut reports = vec![
        check_m_transform(&problem, b, c, lambda)?,
        check_resolvent_rep(&problem, b, lambda, lambda0, &boundary)?,
        check_solution_analyticity(&problem, b, lambda, lambda0, &boundary)?,
        check_adjoint_identities(&problem, b, lambda, &boundary, &probe)?,
    ];
    if cfg.command.f.is_some() {
        reports.push(check_krein(&problem, b, c, lambda, &probe)?);
    }
    Ok(Outcome::Json(summarize(&reports)?, Vec::new()))
}

fn limits(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let k = cfg.k()?;
    let eps = cfg.eps()?;
    let m = m_limit_scan(&problem, k, eps.max, eps.min, eps.steps)?;
    let mut results = json!({ "m": to_json(&m)? });
    if cfg.command.f.is_some() {
        let f = cfg.f()?;
        let g = cfg.g()?.unwrap_or_else(|| f.clone());
        let r = resolvent_limit_scan(&problem, k, &f, &g, eps.max, eps.min, eps.steps)?;
        results["resolvent"] = to_json(&r)?;
    }
    Ok(Outcome::Json(results, Vec::new()))
}

fn resolvent(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let problem = cfg.problem()?;
    let lambda = cfg.lambda()?;
    let f = cfg.f()?;
    let n = cfg.x_points()?;
    let r = resolvent_apply(&problem, lambda, &f)?;
    let mut header = vec!["x".to_string()];
    for name in ["y", "dy", "z"] {
        header.extend(Table::complex_columns(name));
    }
    let mut table = Table::new(header);
    for i in 0..n {
        let x = i as f64 / (n - 1) as f64;
        let v = r.y3(x)?;
        table.push_row(&[x], &[v[0], v[1], r.z(x)?]);
    }
    Ok(Outcome::Table(table, Vec::new()))
}
