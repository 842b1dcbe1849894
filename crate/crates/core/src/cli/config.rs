//! Run configuration read from JSON. See `docs/config.md` for the schema.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffexpr::CoefficientExpr;
use crate::error::Error;
use crate::hainlust::{FunctionPair, HainLustProblem, SolverSettings};
use crate::linalg::{BoundaryVector, Mat2};
use crate::poles::{Contour, Region};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub command: CommandConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub q: String,
    pub w: String,
    pub u: String,
    #[serde(default)]
    pub angles: Option<Angles>,
    /// Row-major, each entry `[re, im]`.
    #[serde(default)]
    pub b: Option<Mat2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub y: String,
    pub z: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenCase {
    pub u: PairConfig,
    pub v: PairConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub start: Complex64,
    pub end: Complex64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsSchedule {
    pub max: f64,
    pub min: f64,
    pub steps: usize,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule {
            max: 1e-1,
            min: 1e-4,
            steps: 13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub problems: usize,
    pub lambdas: usize,
}

/// Subcommand parameters; each subcommand reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandConfig {
    pub lambda: Option<Complex64>,
    pub lambda0: Option<Complex64>,
    pub lambdas: Option<Vec<Complex64>>,
    pub lambda_grid: Option<LambdaGrid>,
    pub c: Option<Mat2>,
    pub boundary: Option<BoundaryVector>,
    pub f: Option<PairConfig>,
    pub g: Option<PairConfig>,
    pub pairs: Option<Vec<GreenCase>>,
    pub contour: Option<Contour>,
    pub region: Option<Region>,
    pub max_power: Option<usize>,
    pub orders: Option<bool>,
    pub k: Option<f64>,
    pub eps: Option<EpsSchedule>,
    pub x_points: Option<usize>,
    pub suite: Option<SuiteConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

fn expr(field: &str, src: &str) -> Result<CoefficientExpr, CliError> {
    src.parse().map_err(|e| CliError::field(field, e))
}

fn pair(field: &str, p: &PairConfig) -> Result<FunctionPair, CliError> {
    FunctionPair::from_exprs(expr(&format!("{field}.y"), &p.y)?, expr(&format!("{field}.z"), &p.z)?)
        .map_err(|e| CliError::field(field, e))
}

fn invalid(field: &str, msg: &str) -> CliError {
    CliError::field(field, Error::Invalid(msg.to_string()))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::field("config", Error::Invalid(e.to_string())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the invariants that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.problem.angles, &self.problem.b) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(invalid("problem", "exactly one of `angles` and `b` must be given"))
            }
            _ => {}
        }
        self.solver.validate().map_err(|e| CliError::field("solver", e))?;
        self.problem()?;
        Ok(())
    }

    pub fn problem(&self) -> Result<HainLustProblem, CliError> {
        let p = &self.problem;
        let q = expr("problem.q", &p.q)?;
        let w = expr("problem.w", &p.w)?;
        let u = expr("problem.u", &p.u)?;
        let problem = match (p.angles, p.b) {
            (Some(a), None) => HainLustProblem::from_angles(q, w, u, a.alpha, a.beta)
                .map_err(|e| CliError::field("problem.angles", e))?,
            (None, Some(b)) => {
                if !b.is_finite() {
                    return Err(invalid("problem.b", "entries must be finite"));
                }
                HainLustProblem::with_boundary_matrix(q, w, u, b)
            }
            _ => return Err(invalid("problem", "exactly one of `angles` and `b` must be given")),
        };
        Ok(problem.with_settings(self.solver))
    }

    pub fn lambda(&self) -> Result<Complex64, CliError> {
        self.command.lambda.ok_or_else(|| invalid("command.lambda", "required"))
    }

    pub fn lambda0(&self) -> Result<Complex64, CliError> {
        self.command
            .lambda0
            .ok_or_else(|| invalid("command.lambda0", "required"))
    }

    pub fn c(&self) -> Mat2 {
        self.command.c.unwrap_or(Mat2::ZERO)
    }

    pub fn boundary(&self) -> BoundaryVector {
        self.command.boundary.unwrap_or(BoundaryVector::basis(0))
    }

    pub fn f(&self) -> Result<FunctionPair, CliError> {
        let f = self
            .command
            .f
            .as_ref()
            .ok_or_else(|| invalid("command.f", "required"))?;
        pair("command.f", f)
    }

    pub fn g(&self) -> Result<Option<FunctionPair>, CliError> {
        self.command.g.as_ref().map(|g| pair("command.g", g)).transpose()
    }

    pub fn green_pairs(&self) -> Result<Vec<(FunctionPair, FunctionPair)>, CliError> {
        match &self.command.pairs {
            Some(list) if list.is_empty() => Err(invalid("command.pairs", "must not be empty")),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    Ok((
                        pair(&format!("command.pairs[{i}].u"), &c.u)?,
                        pair(&format!("command.pairs[{i}].v"), &c.v)?,
                    ))
                })
                .collect(),
            None => Ok(default_green_pairs()),
        }
    }

    pub fn lambdas(&self) -> Result<Vec<Complex64>, CliError> {
        match (&self.command.lambdas, &self.command.lambda_grid) {
            (Some(l), None) if !l.is_empty() => Ok(l.clone()),
            (None, Some(g)) if g.points >= 1 => {
                if g.points == 1 {
                    return Ok(vec![g.start]);
                }
                Ok((0..g.points)
                    .map(|i| g.start + (g.end - g.start) * (i as f64 / (g.points - 1) as f64))
                    .collect())
            }
            _ => Err(invalid(
                "command",
                "exactly one non-empty spectral grid is required: `lambdas` or `lambda_grid`",
            )),
        }
    }

    pub fn contour(&self) -> Result<Contour, CliError> {
        let c = self
            .command
            .contour
            .ok_or_else(|| invalid("command.contour", "required"))?;
        c.validate().map_err(|e| CliError::field("command.contour", e))?;
        Ok(c)
    }

    pub fn region(&self) -> Result<Region, CliError> {
        let r = self
            .command
            .region
            .ok_or_else(|| invalid("command.region", "required"))?;
        r.validate().map_err(|e| CliError::field("command.region", e))?;
        Ok(r)
    }

    pub fn k(&self) -> Result<f64, CliError> {
        self.command.k.ok_or_else(|| invalid("command.k", "required"))
    }

    pub fn eps(&self) -> Result<EpsSchedule, CliError> {
        let e = self.command.eps.unwrap_or_default();
        crate::speclimits::eps_grid(e.max, e.min, e.steps).map_err(|err| CliError::field("command.eps", err))?;
        Ok(e)
    }

    pub fn x_points(&self) -> Result<usize, CliError> {
        match self.command.x_points.unwrap_or(101) {
            n if n >= 2 => Ok(n),
            _ => Err(invalid("command.x_points", "must be at least 2")),
        }
    }
}

fn default_green_pairs() -> Vec<(FunctionPair, FunctionPair)> {
    [
        ("x^2*(1-x)^2", "0", "x^2*(1-x)^2", "0"),
        ("0", "sin(x)", "1 + x^3", "x"),
        ("exp(x) + i*x", "step(x-0.5)", "cos(2*x)", "1 - x"),
    ]
    .iter()
    .map(|(a, b, c, d)| (FunctionPair::parse(a, b).unwrap(), FunctionPair::parse(c, d).unwrap()))
    .collect()
}
