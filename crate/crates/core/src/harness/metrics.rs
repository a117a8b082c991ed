use std::fmt;
use std::str::FromStr;

use crate::error::{check_nonnegative, Error, Result};
use crate::model::PackingInstance;

/// How a solution is rescaled before its ratio is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    /// Divide by `max(1, v)`: feasible solutions are left alone.
    ShrinkOnly,
    /// Divide by `v` whenever `v > 0`, so the scaled solution is tight.
    #[default]
    Exact,
}

impl ScaleMode {
    pub fn factor(self, violation: f64) -> f64 {
        match self {
            ScaleMode::ShrinkOnly => violation.max(1.0),
            ScaleMode::Exact if violation > 0.0 => violation,
            ScaleMode::Exact => 1.0,
        }
    }
}

impl FromStr for ScaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shrink" => Ok(ScaleMode::ShrinkOnly),
            "exact" => Ok(ScaleMode::Exact),
            other => Err(Error::Config(format!("unknown scaling {other:?}, expected shrink or exact"))),
        }
    }
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleMode::ShrinkOnly => "shrink",
            ScaleMode::Exact => "exact",
        })
    }
}

/// Divides `x` by `s = max(1, violation_factor(Ax, b))`.
pub fn scale_to_feasible(x: &[f64], inst: &PackingInstance) -> Result<(Vec<f64>, f64)> {
    scale_with(x, inst, ScaleMode::ShrinkOnly)
}

pub fn scale_with(x: &[f64], inst: &PackingInstance, mode: ScaleMode) -> Result<(Vec<f64>, f64)> {
    check_nonnegative(x)?;
    let s = mode.factor(inst.violation(x)?);
    Ok((x.iter().map(|z| z / s).collect(), s))
}

/// `f(x/s)/OPT` with shrink-only scaling.
pub fn ratio_after_scaling(x: &[f64], inst: &PackingInstance, opt: f64) -> Result<f64> {
    ratio_with(x, inst, opt, ScaleMode::ShrinkOnly)
}

pub fn ratio_with(x: &[f64], inst: &PackingInstance, opt: f64, mode: ScaleMode) -> Result<f64> {
    if !(opt > 0.0) {
        return Err(Error::Numeric(format!("ratio undefined for OPT = {opt}")));
    }
    let (scaled, _) = scale_with(x, inst, mode)?;
    Ok(inst.objective(&scaled)? / opt)
}
