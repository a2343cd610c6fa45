//! Parsing of the `--dist` and `--mu` flag values.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use soph_pricing::Distribution;

/// A value distribution as named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum DistArg {
    Uniform,
    Power(f64),
    Table(String),
}

impl FromStr for DistArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("uniform", None) => Ok(DistArg::Uniform),
            ("power", Some(c)) => {
                let c: f64 = c.parse().map_err(|_| format!("bad power exponent {c:?}"))?;
                if !(c.is_finite() && c > 0.0) {
                    return Err(format!("power exponent must be positive, got {c}"));
                }
                Ok(DistArg::Power(c))
            }
            ("table", Some(p)) if !p.is_empty() => Ok(DistArg::Table(p.to_string())),
            _ => Err(format!("expected uniform, power:<c> or table:<path>, got {s:?}")),
        }
    }
}

impl fmt::Display for DistArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistArg::Uniform => write!(f, "uniform"),
            DistArg::Power(c) => write!(f, "power:{c}"),
            DistArg::Table(p) => write!(f, "table:{p}"),
        }
    }
}

impl DistArg {
    /// Builds the distribution and checks regularity.
    pub fn load(&self) -> Result<Distribution> {
        let d = match self {
            DistArg::Uniform => Distribution::uniform(),
            DistArg::Power(c) => Distribution::power(*c)?,
            DistArg::Table(p) => Distribution::table_from_path(p).with_context(|| format!("loading table {p}"))?,
        };
        d.ensure_regular().with_context(|| format!("distribution {self}"))?;
        Ok(d)
    }
}

/// A single `mu` or an inclusive `start:end:step` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MuGrid(pub Vec<f64>);

impl FromStr for MuGrid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |x: &str| -> std::result::Result<f64, String> {
            x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?} in mu spec"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => vec![num(v)?],
            [a, b, step] => range(num(a)?, num(b)?, num(step)?)?,
            _ => return Err(format!("expected <value> or <start>:<end>:<step>, got {s:?}")),
        };
        if let Some(bad) = grid.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(format!("mu={bad} outside [0,1]"));
        }
        Ok(MuGrid(grid))
    }
}

/// Grid from `a` to `b` by `step`. When the step divides the span the points are
/// computed as `a + (b-a) i/n`, so both ends are hit exactly.
fn range(a: f64, b: f64, step: f64) -> std::result::Result<Vec<f64>, String> {
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err("mu grid needs finite ends and a positive step".into());
    }
    if b < a {
        return Err(format!("empty mu grid: end {b} is below start {a}"));
    }
    let ratio = (b - a) / step;
    let n = (ratio + 1e-9).floor();
    if n > 1e7 {
        return Err(format!("mu grid with {n} points is too large"));
    }
    let n = n as usize;
    let divides = (ratio - ratio.round()).abs() <= 1e-9;
    Ok((0..=n)
        .map(|i| if divides && n > 0 { a + (b - a) * i as f64 / n as f64 } else { a + step * i as f64 })
        .collect())
}

impl MuGrid {
    pub fn single(&self) -> Result<f64> {
        match self.0.as_slice() {
            [m] => Ok(*m),
            _ => bail!("this command takes a single --mu value, got a grid of {}", self.0.len()),
        }
    }
}
