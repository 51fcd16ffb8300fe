use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::magnitude::little_m_with_error;
use crate::space::{is_prime, padic_profile, RadialProfile};

/// Stored atoms of the profile behind the witnesses.
const STORED_ATOMS: u32 = 60;
const TAIL_TOL: f64 = 1e-15;

/// `R m(R)` with an absolute error bound.
fn scaled_m(profile: &RadialProfile, r: f64) -> Result<(f64, f64)> {
    let q = little_m_with_error(profile, r)?;
    Ok((r * q.value.re, r * q.error_estimate))
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|k| lo * (step * k as f64).exp()).collect()
}

/// Check of `p R m(p R) - R m(R) = R (p - 1) e^{-p R}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalEquation {
    pub range: (f64, f64),
    pub points: usize,
    /// Largest `|pR m(pR) - R m(R)| - R (p-1) e^{-pR}` over the grid.
    pub worst_excess: f64,
    /// Rounding and quadrature allowance at the worst point.
    pub allowance: f64,
    pub worst_r: f64,
    pub holds: bool,
}

/// Spread of `R m(R)` over one multiplicative period `[R0, p R0]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Oscillation {
    pub start: f64,
    pub amplitude: f64,
    /// Bound on the quadrature error of the amplitude.
    pub error: f64,
}

/// Extremes of `R m(R)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bounds {
    pub range: (f64, f64),
    pub lower: f64,
    pub upper: f64,
}

/// Quantitative evidence that `m` of the p-adic integers has no power-law
/// expansion: log-periodicity of `R m(R)`, its oscillation and its bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PadicWitness {
    pub p: u64,
    pub functional_equation: FunctionalEquation,
    pub oscillation: Oscillation,
    pub bounds: Bounds,
}

pub fn padic_functional_equation(p: u64, range: (f64, f64), points: usize, exec: Execution) -> Result<FunctionalEquation> {
    let profile = witness_profile(p)?;
    check_range(range, points)?;
    let pf = p as f64;
    let grid = log_grid(range.0, range.1, points);
    let rows = exec.try_map(&grid, |&r| -> Result<(f64, f64, f64)> {
        let (a, ea) = scaled_m(&profile, pf * r)?;
        let (b, eb) = scaled_m(&profile, r)?;
        let excess = (a - b).abs() - r * (pf - 1.0) * (-pf * r).exp();
        let allowance = 8.0 * f64::EPSILON * (a.abs() + b.abs()) + ea + eb;
        Ok((r, excess, allowance))
    })?;
    let holds = rows.iter().all(|(_, e, a)| *e <= *a);
    let (worst_r, worst_excess, allowance) = rows
        .iter()
        .copied()
        .max_by(|x, y| (x.1 - x.2).total_cmp(&(y.1 - y.2)))
        .expect("non-empty grid");
    Ok(FunctionalEquation {
        range,
        points,
        worst_excess,
        allowance,
        worst_r,
        holds,
    })
}

pub fn padic_oscillation(p: u64, start: f64, points: usize, exec: Execution) -> Result<Oscillation> {
    let profile = witness_profile(p)?;
    check_range((start, p as f64 * start), points)?;
    let grid = log_grid(start, p as f64 * start, points);
    let values = exec.try_map(&grid, |&r| scaled_m(&profile, r))?;
    let (lo, hi, err) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, err), (v, e)| {
            (lo.min(*v), hi.max(*v), err.max(*e))
        });
    Ok(Oscillation {
        start,
        amplitude: hi - lo,
        error: 2.0 * err,
    })
}

pub fn padic_bounds(p: u64, range: (f64, f64), points: usize, exec: Execution) -> Result<Bounds> {
    let profile = witness_profile(p)?;
    check_range(range, points)?;
    let grid = log_grid(range.0, range.1, points);
    let values = exec.try_map(&grid, |&r| scaled_m(&profile, r).map(|(v, _)| v))?;
    let (lower, upper) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    Ok(Bounds { range, lower, upper })
}

/// All three witnesses on the default ranges: the functional equation on
/// `[1, 1e3]`, the oscillation over `[100, 100 p]` and the bounds on `[1, 1e4]`.
pub fn padic_witnesses(p: u64, exec: Execution) -> Result<PadicWitness> {
    Ok(PadicWitness {
        p,
        functional_equation: padic_functional_equation(p, (1.0, 1e3), 121, exec)?,
        oscillation: padic_oscillation(p, 100.0, 257, exec)?,
        bounds: padic_bounds(p, (1.0, 1e4), 161, exec)?,
    })
}

fn witness_profile(p: u64) -> Result<RadialProfile> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    padic_profile(p, STORED_ATOMS, TAIL_TOL)
}

fn check_range(range: (f64, f64), points: usize) -> Result<()> {
    if !(range.0 > 0.0 && range.1 > range.0 && range.1.is_finite()) || points < 2 {
        return Err(Error::InvalidArgument(format!(
            "witness grid needs 0 < lo < hi and two points (got {range:?}, {points})"
        )));
    }
    Ok(())
}
