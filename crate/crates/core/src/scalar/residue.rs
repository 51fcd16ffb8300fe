use std::f64::consts::PI;

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;

pub const DEFAULT_RADIUS: f64 = 0.1;
pub const DEFAULT_NODES: usize = 64;

fn circle_nodes(
    f: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    z0: Complex64,
    radius: f64,
    nodes: usize,
    exec: Execution,
) -> Result<Vec<(Complex64, Complex64)>> {
    if !(radius > 0.0) || nodes < 2 {
        return Err(Error::InvalidArgument(format!(
            "contour needs radius > 0 and at least 2 nodes (got {radius}, {nodes})"
        )));
    }
    exec.try_map_range(nodes, |k| {
        let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
        let z = z0 + e * radius;
        let v = f(z).map_err(|err| {
            Error::EvaluationFailure(format!("contour node {z}: {err}"))
        })?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::EvaluationFailure(format!("non-finite value at contour node {z}")));
        }
        Ok((e, v))
    })
}

/// Residue of `f` at `z0` from the trapezoidal rule on a circle.
pub fn contour_residue<F>(f: F, z0: Complex64, radius: f64, nodes: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    contour_residue_with(&f, z0, radius, nodes, Execution::Sequential)
}

pub fn contour_residue_with(
    f: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    z0: Complex64,
    radius: f64,
    nodes: usize,
    exec: Execution,
) -> Result<Complex64> {
    let samples = circle_nodes(f, z0, radius, nodes, exec)?;
    let sum: Complex64 = samples.iter().map(|(e, v)| v * e).sum();
    Ok(sum * (radius / nodes as f64))
}

/// Mean of `f` over a circle: the value at the centre of a function holomorphic
/// on the disc, and the regular part's value when the centre is a simple pole.
pub fn contour_mean(
    f: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    z0: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<Complex64> {
    let samples = circle_nodes(f, z0, radius, nodes, Execution::Sequential)?;
    let sum: Complex64 = samples.iter().map(|(_, v)| v).sum();
    Ok(sum / nodes as f64)
}
