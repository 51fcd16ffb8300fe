use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::formal::AsymptoticExpansion;
use crate::space::RadialProfile;

/// A real function of `R` sampled by the oracle.
pub type Sampler<'a> = dyn Fn(f64) -> Result<f64> + Sync + 'a;

/// Geometric grid `start * ratio^k`, `k < points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitGrid {
    pub start: f64,
    pub ratio: f64,
    pub points: usize,
}

impl Default for FitGrid {
    fn default() -> Self {
        FitGrid {
            start: 8.0,
            ratio: 2.0,
            points: 12,
        }
    }
}

/// `-ln(1e-14)`: exponentially small terms `e^{-T R}` are below `1e-14` once `T R` exceeds this.
const EXP_SMALL: f64 = 32.3;

impl FitGrid {
    pub fn new(start: f64, ratio: f64, points: usize) -> Result<Self> {
        if !(start > 0.0 && ratio > 1.0 && start.is_finite() && ratio.is_finite()) || points < 4 {
            return Err(Error::InvalidArgument(format!(
                "fit grid needs start > 0, ratio > 1 and at least 4 points (got {start}, {ratio}, {points})"
            )));
        }
        Ok(FitGrid { start, ratio, points })
    }

    /// Default grid started where `e^{-diameter R}` terms are negligible.
    pub fn for_profile(profile: &RadialProfile) -> Self {
        let d = profile.diameter();
        let start = if d > 0.0 { (EXP_SMALL / d).max(8.0) } else { 8.0 };
        FitGrid {
            start,
            ..FitGrid::default()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.start * self.ratio.powi(k as i32)).collect()
    }

    /// The same grid moved by `phase` of one ratio step in `ln R`.
    pub fn shifted(&self, phase: f64) -> Self {
        FitGrid {
            start: self.start * self.ratio.powf(phase),
            ..*self
        }
    }
}

/// Extrapolated limit with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
}

/// Richardson extrapolation of `values[k] = L + c_1 x_k + c_2 x_k^2 + ...` with
/// `x_{k+1} = x_k / ratio`.
///
/// `noise[k]` bounds the error already present in `values[k]`; it is
/// propagated through the tableau. The entry minimising the larger of its
/// propagated noise and its distance to the two parent entries is returned.
pub fn richardson(values: &[f64], noise: &[f64], ratio: f64) -> Extrapolated {
    let n = values.len();
    let last = values[n - 1];
    if n < 2 {
        return Extrapolated {
            value: last,
            error: f64::INFINITY,
        };
    }
    let mut prev: Vec<f64> = values.to_vec();
    let mut prev_noise: Vec<f64> = noise.to_vec();
    let mut best = Extrapolated {
        value: last,
        error: (values[n - 1] - values[n - 2]).abs().max(noise[n - 1]),
    };
    let mut factor = 1.0;
    for _ in 1..n {
        factor *= ratio;
        let next: Vec<f64> = prev.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        let next_noise: Vec<f64> = prev_noise.windows(2).map(|w| (factor * w[1] + w[0]) / (factor - 1.0)).collect();
        for (k, v) in next.iter().enumerate() {
            let e = (v - prev[k]).abs().max((v - prev[k + 1]).abs()).max(next_noise[k]);
            if e < best.error {
                best = Extrapolated { value: *v, error: e };
            }
        }
        prev = next;
        prev_noise = next_noise;
    }
    best.error = best.error.max(4.0 * f64::EPSILON * best.value.abs());
    best
}

/// Relative accuracy assumed for sampled values.
pub const SAMPLE_NOISE: f64 = 1e-14;

/// Large-`R` behaviour of a sampled function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DecayClass {
    /// `|f| ~ C R^gamma`.
    PowerLaw { gamma: f64, error: f64 },
    /// Faster than every power of `R`.
    SuperPolynomial,
}

/// Phase shifts of the detection grids.
const PHASES: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
/// Exponent estimates within this distance of a half-integer are snapped to it.
pub const LATTICE_SNAP: f64 = 1e-3;
/// Tolerated drift of the exponent between phase-shifted grids.
pub const SLOPE_TOL: f64 = 1e-3;
/// Tolerated relative drift of the leading amplitude between phase-shifted grids.
pub const AMPLITUDE_TOL: f64 = 1e-8;

fn sample(f: &Sampler, grid: &FitGrid, exec: Execution) -> Result<Vec<f64>> {
    let nodes = grid.nodes();
    let values = exec.try_map(&nodes, |&r| f(r))?;
    if let Some((r, v)) = nodes.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
        return Err(Error::EvaluationFailure(format!("sampler returned {v} at R = {r}")));
    }
    Ok(values)
}

/// Classifies the large-`R` decay from log-log slopes on four grids shifted
/// by a quarter step each.
///
/// Fails with `NonPowerLaw` when the slopes do not settle, differ between
/// the shifted grids, or the leading amplitude `f R^{-gamma}` depends on the
/// grid phase (log-periodic behaviour).
pub fn classify_decay(f: &Sampler, grid: &FitGrid, exec: Execution) -> Result<DecayClass> {
    let ln_ratio = grid.ratio.ln();
    let mut slopes = Vec::with_capacity(PHASES.len());
    let mut samples = Vec::with_capacity(PHASES.len());
    for phase in PHASES {
        let g = grid.shifted(phase);
        let values = sample(f, &g, exec)?;
        let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        if abs.contains(&0.0) {
            return Ok(DecayClass::SuperPolynomial);
        }
        let s: Vec<f64> = abs.windows(2).map(|w| (w[1] / w[0]).ln() / ln_ratio).collect();
        let (first, last) = (s[0], s[s.len() - 1]);
        if last < -20.0 && last < first - 10.0 {
            return Ok(DecayClass::SuperPolynomial);
        }
        let noise: Vec<f64> = abs.windows(2).map(|_| 2.0 * SAMPLE_NOISE / ln_ratio).collect();
        slopes.push(richardson(&s, &noise, grid.ratio));
        samples.push((g, abs));
    }
    let worst = slopes.iter().map(|s| s.error).fold(0.0, f64::max);
    let (lo, hi) = slopes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.value), b.max(s.value)));
    let mean = slopes.iter().map(|s| s.value).sum::<f64>() / slopes.len() as f64;
    let scale = mean.abs().max(1.0);
    if worst > SLOPE_TOL * scale || hi - lo > SLOPE_TOL * scale {
        return Err(Error::NonPowerLaw(format!(
            "log-log slopes range over [{lo:.6}, {hi:.6}] with extrapolation error {worst:.2e}"
        )));
    }
    let snapped = (2.0 * mean).round() / 2.0;
    let gamma = if (mean - snapped).abs() <= LATTICE_SNAP { snapped } else { mean };

    let amplitudes: Vec<Extrapolated> = samples
        .iter()
        .map(|(g, abs)| {
            let h: Vec<f64> = g.nodes().iter().zip(abs).map(|(r, v)| v * r.powf(-gamma)).collect();
            let noise: Vec<f64> = h.iter().map(|v| SAMPLE_NOISE * v.abs()).collect();
            richardson(&h, &noise, g.ratio)
        })
        .collect();
    let (alo, ahi) = amplitudes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.value), b.max(s.value)));
    let amean = 0.5 * (alo + ahi);
    if ahi - alo > AMPLITUDE_TOL * amean.abs() {
        return Err(Error::NonPowerLaw(format!(
            "leading amplitude R^{{{}}} f(R) varies with the grid phase over [{alo:.12e}, {ahi:.12e}]",
            -gamma
        )));
    }
    Ok(DecayClass::PowerLaw {
        gamma,
        error: worst.max(hi - lo),
    })
}

/// Exponent `gamma` with `f(R) ~ a_0 R^gamma`; see [`classify_decay`].
pub fn detect_gamma(f: &Sampler, grid: &FitGrid, exec: Execution) -> Result<f64> {
    match classify_decay(f, grid, exec)? {
        DecayClass::PowerLaw { gamma, .. } => Ok(gamma),
        DecayClass::SuperPolynomial => Err(Error::NonPowerLaw(
            "decay is faster than every power of R".into(),
        )),
    }
}

/// Result of [`fit_expansion`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    /// Coefficients from whichever method has the smaller error estimate.
    pub expansion: AsymptoticExpansion,
    /// Per-coefficient error estimates (always positive).
    pub errors: Vec<f64>,
    /// Coefficients of the least-squares cross-check.
    pub least_squares: Vec<f64>,
    /// `|peeling - least squares|` per coefficient.
    pub disagreement: Vec<f64>,
    pub grid: FitGrid,
    /// Condition number of the equilibrated least-squares matrix.
    pub condition: f64,
}

impl FitReport {
    /// Condition numbers above this are flagged in reports.
    pub const CONDITION_FLAG: f64 = 1e10;

    pub fn ill_conditioned(&self) -> bool {
        self.condition > Self::CONDITION_FLAG
    }

    pub fn coeffs(&self) -> Vec<f64> {
        self.expansion.coeffs.iter().map(|c| c.re).collect()
    }
}

/// Above this condition number the least-squares cross-check is meaningless.
pub const MAX_CONDITION: f64 = 1e13;
/// Extra polynomial degrees absorbed by the least-squares fit.
const LSQ_EXTRA: usize = 3;
const LSQ_MIN_DEGREE: usize = 7;
/// Peeling and least squares may differ by this many combined error estimates.
const AGREEMENT: f64 = 16.0;

/// Coefficients `a_0..a_N` of `f(R) ~ sum_j a_j R^{gamma-j}`.
///
/// Peeling: `a_j` is the Richardson limit of `R^{j-gamma}(f(R) - sum_{i<j} a_i R^{gamma-i})`.
/// Cross-check: least squares of `f R^{-gamma}` against a polynomial in `1/R`
/// of degree `max(N + 3, 7)` via SVD. The two must agree within their error
/// estimates; each coefficient is taken from the method with the smaller one.
pub fn fit_expansion(f: &Sampler, gamma: f64, order: usize, grid: &FitGrid, exec: Execution) -> Result<FitReport> {
    if grid.points < order + 3 {
        return Err(Error::InvalidArgument(format!(
            "{} grid points cannot determine {} coefficients",
            grid.points,
            order + 1
        )));
    }
    let nodes = grid.nodes();
    let values = sample(f, grid, exec)?;
    let h: Vec<f64> = nodes.iter().zip(&values).map(|(r, v)| v * r.powf(-gamma)).collect();
    let x: Vec<f64> = nodes.iter().map(|r| 1.0 / r).collect();

    // peeling
    let mut peel = Vec::with_capacity(order + 1);
    let mut peel_err = Vec::with_capacity(order + 1);
    for j in 0..=order {
        let mut g = Vec::with_capacity(h.len());
        let mut noise = Vec::with_capacity(h.len());
        for (hk, xk) in h.iter().zip(&x) {
            let terms: Vec<f64> = peel.iter().enumerate().map(|(i, a): (usize, &f64)| a * xk.powi(i as i32)).collect();
            let known: f64 = terms.iter().sum();
            let size = hk.abs() + terms.iter().map(|t| t.abs()).sum::<f64>();
            let scale = xk.powi(j as i32);
            g.push((hk - known) / scale);
            noise.push((SAMPLE_NOISE * hk.abs() + 4.0 * f64::EPSILON * size) / scale);
        }
        let e = richardson(&g, &noise, grid.ratio);
        peel.push(e.value);
        peel_err.push(e.error);
    }

    // least squares in y = x / x_max; the spread between degrees d and d - 1
    // estimates the truncation error
    let degree = (order + LSQ_EXTRA).max(LSQ_MIN_DEGREE).min(nodes.len() - 2);
    let h_max = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (lsq, lsq_err, condition) = least_squares(&x, &h, order, degree)?;
    let (lower, _, _) = least_squares(&x, &h, order, degree - 1)?;
    let lsq_err: Vec<f64> = lsq_err
        .iter()
        .zip(lsq.iter().zip(&lower))
        .map(|(e, (a, b))| e.max((a - b).abs()))
        .collect();

    let mut best = Vec::with_capacity(order + 1);
    let mut errors = Vec::with_capacity(order + 1);
    let mut disagreement = Vec::with_capacity(order + 1);
    for j in 0..=order {
        let diff = (peel[j] - lsq[j]).abs();
        let floor = SAMPLE_NOISE * h_max * nodes[0].powi(j as i32);
        let allowed = AGREEMENT * (peel_err[j] + lsq_err[j]) + floor;
        if diff > allowed {
            return Err(Error::DisagreeingMethods(format!(
                "a_{j}: peeling {:.12e} vs least squares {:.12e} (allowed {allowed:.2e})",
                peel[j], lsq[j]
            )));
        }
        disagreement.push(diff);
        if lsq_err[j] < peel_err[j] {
            best.push(lsq[j]);
            errors.push(lsq_err[j].max(f64::MIN_POSITIVE));
        } else {
            best.push(peel[j]);
            errors.push(peel_err[j].max(f64::MIN_POSITIVE));
        }
    }

    Ok(FitReport {
        expansion: AsymptoticExpansion::new(gamma, best.iter().map(|a| Complex64::new(*a, 0.0)).collect()),
        errors,
        least_squares: lsq,
        disagreement,
        grid: *grid,
        condition,
    })
}

/// Least squares of `h` against a polynomial of the given degree in
/// `x / x[0]` with equilibrated columns. Returns the first `order + 1`
/// coefficients in `x`, their standard errors and the condition number.
fn least_squares(x: &[f64], h: &[f64], order: usize, degree: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let x_max = x[0];
    let rows = x.len();
    let mut a = DMatrix::from_fn(rows, degree + 1, |k, i| (x[k] / x_max).powi(i as i32));
    let norms: Vec<f64> = (0..=degree).map(|i| a.column(i).norm()).collect();
    for (i, n) in norms.iter().enumerate() {
        a.column_mut(i).scale_mut(1.0 / n);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }
    let rhs = DVector::from_column_slice(h);
    let sol = svd
        .solve(&rhs, f64::EPSILON * smax)
        .map_err(|e| Error::EvaluationFailure(e.to_string()))?;
    let resid = (&a * &sol - &rhs).norm();
    let dof = rows.saturating_sub(degree + 1).max(1) as f64;
    let h_max = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sigma = (resid / dof.sqrt()).max(SAMPLE_NOISE * h_max);
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let coeffs = (0..=order).map(|i| sol[i] / norms[i] / x_max.powi(i as i32)).collect();
    let errors = (0..=order)
        .map(|i| {
            let var: f64 = (0..=degree).map(|k| (v_t[(k, i)] / svd.singular_values[k]).powi(2)).sum();
            sigma * var.sqrt() / norms[i] / x_max.powi(i as i32)
        })
        .collect();
    Ok((coeffs, errors, condition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnitude::little_m;
    use crate::space::{padic_profile, sphere_profile, SphereMetric};
    use std::f64::consts::PI;

    const EXEC: Execution = Execution::Parallel;

    #[test]
    fn richardson_polynomial_is_exact() {
        let xs: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();
        let v: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + 0.5 * x * x).collect();
        let e = richardson(&v, &[0.0; 8], 2.0);
        assert!((e.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn detect_examples() {
        let grid = FitGrid::default();
        assert_eq!(detect_gamma(&|r: f64| Ok(r.powi(-2)), &grid, EXEC).unwrap(), -2.0);
        let g = sphere_profile(2, SphereMetric::Geodesic, true).unwrap();
        let f = |r: f64| little_m(&g, r);
        assert_eq!(detect_gamma(&f, &FitGrid::for_profile(&g), EXEC).unwrap(), -2.0);
        let off_lattice = detect_gamma(&|r: f64| Ok(r.powf(-0.7) * (1.0 + 1.0 / r)), &grid, EXEC).unwrap();
        assert!((off_lattice + 0.7).abs() < 1e-8);
        let e = classify_decay(&|r: f64| Ok((-r).exp()), &grid, EXEC).unwrap();
        assert_eq!(e, DecayClass::SuperPolynomial);
    }

    #[test]
    fn padic_is_not_a_power_law() {
        for p in [2, 3, 5] {
            let q = padic_profile(p, 60, 1e-15).unwrap();
            let f = |r: f64| little_m(&q, r);
            let err = detect_gamma(&f, &FitGrid::for_profile(&q), EXEC).unwrap_err();
            assert!(matches!(err, Error::NonPowerLaw(_)), "p = {p}: {err:?}");
        }
    }

    #[test]
    fn geodesic_sphere_coefficients() {
        let g = sphere_profile(2, SphereMetric::Geodesic, true).unwrap();
        let f = |r: f64| little_m(&g, r);
        let rep = fit_expansion(&f, -2.0, 4, &FitGrid::for_profile(&g), EXEC).unwrap();
        let want = [0.5, 0.0, -0.5, 0.0, 0.5];
        for (j, (a, w)) in rep.coeffs().iter().zip(want).enumerate() {
            assert!((a - w).abs() < 1e-5, "a_{j} = {a}");
            assert!((a - w).abs() <= 4.0 * rep.errors[j], "a_{j} = {a} +- {}", rep.errors[j]);
        }
        assert!(rep.errors[..3].iter().all(|e| *e < 1e-6));
    }

    #[test]
    fn chordal_circle_coefficients() {
        let c1 = sphere_profile(1, SphereMetric::Chordal, true).unwrap();
        let f = |r: f64| little_m(&c1, r);
        let rep = fit_expansion(&f, -1.0, 2, &FitGrid::for_profile(&c1), EXEC).unwrap();
        let a = rep.coeffs();
        assert!((a[0] - 1.0 / PI).abs() < 1e-8);
        assert!(a[1].abs() < 1e-7);
        assert!((a[2] - 0.25 / PI).abs() < 1e-6);
    }

    #[test]
    fn exponential_has_zero_coefficients() {
        let grid = FitGrid::new(64.0, 2.0, 12).unwrap();
        let rep = fit_expansion(&|r: f64| Ok((-r).exp()), -2.0, 4, &grid, EXEC).unwrap();
        assert!(rep.coeffs().iter().all(|a| a.abs() < 1e-12), "{:?}", rep.coeffs());
    }

    #[test]
    fn too_few_points() {
        let grid = FitGrid::new(8.0, 2.0, 5).unwrap();
        assert!(fit_expansion(&|r: f64| Ok(1.0 / r), -1.0, 4, &grid, EXEC).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn recovers_synthetic_expansions(
                gamma in prop::sample::select(vec![-3.0, -2.0, -1.5, -1.0, 0.5]),
                a0 in 0.2f64..3.0,
                rest in prop::collection::vec(-2.0f64..2.0, 4),
                noise in 0.0f64..5.0,
            ) {
                let mut coeffs = vec![a0];
                coeffs.extend(rest);
                let c = coeffs.clone();
                let f = move |r: f64| {
                    let series: f64 = c.iter().enumerate().map(|(j, a)| a * r.powf(gamma - j as f64)).sum();
                    Ok(series + noise * (-r).exp())
                };
                let rep = fit_expansion(&f, gamma, 4, &FitGrid::new(40.0, 2.0, 12).unwrap(), EXEC).unwrap();
                for (j, (got, want)) in rep.coeffs().iter().zip(&coeffs).enumerate() {
                    let tol = 1e-11 * 40f64.powi(j as i32);
                    prop_assert!((got - want).abs() < tol, "a_{} = {} vs {}", j, got, want);
                    prop_assert!((got - want).abs() <= 4.0 * rep.errors[j], "a_{} = {} +- {}", j, got, rep.errors[j]);
                }
            }
        }
    }
}
