use std::cell::RefCell;
use std::f64::consts::E;
use std::sync::Arc;

use num::complex::Complex64;
use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formal::{taylor_coeffs, AsymptoticExpansion};
use crate::magnitude::little_m_with_error;
use crate::scalar::{contour_mean, integrate, integrate_decaying, recip_gamma, Decay, QuadOptions};
use crate::space::{RadialProfile, TailBound};

/// Subtraction depths of the split Mellin integral: `taylor` terms of the
/// Taylor series at `R = 0` and `asymptotic` terms of the large-`R` expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MellinDepth {
    pub taylor: usize,
    pub asymptotic: usize,
}

impl MellinDepth {
    pub fn new(taylor: usize, asymptotic: usize) -> Self {
        MellinDepth { taylor, asymptotic }
    }
}

/// Quadrature settings used by [`mellin_transform`] by default.
pub fn mellin_options() -> QuadOptions {
    QuadOptions::relative(1e-11, 1e-15)
}

/// Open strip `(lo, hi)` of `Re s` on which the split integral converges.
pub fn mellin_strip(
    profile: &RadialProfile,
    depth: MellinDepth,
    expansion: Option<&AsymptoticExpansion>,
) -> Result<(f64, f64)> {
    let lo = -(depth.taylor as f64);
    let hi = if depth.asymptotic == 0 {
        profile.decay_exponent()
    } else {
        let e = expansion.ok_or_else(|| {
            Error::InsufficientDepth("an asymptotic depth needs a large-R expansion of m".into())
        })?;
        if e.coeffs.len() < depth.asymptotic {
            return Err(Error::InsufficientDepth(format!(
                "asymptotic depth {} exceeds the {} coefficients supplied",
                depth.asymptotic,
                e.coeffs.len()
            )));
        }
        depth.asymptotic as f64 - e.gamma.re
    };
    Ok((lo, hi))
}

/// Taylor cut-off: `t^{-s} ∫_0^t E_M(x) x^{s-1} dx` is summed as a series
/// below this distance.
const SERIES_LIMIT: f64 = 4.0;

/// `E_M(x) = e^{-x} - sum_{j<M} (-x)^j / j!`.
fn exp_remainder(m: usize, x: f64) -> f64 {
    if x <= m as f64 + 2.0 {
        let mut term = 1.0;
        for j in 0..m {
            term *= -x / (j as f64 + 1.0);
        }
        let mut sum = 0.0;
        let mut j = m;
        loop {
            sum += term;
            j += 1;
            term *= -x / j as f64;
            if term.abs() <= 1e-17 * sum.abs() && j as f64 > x {
                return sum;
            }
        }
    } else {
        let mut poly = 0.0;
        let mut term = 1.0;
        for j in 0..m {
            poly += term;
            term *= -x / (j as f64 + 1.0);
        }
        (-x).exp() - poly
    }
}

/// `sum_{j >= M} (-t)^j / (j! (j + s))`.
fn remainder_series(m: usize, s: Complex64, t: f64) -> Complex64 {
    let mut term = 1.0;
    for j in 0..m {
        term *= -t / (j as f64 + 1.0);
    }
    let mut sum = Complex64::zero();
    let mut j = m;
    loop {
        let piece = term / (s + j as f64);
        sum += piece;
        j += 1;
        term *= -t / j as f64;
        if term == 0.0 || (piece.norm() <= 1e-17 * sum.norm() && j as f64 > t + 1.0) {
            return sum;
        }
    }
}

/// `t^{-s} ∫_0^t E_M(x) x^{s-1} dx`, which equals `∫_0^1 E_M(R t) R^{s-1} dR`.
fn taylor_remainder_kernel(m: usize, s: Complex64, t: f64, opts: &QuadOptions) -> Result<Complex64> {
    if t <= SERIES_LIMIT {
        return Ok(remainder_series(m, s, t));
    }
    let base = remainder_series(m, s, SERIES_LIMIT) * (s * (SERIES_LIMIT / t).ln()).exp();
    let q = integrate(|x| (s * x.ln()).exp() * exp_remainder(m, x) / x, SERIES_LIMIT, t, opts)?;
    Ok(base + q.value * (-s * t.ln()).exp())
}

/// Runs `f` with a slot for the first error raised inside an integrand.
fn with_failure_slot<T>(f: impl FnOnce(&RefCell<Option<Error>>) -> Result<T>) -> Result<T> {
    let slot = RefCell::new(None);
    let out = f(&slot);
    if let Some(e) = slot.into_inner() {
        return Err(e);
    }
    out
}

fn record(slot: &RefCell<Option<Error>>, r: Result<Complex64>) -> Complex64 {
    r.unwrap_or_else(|e| {
        slot.borrow_mut().get_or_insert(e);
        Complex64::zero()
    })
}

/// Computed remainders below this multiple of the error in `m(R)` are noise.
const NOISE_FACTOR: f64 = 8.0;
/// Step and extent in `u = ln R` of the search for the noise cutoff.
const CUTOFF_STEP: f64 = 0.25;
const CUTOFF_LIMIT: f64 = 46.0;
/// Consecutive noise-level samples that fix the cutoff.
const CUTOFF_RUN: usize = 3;

/// First `u` beyond which the remainder `rem(u)` stays within
/// `NOISE_FACTOR` times its noise, and the size of the integral of that noise
/// against `e^{sigma u}` including the tail beyond the cutoff.
fn noise_cutoff(rem: &dyn Fn(f64) -> Result<(Complex64, f64)>, sigma: f64, rate: f64) -> Result<(f64, f64)> {
    let mut floor = 0.0;
    let mut run = 0;
    let mut k = 0;
    loop {
        let u = k as f64 * CUTOFF_STEP;
        let (r, noise) = rem(u)?;
        let weight = NOISE_FACTOR * noise * (sigma * u).exp();
        floor += weight * CUTOFF_STEP;
        if r.norm() <= NOISE_FACTOR * noise {
            run += 1;
        } else {
            run = 0;
        }
        if run == CUTOFF_RUN || u >= CUTOFF_LIMIT {
            let start = u - (run.saturating_sub(1)) as f64 * CUTOFF_STEP;
            return Ok((start.max(CUTOFF_STEP), floor + weight / rate.max(f64::EPSILON)));
        }
        k += 1;
    }
}

/// `f(s) = ∫_0^∞ m(R) R^{s-1} dR`, continued to the strip of [`mellin_strip`]
/// by subtracting `depth.taylor` Taylor terms on `[0, 1]` and
/// `depth.asymptotic` expansion terms on `[1, ∞)`.
pub fn mellin_transform(
    profile: &RadialProfile,
    s: Complex64,
    depth: MellinDepth,
    expansion: Option<&AsymptoticExpansion>,
    opts: &QuadOptions,
) -> Result<Complex64> {
    let (lo, hi) = mellin_strip(profile, depth, expansion)?;
    if !(s.re > lo && s.re < hi) {
        return Err(Error::InsufficientDepth(format!(
            "Re s = {} lies outside the continuation strip ({lo}, {hi}) at depths (M, N) = ({}, {})",
            s.re, depth.taylor, depth.asymptotic
        )));
    }
    let m_depth = depth.taylor;

    // ∫_0^1 (m(R) - sum_{j<M} B_j R^j) R^{s-1} dR = ∫ t^{-s} ∫_0^t E_M(x) x^{s-1} dx dmu(t)
    let dist = (m_depth..=m_depth + s.norm().ceil() as usize + 1)
        .map(|j| (s + j as f64).norm())
        .fold(f64::INFINITY, f64::min);
    let m_factorial: f64 = (1..=m_depth).map(|j| j as f64).product();
    let near = with_failure_slot(|slot| {
        profile.integrate(
            |t| record(slot, taylor_remainder_kernel(m_depth, s, t, opts)),
            m_depth as f64,
            TailBound {
                constant: E / (m_factorial * dist),
                power: m_depth as f64,
            },
            opts,
        )
    })?;

    let mut poles = Complex64::zero();
    if m_depth > 0 {
        let b = taylor_coeffs(profile, m_depth - 1, opts)?;
        for (j, bj) in b.iter().enumerate() {
            let denom = s + j as f64;
            if denom.is_zero() {
                return Err(Error::PoleArgument(format!("{s}")));
            }
            poles += bj / denom;
        }
    }

    let n_depth = depth.asymptotic;
    let terms: &[Complex64] = match expansion {
        Some(e) => &e.coeffs[..n_depth],
        None => &[],
    };
    let gamma = expansion.map(|e| e.gamma).unwrap_or_default();
    for (j, a) in terms.iter().enumerate() {
        let denom = s + gamma - j as f64;
        if denom.is_zero() {
            return Err(Error::PoleArgument(format!("{s}")));
        }
        poles -= a / denom;
    }

    // ∫_1^∞ (m(R) - sum_{j<N} a_j R^{gamma-j}) R^{s-1} dR with R = e^u
    let rate = if hi.is_finite() { hi - s.re } else { 1.0 };
    let far = if terms.is_empty() {
        with_failure_slot(|slot| {
            integrate_decaying(
                |u| match little_m_with_error(profile, u.exp()) {
                    Ok(q) => q.value * (s * u).exp(),
                    Err(e) => record(slot, Err(e)),
                },
                0.0,
                Decay::Exponential { rate },
                opts,
            )
        })?
    } else {
        let remainder = |u: f64| -> Result<(Complex64, f64)> {
            let q = little_m_with_error(profile, u.exp())?;
            let asym: Complex64 = terms
                .iter()
                .enumerate()
                .map(|(j, a)| a * ((gamma - j as f64) * u).exp())
                .sum();
            let noise = q.error_estimate.max(4.0 * f64::EPSILON * (q.value.norm() + asym.norm()));
            Ok((q.value - asym, noise))
        };
        let (cutoff, floor) = noise_cutoff(&remainder, s.re, rate)?;
        let far_opts = QuadOptions {
            abs_tol: opts.abs_tol.max(floor),
            ..*opts
        };
        with_failure_slot(|slot| {
            integrate(
                |u| match remainder(u) {
                    Ok((rem, _)) => rem * (s * u).exp(),
                    Err(e) => record(slot, Err(e)),
                },
                0.0,
                cutoff,
                &far_opts,
            )
        })?
    };

    Ok(near.value + poles + far.value)
}

/// Radius of the circle used to evaluate `B` near non-negative integers,
/// where `f(-z)` and `1/Gamma(-z)` have a pole and a zero.
pub const INTEGER_CIRCLE_RADIUS: f64 = 0.25;
const INTEGER_CIRCLE_NODES: usize = 32;

/// `B(z)` via the Mellin relation `f(s) = Gamma(s) B(-s)`, i.e.
/// `B(z) = f(-z) / Gamma(-z)`.
pub fn beta_via_mellin(
    profile: &RadialProfile,
    z: Complex64,
    depth: MellinDepth,
    expansion: Option<&AsymptoticExpansion>,
    opts: &QuadOptions,
) -> Result<Complex64> {
    let direct = |w: Complex64| -> Result<Complex64> {
        Ok(mellin_transform(profile, -w, depth, expansion, opts)? * recip_gamma(-w))
    };
    let k = z.re.round();
    let near_integer = k >= 0.0 && (z - k).norm() < 0.1;
    if !near_integer {
        return direct(z);
    }
    let (lo, hi) = mellin_strip(profile, depth, expansion)?;
    // circle in z must stay inside (-hi, -lo)
    let room = (-lo - z.re).min(z.re + hi);
    let radius = INTEGER_CIRCLE_RADIUS.min(0.5 * room);
    if !(radius > 0.15) {
        return Err(Error::InsufficientDepth(format!(
            "B({z}) near a non-negative integer needs Taylor depth above {}",
            z.re + 0.3
        )));
    }
    let f = |w: Complex64| direct(w);
    contour_mean(&f, z, radius, INTEGER_CIRCLE_NODES)
}

/// Callable `z -> value` for a meromorphic function, with the strip of
/// `Re z` where it can be evaluated.
pub type ComplexFn = dyn Fn(Complex64) -> Result<Complex64> + Send + Sync;

#[derive(Clone)]
pub struct MeromorphicEvaluator {
    f: Arc<ComplexFn>,
    pub strip: (f64, f64),
    pub depth: Option<MellinDepth>,
}

impl std::fmt::Debug for MeromorphicEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeromorphicEvaluator")
            .field("strip", &self.strip)
            .field("depth", &self.depth)
            .finish_non_exhaustive()
    }
}

impl MeromorphicEvaluator {
    pub fn new<F>(f: F, strip: (f64, f64)) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        MeromorphicEvaluator {
            f: Arc::new(f),
            strip,
            depth: None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        (self.f)(z)
    }

    /// Continued beta function of a profile.
    pub fn beta_continued(
        profile: RadialProfile,
        depth: MellinDepth,
        expansion: Option<AsymptoticExpansion>,
        opts: QuadOptions,
    ) -> Result<Self> {
        let (lo, hi) = mellin_strip(&profile, depth, expansion.as_ref())?;
        Ok(MeromorphicEvaluator {
            f: Arc::new(move |z| beta_via_mellin(&profile, z, depth, expansion.as_ref(), &opts)),
            strip: (-hi, -lo),
            depth: Some(depth),
        })
    }
}
