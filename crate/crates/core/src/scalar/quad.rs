//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands.
//!
//! Global adaptive bisection with the 7/15-point nested pair. Declared
//! algebraic endpoint behaviour `(t - a)^alpha` is removed by the substitution
//! `t = a + h u^k` before bisection starts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num::complex::Complex64;
use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    #[serde(serialize_with = "crate::complex_serde::one")]
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Tolerances and endpoint declarations for [`integrate`].
///
/// Convergence is declared once `error <= abs_tol + rel_tol * |value|`.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Integrand behaves like `(t - a)^alpha` near the left endpoint.
    pub left_exponent: Option<f64>,
    /// Integrand behaves like `(b - t)^alpha` near the right endpoint.
    pub right_exponent: Option<f64>,
}

impl QuadOptions {
    /// Mixed tolerance `tol * (1 + |value|)`.
    pub fn mixed(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            rel_tol: tol,
            max_intervals: 4000,
            left_exponent: None,
            right_exponent: None,
        }
    }

    pub fn relative(rel_tol: f64, abs_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..QuadOptions::mixed(rel_tol)
        }
    }

    pub fn with_endpoints(mut self, left: Option<f64>, right: Option<f64>) -> Self {
        self.left_exponent = left;
        self.right_exponent = right;
        self
    }

    fn threshold(&self, value: Complex64) -> f64 {
        self.abs_tol + self.rel_tol * value.norm()
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut values = [(Complex64::zero(), Complex64::zero()); 7];
    for (j, x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kron += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_asc = (fc - mean).norm() * WGK[7];
    for (j, (f1, f2)) in values.iter().enumerate() {
        res_asc += ((f1 - mean).norm() + (f2 - mean).norm()) * WGK[j];
    }
    let abs_half = half.abs();
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut error = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value: kron * half,
        error,
    }
}

/// Plain global adaptive Gauss-Kronrod on a smooth (or mildly singular) integrand.
fn adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadratureResult> {
    if a == b {
        return Ok(QuadratureResult {
            value: Complex64::zero(),
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let first = kronrod(f, a, b);
    let mut evaluations = 15;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while total_err > opts.threshold(total) {
        if heap.len() >= opts.max_intervals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval exhausted at machine resolution
            heap.push(worst);
            break;
        }
        let left = kronrod(f, worst.a, mid);
        let right = kronrod(f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed accumulated rounding from the running updates
    let (value, error) = heap
        .iter()
        .fold((Complex64::zero(), 0.0), |(v, e), s| (v + s.value, e + s.error));
    let result = QuadratureResult {
        value,
        error_estimate: error,
        evaluations,
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::EvaluationFailure(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    if error > opts.threshold(value) {
        return Err(Error::ToleranceNotMet { best: result });
    }
    Ok(result)
}

/// Substitution power that smooths an endpoint behaving like `s^alpha`.
fn substitution_power(alpha: f64) -> Result<u32> {
    if !(alpha > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "endpoint exponent {alpha} is not integrable"
        )));
    }
    if alpha >= 0.0 && (alpha - alpha.round()).abs() < 1e-12 {
        return Ok(1);
    }
    Ok((2.0 / (alpha + 1.0)).ceil().clamp(1.0, 64.0) as u32)
}

/// Integrates over `[lo, hi]`, a sub-interval of `[a, b]`, with
/// `t = lo + (hi - lo) u^k` (or mirrored at `hi`). `f` receives `t` together
/// with `t - a` and `b - t` formed without cancellation.
#[allow(clippy::too_many_arguments)]
fn singular_piece(
    f: &dyn Fn(f64, f64, f64) -> Complex64,
    (a, b): (f64, f64),
    lo: f64,
    hi: f64,
    k: u32,
    at_left: bool,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let h = hi - lo;
    let kf = k as f64;
    let g = |u: f64| {
        let w = h * u.powi(k as i32);
        // below this offset t^alpha may overflow while the Jacobian underflows
        if k > 1 && w < 1e-280 * h {
            return Complex64::zero();
        }
        let jac = if k == 1 { h } else { h * kf * u.powi(k as i32 - 1) };
        if at_left {
            let from_a = (lo - a) + w;
            f(lo + w, from_a, (b - lo) - w) * jac
        } else {
            let to_b = (b - hi) + w;
            f(hi - w, (hi - a) - w, to_b) * jac
        }
    };
    adaptive(&g, 0.0, 1.0, opts)
}

/// Adaptive quadrature of `f` over `[a, b]` with declared endpoint behaviour.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_offsets(|t, _, _| f(t), a, b, opts)
}

/// Like [`integrate`], for integrands that need the distances to both
/// endpoints accurately: `f(t, t - a, b - t)`.
pub fn integrate_offsets<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(f64, f64, f64) -> Complex64,
{
    integrate_dyn(&f, a, b, opts)
}

fn integrate_dyn(
    f: &dyn Fn(f64, f64, f64) -> Complex64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("bounds [{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: Complex64::zero(),
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        let mirrored = QuadOptions {
            left_exponent: opts.right_exponent,
            right_exponent: opts.left_exponent,
            ..*opts
        };
        let r = integrate_dyn(&|t, l, r| f(t, -r, -l), b, a, &mirrored)?;
        return Ok(QuadratureResult {
            value: -r.value,
            ..r
        });
    }
    let kl = opts.left_exponent.map(substitution_power).transpose()?.unwrap_or(1);
    let kr = opts.right_exponent.map(substitution_power).transpose()?.unwrap_or(1);
    match (kl, kr) {
        (k, 1) => singular_piece(f, (a, b), a, b, k, true, opts),
        (1, k) => singular_piece(f, (a, b), a, b, k, false, opts),
        (k1, k2) => {
            let mid = 0.5 * (a + b);
            let half = QuadOptions {
                abs_tol: 0.5 * opts.abs_tol,
                ..*opts
            };
            let left = singular_piece(f, (a, b), a, mid, k1, true, &half);
            let right = singular_piece(f, (a, b), mid, b, k2, false, &half);
            combine(left, right, opts)
        }
    }
}

fn combine(
    left: Result<QuadratureResult>,
    right: Result<QuadratureResult>,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let unwrap = |r: Result<QuadratureResult>| match r {
        Ok(q) => Ok(q),
        Err(Error::ToleranceNotMet { best }) => Ok(best),
        Err(e) => Err(e),
    };
    let (l, r) = (unwrap(left)?, unwrap(right)?);
    let out = QuadratureResult {
        value: l.value + r.value,
        error_estimate: l.error_estimate + r.error_estimate,
        evaluations: l.evaluations + r.evaluations,
    };
    if out.error_estimate > opts.threshold(out.value) {
        return Err(Error::ToleranceNotMet { best: out });
    }
    Ok(out)
}

/// `∫_a^b f` to mixed tolerance `tol * (1 + |value|)`, smooth integrand.
pub fn integrate_finite<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate(f, a, b, &QuadOptions::mixed(tol))
}

/// Large-argument decay class of a semi-infinite integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// `|f(x)| <= C e^{-rate x}`.
    Exponential { rate: f64 },
    /// `|f(x)| <= C x^{-exponent}`, exponent > 1.
    Power { exponent: f64 },
}

const ENVELOPE_SAMPLES: usize = 17;

/// `∫_a^∞ f` for integrands of a declared decay class.
///
/// The truncation point is pushed out until the tail bound implied by the
/// sampled envelope drops below a tenth of the tolerance; the tail bound is
/// added to the reported error.
pub fn integrate_decaying<F>(f: F, a: f64, decay: Decay, opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    match decay {
        Decay::Power { exponent } => {
            if !(exponent > 1.0) {
                return Err(Error::SlowDecay(exponent));
            }
            // x = x0 e^u turns x^{-q} into e^{-(q-1) u}
            let x0 = a.max(1.0);
            let head = if a < x0 {
                Some(integrate(&f, a, x0, &QuadOptions { right_exponent: None, ..*opts })?)
            } else {
                None
            };
            let g = |u: f64| {
                let x = x0 * u.exp();
                f(x) * x
            };
            let tail_opts = QuadOptions {
                left_exponent: if a < x0 { None } else { opts.left_exponent },
                right_exponent: None,
                ..*opts
            };
            let tail = exponential_tail(&g, 0.0, exponent - 1.0, &tail_opts)?;
            Ok(match head {
                Some(h) => QuadratureResult {
                    value: h.value + tail.value,
                    error_estimate: h.error_estimate + tail.error_estimate,
                    evaluations: h.evaluations + tail.evaluations,
                },
                None => tail,
            })
        }
        Decay::Exponential { rate } => exponential_tail(&f, a, rate, opts),
    }
}

fn exponential_tail(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    rate: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if !(rate > 0.0) {
        return Err(Error::SlowDecay(rate));
    }
    let span = 2.0 / rate;
    let envelope = |x: f64| {
        (0..ENVELOPE_SAMPLES)
            .map(|i| f(x + span * i as f64 / (ENVELOPE_SAMPLES - 1) as f64).norm())
            .fold(0.0, f64::max)
    };
    let opts = QuadOptions {
        right_exponent: None,
        ..*opts
    };
    let mut upper = a + 1.0 / rate;
    let mut evaluations = 0;
    let mut head: Option<QuadratureResult> = None;
    for _ in 0..60 {
        let env = envelope(upper);
        evaluations += ENVELOPE_SAMPLES;
        if !env.is_finite() {
            return Err(Error::EvaluationFailure(format!("non-finite integrand near {upper}")));
        }
        // the envelope over two decay lengths bounds the rest of the tail geometrically
        let tail_bound = 1.2 * env / rate;
        let scale = head.map(|h| h.value).unwrap_or_default();
        if env == 0.0 || tail_bound <= 0.1 * opts.threshold(scale) {
            let h = match head {
                Some(h) => h,
                None => integrate(f, a, upper, &opts).map_err(|e| add_tail(e, tail_bound))?,
            };
            return Ok(QuadratureResult {
                value: h.value,
                error_estimate: h.error_estimate + tail_bound,
                evaluations: h.evaluations + evaluations,
            });
        }
        upper = a + (upper - a) * 1.5 + span;
        // provisional head, the relative scale of the next check
        head = integrate(f, a, upper, &opts).ok();
    }
    Err(Error::ToleranceNotMet {
        best: QuadratureResult {
            value: head.map(|h| h.value).unwrap_or_default(),
            error_estimate: f64::INFINITY,
            evaluations,
        },
    })
}

fn add_tail(e: Error, tail_bound: f64) -> Error {
    match e {
        Error::ToleranceNotMet { best } => Error::ToleranceNotMet {
            best: QuadratureResult {
                error_estimate: best.error_estimate + tail_bound,
                ..best
            },
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn finite_examples() {
        let one = integrate_finite(re(|_| 1.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((one.value.re - 1.0).abs() < 1e-14);
        let tri = integrate_finite(re(|t| t * (t / 2.0)), 0.0, 2.0, 1e-12).unwrap();
        assert!((tri.value.re - 4.0 / 3.0).abs() < 1e-14);
        let sine = integrate_finite(re(f64::sin), 0.0, PI, 1e-12).unwrap();
        assert!((sine.value.re - 2.0).abs() < 1e-14);
        assert!(sine.error_estimate <= 1e-12 * 3.0);
        assert!(sine.evaluations >= 15);
    }

    #[test]
    fn endpoint_singularities() {
        // ∫_0^1 t^{-1/2} = 2 and ∫_0^2 (4 - t^2)^{-1/2} = pi/2
        let opts = QuadOptions::relative(1e-12, 1e-14).with_endpoints(Some(-0.5), None);
        let r = integrate(re(|t| t.powf(-0.5)), 0.0, 1.0, &opts).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-12);
        let opts = QuadOptions::relative(1e-12, 1e-14).with_endpoints(None, Some(-0.5));
        let r = integrate_offsets(|t, _, to_b| Complex64::new(((2.0 + t) * to_b).powf(-0.5), 0.0), 0.0, 2.0, &opts).unwrap();
        assert!((r.value.re - PI / 2.0).abs() < 1e-12);
        // both ends: ∫_0^1 t^{-0.7} (1-t)^{-0.3} = B(0.3, 0.7) = pi / sin(0.3 pi)
        let opts = QuadOptions::relative(1e-11, 1e-14).with_endpoints(Some(-0.7), Some(-0.3));
        let r = integrate_offsets(|t, _, to_b| Complex64::new(t.powf(-0.7) * to_b.powf(-0.3), 0.0), 0.0, 1.0, &opts).unwrap();
        assert!((r.value.re - PI / (0.3 * PI).sin()).abs() < 1e-10);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^1 t^{i} dt = 1 / (1 + i)
        let opts = QuadOptions::relative(1e-12, 1e-14).with_endpoints(Some(0.0), None);
        let r = integrate(|t| Complex64::new(0.0, t.ln()).exp(), 0.0, 1.0, &opts).unwrap();
        let want = Complex64::new(1.0, 1.0).inv();
        assert!((r.value - want).norm() < 1e-12);
    }

    #[test]
    fn decaying_examples() {
        let opts = QuadOptions::mixed(1e-12);
        let e = integrate_decaying(re(|x| (-x).exp()), 0.0, Decay::Exponential { rate: 1.0 }, &opts).unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-11);
        let g = integrate_decaying(
            re(|x| (-x).exp() * x.powf(1.5)),
            0.0,
            Decay::Exponential { rate: 0.5 },
            &opts.with_endpoints(Some(1.5), None),
        )
        .unwrap();
        assert!((g.value.re - 1.329_340_388_179_137).abs() < 1e-11);
        let p = integrate_decaying(re(|x| x.powi(-3)), 1.0, Decay::Power { exponent: 3.0 }, &opts).unwrap();
        assert!((p.value.re - 0.5).abs() < 1e-11);
    }

    #[test]
    fn slow_decay_rejected() {
        let opts = QuadOptions::mixed(1e-8);
        let r = integrate_decaying(re(|x| 1.0 / x), 1.0, Decay::Power { exponent: 1.0 }, &opts);
        assert!(matches!(r, Err(Error::SlowDecay(_))));
    }

    #[test]
    fn decaying_agrees_with_finite_on_compact_support() {
        let bump = |x: f64| {
            if x < 3.0 {
                Complex64::new((x * (3.0 - x)).powi(2), 0.0)
            } else {
                Complex64::zero()
            }
        };
        let opts = QuadOptions::relative(1e-13, 1e-15);
        let fin = integrate(bump, 0.0, 3.0, &opts).unwrap();
        let dec = integrate_decaying(bump, 0.0, Decay::Exponential { rate: 1.0 }, &opts).unwrap();
        assert!((fin.value - dec.value).norm() < 1e-12);
    }

    #[test]
    fn tolerance_failure_carries_estimate() {
        let opts = QuadOptions {
            max_intervals: 3,
            ..QuadOptions::mixed(1e-15)
        };
        match integrate(re(|x| (50.0 * x).sin().abs()), 0.0, 10.0, &opts) {
            Err(Error::ToleranceNotMet { best }) => assert!(best.error_estimate > 0.0),
            other => panic!("expected ToleranceNotMet, got {other:?}"),
        }
    }
}
