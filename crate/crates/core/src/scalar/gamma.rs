use std::f64::consts::PI;

use num::complex::Complex64;
use num::Zero;

use crate::error::{Error, Result};

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k-1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Stirling series is used once |z| reaches this radius.
const STIRLING_RADIUS: f64 = 18.0;

const POLE_TOL: f64 = 1e-14;

/// Nearest non-positive integer to `z` when `z` sits on it within `POLE_TOL`.
fn gamma_pole(z: Complex64) -> Option<i64> {
    let n = z.re.round();
    if n <= 0.0 && (z.re - n).abs() <= POLE_TOL && z.im.abs() <= POLE_TOL {
        Some(n as i64)
    } else {
        None
    }
}

/// sin(pi z) with the integer part of Re z reduced away first.
pub(crate) fn sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let delta = Complex64::new(z.re - n, z.im);
    let s = (delta * PI).sin();
    if (n as i64).rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}

/// log sin(pi z), stable for large |Im z|.
fn log_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 1.0 {
        return sin_pi(z).ln();
    }
    if z.im < 0.0 {
        return log_sin_pi(z.conj()).conj();
    }
    // sin(pi z) = e^{-i pi z} (e^{2 i pi z} - 1) / (2i), |e^{2 i pi z}| < 1 here.
    let n = z.re.round();
    let delta = Complex64::new(z.re - n, z.im);
    let i = Complex64::i();
    let e2 = (i * 2.0 * PI * delta).exp();
    let mut out = -i * PI * delta + ((e2 - 1.0) / (i * 2.0)).ln();
    if (n as i64).rem_euclid(2) != 0 {
        out += i * PI;
    }
    out
}

fn stirling(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::zero();
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_2PI_HALF + series
}

/// Complex log-Gamma.
///
/// Upward recursion into the Stirling region for Re z >= 1/2, reflection
/// below. The imaginary part is a continuous branch of log Gamma; it may differ
/// from other implementations by multiples of 2 pi i on the reflected side.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite argument {z}")));
    }
    if let Some(n) = gamma_pole(z) {
        return Err(Error::PoleArgument(format!("{n}")));
    }
    if z.re < 0.5 {
        let reflected = log_gamma(Complex64::new(1.0, 0.0) - z)?;
        return Ok(Complex64::new(PI.ln(), 0.0) - log_sin_pi(z) - reflected);
    }
    let mut w = z;
    let mut shift = Complex64::zero();
    while w.norm() < STIRLING_RADIUS {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

/// Gamma(z); fails at the poles.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    log_gamma(z).map(|l| l.exp())
}

/// 1/Gamma(z), entire; exactly zero at non-positive integers.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    if gamma_pole(z).is_some() {
        return Complex64::zero();
    }
    if z.re < 0.5 {
        // 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi
        let lg = log_gamma(Complex64::new(1.0, 0.0) - z).expect("Re(1 - z) > 1/2");
        return sin_pi(z) * lg.exp() / PI;
    }
    (-log_gamma(z).expect("Re z >= 1/2 is pole free")).exp()
}

/// Real Gamma for convenience.
pub fn gamma_real(x: f64) -> Result<f64> {
    gamma(Complex64::new(x, 0.0)).map(|g| g.re)
}

/// exp(nu * ln a) for a > 0.
pub fn principal_pow(a: f64, nu: Complex64) -> Result<Complex64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveBase(a));
    }
    Ok((nu * a.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    /// lnGamma reference values at 30 digits (mpmath `loggamma`).
    const LOG_GAMMA_REFERENCE: [((f64, f64), (f64, f64)); 8] = [
        ((3.5, 2.0), (0.580_733_212_081_268_17, 2.335_316_841_916_162_8)),
        ((0.5, 0.0), (0.572_364_942_924_700_09, 0.0)),
        ((0.1, 0.2), (1.419_622_556_608_801_5, -1.189_458_456_191_653_5)),
        ((10.0, -30.0), (-13.739_763_657_997_159, -85.479_763_972_516_437)),
        ((49.5, 49.0), (121.115_303_882_636_54, 197.166_235_702_517_17)),
        ((1.0, 50.0), (-75.664_866_303_826_085, 146.384_881_745_913_32)),
        ((-7.3, 0.4), (-8.571_828_232_396_580_4, -23.757_341_319_206_611)),
        ((-19.75, -12.5), (-75.370_440_382_768_002, 25.297_782_190_911_177)),
    ];

    #[test]
    fn trivial_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt().ln()).abs() < 1e-15);
        assert!((half.re - 0.572_364_942_9).abs() < 1e-10);
        assert_eq!(recip_gamma(c(0.0, 0.0)), Complex64::zero());
        assert_eq!(recip_gamma(c(-3.0, 0.0)), Complex64::zero());
        assert!((recip_gamma(c(2.0, 0.0)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn reference_values_match_within_contract() {
        for ((zr, zi), (lr, li)) in LOG_GAMMA_REFERENCE {
            let z = c(zr, zi);
            let got = log_gamma(z).unwrap();
            let want = c(lr, li);
            // same value of Gamma, branch-insensitive in the imaginary part
            let d = got - want;
            let k = (d.im / (2.0 * PI)).round();
            let d = c(d.re, d.im - 2.0 * PI * k);
            assert!(
                d.norm() <= 1e-12 * want.norm().max(1.0),
                "z = {z}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn recursion_identity_cross_check() {
        // Gamma(z+1) = z Gamma(z), evaluated on both sides of the reflection switch
        for z in [c(3.5, 2.0), c(0.3, -4.0), c(-2.7, 1.3), c(-12.2, 0.01), c(20.0, 35.0)] {
            let lhs = gamma(z + 1.0).unwrap();
            let rhs = z * gamma(z).unwrap();
            assert!(rel(lhs, rhs) < 1e-12, "{z}");
        }
    }

    #[test]
    fn reflection_formula() {
        for z in [c(0.25, 0.5), c(-3.4, 2.0), c(2.2, -7.0)] {
            let lhs = gamma(z).unwrap() * gamma(c(1.0, 0.0) - z).unwrap();
            let rhs = Complex64::new(PI, 0.0) / sin_pi(z);
            assert!(rel(lhs, rhs) < 1e-12, "{z}");
        }
    }

    #[test]
    fn poles_are_rejected() {
        for n in [0.0, -1.0, -7.0] {
            assert!(matches!(log_gamma(c(n, 0.0)), Err(Error::PoleArgument(_))));
        }
        // close but not on the pole: large finite value
        let g = gamma(c(-1.0 + 1e-8, 0.0)).unwrap();
        assert!((g.re * 1e-8 + 1.0).abs() < 1e-6);
    }

    #[test]
    fn principal_pow_examples() {
        assert!((principal_pow(1.0, c(3.0, -7.0)).unwrap() - 1.0).norm() < 1e-15);
        assert!((principal_pow(4.0, c(0.5, 0.0)).unwrap() - 2.0).norm() < 1e-15);
        let e = std::f64::consts::E;
        let want = c(1.0f64.cos(), 1.0f64.sin()) * e * e;
        assert!(rel(principal_pow(e, c(2.0, 1.0)).unwrap(), want) < 1e-15);
        assert!(matches!(principal_pow(0.0, c(1.0, 0.0)), Err(Error::NonPositiveBase(_))));
        assert!(matches!(principal_pow(-2.0, c(1.0, 0.0)), Err(Error::NonPositiveBase(_))));
    }

    #[test]
    fn gamma_two_and_a_half() {
        let g = gamma_real(2.5).unwrap();
        assert!((g - 1.5 * 0.5 * PI.sqrt()).abs() < 1e-14);
        assert!((g - 1.329_340_388_1).abs() < 1e-10);
    }
}
