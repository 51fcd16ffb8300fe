use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scalar::{principal_pow, QuadOptions, QuadratureResult};
use crate::space::{RadialProfile, TailBound};

/// Relative tolerance of the Laplace-transform quadrature behind [`little_m`].
pub const LITTLE_M_TOL: f64 = 1e-13;

/// Break points `c/R, 2c/R, 4c/R, ...` following the decay of `e^{-R t}`.
pub(crate) fn laplace_breaks(r: f64, support: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 4.0 / r;
    while t < support && t * r < 800.0 {
        out.push(t);
        t *= 2.0;
    }
    out
}

/// `∫ e^{-R t} dmu(t)` with its error bound.
pub fn little_m_with_error(profile: &RadialProfile, r: f64) -> Result<QuadratureResult> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale R = {r} must be non-negative and finite")));
    }
    let opts = QuadOptions::relative(LITTLE_M_TOL, 1e-300);
    let breaks = profile.density.as_ref().map(|d| laplace_breaks(r, d.support)).unwrap_or_default();
    let q = profile.integrate_split(
        |t| Complex64::new((-r * t).exp(), 0.0),
        0.0,
        TailBound {
            constant: 1.0,
            power: 0.0,
        },
        &opts,
        &breaks,
    )?;
    Ok(QuadratureResult {
        value: Complex64::new(q.value.re, 0.0),
        ..q
    })
}

/// `m(R) = ∫ e^{-R d(o, y)} dmu(y)` for a radial profile.
pub fn little_m(profile: &RadialProfile, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("scale R = {r} must be positive")));
    }
    little_m_with_error(profile, r).map(|q| q.value.re)
}

/// [`little_m`] over a grid of scales.
pub fn little_m_grid(profile: &RadialProfile, rs: &[f64], exec: Execution) -> Result<Vec<f64>> {
    exec.try_map(rs, |&r| little_m(profile, r))
}

/// `M(R, nu) = total_mass * m(R)^nu`.
pub fn mag_nu_radial(profile: &RadialProfile, r: f64, nu: Complex64) -> Result<Complex64> {
    let m = little_m(profile, r)?;
    Ok(principal_pow(m, nu)? * profile.total_mass)
}

/// Magnitude function `1 / m(R)` of a homogeneous space with normalized measure.
pub fn magnitude_radial(profile: &RadialProfile, r: f64) -> Result<f64> {
    if !profile.is_normalized() {
        return Err(Error::NotNormalized(profile.total_mass));
    }
    Ok(1.0 / little_m(profile, r)?)
}

/// `n! omega_n`, with `omega_n` the volume of the unit `n`-ball.
pub fn ball_volume_factorial(n: u32) -> f64 {
    // omega_n = omega_{n-2} 2 pi / n
    let mut omega = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        omega *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    (1..=n).map(|k| k as f64).product::<f64>() * omega
}

/// Leading large-scale coefficients of `(R^n / (n! omega_n))^{nu} M(R, nu)`
/// for a round unit sphere `S^n` of volume `vol`: `c_0 = vol` and
/// `c_1 = -nu (n + 1)/6 ∫ s dmu`, with scalar curvature `s = n (n - 1)`.
pub fn round_sphere_curvature_coefficients(n: u32, vol: f64, nu: Complex64) -> (f64, Complex64) {
    let nf = n as f64;
    let total_curvature = nf * (nf - 1.0) * vol;
    (vol, -nu * (nf + 1.0) / 6.0 * total_curvature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{padic_profile, sphere_profile, two_point_homogeneous_profile, SphereMetric};
    use std::f64::consts::PI;

    fn geodesic_s2_closed(r: f64) -> f64 {
        (1.0 + (-PI * r).exp()) / (2.0 * (1.0 + r * r))
    }

    #[test]
    fn two_point() {
        let p = two_point_homogeneous_profile();
        for r in [0.1, 1.0, 7.5] {
            assert!((little_m(&p, r).unwrap() - (-r).exp()).abs() < 1e-16);
            assert!((magnitude_radial(&p, r).unwrap() - r.exp()).abs() < 1e-13 * r.exp());
        }
    }

    #[test]
    fn geodesic_sphere_closed_form() {
        let p = sphere_profile(2, SphereMetric::Geodesic, true).unwrap();
        for r in [1e-3, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 100.0, 1e4] {
            let got = little_m(&p, r).unwrap();
            let want = geodesic_s2_closed(r);
            assert!((got - want).abs() <= 1e-12 * want, "R={r}: {got} vs {want}");
        }
    }

    #[test]
    fn circle_magnitude() {
        let p = sphere_profile(1, SphereMetric::Geodesic, true).unwrap();
        for r in [0.2, 1.0, 3.0, 40.0] {
            let want = PI * r / (1.0 - (-PI * r).exp());
            assert!((magnitude_radial(&p, r).unwrap() - want).abs() < 1e-12 * want);
        }
        assert!((magnitude_radial(&p, 1e-9).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn padic_series() {
        let p = padic_profile(2, 3, 1e-3).unwrap();
        for r in [0.5, 3.0, 100.0, 5000.0] {
            let want: f64 = (0..200).map(|k| 2f64.powi(-k - 1) * (-r * 2f64.powi(-k)).exp()).sum();
            let q = little_m_with_error(&p, r).unwrap();
            assert!((q.value.re - want).abs() <= 1e-14 * want, "R={r}");
            assert!(q.error_estimate <= 1e-15 * want);
        }
    }

    #[test]
    fn nu_examples() {
        let p = sphere_profile(2, SphereMetric::Geodesic, true).unwrap();
        let one = mag_nu_radial(&p, 1.3, Complex64::new(1.0, 0.0)).unwrap();
        assert!((one.re - little_m(&p, 1.3).unwrap()).abs() < 1e-16);
        let zero = mag_nu_radial(&p, 1.3, Complex64::new(0.0, 0.0)).unwrap();
        assert!((zero - 1.0).norm() < 1e-16);
        let inv = mag_nu_radial(&p, 1.0, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((inv.re - 4.0 / (1.0 + (-PI).exp())).abs() < 1e-12);
        assert!((inv.re - 3.834_304_671_334_548).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_rejected() {
        let p = sphere_profile(2, SphereMetric::Geodesic, false).unwrap();
        assert!(matches!(magnitude_radial(&p, 1.0), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn little_m_decreases_to_total_mass() {
        for p in [
            sphere_profile(3, SphereMetric::Chordal, true).unwrap(),
            sphere_profile(2, SphereMetric::Geodesic, false).unwrap(),
            padic_profile(3, 2, 1e-6).unwrap(),
        ] {
            let rs: Vec<f64> = (0..40).map(|k| 1e-4 * 1.5f64.powi(k)).collect();
            let ms = little_m_grid(&p, &rs, Execution::Parallel).unwrap();
            assert!(ms.windows(2).all(|w| w[1] < w[0]));
            assert!((ms[0] - p.total_mass).abs() < 1e-3 * p.total_mass);
            assert!(ms.iter().all(|m| *m > 0.0 && *m <= p.total_mass));
        }
    }

    #[test]
    fn holomorphic_in_nu() {
        // discrete Cauchy-Riemann: df/dnu_re = -i df/dnu_im
        let p = sphere_profile(2, SphereMetric::Chordal, true).unwrap();
        let h = 1e-5;
        for (r, nu) in [(0.7, Complex64::new(0.3, 0.2)), (3.0, Complex64::new(-1.5, 1.0)), (10.0, Complex64::new(2.0, -0.5))] {
            let f = |z: Complex64| mag_nu_radial(&p, r, z).unwrap();
            let dx = (f(nu + h) - f(nu - h)) / (2.0 * h);
            let dy = (f(nu + Complex64::new(0.0, h)) - f(nu - Complex64::new(0.0, h))) / (2.0 * h);
            let residual = (dx + Complex64::i() * dy).norm() / dx.norm().max(1.0);
            assert!(residual < 1e-6, "R={r}, nu={nu}: {residual}");
        }
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume_factorial(2) - 2.0 * PI).abs() < 1e-14);
        assert!((ball_volume_factorial(1) - 2.0).abs() < 1e-14);
        assert!((ball_volume_factorial(3) - 8.0 * PI).abs() < 1e-13);
        let (c0, c1) = round_sphere_curvature_coefficients(2, 4.0 * PI, Complex64::new(1.0, 0.0));
        assert!((c0 - 4.0 * PI).abs() < 1e-15);
        assert!((c1.re / c0 + 1.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn scalar_semigroup(r in 0.05f64..50.0, a in -3.0f64..3.0, b in -3.0f64..3.0, ai in -1.0f64..1.0, bi in -1.0f64..1.0) {
                let p = sphere_profile(3, SphereMetric::Geodesic, true).unwrap();
                let (n1, n2) = (Complex64::new(a, ai), Complex64::new(b, bi));
                let lhs = mag_nu_radial(&p, r, n1).unwrap() * mag_nu_radial(&p, r, n2).unwrap();
                let rhs = mag_nu_radial(&p, r, n1 + n2).unwrap() * p.total_mass;
                prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm().max(1.0));
            }
        }
    }
}
