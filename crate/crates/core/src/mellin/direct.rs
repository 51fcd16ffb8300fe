use std::f64::consts::PI;

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::formal::AsymptoticExpansion;
use crate::scalar::{gamma_real, log_gamma, recip_gamma, QuadOptions};
use crate::space::{is_prime, RadialProfile, TailBound};

/// Quadrature settings behind [`beta_direct`].
pub fn beta_direct_options() -> QuadOptions {
    QuadOptions::relative(1e-12, 1e-300)
}

/// `B(z) = ∫ t^z dmu(t)` evaluated as a convergent integral plus atom sum.
///
/// Valid for `Re z > -delta` with `delta` the profile's decay exponent.
pub fn beta_direct(profile: &RadialProfile, z: Complex64) -> Result<Complex64> {
    beta_direct_with(profile, z, &beta_direct_options())
}

pub fn beta_direct_with(profile: &RadialProfile, z: Complex64, opts: &QuadOptions) -> Result<Complex64> {
    let delta = profile.decay_exponent();
    if !(z.re > -delta) {
        return Err(Error::OutsideStrip(format!(
            "B({z}) diverges as an integral for Re z <= {}; use the Mellin continuation",
            -delta
        )));
    }
    let q = profile.integrate(
        |t| (z * t.ln()).exp(),
        z.re,
        TailBound {
            constant: 1.0,
            power: z.re,
        },
        opts,
    )?;
    Ok(q.value)
}

const LATTICE_TOL: f64 = 1e-12;

/// `Some(k)` when `w` is the non-positive integer `-k`, up to rounding.
fn nonpositive_integer(w: Complex64) -> Option<u64> {
    let n = w.re.round();
    (n <= 0.0 && (w.re - n).abs() <= LATTICE_TOL * n.abs().max(1.0) && w.im.abs() <= LATTICE_TOL)
        .then_some((-n) as u64)
}

/// `2^{z+n} pi^{-1/2} Gamma((z+n)/2) Gamma((n+1)/2) / Gamma(z/2+n)`, the
/// closed form attached to the round sphere `S^n`.
///
/// Removable singularities (both Gamma arguments on poles) are filled in by
/// the limiting ratio.
pub fn beta_sphere_closed(n: u32, z: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidArgument("sphere dimension must be positive".into()));
    }
    let nf = n as f64;
    let a = (z + nf) / 2.0;
    let b = z / 2.0 + nf;
    let prefactor = (Complex64::new(2.0f64.ln(), 0.0) * (z + nf)).exp() * gamma_real((nf + 1.0) / 2.0)? / PI.sqrt();
    let ratio = match (nonpositive_integer(a), nonpositive_integer(b)) {
        (Some(k), Some(l)) => {
            // Gamma(-k)/Gamma(-l) = (-1)^{k-l} l!/k!
            let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
            let (lo, hi) = if l < k { (l, k) } else { (k, l) };
            let span: f64 = ((lo + 1)..=hi).map(|i| i as f64).product();
            Complex64::new(sign * if l < k { 1.0 / span } else { span }, 0.0)
        }
        (Some(_), None) => return Err(Error::PoleArgument(format!("{z}"))),
        (None, _) => log_gamma(a)?.exp() * recip_gamma(b),
    };
    Ok(prefactor * ratio)
}

/// `(p - 1) / (p - p^{-z})`, the beta function of the p-adic integers.
pub fn beta_padic_closed(p: u64, z: Complex64) -> Result<Complex64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pf = p as f64;
    let denom = pf - (-z * pf.ln()).exp();
    if denom.norm() <= 1e-14 * pf {
        return Err(Error::PoleArgument(format!("{z}")));
    }
    Ok(Complex64::new(pf - 1.0, 0.0) / denom)
}

/// Pole `-1 + 2 pi i k / log p` of [`beta_padic_closed`].
pub fn padic_pole(p: u64, k: i64) -> Complex64 {
    Complex64::new(-1.0, 2.0 * PI * k as f64 / (p as f64).ln())
}

/// Common residue `(p - 1) / (p log p)` at every pole of [`beta_padic_closed`].
pub fn padic_residue(p: u64) -> f64 {
    let pf = p as f64;
    (pf - 1.0) / (pf * pf.ln())
}

/// Large-`R` expansion of `m(R)` from the density's series at 0 (Watson's
/// lemma): `gamma = -(alpha + 1)`, `a_j = c_j Gamma(alpha + j + 1)`.
///
/// `None` when the profile has an accumulating atom tail or no known series.
/// Atoms at positive distance only add exponentially small terms.
pub fn watson_expansion(profile: &RadialProfile, order: usize) -> Option<AsymptoticExpansion> {
    if profile.tail.is_some() {
        return None;
    }
    let density = profile.density.as_ref()?;
    let c = density.series_at_zero(order)?;
    let alpha = density.left_exponent;
    let coeffs = c
        .iter()
        .enumerate()
        .map(|(j, cj)| gamma_real(alpha + j as f64 + 1.0).map(|g| Complex64::new(cj * g, 0.0)))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    Some(AsymptoticExpansion::new(-(alpha + 1.0), coeffs))
}
