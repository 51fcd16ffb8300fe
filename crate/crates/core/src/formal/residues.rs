use num::complex::Complex64;
use serde::Serialize;

use super::expansion::AsymptoticExpansion;
use crate::error::{Error, Result};
use crate::scalar::{gamma, recip_gamma, QuadOptions};
use crate::space::RadialProfile;

/// A simple pole and its residue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleEntry {
    #[serde(serialize_with = "crate::complex_serde::one")]
    pub location: Complex64,
    #[serde(serialize_with = "crate::complex_serde::one")]
    pub residue: Complex64,
}

/// A lattice point `gamma - j` where no pole appears, with the expansion
/// coefficient that would have produced one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmittedPole {
    #[serde(serialize_with = "crate::complex_serde::one")]
    pub location: Complex64,
    pub index: usize,
    #[serde(serialize_with = "crate::complex_serde::one")]
    pub coefficient: Complex64,
}

/// Poles of a meromorphic function inside the vertical strip
/// `strip.0 < Re z < strip.1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleReport {
    pub entries: Vec<PoleEntry>,
    pub strip: (f64, f64),
    pub omitted: Vec<OmittedPole>,
}

impl PoleReport {
    pub fn empty(strip: (f64, f64)) -> Self {
        PoleReport {
            entries: Vec::new(),
            strip,
            omitted: Vec::new(),
        }
    }
}

/// Poles of `B(z)` implied by the expansion `m(R) ~ sum a_j R^{gamma-j}`:
/// `z = gamma - j` with residue `a_j / Gamma(-gamma + j)`.
pub fn residues_from_expansion(exp: &AsymptoticExpansion) -> PoleReport {
    let n = exp.order() as f64;
    let strip = (exp.gamma.re - n - 1.0, exp.gamma.re + 1.0);
    let mut report = PoleReport::empty(strip);
    for (j, a) in exp.coeffs.iter().enumerate() {
        let location = exp.gamma - j as f64;
        let residue = a * recip_gamma(-location);
        if residue == Complex64::new(0.0, 0.0) {
            report.omitted.push(OmittedPole {
                location,
                index: j,
                coefficient: *a,
            });
        } else {
            report.entries.push(PoleEntry { location, residue });
        }
    }
    report
}

/// Relative lattice tolerance used by [`expansion_from_residues`].
pub const LATTICE_TOL: f64 = 1e-6;

/// Inverse of [`residues_from_expansion`]: `a_j = res(gamma - j) Gamma(-gamma + j)`.
///
/// Lattice points with no entry take the coefficient from the omitted list,
/// or zero. The order is the number of lattice points in the strip.
pub fn expansion_from_residues(report: &PoleReport, gamma_exp: f64) -> Result<AsymptoticExpansion> {
    let tol = LATTICE_TOL * gamma_exp.abs().max(1.0);
    let lattice_index = |z: Complex64| -> Option<usize> {
        let j = (gamma_exp - z.re).round();
        let off = Complex64::new(gamma_exp - j, 0.0) - z;
        (j >= 0.0 && off.norm() <= tol).then_some(j as usize)
    };
    let mut coeffs: Vec<Complex64> = Vec::new();
    for e in &report.entries {
        let j = lattice_index(e.location).ok_or_else(|| {
            Error::OffLattice(format!("{} (exponent {gamma_exp})", e.location))
        })?;
        let point = Complex64::new(gamma_exp - j as f64, 0.0);
        put(&mut coeffs, j, e.residue * gamma(-point)?);
    }
    for o in &report.omitted {
        if let Some(j) = lattice_index(o.location) {
            put(&mut coeffs, j, o.coefficient);
        }
    }
    let depth = gamma_exp - report.strip.0;
    let in_strip = if depth > 0.0 { depth.ceil() as usize } else { 0 };
    if in_strip > coeffs.len() {
        coeffs.resize(in_strip, Complex64::new(0.0, 0.0));
    }
    Ok(AsymptoticExpansion::new(gamma_exp, coeffs))
}

fn put(coeffs: &mut Vec<Complex64>, j: usize, v: Complex64) {
    if coeffs.len() <= j {
        coeffs.resize(j + 1, Complex64::new(0.0, 0.0));
    }
    coeffs[j] = v;
}

/// Taylor coefficients of `m(R) = sum_j B_j R^j` at 0:
/// `B_j = (-1)^j / j! ∫ t^j dmu`.
pub fn taylor_coeffs(profile: &RadialProfile, order: usize, opts: &QuadOptions) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(order + 1);
    let mut factorial = 1.0;
    for j in 0..=order {
        if j > 0 {
            factorial *= j as f64;
        }
        let moment = profile.moment(j as u32, opts)?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * moment.value.re / factorial);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{padic_profile, sphere_profile, SphereMetric};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sphere_single_pole() {
        let report = residues_from_expansion(&AsymptoticExpansion::real(-2.0, &[0.5]));
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].location, c(-2.0));
        assert!((report.entries[0].residue - 0.5).norm() < 1e-15);
        let back = expansion_from_residues(&report, -2.0).unwrap();
        assert!((back.coeffs[0] - 0.5).norm() < 1e-15);
    }

    #[test]
    fn lattice_locations_and_zero_coefficients() {
        let exp = AsymptoticExpansion::real(-3.0, &[1.0, 0.0, 2.0, -1.0]);
        let report = residues_from_expansion(&exp);
        let locs: Vec<f64> = report.entries.iter().map(|e| e.location.re).collect();
        assert_eq!(locs, vec![-3.0, -5.0, -6.0]);
        assert_eq!(report.omitted.len(), 1);
        assert_eq!(report.omitted[0].index, 1);
    }

    #[test]
    fn reciprocal_gamma_zeros_are_logged() {
        // gamma = 2: the lattice points 2, 1, 0 sit on zeros of 1/Gamma(-z)
        let exp = AsymptoticExpansion::real(2.0, &[1.0, 3.0, -2.0, 5.0]);
        let report = residues_from_expansion(&exp);
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].location, c(-1.0));
        assert_eq!(report.omitted.len(), 3);
        let back = expansion_from_residues(&report, 2.0).unwrap();
        for (a, b) in back.coeffs.iter().zip(&exp.coeffs) {
            assert!((a - b).norm() < 1e-14 * b.norm().max(1.0));
        }
    }

    #[test]
    fn round_trip_half_integer_gamma() {
        let exp = AsymptoticExpansion::real(-1.5, &[0.3, -0.2, 0.7, 0.0, 1.1]);
        let back = expansion_from_residues(&residues_from_expansion(&exp), -1.5).unwrap();
        assert_eq!(back.coeffs.len(), exp.coeffs.len());
        for (a, b) in back.coeffs.iter().zip(&exp.coeffs) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn off_lattice_and_empty() {
        let mut report = PoleReport::empty((-4.0, -1.0));
        assert!(expansion_from_residues(&report, -2.0).unwrap().is_zero());
        report.entries.push(PoleEntry {
            location: Complex64::new(-2.5, 0.0),
            residue: c(1.0),
        });
        assert!(matches!(expansion_from_residues(&report, -2.0), Err(Error::OffLattice(_))));
    }

    #[test]
    fn taylor_examples() {
        let opts = QuadOptions::relative(1e-13, 1e-15);
        let s2 = sphere_profile(2, SphereMetric::Chordal, true).unwrap();
        let b = taylor_coeffs(&s2, 2, &opts).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-14);
        assert!((b[1] + 4.0 / 3.0).abs() < 1e-13);
        assert!((b[2] - 1.0).abs() < 1e-13);
        let q2 = padic_profile(2, 30, 1e-15).unwrap();
        let b = taylor_coeffs(&q2, 1, &opts).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-14);
        assert!((b[1] + 2.0 / 3.0).abs() < 1e-14);
    }
}
