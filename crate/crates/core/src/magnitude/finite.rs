use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num::complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;

/// Kernels with an eigenvalue ratio beyond this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e14;
/// Condition numbers above this are flagged in reports.
pub const REPORTED_CONDITION: f64 = 1e12;
/// Relative eigenvalue floor for non-integer powers.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Solution of the weight equation `sum_y e^{-R d(x,y)} w(y) mu(y) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub scale: f64,
    /// Max-norm residual of the weight equation.
    pub residual: f64,
    /// Ratio of extreme absolute eigenvalues of the symmetrized kernel.
    pub condition: f64,
}

impl WeightVector {
    pub fn ill_conditioned(&self) -> bool {
        self.condition > REPORTED_CONDITION
    }
}

/// Eigendecomposition of `S = D^{1/2} E D^{1/2}` with `E = e^{-R dist}`, `D = diag(mu)`.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub basis: DMatrix<f64>,
    pub scale: f64,
    /// `D^{1/2} 1`.
    pub root_measure: DVector<f64>,
    /// Max-norm error of `basis diag(eigenvalues) basis^T` against `S`.
    pub reconstruction_error: f64,
}

fn check_scale(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale R = {r} must be positive and finite")));
    }
    Ok(())
}

/// The symmetrized kernel `D^{1/2} e^{-R dist} D^{1/2}`.
pub fn symmetrized_kernel(space: &FiniteMetricSpace, r: f64) -> DMatrix<f64> {
    let n = space.len();
    let root: Vec<f64> = space.measure().iter().map(|m| m.sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| root[i] * (-r * space.dist()[(i, j)]).exp() * root[j])
}

fn root_measure(space: &FiniteMetricSpace) -> DVector<f64> {
    DVector::from_iterator(space.len(), space.measure().iter().map(|m| m.sqrt()))
}

pub fn finite_spectrum(space: &FiniteMetricSpace, r: f64) -> Result<KernelSpectrum> {
    check_scale(r)?;
    let s = symmetrized_kernel(space, r);
    let eig = SymmetricEigen::new(s.clone());
    let n = space.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let basis = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    let rebuilt = &basis * DMatrix::from_diagonal(&DVector::from_column_slice(&eigenvalues)) * basis.transpose();
    let reconstruction_error = (rebuilt - s).amax();
    Ok(KernelSpectrum {
        eigenvalues,
        basis,
        scale: r,
        root_measure: root_measure(space),
        reconstruction_error,
    })
}

fn integer_exponent(nu: Complex64) -> Option<i32> {
    (nu.im == 0.0 && nu.re == nu.re.round() && nu.re.abs() < i32::MAX as f64).then_some(nu.re as i32)
}

impl KernelSpectrum {
    pub fn condition(&self) -> f64 {
        let max = self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let min = self.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// `lambda^nu` for every eigenvalue, with the branch rules for `S^nu`.
    pub fn eigenvalue_powers(&self, nu: Complex64) -> Result<Vec<Complex64>> {
        let max = self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        match integer_exponent(nu) {
            Some(k) => {
                if k < 0 && self.eigenvalues.iter().any(|l| l.abs() <= 1e-15 * max) {
                    return Err(Error::SingularKernel { condition: self.condition() });
                }
                Ok(self.eigenvalues.iter().map(|l| Complex64::new(l.powi(k), 0.0)).collect())
            }
            None => {
                let min = self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
                if !(min > POSITIVITY_FLOOR * max) {
                    return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
                }
                Ok(self.eigenvalues.iter().map(|l| (nu * l.ln()).exp()).collect())
            }
        }
    }

    /// The matrix `S^nu`.
    pub fn power(&self, nu: Complex64) -> Result<DMatrix<Complex64>> {
        let powers = self.eigenvalue_powers(nu)?;
        let n = self.eigenvalues.len();
        let u = self.basis.map(|x| Complex64::new(x, 0.0));
        let d = DMatrix::from_diagonal(&DVector::from_vec(powers));
        let out = &u * d * u.transpose();
        debug_assert_eq!(out.nrows(), n);
        Ok(out)
    }

    /// `v^T S^nu v` with `v = D^{1/2} 1`.
    pub fn quadratic_form(&self, nu: Complex64) -> Result<Complex64> {
        let powers = self.eigenvalue_powers(nu)?;
        let coords = self.basis.transpose() * &self.root_measure;
        Ok(powers.iter().zip(coords.iter()).map(|(p, c)| p * (c * c)).sum())
    }
}

/// Generalized invariant `<Z(R)^nu 1, 1>` of a finite space.
pub fn finite_mag_nu(space: &FiniteMetricSpace, r: f64, nu: Complex64) -> Result<Complex64> {
    finite_spectrum(space, r)?.quadratic_form(nu)
}

pub fn finite_weight(space: &FiniteMetricSpace, r: f64) -> Result<WeightVector> {
    check_scale(r)?;
    let n = space.len();
    let s = symmetrized_kernel(space, r);
    let eig = SymmetricEigen::new(s.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let condition = if min == 0.0 { f64::INFINITY } else { max / min };
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::SingularKernel { condition });
    }
    let v = root_measure(space);
    let solve = |rhs: &DVector<f64>| -> Option<DVector<f64>> {
        match s.clone().cholesky() {
            Some(ch) => Some(ch.solve(rhs)),
            None => s.clone().lu().solve(rhs),
        }
    };
    let mut u = solve(&v).ok_or(Error::SingularKernel { condition })?;
    for _ in 0..2 {
        let r = &v - &s * &u;
        match solve(&r) {
            Some(du) => u += du,
            None => break,
        }
    }
    let weights: Vec<f64> = (0..n).map(|i| u[i] / v[i]).collect();
    let residual = (0..n)
        .map(|x| {
            let lhs: f64 = (0..n)
                .map(|y| (-r * space.dist()[(x, y)]).exp() * weights[y] * space.measure()[y])
                .sum();
            (lhs - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Ok(WeightVector {
        weights,
        scale: r,
        residual,
        condition,
    })
}

/// `sum_x w(x) mu(x)`; for counting measure the plain sum of weights.
pub fn finite_magnitude(space: &FiniteMetricSpace, r: f64) -> Result<f64> {
    let w = finite_weight(space, r)?;
    Ok(w.weights.iter().zip(space.measure()).map(|(w, m)| w * m).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0]], None).unwrap()
    }

    fn single() -> FiniteMetricSpace {
        FiniteMetricSpace::from_points(&[vec![0.0, 0.0]], None).unwrap()
    }

    #[test]
    fn two_point_weights_and_magnitude() {
        for r in [0.1, 1.0, 10.0] {
            let w = finite_weight(&two_points(), r).unwrap();
            let want = 1.0 / (1.0 + (-r).exp());
            for x in &w.weights {
                assert!((x - want).abs() < 1e-14);
            }
            assert!(w.residual < 1e-14);
            let mag = finite_magnitude(&two_points(), r).unwrap();
            assert!((mag - 2.0 / (1.0 + (-r).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn single_point() {
        let w = finite_weight(&single(), 2.0).unwrap();
        assert_eq!(w.weights.len(), 1);
        assert!((w.weights[0] - 1.0).abs() < 1e-15);
        assert!((finite_magnitude(&single(), 2.0).unwrap() - 1.0).abs() < 1e-15);
        let spec = finite_spectrum(&single(), 3.0).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0]);
    }

    #[test]
    fn large_scale_weights_tend_to_one() {
        let pts = [vec![0.0, 0.0], vec![1.0, 0.5], vec![0.3, 2.0], vec![-1.0, 1.0], vec![2.0, 2.0]];
        let s = FiniteMetricSpace::from_points(&pts, None).unwrap();
        let r = 50.0 / s.min_distance().unwrap() * (pts.len() as f64).ln();
        let w = finite_weight(&s, r).unwrap();
        for x in &w.weights {
            assert!((x - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn small_scale_magnitude_tends_to_one() {
        let pts = [vec![0.0], vec![1.0], vec![3.0]];
        let s = FiniteMetricSpace::from_points(&pts, None).unwrap();
        let m = finite_magnitude(&s, 1e-4).unwrap();
        assert!((m - 1.0).abs() < 1e-3, "{m}");
    }

    #[test]
    fn two_point_spectrum() {
        for r in [0.5, 2.0] {
            let spec = finite_spectrum(&two_points(), r).unwrap();
            let e = (-r).exp();
            assert!((spec.eigenvalues[0] - (1.0 + e)).abs() < 1e-15);
            assert!((spec.eigenvalues[1] - (1.0 - e)).abs() < 1e-15);
            assert!(spec.reconstruction_error < 1e-14);
        }
        let spec = finite_spectrum(&two_points(), 60.0).unwrap();
        assert!(spec.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-20));
    }

    #[test]
    fn weighted_measure_limit() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0]], Some(vec![2.0, 0.5])).unwrap();
        let spec = finite_spectrum(&s, 80.0).unwrap();
        assert!((spec.eigenvalues[0] - 2.0).abs() < 1e-15);
        assert!((spec.eigenvalues[1] - 0.5).abs() < 1e-15);
        // weight equation holds with the measure
        let w = finite_weight(&s, 0.7).unwrap();
        assert!(w.residual < 1e-14);
        let mag = finite_magnitude(&s, 0.7).unwrap();
        let via_nu = finite_mag_nu(&s, 0.7, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((mag - via_nu.re).abs() < 1e-12);
    }

    #[test]
    fn nu_examples() {
        let pts = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![1.5, 1.5]];
        let s = FiniteMetricSpace::from_points(&pts, None).unwrap();
        let r = 0.8;
        let minus = finite_mag_nu(&s, r, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((minus.re - finite_magnitude(&s, r).unwrap()).abs() < 1e-9);
        let one = finite_mag_nu(&s, r, Complex64::new(1.0, 0.0)).unwrap();
        let direct: f64 = (0..4)
            .flat_map(|x| (0..4).map(move |y| (x, y)))
            .map(|(x, y)| (-r * s.dist()[(x, y)]).exp())
            .sum();
        assert!((one.re - direct).abs() < 1e-12);
        let zero = finite_mag_nu(&s, r, Complex64::new(0.0, 0.0)).unwrap();
        assert!((zero.re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn non_integer_power_needs_positive_kernel() {
        // five points with unit distances except one pair at distance 2 is not of negative type at large R
        let mut d = DMatrix::from_element(5, 5, 1.0);
        for i in 0..5 {
            d[(i, i)] = 0.0;
        }
        d[(0, 1)] = 2.0;
        d[(1, 0)] = 2.0;
        let labels = (1..=5).map(|i| i.to_string()).collect();
        let s = FiniteMetricSpace::new(labels, d, None).unwrap();
        let spec = finite_spectrum(&s, 0.01).unwrap();
        let min = spec.eigenvalues[4];
        if min <= 0.0 {
            assert!(matches!(
                finite_mag_nu(&s, 0.01, Complex64::new(0.5, 0.0)),
                Err(Error::NotPositiveDefinite { .. })
            ));
        }
        // integer powers never need positivity
        assert!(finite_mag_nu(&s, 0.01, Complex64::new(2.0, 0.0)).is_ok());
    }

    #[test]
    fn singular_kernel_detected() {
        // two coincident points give two identical kernel rows
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        let s = FiniteMetricSpace::new(vec!["a".into(), "b".into()], d, None).unwrap();
        assert!(matches!(finite_weight(&s, 1.0), Err(Error::SingularKernel { .. })));
        assert!(matches!(
            finite_mag_nu(&s, 1.0, Complex64::new(-1.0, 0.0)),
            Err(Error::SingularKernel { .. })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn config() -> impl Strategy<Value = Vec<Vec<f64>>> {
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 6)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn semigroup(pts in config(), n1 in -2.0f64..2.0, n2 in -2.0f64..2.0, r in 0.5f64..3.0) {
                let s = FiniteMetricSpace::from_points(&pts, None).unwrap();
                prop_assume!(s.min_distance().unwrap() > 0.05);
                let spec = finite_spectrum(&s, r).unwrap();
                let (a, b) = (Complex64::new(n1, 0.0), Complex64::new(n2, 0.0));
                let lhs = spec.power(a).unwrap() * spec.power(b).unwrap();
                let rhs = spec.power(a + b).unwrap();
                let norm = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let diff = (lhs - &rhs).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(diff <= 1e-8 * norm, "{diff} vs {norm}");
            }

            #[test]
            fn minus_one_power_is_magnitude(pts in config(), r in 0.3f64..4.0) {
                let s = FiniteMetricSpace::from_points(&pts, None).unwrap();
                prop_assume!(s.min_distance().unwrap() > 0.05);
                let mag = finite_magnitude(&s, r).unwrap();
                let nu = finite_mag_nu(&s, r, Complex64::new(-1.0, 0.0)).unwrap();
                prop_assert!((mag - nu.re).abs() <= 1e-9 * mag.abs().max(1.0));
            }
        }
    }
}
