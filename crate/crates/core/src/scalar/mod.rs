//! Special functions, quadrature and contour residues.

mod gamma;
mod quad;
mod residue;

pub use gamma::{gamma, gamma_real, log_gamma, principal_pow, recip_gamma};
pub use quad::{integrate, integrate_decaying, integrate_finite, integrate_offsets, Decay, QuadOptions, QuadratureResult};
pub use residue::{contour_mean, contour_residue, contour_residue_with, DEFAULT_NODES, DEFAULT_RADIUS};

#[cfg(test)]
mod props {
    use super::*;
    use num::complex::Complex64;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn recip_times_gamma_is_one(re in -19.9f64..49.9, im in -50.0f64..50.0) {
            let z = Complex64::new(re, im);
            prop_assume!((z.re - z.re.round()).abs() > 1e-6 || z.im.abs() > 1e-6);
            let lg = log_gamma(z).unwrap();
            let prod = recip_gamma(z) * lg.exp();
            prop_assert!((prod - 1.0).norm() < 1e-11, "z = {}, prod = {}", z, prod);
        }

        #[test]
        fn principal_pow_semigroup(a in 1e-3f64..1e3, n1r in -3.0f64..3.0, n1i in -3.0f64..3.0, n2r in -3.0f64..3.0, n2i in -3.0f64..3.0) {
            let (n1, n2) = (Complex64::new(n1r, n1i), Complex64::new(n2r, n2i));
            let lhs = principal_pow(a, n1).unwrap() * principal_pow(a, n2).unwrap();
            let rhs = principal_pow(a, n1 + n2).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }
    }
}
