//! Magnitude, weights and complex powers of the magnitude operator.

mod finite;
mod radial;

pub use finite::{
    finite_mag_nu, finite_magnitude, finite_spectrum, finite_weight, symmetrized_kernel, KernelSpectrum,
    WeightVector, POSITIVITY_FLOOR, REPORTED_CONDITION, SINGULAR_CONDITION,
};
pub use radial::{
    ball_volume_factorial, little_m, little_m_grid, little_m_with_error, mag_nu_radial, magnitude_radial,
    round_sphere_curvature_coefficients, LITTLE_M_TOL,
};
