//! Metric measure spaces: finite spaces with distance matrices, and
//! homogeneous spaces reduced to the law of the distance to a base point.

mod finite;
mod radial;
mod selector;

pub use finite::{FiniteMetricSpace, MetricDefect, MetricReport};
pub use radial::{
    is_prime, padic_atom_exact, padic_profile, sphere_area, sphere_density_normalizer, sphere_profile,
    two_point_homogeneous_profile, Atom, Density, DensityFn, DensityShape, GeometricTail, ProfileKind,
    RadialProfile, SphereMetric, TailBound,
};
pub use selector::{Selector, SELECTOR_PADIC_TAIL_TOL};

/// Either kind of space accepted by the front ends.
#[derive(Debug, Clone)]
pub enum SpaceDescriptor {
    Finite(FiniteMetricSpace),
    Radial(RadialProfile),
}
