//! The beta function `B(z) = ∫ t^z dmu(t)` of a radial profile: direct
//! evaluation, closed forms, Mellin continuation and pole scanning.

pub mod continuation;
pub mod direct;
pub mod scan;

pub use continuation::{
    beta_via_mellin, mellin_options, mellin_strip, mellin_transform, ComplexFn, MellinDepth, MeromorphicEvaluator,
    INTEGER_CIRCLE_RADIUS,
};
pub use direct::{
    beta_direct, beta_direct_options, beta_direct_with, beta_padic_closed, beta_sphere_closed, padic_pole,
    padic_residue, watson_expansion,
};
pub use scan::{scan_poles, ScanRect};
