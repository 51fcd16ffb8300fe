//! Numerical oracle for large-`R` expansions and the end-to-end
//! equivalence check between expansions, powers and poles.

pub mod oracle;
pub mod padic;
pub mod thm2;

pub use oracle::{
    classify_decay, detect_gamma, fit_expansion, richardson, DecayClass, Extrapolated, FitGrid, FitReport, Sampler,
    AMPLITUDE_TOL, LATTICE_SNAP, MAX_CONDITION, SAMPLE_NOISE, SLOPE_TOL,
};
pub use padic::{
    padic_bounds, padic_functional_equation, padic_oscillation, padic_witnesses, Bounds, FunctionalEquation, Oscillation,
    PadicWitness,
};
pub use thm2::{
    power_link_name, taylor_link, verify_thm2, LinkReport, LinkStatus, Thm2Report, LINK_EXPANSION, LINK_PATHS,
    LINK_RESIDUES, LINK_SCAN, LINK_TAYLOR,
};
