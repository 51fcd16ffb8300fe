//! Formal power calculus for asymptotic expansions, the partition
//! polynomials `g_j`, and the dictionary between expansions and poles.

pub mod expansion;
pub mod gtable;
pub mod residues;

pub use expansion::{
    alpha_to_magnitude, convert_exact, factorial, is_integer, magnitude_to_alpha, parse_rational, power_expansion,
    rational_powi, shift_nu, AsymptoticExpansion, ExactExpansion, Expansion, RationalPower,
};
pub use gtable::{eval_g, gj_table, partitions, rational_to_f64, series_power, FormalScalar, GTable, GTerm, NuPolynomial};
pub use residues::{
    expansion_from_residues, residues_from_expansion, taylor_coeffs, OmittedPole, PoleEntry, PoleReport, LATTICE_TOL,
};
