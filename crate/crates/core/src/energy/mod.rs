//! Energy-function coefficients: right-hand-side assembly, the degree-by-degree
//! solve, and evaluation.

pub mod compute;
pub mod eval;
pub mod rhs;

pub use compute::{compute_energy, compute_energy_with, DegreeReport, EnergyOptions, EnergyPolynomial, EnergyReport};
pub use eval::{eval_energy, eval_gradient, hjb_residual};
pub use rhs::{assemble_rhs, rhs_b_terms, rhs_f_terms, rhs_g_term_single, rhs_h_terms};
