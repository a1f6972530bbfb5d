//! Polynomial approximations of H∞ balancing energy functions.
//!
//! For a control-affine polynomial system the past energy `E⁻` and future
//! energy `E⁺` are expanded as `E(x) ≈ ½ Σ_{i=2}^{d} c_iᵀ x^{⊗i}`. The quadratic
//! coefficient solves a Riccati equation and each higher coefficient solves a
//! linear system with a k-way Lyapunov (Kronecker sum) operator whose
//! right-hand side depends on the lower-degree coefficients.
//!
//! ```
//! use hinf_energy::{compute_energy, eval_energy, models, EnergyKind};
//!
//! let sys = models::example1_system(&models::Scalar1DParams::default());
//! let past = compute_energy(&sys, 4, 0.5, EnergyKind::Past).unwrap();
//! let v2 = past.coeffs[0].data[0];
//! assert!((v2 - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-12);
//! assert!(eval_energy(&past, &[0.1]) > 0.0);
//! ```

pub mod energy;
pub mod error;
pub mod kron;
pub mod models;
pub mod par;
pub mod schur;
pub mod solvers;
pub mod sparse;
pub mod system;

pub use energy::{
    assemble_rhs, compute_energy, compute_energy_with, eval_energy, eval_gradient, hjb_residual, DegreeReport,
    EnergyOptions, EnergyPolynomial, EnergyReport,
};
pub use error::{Error, Result};
pub use kron::{
    kron_pow, lyap_transpose_apply, matricize, shuffle_apply, symmetrize, CoeffVector, KronPermutation, PermBlock,
};
pub use solvers::{dense_kway_solve, solve_are_future, solve_are_past, solve_kway, AreSolution, EnergyKind};
pub use sparse::SparseColumns;
pub use system::PolynomialSystem;
