//! Benchmark systems and reference solutions.

pub mod beam;
pub mod example1;
pub mod example2;
pub mod quadrature;
pub mod random;

pub use beam::{beam_energy_coordinates, beam_initial_condition, beam_system, BeamParams};
pub use example1::{
    example1_system, example1_true_derivative, example1_true_energy, scalar_quadratic_coeff, scalar_series_oracle,
    Scalar1DParams,
};
pub use example2::example2_system;
pub use random::random_system;
