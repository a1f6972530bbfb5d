//! Riccati and k-way Lyapunov solvers.

pub mod are;
pub mod kway;

pub use are::{solve_are, solve_are_in, solve_are_future, solve_are_past, AreSolution, EnergyKind};
pub use kway::{dense_kway_solve, solve_kway, KwaySolver};
