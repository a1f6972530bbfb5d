//! Two-state quadratic-bilinear example:
//! `ẋ₁ = −x₁ + x₂ − x₂² + (1 + 2x₂)u`, `ẋ₂ = −x₂ + u`, `y = x₁`.

use nalgebra::DMatrix;

use crate::sparse::SparseColumns;
use crate::system::PolynomialSystem;

pub fn example2_system() -> PolynomialSystem {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
    let b = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
    let c = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let mut sys = PolynomialSystem::linear(a, b, c).expect("shapes");
    // Column of x₂⊗x₂ is 1·2 + 1; column of x₂⊗u is 1·m + 0.
    sys.set_f(2, SparseColumns::from_triplets(2, 4, [(0, 3, -1.0)]).expect("F2")).expect("F2 shape");
    sys.set_g(1, SparseColumns::from_triplets(2, 2, [(0, 1, 2.0)]).expect("G1")).expect("G1 shape");
    sys
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_at_unit_second_state() {
        let sys = example2_system();
        assert_eq!(sys.eval_f(&[0.0, 1.0]), vec![0.0, -1.0]);
        let g = sys.eval_g(&[0.0, 1.0]);
        assert_eq!((g[(0, 0)], g[(1, 0)]), (3.0, 1.0));
    }
}
