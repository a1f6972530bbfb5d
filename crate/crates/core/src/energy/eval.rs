//! Energy values, gradients and HJB residuals at a state.

use crate::kron::contract_trailing;
use crate::solvers::EnergyKind;
use crate::system::PolynomialSystem;

use super::compute::EnergyPolynomial;

/// `½ Σ c_iᵀ x^{⊗i}`.
pub fn eval_energy(poly: &EnergyPolynomial, x: &[f64]) -> f64 {
    assert_eq!(x.len(), poly.n, "state dimension");
    0.5 * poly.coeffs.iter().map(|c| c.contract(x)).sum::<f64>()
}

/// `∇E(x) = ½ Σ i (I_n ⊗ x^{⊗(i−1)})ᵀ c_i`, exact for symmetric coefficients.
pub fn eval_gradient(poly: &EnergyPolynomial, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), poly.n, "state dimension");
    let mut g = vec![0.0; poly.n];
    for c in &poly.coeffs {
        let part = contract_trailing(&c.data, x, c.k - 1);
        let w = 0.5 * c.k as f64;
        g.iter_mut().zip(&part).for_each(|(gi, pi)| *gi += w * pi);
    }
    g
}

/// Absolute value of the HJB left-hand side:
/// past `∇E·f + ½|gᵀ∇E|² − (η/2)|h|²`, future `∇E·f − (η/2)|gᵀ∇E|² + ½|h|²`.
pub fn hjb_residual(sys: &PolynomialSystem, poly: &EnergyPolynomial, eta: f64, x: &[f64]) -> f64 {
    let grad = eval_gradient(poly, x);
    let f = sys.eval_f(x);
    let g = sys.eval_g(x);
    let h = sys.eval_h(x);
    let drift: f64 = grad.iter().zip(&f).map(|(a, b)| a * b).sum();
    let gt: f64 = (0..sys.m)
        .map(|r| {
            let s: f64 = (0..sys.n).map(|i| g[(i, r)] * grad[i]).sum();
            s * s
        })
        .sum();
    let hh: f64 = h.iter().map(|v| v * v).sum();
    let lhs = match poly.kind {
        EnergyKind::Past => drift + 0.5 * gt - 0.5 * eta * hh,
        EnergyKind::Future => drift - 0.5 * eta * gt + 0.5 * hh,
    };
    lhs.abs()
}
