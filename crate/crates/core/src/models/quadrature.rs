//! Quadrature wrappers: fixed Gauss–Legendre for element integrals and
//! adaptive tanh–sinh for the scalar reference energies.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Five-point Gauss–Legendre on `[0, 1]`; exact for polynomials of degree 9.
pub fn gauss_legendre_5() -> [(f64, f64); 5] {
    let rule = GaussLegendre::new(NonZeroUsize::new(5).expect("nonzero"));
    let mut out = [(0.0, 0.0); 5];
    for (slot, &(x, w)) in out.iter_mut().zip(rule.as_node_weight_pairs()) {
        *slot = (0.5 * (x + 1.0), 0.5 * w);
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Adaptive integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    sign * quadrature::double_exponential::integrate(f, lo, hi, tol).integral
}
