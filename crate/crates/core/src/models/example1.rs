//! Scalar quadratic-drift, polynomial-input example and its exact energies.

use std::cell::RefCell;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::solvers::EnergyKind;
use crate::sparse::SparseColumns;
use crate::system::PolynomialSystem;

use super::quadrature::integrate;

/// `ẋ = ax + n·x² + (b + g₁x + g₂x²)u`, `y = cx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar1DParams {
    pub a: f64,
    pub n_coef: f64,
    pub b: f64,
    pub c: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Default for Scalar1DParams {
    fn default() -> Self {
        Scalar1DParams { a: -2.0, n_coef: 1.0, b: 2.0, c: 2.0, g1: -0.2, g2: 0.2 }
    }
}

impl Scalar1DParams {
    /// The same system with a constant input gain.
    pub fn without_input_nonlinearity(self) -> Self {
        Scalar1DParams { g1: 0.0, g2: 0.0, ..self }
    }
}

pub fn example1_system(p: &Scalar1DParams) -> PolynomialSystem {
    let one = |v: f64| DMatrix::from_element(1, 1, v);
    let scalar = |v: f64| SparseColumns::from_row_major(1, 1, &[v]).expect("1x1");
    let mut sys = PolynomialSystem::linear(one(p.a), one(p.b), one(p.c)).expect("scalar shapes");
    sys.set_f(2, scalar(p.n_coef)).expect("F2 shape");
    sys.set_g(1, scalar(p.g1)).expect("G1 shape");
    sys.set_g(2, scalar(p.g2)).expect("G2 shape");
    sys
}

/// Factors `(s1, s2)` of the scalar HJB `E′f + s1 (E′g)² + s2 h² = 0`.
fn hjb_factors(kind: EnergyKind, eta: f64) -> (f64, f64) {
    match kind {
        EnergyKind::Past => (0.5, -0.5 * eta),
        EnergyKind::Future => (-0.5 * eta, 0.5),
    }
}

/// Quadratic coefficient from the scalar Riccati equation, picking the root
/// whose closed loop is anti-stable (past) or stable (future).
pub fn scalar_quadratic_coeff(p: &Scalar1DParams, eta: f64, kind: EnergyKind) -> Result<f64> {
    let (s1, s2) = hjb_factors(kind, eta);
    // v² s1 b² + a v + s2 c² = 0, closed loop a + 2 s1 b² v.
    let (qa, qb, qc) = (s1 * p.b * p.b, p.a, s2 * p.c * p.c);
    let closed = |v: f64| p.a + 2.0 * s1 * p.b * p.b * v;
    let want_positive = kind == EnergyKind::Past;
    let roots: Vec<f64> = if qa == 0.0 {
        vec![-qc / qb]
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Err(Error::NoStabilizingSolution("complex scalar Riccati roots".into()));
        }
        let sq = disc.sqrt();
        let big = -0.5 * (qb + qb.signum() * sq);
        let mut r = vec![big / qa];
        if big != 0.0 {
            r.push(qc / big);
        } else {
            r.push(0.0);
        }
        r
    };
    roots
        .into_iter()
        .find(|&v| v.is_finite() && (closed(v) > 0.0) == want_positive && closed(v) != 0.0)
        .ok_or_else(|| Error::NoStabilizingSolution("no root with the required closed-loop sign".into()))
}

fn poly_mul(a: &[f64], b: &[f64], max_deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_deg + 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if i + j <= max_deg {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// `v_2, …, v_d` of `E(x) = ½ Σ v_i x^i`, obtained by expanding the scalar HJB
/// as plain polynomials and matching powers of `x` one at a time.
pub fn scalar_series_oracle(p: &Scalar1DParams, d: usize, eta: f64, kind: EnergyKind) -> Result<Vec<f64>> {
    let (s1, s2) = hjb_factors(kind, eta);
    let f = [0.0, p.a, p.n_coef];
    let g = [p.b, p.g1, p.g2];
    let h = [0.0, p.c];
    let g2 = poly_mul(&g, &g, 4);
    let h2 = poly_mul(&h, &h, 2);
    let mut v = vec![0.0; d + 1];
    v[2] = scalar_quadratic_coeff(p, eta, kind)?;
    let closed = p.a + 2.0 * s1 * p.b * p.b * v[2];
    for k in 3..=d {
        // E′ = Σ (i/2) v_i x^{i−1} with v_k = 0.
        let mut de = vec![0.0; d];
        for i in 2..k {
            de[i - 1] = 0.5 * i as f64 * v[i];
        }
        let drift = poly_mul(&de, &f, k);
        let quad = poly_mul(&poly_mul(&de, &de, k), &g2, k);
        let rk = drift[k] + s1 * quad[k] + s2 * h2.get(k).copied().unwrap_or(0.0);
        let l = 0.5 * k as f64 * closed;
        if l == 0.0 {
            return Err(Error::NearSingular { min_sum: 0.0, threshold: 0.0 });
        }
        v[k] = -rk / l;
    }
    Ok(v.split_off(2))
}

/// Exact `E′(s)`: the root of the scalar HJB quadratic on the branch through
/// `E′(0) = 0` whose closed loop keeps the required sign.
pub fn example1_true_derivative(p: &Scalar1DParams, eta: f64, kind: EnergyKind, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let f = p.a * s + p.n_coef * s * s;
    let g = p.b + p.g1 * s + p.g2 * s * s;
    let h = p.c * s;
    let disc = f * f + eta * g * g * h * h;
    if disc < 0.0 {
        return Err(Error::ComplexRoot { s });
    }
    let sq = disc.sqrt() * s.signum();
    let g2 = g * g;
    Ok(match kind {
        // f + g² E′ = sq
        EnergyKind::Past => {
            if -f * sq >= 0.0 && g2 != 0.0 {
                (sq - f) / g2
            } else {
                eta * h * h / (f + sq)
            }
        }
        // f − η g² E′ = −sq
        EnergyKind::Future => {
            if f * sq > 0.0 && eta * g2 != 0.0 {
                (f + sq) / (eta * g2)
            } else {
                -h * h / (f - sq)
            }
        }
    })
}

/// `E(x) = ∫₀ˣ E′(s) ds` by adaptive quadrature.
pub fn example1_true_energy(p: &Scalar1DParams, eta: f64, kind: EnergyKind, x: f64) -> Result<f64> {
    let err = RefCell::new(None);
    let val = integrate(
        |s| match example1_true_derivative(p, eta, kind, s) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        x,
        1e-12,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(val),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots_match_closed_forms() {
        let p = Scalar1DParams::default();
        let v = scalar_quadratic_coeff(&p, 0.5, EnergyKind::Past).unwrap();
        assert!((v - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-15);
        let w = scalar_quadratic_coeff(&p, 0.5, EnergyKind::Future).unwrap();
        assert!((w - (3f64.sqrt() - 1.0)).abs() < 1e-15);
        // Complex roots for the default system at η = −1.
        assert!(scalar_quadratic_coeff(&p, -1.0, EnergyKind::Past).is_err());
    }

    #[test]
    fn linear_case_has_no_higher_terms() {
        let p = Scalar1DParams { n_coef: 0.0, g1: 0.0, g2: 0.0, ..Default::default() };
        let v = scalar_series_oracle(&p, 6, 0.5, EnergyKind::Future).unwrap();
        assert!(v[1..].iter().all(|&c| c == 0.0));
        let e = example1_true_energy(&p, 0.5, EnergyKind::Future, 0.7).unwrap();
        assert!((e - 0.5 * v[0] * 0.49).abs() < 1e-12);
        assert_eq!(example1_true_energy(&p, 0.5, EnergyKind::Past, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn series_agrees_with_quadrature_near_origin() {
        let p = Scalar1DParams::default();
        for kind in [EnergyKind::Past, EnergyKind::Future] {
            let v = scalar_series_oracle(&p, 8, 0.5, kind).unwrap();
            for &x in &[-0.2f64, -0.05, 0.1, 0.2] {
                let series: f64 = v.iter().enumerate().map(|(i, c)| 0.5 * c * x.powi(i as i32 + 2)).sum();
                let exact = example1_true_energy(&p, 0.5, kind, x).unwrap();
                assert!((series - exact).abs() < 1e-8, "{kind:?} x={x}: {series} vs {exact}");
            }
        }
    }

    #[test]
    fn derivative_slope_at_origin_is_quadratic_coefficient() {
        let p = Scalar1DParams::default();
        for kind in [EnergyKind::Past, EnergyKind::Future] {
            let v2 = scalar_quadratic_coeff(&p, 0.5, kind).unwrap();
            for s in [1e-6, -1e-6] {
                let d = example1_true_derivative(&p, 0.5, kind, s).unwrap();
                assert!((d / s - v2).abs() < 1e-5);
            }
        }
    }
}
