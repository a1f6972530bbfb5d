//! Degree-by-degree computation of the energy coefficients.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::kron::{checked_len, lyap_transpose_apply, symmetrize_in_place, CoeffVector, DEFAULT_ELEMENT_BUDGET};
use crate::solvers::kway::IMAG_RESIDUE_TOL;
use crate::solvers::{solve_are_in, AreSolution, EnergyKind, KwaySolver};
use crate::sparse::SparseColumns;
use crate::system::PolynomialSystem;

use super::rhs::{assemble_rhs_cached, TermCache};

/// Taylor coefficients `c_2, …, c_d` of an energy function
/// `E(x) ≈ ½ Σ c_iᵀ x^{⊗i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyPolynomial {
    pub kind: EnergyKind,
    pub eta: f64,
    pub n: usize,
    /// `coeffs[i]` has order `i + 2`.
    pub coeffs: Vec<CoeffVector>,
}

impl EnergyPolynomial {
    pub fn new(kind: EnergyKind, eta: f64, n: usize, coeffs: Vec<CoeffVector>) -> Result<Self> {
        for (idx, c) in coeffs.iter().enumerate() {
            if c.n != n || c.k != idx + 2 {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {idx} has order {} in {} variables, expected order {} in {n}",
                    c.k,
                    c.n,
                    idx + 2
                )));
            }
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("energy needs at least the quadratic coefficient".into()));
        }
        Ok(EnergyPolynomial { kind, eta, n, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() + 1
    }

    /// Coefficient of order `k`.
    pub fn coeff(&self, k: usize) -> Option<&CoeffVector> {
        k.checked_sub(2).and_then(|i| self.coeffs.get(i))
    }

    /// The same energy cut off at degree `d`.
    pub fn truncated(&self, d: usize) -> Self {
        let keep = d.saturating_sub(1).clamp(1, self.coeffs.len());
        EnergyPolynomial { coeffs: self.coeffs[..keep].to_vec(), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyOptions {
    pub element_budget: u64,
    /// Recompute each solve's residual `‖ℒ_k(M)ᵀc̃_k − rhs‖ / ‖rhs‖`.
    pub verify: bool,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions { element_budget: DEFAULT_ELEMENT_BUDGET, verify: false }
    }
}

#[derive(Debug, Clone)]
pub struct DegreeReport {
    pub k: usize,
    pub seconds: f64,
    pub rhs_norm: f64,
    /// The right-hand side was exactly zero, so the solve was skipped.
    pub skipped: bool,
    pub solve_residual: Option<f64>,
    /// `‖Im x‖ / ‖Re x‖` left by the complex back-transform.
    pub imag_residue: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub are: AreSolution,
    pub are_seconds: f64,
    pub degrees: Vec<DegreeReport>,
}

impl EnergyReport {
    pub fn total_seconds(&self) -> f64 {
        self.are_seconds + self.degrees.iter().map(|d| d.seconds).sum::<f64>()
    }
}

pub fn compute_energy(sys: &PolynomialSystem, d: usize, eta: f64, kind: EnergyKind) -> Result<EnergyPolynomial> {
    compute_energy_with(sys, d, eta, kind, &EnergyOptions::default()).map(|(e, _)| e)
}

pub fn compute_energy_with(
    sys: &PolynomialSystem,
    d: usize,
    eta: f64,
    kind: EnergyKind,
    opts: &EnergyOptions,
) -> Result<(EnergyPolynomial, EnergyReport)> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("degree must be at least 2, got {d}")));
    }
    if !eta.is_finite() {
        return Err(Error::InvalidArgument("eta must be finite".into()));
    }
    let n = sys.n;
    checked_len(n, d, opts.element_budget)?;

    let t0 = Instant::now();
    let are = solve_are_in(kind, &sys.a, &sys.b, &sys.c, eta, sys.are_coordinates())?;
    let mut c2 = CoeffVector::new(n, 2, are.x.as_slice().to_vec())?;
    symmetrize_in_place(&mut c2);
    let mut coeffs = vec![c2];
    let solver = if d > 2 { Some(KwaySolver::new(&are.closed_loop)?) } else { None };
    let are_seconds = t0.elapsed().as_secs_f64();

    let closed = SparseColumns::from_dmatrix(&are.closed_loop);
    let mut cache = TermCache::default();
    let mut degrees = Vec::new();
    for k in 3..=d {
        let t = Instant::now();
        let rhs = assemble_rhs_cached(sys, &coeffs, k, kind, eta, &mut cache)?;
        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (coeff, skipped, solve_residual, imag_residue) = if rhs_norm == 0.0 {
            (CoeffVector::zeros(n, k, opts.element_budget)?, true, None, None)
        } else {
            let (raw, imag) = solver.as_ref().expect("solver exists for d > 2").solve_with_residue(k, &rhs)?;
            if imag > IMAG_RESIDUE_TOL {
                return Err(Error::ImaginaryResidue { residue: imag });
            }
            let mut c = CoeffVector::new(n, k, raw)?;
            let residual = if opts.verify {
                let lhs = lyap_transpose_apply(&closed, &c)?;
                let diff = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                Some(diff / rhs_norm)
            } else {
                None
            };
            symmetrize_in_place(&mut c);
            (c, false, residual, Some(imag))
        };
        drop(rhs);
        coeffs.push(coeff);
        degrees.push(DegreeReport { k, seconds: t.elapsed().as_secs_f64(), rhs_norm, skipped, solve_residual, imag_residue });
    }
    let energy = EnergyPolynomial { kind, eta, n, coeffs };
    Ok((energy, EnergyReport { are, are_seconds, degrees }))
}
