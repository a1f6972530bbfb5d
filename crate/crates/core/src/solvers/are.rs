//! Degree-2 energy coefficients from the past and future Riccati equations.
//!
//! Both are mapped to the standard stabilizing form
//! `ÃᵀX + XÃ − XRX + Q = 0` with `Ã − RX` Hurwitz, solved through the stable
//! invariant subspace of the Hamiltonian `[[Ã, −R], [−Q, −Ãᵀ]]` and polished
//! with Newton steps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::schur::{self, ComplexSchur};
use crate::solvers::kway::solve_kway;

/// Which energy function a computation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyKind {
    Past,
    Future,
}

impl EnergyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyKind::Past => "past",
            EnergyKind::Future => "future",
        }
    }
}

impl std::str::FromStr for EnergyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "past" => Ok(EnergyKind::Past),
            "future" => Ok(EnergyKind::Future),
            other => Err(Error::InvalidArgument(format!("unknown energy kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AreSolution {
    pub x: DMatrix<f64>,
    /// `A + BBᵀX` (past) or `A − ηBBᵀX` (future).
    pub closed_loop: DMatrix<f64>,
    /// Frobenius norm of the Riccati residual.
    pub residual_norm: f64,
    pub kind: EnergyKind,
    pub eta: f64,
    pub newton_steps: usize,
}

/// Relative residual above which a solution is rejected.
pub const ACCEPT_TOL: f64 = 1e-8;
/// Eigenvalues of `X` down to `−PSD_TOL·‖X‖₂` count as nonnegative.
pub const PSD_TOL: f64 = 1e-6;
const MAX_NEWTON: usize = 12;

/// `AᵀV + VA − ηCᵀC + VBBᵀV = 0` with `−(A + BBᵀV)` Hurwitz.
pub fn solve_are_past(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, eta: f64) -> Result<AreSolution> {
    check_shapes(a, b, c)?;
    let r = b * b.transpose();
    let q = c.transpose() * c * eta;
    let (x, residual_norm, newton_steps) = solve_care(&(-a), &r, &q)?;
    let closed_loop = a + &r * &x;
    Ok(AreSolution { x, closed_loop, residual_norm, kind: EnergyKind::Past, eta, newton_steps })
}

/// `AᵀW + WA + CᵀC − ηWBBᵀW = 0` with `A − ηBBᵀW` Hurwitz.
pub fn solve_are_future(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, eta: f64) -> Result<AreSolution> {
    check_shapes(a, b, c)?;
    let r = b * b.transpose() * eta;
    let q = c.transpose() * c;
    let (x, residual_norm, newton_steps) = solve_care(a, &r, &q)?;
    let closed_loop = a - &r * &x;
    Ok(AreSolution { x, closed_loop, residual_norm, kind: EnergyKind::Future, eta, newton_steps })
}

pub fn solve_are(kind: EnergyKind, a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, eta: f64) -> Result<AreSolution> {
    match kind {
        EnergyKind::Past => solve_are_past(a, b, c, eta),
        EnergyKind::Future => solve_are_future(a, b, c, eta),
    }
}

/// Solves for the state `z = Tx` and maps the result back to `x`.
pub fn solve_are_in(
    kind: EnergyKind,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    eta: f64,
    t: Option<&DMatrix<f64>>,
) -> Result<AreSolution> {
    let Some(t) = t else { return solve_are(kind, a, b, c, eta) };
    check_shapes(a, b, c)?;
    if t.shape() != a.shape() {
        return Err(Error::DimensionMismatch(format!("coordinate map {}x{}", t.nrows(), t.ncols())));
    }
    let ti = t
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("coordinate map is singular".into()))?;
    let mut sol = solve_are(kind, &(t * a * &ti), &(t * b), &(c * &ti), eta)?;
    let x = t.transpose() * &sol.x * t;
    sol.x = (&x + x.transpose()) * 0.5;
    sol.closed_loop = &ti * &sol.closed_loop * t;
    Ok(sol)
}

fn check_shapes(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n || c.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "A {}x{}, B {}x{}, C {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    Ok(())
}

/// Residual `ÃᵀX + XÃ − XRX + Q`.
pub fn care_residual(a: &DMatrix<f64>, r: &DMatrix<f64>, q: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose() * x + x * a - x * r * x + q
}

/// Stabilizing solution of `ÃᵀX + XÃ − XRX + Q = 0`; returns `(X, ‖residual‖_F, Newton steps)`.
///
/// The equation is solved in coordinates `x = D x̃` chosen by
/// [`symplectic_balance`], where it reads the same with `D⁻¹ÃD`, `D⁻¹RD⁻¹`,
/// `DQD` and `X̃ = DXD`.
pub fn solve_care(a: &DMatrix<f64>, r: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64, usize)> {
    let d = symplectic_balance(a, r, q);
    let n = a.nrows();
    let ab = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * d[j] / d[i]);
    let rb = DMatrix::from_fn(n, n, |i, j| r[(i, j)] / (d[i] * d[j]));
    let qb = DMatrix::from_fn(n, n, |i, j| q[(i, j)] * d[i] * d[j]);
    let (xb, _, steps) = solve_care_unscaled(&ab, &rb, &qb)?;
    // Inertia is invariant under the congruence, and the balanced form is the
    // better conditioned one to test.
    check_psd(&xb)?;
    let x = DMatrix::from_fn(n, n, |i, j| xb[(i, j)] / (d[i] * d[j]));
    let res = care_residual(a, r, q, &x).norm();
    Ok((x, res, steps))
}

/// Power-of-two scaling `D` that balances the Hamiltonian
/// `[Ã −R; −Q −Ãᵀ]` under the symplectic similarity `diag(D, D⁻¹)`.
pub fn symplectic_balance(a: &DMatrix<f64>, r: &DMatrix<f64>, q: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut a = a.clone();
    let mut r = r.clone();
    let mut q = q.clone();
    let mut d = vec![1.0; n];
    for _sweep in 0..200 {
        let mut done = true;
        for i in 0..n {
            // Entries multiplied by f: off-diagonal column i of Ã and row/column i of Q.
            // Entries divided by f: off-diagonal row i of Ã and row/column i of R.
            let mut c = 0.0;
            let mut rr = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    rr += a[(i, j)].abs();
                }
                c += q[(i, j)].abs();
                rr += r[(i, j)].abs();
            }
            if c == 0.0 || rr == 0.0 {
                continue;
            }
            let total = c + rr;
            let mut f = 1.0;
            while c < rr / 2.0 {
                f *= 2.0;
                c *= 4.0;
            }
            while c >= rr * 2.0 {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + rr) / f < 0.95 * total {
                done = false;
                d[i] *= f;
                a.column_mut(i).scale_mut(f);
                a.row_mut(i).scale_mut(1.0 / f);
                q.column_mut(i).scale_mut(f);
                q.row_mut(i).scale_mut(f);
                r.column_mut(i).scale_mut(1.0 / f);
                r.row_mut(i).scale_mut(1.0 / f);
            }
        }
        if done {
            break;
        }
    }
    d
}

fn solve_care_unscaled(a: &DMatrix<f64>, r: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64, usize)> {
    let n = a.nrows();
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-r));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));
    let h_norm = h.norm();

    let mut s = ComplexSchur::from_real(&h)?;
    let axis_tol = 100.0 * f64::EPSILON * h_norm;
    if let Some(e) = s.eigenvalues().iter().find(|e| e.re.abs() <= axis_tol) {
        return Err(Error::NoStabilizingSolution(format!(
            "Hamiltonian eigenvalue {e} on the imaginary axis"
        )));
    }
    let stable = s.reorder(|e| e.re < 0.0);
    if stable != n {
        return Err(Error::NoStabilizingSolution(format!(
            "{stable} stable Hamiltonian eigenvalues, expected {n}"
        )));
    }
    let z = DMatrix::from_column_slice(2 * n, 2 * n, s.z());
    let u11 = z.view((0, 0), (n, n)).clone_owned();
    let u21 = z.view((n, 0), (n, n)).clone_owned();
    let xt = u11
        .transpose()
        .lu()
        .solve(&u21.transpose())
        .ok_or_else(|| Error::NoStabilizingSolution("singular invariant-subspace basis".into()))?;
    let x_c: DMatrix<C64> = xt.transpose();
    let mut x = x_c.map(|v| v.re);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoStabilizingSolution("non-finite Schur solution".into()));
    }
    symmetrize_matrix(&mut x);

    let mut res = care_residual(a, r, q, &x).norm();
    let mut steps = 0;
    for _ in 0..MAX_NEWTON {
        let acl = a - r * &x;
        let rhs = care_residual(a, r, q, &x);
        let neg: Vec<f64> = rhs.iter().map(|v| -v).collect();
        // Refinement is optional; the acceptance checks below still apply.
        let Ok(d) = solve_kway(&acl, 2, &neg) else { break };
        let delta = DMatrix::from_column_slice(n, n, &d);
        let mut cand = &x + delta;
        symmetrize_matrix(&mut cand);
        let cand_res = care_residual(a, r, q, &cand).norm();
        if !(cand_res < res) {
            break;
        }
        let gain = cand_res / res;
        x = cand;
        res = cand_res;
        steps += 1;
        if gain > 0.5 || res == 0.0 {
            break;
        }
    }

    let scale = q.norm() + 2.0 * a.norm() * x.norm() + r.norm() * x.norm_squared();
    let rel = res / scale.max(f64::MIN_POSITIVE);
    if rel > ACCEPT_TOL {
        return Err(Error::InaccurateSolution { residual: rel });
    }
    let acl = a - r * &x;
    if let Some(e) = schur::eigenvalues(&acl)?.iter().find(|e| e.re >= 0.0) {
        return Err(Error::NoStabilizingSolution(format!("closed-loop eigenvalue {e} is not stable")));
    }
    Ok((x, res, steps))
}

fn symmetrize_matrix(x: &mut DMatrix<f64>) {
    let t = x.transpose();
    *x += t;
    *x *= 0.5;
}

fn check_psd(x: &DMatrix<f64>) -> Result<()> {
    let eig = SymmetricEigen::new(x.clone()).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let radius = eig.iter().map(|e| e.abs()).fold(0.0, f64::max);
    if min < -PSD_TOL * radius {
        return Err(Error::IndefiniteSolution { min_eig: min });
    }
    Ok(())
}
