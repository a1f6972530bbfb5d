//! Solves `ℒ_k(M)ᵀ x = b` where `ℒ_k(M) = Σ I ⊗ … ⊗ M ⊗ … ⊗ I` (`k` factors).
//!
//! With `Mᵀ = U T Uᴴ` the operator factors as `U^{⊗k} ℒ_k(T) (Uᴴ)^{⊗k}`, so the
//! solve is `k` mode products, a recursive triangular solve over the eigenvalue
//! grid, and `k` more mode products: `O(k n^{k+1})` in total.

use matrixmultiply::{zgemm, CGemmOption};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kron::checked_len;
use crate::par;
use crate::schur::ComplexSchur;

/// Relative threshold on `min |λ_{i_1} + … + λ_{i_k}|`.
pub const SINGULARITY_TOL: f64 = 1e-10;
/// Largest accepted `‖Im x‖ / ‖x‖` after the back-transform. Strongly
/// non-normal closed loops leave residues well above rounding level while
/// the real part still agrees with a dense solve, so this only rejects
/// results that are visibly broken.
pub const IMAG_RESIDUE_TOL: f64 = 1e-5;

const BLOCK: usize = 48;

/// Reusable factorization of `Mᵀ` for repeated k-way solves with one `M`.
#[derive(Debug, Clone)]
pub struct KwaySolver {
    n: usize,
    /// Upper triangular factor, column-major.
    t: Vec<C64>,
    /// `U` and `Uᴴ`, column-major.
    u: Vec<C64>,
    uh: Vec<C64>,
    /// Frobenius norm of the balanced matrix, the scale for the singularity test.
    m_norm: f64,
    /// Balancing `M = D M̃ D⁻¹`; the factors above belong to `M̃`.
    scale: Option<Vec<f64>>,
}

impl KwaySolver {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "k-way operator must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let (balanced, d) = crate::schur::balance(m);
        let scale = d.iter().any(|&v| v != 1.0).then_some(d);
        let schur = ComplexSchur::from_real(&balanced.transpose())?;
        let u = schur.z().to_vec();
        let mut uh = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                uh[i + n * j] = u[j + n * i].conj();
            }
        }
        Ok(KwaySolver { n, t: schur.t().to_vec(), u, uh, m_norm: balanced.norm(), scale })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.t[i + self.n * i]).collect()
    }

    /// Smallest `|λ_{i_1} + … + λ_{i_k}|` over all multisets of eigenvalues.
    pub fn min_eigen_sum(&self, k: usize) -> f64 {
        let ev = self.eigenvalues();
        let n = self.n;
        let mut idx = vec![0usize; k];
        let mut best = f64::INFINITY;
        loop {
            let s: C64 = idx.iter().map(|&i| ev[i]).sum();
            best = best.min(s.norm());
            let Some(pos) = (0..k).rev().find(|&p| idx[p] + 1 < n) else { break };
            let v = idx[pos] + 1;
            idx[pos..].iter_mut().for_each(|i| *i = v);
        }
        best
    }

    pub fn solve(&self, k: usize, rhs: &[f64]) -> Result<Vec<f64>> {
        let (x, residue) = self.solve_with_residue(k, rhs)?;
        if residue > IMAG_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue { residue });
        }
        Ok(x)
    }

    /// Like [`KwaySolver::solve`] but returns `‖Im x‖ / ‖Re x‖` instead of
    /// checking it.
    pub fn solve_with_residue(&self, k: usize, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = self.n;
        if k == 0 {
            return Err(Error::InvalidArgument("k-way order must be at least 1".into()));
        }
        let len = checked_len(n, k, u64::MAX)?;
        if rhs.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for an order-{k} system in {n} variables",
                rhs.len()
            )));
        }
        let min_sum = self.min_eigen_sum(k);
        let threshold = SINGULARITY_TOL * self.m_norm;
        if !(min_sum >= threshold) {
            return Err(Error::NearSingular { min_sum, threshold });
        }
        // With Mᵀ = D⁻¹M̃ᵀD the balanced system is ℒ_k(M̃ᵀ)(D^{⊗k}x) = D^{⊗k}b.
        let mut y: Vec<C64> = rhs.iter().map(|&r| C64::new(r, 0.0)).collect();
        if let Some(d) = &self.scale {
            scale_kron(&mut y, d, k, false);
        }
        let mut buf = vec![C64::new(0.0, 0.0); len];
        for _ in 0..k {
            mode_product(&self.uh, n, &y, &mut buf);
            std::mem::swap(&mut y, &mut buf);
        }
        self.triangular_solve(k, &mut y, C64::new(0.0, 0.0));
        for _ in 0..k {
            mode_product(&self.u, n, &y, &mut buf);
            std::mem::swap(&mut y, &mut buf);
        }
        drop(buf);
        if let Some(d) = &self.scale {
            scale_kron(&mut y, d, k, true);
        }
        let re_norm = y.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
        let im_norm = y.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
        let residue = if im_norm == 0.0 { 0.0 } else { im_norm / re_norm };
        Ok((y.into_iter().map(|z| z.re).collect(), residue))
    }

    /// Solves `(ℒ_k(T) + σ I) z = y` in place.
    fn triangular_solve(&self, k: usize, y: &mut [C64], sigma: C64) {
        let n = self.n;
        let t = &self.t;
        if k == 1 {
            for i in (0..n).rev() {
                let zi = y[i] / (t[i + n * i] + sigma);
                y[i] = zi;
                let col = &t[n * i..n * i + i];
                for (yj, tj) in y[..i].iter_mut().zip(col) {
                    *yj -= tj * zi;
                }
            }
            return;
        }
        let bs = y.len() / n;
        let mut end = n;
        while end > 0 {
            let start = end.saturating_sub(BLOCK);
            for i1 in (start..end).rev() {
                let (head, tail) = y.split_at_mut(i1 * bs);
                let zb = &mut tail[..bs];
                self.triangular_solve(k - 1, zb, sigma + t[i1 + n * i1]);
                let zb: &[C64] = zb;
                let local = &mut head[start * bs..];
                par::for_each_chunk(local, bs, |r, blk| {
                    let f = t[(start + r) + n * i1];
                    if f != C64::new(0.0, 0.0) {
                        for (b, z) in blk.iter_mut().zip(zb) {
                            *b -= f * z;
                        }
                    }
                });
            }
            if start > 0 {
                let (head, tail) = y.split_at_mut(start * bs);
                let zblock: &[C64] = &tail[..(end - start) * bs];
                let width = end - start;
                par::for_each_block(head, bs, |offset, chunk| {
                    let r0 = offset / bs;
                    let rows = chunk.len() / bs;
                    // chunk -= T[r0.., start..end] · Z
                    unsafe {
                        zgemm(
                            CGemmOption::Standard,
                            CGemmOption::Standard,
                            rows,
                            width,
                            bs,
                            [-1.0, 0.0],
                            t.as_ptr().add(r0 + n * start) as *const [f64; 2],
                            1,
                            n as isize,
                            zblock.as_ptr() as *const [f64; 2],
                            bs as isize,
                            1,
                            [1.0, 0.0],
                            chunk.as_mut_ptr() as *mut [f64; 2],
                            bs as isize,
                            1,
                        );
                    }
                });
            }
            end = start;
        }
    }
}

/// Multiplies entry `(i_1, …, i_k)` by `d[i_1]⋯d[i_k]`, or divides when `invert`.
fn scale_kron(y: &mut [C64], d: &[f64], k: usize, invert: bool) {
    let n = d.len();
    let f: Vec<f64> = if invert { d.iter().map(|v| 1.0 / v).collect() } else { d.to_vec() };
    let mut stride = y.len();
    for _ in 0..k {
        stride /= n;
        let block = stride * n;
        par::for_each_chunk(y, block * 4096usize.div_ceil(block), |_, chunk| {
            for (c, part) in chunk.chunks_mut(stride).enumerate() {
                let s = f[c % n];
                if s != 1.0 {
                    part.iter_mut().for_each(|z| *z *= s);
                }
            }
        });
    }
}

/// Transforms the slowest index of `y` by `w` and moves it to the fastest
/// position: `out[r·n + i'] = Σ_i w[i', i] · y[i·N + r]` with `N = len/n`.
/// After `k` applications every index has been transformed once and the
/// original order is restored.
fn mode_product(w: &[C64], n: usize, y: &[C64], out: &mut [C64]) {
    let rest = y.len() / n;
    par::for_each_block(out, n, |offset, chunk| {
        let r0 = offset / n;
        let rows = chunk.len() / n;
        // SAFETY: strides address `y` (rest × n, column stride rest), `w` and the
        // chunk within their bounds; C64 is layout-compatible with [f64; 2].
        unsafe {
            zgemm(
                CGemmOption::Standard,
                CGemmOption::Standard,
                rows,
                n,
                n,
                [1.0, 0.0],
                y.as_ptr().add(r0) as *const [f64; 2],
                1,
                rest as isize,
                w.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                chunk.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
    });
}

/// Solves `ℒ_k(M)ᵀ x = rhs`.
pub fn solve_kway(m: &DMatrix<f64>, k: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    KwaySolver::new(m)?.solve(k, rhs)
}

/// Largest system size accepted by [`dense_kway_solve`].
pub const DENSE_KWAY_LIMIT: usize = 10_000;

/// Reference solver: forms `ℒ_k(M)ᵀ` from explicit Kronecker products and
/// factors it with partial-pivot LU.
pub fn dense_kway_solve(m: &DMatrix<f64>, k: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    let op = dense_kway_operator(m, k)?;
    if rhs.len() != op.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for a dense system of size {}",
            rhs.len(),
            op.nrows()
        )));
    }
    let lu = op.lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    let threshold = SINGULARITY_TOL * m.norm();
    if !(min_pivot >= threshold) {
        return Err(Error::NearSingular { min_sum: min_pivot, threshold });
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    let x = lu.solve(&b).ok_or(Error::NearSingular { min_sum: 0.0, threshold })?;
    Ok(x.as_slice().to_vec())
}

/// The dense matrix `ℒ_k(M)ᵀ`, guarded by [`DENSE_KWAY_LIMIT`].
pub fn dense_kway_operator(m: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if !m.is_square() || k == 0 {
        return Err(Error::DimensionMismatch("square operator and k >= 1 required".into()));
    }
    let len = checked_len(n, k, DENSE_KWAY_LIMIT as u64)?;
    let mt = m.transpose();
    let mut op = DMatrix::zeros(len, len);
    for pos in 0..k {
        let left = DMatrix::<f64>::identity(n.pow(pos as u32), n.pow(pos as u32));
        let right_dim = n.pow((k - 1 - pos) as u32);
        let right = DMatrix::<f64>::identity(right_dim, right_dim);
        op += left.kronecker(&mt).kronecker(&right);
    }
    Ok(op)
}
