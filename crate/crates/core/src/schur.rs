//! Complex Schur decomposition `A = Z T Zᴴ` with `T` upper triangular.
//!
//! Householder reduction to Hessenberg form followed by single-shift implicit QR
//! with Wilkinson shifts; eigenvalues can be reordered by unitary swaps.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 120;

#[derive(Debug, Clone)]
pub struct ComplexSchur {
    n: usize,
    /// Column-major upper triangular factor.
    t: Vec<C64>,
    /// Column-major unitary Schur vectors.
    z: Vec<C64>,
}

impl ComplexSchur {
    pub fn from_real(a: &DMatrix<f64>) -> Result<Self> {
        assert!(a.is_square(), "Schur of a non-square matrix");
        let n = a.nrows();
        let t = a.as_slice().iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_complex(n, t)
    }

    /// `a` is column-major `n × n`.
    pub fn from_complex(n: usize, a: Vec<C64>) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        let mut s = ComplexSchur { n, t: a, z: identity(n) };
        s.hessenberg();
        s.qr_iterate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> &[C64] {
        &self.t
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    #[inline]
    pub fn t_at(&self, i: usize, j: usize) -> C64 {
        self.t[i + self.n * j]
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.t_at(i, i)).collect()
    }

    /// Moves every eigenvalue accepted by `select` to the leading diagonal block,
    /// preserving relative order, and returns how many were selected.
    pub fn reorder<F: Fn(C64) -> bool>(&mut self, select: F) -> usize {
        let mut ks = 0;
        for i in 0..self.n {
            if select(self.t_at(i, i)) {
                for k in (ks..i).rev() {
                    self.swap(k);
                }
                ks += 1;
            }
        }
        ks
    }

    /// Exchanges the diagonal entries at `k` and `k + 1`.
    fn swap(&mut self, k: usize) {
        let n = self.n;
        let t11 = self.t_at(k, k);
        let t22 = self.t_at(k + 1, k + 1);
        let (c, s, _) = givens(self.t_at(k, k + 1), t22 - t11);
        rot_rows(&mut self.t, n, k, k + 2, n, c, s);
        rot_cols(&mut self.t, n, k, 0, k, c, s);
        rot_cols(&mut self.z, n, k, 0, n, c, s);
        self.t[k + n * k] = t22;
        self.t[k + 1 + n * (k + 1)] = t11;
        self.t[k + 1 + n * k] = C64::new(0.0, 0.0);
    }

    fn hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        let mut w = vec![C64::new(0.0, 0.0); n];
        for j in 0..n - 2 {
            let len = n - j - 1;
            let x = &self.t[(j + 1) + n * j..n + n * j];
            let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let tail: f64 = x[1..].iter().map(|v| v.norm_sqr()).sum();
            if norm == 0.0 || tail == 0.0 {
                continue;
            }
            let x0 = x[0];
            let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
            let beta = -phase * norm;
            let v = &mut w[..len];
            v.copy_from_slice(x);
            v[0] -= beta;
            let vv: f64 = v.iter().map(|e| e.norm_sqr()).sum();
            let scale = 2.0 / vv;
            // Left: rows j+1.., columns j..
            for c in j..n {
                let col = &mut self.t[(j + 1) + n * c..n + n * c];
                let s: C64 = v.iter().zip(col.iter()).map(|(vi, a)| vi.conj() * a).sum();
                let f = s * scale;
                for (a, vi) in col.iter_mut().zip(v.iter()) {
                    *a -= vi * f;
                }
            }
            // Right: all rows, columns j+1..
            apply_reflector_right(&mut self.t, n, j + 1, v, scale);
            apply_reflector_right(&mut self.z, n, j + 1, v, scale);
            for r in j + 2..n {
                self.t[r + n * j] = C64::new(0.0, 0.0);
            }
            self.t[j + 1 + n * j] = beta;
        }
    }

    fn qr_iterate(&mut self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Ok(());
        }
        let eps = f64::EPSILON;
        let safe_min = f64::MIN_POSITIVE / eps;
        let mut hi = n - 1;
        let mut its = 0usize;
        while hi > 0 {
            // Find the active window [lo, hi].
            let mut lo = hi;
            while lo > 0 {
                let sub = cabs1(self.t_at(lo, lo - 1));
                let diag = cabs1(self.t_at(lo, lo)) + cabs1(self.t_at(lo - 1, lo - 1));
                if sub <= safe_min || sub <= eps * diag {
                    self.t[lo + n * (lo - 1)] = C64::new(0.0, 0.0);
                    break;
                }
                lo -= 1;
            }
            if lo == hi {
                hi -= 1;
                its = 0;
                continue;
            }
            its += 1;
            if its > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::NoConvergence);
            }
            let mu = if its % 10 == 0 {
                let h = self.t_at(hi, hi - 1);
                self.t_at(hi, hi) + C64::new(0.75 * h.norm(), 0.0)
            } else {
                wilkinson_shift(
                    self.t_at(hi - 1, hi - 1),
                    self.t_at(hi - 1, hi),
                    self.t_at(hi, hi - 1),
                    self.t_at(hi, hi),
                )
            };
            self.sweep(lo, hi, mu);
        }
        for j in 0..n {
            for i in j + 1..n {
                self.t[i + n * j] = C64::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    fn sweep(&mut self, lo: usize, hi: usize, mu: C64) {
        let n = self.n;
        for k in lo..hi {
            let (c, s) = if k == lo {
                let (c, s, _) = givens(self.t_at(lo, lo) - mu, self.t_at(lo + 1, lo));
                (c, s)
            } else {
                let (c, s, r) = givens(self.t_at(k, k - 1), self.t_at(k + 1, k - 1));
                self.t[k + n * (k - 1)] = r;
                self.t[k + 1 + n * (k - 1)] = C64::new(0.0, 0.0);
                (c, s)
            };
            rot_rows(&mut self.t, n, k, k, n, c, s);
            rot_cols(&mut self.t, n, k, 0, (k + 3).min(hi + 1), c, s);
            rot_cols(&mut self.z, n, k, 0, n, c, s);
        }
    }
}

fn identity(n: usize) -> Vec<C64> {
    let mut z = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        z[i + n * i] = C64::new(1.0, 0.0);
    }
    z
}

#[inline]
fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// `A[:, from..] ← A[:, from..] (I − scale·v vᴴ)`.
fn apply_reflector_right(a: &mut [C64], n: usize, from: usize, v: &[C64], scale: f64) {
    let mut s = vec![C64::new(0.0, 0.0); n];
    for (t, vt) in v.iter().enumerate() {
        let col = &a[n * (from + t)..n * (from + t + 1)];
        for (si, ai) in s.iter_mut().zip(col) {
            *si += ai * vt;
        }
    }
    for (t, vt) in v.iter().enumerate() {
        let f = vt.conj() * scale;
        let col = &mut a[n * (from + t)..n * (from + t + 1)];
        for (ai, si) in col.iter_mut().zip(&s) {
            *ai -= si * f;
        }
    }
}

/// `(c, s, r)` with `[c s; −s̄ c]·[f; g] = [r; 0]`, `c` real.
pub(crate) fn givens(f: C64, g: C64) -> (f64, C64, C64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, C64::new(0.0, 0.0), f);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn, C64::new(gn, 0.0));
    }
    let norm = fn_.hypot(gn);
    let alpha = f / fn_;
    (fn_ / norm, alpha * g.conj() / norm, alpha * norm)
}

/// Rotates rows `k`, `k+1` over columns `c0..c1`.
fn rot_rows(a: &mut [C64], n: usize, k: usize, c0: usize, c1: usize, c: f64, s: C64) {
    for j in c0..c1 {
        let x = a[k + n * j];
        let y = a[k + 1 + n * j];
        a[k + n * j] = x * c + s * y;
        a[k + 1 + n * j] = y * c - s.conj() * x;
    }
}

/// Right-multiplies columns `k`, `k+1` (rows `r0..r1`) by the adjoint rotation.
fn rot_cols(a: &mut [C64], n: usize, k: usize, r0: usize, r1: usize, c: f64, s: C64) {
    let (left, right) = a.split_at_mut(n * (k + 1));
    let ck = &mut left[n * k + r0..n * k + r1];
    let ck1 = &mut right[r0..r1];
    let sc = s.conj();
    for (x, y) in ck.iter_mut().zip(ck1.iter_mut()) {
        let (xv, yv) = (*x, *y);
        *x = xv * c + sc * yv;
        *y = yv * c - s * xv;
    }
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let x = (a - d) * 0.5;
    let bc = b * c;
    let root = (x * x + bc).sqrt();
    let den = if (x + root).norm() >= (x - root).norm() { x + root } else { x - root };
    if den.norm() == 0.0 {
        d
    } else {
        d - bc / den
    }
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<C64>> {
    Ok(ComplexSchur::from_real(a)?.eigenvalues())
}

/// Diagonal similarity `D⁻¹ A D` with power-of-two entries that roughly
/// equalizes off-diagonal row and column norms; returns the balanced matrix
/// and `diag(D)`. The scaling is exact in floating point.
pub fn balance(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                c += b[(j, i)].abs();
                r += b[(i, j)].abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                f *= 2.0;
                c *= 4.0;
            }
            while c >= r * 2.0 {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * total {
                done = false;
                d[i] *= f;
                b.column_mut(i).scale_mut(f);
                b.row_mut(i).scale_mut(1.0 / f);
            }
        }
    }
    (b, d)
}
