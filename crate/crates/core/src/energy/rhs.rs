//! Right-hand sides of the degree-`k` coefficient equations.
//!
//! For the past energy the degree-`k` equation reads
//! `ℒ_k(A + BBᵀV₂)ᵀ ṽ_k = −Σ ℒ_i(F_p)ᵀ v_i − ¼ Σ ij vec(V_iᵀBBᵀV_j)
//!   + η Σ vec(H_pᵀH_q) − ¼ Σ (input-nonlinearity terms)`,
//! and the future one flips the signs of the input and output sums and scales
//! the input sums by `η`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kron::{checked_len, lyap_transpose_apply, shuffle_apply, CoeffVector};
use crate::par;
use crate::solvers::EnergyKind;
use crate::sparse::RowSparse;
use crate::system::PolynomialSystem;

fn order<'a>(coeffs: &'a [CoeffVector], i: usize) -> Result<&'a CoeffVector> {
    coeffs
        .iter()
        .find(|c| c.k == i)
        .ok_or_else(|| Error::InvalidArgument(format!("coefficient of order {i} is missing")))
}

fn zeros(n: usize, k: usize) -> Result<Vec<f64>> {
    Ok(vec![0.0; checked_len(n, k, u64::MAX)?])
}

/// `−Σ_{i+p=k+1, i,p≥2} ℒ_i(F_p)ᵀ v_i`.
pub fn rhs_f_terms(sys: &PolynomialSystem, coeffs: &[CoeffVector], k: usize) -> Result<Vec<f64>> {
    let mut out = zeros(sys.n, k)?;
    add_f_terms(sys, coeffs, k, &mut out)?;
    Ok(out)
}

fn add_f_terms(sys: &PolynomialSystem, coeffs: &[CoeffVector], k: usize, out: &mut [f64]) -> Result<()> {
    for i in 2..k {
        let p = k + 1 - i;
        let Some(f) = sys.f(p) else { continue };
        if f.is_zero() {
            continue;
        }
        let term = lyap_transpose_apply(f, order(coeffs, i)?)?;
        out.iter_mut().zip(&term).for_each(|(o, t)| *o -= t);
    }
    Ok(())
}

/// `scale · Σ_{i+j=k+2, i,j≥3} ij vec(V_iᵀ B Bᵀ V_j)`.
pub fn rhs_b_terms(sys: &PolynomialSystem, coeffs: &[CoeffVector], k: usize, sign_scale: f64) -> Result<Vec<f64>> {
    let mut out = zeros(sys.n, k)?;
    let mut cache = TermCache::default();
    add_b_terms(sys, coeffs, k, sign_scale, &mut cache, &mut out)?;
    Ok(out)
}

fn add_b_terms(
    sys: &PolynomialSystem,
    coeffs: &[CoeffVector],
    k: usize,
    scale: f64,
    cache: &mut TermCache,
    out: &mut [f64],
) -> Result<()> {
    for i in 3..k {
        let j = k + 2 - i;
        if j < 3 {
            continue;
        }
        let y = cache.get(sys, coeffs, 0, i)?;
        let z = cache.get(sys, coeffs, 0, j)?;
        add_g_contraction(out, sys.n, sys.m, i, 0, 0, &z, &y, scale * (i * j) as f64);
    }
    Ok(())
}

/// `scale · Σ_{p+q=k, p,q≥1} vec(H_pᵀ H_q)` with `H_1 = C`.
pub fn rhs_h_terms(sys: &PolynomialSystem, k: usize, eta_scale: f64) -> Result<Vec<f64>> {
    let mut out = zeros(sys.n, k)?;
    add_h_terms(sys, k, eta_scale, &mut out);
    Ok(out)
}

fn add_h_terms(sys: &PolynomialSystem, k: usize, scale: f64, out: &mut [f64]) {
    let n = sys.n;
    for p in 1..k {
        let q = k - p;
        let (Some(hp), Some(hq)) = (sys.h(p), sys.h(q)) else { continue };
        let rows_p = row_lists(&hp, sys.p_out);
        let rows_q = row_lists(&hq, sys.p_out);
        let np = n.pow(p as u32);
        for (rp, rq) in rows_p.iter().zip(&rows_q) {
            for &(c, vq) in rq {
                for &(a, vp) in rp {
                    out[a + np * c] += scale * vp * vq;
                }
            }
        }
    }
}

fn row_lists(m: &crate::sparse::SparseColumns, rows: usize) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new(); rows];
    for (r, c, v) in m.triplets() {
        out[r].push((c, v));
    }
    out
}

/// Memoized row-sparse products `G_pᵀ · matricize(v_i)` keyed by `(p, i)`;
/// `p = 0` uses `B`.
#[derive(Debug, Default)]
pub struct TermCache {
    products: HashMap<(usize, usize), std::sync::Arc<RowSparse>>,
}

impl TermCache {
    fn get(
        &mut self,
        sys: &PolynomialSystem,
        coeffs: &[CoeffVector],
        p: usize,
        i: usize,
    ) -> Result<std::sync::Arc<RowSparse>> {
        if let Some(y) = self.products.get(&(p, i)) {
            return Ok(y.clone());
        }
        let g = sys
            .g(p)
            .ok_or_else(|| Error::InvalidArgument(format!("G_{p} is absent")))?;
        let v = order(coeffs, i)?;
        let y = std::sync::Arc::new(transposed_product(&g, v)?);
        self.products.insert((p, i), y.clone());
        Ok(y)
    }
}

/// `Gᵀ · matricize(v)` as a row-sparse `cols(G) × n^{i−1}` matrix.
fn transposed_product(g: &crate::sparse::SparseColumns, v: &CoeffVector) -> Result<RowSparse> {
    let n = v.n;
    let tail = v.data.len() / n;
    // Row-major view of matricize(v) is vec(matricize(v)ᵀ), the shuffled vector;
    // for symmetric coefficients that is `v` itself.
    if v.symmetric {
        Ok(g.transpose_mul(&v.data, tail))
    } else {
        let w = shuffle_apply(tail, n, &v.data)?;
        Ok(g.transpose_mul(&w, tail))
    }
}

/// Adds `scale · Σ_r Z[c·m + r, e] Y[a·m + r, b]` at the flat index
/// `((e·n^{i−1} + b)·n^q + c)·n^p + a`, where `Y = G_pᵀV_i` and `Z = G_qᵀV_j`.
#[allow(clippy::too_many_arguments)]
fn add_g_contraction(
    out: &mut [f64],
    n: usize,
    m: usize,
    i: usize,
    p: usize,
    q: usize,
    z: &RowSparse,
    y: &RowSparse,
    scale: f64,
) {
    let ni = n.pow((i - 1) as u32);
    let nq = n.pow(q as u32);
    let np = n.pow(p as u32);
    let stride = nq * np;
    let chunk = ni * stride;
    let ys = by_input(y, m);
    let zs = by_input(z, m);
    par::for_each_chunk(out, chunk, |e, dst| {
        for (yr, zr) in ys.iter().zip(&zs) {
            for &(c, zrow) in zr {
                let ze = zrow[e] * scale;
                if ze == 0.0 {
                    continue;
                }
                for &(a, yrow) in yr {
                    let base = c * np + a;
                    for (b, &yb) in yrow.iter().enumerate() {
                        dst[b * stride + base] += ze * yb;
                    }
                }
            }
        }
    });
}

/// Rows `α = a·m + r` regrouped per input `r` as `(a, row)`.
fn by_input(rs: &RowSparse, m: usize) -> Vec<Vec<(usize, &[f64])>> {
    let mut lists: Vec<Vec<(usize, &[f64])>> = vec![Vec::new(); m];
    for (alpha, row) in &rs.rows {
        lists[alpha % m].push((alpha / m, row.as_slice()));
    }
    lists
}

/// One input-nonlinearity term `ij · vec[(I ⊗ vec(I_m)ᵀ)(vec(G_qᵀV_j)ᵀ ⊗ (G_pᵀV_i ⊗ I_m))Pᵀ(I ⊗ vec(I_m))]`
/// of order `k = i + j + p + q − 2`.
pub fn rhs_g_term_single(
    sys: &PolynomialSystem,
    v_i: &CoeffVector,
    v_j: &CoeffVector,
    i: usize,
    j: usize,
    p: usize,
    q: usize,
) -> Result<Vec<f64>> {
    if i < 2 || j < 2 || v_i.k != i || v_j.k != j {
        return Err(Error::InvalidArgument(format!(
            "input term needs coefficient orders i, j >= 2 (got {i}, {j})"
        )));
    }
    let k = i + j + p + q - 2;
    let mut out = zeros(sys.n, k)?;
    let (Some(gp), Some(gq)) = (sys.g(p), sys.g(q)) else {
        return Ok(out);
    };
    let y = transposed_product(&gp, v_i)?;
    let z = transposed_product(&gq, v_j)?;
    add_g_contraction(&mut out, sys.n, sys.m, i, p, q, &z, &y, (i * j) as f64);
    Ok(out)
}

/// Sign and scale factors of the four term families.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TermScales {
    pub b: f64,
    pub h: f64,
    pub g: f64,
}

impl TermScales {
    pub fn new(kind: EnergyKind, eta: f64) -> Self {
        match kind {
            EnergyKind::Past => TermScales { b: -0.25, h: eta, g: -0.25 },
            EnergyKind::Future => TermScales { b: 0.25 * eta, h: -1.0, g: 0.25 * eta },
        }
    }
}

/// Full right-hand side for degree `k`.
pub fn assemble_rhs(
    sys: &PolynomialSystem,
    coeffs: &[CoeffVector],
    k: usize,
    kind: EnergyKind,
    eta: f64,
) -> Result<Vec<f64>> {
    assemble_rhs_cached(sys, coeffs, k, kind, eta, &mut TermCache::default())
}

pub(crate) fn assemble_rhs_cached(
    sys: &PolynomialSystem,
    coeffs: &[CoeffVector],
    k: usize,
    kind: EnergyKind,
    eta: f64,
    cache: &mut TermCache,
) -> Result<Vec<f64>> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!("right-hand sides start at degree 3, got {k}")));
    }
    let s = TermScales::new(kind, eta);
    let mut out = zeros(sys.n, k)?;
    add_f_terms(sys, coeffs, k, &mut out)?;
    if s.b != 0.0 {
        add_b_terms(sys, coeffs, k, s.b, cache, &mut out)?;
    }
    if s.h != 0.0 {
        add_h_terms(sys, k, s.h, &mut out);
    }
    if s.g != 0.0 {
        for o in 1..=2 * sys.ell {
            if o + 2 > k {
                break;
            }
            for p in 0..=o {
                let q = o - p;
                if p > sys.ell || q > sys.ell {
                    continue;
                }
                let present = |r: usize| r == 0 || sys.g_terms().any(|(t, g)| t == r && !g.is_zero());
                if !present(p) || !present(q) {
                    continue;
                }
                for i in 2..=k - o {
                    let j = k - o + 2 - i;
                    if j < 2 {
                        continue;
                    }
                    let y = cache.get(sys, coeffs, p, i)?;
                    let z = cache.get(sys, coeffs, q, j)?;
                    add_g_contraction(&mut out, sys.n, sys.m, i, p, q, &z, &y, s.g * (i * j) as f64);
                }
            }
        }
    }
    Ok(out)
}
