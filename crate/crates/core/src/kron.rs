//! Kronecker-product kernels on coefficient vectors.
//!
//! Conventions: indices are 0-based, `vec` stacks columns, and in a Kronecker
//! power the leftmost factor varies slowest, so the entry of `x^{⊗k}` at
//! multi-index `(i_1, …, i_k)` sits at `((i_1·n + i_2)·n + …)·n + i_k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::par;
use crate::sparse::SparseColumns;

/// Default cap on the length of any `n^k` vector.
pub const DEFAULT_ELEMENT_BUDGET: u64 = 1 << 31;

/// `n^k` with overflow and budget checks.
pub fn checked_len(n: usize, k: usize, budget: u64) -> Result<usize> {
    let over = || Error::BudgetExceeded { n, k, budget };
    let mut len: u64 = 1;
    for _ in 0..k {
        len = len.checked_mul(n as u64).ok_or_else(over)?;
        if len > budget {
            return Err(over());
        }
    }
    usize::try_from(len).map_err(|_| over())
}

/// Coefficient of a homogeneous degree-`k` polynomial in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    pub data: Vec<f64>,
    pub n: usize,
    pub k: usize,
    /// Set when the entries are invariant under every index permutation.
    pub symmetric: bool,
}

impl CoeffVector {
    pub fn new(n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("base dimension must be positive".into()));
        }
        let len = checked_len(n, k, u64::MAX)?;
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "coefficient of order {k} in {n} variables needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(CoeffVector { data, n, k, symmetric: false })
    }

    pub fn zeros(n: usize, k: usize, budget: u64) -> Result<Self> {
        let len = checked_len(n, k, budget)?;
        Ok(CoeffVector { data: vec![0.0; len], n, k, symmetric: true })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `cᵀ x^{⊗k}`, contracting one index at a time from the right.
    pub fn contract(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        if self.k == 0 {
            return self.data[0];
        }
        contract_trailing(&self.data, x, self.k)[0]
    }

    /// Checks the permutation invariance required of symmetric coefficients,
    /// bitwise, through every split `S_{n^j × n^i}` with `i + j = k`.
    pub fn check_shuffle_invariance(&self) -> bool {
        (1..self.k).all(|i| {
            let j = self.k - i;
            let q = self.n.pow(j as u32);
            let p = self.n.pow(i as u32);
            shuffle_apply(q, p, &self.data).map(|s| s == self.data).unwrap_or(false)
        })
    }
}

/// Contracts the trailing `times` indices of `c` with `x`.
pub(crate) fn contract_trailing(c: &[f64], x: &[f64], times: usize) -> Vec<f64> {
    let n = x.len();
    let mut cur: Vec<f64> = c.chunks_exact(n).map(|row| dot(row, x)).collect();
    for _ in 1..times {
        cur = cur.chunks_exact(n).map(|row| dot(row, x)).collect();
    }
    cur
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x^{⊗k}` under the default element budget. `k = 0` gives `[1]`.
pub fn kron_pow(x: &[f64], k: usize) -> Result<CoeffVector> {
    kron_pow_with_budget(x, k, DEFAULT_ELEMENT_BUDGET)
}

pub fn kron_pow_with_budget(x: &[f64], k: usize, budget: u64) -> Result<CoeffVector> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty vector".into()));
    }
    checked_len(n, k, budget)?;
    let mut cur = vec![1.0];
    for _ in 0..k {
        cur = kron_step(&cur, x);
    }
    Ok(CoeffVector { data: cur, n, k, symmetric: true })
}

/// `prev ⊗ x`.
pub(crate) fn kron_step(prev: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(prev.len() * x.len());
    for &a in prev {
        out.extend(x.iter().map(|&b| a * b));
    }
    out
}

/// Applies the perfect shuffle `S_{q×p}`: for a `p×q` matrix `A`,
/// `vec(A) ↦ vec(Aᵀ)`, i.e. `out[i·q + j] = v[j·p + i]`.
pub fn shuffle_apply(q: usize, p: usize, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != p * q {
        return Err(Error::DimensionMismatch(format!(
            "shuffle {q}x{p} on a vector of length {}",
            v.len()
        )));
    }
    let mut out = vec![0.0; v.len()];
    transpose_runs(v, &mut out, 1, q, p, 1, false);
    Ok(out)
}

/// Batched transpose: for each of `batch` blocks, `out[(b, i, j, t)] (+)= v[(b, j, i, t)]`
/// with `j < q`, `i < p`, `t < run`.
fn transpose_runs(v: &[f64], out: &mut [f64], batch: usize, q: usize, p: usize, run: usize, add: bool) {
    let block = q * p * run;
    debug_assert_eq!(v.len(), batch * block);
    let row = q * run;
    par::for_each_block(out, row, |offset, chunk| {
        for (r, out_row) in chunk.chunks_exact_mut(row).enumerate() {
            let g = offset / row + r;
            let (b, i) = (g / p, g % p);
            let src = &v[b * block..(b + 1) * block];
            for j in 0..q {
                let s = &src[(j * p + i) * run..(j * p + i + 1) * run];
                let d = &mut out_row[j * run..(j + 1) * run];
                if add {
                    d.iter_mut().zip(s).for_each(|(d, s)| *d += s);
                } else {
                    d.copy_from_slice(s);
                }
            }
        }
    });
}

/// One Kronecker factor of a [`KronPermutation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermBlock {
    Identity(usize),
    /// The perfect shuffle `S_{q×p}` of size `q·p`.
    Shuffle { q: usize, p: usize },
}

impl PermBlock {
    pub fn dim(&self) -> usize {
        match *self {
            PermBlock::Identity(m) => m,
            PermBlock::Shuffle { q, p } => q * p,
        }
    }

    fn map(&self, d: usize) -> usize {
        match *self {
            PermBlock::Identity(_) => d,
            PermBlock::Shuffle { q, p } => (d % p) * q + d / p,
        }
    }
}

/// Kronecker product of identity and perfect-shuffle factors, applied as an
/// index map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KronPermutation {
    blocks: Vec<PermBlock>,
}

impl KronPermutation {
    pub fn new(blocks: Vec<PermBlock>) -> Self {
        KronPermutation { blocks }
    }

    pub fn blocks(&self) -> &[PermBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(PermBlock::dim).product()
    }

    pub fn inverse(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| match *b {
                PermBlock::Shuffle { q, p } => PermBlock::Shuffle { q: p, p: q },
                id => id,
            })
            .collect();
        KronPermutation { blocks }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out, false)?;
        Ok(out)
    }

    /// Writes `P v` into `out`, or adds it when `add` is set.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64], add: bool) -> Result<()> {
        let dim = self.dim();
        if v.len() != dim || out.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "permutation of size {dim} applied to lengths {} -> {}",
                v.len(),
                out.len()
            )));
        }
        let blocks = self.normalized();
        match blocks.as_slice() {
            [] => copy_or_add(v, out, add),
            [PermBlock::Identity(_)] => copy_or_add(v, out, add),
            _ => {
                if let Some((batch, q, p, run)) = single_shuffle(&blocks) {
                    transpose_runs(v, out, batch, q, p, run, add);
                } else {
                    self.apply_generic(&blocks, v, out, add);
                }
            }
        }
        Ok(())
    }

    /// Merges adjacent identities and drops trivial factors.
    fn normalized(&self) -> Vec<PermBlock> {
        let mut out: Vec<PermBlock> = Vec::new();
        for &b in &self.blocks {
            let b = match b {
                PermBlock::Shuffle { q, p } if q == 1 || p == 1 => PermBlock::Identity(q * p),
                b => b,
            };
            match (out.last_mut(), b) {
                (_, PermBlock::Identity(1)) => {}
                (Some(PermBlock::Identity(a)), PermBlock::Identity(m)) => *a *= m,
                _ => out.push(b),
            }
        }
        out
    }

    fn apply_generic(&self, blocks: &[PermBlock], v: &[f64], out: &mut [f64], add: bool) {
        let run = match blocks.last() {
            Some(PermBlock::Identity(m)) => *m,
            _ => 1,
        };
        let outer: &[PermBlock] = if run > 1 { &blocks[..blocks.len() - 1] } else { blocks };
        let dims: Vec<usize> = outer.iter().map(PermBlock::dim).collect();
        let count = v.len() / run;
        for o in 0..count {
            let mut rem = o;
            let mut dst = 0;
            let mut scale = 1;
            for (b, &d) in outer.iter().zip(&dims).rev() {
                let digit = rem % d;
                rem /= d;
                dst += b.map(digit) * scale;
                scale *= d;
            }
            let s = &v[o * run..(o + 1) * run];
            let d = &mut out[dst * run..(dst + 1) * run];
            if add {
                d.iter_mut().zip(s).for_each(|(d, s)| *d += s);
            } else {
                d.copy_from_slice(s);
            }
        }
    }
}

fn single_shuffle(blocks: &[PermBlock]) -> Option<(usize, usize, usize, usize)> {
    let mut batch = 1;
    let mut run = 1;
    let mut shuffle = None;
    for b in blocks {
        match (*b, shuffle) {
            (PermBlock::Identity(m), None) => batch *= m,
            (PermBlock::Identity(m), Some(_)) => run *= m,
            (PermBlock::Shuffle { q, p }, None) => shuffle = Some((q, p)),
            (PermBlock::Shuffle { .. }, Some(_)) => return None,
        }
    }
    shuffle.map(|(q, p)| (batch, q, p, run))
}

fn copy_or_add(v: &[f64], out: &mut [f64], add: bool) {
    if add {
        out.iter_mut().zip(v).for_each(|(o, x)| *o += x);
    } else {
        out.copy_from_slice(v);
    }
}

/// Averages `v` over all index permutations.
pub fn symmetrize(v: &CoeffVector) -> CoeffVector {
    let mut out = v.clone();
    symmetrize_in_place(&mut out);
    out
}

/// In-place [`symmetrize`]. Each group of indices that are permutations of one
/// another is replaced by its mean, computed as an offset from the sorted
/// representative so that already-symmetric input is returned unchanged.
pub fn symmetrize_in_place(v: &mut CoeffVector) {
    let (n, k) = (v.n, v.k);
    if k >= 2 {
        let data = &mut v.data;
        let mut idx = vec![0usize; k];
        let mut perm = vec![0usize; k];
        let mut members: Vec<usize> = Vec::new();
        loop {
            members.clear();
            perm.copy_from_slice(&idx);
            loop {
                members.push(flat_index(&perm, n));
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            if members.len() > 1 {
                let base = data[members[0]];
                let shift: f64 = members[1..].iter().map(|&m| data[m] - base).sum();
                let mean = base + shift / members.len() as f64;
                for &m in &members {
                    data[m] = mean;
                }
            }
            if !next_multiset(&mut idx, n) {
                break;
            }
        }
    }
    v.symmetric = true;
}

fn flat_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Next nondecreasing sequence over `0..n`.
fn next_multiset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(pos) = (0..k).rev().find(|&p| idx[p] + 1 < n) else {
        return false;
    };
    let v = idx[pos] + 1;
    for i in &mut idx[pos..] {
        *i = v;
    }
    true
}

/// Lexicographic successor, skipping duplicates.
fn next_permutation(a: &mut [usize]) -> bool {
    let k = a.len();
    if k < 2 {
        return false;
    }
    let Some(i) = (0..k - 1).rev().find(|&i| a[i] < a[i + 1]) else {
        return false;
    };
    let j = (i + 1..k).rev().find(|&j| a[j] > a[i]).expect("successor exists");
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// Unstacks `v` into the `n × n^{k-1}` matrix whose `vec` is `v`.
pub fn matricize(v: &CoeffVector) -> DMatrix<f64> {
    let cols = v.data.len() / v.n;
    DMatrix::from_column_slice(v.n, cols, &v.data)
}

/// `ℒ_i(F)ᵀ v` for `F` of size `n × n^p` and `v` of order `i`, without forming
/// the Kronecker sum. Output has order `i - 1 + p`.
pub fn lyap_transpose_apply(f: &SparseColumns, v: &CoeffVector) -> Result<Vec<f64>> {
    let (n, i) = (v.n, v.k);
    if f.rows() != n || i == 0 {
        return Err(Error::DimensionMismatch(format!(
            "operator with {} rows applied to order-{i} coefficient in {n} variables",
            f.rows()
        )));
    }
    let np = f.cols();
    let p = log_n(np, n)?;
    let tail = v.data.len() / n;
    let out_len = np * tail;
    if v.symmetric || i == 1 {
        // Every position gives a permutation of the first-index contraction.
        let mut u = vec![0.0; out_len];
        f.transpose_mul_dense(&v.data, tail, &mut u);
        if i == 1 {
            return Ok(u);
        }
        let mut out = vec![0.0; out_len];
        for pos in 0..i {
            let perm = KronPermutation::new(vec![
                PermBlock::Shuffle { q: n.pow(p), p: n.pow(pos as u32) },
                PermBlock::Identity(n.pow((i - 1 - pos) as u32)),
            ]);
            perm.apply_into(&u, &mut out, pos > 0)?;
        }
        Ok(out)
    } else {
        let mut out = vec![0.0; out_len];
        for pos in 0..i {
            let rest = n.pow((i - 1 - pos) as u32);
            let cols: Vec<(usize, &[usize], &[f64])> = f.columns().collect();
            par::for_each_chunk(&mut out, np * rest, |a, chunk| {
                for &(delta, rows, vals) in &cols {
                    let dst = &mut chunk[delta * rest..(delta + 1) * rest];
                    for (&beta, &val) in rows.iter().zip(vals) {
                        let s = (a * n + beta) * rest;
                        crate::sparse::axpy(val, &v.data[s..s + rest], dst);
                    }
                }
            });
        }
        Ok(out)
    }
}

/// Exponent `p` with `n^p = len`.
pub(crate) fn log_n(len: usize, n: usize) -> Result<u32> {
    let mut p = 0;
    let mut cur = 1usize;
    while cur < len {
        cur = cur.saturating_mul(n);
        p += 1;
        if n == 1 {
            break;
        }
    }
    if cur != len {
        return Err(Error::DimensionMismatch(format!("{len} is not a power of {n}")));
    }
    Ok(p)
}
