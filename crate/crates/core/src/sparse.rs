//! Column-compressed storage for the polynomial system matrices.
//!
//! `F_p`, `G_p` and `H_p` have up to `m·n^p` columns, most of them empty for
//! finite-element models, so only the nonzero columns are stored.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumns {
    rows: usize,
    cols: usize,
    col_ids: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseColumns {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseColumns {
            rows,
            cols,
            col_ids: Vec::new(),
            col_ptr: vec![0],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and exact
    /// zeros dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, v) in &t {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({r}, {c})")));
            }
        }
        t.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut out = SparseColumns::zeros(rows, cols);
        let mut i = 0;
        while i < t.len() {
            let (r, c, mut v) = t[i];
            i += 1;
            while i < t.len() && t[i].0 == r && t[i].1 == c {
                v += t[i].2;
                i += 1;
            }
            if v == 0.0 {
                continue;
            }
            if out.col_ids.last() != Some(&c) {
                if !out.col_ids.is_empty() {
                    out.col_ptr.push(out.row_idx.len());
                }
                out.col_ids.push(c);
            }
            out.row_idx.push(r);
            out.values.push(v);
        }
        if !out.col_ids.is_empty() {
            out.col_ptr.push(out.row_idx.len());
        }
        Ok(out)
    }

    /// Builds from a dense row-major array.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let trip = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c, data[r * cols + c])));
        Self::from_triplets(rows, cols, trip)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let trip = (0..m.ncols()).flat_map(|c| (0..m.nrows()).map(move |r| (r, c, m[(r, c)])));
        Self::from_triplets(m.nrows(), m.ncols(), trip).expect("in-range entries")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonzero columns in ascending order as `(col, row indices, values)`.
    pub fn columns(&self) -> impl Iterator<Item = (usize, &[usize], &[f64])> + '_ {
        self.col_ids.iter().enumerate().map(move |(s, &c)| {
            let (a, b) = (self.col_ptr[s], self.col_ptr[s + 1]);
            (c, &self.row_idx[a..b], &self.values[a..b])
        })
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.columns()
            .flat_map(|(c, r, v)| r.iter().zip(v).map(move |(&r, &v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match self.col_ids.binary_search(&c) {
            Ok(s) => {
                let (a, b) = (self.col_ptr[s], self.col_ptr[s + 1]);
                match self.row_idx[a..b].binary_search(&r) {
                    Ok(t) => self.values[a + t],
                    Err(_) => 0.0,
                }
            }
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec length");
        let mut y = vec![0.0; self.rows];
        for (c, rows, vals) in self.columns() {
            let xc = x[c];
            if xc == 0.0 {
                continue;
            }
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xc;
            }
        }
        y
    }

    /// Row-sparse `Mᵀ W` where `W` is row-major `rows × width`.
    pub fn transpose_mul(&self, w: &[f64], width: usize) -> RowSparse {
        assert_eq!(w.len(), self.rows * width, "transpose_mul length");
        let cols: Vec<(usize, &[usize], &[f64])> = self.columns().collect();
        let data = crate::par::map_collect(cols.len(), |s| {
            let (_, rows, vals) = cols[s];
            let mut acc = vec![0.0; width];
            for (&r, &v) in rows.iter().zip(vals) {
                axpy(v, &w[r * width..(r + 1) * width], &mut acc);
            }
            acc
        });
        RowSparse {
            width,
            rows: cols.iter().map(|c| c.0).zip(data).collect(),
        }
    }

    /// Dense `Mᵀ W` written into `out` (row-major `cols × width`, overwritten).
    pub fn transpose_mul_dense(&self, w: &[f64], width: usize, out: &mut [f64]) {
        assert_eq!(w.len(), self.rows * width, "transpose_mul_dense input length");
        assert_eq!(out.len(), self.cols * width, "transpose_mul_dense output length");
        out.iter_mut().for_each(|o| *o = 0.0);
        let cols: Vec<(usize, &[usize], &[f64])> = self.columns().collect();
        let mut slots: Vec<&mut [f64]> = Vec::with_capacity(cols.len());
        let mut rest = out;
        let mut offset = 0;
        for &(c, _, _) in &cols {
            let (_, tail) = rest.split_at_mut((c - offset) * width);
            let (row, tail) = tail.split_at_mut(width);
            slots.push(row);
            rest = tail;
            offset = c + 1;
        }
        crate::par::for_each_chunk(&mut slots, 1, |s, slot| {
            let (_, rows, vals) = cols[s];
            for (&r, &v) in rows.iter().zip(vals) {
                axpy(v, &w[r * width..(r + 1) * width], &mut slot[0]);
            }
        });
    }
}

/// A matrix stored as its nonzero rows, each dense.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSparse {
    pub width: usize,
    pub rows: Vec<(usize, Vec<f64>)>,
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
