//! Polynomial control-affine systems
//! `ẋ = Ax + Σ F_p x^{⊗p} + (B + Σ G_p (x^{⊗p} ⊗ I_m)) u`, `y = Cx + Σ H_p x^{⊗p}`.

use std::borrow::Cow;
use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sparse::SparseColumns;

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSystem {
    pub n: usize,
    pub m: usize,
    pub p_out: usize,
    pub ell: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    f: BTreeMap<usize, SparseColumns>,
    g: BTreeMap<usize, SparseColumns>,
    h: BTreeMap<usize, SparseColumns>,
    are_coordinates: Option<DMatrix<f64>>,
}

impl PolynomialSystem {
    /// Linear system with `ℓ = 1`.
    pub fn linear(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() || b.nrows() != n || c.ncols() != n {
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
        Ok(PolynomialSystem {
            n,
            m: b.ncols(),
            p_out: c.nrows(),
            ell: 1,
            a,
            b,
            c,
            f: BTreeMap::new(),
            g: BTreeMap::new(),
            h: BTreeMap::new(),
            are_coordinates: None,
        })
    }

    /// Raises the declared degree without adding terms.
    pub fn with_ell(mut self, ell: usize) -> Self {
        self.ell = self.ell.max(ell);
        self
    }

    pub fn set_f(&mut self, p: usize, f: SparseColumns) -> Result<()> {
        if p < 2 {
            return Err(Error::InvalidArgument(format!("F_{p}: drift terms start at degree 2")));
        }
        self.check(&f, self.n, 1, p, "F")?;
        self.ell = self.ell.max(p);
        self.f.insert(p, f);
        Ok(())
    }

    pub fn set_g(&mut self, p: usize, g: SparseColumns) -> Result<()> {
        if p < 1 {
            return Err(Error::InvalidArgument("G_0 is B".into()));
        }
        self.check(&g, self.n, self.m, p, "G")?;
        self.ell = self.ell.max(p);
        self.g.insert(p, g);
        Ok(())
    }

    pub fn set_h(&mut self, p: usize, h: SparseColumns) -> Result<()> {
        if p < 2 {
            return Err(Error::InvalidArgument("H_1 is C".into()));
        }
        self.check(&h, self.p_out, 1, p, "H")?;
        self.ell = self.ell.max(p);
        self.h.insert(p, h);
        Ok(())
    }

    fn check(&self, mat: &SparseColumns, rows: usize, width: usize, p: usize, name: &str) -> Result<()> {
        let cols = (self.n as u64)
            .checked_pow(p as u32)
            .and_then(|c| c.checked_mul(width as u64))
            .ok_or_else(|| Error::InvalidArgument(format!("{name}_{p} is too large")))?;
        if mat.rows() != rows || mat.cols() as u64 != cols {
            return Err(Error::DimensionMismatch(format!(
                "{name}_{p} must be {rows}x{cols}, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(())
    }

    /// Invertible `T` such that the Riccati equation is solved for the
    /// state `z = Tx`. Only the quadratic coefficient is affected; it is
    /// mapped back as `TᵀX_zT`.
    pub fn set_are_coordinates(&mut self, t: DMatrix<f64>) -> Result<()> {
        if t.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch(format!(
                "coordinate map {}x{}, expected {}x{}",
                t.nrows(),
                t.ncols(),
                self.n,
                self.n
            )));
        }
        self.are_coordinates = Some(t);
        Ok(())
    }

    pub fn are_coordinates(&self) -> Option<&DMatrix<f64>> {
        self.are_coordinates.as_ref()
    }

    pub fn f(&self, p: usize) -> Option<&SparseColumns> {
        self.f.get(&p)
    }

    /// `G_p`, with `G_0 = B`.
    pub fn g(&self, p: usize) -> Option<Cow<'_, SparseColumns>> {
        if p == 0 {
            Some(Cow::Owned(SparseColumns::from_dmatrix(&self.b)))
        } else {
            self.g.get(&p).map(Cow::Borrowed)
        }
    }

    /// `H_p`, with `H_1 = C`.
    pub fn h(&self, p: usize) -> Option<Cow<'_, SparseColumns>> {
        if p == 1 {
            Some(Cow::Owned(SparseColumns::from_dmatrix(&self.c)))
        } else {
            self.h.get(&p).map(Cow::Borrowed)
        }
    }

    pub fn f_terms(&self) -> impl Iterator<Item = (usize, &SparseColumns)> {
        self.f.iter().map(|(&p, m)| (p, m))
    }

    pub fn g_terms(&self) -> impl Iterator<Item = (usize, &SparseColumns)> {
        self.g.iter().map(|(&p, m)| (p, m))
    }

    pub fn h_terms(&self) -> impl Iterator<Item = (usize, &SparseColumns)> {
        self.h.iter().map(|(&p, m)| (p, m))
    }

    /// True when there are no terms beyond `A`, `B`, `C`.
    pub fn is_linear(&self) -> bool {
        self.f.values().chain(self.g.values()).chain(self.h.values()).all(SparseColumns::is_zero)
    }

    /// Drops `F`, `G` and `H`.
    pub fn linearized(&self) -> Self {
        PolynomialSystem {
            f: BTreeMap::new(),
            g: BTreeMap::new(),
            h: BTreeMap::new(),
            ell: 1,
            ..self.clone()
        }
    }

    /// Drift `f(x)`.
    pub fn eval_f(&self, x: &[f64]) -> Vec<f64> {
        let mut out = mat_vec(&self.a, x);
        for (&p, mat) in &self.f {
            accumulate_poly(mat, x, p, 1, |row, _, v| out[row] += v);
        }
        out
    }

    /// Input matrix `g(x)`, `n × m`.
    pub fn eval_g(&self, x: &[f64]) -> DMatrix<f64> {
        let mut out = self.b.clone();
        for (&p, mat) in &self.g {
            accumulate_poly(mat, x, p, self.m, |row, r, v| out[(row, r)] += v);
        }
        out
    }

    /// Output `h(x)`.
    pub fn eval_h(&self, x: &[f64]) -> Vec<f64> {
        let mut out = mat_vec(&self.c, x);
        for (&p, mat) in &self.h {
            accumulate_poly(mat, x, p, 1, |row, _, v| out[row] += v);
        }
        out
    }
}

fn mat_vec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len(), "state dimension");
    (a * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
}

/// Visits `(row, input index, value)` of `M (x^{⊗p} ⊗ I_width)` column by
/// column, evaluating each monomial from its multi-index.
fn accumulate_poly<F: FnMut(usize, usize, f64)>(m: &SparseColumns, x: &[f64], p: usize, width: usize, mut add: F) {
    let n = x.len();
    for (col, rows, vals) in m.columns() {
        let (mut a, r) = (col / width, col % width);
        let mut mono = 1.0;
        for _ in 0..p {
            mono *= x[a % n];
            a /= n;
        }
        if mono == 0.0 {
            continue;
        }
        for (&row, &v) in rows.iter().zip(vals) {
            add(row, r, v * mono);
        }
    }
}
