//! Text model format: JSON with header dimensions, dense `A`, `B`, `C` and
//! optional higher-degree terms keyed `F2..Fℓ`, `G1..Gℓ`, `H2..Hℓ`.
//!
//! Every matrix may be written as nested rows, a flat row-major array, or
//! `{"sparse": [[row, col, value], ...]}`. Absent keys mean zero.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use hinf_energy::{PolynomialSystem, SparseColumns};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Sparse { sparse: Vec<(usize, usize, f64)> },
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    pub m: usize,
    pub p_out: usize,
    pub ell: usize,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    #[serde(rename = "B")]
    pub b: MatrixSpec,
    #[serde(rename = "C")]
    pub c: MatrixSpec,
    /// Similarity used for the Riccati stage, see
    /// [`PolynomialSystem::set_are_coordinates`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub are_coordinates: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
    #[serde(flatten)]
    pub terms: BTreeMap<String, MatrixSpec>,
}

impl MatrixSpec {
    fn to_dense(&self, rows: usize, cols: usize, what: &str) -> CliResult<DMatrix<f64>> {
        match self {
            MatrixSpec::Rows(r) => {
                if r.len() != rows || r.iter().any(|row| row.len() != cols) {
                    return Err(CliError::parse(format!("{what}: expected {rows}x{cols} rows")));
                }
                Ok(DMatrix::from_fn(rows, cols, |i, j| r[i][j]))
            }
            MatrixSpec::Flat(v) => {
                if v.len() != rows * cols {
                    return Err(CliError::parse(format!("{what}: expected {} entries, got {}", rows * cols, v.len())));
                }
                Ok(DMatrix::from_row_slice(rows, cols, v))
            }
            MatrixSpec::Sparse { .. } => Ok(self.to_sparse(rows, cols, what)?.to_dense()),
        }
    }

    fn to_sparse(&self, rows: usize, cols: usize, what: &str) -> CliResult<SparseColumns> {
        let bad = |e: hinf_energy::Error| CliError::parse(format!("{what}: {e}"));
        match self {
            MatrixSpec::Sparse { sparse } => {
                SparseColumns::from_triplets(rows, cols, sparse.iter().copied()).map_err(bad)
            }
            dense => Ok(SparseColumns::from_dmatrix(&dense.to_dense(rows, cols, what)?)),
        }
    }

    fn rows_of(m: &DMatrix<f64>) -> Self {
        MatrixSpec::Rows(m.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    fn sparse_of(m: &SparseColumns) -> Self {
        let mut sparse: Vec<_> = m.triplets().collect();
        sparse.sort_by_key(|&(r, c, _)| (r, c));
        MatrixSpec::Sparse { sparse }
    }
}

impl ModelFile {
    pub fn from_system(sys: &PolynomialSystem, metadata: Option<Metadata>) -> Self {
        let mut terms = BTreeMap::new();
        for (p, f) in sys.f_terms() {
            terms.insert(format!("F{p}"), MatrixSpec::sparse_of(f));
        }
        for (p, g) in sys.g_terms() {
            terms.insert(format!("G{p}"), MatrixSpec::sparse_of(g));
        }
        for (p, h) in sys.h_terms() {
            terms.insert(format!("H{p}"), MatrixSpec::sparse_of(h));
        }
        ModelFile {
            n: sys.n,
            m: sys.m,
            p_out: sys.p_out,
            ell: sys.ell,
            a: MatrixSpec::rows_of(&sys.a),
            b: MatrixSpec::rows_of(&sys.b),
            c: MatrixSpec::rows_of(&sys.c),
            are_coordinates: sys.are_coordinates().map(MatrixSpec::rows_of),
            metadata,
            terms,
        }
    }

    pub fn to_system(&self) -> CliResult<PolynomialSystem> {
        let (n, m, p_out) = (self.n, self.m, self.p_out);
        if n == 0 || m == 0 || p_out == 0 || self.ell == 0 {
            return Err(CliError::parse("n, m, p_out and ell must be positive"));
        }
        let a = self.a.to_dense(n, n, "A")?;
        let b = self.b.to_dense(n, m, "B")?;
        let c = self.c.to_dense(p_out, n, "C")?;
        let mut sys = PolynomialSystem::linear(a, b, c)?.with_ell(self.ell);
        if let Some(t) = &self.are_coordinates {
            sys.set_are_coordinates(t.to_dense(n, n, "are_coordinates")?)?;
        }
        for (key, matrix) in &self.terms {
            let (family, p) = parse_term_key(key)?;
            let lowest = if family == 'G' { 1 } else { 2 };
            if p < lowest || p > self.ell {
                return Err(CliError::parse(format!("{key}: degree outside {lowest}..={}", self.ell)));
            }
            let np = checked_pow(n, p, key)?;
            match family {
                'F' => sys.set_f(p, matrix.to_sparse(n, np, key)?)?,
                'G' => sys.set_g(p, matrix.to_sparse(n, m * np, key)?)?,
                _ => sys.set_h(p, matrix.to_sparse(p_out, np, key)?)?,
            }
        }
        Ok(sys)
    }
}

fn parse_term_key(key: &str) -> CliResult<(char, usize)> {
    let mut chars = key.chars();
    let family = chars.next().filter(|c| matches!(c, 'F' | 'G' | 'H'));
    match (family, chars.as_str().parse::<usize>()) {
        (Some(f), Ok(p)) => Ok((f, p)),
        _ => Err(CliError::parse(format!("unknown key {key:?}"))),
    }
}

fn checked_pow(n: usize, p: usize, what: &str) -> CliResult<usize> {
    u32::try_from(p)
        .ok()
        .and_then(|p| n.checked_pow(p))
        .ok_or_else(|| CliError::parse(format!("{what}: n^{p} overflows")))
}

pub fn read_model(path: &Path) -> CliResult<PolynomialSystem> {
    let file = File::open(path)?;
    let model: ModelFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    model.to_system()
}

pub fn write_model(path: &Path, model: &ModelFile) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, model).map_err(|e| CliError::Io(e.into()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hinf_energy::models;

    #[test]
    fn systems_survive_a_json_round_trip() {
        for sys in [models::example2_system(), models::random_system(3, 2, 2, 3, 5, 0.5)] {
            let text = serde_json::to_string(&ModelFile::from_system(&sys, None)).unwrap();
            let back: ModelFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_system().unwrap(), sys);
        }
    }

    #[test]
    fn accepts_all_matrix_layouts() {
        let text = r#"{"n": 2, "m": 1, "p_out": 1, "ell": 2,
            "A": [[-1, 0], [0, -2]], "B": [0, 1], "C": {"sparse": [[0, 0, 1.0]]},
            "F2": {"sparse": [[1, 3, 0.5]]}}"#;
        let sys: ModelFile = serde_json::from_str(text).unwrap();
        let sys = sys.to_system().unwrap();
        assert_eq!(sys.a[(1, 1)], -2.0);
        assert_eq!(sys.b[(1, 0)], 1.0);
        assert_eq!(sys.f(2).unwrap().get(1, 3), 0.5);
    }

    #[test]
    fn rejects_bad_shapes_and_keys() {
        let base = r#""n": 2, "m": 1, "p_out": 1, "ell": 2, "B": [0, 1], "C": [1, 0]"#;
        for extra in [
            r#""A": [[1, 0]]"#,
            r#""A": [1, 0, 0, 1], "F1": [1, 0, 0, 1]"#,
            r#""A": [1, 0, 0, 1], "F3": {"sparse": []}"#,
            r#""A": [1, 0, 0, 1], "X2": [1]"#,
            r#""A": [1, 0, 0, 1], "G1": {"sparse": [[0, 9, 1.0]]}"#,
        ] {
            let model: ModelFile = serde_json::from_str(&format!("{{{base}, {extra}}}")).unwrap();
            assert!(matches!(model.to_system(), Err(CliError::Parse(_))), "{extra}");
        }
    }
}
