#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 { num } else { num / den }
}

/// Dense `S_{q×p}`: maps vec of a `p×q` matrix to vec of its transpose.
pub fn shuffle_matrix(q: usize, p: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(p * q, p * q);
    for i in 0..p {
        for j in 0..q {
            s[(i * q + j, j * p + i)] = 1.0;
        }
    }
    s
}

pub fn eye(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

/// `vec` of a matrix as a column.
pub fn vec_col(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.len(), 1, m.as_slice())
}

/// Dense `ℒ_k(F) = Σ_pos I ⊗ … ⊗ F ⊗ … ⊗ I` for `F` of size `n × n^p`.
pub fn dense_lyap(f: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = f.nrows();
    let mut out: Option<DMatrix<f64>> = None;
    for pos in 0..k {
        let left = eye(n.pow(pos as u32));
        let right = eye(n.pow((k - 1 - pos) as u32));
        let term = left.kronecker(f).kronecker(&right);
        out = Some(match out {
            None => term,
            Some(o) => o + term,
        });
    }
    out.unwrap()
}
