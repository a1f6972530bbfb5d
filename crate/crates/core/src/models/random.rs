//! Seeded random polynomial systems with Hurwitz linear part.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::schur;
use crate::sparse::SparseColumns;
use crate::system::PolynomialSystem;

/// `A = R − (margin + α(R)) I` with `α` the spectral abscissa, so the rightmost
/// eigenvalue of `A` sits at `−margin`; `B`, `C` and every `F_p`, `G_p`, `H_p`
/// (`p ≤ ell`) have i.i.d. entries uniform on `[−1, 1]`, the latter scaled by `n^{−p}`.
pub fn random_system(n: usize, m: usize, p_out: usize, ell: usize, seed: u64, stability_margin: f64) -> PolynomialSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |rows: usize, cols: usize, scale: f64| -> Vec<f64> {
        (0..rows * cols).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
    };
    let r = DMatrix::from_row_slice(n, n, &uniform(n, n, 1.0));
    let abscissa = schur::eigenvalues(&r)
        .expect("Schur of a finite matrix")
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let a = r - DMatrix::identity(n, n) * (stability_margin + abscissa);
    let b = DMatrix::from_row_slice(n, m, &uniform(n, m, 1.0));
    let c = DMatrix::from_row_slice(p_out, n, &uniform(p_out, n, 1.0));
    let mut sys = PolynomialSystem::linear(a, b, c).expect("shapes").with_ell(ell);
    for p in 1..=ell {
        let np = n.pow(p as u32);
        let scale = 1.0 / np as f64;
        if p >= 2 {
            let f = SparseColumns::from_row_major(n, np, &uniform(n, np, scale)).expect("F");
            sys.set_f(p, f).expect("F shape");
        }
        let g = SparseColumns::from_row_major(n, m * np, &uniform(n, m * np, scale)).expect("G");
        sys.set_g(p, g).expect("G shape");
        if p >= 2 {
            let h = SparseColumns::from_row_major(p_out, np, &uniform(p_out, np, scale)).expect("H");
            sys.set_h(p, h).expect("H shape");
        }
    }
    sys
}
