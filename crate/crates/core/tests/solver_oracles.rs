mod common;

use common::*;
use hinf_energy::solvers::kway::dense_kway_operator;
use hinf_energy::solvers::{solve_are_future, solve_are_in, solve_are_past, EnergyKind, KwaySolver};
use hinf_energy::{dense_kway_solve, models, schur, solve_kway, Error};
use nalgebra::{DMatrix, DVector};

fn hurwitz(r: &mut rand_chacha::ChaCha8Rng, n: usize, margin: f64) -> DMatrix<f64> {
    let m = random_mat(r, n, n);
    let top = schur::eigenvalues(&m).unwrap().iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    m - DMatrix::identity(n, n) * (top + margin)
}

/// Plain dense solve of `A X + X Aᵀ + Q = 0` through the `n² × n²` Kronecker form.
fn dense_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let op = eye(n).kronecker(a) + a.kronecker(&eye(n));
    let rhs = -DVector::from_column_slice(q.as_slice());
    let x = op.lu().solve(&rhs).unwrap();
    DMatrix::from_column_slice(n, n, x.as_slice())
}

#[test]
fn kway_matches_dense_and_plain_solve() {
    let mut r = rng(10);
    for n in 1..=4usize {
        let m = hurwitz(&mut r, n, 0.5);
        // k = 1 is an ordinary transposed solve.
        let b = random_vec(&mut r, n);
        let plain = m.transpose().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        let x1 = solve_kway(&m, 1, &b).unwrap();
        assert!(rel_err(&x1, plain.as_slice()) < 1e-12);
        assert!(rel_err(&dense_kway_solve(&m, 1, &b).unwrap(), plain.as_slice()) < 1e-12);
        for k in 1..=4usize {
            let b = random_vec(&mut r, n.pow(k as u32));
            let x = solve_kway(&m, k, &b).unwrap();
            let xd = dense_kway_solve(&m, k, &b).unwrap();
            assert!(rel_err(&x, &xd) < 1e-10, "n={n} k={k}");
            // Residual against the operator built in this file.
            let op = dense_lyap(&m, k).transpose();
            let res = &op * DVector::from_column_slice(&x);
            assert!(rel_err(res.as_slice(), &b) < 1e-10);
            assert_eq!(dense_kway_operator(&m, k).unwrap(), dense_lyap(&m, k).transpose());
        }
    }
}

#[test]
fn kway_handles_complex_spectra_and_reuse() {
    // Rotation plus damping: complex conjugate eigenvalues.
    let m = DMatrix::from_row_slice(3, 3, &[-0.3, 2.0, 0.0, -2.0, -0.3, 0.0, 0.1, 0.0, -1.0]);
    let solver = KwaySolver::new(&m).unwrap();
    assert_eq!(solver.dim(), 3);
    let mut r = rng(11);
    for k in 1..=5 {
        let b = random_vec(&mut r, 3usize.pow(k as u32));
        let x = solver.solve(k, &b).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
        let op = dense_lyap(&m, k).transpose();
        let res = &op * DVector::from_column_slice(&x);
        assert!(rel_err(res.as_slice(), &b) < 1e-10, "k={k}");
    }
    assert!((solver.min_eigen_sum(2) - 0.6).abs() < 1e-12);
}

#[test]
fn kway_flags_singular_sums() {
    // Eigenvalues 1 and −1: λ₁ + λ₂ = 0 at k = 2 but not at k = 1 or 3.
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, -1.0]);
    assert!(solve_kway(&m, 1, &[1.0, 1.0]).is_ok());
    assert!(matches!(solve_kway(&m, 2, &[1.0; 4]), Err(Error::NearSingular { .. })));
    assert!(solve_kway(&m, 3, &[1.0; 8]).is_ok());
    assert!(matches!(dense_kway_solve(&m, 2, &[1.0; 4]), Err(Error::NearSingular { .. })));
    assert!(matches!(solve_kway(&m, 2, &[1.0; 3]), Err(Error::DimensionMismatch(_))));
}

#[test]
fn larger_kway_solve_has_small_residual() {
    let mut r = rng(12);
    let n = 30;
    let m = hurwitz(&mut r, n, 0.2);
    let b = random_vec(&mut r, n * n * n);
    let x = solve_kway(&m, 3, &b).unwrap();
    // Apply ℒ₃(M)ᵀ by mode products.
    let mut res = vec![0.0; b.len()];
    let mt = m.transpose();
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let mut s = 0.0;
                for t in 0..n {
                    s += mt[(i1, t)] * x[(t * n + i2) * n + i3]
                        + mt[(i2, t)] * x[(i1 * n + t) * n + i3]
                        + mt[(i3, t)] * x[(i1 * n + i2) * n + t];
                }
                res[(i1 * n + i2) * n + i3] = s;
            }
        }
    }
    assert!(rel_err(&res, &b) < 1e-10);
}

fn check_are_past(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, eta: f64) {
    let s = solve_are_past(a, b, c, eta).unwrap();
    let v = &s.x;
    let res = a.transpose() * v + v * a - c.transpose() * c * eta + v * b * b.transpose() * v;
    assert!(res.norm() <= 1e-10 * (1.0 + v.norm().powi(2)), "past residual {}", res.norm());
    assert!((v - v.transpose()).norm() == 0.0);
    let acl = a + b * b.transpose() * v;
    assert!((&acl - &s.closed_loop).norm() < 1e-12 * (1.0 + acl.norm()));
    // −(A + BBᵀV) is Hurwitz, so A + BBᵀV is anti-stable.
    assert!(schur::eigenvalues(&acl).unwrap().iter().all(|e| e.re > 0.0));
    let min_eig = v.clone().symmetric_eigenvalues().min();
    assert!(min_eig >= -1e-8 * v.norm());
}

fn check_are_future(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, eta: f64) {
    let s = solve_are_future(a, b, c, eta).unwrap();
    let w = &s.x;
    let res = a.transpose() * w + w * a + c.transpose() * c - w * b * b.transpose() * w * eta;
    assert!(res.norm() <= 1e-10 * (1.0 + w.norm().powi(2)), "future residual {}", res.norm());
    let acl = a - b * b.transpose() * w * eta;
    assert!(schur::eigenvalues(&acl).unwrap().iter().all(|e| e.re < 0.0));
    assert!(w.clone().symmetric_eigenvalues().min() >= -1e-8 * w.norm());
}

#[test]
fn are_solutions_on_random_systems() {
    let mut r = rng(13);
    for n in [1usize, 2, 4, 8, 16] {
        let a = hurwitz(&mut r, n, 0.5);
        let b = random_mat(&mut r, n, 2);
        let c = random_mat(&mut r, 2, n);
        for eta in [0.0, 0.1, 0.5] {
            check_are_past(&a, &b, &c, eta);
            check_are_future(&a, &b, &c, eta);
        }
        // Negative η needs a small-gain system for a real solution to exist.
        let (bs, cs) = (&b * 0.2, &c * 0.2);
        check_are_past(&a, &bs, &cs, -1.0);
        check_are_future(&a, &bs, &cs, -1.0);
    }
}

#[test]
fn open_loop_limits_are_gramians() {
    let mut r = rng(14);
    let n = 5;
    let a = hurwitz(&mut r, n, 0.7);
    let b = random_mat(&mut r, n, 2);
    let c = random_mat(&mut r, 1, n);
    let wc = dense_lyapunov(&a, &(&b * b.transpose()));
    let v = solve_are_past(&a, &b, &c, 0.0).unwrap().x;
    let inv = wc.try_inverse().unwrap();
    assert!((&v - &inv).norm() < 1e-9 * inv.norm());
    let wo = dense_lyapunov(&a.transpose(), &(c.transpose() * &c));
    let w = solve_are_future(&a, &b, &c, 0.0).unwrap().x;
    assert!((&w - &wo).norm() < 1e-10 * wo.norm());
}

#[test]
fn unstabilizable_system_is_rejected() {
    // The past equation stabilizes −A, the future one A; each gets a mode the
    // input cannot reach.
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let c = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
    assert!(matches!(solve_are_past(&a, &b, &c, 0.5), Err(Error::NoStabilizingSolution(_))));
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    assert!(matches!(solve_are_future(&a, &b, &c, 0.5), Err(Error::NoStabilizingSolution(_))));
}

#[test]
fn beam_spectrum_is_on_the_imaginary_axis() {
    let p = models::BeamParams::default();
    let sys = models::beam_system(&p).unwrap();
    let ev = schur::eigenvalues(&sys.a).unwrap();
    let scale = ev.iter().map(|e| e.norm()).fold(0.0, f64::max);
    assert!(ev.iter().all(|e| e.re.abs() <= 1e-9 * scale), "{ev:?}");
    assert!(ev.iter().all(|e| e.im != 0.0));
}

#[test]
fn are_is_invariant_under_state_coordinates() {
    let mut r = rng(41);
    for n in [2, 5, 9] {
        let a = hurwitz(&mut r, n, 0.5);
        let b = random_mat(&mut r, n, 2);
        let c = random_mat(&mut r, 1, n);
        let t = random_mat(&mut r, n, n) + eye(n) * 3.0;
        for kind in [EnergyKind::Past, EnergyKind::Future] {
            let direct = hinf_energy::solvers::solve_are(kind, &a, &b, &c, 0.3).unwrap();
            let mapped = solve_are_in(kind, &a, &b, &c, 0.3, Some(&t)).unwrap();
            assert!(rel_err(mapped.x.as_slice(), direct.x.as_slice()) < 1e-9, "{kind:?} n={n}");
            assert!(rel_err(mapped.closed_loop.as_slice(), direct.closed_loop.as_slice()) < 1e-9);
        }
    }
}

#[test]
fn beam_riccati_converges_under_refinement() {
    // Quadratic energy at the same continuum state on successively finer meshes.
    let mut prev: Option<f64> = None;
    for ne in [6, 12, 24] {
        let p = models::BeamParams { beta: 1e-4, ..models::BeamParams::with_elements(ne) };
        let sys = models::beam_system(&p).unwrap();
        let sol = solve_are_in(EnergyKind::Future, &sys.a, &sys.b, &sys.c, 0.5, sys.are_coordinates()).unwrap();
        let x = DVector::from_vec(models::beam_initial_condition(&p, 0.01));
        let e = 0.5 * (x.transpose() * &sol.x * &x)[(0, 0)];
        if let Some(p) = prev {
            assert!(((e - p) / p).abs() < 1e-2, "ne={ne}: {p} -> {e}");
        }
        prev = Some(e);
    }
}
