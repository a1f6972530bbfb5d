mod common;

use common::*;
use hinf_energy::kron::{kron_pow, lyap_transpose_apply, shuffle_apply, symmetrize, CoeffVector, KronPermutation, PermBlock};
use hinf_energy::SparseColumns;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn shuffle_matches_dense_permutation_matrix() {
    for (q, p) in [(3, 2), (2, 3), (4, 1), (3, 5)] {
        let v: Vec<f64> = (0..p * q).map(|i| i as f64).collect();
        let dense = shuffle_matrix(q, p) * nalgebra::DVector::from_column_slice(&v);
        assert_eq!(shuffle_apply(q, p, &v).unwrap(), dense.as_slice());
        // vec(A) -> vec(Aᵀ)
        let a = DMatrix::from_column_slice(p, q, &v);
        assert_eq!(shuffle_apply(q, p, &v).unwrap(), a.transpose().as_slice());
    }
}

#[test]
fn kron_permutation_matches_dense_kronecker() {
    let mut r = rng(1);
    let cases: Vec<Vec<PermBlock>> = vec![
        vec![PermBlock::Identity(2), PermBlock::Shuffle { q: 2, p: 2 }],
        vec![PermBlock::Shuffle { q: 2, p: 3 }, PermBlock::Identity(2)],
        vec![PermBlock::Identity(2), PermBlock::Shuffle { q: 3, p: 2 }, PermBlock::Identity(2)],
        vec![PermBlock::Shuffle { q: 2, p: 2 }, PermBlock::Shuffle { q: 3, p: 1 }, PermBlock::Shuffle { q: 2, p: 2 }],
        vec![PermBlock::Shuffle { q: 2, p: 2 }, PermBlock::Identity(3), PermBlock::Shuffle { q: 1, p: 2 }],
    ];
    for blocks in cases {
        let mut dense = DMatrix::<f64>::identity(1, 1);
        for b in &blocks {
            let f = match *b {
                PermBlock::Identity(m) => eye(m),
                PermBlock::Shuffle { q, p } => shuffle_matrix(q, p),
            };
            dense = dense.kronecker(&f);
        }
        let perm = KronPermutation::new(blocks.clone());
        let v = random_vec(&mut r, perm.dim());
        let expect = &dense * nalgebra::DVector::from_column_slice(&v);
        assert_eq!(perm.apply(&v).unwrap(), expect.as_slice(), "{blocks:?}");
        assert_eq!(perm.inverse().apply(&perm.apply(&v).unwrap()).unwrap(), v);
    }
    let id = KronPermutation::new(vec![PermBlock::Identity(5)]);
    let v = random_vec(&mut r, 5);
    assert_eq!(id.apply(&v).unwrap(), v);
    assert!(id.apply(&v[..4]).is_err());
}

/// Brute-force average over all `k!` orderings of the indices.
fn permutation_average(v: &[f64], n: usize, k: usize) -> Vec<f64> {
    fn perms(k: usize) -> Vec<Vec<usize>> {
        if k == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in perms(k - 1) {
            for pos in 0..k {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let all = perms(k);
    let len = n.pow(k as u32);
    let mut out = vec![0.0; len];
    for idx in 0..len {
        let digits: Vec<usize> = (0..k).rev().map(|d| (idx / n.pow(d as u32)) % n).collect();
        let mut s = 0.0;
        for p in &all {
            let src = p.iter().fold(0, |acc, &d| acc * n + digits[d]);
            s += v[src];
        }
        out[idx] = s / all.len() as f64;
    }
    out
}

#[test]
fn symmetrize_matches_permutation_average() {
    let mut r = rng(2);
    for (n, k) in [(3usize, 3usize), (2, 4), (4, 2), (2, 5)] {
        let v = random_vec(&mut r, n.pow(k as u32));
        let s = symmetrize(&CoeffVector::new(n, k, v.clone()).unwrap());
        assert!(rel_err(&s.data, &permutation_average(&v, n, k)) < 1e-14);
        assert!(s.check_shuffle_invariance());
    }
}

#[test]
fn lyap_transpose_matches_dense_kronecker_sum() {
    let mut r = rng(3);
    for n in 1..=3usize {
        for p in 1..=2usize {
            for i in 1..=4usize {
                let f = random_mat(&mut r, n, n.pow(p as u32));
                let raw = random_vec(&mut r, n.pow(i as u32));
                let dense = dense_lyap(&f, i).transpose();
                let fs = SparseColumns::from_dmatrix(&f);
                for symmetric in [false, true] {
                    let v = if symmetric {
                        symmetrize(&CoeffVector::new(n, i, raw.clone()).unwrap())
                    } else {
                        CoeffVector::new(n, i, raw.clone()).unwrap()
                    };
                    let expect = &dense * nalgebra::DVector::from_column_slice(&v.data);
                    let got = lyap_transpose_apply(&fs, &v).unwrap();
                    assert!(rel_err(&got, expect.as_slice()) <= 1e-12, "n={n} p={p} i={i} sym={symmetric}");
                }
            }
        }
    }
}

#[test]
fn lyap_rejects_bad_shapes() {
    let f = SparseColumns::zeros(2, 3);
    let v = CoeffVector::new(2, 2, vec![0.0; 4]).unwrap();
    assert!(lyap_transpose_apply(&f, &v).is_err());
    let g = SparseColumns::zeros(3, 9);
    assert!(lyap_transpose_apply(&g, &v).is_err());
}

proptest! {
    #[test]
    fn shuffle_is_orthogonal(q in 1usize..7, p in 1usize..7, seed in any::<u64>()) {
        let v = random_vec(&mut rng(seed), p * q);
        let back = shuffle_apply(p, q, &shuffle_apply(q, p, &v).unwrap()).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn symmetrize_is_idempotent_and_shuffle_invariant(n in 1usize..4, k in 1usize..5, seed in any::<u64>()) {
        let v = CoeffVector::new(n, k, random_vec(&mut rng(seed), n.pow(k as u32))).unwrap();
        let s = symmetrize(&v);
        prop_assert_eq!(&symmetrize(&s).data, &s.data);
        for i in 1..k {
            let j = k - i;
            let t = shuffle_apply(n.pow(j as u32), n.pow(i as u32), &s.data).unwrap();
            prop_assert_eq!(&t, &s.data);
        }
    }

    #[test]
    fn symmetrize_preserves_monomial_values(n in 1usize..4, k in 1usize..5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = CoeffVector::new(n, k, random_vec(&mut r, n.pow(k as u32))).unwrap();
        let s = symmetrize(&v);
        for _ in 0..4 {
            let x = random_vec(&mut r, n);
            let a = v.contract(&x);
            let b = s.contract(&x);
            let scale: f64 = v.data.iter().map(|c| c.abs()).sum::<f64>()
                * x.iter().map(|c| c.abs()).fold(0.0, f64::max).powi(k as i32);
            prop_assert!((a - b).abs() <= 1e-13 * scale.max(1e-300));
        }
    }

    #[test]
    fn kron_power_is_shuffle_invariant(n in 1usize..4, k in 1usize..6, seed in any::<u64>()) {
        let x = random_vec(&mut rng(seed), n);
        // Products taken in different orders round differently, so compare to
        // a few ulps rather than bitwise.
        let p = kron_pow(&x, k).unwrap();
        for i in 1..k {
            let t = shuffle_apply(n.pow((k - i) as u32), n.pow(i as u32), &p.data).unwrap();
            prop_assert!(rel_err(&t, &p.data) <= 1e-15);
        }
        prop_assert!(rel_err(&symmetrize(&p).data, &p.data) <= 1e-15);
    }

    #[test]
    fn matricize_round_trips(n in 1usize..4, k in 1usize..5, seed in any::<u64>()) {
        let v = CoeffVector::new(n, k, random_vec(&mut rng(seed), n.pow(k as u32))).unwrap();
        let m = hinf_energy::matricize(&v);
        prop_assert_eq!(m.nrows(), n);
        prop_assert_eq!(m.as_slice(), v.data.as_slice());
    }
}
