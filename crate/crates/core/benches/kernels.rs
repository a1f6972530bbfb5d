//! Parallel versus sequential timings for the three hot kernels.
//!
//! Run with `cargo bench -p hinf-energy`. Each group measures the same input
//! twice, toggling the runtime switch in `hinf_energy::par`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hinf_energy::energy::assemble_rhs;
use hinf_energy::solvers::{solve_are_in, EnergyKind, KwaySolver};
use hinf_energy::{models, par, symmetrize, CoeffVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, bool); 2] = [("parallel", true), ("sequential", false)];

fn random(len: usize, seed: u64) -> Vec<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| r.gen_range(-1.0..1.0)).collect()
}

fn bench_kway(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_kway");
    g.sample_size(10);
    for n in [16, 32] {
        let sys = models::random_system(n, 2, 2, 3, 7, 0.5);
        let solver = KwaySolver::new(&sys.a).unwrap();
        let rhs = random(n.pow(3), 1);
        for (name, on) in MODES {
            par::set_enabled(on);
            g.bench_with_input(BenchmarkId::new(name, n), &rhs, |b, rhs| b.iter(|| solver.solve(3, rhs).unwrap()));
        }
    }
    par::set_enabled(true);
    g.finish();
}

fn bench_symmetrize(c: &mut Criterion) {
    let mut g = c.benchmark_group("symmetrize");
    g.sample_size(10);
    for (n, k) in [(24, 4), (64, 3)] {
        let v = CoeffVector::new(n, k, random(n.pow(k as u32), 2)).unwrap();
        for (name, on) in MODES {
            par::set_enabled(on);
            g.bench_with_input(BenchmarkId::new(name, format!("n{n}k{k}")), &v, |b, v| b.iter(|| symmetrize(v)));
        }
    }
    par::set_enabled(true);
    g.finish();
}

fn bench_rhs(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_rhs");
    g.sample_size(10);
    let p = models::BeamParams { beta: 1e-4, ..models::BeamParams::with_elements(4) };
    let sys = models::beam_system(&p).unwrap();
    let n = sys.n;
    let are = solve_are_in(EnergyKind::Future, &sys.a, &sys.b, &sys.c, 0.5, sys.are_coordinates()).unwrap();
    let v2 = symmetrize(&CoeffVector::new(n, 2, are.x.as_slice().to_vec()).unwrap());
    let v3 = symmetrize(&CoeffVector::new(n, 3, random(n.pow(3), 3)).unwrap());
    let coeffs = [v2, v3];
    for (name, on) in MODES {
        par::set_enabled(on);
        g.bench_function(BenchmarkId::new(name, format!("beam n{n} k4")), |b| {
            b.iter(|| assemble_rhs(&sys, &coeffs, 4, EnergyKind::Future, 0.5).unwrap())
        });
    }
    par::set_enabled(true);
    g.finish();
}

criterion_group!(benches, bench_kway, bench_symmetrize, bench_rhs);
criterion_main!(benches);
