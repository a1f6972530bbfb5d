//! Cable-actuated cantilever beam with von Kármán strains.
//!
//! Two-node elements carry an axial displacement `w` (linear) and a transverse
//! deflection `v` with slope `v′` (Hermite cubic). The clamped node is removed,
//! leaving `3N` generalized coordinates `q` and the state `x = [q; q̇]`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sparse::SparseColumns;
use crate::system::PolynomialSystem;

use super::quadrature::gauss_legendre_5;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamParams {
    pub num_elements: usize,
    pub length: f64,
    /// Young's modulus.
    pub modulus: f64,
    pub density: f64,
    /// Cross-section area.
    pub area: f64,
    /// Second moment of area.
    pub inertia: f64,
    /// Lateral offset of the two cables from the neutral axis.
    pub cable_offset: f64,
    /// Rayleigh damping `D = αM + βK`.
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BeamParams {
    fn default() -> Self {
        BeamParams {
            num_elements: 3,
            length: 1.0,
            modulus: 1.0,
            density: 1.0,
            area: 1.0,
            inertia: 1.0,
            cable_offset: 0.1,
            alpha: 0.0,
            beta: 0.0,
        }
    }
}

impl BeamParams {
    pub fn with_elements(num_elements: usize) -> Self {
        BeamParams { num_elements, ..Default::default() }
    }

    pub fn state_dim(&self) -> usize {
        6 * self.num_elements
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("modulus", self.modulus),
            ("density", self.density),
            ("area", self.area),
            ("inertia", self.inertia),
        ];
        if self.num_elements == 0 {
            return Err(Error::InvalidArgument("beam needs at least one element".into()));
        }
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("beam {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("cable offset", self.cable_offset), ("alpha", self.alpha), ("beta", self.beta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("beam {name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Coefficients of a polynomial force `Σ_mono c_mono · q^mono` in `q`-space,
/// keyed by sorted monomial, then by row.
type ForcePoly = BTreeMap<Vec<usize>, BTreeMap<usize, f64>>;

fn add_force(poly: &mut ForcePoly, mono: &[Option<usize>], row: Option<usize>, v: f64) {
    let Some(row) = row else { return };
    let Some(mut key) = mono.iter().copied().collect::<Option<Vec<usize>>>() else { return };
    key.sort_unstable();
    *poly.entry(key).or_default().entry(row).or_insert(0.0) += v;
}

struct Assembly {
    nq: usize,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    f2: ForcePoly,
    f3: ForcePoly,
}

fn assemble(p: &BeamParams) -> Assembly {
    let ne = p.num_elements;
    let nq = 3 * ne;
    let h = p.length / ne as f64;
    let ea = p.modulus * p.area;
    let ei = p.modulus * p.inertia;
    let rho_a = p.density * p.area;
    let mut mass = DMatrix::zeros(nq, nq);
    let mut stiffness = DMatrix::zeros(nq, nq);
    let mut f2 = ForcePoly::new();
    let mut f3 = ForcePoly::new();
    let rule = gauss_legendre_5();

    for e in 0..ne {
        // Global indices of the local dofs [w1, v1, θ1, w2, v2, θ2].
        let dof = |local: usize| -> Option<usize> {
            let node = e + local / 3;
            (node > 0).then(|| 3 * (node - 1) + local % 3)
        };
        let wd = [dof(0), dof(3)];
        let vd = [dof(1), dof(2), dof(4), dof(5)];
        for &(xi, wq) in &rule {
            let jw = wq * h;
            let psi = [1.0 - xi, xi];
            let dpsi = [-1.0 / h, 1.0 / h];
            let phi = [
                1.0 - 3.0 * xi * xi + 2.0 * xi.powi(3),
                h * (xi - 2.0 * xi * xi + xi.powi(3)),
                3.0 * xi * xi - 2.0 * xi.powi(3),
                h * (-xi * xi + xi.powi(3)),
            ];
            let dphi = [
                (-6.0 * xi + 6.0 * xi * xi) / h,
                1.0 - 4.0 * xi + 3.0 * xi * xi,
                (6.0 * xi - 6.0 * xi * xi) / h,
                -2.0 * xi + 3.0 * xi * xi,
            ];
            let ddphi = [
                (-6.0 + 12.0 * xi) / (h * h),
                (-4.0 + 6.0 * xi) / h,
                (6.0 - 12.0 * xi) / (h * h),
                (-2.0 + 6.0 * xi) / h,
            ];
            for a in 0..2 {
                for b in 0..2 {
                    if let (Some(r), Some(c)) = (wd[a], wd[b]) {
                        mass[(r, c)] += rho_a * psi[a] * psi[b] * jw;
                        stiffness[(r, c)] += ea * dpsi[a] * dpsi[b] * jw;
                    }
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    if let (Some(r), Some(c)) = (vd[a], vd[b]) {
                        mass[(r, c)] += rho_a * phi[a] * phi[b] * jw;
                        stiffness[(r, c)] += ei * ddphi[a] * ddphi[b] * jw;
                    }
                }
            }
            // Axial row: ½ EA (v′)² ψ′_a.
            for a in 0..2 {
                for b in 0..4 {
                    for c in 0..4 {
                        let val = 0.5 * ea * dphi[b] * dphi[c] * dpsi[a] * jw;
                        add_force(&mut f2, &[vd[b], vd[c]], wd[a], val);
                    }
                }
            }
            // Transverse rows: EA w′ v′ φ′_b and ½ EA (v′)³ φ′_b.
            for b in 0..4 {
                for a in 0..2 {
                    for c in 0..4 {
                        let val = ea * dpsi[a] * dphi[c] * dphi[b] * jw;
                        add_force(&mut f2, &[wd[a], vd[c]], vd[b], val);
                    }
                }
                for c in 0..4 {
                    for d in 0..4 {
                        for g in 0..4 {
                            let val = 0.5 * ea * dphi[c] * dphi[d] * dphi[g] * dphi[b] * jw;
                            add_force(&mut f3, &[vd[c], vd[d], vd[g]], vd[b], val);
                        }
                    }
                }
            }
        }
    }
    Assembly { nq, mass, stiffness, f2, f3 }
}

/// Flat index of a sorted monomial in `x^{⊗p}`.
fn flat(mono: &[usize], n: usize) -> usize {
    mono.iter().fold(0, |acc, &i| acc * n + i)
}

/// Builds the first-order polynomial system of degree 3 with inputs
/// `(u₁, u₂)` the two cable tensions and output the tip displacements `(w_L, v_L)`.
pub fn beam_system(p: &BeamParams) -> Result<PolynomialSystem> {
    p.validate()?;
    let Assembly { nq, mass, stiffness, f2, f3 } = assemble(p);
    let n = 2 * nq;
    let minv = mass.clone().cholesky().ok_or(Error::SingularMass)?.inverse();
    let damping = &mass * p.alpha + &stiffness * p.beta;

    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, nq), (nq, nq)).fill_with_identity();
    a.view_mut((nq, 0), (nq, nq)).copy_from(&(-(&minv * &stiffness)));
    a.view_mut((nq, nq), (nq, nq)).copy_from(&(-(&minv * &damping)));

    // Velocity rows of M⁻¹ f for a force with sparse q-space rows.
    let lift = |rows: &BTreeMap<usize, f64>, sign: f64| -> Vec<(usize, f64)> {
        (0..nq)
            .map(|i| (nq + i, sign * rows.iter().map(|(&r, &v)| minv[(i, r)] * v).sum::<f64>()))
            .filter(|&(_, v)| v != 0.0)
            .collect()
    };
    let force_matrix = |poly: &ForcePoly, deg: usize| -> Result<SparseColumns> {
        let cols = n.pow(deg as u32);
        let trip = poly.iter().flat_map(|(mono, rows)| {
            let col = flat(mono, n);
            lift(rows, -1.0).into_iter().map(move |(r, v)| (r, col, v))
        });
        SparseColumns::from_triplets(n, cols, trip.collect::<Vec<_>>())
    };

    // Tip loads b(q)u with cos θ, sin θ expanded to third order in (w_L, v_L).
    let (iw, iv, it) = (nq - 3, nq - 2, nq - 1);
    let l = p.length;
    let dl = p.cable_offset;
    let mut loads: BTreeMap<usize, ForcePoly> = BTreeMap::new();
    let mut put = |deg: usize, mono: Vec<usize>, row: usize, input: usize, v: f64| {
        *loads
            .entry(deg)
            .or_default()
            .entry([mono, vec![input]].concat())
            .or_default()
            .entry(row)
            .or_insert(0.0) += v;
    };
    for (r, side) in [(0usize, 1.0), (1, -1.0)] {
        // Axial: −(u₁+u₂) cos θ; moment: δ(u₁−u₂) cos θ.
        put(0, vec![], iw, r, -1.0);
        put(0, vec![], it, r, side * dl);
        put(2, vec![iv, iv], iw, r, 0.5 / (l * l));
        put(2, vec![iv, iv], it, r, -side * dl * 0.5 / (l * l));
        put(3, vec![iw, iv, iv], iw, r, -1.0 / l.powi(3));
        put(3, vec![iw, iv, iv], it, r, side * dl / l.powi(3));
        // Shear: −(u₁+u₂) sin θ.
        put(1, vec![iv], iv, r, -1.0 / l);
        put(2, vec![iw, iv], iv, r, 1.0 / (l * l));
        put(3, vec![iw, iw, iv], iv, r, -1.0 / l.powi(3));
        put(3, vec![iv, iv, iv], iv, r, 0.5 / l.powi(3));
    }
    let m = 2;
    let input_matrix = |poly: &ForcePoly, deg: usize| -> Result<SparseColumns> {
        let cols = m * n.pow(deg as u32);
        let trip = poly.iter().flat_map(|(key, rows)| {
            let (mono, input) = key.split_at(deg);
            let col = flat(mono, n) * m + input[0];
            lift(rows, 1.0).into_iter().map(move |(rr, v)| (rr, col, v))
        });
        SparseColumns::from_triplets(n, cols, trip.collect::<Vec<_>>())
    };

    let b_sparse = input_matrix(&loads.remove(&0).unwrap_or_default(), 0)?;
    let b = b_sparse.to_dense();
    let mut c = DMatrix::zeros(2, n);
    c[(0, iw)] = 1.0;
    c[(1, iv)] = 1.0;
    let mut sys = PolynomialSystem::linear(a, b, c)?.with_ell(3);
    sys.set_f(2, force_matrix(&f2, 2)?)?;
    sys.set_f(3, force_matrix(&f3, 3)?)?;
    for deg in 1..=3 {
        sys.set_g(deg, input_matrix(&loads.remove(&deg).unwrap_or_default(), deg)?)?;
    }
    sys.set_are_coordinates(energy_coordinates(nq, &mass, &stiffness)?)?;
    Ok(sys)
}

/// Similarity `T` mapping `x = [q; q̇]` to energy coordinates
/// `z = [L_Kᵀ q; L_Mᵀ q̇]` with `K = L_K L_Kᵀ`, `M = L_M L_Mᵀ`.
///
/// In `z` the undamped linear dynamics are skew-symmetric, which makes the
/// Riccati problem far better scaled than in nodal coordinates.
pub fn beam_energy_coordinates(p: &BeamParams) -> Result<DMatrix<f64>> {
    p.validate()?;
    let Assembly { nq, mass, stiffness, .. } = assemble(p);
    energy_coordinates(nq, &mass, &stiffness)
}

fn energy_coordinates(nq: usize, mass: &DMatrix<f64>, stiffness: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lm = mass.clone().cholesky().ok_or(Error::SingularMass)?.unpack();
    let lk = stiffness.clone().cholesky().ok_or(Error::SingularMass)?.unpack();
    let mut t = DMatrix::zeros(2 * nq, 2 * nq);
    t.view_mut((0, 0), (nq, nq)).copy_from(&lk.transpose());
    t.view_mut((nq, nq), (nq, nq)).copy_from(&lm.transpose());
    Ok(t)
}

/// State of the linear deformation `w = v = x₀ x / L` with `v′ = x₀ / L` and
/// zero velocity, sampled at the free nodes.
pub fn beam_initial_condition(p: &BeamParams, x0: f64) -> Vec<f64> {
    let ne = p.num_elements;
    let mut x = vec![0.0; 6 * ne];
    for j in 1..=ne {
        let pos = p.length * j as f64 / ne as f64;
        let base = 3 * (j - 1);
        x[base] = x0 * pos / p.length;
        x[base + 1] = x0 * pos / p.length;
        x[base + 2] = x0 / p.length;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        for (ne, n) in [(1, 6), (3, 18)] {
            let sys = beam_system(&BeamParams::with_elements(ne)).unwrap();
            assert_eq!((sys.n, sys.m, sys.p_out, sys.ell), (n, 2, 2, 3));
        }
    }

    #[test]
    fn static_stiffness_matches_cantilever_formulas() {
        // Tip deflection under a unit tip force is L³/(3EI); axial is L/(EA).
        let p = BeamParams { num_elements: 4, inertia: 0.5, area: 2.0, ..Default::default() };
        let asm = assemble(&p);
        let k = asm.stiffness;
        let nq = asm.nq;
        let mut load = nalgebra::DVector::zeros(nq);
        load[nq - 2] = 1.0;
        load[nq - 3] = 1.0;
        let u = k.lu().solve(&load).unwrap();
        assert!((u[nq - 2] - 1.0 / (3.0 * 0.5)).abs() < 1e-12);
        assert!((u[nq - 3] - 1.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn initial_condition_tip() {
        let p = BeamParams::with_elements(5);
        let x = beam_initial_condition(&p, 0.1);
        assert!((x[3 * 4] - 0.1).abs() < 1e-15);
        assert!(x[15..].iter().all(|&v| v == 0.0));
        assert!(beam_initial_condition(&p, 0.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quadratic_axial_force_matches_strain_energy_gradient() {
        // Internal force equals the gradient of U(q) = ∫ EA/2 (w′ + ½v′²)² + EI/2 v″².
        let p = BeamParams::with_elements(2);
        let sys = beam_system(&p).unwrap();
        let asm = assemble(&p);
        let nq = asm.nq;
        let q: Vec<f64> = (0..nq).map(|i| 0.01 * (1.0 + i as f64).sin()).collect();
        let energy = |q: &[f64]| -> f64 {
            let h = p.length / 2.0;
            let mut u = 0.0;
            for e in 0..2 {
                let get = |local: usize| {
                    let node = e + local / 3;
                    if node == 0 { 0.0 } else { q[3 * (node - 1) + local % 3] }
                };
                for &(xi, wq) in &gauss_legendre_5() {
                    let dw = (get(3) - get(0)) / h;
                    let dv = get(1) * (-6.0 * xi + 6.0 * xi * xi) / h
                        + get(2) * (1.0 - 4.0 * xi + 3.0 * xi * xi)
                        + get(4) * (6.0 * xi - 6.0 * xi * xi) / h
                        + get(5) * (-2.0 * xi + 3.0 * xi * xi);
                    let ddv = get(1) * (-6.0 + 12.0 * xi) / (h * h)
                        + get(2) * (-4.0 + 6.0 * xi) / h
                        + get(4) * (6.0 - 12.0 * xi) / (h * h)
                        + get(5) * (-2.0 + 6.0 * xi) / h;
                    let strain = dw + 0.5 * dv * dv;
                    u += (0.5 * strain * strain + 0.5 * ddv * ddv) * wq * h;
                }
            }
            u
        };
        // M q̈ = −∇U, so velocity rows of f(x) at zero velocity are −M⁻¹∇U.
        let mut x = q.clone();
        x.extend(vec![0.0; nq]);
        let f = sys.eval_f(&x);
        let minv = asm.mass.cholesky().unwrap().inverse();
        let step = 1e-6;
        let grad: Vec<f64> = (0..nq)
            .map(|i| {
                let mut a = q.clone();
                let mut b = q.clone();
                a[i] += step;
                b[i] -= step;
                (energy(&a) - energy(&b)) / (2.0 * step)
            })
            .collect();
        for i in 0..nq {
            let expect: f64 = -(0..nq).map(|r| minv[(i, r)] * grad[r]).sum::<f64>();
            assert!((f[nq + i] - expect).abs() < 1e-7 * (1.0 + expect.abs()), "row {i}");
        }
    }
}
