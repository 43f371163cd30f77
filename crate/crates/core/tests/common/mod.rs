//! Independent reference computations shared by the integration tests.
//!
//! Everything here is deliberately naive: brute-force sampling and direct
//! matrix algebra, sharing no code paths with the library beyond the PTM type.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use gateset_forge::superop::PauliTransferMatrix;

pub fn paulis() -> [DMatrix<C>; 4] {
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Apply the linear map with qubit PTM `r` to an arbitrary 2×2 matrix.
pub fn apply_ptm(r: &DMatrix<f64>, m: &DMatrix<C>) -> DMatrix<C> {
    let p = paulis();
    let coeff: Vec<C> = p.iter().map(|pj| (pj * m).trace() / C::new(2.0, 0.0)).collect();
    let mut out = DMatrix::zeros(2, 2);
    for i in 0..4 {
        for j in 0..4 {
            out += &p[i] * (coeff[j] * r[(i, j)]);
        }
    }
    out
}

/// `‖(id ⊗ Φ)(|ψ⟩⟨ψ|)‖₁` for `ψ = Σ c_ab |a⟩|b⟩` with `c = √ρ`, `ρ` the
/// reduced state with Bloch vector `v`.
fn induced_trace_norm(r: &DMatrix<f64>, v: &Vector3<f64>) -> f64 {
    let p = paulis();
    let rho = (&p[0] + &p[1] * C::new(v[0], 0.0) + &p[2] * C::new(v[1], 0.0) + &p[3] * C::new(v[2], 0.0))
        * C::new(0.5, 0.0);
    let eig = rho.clone().symmetric_eigen();
    let sq = eig.eigenvalues.map(|e| C::new(e.max(0.0).sqrt(), 0.0));
    let c = &eig.eigenvectors * DMatrix::from_diagonal(&sq) * eig.eigenvectors.adjoint();
    let psi = DVector::from_fn(4, |k, _| c[(k / 2, k % 2)]);
    let pp = &psi * psi.adjoint();
    let mut out = DMatrix::<C>::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            let block = pp.view((2 * a, 2 * b), (2, 2)).into_owned();
            out.view_mut((2 * a, 2 * b), (2, 2)).copy_from(&apply_ptm(r, &block));
        }
    }
    let herm = (&out + out.adjoint()) * C::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum()
}

fn clamp_ball(v: Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if n > 1.0 { v / n } else { v }
}

/// Brute-force lower bound on `‖Λ1 − Λ2‖⋄` for qubit maps: dense sampling
/// of the input's reduced state followed by pattern-search refinement.
pub fn diamond_oracle(r1: &PauliTransferMatrix, r2: &PauliTransferMatrix) -> f64 {
    let diff = r1.matrix() - r2.matrix();
    let f = |v: &Vector3<f64>| induced_trace_norm(&diff, v);
    let mut samples: Vec<(f64, Vector3<f64>)> = Vec::new();
    let n_dir = 600;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for k in 0..n_dir {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n_dir as f64;
        let rad = (1.0 - z * z).sqrt();
        let dir = Vector3::new(rad * (golden * k as f64).cos(), rad * (golden * k as f64).sin(), z);
        for s in [0.0, 0.25, 0.5, 0.7, 0.85, 0.95, 1.0] {
            let v = dir * s;
            samples.push((f(&v), v));
        }
    }
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = samples[0].0;
    let dirs = [
        Vector3::x(),
        Vector3::y(),
        Vector3::z(),
        Vector3::new(1.0, 1.0, 0.0).normalize(),
        Vector3::new(1.0, 0.0, 1.0).normalize(),
        Vector3::new(0.0, 1.0, 1.0).normalize(),
        Vector3::new(1.0, -1.0, 0.0).normalize(),
        Vector3::new(1.0, 0.0, -1.0).normalize(),
        Vector3::new(0.0, 1.0, -1.0).normalize(),
    ];
    for (mut val, mut v) in samples.into_iter().take(6) {
        let mut step = 0.1;
        while step > 1e-12 {
            let mut improved = false;
            for d in &dirs {
                for sgn in [1.0, -1.0] {
                    let cand = clamp_ball(v + d * (sgn * step));
                    let fc = f(&cand);
                    if fc > val {
                        val = fc;
                        v = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(val);
    }
    best
}

/// Average gate fidelity by Monte Carlo over Haar-random pure inputs:
/// `E_ψ ⟨ψ|U† Λ(ψ) U|ψ⟩` with the target given as a unitary PTM.
pub fn fidelity_monte_carlo(r: &PauliTransferMatrix, target: &PauliTransferMatrix, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..samples {
        // Uniform Bloch vector.
        let v = loop {
            let g = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let n = g.norm();
            if n > 1e-9 && n <= 0.5 {
                break g / n;
            }
        };
        let s = DVector::from_vec(vec![0.5, 0.5 * v[0], 0.5 * v[1], 0.5 * v[2]]);
        let out = r.matrix() * &s;
        let ideal = target.matrix() * &s;
        // Tr(ρ σ) = 2 ⟨⟨ρ|σ⟩⟩ in the normalized-coefficient picture.
        acc += 2.0 * out.dot(&ideal);
    }
    acc / samples as f64
}

/// Uniformly random unit vector from a seeded generator.
pub fn unit_vector(rng: &mut ChaCha20Rng) -> Vector3<f64> {
    loop {
        let g = Vector3::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
        let n = g.norm();
        if n > 1e-6 && n <= 1.0 {
            return g / n;
        }
    }
}

/// Flat-metric CPTP projection of a qubit PTM posed directly as an SDP:
/// maximize `−t` subject to `[[t, δᵀ], [δ, I]] ⪰ 0`, a positive Choi block
/// whose PTM matches `R0 + δ` below the first row, and a trace-preserving
/// first row. Returns the projected PTM and its Frobenius distance to `r0`.
pub fn cptp_projection_sdp(r0: &PauliTransferMatrix) -> (DMatrix<f64>, f64, f64) {
    use gateset_forge::optim::{solve_sdp, Constraint, SdpProblem};
    let p = paulis();
    let kron = |a: &DMatrix<C>, b: &DMatrix<C>| a.kronecker(b);
    let r = r0.matrix();
    let free: Vec<(usize, usize)> = (1..4).flat_map(|i| (0..4).map(move |j| (i, j))).collect();
    let nb = 1 + free.len();
    let e = |n: usize, i: usize, j: usize, v: C| {
        let mut m = DMatrix::<C>::zeros(n, n);
        m[(i, j)] += v * C::new(0.5, 0.0);
        m[(j, i)] += v.conj() * C::new(0.5, 0.0);
        m
    };
    let mut cons = Vec::new();
    let mut rhs = Vec::new();
    // Lower-right block of B is the identity (real and imaginary parts).
    for a in 1..nb {
        for b in a..nb {
            cons.push(Constraint::new(vec![(1, e(nb, a, b, C::new(1.0, 0.0)))]));
            rhs.push(if a == b { 1.0 } else { 0.0 });
            if a != b {
                cons.push(Constraint::new(vec![(1, e(nb, a, b, C::new(0.0, 1.0)))]));
                rhs.push(0.0);
            }
        }
    }
    // Trace-preserving row.
    let mut const_sq = 0.0;
    for j in 0..4 {
        cons.push(Constraint::new(vec![(0, kron(&p[j].transpose(), &p[0]))]));
        let want = if j == 0 { 1.0 } else { 0.0 };
        rhs.push(want);
        const_sq += (want - r[(0, j)]).powi(2);
    }
    // PTM entries below it equal R0 + δ.
    for (k, &(i, j)) in free.iter().enumerate() {
        cons.push(Constraint::new(vec![
            (0, kron(&p[j].transpose(), &p[i])),
            (1, e(nb, 0, k + 1, C::new(-1.0, 0.0))),
        ]));
        rhs.push(r[(i, j)]);
    }
    let mut obj_b = DMatrix::<C>::zeros(nb, nb);
    obj_b[(0, 0)] = C::new(-1.0, 0.0);
    let prob = SdpProblem { block_sizes: vec![4, nb], objective: vec![DMatrix::zeros(4, 4), obj_b], constraints: cons, rhs };
    let sol = solve_sdp(&prob, None);
    assert!(sol.is_optimal(), "projection SDP: {:?} gap {}", sol.status, sol.gap);
    let choi = &sol.x[0];
    let out = DMatrix::from_fn(4, 4, |i, j| (kron(&p[j].transpose(), &p[i]) * choi).trace().re);
    let t = -sol.primal_objective;
    (out, (const_sq + t).max(0.0).sqrt(), sol.gap)
}
