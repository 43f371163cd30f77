//! Seeded sampling helpers: Box–Muller normals, Haar unitaries, random
//! channels, and per-record noise streams.

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::pauli::C64;
use crate::superop::{ptm_from_kraus, KrausSet, PauliTransferMatrix};

/// One standard normal draw via Box–Muller.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // u1 in (0, 1] keeps the log finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Generator for the noise on one record, keyed by `(seed, indices)` so that
/// draws do not depend on evaluation order.
pub fn record_stream(seed: u64, indices: &[usize]) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(derive_seed(seed, indices));
    rng
}

/// Stable 64-bit seed derived from a base seed and a list of indices.
pub fn derive_seed(base: u64, indices: &[usize]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for &i in indices {
        h.update((i as u64).to_le_bytes());
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}

/// Uniformly random unit vector on the sphere.
pub fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix
/// with the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(standard_normal(rng), standard_normal(rng)));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let ph = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, k)] *= ph;
        }
    }
    q
}

/// Random channel: a Haar unitary on system ⊗ environment (environment
/// dimension `d²`, starting in `|0⟩`) with the environment traced out.
pub fn random_kraus<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> KrausSet {
    let env = dim * dim;
    let u = haar_unitary(dim * env, rng);
    // Index convention: |s⟩|e⟩ -> s * env + e.
    let ops = (0..env)
        .map(|k| DMatrix::from_fn(dim, dim, |s_out, s_in| u[(s_out * env + k, s_in * env)]))
        .collect();
    KrausSet::new(ops).expect("dims are consistent")
}

pub fn random_cptp<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PauliTransferMatrix {
    ptm_from_kraus(&random_kraus(dim, rng)).expect("random channel has a real PTM")
}

pub fn random_unitary_ptm<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PauliTransferMatrix {
    ptm_from_kraus(&KrausSet::unitary(haar_unitary(dim, rng)).expect("square"))
        .expect("unitary channel has a real PTM")
}

/// Haar-random pure state vector.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}
