//! Seeded generators for test corpora (random Hermitian operators and
//! density matrices). Kept in the library so integration suites can share
//! the same deterministic ensembles.

use crate::linalg::{c, CMatrix, QOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Standard-normal sampler (Box-Muller) on top of a seeded RNG.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Ginibre matrix: i.i.d. complex standard normal entries.
pub fn random_ginibre(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| c(normal(rng), normal(rng)))
}

/// Random Hermitian operator with O(1) entries, deterministic in `seed`.
pub fn random_hermitian(n_qubits: usize, seed: u64) -> QOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_ginibre(1 << n_qubits, &mut rng);
    let h = (&g + g.adjoint()) * c(0.5, 0.0);
    QOperator::new(h).unwrap()
}

/// Random full-rank density matrix `G G^dag / tr`, deterministic in `seed`.
pub fn random_density_matrix(n_qubits: usize, seed: u64) -> QOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_ginibre(1 << n_qubits, &mut rng);
    let p = &g * g.adjoint();
    let tr = p.trace();
    QOperator::new(p * c(1.0 / tr.re, 0.0)).unwrap()
}
