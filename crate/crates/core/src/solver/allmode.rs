//! Universally-quantified ("all input states") mode.
//!
//! Here the per-state constraints are replaced by a block-positivity
//! requirement on the diagonal map's Choi operator, taken with respect to
//! the partition formed by the block's parts on the system side plus the
//! clone register as one extra part. Block positivity is screened by a
//! seesaw minimization over product vectors; a nonnegative screen is
//! evidence, not proof, so all-states results are labeled heuristic.

use super::{class_blocks, string_profile, DissociationClass, FTable, SolverError};
use crate::linalg::{
    c, contract_legs, from_pauli, pauli_digit, pow4, CVector, PauliTable,
    QOperator,
};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self { restarts: 200, max_sweeps: 60, seed: 11 }
    }
}

#[derive(Debug, Clone)]
pub struct SeesawReport {
    /// Lowest product-vector expectation found (heuristic lower estimate).
    pub lower_bound: f64,
    pub restarts: usize,
    /// Product vectors per part achieving the bound.
    pub witness: Vec<CVector>,
}

/// Seesaw minimization of `<v_1 x ... x v_k| Omega |v_1 x ... x v_k>` by
/// alternating per-part eigenvector updates with random restarts.
pub fn block_positivity_heuristic(
    omega: &QOperator,
    parts: &[Vec<usize>],
    opts: &SeesawOptions,
) -> SeesawReport {
    let n = omega.n_qubits();
    let covered: usize = parts.iter().map(|p| p.len()).sum();
    assert_eq!(covered, n, "parts must cover all qubits");
    let runs: Vec<(f64, Vec<CVector>)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64 * 0x9e37));
            let mut vectors: Vec<CVector> = parts
                .iter()
                .map(|p| random_unit(1 << p.len(), &mut rng))
                .collect();
            let mut value = f64::INFINITY;
            for _sweep in 0..opts.max_sweeps {
                let mut new_value = value;
                for (pi, part) in parts.iter().enumerate() {
                    let env = environment(omega, parts, &vectors, pi);
                    let eig = env.symmetric_eigen();
                    let (mut arg, mut min) = (0usize, f64::INFINITY);
                    for (j, &ev) in eig.eigenvalues.iter().enumerate() {
                        if ev < min {
                            min = ev;
                            arg = j;
                        }
                    }
                    vectors[pi] = eig.eigenvectors.column(arg).into_owned();
                    debug_assert_eq!(vectors[pi].len(), 1 << part.len());
                    new_value = min;
                }
                if (value - new_value).abs() < 1e-13 {
                    value = new_value;
                    break;
                }
                value = new_value;
            }
            (value, vectors)
        })
        .collect();
    let mut best = runs
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .expect("at least one restart");
    normalize_witness(&mut best.1);
    SeesawReport { lower_bound: best.0, restarts: opts.restarts.max(1), witness: best.1 }
}

fn normalize_witness(vectors: &mut [CVector]) {
    for v in vectors {
        let n = v.norm();
        if n > 0.0 {
            *v /= c(n, 0.0);
        }
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| {
        c(crate::testutil::normal(rng), crate::testutil::normal(rng))
    });
    let n = v.norm();
    v / c(n, 0.0)
}

/// `<others| Omega |others>` as a matrix on part `pi`.
fn environment(
    omega: &QOperator,
    parts: &[Vec<usize>],
    vectors: &[CVector],
    pi: usize,
) -> crate::linalg::CMatrix {
    let mut legs: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    let mut combined = CVector::from_element(1, c(1.0, 0.0));
    for (j, part) in parts.iter().enumerate() {
        if j == pi {
            continue;
        }
        combined = combined.kronecker(&vectors[j]);
        order.extend(part.iter().copied());
        legs.extend(part.iter().copied());
    }
    legs.sort_unstable();
    let reordered = reorder_vector(&combined, &order, &legs);
    contract_legs(omega, &legs, &reordered).expect("valid legs").into_matrix()
}

/// Reorder a product vector from tensor order `order` to qubit order `legs`.
fn reorder_vector(v: &CVector, order: &[usize], legs: &[usize]) -> CVector {
    if order == legs {
        return v.clone();
    }
    let nq = order.len();
    let mut out = CVector::zeros(v.len());
    for (i, val) in v.iter().enumerate() {
        let mut j = 0usize;
        for (pos, &q) in order.iter().enumerate() {
            let bit = (i >> (nq - 1 - pos)) & 1;
            let target = legs.iter().position(|&x| x == q).unwrap();
            j |= bit << (nq - 1 - target);
        }
        out[j] = *val;
    }
    out
}

/// The all-states feasibility data for one canonical block: the Choi
/// operator of the diagonal map, componentwise per profile parameter, and
/// the partition it must be block-positive against.
#[derive(Debug, Clone)]
pub struct BlockPositivityProblem {
    pub class: DissociationClass,
    pub n: usize,
    pub unknowns: Vec<(usize, usize)>,
    /// `Omega = sum_u f_u components[u]`, an operator on `2n` qubits.
    pub components: Vec<QOperator>,
    /// Partition: block parts on the system side, clones as the last part.
    pub parts: Vec<Vec<usize>>,
}

impl BlockPositivityProblem {
    /// Canonical block (blocks are label permutations of each other, so one
    /// representative suffices when no input state breaks the symmetry).
    pub fn build(class: DissociationClass, n: usize) -> Result<Self, SolverError> {
        class.validate(n)?;
        let unknowns = class.profile_domain(n);
        let block = class_blocks(class, n)
            .into_iter()
            .next()
            .expect("every class has at least one block");
        let mut parts: Vec<Vec<usize>> = Vec::new();
        parts.push(block.kept.clone());
        parts.extend(block.eb_parts.iter().cloned());
        parts.push((n..2 * n).collect()); // clone register
        let mut components = Vec::with_capacity(unknowns.len());
        for &u in &unknowns {
            let mut table = PauliTable::zeros(2 * n);
            let norm = 1.0 / pow4(n) as f64;
            for s in 0..pow4(n) {
                if string_profile(class, &block, n, s) != u {
                    continue;
                }
                // Choi of the diagonal map: coefficient on the doubled
                // string (s, s), sign from transposing the clone-side Y's
                let ys = (0..n).filter(|&t| pauli_digit(n, s, t) == 2).count();
                let sign = if ys % 2 == 0 { 1.0 } else { -1.0 };
                table.set(s * pow4(n) + s, sign * norm);
            }
            components.push(from_pauli(&table));
        }
        Ok(Self { class, n, unknowns, components, parts })
    }

    pub fn omega(&self, f: &FTable) -> QOperator {
        assert_eq!(f.domain(), self.unknowns.as_slice());
        let mut acc = QOperator::zeros(2 * self.n);
        for (u, comp) in self.components.iter().enumerate() {
            let w = f.values()[u];
            if w != 0.0 {
                acc = acc.add(&comp.scale(c(w, 0.0))).expect("same size");
            }
        }
        acc
    }

    /// Seesaw screen of `Omega(f)` against the block partition.
    pub fn screen(&self, f: &FTable, opts: &SeesawOptions) -> SeesawReport {
        block_positivity_heuristic(&self.omega(f), &self.parts, opts)
    }

    /// Linear coefficients `<w| Omega_u |w>` of one product vector.
    pub fn cut_coefficients(&self, witness: &[CVector]) -> DVector<f64> {
        let full = assemble_product(&self.parts, witness, 2 * self.n);
        DVector::from_fn(self.components.len(), |u, _| {
            let m = self.components[u].matrix();
            (full.adjoint() * m * &full)[(0, 0)].re
        })
    }
}

fn assemble_product(parts: &[Vec<usize>], vectors: &[CVector], n: usize) -> CVector {
    let mut combined = CVector::from_element(1, c(1.0, 0.0));
    let mut order = Vec::new();
    for (part, v) in parts.iter().zip(vectors.iter()) {
        combined = combined.kronecker(v);
        order.extend(part.iter().copied());
    }
    let legs: Vec<usize> = (0..n).collect();
    reorder_vector(&combined, &order, &legs)
}
