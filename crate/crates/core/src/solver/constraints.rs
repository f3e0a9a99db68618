//! Positivity constraints for a fixed input state.
//!
//! For every block and every choice of SIC vectors on its measured parts,
//! contracting the diagonal-map output over the measured legs must leave a
//! positive operator on the kept part. Since the diagonal map is linear in
//! the profile parameters, each constraint is a Hermitian-matrix-valued
//! linear function of `f`, stored componentwise per unknown.

use super::{
    apply_multipliers, class_blocks, string_profile, BlockGeometry, DissociationClass, FTable,
    SolverError,
};
use crate::linalg::{c, contract_legs, from_pauli, hermitian_eigenvalues, to_pauli, CMatrix, CVector, PauliTable, QOperator};
use crate::sic::sic_vectors;
use rayon::prelude::*;
use std::collections::HashMap;

/// One deduplicated constraint: `M(f) = sum_u f_u components[u]` must be PSD.
#[derive(Debug, Clone)]
pub struct ProjectionConstraint {
    pub block_id: usize,
    /// SIC vector index per measured part.
    pub choice: Vec<usize>,
    pub components: Vec<CMatrix>,
    /// How many (block, choice) pairs collapsed onto this representative.
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub class: DissociationClass,
    pub n: usize,
    pub unknowns: Vec<(usize, usize)>,
    pub items: Vec<ProjectionConstraint>,
    pub total_enumerated: usize,
}

impl ConstraintSet {
    /// Worst (smallest) eigenvalue over all constraints at parameters `f`.
    pub fn worst_eigenvalue(&self, f: &[f64]) -> f64 {
        self.items
            .iter()
            .map(|item| min_eig_of_combo(&item.components, f))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn min_eig_of_combo(components: &[CMatrix], f: &[f64]) -> f64 {
    let dim = components[0].nrows();
    let mut m = CMatrix::zeros(dim, dim);
    for (u, comp) in components.iter().enumerate() {
        if f[u] != 0.0 {
            m += comp * c(f[u], 0.0);
        }
    }
    hermitian_eigenvalues(&m)[0]
}

/// Total number of (block, SIC-choice) pairs before deduplication.
pub fn constraint_count(class: DissociationClass, n: usize) -> usize {
    class_blocks(class, n)
        .iter()
        .map(|b| b.eb_parts.iter().map(|p| 1usize << (2 * p.len())).product::<usize>())
        .sum()
}

/// Enumerate constraints for a state, optionally deduplicating identical
/// matrix stacks (equal constraints arise from input-state symmetries).
pub fn constraint_set(
    class: DissociationClass,
    n: usize,
    rho: &QOperator,
    dedup: bool,
) -> Result<ConstraintSet, SolverError> {
    class.validate(n)?;
    if rho.n_qubits() != n {
        return Err(SolverError::StateSizeMismatch { expect: n, got: rho.n_qubits() });
    }
    let unknowns = class.profile_domain(n);
    let pauli = to_pauli(rho)?;
    let blocks = class_blocks(class, n);
    let mut total = 0usize;

    let per_block: Vec<Vec<ProjectionConstraint>> = blocks
        .par_iter()
        .enumerate()
        .map(|(block_id, block)| block_constraints(class, n, &unknowns, &pauli, block_id, block))
        .collect::<Result<_, _>>()?;

    let mut items: Vec<ProjectionConstraint> = Vec::new();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    for group in per_block {
        for item in group {
            total += 1;
            if !dedup {
                items.push(item);
                continue;
            }
            let key = quantize_stack(&item.components);
            match index.get(&key) {
                Some(&i) => items[i].multiplicity += 1,
                None => {
                    index.insert(key, items.len());
                    items.push(item);
                }
            }
        }
    }
    Ok(ConstraintSet { class, n, unknowns, items, total_enumerated: total })
}

fn block_constraints(
    class: DissociationClass,
    n: usize,
    unknowns: &[(usize, usize)],
    pauli: &PauliTable,
    block_id: usize,
    block: &BlockGeometry,
) -> Result<Vec<ProjectionConstraint>, SolverError> {
    // per-unknown component operators of the diagonal map's output
    let mut component_ops = Vec::with_capacity(unknowns.len());
    for &u in unknowns {
        let mut masked = PauliTable::zeros(n);
        for s in 0..masked.coeffs().len() {
            if string_profile(class, block, n, s) == u {
                masked.set(s, pauli.coeff(s));
            }
        }
        component_ops.push(from_pauli(&masked));
    }
    let eb_legs = block.eb_qubits();
    let choices = choice_tuples(block)?;
    let mut out = Vec::with_capacity(choices.len());
    for choice in choices {
        let v = combined_vector(block, &choice)?;
        let components: Result<Vec<CMatrix>, SolverError> = component_ops
            .iter()
            .map(|op| Ok(contract_legs(op, &eb_legs, &v)?.into_matrix()))
            .collect();
        out.push(ProjectionConstraint { block_id, choice, components: components?, multiplicity: 1 });
    }
    Ok(out)
}

fn choice_tuples(block: &BlockGeometry) -> Result<Vec<Vec<usize>>, SolverError> {
    let sizes: Vec<usize> = block
        .eb_parts
        .iter()
        .map(|p| {
            let dim = 1usize << p.len();
            dim * dim
        })
        .collect();
    let mut out = vec![Vec::new()];
    for &size in &sizes {
        let mut next = Vec::with_capacity(out.len() * size);
        for prefix in &out {
            for i in 0..size {
                let mut t = prefix.clone();
                t.push(i);
                next.push(t);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Product of the chosen SIC vectors, reordered onto the ascending union of
/// the measured qubits.
fn combined_vector(block: &BlockGeometry, choice: &[usize]) -> Result<CVector, SolverError> {
    let order: Vec<usize> = block.eb_parts.iter().flatten().copied().collect();
    let nq = order.len();
    let mut v = CVector::from_element(1, c(1.0, 0.0));
    for (part, &idx) in block.eb_parts.iter().zip(choice.iter()) {
        let set = sic_vectors(1usize << part.len())?;
        v = v.kronecker(set.vector(idx));
    }
    // current tensor order is `order`; target is ascending
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted == order {
        return Ok(v);
    }
    let mut out = CVector::zeros(v.len());
    for (i, val) in v.iter().enumerate() {
        let mut j = 0usize;
        for (pos, &q) in order.iter().enumerate() {
            let bit = (i >> (nq - 1 - pos)) & 1;
            let target_pos = sorted.iter().position(|&x| x == q).unwrap();
            j |= bit << (nq - 1 - target_pos);
        }
        out[j] = *val;
    }
    Ok(out)
}

fn quantize_stack(components: &[CMatrix]) -> Vec<u64> {
    let mut key = Vec::new();
    for m in components {
        for z in m.iter() {
            key.push(quantize(z.re));
            key.push(quantize(z.im));
        }
    }
    key
}

fn quantize(x: f64) -> u64 {
    // 1e-12 buckets; collisions only merge matrices equal to ~1e-12, far
    // below the -1e-9 feasibility tolerance
    let scaled = (x * 1e12).round();
    if scaled == 0.0 {
        0u64 // avoid distinct -0.0 / +0.0 keys
    } else {
        scaled.to_bits()
    }
}

/// Re-enumerate every (block, choice) pair at fixed parameters and report
/// the worst eigenvalue. Independent of the componentwise path: the diagonal
/// map is applied once per block and contracted directly.
pub fn evaluate_worst_eigenvalue(
    class: DissociationClass,
    n: usize,
    rho: &QOperator,
    f: &FTable,
) -> Result<f64, SolverError> {
    class.validate(n)?;
    if rho.n_qubits() != n {
        return Err(SolverError::StateSizeMismatch { expect: n, got: rho.n_qubits() });
    }
    let pauli = to_pauli(rho)?;
    let blocks = class_blocks(class, n);
    let worst = blocks
        .par_iter()
        .map(|block| -> Result<f64, SolverError> {
            let mut table = pauli.clone();
            apply_multipliers(class, block, n, f, &mut table);
            let xi = from_pauli(&table);
            let eb_legs = block.eb_qubits();
            let mut worst = f64::INFINITY;
            for choice in choice_tuples(block)? {
                let v = combined_vector(block, &choice)?;
                let m = contract_legs(&xi, &eb_legs, &v)?;
                worst = worst.min(hermitian_eigenvalues(m.matrix())[0]);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    #[test]
    fn enumerated_counts_match_geometry() {
        // class e, n=3: 3 blocks x 4 choices
        assert_eq!(constraint_count(DissociationClass::OneDetached, 3), 12);
        // class a, n=4: 4 blocks x 4^3
        assert_eq!(constraint_count(DissociationClass::Ea, 4), 256);
        // class d, n=6: 20 blocks x 64 choices
        assert_eq!(constraint_count(DissociationClass::HalfClusters, 6), 1280);
        // class b, n=6: 45 blocks x 16^2
        assert_eq!(constraint_count(DissociationClass::PairClusters, 6), 11520);
    }

    #[test]
    fn ghz_constraints_deduplicate_by_symmetry() {
        let g = states::ghz(3).unwrap();
        let set = constraint_set(DissociationClass::OneDetached, 3, &g.rho, true).unwrap();
        assert_eq!(set.total_enumerated, 12);
        // full permutation symmetry: one block survives, 4 SIC choices,
        // each a 4x4 Hermitian constraint
        assert_eq!(set.items.len(), 4);
        assert!(set.items.iter().all(|i| i.components[0].nrows() == 4));
        assert_eq!(set.items.iter().map(|i| i.multiplicity).sum::<usize>(), 12);
    }

    #[test]
    fn cluster_constraints_keep_low_symmetry() {
        // 4 blocks x 4^3 SIC tuples enumerated for the non-symmetric state
        let cl = states::cluster4();
        let set = constraint_set(DissociationClass::Ea, 4, &cl.rho, true).unwrap();
        assert_eq!(set.total_enumerated, 256);
        assert!(set.items.iter().all(|i| i.components[0].nrows() == 2));
        assert!(set.items.len() > 4 && set.items.len() < 256);
        assert_eq!(set.items.iter().map(|i| i.multiplicity).sum::<usize>(), 256);
        let undeduped = constraint_set(DissociationClass::Ea, 4, &cl.rho, false).unwrap();
        assert_eq!(undeduped.items.len(), 256);
    }

    #[test]
    fn ghz6_half_cluster_constraints() {
        // 20 blocks x 64 SIC choices; full permutation symmetry leaves one
        // block's worth (64 choices), which exact-equality merging can
        // compress further
        let g = states::ghz(6).unwrap();
        let set = constraint_set(DissociationClass::HalfClusters, 6, &g.rho, true).unwrap();
        assert_eq!(set.total_enumerated, 1280);
        assert!(!set.items.is_empty() && set.items.len() <= 64);
        assert_eq!(set.items.iter().map(|i| i.multiplicity).sum::<usize>(), 1280);
        assert!(set.items.iter().all(|i| i.components[0].nrows() == 8));
    }

    #[test]
    fn componentwise_and_direct_evaluations_agree() {
        let w = states::w(4).unwrap();
        let class = DissociationClass::PairClusters;
        let set = constraint_set(class, 4, &w.rho, true).unwrap();
        let values: Vec<f64> = (0..set.unknowns.len()).map(|i| 0.2 + 0.05 * i as f64).collect();
        let via_components = set.worst_eigenvalue(&values);
        let f = FTable::new(set.unknowns.clone(), values);
        let direct = evaluate_worst_eigenvalue(class, 4, &w.rho, &f).unwrap();
        assert!((via_components - direct).abs() < 1e-10);
    }

    #[test]
    fn unit_f_on_state_keeps_constraints_positive() {
        // f == 1 means the diagonal map is the identity; contracting a
        // density matrix with product vectors must stay PSD
        let g = states::ghz(3).unwrap();
        let set = constraint_set(DissociationClass::Ea, 3, &g.rho, true).unwrap();
        let ones = vec![1.0; set.unknowns.len()];
        assert!(set.worst_eigenvalue(&ones) >= -1e-12);
    }
}
