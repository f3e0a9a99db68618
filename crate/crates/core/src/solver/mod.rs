//! Decomposition-based feasibility solver for dissociation thresholds.
//!
//! A channel is decomposed into elementary blocks: a diagonal map acting on
//! the full register followed by measure-and-prepare (SIC) operations on all
//! parts except one. The diagonal map's Pauli multipliers are parametrized
//! by zero-count profiles `f(s, t)`; matching the target channel's Pauli
//! transfer yields a small linear system, and the requirement that every
//! measured branch leaves a positive operator on the kept part yields a set
//! of linear matrix inequalities in `f`. Feasibility at a given noise level
//! is decided by maximizing the worst constraint eigenvalue over the
//! equality-solution space; thresholds are found by bisection and always
//! re-verified from an explicit certificate.

mod allmode;
mod certificate;
mod constraints;
mod search;
mod system;

pub use allmode::{block_positivity_heuristic, BlockPositivityProblem, SeesawOptions, SeesawReport};
pub use certificate::{
    verify_certificate, CertificateInput, FeasibilityCertificate, ResidualReport, SolverMeta,
    VerificationReport, CONSTRAINT_TOL, TRANSFER_TOL,
};
pub use constraints::{constraint_count, constraint_set, evaluate_worst_eigenvalue, ConstraintSet, ProjectionConstraint};
pub use search::{SearchOptions, SearchOutcome};
pub use system::{build_system, solve_equalities, EqualitySolution, LinearSystem};

use crate::channels::NoiseKind;
use crate::linalg::{from_pauli, pauli_digit, to_pauli, PauliTable, QOperator};
use crate::states::NamedState;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("class {class} requires an even qubit count, got {n}")]
    OddQubitCount { class: DissociationClass, n: usize },
    #[error("class {class} needs at least {min} qubits, got {n}")]
    TooFewQubits { class: DissociationClass, min: usize, n: usize },
    #[error("state has {got} qubits but the run is configured for {expect}")]
    StateSizeMismatch { expect: usize, got: usize },
    #[error("equality system unsolvable at q={q} (residual {residual:.3e}); this is an internal error")]
    EqualitySystem { q: f64, residual: f64 },
    #[error("no feasible decomposition found at any probed q, including q=0")]
    GaveUp,
    #[error("produced certificate failed verification: {0}")]
    CertificateRejected(String),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error(transparent)]
    Sic(#[from] crate::sic::SicError),
}

/// Target entanglement structure of the channel output.
///
/// Letters (a)-(e) index the five decompositions; `targets()` gives the
/// `(k, r)` pair: outputs are `k`-separable with entangled clusters of at
/// most `r` bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DissociationClass {
    /// (a) fully separable output: entanglement-annihilating channels.
    Ea,
    /// (b) output clusters are qubit pairs.
    PairClusters,
    /// (c) one cluster of half the qubits, the other half disentangled.
    HalfPlusSingles,
    /// (d) two clusters of half the qubits each.
    HalfClusters,
    /// (e) at least one qubit detached: the largest DGE family.
    OneDetached,
}

pub const ALL_CLASSES: [DissociationClass; 5] = [
    DissociationClass::Ea,
    DissociationClass::PairClusters,
    DissociationClass::HalfPlusSingles,
    DissociationClass::HalfClusters,
    DissociationClass::OneDetached,
];

impl DissociationClass {
    pub fn letter(&self) -> char {
        match self {
            Self::Ea => 'a',
            Self::PairClusters => 'b',
            Self::HalfPlusSingles => 'c',
            Self::HalfClusters => 'd',
            Self::OneDetached => 'e',
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "a" | "ea" => Some(Self::Ea),
            "b" | "pairs" | "pair-clusters" => Some(Self::PairClusters),
            "c" | "half-singles" | "half-plus-singles" => Some(Self::HalfPlusSingles),
            "d" | "halves" | "half-clusters" => Some(Self::HalfClusters),
            "e" | "dge" | "one-detached" => Some(Self::OneDetached),
            _ => None,
        }
    }

    /// `(k, r)`: separability count and maximal cluster size of outputs.
    pub fn targets(&self, n: usize) -> (usize, usize) {
        match self {
            Self::Ea => (n, 1),
            Self::PairClusters => (n / 2, 2),
            Self::HalfPlusSingles => (n / 2 + 1, n / 2),
            Self::HalfClusters => (2, n / 2),
            Self::OneDetached => (2, n - 1),
        }
    }

    pub fn requires_even(&self) -> bool {
        matches!(self, Self::PairClusters | Self::HalfPlusSingles | Self::HalfClusters)
    }

    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        let min = if self.requires_even() { 4 } else { 2 };
        if n < min {
            return Err(SolverError::TooFewQubits { class: *self, min, n });
        }
        if self.requires_even() && n % 2 != 0 {
            return Err(SolverError::OddQubitCount { class: *self, n });
        }
        Ok(())
    }

    /// Zero-count profile domain `(s, t)` of the diagonal-map parameters.
    pub fn profile_domain(&self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Self::Ea | Self::OneDetached => {
                (0..=1).flat_map(|s| (0..n).map(move |t| (s, t))).collect()
            }
            Self::PairClusters => (0..=2).flat_map(|s| (0..n - 1).map(move |t| (s, t))).collect(),
            Self::HalfPlusSingles | Self::HalfClusters => {
                let h = n / 2;
                (0..=h).flat_map(|s| (0..=h).map(move |t| (s, t))).collect()
            }
        }
    }
}

impl fmt::Display for DissociationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ea => write!(f, "ea"),
            Self::PairClusters => write!(f, "pair-clusters"),
            Self::HalfPlusSingles => write!(f, "half-plus-singles"),
            Self::HalfClusters => write!(f, "half-clusters"),
            Self::OneDetached => write!(f, "dge"),
        }
    }
}

/// One elementary block: the part kept intact and the parts measured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGeometry {
    /// Ascending qubit positions left untouched by EB operations.
    pub kept: Vec<usize>,
    /// Measured parts; each part is ascending, carries a SIC of dim `2^|part|`.
    pub eb_parts: Vec<Vec<usize>>,
}

impl BlockGeometry {
    pub fn eb_qubits(&self) -> Vec<usize> {
        let mut qs: Vec<usize> = self.eb_parts.iter().flatten().copied().collect();
        qs.sort_unstable();
        qs
    }
}

/// All elementary blocks of a class on `n` qubits (0-based positions).
pub fn class_blocks(class: DissociationClass, n: usize) -> Vec<BlockGeometry> {
    match class {
        DissociationClass::Ea => (0..n)
            .map(|m| BlockGeometry {
                kept: vec![m],
                eb_parts: (0..n).filter(|&t| t != m).map(|t| vec![t]).collect(),
            })
            .collect(),
        DissociationClass::OneDetached => (0..n)
            .map(|m| BlockGeometry {
                kept: (0..n).filter(|&t| t != m).collect(),
                eb_parts: vec![vec![m]],
            })
            .collect(),
        DissociationClass::PairClusters => {
            let mut out = Vec::new();
            for pairing in pairings(&(0..n).collect::<Vec<_>>()) {
                for kept in &pairing {
                    out.push(BlockGeometry {
                        kept: kept.clone(),
                        eb_parts: pairing.iter().filter(|p| *p != kept).cloned().collect(),
                    });
                }
            }
            out
        }
        DissociationClass::HalfPlusSingles => {
            let h = n / 2;
            subsets(n, h)
                .into_iter()
                .map(|kept| BlockGeometry {
                    eb_parts: (0..n).filter(|t| !kept.contains(t)).map(|t| vec![t]).collect(),
                    kept,
                })
                .collect()
        }
        DissociationClass::HalfClusters => {
            let h = n / 2;
            let mut out = Vec::new();
            for half in subsets(n, h) {
                if !half.contains(&0) {
                    continue;
                }
                let other: Vec<usize> = (0..n).filter(|t| !half.contains(t)).collect();
                out.push(BlockGeometry { kept: other.clone(), eb_parts: vec![half.clone()] });
                out.push(BlockGeometry { kept: half, eb_parts: vec![other] });
            }
            out
        }
    }
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn recurse(n: usize, k: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if stack.len() == k {
            out.push(stack.clone());
            return;
        }
        for t in start..n {
            stack.push(t);
            recurse(n, k, t + 1, stack, out);
            stack.pop();
        }
    }
    recurse(n, k, 0, &mut stack, &mut out);
    out
}

fn pairings(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let a = items[0];
    let mut out = Vec::new();
    for i in 1..items.len() {
        let b = items[i];
        let rest: Vec<usize> = items[1..].iter().copied().filter(|&x| x != b).collect();
        for mut tail in pairings(&rest) {
            let mut pairing = vec![vec![a, b]];
            pairing.append(&mut tail);
            out.push(pairing);
        }
    }
    out
}

/// Zero-count profile `(s, t)` of a Pauli string relative to a block.
///
/// For classes (a) and (b), `s` counts identity digits on the kept part;
/// for (c), (d) and (e), `s` counts identity digits on the measured parts.
/// `t` always counts the remaining identity digits.
pub fn string_profile(
    class: DissociationClass,
    block: &BlockGeometry,
    n: usize,
    string: usize,
) -> (usize, usize) {
    let zeros_kept =
        block.kept.iter().filter(|&&t| pauli_digit(n, string, t) == 0).count();
    let zeros_eb = block
        .eb_parts
        .iter()
        .flatten()
        .filter(|&&t| pauli_digit(n, string, t) == 0)
        .count();
    match class {
        DissociationClass::Ea | DissociationClass::PairClusters => (zeros_kept, zeros_eb),
        DissociationClass::OneDetached
        | DissociationClass::HalfPlusSingles
        | DissociationClass::HalfClusters => (zeros_eb, zeros_kept),
    }
}

/// Input selector: a concrete state, or the universally quantified mode in
/// which constraints become block-positivity requirements on the diagonal
/// map's Choi operator.
#[derive(Debug, Clone)]
pub enum ThresholdInput {
    State(NamedState),
    All,
}

/// Apply the diagonal map with multipliers `f(profile)` to `rho`.
pub fn xi_operator(
    class: DissociationClass,
    block: &BlockGeometry,
    n: usize,
    f: &FTable,
    rho: &QOperator,
) -> Result<QOperator, SolverError> {
    let mut table = to_pauli(rho)?;
    apply_multipliers(class, block, n, f, &mut table);
    Ok(from_pauli(&table))
}

pub(crate) fn apply_multipliers(
    class: DissociationClass,
    block: &BlockGeometry,
    n: usize,
    f: &FTable,
    table: &mut PauliTable,
) {
    for s in 0..table.coeffs().len() {
        let p = string_profile(class, block, n, s);
        let v = table.coeff(s) * f.get(p);
        table.set(s, v);
    }
}

/// Diagonal-map parameters: value per zero-count profile `(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FTable {
    domain: Vec<(usize, usize)>,
    values: Vec<f64>,
}

impl FTable {
    pub fn new(domain: Vec<(usize, usize)>, values: Vec<f64>) -> Self {
        assert_eq!(domain.len(), values.len());
        Self { domain, values }
    }

    pub fn domain(&self) -> &[(usize, usize)] {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index_of(&self, profile: (usize, usize)) -> Option<usize> {
        self.domain.iter().position(|&p| p == profile)
    }

    pub fn get(&self, profile: (usize, usize)) -> f64 {
        match self.index_of(profile) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }
}

/// Outcome of a threshold search, certificate included.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub class: DissociationClass,
    pub n_qubits: usize,
    pub noise: NoiseKind,
    pub input: CertificateInput,
    pub q_star: f64,
    pub resolution: f64,
    pub certificate: FeasibilityCertificate,
    pub verification: VerificationReport,
    pub probes: usize,
    pub wall_time_ms: u128,
}

/// Knobs of the threshold search; defaults match the documented tolerances.
#[derive(Debug, Clone)]
pub struct ThresholdOptions {
    pub resolution: f64,
    pub seed: u64,
    pub search: SearchOptions,
    pub dedup: bool,
    pub seesaw: SeesawOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            resolution: 1e-3,
            seed: 7,
            search: SearchOptions::default(),
            dedup: true,
            seesaw: SeesawOptions::default(),
        }
    }
}

mod threshold;
pub use threshold::{feasible, max_threshold, FeasibilityOutcome};
