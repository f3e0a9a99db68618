//! Canonical input states and seeded random density matrices.

use crate::linalg::{c, CVector, QOperator};
use crate::testutil;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("state {name} needs at least {min} qubits, got {n}")]
    TooFewQubits { name: &'static str, min: usize, n: usize },
    #[error("state {name} is only defined for {expect} qubits, got {n}")]
    WrongQubitCount { name: &'static str, expect: usize, n: usize },
    #[error("random states are supported up to 6 qubits, got {n}")]
    TooLarge { n: usize },
    #[error("unknown state spec '{0}' (expected ghz, w, cluster, upb, random:<seed>)")]
    UnknownSpec(String),
}

/// Parsed state selector as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateSpec {
    Ghz,
    W,
    Cluster4,
    Upb3,
    MaxMixed,
    Random { seed: u64 },
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self, StateError> {
        let t = text.trim().to_ascii_lowercase();
        match t.as_str() {
            "ghz" => Ok(Self::Ghz),
            "w" => Ok(Self::W),
            "cluster" | "cl" => Ok(Self::Cluster4),
            "upb" => Ok(Self::Upb3),
            "maxmixed" | "mixed" => Ok(Self::MaxMixed),
            _ => {
                if let Some(seed) = t.strip_prefix("random:") {
                    seed.parse::<u64>()
                        .map(|seed| Self::Random { seed })
                        .map_err(|_| StateError::UnknownSpec(text.to_string()))
                } else {
                    Err(StateError::UnknownSpec(text.to_string()))
                }
            }
        }
    }

    pub fn realize(&self, n: usize) -> Result<NamedState, StateError> {
        match self {
            Self::Ghz => ghz(n),
            Self::W => w(n),
            Self::Cluster4 => {
                if n != 4 {
                    return Err(StateError::WrongQubitCount { name: "cluster", expect: 4, n });
                }
                Ok(cluster4())
            }
            Self::Upb3 => {
                if n != 3 {
                    return Err(StateError::WrongQubitCount { name: "upb", expect: 3, n });
                }
                Ok(upb3())
            }
            Self::MaxMixed => Ok(max_mixed(n)),
            Self::Random { seed } => random_density(n, *seed),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ghz => write!(f, "ghz"),
            Self::W => write!(f, "w"),
            Self::Cluster4 => write!(f, "cluster"),
            Self::Upb3 => write!(f, "upb"),
            Self::MaxMixed => write!(f, "maxmixed"),
            Self::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

/// A density matrix together with the selector that produced it.
#[derive(Debug, Clone)]
pub struct NamedState {
    pub spec: StateSpec,
    pub n_qubits: usize,
    pub rho: QOperator,
}

fn pure_state(spec: StateSpec, v: CVector) -> NamedState {
    let n = v.len().trailing_zeros() as usize;
    NamedState { spec, n_qubits: n, rho: QOperator::projector(&v).expect("power-of-two vector") }
}

/// `(|0...0> + |1...1>)/sqrt(2)` as a density matrix.
pub fn ghz(n: usize) -> Result<NamedState, StateError> {
    if n < 2 {
        return Err(StateError::TooFewQubits { name: "ghz", min: 2, n });
    }
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[0] = amp;
    v[dim - 1] = amp;
    Ok(pure_state(StateSpec::Ghz, v))
}

/// Equal superposition of all single-excitation basis states.
pub fn w(n: usize) -> Result<NamedState, StateError> {
    if n < 2 {
        return Err(StateError::TooFewQubits { name: "w", min: 2, n });
    }
    let dim = 1usize << n;
    let mut v = CVector::zeros(dim);
    let amp = c(1.0 / (n as f64).sqrt(), 0.0);
    for t in 0..n {
        v[1 << (n - 1 - t)] = amp;
    }
    Ok(pure_state(StateSpec::W, v))
}

/// The 4-qubit cluster state `(|0000> + |0011> + |1100> - |1111>)/2`.
pub fn cluster4() -> NamedState {
    let mut v = CVector::zeros(16);
    let h = c(0.5, 0.0);
    v[0b0000] = h;
    v[0b0011] = h;
    v[0b1100] = h;
    v[0b1111] = -h;
    pure_state(StateSpec::Cluster4, v)
}

/// Bound-entangled 3-qubit state `(I - P_UPB)/4` built from the standard
/// four-vector unextendible product basis
/// `{|0,1,+>, |1,+,0>, |+,0,1>, |-,-,->}`.
pub fn upb3() -> NamedState {
    let z0 = [c(1.0, 0.0), c(0.0, 0.0)];
    let z1 = [c(0.0, 0.0), c(1.0, 0.0)];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [c(s, 0.0), c(s, 0.0)];
    let minus = [c(s, 0.0), c(-s, 0.0)];
    let kron3 = |a: &[num_complex::Complex64; 2],
                 b: &[num_complex::Complex64; 2],
                 d: &[num_complex::Complex64; 2]| {
        let mut v = CVector::zeros(8);
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                for (k, &dk) in d.iter().enumerate() {
                    v[(i << 2) | (j << 1) | k] = ai * bj * dk;
                }
            }
        }
        v
    };
    let vectors = [
        kron3(&z0, &z1, &plus),
        kron3(&z1, &plus, &z0),
        kron3(&plus, &z0, &z1),
        kron3(&minus, &minus, &minus),
    ];
    let mut proj = QOperator::zeros(3);
    for v in &vectors {
        proj = proj.add(&QOperator::projector(v).unwrap()).unwrap();
    }
    let rho = QOperator::identity(3)
        .add(&proj.scale(c(-1.0, 0.0)))
        .unwrap()
        .scale(c(0.25, 0.0));
    NamedState { spec: StateSpec::Upb3, n_qubits: 3, rho }
}

pub fn max_mixed(n: usize) -> NamedState {
    NamedState {
        spec: StateSpec::MaxMixed,
        n_qubits: n,
        rho: QOperator::identity(n).scale(c(1.0 / (1usize << n) as f64, 0.0)),
    }
}

/// Full-rank random state: normalized `G G^dag` with Ginibre `G`, which is
/// the single-party marginal of a Haar-like pure state on twice the qubits.
pub fn random_density(n: usize, seed: u64) -> Result<NamedState, StateError> {
    if n > 6 {
        return Err(StateError::TooLarge { n });
    }
    Ok(NamedState {
        spec: StateSpec::Random { seed },
        n_qubits: n,
        rho: testutil::random_density_matrix(n, seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, eigenvalues, min_eigenvalue, partial_trace, partial_transpose, permute_qubits};
    use approx::assert_abs_diff_eq;

    fn assert_valid_state(s: &NamedState) {
        assert!(min_eigenvalue(&s.rho).unwrap() >= -1e-12);
        assert_abs_diff_eq!(s.rho.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ghz_basics() {
        let g2 = ghz(2).unwrap();
        assert_valid_state(&g2);
        // Bell state |Phi+>
        assert_abs_diff_eq!(g2.rho.matrix()[(0, 3)].re, 0.5, epsilon = 1e-12);
        let g3 = ghz(3).unwrap();
        let purity = (g3.rho.matrix() * g3.rho.matrix()).trace().re;
        assert_abs_diff_eq!(purity, 1.0, epsilon = 1e-12);
        let marg = partial_trace(&ghz(4).unwrap().rho, &[0]).unwrap();
        assert!(marg.max_abs_diff(&QOperator::identity(1).scale(c(0.5, 0.0))) < 1e-12);
        assert!(ghz(1).is_err());
    }

    #[test]
    fn w_basics() {
        let w2 = w(2).unwrap();
        assert_valid_state(&w2);
        assert_abs_diff_eq!(w2.rho.matrix()[(1, 2)].re, 0.5, epsilon = 1e-12);
        let w3 = w(3).unwrap();
        let marg = partial_trace(&w3.rho, &[0]).unwrap();
        let eigs = eigenvalues(&marg).unwrap();
        assert_abs_diff_eq!(eigs[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigs[1], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn cluster_amplitudes_and_asymmetry() {
        let cl = cluster4();
        assert_valid_state(&cl);
        assert_abs_diff_eq!(cl.rho.matrix()[(0, 0)].re, 0.25, epsilon = 1e-12);
        // not invariant under swapping qubits 2 and 3 (0-indexed 1 and 2)
        let swapped = permute_qubits(&cl.rho, &[0, 2, 1, 3]).unwrap();
        assert!(swapped.max_abs_diff(&cl.rho) > 0.1);
    }

    #[test]
    fn upb_rank_and_ppt() {
        let u = upb3();
        assert_valid_state(&u);
        let eigs = eigenvalues(&u.rho).unwrap();
        let rank = eigs.iter().filter(|&&e| e > 1e-9).count();
        assert_eq!(rank, 4);
        for subset in [vec![0], vec![1], vec![2]] {
            let pt = partial_transpose(&u.rho, &subset).unwrap();
            assert!(min_eigenvalue(&pt).unwrap() >= -1e-10, "PPT across {subset:?}");
        }
        // invariant under cyclic relabeling
        let cyc = permute_qubits(&u.rho, &[1, 2, 0]).unwrap();
        assert!(cyc.max_abs_diff(&u.rho) < 1e-12);
    }

    #[test]
    fn ghz_w_permutation_invariance() {
        for state in [ghz(4).unwrap(), w(4).unwrap()] {
            for perm in [[1usize, 0, 2, 3], [3, 1, 2, 0], [1, 2, 3, 0]] {
                let p = permute_qubits(&state.rho, &perm).unwrap();
                assert!(p.max_abs_diff(&state.rho) < 1e-12);
            }
        }
    }

    #[test]
    fn random_states_are_reproducible_full_rank() {
        let a = random_density(3, 42).unwrap();
        let b = random_density(3, 42).unwrap();
        assert_eq!(a.rho.matrix(), b.rho.matrix());
        assert_valid_state(&a);
        for seed in 0..100 {
            let s = random_density(2, seed).unwrap();
            let purity = (s.rho.matrix() * s.rho.matrix()).trace().re;
            assert!(purity > 0.25 && purity <= 1.0, "purity {purity}");
        }
        assert!(random_density(7, 0).is_err());
    }

    #[test]
    fn spec_parsing_roundtrip() {
        for text in ["ghz", "w", "cluster", "upb", "random:17"] {
            let spec = StateSpec::parse(text).unwrap();
            assert_eq!(StateSpec::parse(&spec.to_string()).unwrap(), spec);
        }
        assert!(StateSpec::parse("bellx").is_err());
        assert!(StateSpec::parse("random:abc").is_err());
    }

    #[test]
    fn pauli_table_of_ghz_matches_hand_expansion() {
        let g = ghz(3).unwrap();
        let t = linalg::to_pauli(&g.rho).unwrap();
        // nonzero coefficients: III, ZZI, ZIZ, IZZ at +1/8; XXX +1/8; XYY, YXY, YYX -1/8
        let idx = |a: usize, b: usize, d: usize| a * 16 + b * 4 + d;
        assert_abs_diff_eq!(t.coeff(idx(0, 0, 0)), 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(t.coeff(idx(3, 3, 0)), 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(t.coeff(idx(1, 1, 1)), 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(t.coeff(idx(1, 2, 2)), -0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(t.coeff(idx(3, 3, 3)), 0.0, epsilon = 1e-12);
    }
}
