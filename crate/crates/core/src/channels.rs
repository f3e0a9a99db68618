//! Depolarizing channels, their Choi operators, and entanglement-breaking
//! measure-and-prepare blocks.

use crate::linalg::{
    self, c, contract_legs, from_pauli, pauli_weight, permute_qubits, tensor, to_pauli, CVector,
    QOperator,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("state has {got} qubits, channel expects {expect}")]
    QubitMismatch { expect: usize, got: usize },
    #[error("channel application broke trace preservation (drift {0:.3e})")]
    TraceDrift(f64),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseKind {
    /// One single-qubit depolarizing factor per qubit.
    Local,
    /// One depolarizing map on the full register.
    Global,
}

impl NoiseKind {
    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "local" => Some(Self::Local),
            "global" => Some(Self::Global),
            _ => None,
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Local => write!(f, "local"),
            Self::Global => write!(f, "global"),
        }
    }
}

/// Depolarizing channel `q Id + (1-q) Tr` on `n_qubits`, applied per qubit
/// (local) or to the whole register (global). Values of `q` outside the CPT
/// range are representable; [`ChannelSpec::is_cpt`] reports validity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: NoiseKind,
    pub n_qubits: usize,
    pub q: f64,
}

impl ChannelSpec {
    pub fn local(n_qubits: usize, q: f64) -> Self {
        Self { kind: NoiseKind::Local, n_qubits, q }
    }

    pub fn global(n_qubits: usize, q: f64) -> Self {
        Self { kind: NoiseKind::Global, n_qubits, q }
    }

    /// Elementary depolarizing dimension: 2 per factor (local) or `2^N`.
    pub fn depolarizing_dim(&self) -> usize {
        match self.kind {
            NoiseKind::Local => 2,
            NoiseKind::Global => 1 << self.n_qubits,
        }
    }

    /// CPT iff `q` lies in `[-(d^2-1)^{-1}, 1]` for the elementary dimension.
    pub fn is_cpt(&self) -> bool {
        let d = self.depolarizing_dim() as f64;
        let lower = -1.0 / (d * d - 1.0);
        self.q >= lower - 1e-15 && self.q <= 1.0 + 1e-15
    }

    /// Scale factor of a Pauli string with the given non-identity weight.
    pub fn pauli_transfer(&self, weight: usize) -> f64 {
        match self.kind {
            NoiseKind::Local => self.q.powi(weight as i32),
            NoiseKind::Global => {
                if weight == 0 {
                    1.0
                } else {
                    self.q
                }
            }
        }
    }
}

/// Apply the channel. Local noise runs through the Pauli-transfer picture
/// (weight-`w` strings scale by `q^w`); global noise mixes with the
/// maximally mixed state directly.
pub fn apply(ch: &ChannelSpec, rho: &QOperator) -> Result<QOperator, ChannelError> {
    if rho.n_qubits() != ch.n_qubits {
        return Err(ChannelError::QubitMismatch { expect: ch.n_qubits, got: rho.n_qubits() });
    }
    let out = match ch.kind {
        NoiseKind::Global => {
            let dim = rho.dim() as f64;
            let mixed = QOperator::identity(ch.n_qubits).scale(c(rho.trace().re * (1.0 - ch.q) / dim, 0.0));
            rho.scale(c(ch.q, 0.0)).add(&mixed)?
        }
        NoiseKind::Local => {
            let mut table = to_pauli(rho)?;
            let n = ch.n_qubits;
            for s in 0..table.coeffs().len() {
                let w = pauli_weight(n, s);
                let v = table.coeff(s) * ch.pauli_transfer(w);
                table.set(s, v);
            }
            from_pauli(&table)
        }
    };
    let drift = (out.trace().re - rho.trace().re).abs();
    if drift > 1e-10 {
        return Err(ChannelError::TraceDrift(drift));
    }
    Ok(out)
}

/// Local depolarizing via an explicit per-qubit Kraus mixture; the slow
/// independent route used to cross-check [`apply`].
pub fn apply_local_kraus(n_qubits: usize, q: f64, rho: &QOperator) -> Result<QOperator, ChannelError> {
    if rho.n_qubits() != n_qubits {
        return Err(ChannelError::QubitMismatch { expect: n_qubits, got: rho.n_qubits() });
    }
    // q Id + (1-q) Tr == (1-p) X + (p/3)(XxX + YxY + ZxZ) with p = 3(1-q)/4
    let p = 3.0 * (1.0 - q) / 4.0;
    let weights = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
    let mut out = rho.clone();
    for t in 0..n_qubits {
        let mut acc = QOperator::zeros(n_qubits);
        for (k, &wk) in weights.iter().enumerate() {
            let mut factors = Vec::with_capacity(n_qubits);
            for tt in 0..n_qubits {
                factors.push(if tt == t { k } else { 0 });
            }
            let s: usize = factors.iter().fold(0, |acc2, &d| acc2 * 4 + d);
            let pm = linalg::pauli_string_matrix(n_qubits, s);
            let conj = QOperator::new(pm.matrix() * out.matrix() * pm.matrix().adjoint())?;
            acc = acc.add(&conj.scale(c(wk, 0.0)))?;
        }
        out = acc;
    }
    Ok(out)
}

/// Maximally entangled reference `|Psi+><Psi+|` on system qubits `0..n`
/// followed by clone qubits `n..2n` (computational-basis pairing).
pub fn max_entangled(n_qubits: usize) -> QOperator {
    let dim = 1usize << n_qubits;
    let mut v = CVector::zeros(dim * dim);
    let amp = c(1.0 / (dim as f64).sqrt(), 0.0);
    for i in 0..dim {
        v[(i << n_qubits) | i] = amp;
    }
    QOperator::projector(&v).expect("power-of-two dim")
}

/// Choi operator on `2N` qubits, ordering `(system, clones)`. Built in the
/// Pauli-transfer picture: the multiplier acts on the system-side string.
pub fn choi(ch: &ChannelSpec) -> Result<QOperator, ChannelError> {
    let n = ch.n_qubits;
    let psi = max_entangled(n);
    let mut table = to_pauli(&psi)?;
    for s in 0..table.coeffs().len() {
        // system-side substring = leading n base-4 digits
        let sys = s / linalg::pow4(n);
        let w = pauli_weight(n, sys);
        let v = table.coeff(s) * ch.pauli_transfer(w);
        table.set(s, v);
    }
    Ok(from_pauli(&table))
}

/// Reconstruct the channel action from a Choi operator via
/// `Phi[X] = d tr_clones[ Omega (I (x) X^T) ]`; test oracle for [`choi`].
pub fn apply_via_choi(omega: &QOperator, x: &QOperator) -> Result<QOperator, ChannelError> {
    let n = x.n_qubits();
    let xt = partial_transpose_all(x)?;
    let big = tensor(&QOperator::identity(n), &xt);
    let prod = QOperator::new(omega.matrix() * big.matrix())?;
    let keep: Vec<usize> = (0..n).collect();
    let traced = linalg::partial_trace(&prod, &keep)?;
    Ok(traced.scale(c((1usize << n) as f64, 0.0)))
}

fn partial_transpose_all(x: &QOperator) -> Result<QOperator, ChannelError> {
    let all: Vec<usize> = (0..x.n_qubits()).collect();
    Ok(linalg::partial_transpose(x, &all)?)
}

/// Measure-and-prepare block on a subset of qubits: Kraus choices
/// `w |psi_i><psi_i| X |psi_i><psi_i|` with shared weight `w`.
#[derive(Debug, Clone)]
pub struct EBBlock {
    /// Ascending qubit positions the block acts on.
    pub target_qubits: Vec<usize>,
    pub vectors: Vec<CVector>,
    /// Shared preparation weight (for a SIC set, `1/d`).
    pub weight: f64,
}

impl EBBlock {
    pub fn from_sic(target_qubits: Vec<usize>, set: &crate::sic::SicSet) -> Self {
        let mut targets = target_qubits;
        targets.sort_unstable();
        assert_eq!(1usize << targets.len(), set.dim(), "SIC dim must match target count");
        Self {
            target_qubits: targets,
            vectors: set.vectors().to_vec(),
            weight: 1.0 / set.dim() as f64,
        }
    }

    /// POVM completeness drift: `|| sum_i w |psi_i><psi_i| - I ||_max`.
    pub fn completeness_deviation(&self) -> f64 {
        let dim = 1usize << self.target_qubits.len();
        let mut frame = nalgebra::DMatrix::zeros(dim, dim);
        for v in &self.vectors {
            frame += v * v.adjoint() * c(self.weight, 0.0);
        }
        let mut dev: f64 = 0.0;
        for r in 0..dim {
            for cc in 0..dim {
                let expect = if r == cc { c(1.0, 0.0) } else { c(0.0, 0.0) };
                dev = dev.max((frame[(r, cc)] - expect).norm());
            }
        }
        dev
    }

    /// One measure-and-prepare outcome: contract the target legs with the
    /// chosen vector, re-prepare it, weight by `w`.
    pub fn apply_choice(&self, choice: usize, x: &QOperator) -> Result<QOperator, ChannelError> {
        let v = &self.vectors[choice];
        let reduced = contract_legs(x, &self.target_qubits, v)?;
        let prep = QOperator::projector(v)?;
        // reassemble: prepared block on target legs, reduced on the rest
        let n = x.n_qubits();
        let kept: Vec<usize> = (0..n).filter(|t| !self.target_qubits.contains(t)).collect();
        let combined = tensor(&prep, &reduced).scale(c(self.weight, 0.0));
        // combined ordering: targets first, then kept; permute back
        let mut perm = vec![0usize; n];
        for (pos, &t) in self.target_qubits.iter().chain(kept.iter()).enumerate() {
            perm[pos] = t;
        }
        Ok(permute_qubits(&combined, &perm)?)
    }

    /// Sum over all choices (equals a depolarizing map on the targets when
    /// the vectors form a SIC).
    pub fn apply_sum(&self, x: &QOperator) -> Result<QOperator, ChannelError> {
        let mut acc = QOperator::zeros(x.n_qubits());
        for i in 0..self.vectors.len() {
            acc = acc.add(&self.apply_choice(i, x)?)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigenvalues, min_eigenvalue, partial_trace};
    use crate::sic::sic_vectors;
    use crate::states;
    use crate::testutil::random_density_matrix;
    use approx::assert_abs_diff_eq;

    #[test]
    fn global_q0_maps_to_max_mixed() {
        let rho = random_density_matrix(3, 5);
        let out = apply(&ChannelSpec::global(3, 0.0), &rho).unwrap();
        let mixed = QOperator::identity(3).scale(c(1.0 / 8.0, 0.0));
        assert!(out.max_abs_diff(&mixed) < 1e-12);
    }

    #[test]
    fn local_q1_is_identity() {
        let rho = random_density_matrix(2, 6);
        let out = apply(&ChannelSpec::local(2, 1.0), &rho).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn local_scales_ghz_pauli_coefficients() {
        let g = states::ghz(3).unwrap().rho;
        let q = 0.7;
        let out = apply(&ChannelSpec::local(3, q), &g).unwrap();
        let t = to_pauli(&out).unwrap();
        // ZZI string has weight 2: coefficient 1/8 scales by q^2
        assert_abs_diff_eq!(t.coeff(3 * 16 + 3 * 4), 0.125 * q * q, epsilon = 1e-12);
        assert_abs_diff_eq!(t.coeff(1 * 16 + 1 * 4 + 1), 0.125 * q * q * q, epsilon = 1e-12);
    }

    #[test]
    fn pauli_transfer_values() {
        assert_abs_diff_eq!(ChannelSpec::local(4, 0.5).pauli_transfer(0), 1.0);
        assert_abs_diff_eq!(ChannelSpec::local(4, 0.5).pauli_transfer(3), 0.125);
        assert_abs_diff_eq!(ChannelSpec::global(4, 0.3).pauli_transfer(2), 0.3);
        assert_abs_diff_eq!(ChannelSpec::global(4, 0.3).pauli_transfer(0), 1.0);
    }

    #[test]
    fn cpt_ranges() {
        assert!(ChannelSpec::global(2, -1.0 / 15.0).is_cpt());
        assert!(!ChannelSpec::global(2, -0.1).is_cpt());
        assert!(ChannelSpec::local(5, 1.0).is_cpt());
        assert!(!ChannelSpec::local(5, 1.01).is_cpt());
        assert!(ChannelSpec::local(5, -1.0 / 3.0).is_cpt());
    }

    #[test]
    fn choi_of_identity_is_max_entangled() {
        let omega = choi(&ChannelSpec::local(1, 1.0)).unwrap();
        assert!(omega.max_abs_diff(&max_entangled(1)) < 1e-12);
    }

    #[test]
    fn choi_boundary_has_zero_eigenvalue() {
        for n in [1usize, 2] {
            let d = (1usize << n) as f64;
            let ch = ChannelSpec::global(n, -1.0 / (d * d - 1.0));
            let omega = choi(&ch).unwrap();
            let min = min_eigenvalue(&omega).unwrap();
            assert!(min.abs() < 1e-9, "n={n}: min eigenvalue {min}");
        }
    }

    #[test]
    fn choi_psd_iff_cpt_near_boundaries() {
        for n in [1usize, 2] {
            let d = (1usize << n) as f64;
            let lower = -1.0 / (d * d - 1.0);
            for (q, expect) in [
                (lower + 1e-6, true),
                (lower - 1e-6, false),
                (1.0 - 1e-6, true),
                (1.0 + 1e-6, false),
            ] {
                let ch = ChannelSpec::global(n, q);
                let omega = choi(&ch).unwrap();
                let psd = min_eigenvalue(&omega).unwrap() >= -1e-9;
                assert_eq!(psd, expect, "n={n} q={q}");
                assert_eq!(ch.is_cpt(), expect, "spec range n={n} q={q}");
            }
        }
    }

    #[test]
    fn choi_reconstructs_channel_action() {
        for ch in [ChannelSpec::local(2, 0.6), ChannelSpec::global(2, 0.35)] {
            let omega = choi(&ch).unwrap();
            let rho = random_density_matrix(2, 11);
            let direct = apply(&ch, &rho).unwrap();
            let via = apply_via_choi(&omega, &rho).unwrap();
            assert!(direct.max_abs_diff(&via) < 1e-10, "{ch:?}");
        }
    }

    #[test]
    fn local_choi_factorizes() {
        let ch = ChannelSpec::local(2, 0.4);
        let omega = choi(&ch).unwrap();
        let omega1 = choi(&ChannelSpec::local(1, 0.4)).unwrap();
        // (A, B, A', B') from factor product (A, A') (x) (B, B')
        let prod = tensor(&omega1, &omega1);
        let interleaved = permute_qubits(&prod, &[0, 2, 1, 3]).unwrap();
        assert!(omega.max_abs_diff(&interleaved) < 1e-12);
    }

    #[test]
    fn local_apply_matches_kraus_mixture() {
        for q in [0.9, 0.5, 0.1, -0.2] {
            let rho = random_density_matrix(3, 21);
            let fast = apply(&ChannelSpec::local(3, q), &rho).unwrap();
            let slow = apply_local_kraus(3, q, &rho).unwrap();
            assert!(fast.max_abs_diff(&slow) < 1e-10, "q={q}");
        }
    }

    #[test]
    fn apply_preserves_trace_and_hermiticity() {
        for ch in [ChannelSpec::local(3, 0.37), ChannelSpec::global(3, 0.81)] {
            let rho = random_density_matrix(3, 9);
            let out = apply(&ch, &rho).unwrap();
            assert_abs_diff_eq!(out.trace().re, 1.0, epsilon = 1e-12);
            assert!(out.is_hermitian(1e-12));
        }
    }

    #[test]
    fn eb_block_completeness_and_choices() {
        let set = sic_vectors(2).unwrap();
        let block = EBBlock::from_sic(vec![0], set);
        assert!(block.completeness_deviation() < 1e-12);

        // summing over choices keeps unit trace
        let rho = QOperator::identity(2).scale(c(0.25, 0.0));
        let summed = block.apply_sum(&rho).unwrap();
        assert_abs_diff_eq!(summed.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eb_sum_is_depolarizing_for_all_sics() {
        for (dim, nq) in [(2usize, 1usize), (4, 2), (8, 3)] {
            let set = sic_vectors(dim).unwrap();
            let block = EBBlock::from_sic((0..nq).collect(), set);
            let rho = random_density_matrix(nq, 31 + nq as u64);
            let summed = block.apply_sum(&rho).unwrap();
            let q = 1.0 / (dim as f64 + 1.0);
            let dep = apply(&ChannelSpec::global(nq, q), &rho).unwrap();
            assert!(summed.max_abs_diff(&dep) < 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn eb_choi_identity_on_embedded_block() {
        // acting on one qubit of a larger register, summed choices match the
        // embedded depolarizing map
        let set = sic_vectors(2).unwrap();
        let block = EBBlock::from_sic(vec![1], set);
        let rho = random_density_matrix(2, 77);
        let summed = block.apply_sum(&rho).unwrap();
        // depolarize qubit 1 only: scale Pauli strings with non-identity on 1
        let mut table = to_pauli(&rho).unwrap();
        for s in 0..16 {
            if linalg::pauli_digit(2, s, 1) != 0 {
                table.set(s, table.coeff(s) / 3.0);
            }
        }
        let expect = from_pauli(&table);
        assert!(summed.max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn eb_projection_example() {
        let bell = states::ghz(2).unwrap().rho;
        let mut v0 = CVector::zeros(2);
        v0[0] = c(1.0, 0.0);
        let reduced = contract_legs(&bell, &[0], &v0).unwrap();
        let mut expect = nalgebra::DMatrix::zeros(2, 2);
        expect[(0, 0)] = c(0.5, 0.0);
        assert!(reduced.max_abs_diff(&QOperator::new(expect).unwrap()) < 1e-12);
    }

    #[test]
    fn marginal_of_choi_is_maximally_mixed() {
        let ch = ChannelSpec::global(2, 0.5);
        let omega = choi(&ch).unwrap();
        let clones = partial_trace(&omega, &[2, 3]).unwrap();
        let mixed = QOperator::identity(2).scale(c(0.25, 0.0));
        assert!(clones.max_abs_diff(&mixed) < 1e-12);
        let eigs = eigenvalues(&omega).unwrap();
        assert!(eigs[0] >= -1e-12);
    }
}
