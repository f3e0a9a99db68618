//! SIC-POVM vector sets for dimensions 2, 4 and 8.
//!
//! The d = 2 set is the Weyl-Heisenberg orbit of the analytic fiducial with
//! Bloch vector `(1,1,1)/sqrt(3)`; its four Bloch vectors sit on alternating
//! cube diagonals. For d = 4 and d = 8 a high-precision fiducial is embedded
//! as a data file and expanded into the displacement orbit at load: the
//! single-qudit shift/clock orbit for d = 4, the three-qubit Pauli orbit
//! (Hoggar-type) for d = 8. Every set is verified on construction.

use crate::linalg::{c, CVector, C64};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SicError {
    #[error("unsupported SIC dimension {0} (supported: 2, 4, 8)")]
    UnsupportedDim(usize),
    #[error("fiducial data malformed: {0}")]
    BadData(String),
    #[error(
        "SIC verification failed for dim {dim}: overlap deviation {overlap_deviation:.3e}, \
         identity deviation {identity_deviation:.3e} (tolerance {tolerance:.1e})"
    )]
    VerificationFailed { dim: usize, overlap_deviation: f64, identity_deviation: f64, tolerance: f64 },
}

/// `d^2` unit vectors with pairwise squared overlaps `1/(d+1)`.
#[derive(Debug, Clone)]
pub struct SicSet {
    dim: usize,
    vectors: Vec<CVector>,
}

/// Deviations of a candidate set from the two defining SIC conditions.
#[derive(Debug, Clone, Copy)]
pub struct SicReport {
    pub dim: usize,
    /// max over pairs of | |<psi_i|psi_j>|^2 - 1/(d+1) |, plus norm drift
    pub overlap_deviation: f64,
    /// max entry of | (1/d) sum_i |psi_i><psi_i| - I |
    pub identity_deviation: f64,
}

pub const SIC_TOL: f64 = 1e-9;

impl SicSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &CVector {
        &self.vectors[i]
    }

    /// Depolarizing parameter of the measure-and-prepare sum over this set.
    pub fn depolarizing_q(&self) -> f64 {
        1.0 / (self.dim as f64 + 1.0)
    }
}

/// The verified SIC set for `dim in {2, 4, 8}` (cached after first load).
pub fn sic_vectors(dim: usize) -> Result<&'static SicSet, SicError> {
    static CACHE2: OnceLock<SicSet> = OnceLock::new();
    static CACHE4: OnceLock<SicSet> = OnceLock::new();
    static CACHE8: OnceLock<SicSet> = OnceLock::new();
    let (cache, build): (&'static OnceLock<SicSet>, fn() -> Result<SicSet, SicError>) = match dim {
        2 => (&CACHE2, build_d2),
        4 => (&CACHE4, build_d4),
        8 => (&CACHE8, build_d8),
        _ => return Err(SicError::UnsupportedDim(dim)),
    };
    if let Some(set) = cache.get() {
        return Ok(set);
    }
    let set = build()?;
    verify_strict(&set)?;
    Ok(cache.get_or_init(|| set))
}

/// Measure both SIC conditions; does not fail, callers decide on tolerance.
pub fn verify_sic(set: &SicSet) -> SicReport {
    let d = set.dim;
    let target = 1.0 / (d as f64 + 1.0);
    let mut overlap_dev: f64 = 0.0;
    for (i, vi) in set.vectors.iter().enumerate() {
        overlap_dev = overlap_dev.max((vi.norm() - 1.0).abs());
        for vj in set.vectors.iter().skip(i + 1) {
            let ov = vi.dotc(vj).norm_sqr();
            overlap_dev = overlap_dev.max((ov - target).abs());
        }
    }
    let mut frame = nalgebra::DMatrix::<C64>::zeros(d, d);
    for v in &set.vectors {
        frame += v * v.adjoint();
    }
    frame /= c(d as f64, 0.0);
    let mut id_dev: f64 = 0.0;
    for r in 0..d {
        for cc in 0..d {
            let expect = if r == cc { c(1.0, 0.0) } else { C64::default() };
            id_dev = id_dev.max((frame[(r, cc)] - expect).norm());
        }
    }
    SicReport { dim: d, overlap_deviation: overlap_dev, identity_deviation: id_dev }
}

fn verify_strict(set: &SicSet) -> Result<(), SicError> {
    let report = verify_sic(set);
    if report.overlap_deviation > SIC_TOL || report.identity_deviation > SIC_TOL {
        return Err(SicError::VerificationFailed {
            dim: set.dim,
            overlap_deviation: report.overlap_deviation,
            identity_deviation: report.identity_deviation,
            tolerance: SIC_TOL,
        });
    }
    Ok(())
}

fn build_d2() -> Result<SicSet, SicError> {
    let ct = ((1.0 + 1.0 / 3f64.sqrt()) / 2.0).sqrt();
    let st = ((1.0 - 1.0 / 3f64.sqrt()) / 2.0).sqrt();
    let phase = c(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    let fiducial = CVector::from_vec(vec![c(ct, 0.0), phase * c(st, 0.0)]);
    Ok(SicSet { dim: 2, vectors: qubit_pauli_orbit(&fiducial, 1) })
}

fn build_d4() -> Result<SicSet, SicError> {
    let fiducial = parse_fiducial(include_str!("../data/sic_fiducial_d4.txt"), 4)?;
    let mut vectors = Vec::with_capacity(16);
    for a in 0..4usize {
        for b in 0..4usize {
            let mut v = CVector::zeros(4);
            for k in 0..4usize {
                let phase = C64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * (b * k) as f64);
                v[(k + a) % 4] = phase * fiducial[k];
            }
            vectors.push(v);
        }
    }
    Ok(SicSet { dim: 4, vectors })
}

fn build_d8() -> Result<SicSet, SicError> {
    let fiducial = parse_fiducial(include_str!("../data/sic_fiducial_d8.txt"), 8)?;
    Ok(SicSet { dim: 8, vectors: qubit_pauli_orbit(&fiducial, 3) })
}

/// Orbit of a fiducial under per-qubit displacements `X^a Z^b`.
fn qubit_pauli_orbit(fiducial: &CVector, n_qubits: usize) -> Vec<CVector> {
    let dim = 1usize << n_qubits;
    let mut out = Vec::with_capacity(dim * dim);
    for code in 0..(dim * dim) {
        // two bits (a_t, b_t) per qubit
        let mut v = fiducial.clone();
        for t in 0..n_qubits {
            let a = (code >> (2 * t)) & 1;
            let b = (code >> (2 * t + 1)) & 1;
            let bit = 1usize << (n_qubits - 1 - t);
            if b == 1 {
                for (i, entry) in v.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *entry = -*entry;
                    }
                }
            }
            if a == 1 {
                for i in 0..dim {
                    if i & bit == 0 {
                        let j = i | bit;
                        let tmp = v[i];
                        v[i] = v[j];
                        v[j] = tmp;
                    }
                }
            }
        }
        out.push(v);
    }
    out
}

/// Data format: header `dim=<d>`, then `2 d` decimal numbers, one per line,
/// alternating real and imaginary parts of the fiducial components.
fn parse_fiducial(text: &str, dim: usize) -> Result<CVector, SicError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| SicError::BadData("empty file".into()))?;
    let declared: usize = header
        .trim()
        .strip_prefix("dim=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| SicError::BadData(format!("bad header '{header}'")))?;
    if declared != dim {
        return Err(SicError::BadData(format!("header dim {declared}, expected {dim}")));
    }
    let nums: Result<Vec<f64>, _> = lines.map(|l| l.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| SicError::BadData(format!("bad number: {e}")))?;
    if nums.len() != 2 * dim {
        return Err(SicError::BadData(format!("expected {} numbers, found {}", 2 * dim, nums.len())));
    }
    let v = CVector::from_fn(dim, |i, _| c(nums[2 * i], nums[2 * i + 1]));
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(SicError::BadData(format!("fiducial norm {norm} too far from 1")));
    }
    Ok(v * c(1.0 / norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supported_dims_verify() {
        for dim in [2usize, 4, 8] {
            let set = sic_vectors(dim).unwrap();
            assert_eq!(set.len(), dim * dim);
            let report = verify_sic(set);
            assert!(report.overlap_deviation < 1e-12, "dim {dim}: {report:?}");
            assert!(report.identity_deviation < 1e-9, "dim {dim}: {report:?}");
        }
        assert!(sic_vectors(3).is_err());
    }

    #[test]
    fn d2_overlaps_are_one_third() {
        let set = sic_vectors(2).unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let ov = set.vector(i).dotc(set.vector(j)).norm_sqr();
                assert!((ov - 1.0 / 3.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn d4_overlaps_are_one_fifth() {
        let set = sic_vectors(4).unwrap();
        for i in 0..16 {
            for j in (i + 1)..16 {
                let ov = set.vector(i).dotc(set.vector(j)).norm_sqr();
                assert!((ov - 0.2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perturbed_set_is_flagged() {
        let set = sic_vectors(2).unwrap();
        let mut vectors: Vec<CVector> = set.vectors().to_vec();
        vectors[0][0] += c(1e-3, 0.0);
        let bad = SicSet { dim: 2, vectors };
        let report = verify_sic(&bad);
        assert!(report.overlap_deviation > 1e-4 || report.identity_deviation > 1e-4);
    }

    #[test]
    fn malformed_data_is_rejected() {
        assert!(parse_fiducial("dim=4\n1.0\n", 4).is_err());
        assert!(parse_fiducial("dim=8\n", 4).is_err());
        assert!(parse_fiducial("", 4).is_err());
    }
}
