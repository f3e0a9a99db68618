//! Feasibility certificates: serialization and independent verification.
//!
//! A certificate pins the class, size, noise, input, the noise level `q`
//! and the full diagonal-map parameter table. Verification rebuilds
//! everything from scratch: (i) the decomposition's Pauli multiplier is
//! expanded string by string over the elementary blocks and compared with
//! the target channel transfer; (ii) every (block, SIC-choice) constraint is
//! re-contracted at the certified parameters; (iii) in the all-states mode
//! the diagonal map's Choi operator is re-screened for block positivity.

use super::allmode::{self, SeesawOptions};
use super::constraints::evaluate_worst_eigenvalue;
use super::system::build_system;
use super::{DissociationClass, FTable, SolverError};
use crate::channels::NoiseKind;
use crate::linalg::{pauli_digit, pauli_weight, pow4};
use crate::partitions::binomial;
use crate::states::StateSpec;
use serde::{Deserialize, Serialize};

/// Pauli-transfer identity tolerance for accepting a certificate.
pub const TRANSFER_TOL: f64 = 1e-8;
/// Constraint matrices must have eigenvalues above `-CONSTRAINT_TOL`.
pub const CONSTRAINT_TOL: f64 = 1e-9;

pub const CERTIFICATE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CertificateInput {
    /// A concrete input state.
    State { state: StateSpec },
    /// Universally quantified input; constraints are Choi block-positivity.
    All,
}

impl std::fmt::Display for CertificateInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::State { state } => write!(f, "{state}"),
            Self::All => write!(f, "all"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FEntry {
    pub s: usize,
    pub t: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `|| A f - b(q) ||_inf` over the weight-matching equations.
    pub equality: f64,
    /// Max per-string deviation of the expanded decomposition transfer.
    pub transfer: f64,
    /// Smallest eigenvalue over all re-enumerated constraints (state mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_constraint_eigenvalue: Option<f64>,
    /// Seesaw block-positivity estimate (all-states mode; heuristic).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seesaw_lower_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub seed: u64,
    pub resolution: f64,
    pub dedup: bool,
    pub probes: usize,
    pub wall_time_ms: u128,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCertificate {
    pub format_version: u32,
    pub class: DissociationClass,
    pub n_qubits: usize,
    pub noise: NoiseKind,
    #[serde(flatten)]
    pub input: CertificateInput,
    pub q: f64,
    pub f_values: Vec<FEntry>,
    pub residuals: ResidualReport,
    pub solver: SolverMeta,
}

impl FeasibilityCertificate {
    pub fn f_table(&self) -> FTable {
        let domain: Vec<(usize, usize)> = self.f_values.iter().map(|e| (e.s, e.t)).collect();
        let values: Vec<f64> = self.f_values.iter().map(|e| e.value).collect();
        FTable::new(domain, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residuals: ResidualReport,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Combined Pauli multiplier of the full decomposition on one string,
/// expanded block by block. This is the verification route: it never touches
/// the aggregated equation coefficients.
///
/// Attenuations per measured region: `1/3` per non-identity single-qubit
/// digit (qubit SIC blocks), `1/(2^{n/2}+1)` for a non-identity half-register
/// substring (half-register SIC block), and `5^{-ceil(r/2)}` for `r`
/// non-identity digits outside the kept pair (pair SIC blocks; each kept
/// pair counted once, with its measured remainder packed into the fewest
/// affected pairs).
pub(crate) fn expansion_multiplier(
    class: DissociationClass,
    n: usize,
    f: &FTable,
    string: usize,
) -> f64 {
    let w = pauli_weight(n, string);
    let zeros = n - w;
    let digit_zero = |t: usize| pauli_digit(n, string, t) == 0;
    match class {
        DissociationClass::Ea => {
            let mut total = 0.0;
            for m in 0..n {
                if digit_zero(m) {
                    total += 3f64.powi(-(w as i32)) * f.get((1, zeros - 1));
                } else {
                    total += 3f64.powi(-(w as i32 - 1)) * f.get((0, zeros));
                }
            }
            total / n as f64
        }
        DissociationClass::OneDetached => {
            let mut total = 0.0;
            for m in 0..n {
                if digit_zero(m) {
                    total += f.get((1, zeros - 1));
                } else {
                    total += f.get((0, zeros)) / 3.0;
                }
            }
            total / n as f64
        }
        DissociationClass::PairClusters => {
            let mut total = 0.0;
            for a in 0..n {
                for b in (a + 1)..n {
                    let zk = digit_zero(a) as usize + digit_zero(b) as usize;
                    let outside = w - (2 - zk);
                    let affected = outside.div_ceil(2);
                    total += 5f64.powi(-(affected as i32)) * f.get((zk, zeros - zk));
                }
            }
            total / binomial(n, 2) as f64
        }
        DissociationClass::HalfPlusSingles => {
            let h = n / 2;
            let mut total = 0.0;
            for kept in super::subsets(n, h) {
                let zeros_kept = kept.iter().filter(|&&t| digit_zero(t)).count();
                let zeros_eb = zeros - zeros_kept;
                let nonid_eb = h - zeros_eb;
                total += 3f64.powi(-(nonid_eb as i32)) * f.get((zeros_eb, zeros_kept));
            }
            total / binomial(n, h) as f64
        }
        DissociationClass::HalfClusters => {
            let h = n / 2;
            let mut total = 0.0;
            for measured in super::subsets(n, h) {
                let zeros_eb = measured.iter().filter(|&&t| digit_zero(t)).count();
                let zeros_kept = zeros - zeros_eb;
                let att = if zeros_eb == h { 1.0 } else { 1.0 / ((1usize << h) as f64 + 1.0) };
                total += att * f.get((zeros_eb, zeros_kept));
            }
            total / binomial(n, h) as f64
        }
    }
}

/// Max per-string deviation between the expanded decomposition and the
/// target channel's Pauli transfer.
pub fn transfer_residual(
    class: DissociationClass,
    n: usize,
    noise: NoiseKind,
    q: f64,
    f: &FTable,
) -> f64 {
    let mut worst: f64 = 0.0;
    for s in 0..pow4(n) {
        let w = pauli_weight(n, s);
        let target = match noise {
            NoiseKind::Local => q.powi(w as i32),
            NoiseKind::Global => {
                if w == 0 {
                    1.0
                } else {
                    q
                }
            }
        };
        worst = worst.max((expansion_multiplier(class, n, f, s) - target).abs());
    }
    worst
}

/// Recompute every residual of a certificate from scratch.
pub fn verify_certificate(cert: &FeasibilityCertificate) -> Result<VerificationReport, SolverError> {
    verify_certificate_with(cert, &SeesawOptions { restarts: 200, ..Default::default() })
}

pub fn verify_certificate_with(
    cert: &FeasibilityCertificate,
    seesaw: &SeesawOptions,
) -> Result<VerificationReport, SolverError> {
    let class = cert.class;
    let n = cert.n_qubits;
    class.validate(n)?;
    let f = cert.f_table();
    let mut failures = Vec::new();

    let system = build_system(class, n, cert.noise)?;
    let equality = if f.domain() == system.unknowns.as_slice() {
        system.residual(&f, cert.q)
    } else {
        failures.push("parameter table domain does not match the class profile domain".into());
        f64::INFINITY
    };

    let transfer = transfer_residual(class, n, cert.noise, cert.q, &f);
    if transfer > TRANSFER_TOL {
        failures.push(format!("transfer residual {transfer:.3e} exceeds {TRANSFER_TOL:.1e}"));
    }

    let mut worst_constraint = None;
    let mut seesaw_bound = None;
    match &cert.input {
        CertificateInput::State { state } => {
            let named = state.realize(n).map_err(|e| SolverError::CertificateRejected(e.to_string()))?;
            let worst = evaluate_worst_eigenvalue(class, n, &named.rho, &f)?;
            if worst < -CONSTRAINT_TOL {
                failures.push(format!(
                    "worst constraint eigenvalue {worst:.3e} below -{CONSTRAINT_TOL:.1e}"
                ));
            }
            worst_constraint = Some(worst);
        }
        CertificateInput::All => {
            let problem = allmode::BlockPositivityProblem::build(class, n)?;
            let report = problem.screen(&f, seesaw);
            if report.lower_bound < -CONSTRAINT_TOL {
                failures.push(format!(
                    "seesaw block-positivity estimate {:.3e} below -{CONSTRAINT_TOL:.1e}",
                    report.lower_bound
                ));
            }
            seesaw_bound = Some(report.lower_bound);
        }
    }

    Ok(VerificationReport {
        residuals: ResidualReport {
            equality,
            transfer,
            worst_constraint_eigenvalue: worst_constraint,
            seesaw_lower_bound: seesaw_bound,
        },
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::system::solve_equalities;

    fn trivial_certificate() -> FeasibilityCertificate {
        // q = 0, global: the delta-on-identity table solves the equations
        let class = DissociationClass::Ea;
        let n = 3;
        let domain = class.profile_domain(n);
        let f_values: Vec<FEntry> = domain
            .iter()
            .map(|&(s, t)| FEntry { s, t, value: if (s, t) == (1, n - 1) { 1.0 } else { 0.0 } })
            .collect();
        FeasibilityCertificate {
            format_version: CERTIFICATE_FORMAT_VERSION,
            class,
            n_qubits: n,
            noise: NoiseKind::Global,
            input: CertificateInput::State { state: StateSpec::Ghz },
            q: 0.0,
            f_values,
            residuals: ResidualReport {
                equality: 0.0,
                transfer: 0.0,
                worst_constraint_eigenvalue: None,
                seesaw_lower_bound: None,
            },
            solver: SolverMeta {
                seed: 0,
                resolution: 1e-3,
                dedup: true,
                probes: 0,
                wall_time_ms: 0,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    #[test]
    fn trivial_certificate_verifies() {
        let cert = trivial_certificate();
        let report = verify_certificate(&cert).unwrap();
        assert!(report.passed, "{:?}", report.failures);
        assert!(report.residuals.transfer < 1e-14);
        assert!(report.residuals.worst_constraint_eigenvalue.unwrap() >= -1e-15);
    }

    #[test]
    fn perturbed_f_entry_is_rejected() {
        let mut cert = trivial_certificate();
        cert.f_values[0].value += 1e-3;
        let report = verify_certificate(&cert).unwrap();
        assert!(!report.passed);
        assert!(report.residuals.transfer > 1e-5);
    }

    #[test]
    fn tampered_q_is_rejected() {
        let mut cert = trivial_certificate();
        cert.q = 0.2;
        let report = verify_certificate(&cert).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn json_roundtrip() {
        let cert = trivial_certificate();
        let text = cert.to_json();
        let back = FeasibilityCertificate::from_json(&text).unwrap();
        assert_eq!(cert, back);
    }

    /// Any equality solution must reproduce the channel transfer exactly:
    /// the expansion and the equation rows are two routes to one identity.
    #[test]
    fn equality_solutions_have_zero_transfer_residual() {
        for class in crate::solver::ALL_CLASSES {
            for noise in [NoiseKind::Local, NoiseKind::Global] {
                let n = if class.requires_even() { 4 } else { 3 };
                let system = build_system(class, n, noise).unwrap();
                let sol = solve_equalities(&system);
                for q in [0.15, 0.6] {
                    let fp = sol.particular(&system, q).unwrap();
                    let f = FTable::new(system.unknowns.clone(), fp.iter().copied().collect());
                    let resid = transfer_residual(class, n, noise, q, &f);
                    assert!(resid < 1e-12, "{class} {noise} q={q}: {resid}");
                }
            }
        }
    }
}
