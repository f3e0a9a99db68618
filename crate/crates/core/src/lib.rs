//! Noise thresholds for multiqubit entanglement structure under local and
//! global depolarizing channels.
//!
//! The library constructs channel decompositions into entanglement-breaking
//! blocks composed with diagonal (Pauli-multiplier) maps, solves the
//! resulting feasibility problems over the diagonal-map parameters, bisects
//! for the largest noise parameter with a feasible decomposition, and
//! re-verifies every reported threshold from an explicit certificate.

pub mod channels;
pub mod detectors;
pub mod linalg;
pub mod partitions;
pub mod reference;
pub mod sic;
pub mod solver;
pub mod states;
pub mod testutil;

pub use channels::{ChannelSpec, NoiseKind};
pub use linalg::{PauliTable, QOperator};
pub use partitions::{Partition, PartitionCatalog};
pub use sic::SicSet;
pub use solver::{DissociationClass, FeasibilityCertificate, ThresholdResult};
pub use states::{NamedState, StateSpec};
