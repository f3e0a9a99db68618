//! Published reference thresholds used to annotate reproduced tables.
//!
//! Values are lower bounds within the same decomposition family, reported
//! to three decimals; reproduction may legitimately exceed them when the
//! feasibility search finds a better parameter point, so comparisons treat
//! undershoot and overshoot asymmetrically.

use crate::channels::NoiseKind;
use crate::solver::DissociationClass;
use crate::states::StateSpec;

/// Which table column a cell belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Class(DissociationClass),
    /// NPT threshold for the most asymmetric cut `(1, N-1)`.
    NptAsym,
    /// NPT threshold for the balanced cut `(N/2, N/2)`.
    NptSym,
}

/// Input selector for a row: a named state or the all-states mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowInput {
    State(StateSpec),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefValue {
    Threshold(f64),
    /// Printed as an empty-set marker: no NPT anywhere in `[0, 1]`.
    NeverNpt,
}

#[derive(Debug, Clone, Copy)]
pub struct ReferenceCell {
    pub noise: NoiseKind,
    pub n: usize,
    pub input: RowInput,
    pub column: Column,
    pub value: RefValue,
}

const fn cls(
    noise: NoiseKind,
    n: usize,
    input: RowInput,
    class: DissociationClass,
    value: f64,
) -> ReferenceCell {
    ReferenceCell { noise, n, input, column: Column::Class(class), value: RefValue::Threshold(value) }
}

const fn npt(noise: NoiseKind, n: usize, input: RowInput, sym: bool, value: RefValue) -> ReferenceCell {
    ReferenceCell {
        noise,
        n,
        input,
        column: if sym { Column::NptSym } else { Column::NptAsym },
        value,
    }
}

use DissociationClass::{Ea, HalfClusters as Hc, HalfPlusSingles as Hps, OneDetached as Dge, PairClusters as Pc};
use NoiseKind::{Global, Local};
use RowInput::{All, State};
use StateSpec::{Cluster4, Ghz, Upb3, W};

pub const REFERENCE_CELLS: &[ReferenceCell] = &[
    // local noise, 3 qubits
    cls(Local, 3, State(Ghz), Ea, 0.490),
    cls(Local, 3, State(Ghz), Dge, 0.713),
    npt(Local, 3, State(Ghz), false, RefValue::Threshold(0.557)),
    cls(Local, 3, State(W), Ea, 0.485),
    cls(Local, 3, State(W), Dge, 0.686),
    npt(Local, 3, State(W), false, RefValue::Threshold(0.576)),
    cls(Local, 3, State(Upb3), Ea, 0.698),
    cls(Local, 3, State(Upb3), Dge, 0.852),
    npt(Local, 3, State(Upb3), false, RefValue::NeverNpt),
    cls(Local, 3, All, Ea, 0.477),
    cls(Local, 3, All, Dge, 0.650),
    // local noise, 4 qubits
    cls(Local, 4, State(Ghz), Ea, 0.453),
    cls(Local, 4, State(Ghz), Pc, 0.548),
    cls(Local, 4, State(Ghz), Hps, 0.553),
    cls(Local, 4, State(Ghz), Hc, 0.548),
    cls(Local, 4, State(Ghz), Dge, 0.751),
    npt(Local, 4, State(Ghz), false, RefValue::Threshold(0.578)),
    npt(Local, 4, State(Ghz), true, RefValue::Threshold(0.512)),
    cls(Local, 4, State(W), Ea, 0.447),
    cls(Local, 4, State(W), Pc, 0.473),
    cls(Local, 4, State(W), Hps, 0.581),
    cls(Local, 4, State(W), Hc, 0.473),
    cls(Local, 4, State(W), Dge, 0.756),
    npt(Local, 4, State(W), false, RefValue::Threshold(0.585)),
    npt(Local, 4, State(W), true, RefValue::Threshold(0.548)),
    cls(Local, 4, State(Cluster4), Ea, 0.444),
    cls(Local, 4, State(Cluster4), Pc, 0.478),
    cls(Local, 4, State(Cluster4), Hps, 0.574),
    cls(Local, 4, State(Cluster4), Hc, 0.478),
    cls(Local, 4, State(Cluster4), Dge, 0.742),
    npt(Local, 4, State(Cluster4), false, RefValue::Threshold(0.532)),
    npt(Local, 4, State(Cluster4), true, RefValue::Threshold(0.550)),
    cls(Local, 4, All, Ea, 0.444),
    cls(Local, 4, All, Pc, 0.472),
    cls(Local, 4, All, Hps, 0.550),
    cls(Local, 4, All, Hc, 0.472),
    cls(Local, 4, All, Dge, 0.715),
    // local noise, 6 qubits
    cls(Local, 6, State(Ghz), Ea, 0.414),
    cls(Local, 6, State(Ghz), Pc, 0.433),
    cls(Local, 6, State(Ghz), Hps, 0.591),
    cls(Local, 6, State(Ghz), Hc, 0.530),
    cls(Local, 6, State(Ghz), Dge, 0.826),
    npt(Local, 6, State(Ghz), false, RefValue::Threshold(0.638)),
    npt(Local, 6, State(Ghz), true, RefValue::Threshold(0.490)),
    // global noise, 3 qubits
    cls(Global, 3, State(Ghz), Ea, 0.147),
    cls(Global, 3, State(Ghz), Dge, 0.402),
    npt(Global, 3, State(Ghz), false, RefValue::Threshold(0.200)),
    cls(Global, 3, State(W), Ea, 0.125),
    cls(Global, 3, State(W), Dge, 0.317),
    npt(Global, 3, State(W), false, RefValue::Threshold(0.210)),
    cls(Global, 3, State(Upb3), Ea, 0.400),
    cls(Global, 3, State(Upb3), Dge, 0.690),
    npt(Global, 3, State(Upb3), false, RefValue::NeverNpt),
    cls(Global, 3, All, Ea, 0.111),
    cls(Global, 3, All, Dge, 0.289),
    // global noise, 4 qubits
    cls(Global, 4, State(Ghz), Ea, 0.062),
    cls(Global, 4, State(Ghz), Pc, 0.202),
    cls(Global, 4, State(Ghz), Hps, 0.111),
    cls(Global, 4, State(Ghz), Hc, 0.202),
    cls(Global, 4, State(Ghz), Dge, 0.262),
    npt(Global, 4, State(Ghz), false, RefValue::Threshold(0.112)),
    npt(Global, 4, State(Ghz), true, RefValue::Threshold(0.112)),
    cls(Global, 4, State(W), Ea, 0.048),
    cls(Global, 4, State(W), Pc, 0.123),
    cls(Global, 4, State(W), Hps, 0.124),
    cls(Global, 4, State(W), Hc, 0.123),
    cls(Global, 4, State(W), Dge, 0.256),
    npt(Global, 4, State(W), false, RefValue::Threshold(0.127)),
    npt(Global, 4, State(W), true, RefValue::Threshold(0.112)),
    cls(Global, 4, State(Cluster4), Ea, 0.052),
    cls(Global, 4, State(Cluster4), Pc, 0.123),
    cls(Global, 4, State(Cluster4), Hps, 0.109),
    cls(Global, 4, State(Cluster4), Hc, 0.123),
    cls(Global, 4, State(Cluster4), Dge, 0.229),
    npt(Global, 4, State(Cluster4), false, RefValue::Threshold(0.112)),
    npt(Global, 4, State(Cluster4), true, RefValue::Threshold(0.112)),
    cls(Global, 4, All, Ea, 0.047),
    cls(Global, 4, All, Pc, 0.121),
    cls(Global, 4, All, Hps, 0.107),
    cls(Global, 4, All, Hc, 0.121),
    cls(Global, 4, All, Dge, 0.184),
    // global noise, 6 qubits
    cls(Global, 6, State(Ghz), Ea, 0.011),
    cls(Global, 6, State(Ghz), Pc, 0.034),
    cls(Global, 6, State(Ghz), Hps, 0.032),
    cls(Global, 6, State(Ghz), Hc, 0.046),
    cls(Global, 6, State(Ghz), Dge, 0.131),
    npt(Global, 6, State(Ghz), false, RefValue::Threshold(0.031)),
    npt(Global, 6, State(Ghz), true, RefValue::Threshold(0.031)),
];

/// Look up a reference cell.
pub fn lookup(noise: NoiseKind, n: usize, input: RowInput, column: Column) -> Option<RefValue> {
    REFERENCE_CELLS
        .iter()
        .find(|c| c.noise == noise && c.n == n && c.input == input && c.column == column)
        .map(|c| c.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        // per noise: 3+3+3+2 (n=3) + 5+5+5+5 (class cells n=4) + 5 (n=6)
        // + 2+2+2 npt (n=4) + 2 npt (n=6) + 1 + 1 + 1 npt (n=3)
        let local = REFERENCE_CELLS.iter().filter(|c| c.noise == NoiseKind::Local).count();
        let global = REFERENCE_CELLS.iter().filter(|c| c.noise == NoiseKind::Global).count();
        assert_eq!(local, global);
        assert_eq!(local + global, REFERENCE_CELLS.len());
        assert!(lookup(NoiseKind::Local, 3, RowInput::State(StateSpec::Upb3), Column::NptAsym)
            .is_some_and(|v| v == RefValue::NeverNpt));
        assert!(lookup(NoiseKind::Global, 6, RowInput::State(StateSpec::Ghz), Column::Class(DissociationClass::Ea))
            .is_some_and(|v| matches!(v, RefValue::Threshold(x) if (x - 0.011).abs() < 1e-12)));
    }
}
