//! Statevector execution.
//!
//! Basis index convention: bit `i` of a basis index is the value of qubit
//! `i`. Two backends implement [`QuantumState`]:
//!
//! - [`StateVector`]: dense `2^N` amplitudes, capped at
//!   [`DEFAULT_MAX_QUBITS`] unless overridden.
//! - [`SparseState`]: hash map from basis strings to amplitudes. Suited to
//!   circuits with many clean ancillas, where classical gates permute basis
//!   states and only a few qubits ever leave the computational basis.

mod dense;
mod sparse;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use dense::StateVector;
pub use sparse::{BasisKey, SparseState};

use crate::circuit::{Circuit, Gate, Layer, QubitId};
use crate::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Amplitudes below this squared magnitude are dropped by the sparse backend.
pub(crate) const PRUNE_NORM_SQR: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityKind {
    FullState,
    ReducedRegister,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityResult {
    pub value: f64,
    pub kind: FidelityKind,
}

impl FidelityResult {
    pub(crate) fn new(value: f64, kind: FidelityKind) -> Self {
        debug_assert!((-1e-12..=1.0 + 1e-9).contains(&value), "fidelity {value}");
        FidelityResult { value, kind }
    }
}

pub trait QuantumState {
    fn qubit_count(&self) -> usize;

    fn apply_gate(&mut self, gate: &Gate) -> Result<()>;

    fn apply_layer(&mut self, layer: &Layer) -> Result<()> {
        layer.gates().iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Applies the layers in order. Gates inside a layer act on disjoint
    /// qubits, so their order does not matter.
    fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.qubit_count() != self.qubit_count() {
            return Err(Error::DimensionError(format!(
                "circuit has {} qubits, state has {}",
                circuit.qubit_count(),
                self.qubit_count()
            )));
        }
        circuit
            .layers()
            .iter()
            .try_for_each(|l| self.apply_layer(l))
    }

    fn norm_sqr(&self) -> f64;

    /// `⟨target| ρ_register |target⟩`, where `target` is indexed by the
    /// position of each qubit inside `register`.
    fn reduced_overlap(&self, register: &[QubitId], target: &StateVector)
        -> Result<FidelityResult>;

    /// Marginal distribution over `register`. Keys list the register's bits
    /// in register order, first qubit leftmost.
    fn register_distribution(&self, register: &[QubitId]) -> Result<BTreeMap<String, f64>>;

    /// Probability that `qubit` reads `value`, and the normalized state
    /// conditioned on it.
    fn postselect(&self, qubit: QubitId, value: bool) -> Result<(Self, f64)>
    where
        Self: Sized;
}

pub(crate) fn check_register(n: usize, register: &[QubitId]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for q in register {
        if q.0 >= n || !seen.insert(*q) {
            return Err(Error::InvalidRegister(format!(
                "qubit {q} is out of range for {n} qubits or repeated"
            )));
        }
    }
    Ok(())
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + carry
}

pub(crate) fn bitstring(bits: impl Iterator<Item = bool>) -> String {
    bits.map(|b| if b { '1' } else { '0' }).collect()
}

/// Probability of the all-zero outcome on `register`.
pub fn zero_probability<S: QuantumState>(state: &S, register: &[QubitId]) -> Result<f64> {
    let zero = "0".repeat(register.len());
    Ok(state
        .register_distribution(register)?
        .get(&zero)
        .copied()
        .unwrap_or(0.0))
}

#[cfg(test)]
mod tests;
