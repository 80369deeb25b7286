//! Circuit intermediate representation.
//!
//! A [`Circuit`] is a list of explicit [`Layer`]s. Gates inside a layer act
//! on pairwise disjoint qubits, so the layer count is the circuit depth up
//! to the model's accounting rules: single-qubit gates are free, global CZ
//! and FAN-OUT gates cost one layer, and in QAC0 a (log-width) FAN-OUT costs
//! a configurable constant standing in for the exact CZ-based fan-out gadget.

mod alloc;
mod gate;
pub mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use alloc::QubitAllocator;
pub use gate::{
    basis_change_to, c, dagger, identity2, is_unitary, mat_mul, Gate, Matrix2, OracleGate,
    Polarity, Qubit1, QubitId,
};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Qac0,
    Qac0f,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Qac0 => "qac0",
            Model::Qac0f => "qac0f",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qac0" => Ok(Model::Qac0),
            "qac0f" => Ok(Model::Qac0f),
            other => Err(Error::Parse(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    Ancilla,
    Flag,
    Output,
    Selection,
    Block(usize),
}

impl Role {
    /// Qubits that are not part of the prepared state or the computed output.
    pub fn is_ancilla(self) -> bool {
        !matches!(self, Role::System | Role::Output)
    }
}

/// Role of every qubit plus named, pairwise disjoint register groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterMap {
    roles: Vec<Role>,
    groups: BTreeMap<String, Vec<QubitId>>,
}

impl RegisterMap {
    pub fn new(qubit_count: usize, default: Role) -> Self {
        RegisterMap {
            roles: vec![default; qubit_count],
            groups: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, q: QubitId) -> Role {
        self.roles[q.0]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn set_role(&mut self, q: QubitId, role: Role) -> Result<()> {
        let slot = self
            .roles
            .get_mut(q.0)
            .ok_or_else(|| Error::InvalidRegister(format!("qubit {q} out of range")))?;
        *slot = role;
        Ok(())
    }

    /// Adds a named group, tagging its qubits with `role`.
    pub fn add_group(&mut self, name: &str, qubits: &[QubitId], role: Role) -> Result<()> {
        if self.groups.contains_key(name) {
            return Err(Error::InvalidRegister(format!("duplicate group `{name}`")));
        }
        let taken: BTreeSet<QubitId> = self.groups.values().flatten().copied().collect();
        for &q in qubits {
            if taken.contains(&q) {
                return Err(Error::InvalidRegister(format!(
                    "qubit {q} of `{name}` already belongs to another group"
                )));
            }
            self.set_role(q, role)?;
        }
        self.groups.insert(name.to_string(), qubits.to_vec());
        Ok(())
    }

    pub fn group(&self, name: &str) -> Option<&[QubitId]> {
        self.groups.get(name).map(Vec::as_slice)
    }

    pub fn groups(&self) -> &BTreeMap<String, Vec<QubitId>> {
        &self.groups
    }

    pub fn with_role(&self, role: Role) -> Vec<QubitId> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == role)
            .map(|(i, _)| QubitId(i))
            .collect()
    }

    /// Groups are disjoint and in range.
    pub fn validate(&self) -> Result<()> {
        let mut taken = BTreeSet::new();
        for (name, qs) in &self.groups {
            for q in qs {
                if q.0 >= self.roles.len() || !taken.insert(*q) {
                    return Err(Error::InvalidRegister(format!(
                        "group `{name}`: qubit {q} out of range or shared"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ancillas(&self) -> Vec<QubitId> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_ancilla())
            .map(|(i, _)| QubitId(i))
            .collect()
    }
}

/// A set of gates on pairwise disjoint qubits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layer {
    gates: Vec<Gate>,
    occupied: BTreeSet<QubitId>,
}

impl Layer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_gates(gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut layer = Layer::new();
        for g in gates {
            layer.push(g)?;
        }
        Ok(layer)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate()?;
        let qubits = gate.qubits();
        if let Some(q) = qubits.iter().find(|q| self.occupied.contains(q)) {
            return Err(Error::InvalidGate(format!(
                "qubit {q} is already used in this layer"
            )));
        }
        self.occupied.extend(qubits);
        self.gates.push(gate);
        Ok(())
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn occupies(&self, q: QubitId) -> bool {
        self.occupied.contains(&q)
    }

    /// Absorbs another layer acting on disjoint qubits.
    pub fn merge(&mut self, other: Layer) -> Result<()> {
        for g in other.gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn inverse(&self) -> Layer {
        Layer {
            gates: self.gates.iter().map(Gate::inverse).collect(),
            occupied: self.occupied.clone(),
        }
    }
}

/// How [`Circuit::depth`] charges fan-out and oracle gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthConvention {
    /// `c` in the QAC0 fan-out width bound `|targets| ≤ c·⌈log₂ N⌉`.
    pub fanout_width_factor: usize,
    /// Depth charged per fan-out layer in QAC0.
    pub fanout_depth: usize,
    /// Depth charged per layer containing a declared oracle gate.
    pub oracle_depth: usize,
}

impl Default for DepthConvention {
    fn default() -> Self {
        DepthConvention {
            fanout_width_factor: 2,
            fanout_depth: 1,
            oracle_depth: 1,
        }
    }
}

/// Where shorter blocks sit when blocks of different length run in parallel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Align {
    Start,
    End,
}

/// Runs several layer blocks side by side. Blocks must act on disjoint
/// qubits at every aligned position.
pub fn stack_parallel(blocks: Vec<Vec<Layer>>, align: Align) -> Result<Vec<Layer>> {
    let len = blocks.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![Layer::new(); len];
    for block in blocks {
        let offset = match align {
            Align::Start => 0,
            Align::End => len - block.len(),
        };
        for (i, layer) in block.into_iter().enumerate() {
            out[offset + i].merge(layer)?;
        }
    }
    Ok(out)
}

/// Inverse of a block of layers.
pub fn inverse_layers(layers: &[Layer]) -> Vec<Layer> {
    layers.iter().rev().map(Layer::inverse).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    qubit_count: usize,
    registers: RegisterMap,
    layers: Vec<Layer>,
    model: Model,
    convention: DepthConvention,
}

/// Depth, ancilla and gate accounting for a synthesized circuit.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub qubits: usize,
    pub depth: usize,
    pub ancilla_count: usize,
    pub gate_counts: BTreeMap<String, usize>,
    pub notes: Vec<String>,
}

impl Circuit {
    pub fn new(registers: RegisterMap, model: Model) -> Self {
        Circuit {
            qubit_count: registers.len(),
            registers,
            layers: Vec::new(),
            model,
            convention: DepthConvention::default(),
        }
    }

    /// Circuit on `n` system qubits with no registers beyond the roles.
    pub fn empty(n: usize, model: Model) -> Self {
        Circuit::new(RegisterMap::new(n, Role::System), model)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn registers(&self) -> &RegisterMap {
        &self.registers
    }

    pub fn registers_mut(&mut self) -> &mut RegisterMap {
        &mut self.registers
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn set_model(&mut self, model: Model) {
        self.model = model;
    }

    pub fn convention(&self) -> DepthConvention {
        self.convention
    }

    pub fn set_convention(&mut self, convention: DepthConvention) {
        self.convention = convention;
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flat_map(|l| l.gates.iter())
    }

    fn check_range(&self, layer: &Layer) -> Result<()> {
        match layer.occupied.iter().next_back() {
            Some(q) if q.0 >= self.qubit_count => Err(Error::InvalidGate(format!(
                "qubit {q} out of range for {} qubits",
                self.qubit_count
            ))),
            _ => Ok(()),
        }
    }

    pub fn push_layer(&mut self, layer: Layer) -> Result<()> {
        self.check_range(&layer)?;
        self.layers.push(layer);
        Ok(())
    }

    pub fn extend_layers(&mut self, layers: impl IntoIterator<Item = Layer>) -> Result<()> {
        for l in layers {
            self.push_layer(l)?;
        }
        Ok(())
    }

    /// Appends `gate` to the last layer, or to a fresh layer when
    /// `new_layer` is set or there is no layer yet.
    pub fn append(&mut self, gate: Gate, new_layer: bool) -> Result<()> {
        let layer = Layer::from_gates([gate])?;
        self.check_range(&layer)?;
        match self.layers.last_mut() {
            Some(last) if !new_layer => last.merge(layer),
            _ => {
                self.layers.push(layer);
                Ok(())
            }
        }
    }

    /// `self` followed by `other`. The result keeps `self`'s registers and
    /// takes the more permissive model.
    pub fn compose(&self, other: &Circuit) -> Result<Circuit> {
        if self.qubit_count != other.qubit_count {
            return Err(Error::CompositionError(format!(
                "{} qubits vs {} qubits",
                self.qubit_count, other.qubit_count
            )));
        }
        let mut out = self.clone();
        out.layers.extend(other.layers.iter().cloned());
        if other.model == Model::Qac0f {
            out.model = Model::Qac0f;
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            layers: inverse_layers(&self.layers),
            ..self.clone()
        }
    }

    /// Rewrites every macro into single-qubit gates around a global CZ. A
    /// layer with macros becomes three layers: basis change, CZ, basis
    /// change back.
    pub fn expand_macros(&self) -> Result<Circuit> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            if !layer.gates.iter().any(Gate::is_macro) {
                layers.push(layer.clone());
                continue;
            }
            let (mut pre, mut mid, mut post) = (Layer::new(), Layer::new(), Layer::new());
            for g in &layer.gates {
                let (a, b, c) = g.expand();
                for x in a {
                    pre.push(x)?;
                }
                for x in b {
                    mid.push(x)?;
                }
                for x in c {
                    post.push(x)?;
                }
            }
            layers.extend([pre, mid, post].into_iter().filter(|l| !l.is_empty()));
        }
        Ok(Circuit {
            layers,
            ..self.clone()
        })
    }

    fn fanout_width_limit(&self) -> usize {
        let log = if self.qubit_count <= 1 {
            0
        } else {
            (usize::BITS - (self.qubit_count - 1).leading_zeros()) as usize
        };
        self.convention.fanout_width_factor * log
    }

    /// Checks range, layer disjointness and the model's gate restrictions.
    pub fn validate(&self) -> Result<()> {
        let limit = self.fanout_width_limit();
        for (i, layer) in self.layers.iter().enumerate() {
            self.check_range(layer)?;
            let mut seen = BTreeSet::new();
            for g in &layer.gates {
                g.validate()?;
                for q in g.qubits() {
                    if !seen.insert(q) {
                        return Err(Error::InvalidGate(format!(
                            "layer {i}: qubit {q} used twice"
                        )));
                    }
                }
                if self.model == Model::Qac0 {
                    match g {
                        Gate::FanOut { targets, .. } if targets.len() > limit => {
                            return Err(Error::InvalidGate(format!(
                                "layer {i}: fan-out of width {} exceeds the QAC0 limit {limit}",
                                targets.len()
                            )));
                        }
                        Gate::Oracle(OracleGate::Exact { .. }) => {
                            return Err(Error::InvalidGate(format!(
                                "layer {i}: the EXACT oracle primitive requires the qac0f model"
                            )));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    fn gate_depth(&self, gate: &Gate) -> Result<usize> {
        Ok(match gate {
            Gate::SingleQubit { .. } => 0,
            Gate::GlobalCz { support } => usize::from(support.len() >= 2),
            Gate::FanOut { .. } => match self.model {
                Model::Qac0 => self.convention.fanout_depth,
                Model::Qac0f => 1,
            },
            Gate::Oracle(_) => self.convention.oracle_depth,
            g => return Err(Error::MacroNotExpanded(g.name().to_string())),
        })
    }

    /// Depth under the model's convention. Requires expanded macros.
    pub fn depth(&self) -> Result<usize> {
        let mut total = 0;
        for layer in &self.layers {
            let mut d = 0;
            for g in &layer.gates {
                d = d.max(self.gate_depth(g)?);
            }
            total += d;
        }
        Ok(total)
    }

    pub fn gate_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for g in self.gates() {
            *counts.entry(g.name().to_string()).or_insert(0) += 1;
        }
        counts
    }

    pub fn ancilla_count(&self) -> usize {
        self.registers.ancillas().len()
    }

    /// Expands macros and measures the circuit.
    pub fn resource_report(&self) -> Result<ResourceReport> {
        let expanded = self.expand_macros()?;
        let mut notes = Vec::new();
        let oracles = self
            .gates()
            .filter(|g| matches!(g, Gate::Oracle(_)))
            .count();
        if oracles > 0 {
            notes.push(format!(
                "{oracles} declared oracle gate(s), each layer charged depth {}",
                self.convention.oracle_depth
            ));
        }
        if self.model == Model::Qac0 && self.gates().any(|g| matches!(g, Gate::FanOut { .. })) {
            notes.push(format!(
                "log-width fan-out charged depth {} per layer",
                self.convention.fanout_depth
            ));
        }
        Ok(ResourceReport {
            qubits: self.qubit_count,
            depth: expanded.depth()?,
            ancilla_count: self.ancilla_count(),
            gate_counts: self.gate_counts(),
            notes,
        })
    }
}
