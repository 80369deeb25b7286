//! Approximate W state with a constant number of ancillas.
//!
//! One Grover round for weight 1, where the EXACT_1 phase oracle is replaced
//! by `t` randomized gadgets followed by a threshold over their outcomes.
//! Gadget `i` computes `y_i = NOR(x_{S_i}) ∧ OR(x_{S̄_i})` through two work
//! qubits that are cleaned right away, so the ancilla count is `t + 3`
//! whatever `n` is.

use serde::{Deserialize, Serialize};

use super::{dicke_angle, eta_reflection, ry_layer, settle_model, AngleSolution};
use crate::boolean::{choose_t, decision_count, SubsetFamily};
use crate::circuit::{
    inverse_layers, Circuit, Gate, Layer, Model, OracleGate, QubitAllocator, QubitId,
    ResourceReport, Role,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WOracle {
    /// Randomized gadgets plus a threshold over their outcomes.
    #[default]
    Gadget,
    /// An exact EXACT_1 oracle gate, for comparison.
    Perfect,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WOptions {
    pub oracle: WOracle,
    /// Evaluate all gadgets at once on fanned-out input copies.
    pub parallel: bool,
}

#[derive(Clone, Debug)]
pub struct WApprox {
    pub circuit: Circuit,
    pub angle: AngleSolution,
    pub report: ResourceReport,
    pub t: usize,
}

fn layer(gates: impl IntoIterator<Item = Gate>) -> Result<Layer> {
    Layer::from_gates(gates)
}

/// `target ^= OR(inputs)` as an X preset followed by a NOR; nothing for an
/// empty input set.
fn or_into(inputs: &[QubitId], target: QubitId) -> Result<Vec<Gate>> {
    if inputs.is_empty() {
        return Ok(Vec::new());
    }
    Ok(vec![
        Gate::x(target),
        Gate::nor(inputs.iter().copied(), target)?,
    ])
}

/// `target ^= NOR(inputs)`; a plain X for an empty input set.
fn nor_into(inputs: &[QubitId], target: QubitId) -> Result<Gate> {
    if inputs.is_empty() {
        Ok(Gate::x(target))
    } else {
        Gate::nor(inputs.iter().copied(), target)
    }
}

fn split(x: &[QubitId], subset: &[usize]) -> (Vec<QubitId>, Vec<QubitId>) {
    let (inside, outside): (Vec<_>, Vec<_>) =
        x.iter().enumerate().partition(|(j, _)| subset.contains(j));
    (
        inside.into_iter().map(|(_, q)| *q).collect(),
        outside.into_iter().map(|(_, q)| *q).collect(),
    )
}

/// Layers computing gadget `i` into `y`, reusing `w1`, `w2`.
fn sequential_gadget(
    x: &[QubitId],
    subset: &[usize],
    w1: QubitId,
    w2: QubitId,
    y: QubitId,
) -> Result<Vec<Layer>> {
    let (inside, outside) = split(x, subset);
    let or_gates = or_into(&outside, w2)?;
    let mut compute = Vec::new();
    if let Some(preset) = or_gates.first() {
        compute.push(layer([preset.clone()])?);
    }
    let mut eval = vec![nor_into(&inside, w1)?];
    eval.extend(or_gates.into_iter().skip(1));
    compute.push(layer(eval)?);
    let mut layers = compute.clone();
    layers.push(layer([Gate::and([w1, w2], y)?])?);
    layers.extend(inverse_layers(&compute));
    Ok(layers)
}

fn parallel_gadgets(
    alloc: &mut QubitAllocator,
    x: &[QubitId],
    family: &SubsetFamily,
    y: &[QubitId],
) -> Result<Vec<Layer>> {
    let t = family.t;
    let copies: Vec<Vec<QubitId>> = (0..t)
        .map(|_| alloc.fresh_many(x.len(), Role::Ancilla))
        .collect::<Result<_>>()?;
    let w = alloc.fresh_many(2 * t, Role::Ancilla)?;
    let mut fan = Layer::new();
    for (j, &q) in x.iter().enumerate() {
        fan.push(Gate::fan_out(q, copies.iter().map(|c| c[j]))?)?;
    }
    let mut eval = Layer::new();
    let mut combine = Layer::new();
    for (i, subset) in family.subsets.iter().enumerate() {
        let (inside, outside) = split(&copies[i], subset);
        let (w1, w2) = (w[2 * i], w[2 * i + 1]);
        eval.push(nor_into(&inside, w1)?)?;
        let or_gates = or_into(&outside, w2)?;
        if let [preset, nor] = &or_gates[..] {
            fan.push(preset.clone())?;
            eval.push(nor.clone())?;
        }
        combine.push(Gate::and([w1, w2], y[i])?)?;
    }
    Ok(vec![fan, eval, combine])
}

/// Approximate `|W_n⟩` with one amplification round.
///
/// `family` must hold `choose_t(ε/9)` subsets of `[n]`.
pub fn synth_w_approx(
    n: usize,
    epsilon: f64,
    family: &SubsetFamily,
    options: WOptions,
) -> Result<WApprox> {
    let t = choose_t(epsilon / 9.0)?;
    family.validate()?;
    if family.t != t || family.n != n {
        return Err(Error::ConfigMismatch(format!(
            "family has n = {}, t = {}; expected n = {n}, t = {t} for epsilon = {epsilon}",
            family.n, family.t
        )));
    }
    if n < 2 {
        return Err(Error::ConfigMismatch("the W state needs n ≥ 2".into()));
    }
    let angle = dicke_angle(n, 1, 1e-13)?;
    let mut alloc = QubitAllocator::new(usize::MAX);
    let x = alloc.group("x", n, Role::System)?;
    let d = alloc.group("d", 1, Role::Flag)?[0];
    let mut notes = vec![format!(
        "theta = {}, c_target = {}, grover_rounds = {}",
        angle.theta, angle.c_target, angle.grover_rounds
    )];
    let compute = match options.oracle {
        WOracle::Perfect => {
            notes.push("exact EXACT_1 oracle gate in place of the gadgets".into());
            vec![layer([Gate::oracle(OracleGate::Exact {
                inputs: x.clone(),
                target: d,
                weight: 1,
            })?])?]
        }
        WOracle::Gadget => {
            let y = alloc.group("y", t, Role::Ancilla)?;
            let mut layers = if options.parallel {
                parallel_gadgets(&mut alloc, &x, family, &y)?
            } else {
                let w = alloc.group("w", 2, Role::Ancilla)?;
                let mut seq = Vec::new();
                for (subset, &yi) in family.subsets.iter().zip(&y) {
                    seq.extend(sequential_gadget(&x, subset, w[0], w[1], yi)?);
                }
                seq
            };
            layers.push(layer([Gate::oracle(OracleGate::AtLeast {
                inputs: y.clone(),
                target: d,
                count: decision_count(t),
            })?])?);
            notes.push(format!(
                "{t} gadgets; threshold oracle fires on more than {} accepting gadgets",
                3 * t / 8
            ));
            layers
        }
    };
    let mut circ = Circuit::new(alloc.into_registers()?, Model::Qac0);
    circ.push_layer(ry_layer(&x, angle.theta)?)?;
    circ.extend_layers(compute.iter().cloned())?;
    circ.push_layer(layer([Gate::z(d)])?)?;
    circ.extend_layers(inverse_layers(&compute))?;
    circ.push_layer(eta_reflection(&x, angle.theta)?)?;
    if let Some(note) = settle_model(&mut circ)? {
        notes.push(note);
    }
    let mut report = circ.resource_report()?;
    report.notes.extend(notes);
    Ok(WApprox {
        circuit: circ,
        angle,
        report,
        t,
    })
}
