//! THRESHOLD / EXACT bit circuits from the bit-partition recursion.
//!
//! Every nontrivial node `TH_k(U)` receives private copies of its inputs.
//! Its first layer fans each input out to fresh copies for the children
//! that read it, the children run side by side, and three layers combine
//! them: AND terms `TH_{k'}(U_{i0}) ∧ TH_{k−k'}(U_{i1})`, one OR clause per
//! bit position (a NOR onto a qubit preset to 1), and the AND of the
//! clauses. Ancillas are left dirty and cleaned by running the whole
//! computation backwards after the result is copied out.

use std::collections::HashMap;

use crate::boolean::log_width;
use crate::circuit::{
    inverse_layers, stack_parallel, Align, Circuit, Gate, Layer, Model, Polarity, QubitAllocator,
    QubitId, Role,
};
use crate::{Error, Result};

/// Default bound on the qubits a bit circuit may allocate.
pub const DEFAULT_MAX_SYNTH_QUBITS: usize = 1 << 14;

struct Node {
    /// `copies[j]`: qubits that must receive a copy of input `j` before the
    /// node's layers run.
    copies: Vec<Vec<QubitId>>,
    layers: Vec<Layer>,
    out: QubitId,
}

fn single(gate: Gate) -> Result<Layer> {
    Layer::from_gates([gate])
}

fn positions_by_bit(set: &[usize], i: usize) -> [Vec<usize>; 2] {
    let (one, zero): (Vec<usize>, Vec<usize>) = (0..set.len()).partition(|&p| set[p] >> i & 1 == 1);
    [zero, one]
}

fn build_node(
    alloc: &mut QubitAllocator,
    inputs: &[QubitId],
    set: &[usize],
    k: usize,
    levels: usize,
) -> Result<Node> {
    let out = alloc.fresh(Role::Ancilla)?;
    let mut copies = vec![Vec::new(); set.len()];
    if k >= set.len() {
        return Ok(Node {
            copies,
            layers: vec![single(Gate::x(out))?],
            out,
        });
    }
    if k == 0 {
        return Ok(Node {
            copies,
            layers: vec![single(Gate::nor(inputs.iter().copied(), out)?)?],
            out,
        });
    }
    let mut blocks = Vec::new();
    let mut presets = Layer::new();
    let mut and_layer = Layer::new();
    let mut or_layer = Layer::new();
    let mut clauses = Vec::new();
    for i in 0..levels {
        let halves = positions_by_bit(set, i);
        if halves.iter().any(Vec::is_empty) {
            continue;
        }
        let mut child = |side: usize, kk: usize| -> Result<QubitId> {
            let pos = &halves[side];
            let sub: Vec<usize> = pos.iter().map(|&p| set[p]).collect();
            let fresh = if kk >= sub.len() {
                Vec::new()
            } else {
                let qs = alloc.fresh_many(pos.len(), Role::Ancilla)?;
                for (&p, &q) in pos.iter().zip(&qs) {
                    copies[p].push(q);
                }
                qs
            };
            let node = build_node(alloc, &fresh, &sub, kk, levels)?;
            blocks.push(with_copy_layer(&fresh, node.copies, node.layers)?);
            Ok(node.out)
        };
        let mut terms = vec![child(0, 0)?, child(1, 0)?];
        let pairs = (1..k)
            .map(|kp| Ok((child(0, kp)?, child(1, k - kp)?)))
            .collect::<Result<Vec<_>>>()?;
        for (a, b) in pairs {
            let p = alloc.fresh(Role::Ancilla)?;
            and_layer.push(Gate::and([a, b], p)?)?;
            terms.push(p);
        }
        let clause = alloc.fresh(Role::Ancilla)?;
        presets.push(Gate::x(clause))?;
        or_layer.push(Gate::nor(terms, clause)?)?;
        clauses.push(clause);
    }
    let mut layers = stack_parallel(blocks, Align::End)?;
    layers
        .first_mut()
        .ok_or_else(|| Error::InvalidGate("threshold node without children".into()))?
        .merge(presets)?;
    if !and_layer.is_empty() {
        layers.push(and_layer);
    }
    layers.push(or_layer);
    layers.push(single(Gate::and(clauses, out)?)?);
    Ok(Node {
        copies,
        layers,
        out,
    })
}

/// Prepends the fan-out layer that feeds a node its input copies.
fn with_copy_layer(
    inputs: &[QubitId],
    copies: Vec<Vec<QubitId>>,
    mut layers: Vec<Layer>,
) -> Result<Vec<Layer>> {
    let mut copy = Layer::new();
    for (&q, targets) in inputs.iter().zip(copies) {
        if !targets.is_empty() {
            copy.push(Gate::fan_out(q, targets)?)?;
        }
    }
    if !copy.is_empty() {
        layers.insert(0, copy);
    }
    Ok(layers)
}

/// Qubits allocated by `build_node` for `TH_k` over `set`, including the
/// node output.
fn count_node(
    set: &[usize],
    k: usize,
    levels: usize,
    memo: &mut HashMap<(Vec<usize>, usize), usize>,
) -> usize {
    if k >= set.len() || k == 0 {
        return 1;
    }
    if let Some(&c) = memo.get(&(set.to_vec(), k)) {
        return c;
    }
    let mut total = 1;
    for i in 0..levels {
        let halves = positions_by_bit(set, i);
        if halves.iter().any(Vec::is_empty) {
            continue;
        }
        let subs: Vec<Vec<usize>> = halves
            .iter()
            .map(|h| h.iter().map(|&p| set[p]).collect())
            .collect();
        let mut child = |side: usize, kk: usize| {
            let copies = if kk >= subs[side].len() {
                0
            } else {
                subs[side].len()
            };
            copies + count_node(&subs[side], kk, levels, memo)
        };
        total += child(0, 0) + child(1, 0) + 1;
        for kp in 1..k {
            total += child(0, kp) + child(1, k - kp) + 1;
        }
    }
    memo.insert((set.to_vec(), k), total);
    total
}

fn count_root(n: usize, k: usize, memo: &mut HashMap<(Vec<usize>, usize), usize>) -> usize {
    let set: Vec<usize> = (0..n).collect();
    count_node(&set, k, log_width(n), memo)
}

/// Total qubits of `synth_threshold_circuit(n, k)`.
pub fn estimate_threshold_qubits(n: usize, k: usize) -> usize {
    if k == 0 || k >= n {
        return n + 1;
    }
    n + 1 + count_root(n, k, &mut HashMap::new())
}

/// Total qubits of `synth_exact_circuit(n, k)`.
pub fn estimate_exact_qubits(n: usize, k: usize) -> usize {
    if k == 0 || k > n {
        return n + 1;
    }
    let mut memo = HashMap::new();
    n + 1 + count_root(n, k, &mut memo) + count_root(n, k - 1, &mut memo)
}

/// Layers computing `TH_k(x)` into the returned (dirty-ancilla) qubit.
fn threshold_compute(
    alloc: &mut QubitAllocator,
    x: &[QubitId],
    k: usize,
) -> Result<(Vec<Layer>, QubitId)> {
    let set: Vec<usize> = (0..x.len()).collect();
    let root = build_node(alloc, x, &set, k, log_width(x.len()))?;
    Ok((with_copy_layer(x, root.copies, root.layers)?, root.out))
}

/// Layers writing `EXACT_k(x)` into `out` with all ancillas restored.
pub(crate) fn exact_layers(
    alloc: &mut QubitAllocator,
    x: &[QubitId],
    k: usize,
    out: QubitId,
) -> Result<Vec<Layer>> {
    let n = x.len();
    if k > n {
        return Ok(Vec::new());
    }
    if k == 0 {
        return Ok(vec![single(Gate::nor(x.iter().copied(), out)?)?]);
    }
    let set: Vec<usize> = (0..n).collect();
    let levels = log_width(n);
    let hi = build_node(alloc, x, &set, k, levels)?;
    let lo = build_node(alloc, x, &set, k - 1, levels)?;
    let merged: Vec<Vec<QubitId>> = hi
        .copies
        .into_iter()
        .zip(lo.copies)
        .map(|(mut a, b)| {
            a.extend(b);
            a
        })
        .collect();
    let body = stack_parallel(vec![hi.layers, lo.layers], Align::End)?;
    let compute = with_copy_layer(x, merged, body)?;
    let write = single(Gate::multi_toffoli(
        [(hi.out, Polarity::Positive), (lo.out, Polarity::Negative)],
        out,
    )?)?;
    Ok(compute_copy_uncompute(compute, write))
}

fn compute_copy_uncompute(compute: Vec<Layer>, write: Layer) -> Vec<Layer> {
    let undo = inverse_layers(&compute);
    let mut layers = compute;
    layers.push(write);
    layers.extend(undo);
    layers
}

/// Allocator holding `x` (system, group `x`) and `out` (output, group `out`)
/// as qubits `0..n` and `n`.
fn bit_frame(n: usize, max_qubits: usize) -> Result<(QubitAllocator, Vec<QubitId>, QubitId)> {
    let mut alloc = QubitAllocator::new(max_qubits);
    let x = alloc.group("x", n, Role::System)?;
    let out = alloc.group("out", 1, Role::Output)?[0];
    Ok((alloc, x, out))
}

fn finish(alloc: QubitAllocator, layers: Vec<Layer>) -> Result<Circuit> {
    let mut circ = Circuit::new(alloc.into_registers()?, Model::Qac0);
    circ.extend_layers(layers)?;
    settle_model(&mut circ)?;
    Ok(circ)
}

/// Keeps the circuit in QAC0 when its fan-outs respect the log-width bound,
/// otherwise moves it to QAC0f. Returns a note when the model changed.
pub(crate) fn settle_model(circ: &mut Circuit) -> Result<Option<String>> {
    circ.set_model(Model::Qac0);
    if circ.validate().is_ok() {
        return Ok(None);
    }
    circ.set_model(Model::Qac0f);
    circ.validate()?;
    let widest = circ
        .gates()
        .filter_map(|g| match g {
            Gate::FanOut { targets, .. } => Some(targets.len()),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    Ok(Some(format!(
        "fan-out width {widest} exceeds the QAC0 log-width bound; circuit marked qac0f"
    )))
}

fn check_estimate(estimate: usize, max_qubits: usize, what: &str) -> Result<()> {
    if estimate > max_qubits {
        return Err(Error::ResourceLimit(format!(
            "{what} needs {estimate} qubits, cap is {max_qubits}"
        )));
    }
    Ok(())
}

/// Circuit writing `TH_k(x)` into the `out` qubit; inputs are preserved and
/// ancillas restored.
pub fn synth_threshold_circuit(n: usize, k: usize) -> Result<Circuit> {
    synth_threshold_circuit_capped(n, k, DEFAULT_MAX_SYNTH_QUBITS)
}

pub fn synth_threshold_circuit_capped(n: usize, k: usize, max_qubits: usize) -> Result<Circuit> {
    check_estimate(
        estimate_threshold_qubits(n, k),
        max_qubits,
        &format!("TH_{k} on {n} inputs"),
    )?;
    let (mut alloc, x, out) = bit_frame(n, max_qubits)?;
    let layers = if k >= n {
        vec![single(Gate::x(out))?]
    } else if k == 0 {
        vec![single(Gate::nor(x.iter().copied(), out)?)?]
    } else {
        let (compute, th) = threshold_compute(&mut alloc, &x, k)?;
        compute_copy_uncompute(compute, single(Gate::and([th], out)?)?)
    };
    finish(alloc, layers)
}

/// Circuit writing `EXACT_k(x) = TH_k(x) ∧ ¬TH_{k−1}(x)` into `out`.
pub fn synth_exact_circuit(n: usize, k: usize) -> Result<Circuit> {
    synth_exact_circuit_capped(n, k, DEFAULT_MAX_SYNTH_QUBITS)
}

pub fn synth_exact_circuit_capped(n: usize, k: usize, max_qubits: usize) -> Result<Circuit> {
    check_estimate(
        estimate_exact_qubits(n, k),
        max_qubits,
        &format!("EXACT_{k} on {n} inputs"),
    )?;
    let (mut alloc, x, out) = bit_frame(n, max_qubits)?;
    let layers = exact_layers(&mut alloc, &x, k, out)?;
    finish(alloc, layers)
}

/// `bit · Z(out) · bit⁻¹`: the diagonal `(−1)^{f(x)}` on the inputs.
pub fn phase_oracle(bit_circuit: &Circuit) -> Result<Circuit> {
    let out = match bit_circuit.registers().group("out") {
        Some([q]) => *q,
        _ => {
            return Err(Error::InvalidRegister(
                "bit circuit needs a single-qubit `out` group".into(),
            ))
        }
    };
    let mut flip = Circuit::new(bit_circuit.registers().clone(), bit_circuit.model());
    flip.push_layer(single(Gate::z(out))?)?;
    bit_circuit.compose(&flip)?.compose(&bit_circuit.inverse())
}
