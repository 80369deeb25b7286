//! Exact Dicke states of any weight in QAC0f.
//!
//! `M` blocks of `n` qubits are rotated to `sin²θ* = k/n` and each block
//! gets a flag `a_i = EXACT_k(T_i)`. A one-hot encoding of the lowest set
//! flag selects one successful block, which is swapped into `Q`. In every
//! branch with some flag set, `Q` holds `|D^n_k⟩` and the rest is junk, so
//! the good branch has probability `γ = 1 − (1 − p_good)^M`. A tuning
//! ancilla lowers that to `γ̃ = sin²(π/(4ℓ+2))` and `ℓ` rounds of amplitude
//! amplification then make it exactly 1.

use serde::{Deserialize, Serialize};

use crate::circuit::{
    Circuit, DepthConvention, Gate, Layer, Model, OracleGate, Polarity, QubitAllocator, QubitId,
    RegisterMap, ResourceReport, Role,
};
use crate::qac0::{binomial_pmf, c_target, DEFAULT_MAX_SYNTH_QUBITS};
use crate::{Error, Result};

/// `C(n,k)·(k/n)^k·(1−k/n)^{n−k}`, the weight-`k` probability of one block.
pub fn p_good(n: usize, k: usize) -> f64 {
    if n == 0 || k > n {
        return 0.0;
    }
    binomial_pmf(n, k, k as f64 / n as f64)
}

/// `1 − (1 − p_good)^M`.
pub fn gamma(n: usize, k: usize, m: usize) -> f64 {
    let p = p_good(n, k);
    -(m as f64 * (-p).ln_1p()).exp_m1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum BlockCountMode {
    /// `⌈√n⌉`, raised until `M·p_good ≥ 1`.
    Paper,
    /// Smallest `M` with `γ ≥ gamma_floor`.
    Desk { gamma_floor: f64 },
}

impl Default for BlockCountMode {
    fn default() -> Self {
        BlockCountMode::Desk { gamma_floor: 0.5 }
    }
}

pub fn choose_m(n: usize, k: usize, mode: BlockCountMode) -> Result<usize> {
    let p = p_good(n, k);
    if p <= 0.0 {
        return Err(Error::NoSolution(format!(
            "p_good is 0 for n = {n}, k = {k}"
        )));
    }
    match mode {
        BlockCountMode::Paper => {
            let mut m = (n as f64).sqrt().ceil().max(1.0) as usize;
            while (m as f64) * p < 1.0 {
                m += 1;
            }
            Ok(m)
        }
        BlockCountMode::Desk { gamma_floor } => {
            if !(gamma_floor > 0.0 && gamma_floor < 1.0) {
                return Err(Error::ConfigMismatch(format!(
                    "gamma floor must lie in (0, 1), got {gamma_floor}"
                )));
            }
            Ok((1..)
                .find(|&m| gamma(n, k, m) >= gamma_floor)
                .expect("γ → 1"))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CswapMode {
    /// One controlled swap per block, in sequence.
    #[default]
    Sequential,
    /// All blocks at once through per-block copies of `Q`.
    Parallel,
}

/// Qubit assignment for the block construction.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayout {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub cswap: CswapMode,
    /// `T_1..T_M`.
    pub blocks: Vec<Vec<QubitId>>,
    /// Success flags `a_1..a_M`.
    pub flags: Vec<QubitId>,
    /// One-hot selection `s_1..s_M`.
    pub select: Vec<QubitId>,
    pub q: Vec<QubitId>,
    pub good: QubitId,
    pub tune: QubitId,
    pub b: QubitId,
    /// Fan-out copies of `a_i` for the one-hot layer; `flag_copies[i]` has
    /// `M − i − 1` entries.
    pub flag_copies: Vec<Vec<QubitId>>,
    /// Fan-out copies of the selection bits, `n − 1` per row. One shared
    /// row in sequential mode, one row per block in parallel mode.
    pub select_copies: Vec<Vec<QubitId>>,
    /// Parallel mode only: `swap_work[j][i]` receives `T_j[i]`.
    pub swap_work: Vec<Vec<QubitId>>,
    /// Parallel mode only: `M − 1` copies of each `Q[i]`.
    pub q_copies: Vec<Vec<QubitId>>,
    registers: RegisterMap,
}

fn breakdown(n: usize, m: usize, cswap: CswapMode) -> Vec<(&'static str, usize)> {
    let mut parts = vec![
        ("blocks", m * n),
        ("flags", m),
        ("select", m),
        ("q", n),
        ("good/tune/b", 3),
        ("flag_copies", m * m.saturating_sub(1) / 2),
    ];
    match cswap {
        CswapMode::Sequential => parts.push(("select_copies", n.saturating_sub(1))),
        CswapMode::Parallel => parts.extend([
            ("select_copies", m * n.saturating_sub(1)),
            ("swap_work", m * n),
            ("q_copies", n * m.saturating_sub(1)),
        ]),
    }
    parts
}

impl BlockLayout {
    pub fn estimate_qubits(n: usize, m: usize, cswap: CswapMode) -> usize {
        breakdown(n, m, cswap).iter().map(|(_, c)| c).sum()
    }

    pub fn new(n: usize, k: usize, m: usize, cswap: CswapMode, cap: usize) -> Result<Self> {
        if n == 0 || m == 0 || k > n {
            return Err(Error::ConfigMismatch(format!(
                "need n ≥ 1, M ≥ 1, k ≤ n; got n = {n}, k = {k}, M = {m}"
            )));
        }
        let total = Self::estimate_qubits(n, m, cswap);
        if total > cap {
            let parts: Vec<String> = breakdown(n, m, cswap)
                .iter()
                .map(|(name, c)| format!("{name} {c}"))
                .collect();
            return Err(Error::ResourceLimit(format!(
                "layout for n = {n}, k = {k}, M = {m} needs {total} qubits ({}) but the cap is {cap}",
                parts.join(", ")
            )));
        }
        let mut alloc = QubitAllocator::new(cap);
        let blocks = (0..m)
            .map(|j| alloc.group(&format!("T{}", j + 1), n, Role::Block(j + 1)))
            .collect::<Result<Vec<_>>>()?;
        let flags = alloc.group("A", m, Role::Flag)?;
        let select = alloc.group("S", m, Role::Selection)?;
        let q = alloc.group("Q", n, Role::System)?;
        let good = alloc.group("a0", 1, Role::Flag)?[0];
        let tune = alloc.group("a", 1, Role::Flag)?[0];
        let b = alloc.group("b", 1, Role::Flag)?[0];
        let flag_copies = (0..m)
            .map(|i| alloc.fresh_many(m - i - 1, Role::Ancilla))
            .collect::<Result<Vec<_>>>()?;
        let rows = match cswap {
            CswapMode::Sequential => 1,
            CswapMode::Parallel => m,
        };
        let select_copies = (0..rows)
            .map(|_| alloc.fresh_many(n - 1, Role::Ancilla))
            .collect::<Result<Vec<_>>>()?;
        let (swap_work, q_copies) = match cswap {
            CswapMode::Sequential => (Vec::new(), Vec::new()),
            CswapMode::Parallel => (
                (0..m)
                    .map(|_| alloc.fresh_many(n, Role::Ancilla))
                    .collect::<Result<Vec<_>>>()?,
                (0..n)
                    .map(|_| alloc.fresh_many(m - 1, Role::Ancilla))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        debug_assert_eq!(alloc.len(), total);
        Ok(BlockLayout {
            n,
            k,
            m,
            cswap,
            blocks,
            flags,
            select,
            q,
            good,
            tune,
            b,
            flag_copies,
            select_copies,
            swap_work,
            q_copies,
            registers: alloc.into_registers()?,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.registers.len()
    }

    pub fn registers(&self) -> &RegisterMap {
        &self.registers
    }

    fn circuit(&self) -> Circuit {
        Circuit::new(self.registers.clone(), Model::Qac0f)
    }

    /// Every register group with its qubit indices, plus the size budget.
    pub fn to_json_value(&self) -> serde_json::Value {
        let flat = |rows: &[Vec<QubitId>]| rows.iter().flatten().copied().collect::<Vec<_>>();
        let mut groups = serde_json::Map::new();
        for (j, block) in self.blocks.iter().enumerate() {
            groups.insert(format!("T{}", j + 1), serde_json::json!(block));
        }
        groups.insert("A".into(), serde_json::json!(self.flags));
        groups.insert("S".into(), serde_json::json!(self.select));
        groups.insert("Q".into(), serde_json::json!(self.q));
        groups.insert("a0".into(), serde_json::json!([self.good]));
        groups.insert("a".into(), serde_json::json!([self.tune]));
        groups.insert("b".into(), serde_json::json!([self.b]));
        groups.insert(
            "flag_copies".into(),
            serde_json::json!(flat(&self.flag_copies)),
        );
        groups.insert(
            "select_copies".into(),
            serde_json::json!(flat(&self.select_copies)),
        );
        groups.insert("swap_work".into(), serde_json::json!(flat(&self.swap_work)));
        groups.insert("q_copies".into(), serde_json::json!(flat(&self.q_copies)));
        let budget: serde_json::Map<String, serde_json::Value> =
            breakdown(self.n, self.m, self.cswap)
                .into_iter()
                .map(|(name, c)| (name.to_string(), c.into()))
                .collect();
        serde_json::json!({
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "cswap": self.cswap,
            "total_qubits": self.qubit_count(),
            "budget": budget,
            "groups": groups,
        })
    }
}

fn cnot(control: QubitId, target: QubitId) -> Result<Gate> {
    Gate::and([control], target)
}

/// `R_y(2θ*)` on every block qubit, then `a_i ^= EXACT_k(T_i)`.
pub fn synth_block_init(layout: &BlockLayout) -> Result<Circuit> {
    let theta = (layout.k as f64 / layout.n as f64).sqrt().asin();
    let mut c = layout.circuit();
    c.push_layer(Layer::from_gates(
        layout
            .blocks
            .iter()
            .flatten()
            .map(|&q| Gate::ry(q, 2.0 * theta)),
    )?)?;
    c.push_layer(Layer::from_gates(
        layout
            .blocks
            .iter()
            .zip(&layout.flags)
            .map(|(block, &a)| {
                Gate::oracle(OracleGate::Exact {
                    inputs: block.clone(),
                    target: a,
                    weight: layout.k,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    )?)?;
    Ok(c)
}

/// `s_j = a_j ∧ ¬(a_1 ∨ … ∨ a_{j−1})`, one multi-controlled gate per `j` on
/// fanned-out copies of `A`.
pub fn synth_lsb_onehot(layout: &BlockLayout) -> Result<Circuit> {
    let read = |i: usize, j: usize| {
        if j == i {
            layout.flags[i]
        } else {
            layout.flag_copies[i][j - i - 1]
        }
    };
    let mut fan = Layer::new();
    for (i, copies) in layout.flag_copies.iter().enumerate() {
        if !copies.is_empty() {
            fan.push(Gate::fan_out(layout.flags[i], copies.iter().copied())?)?;
        }
    }
    let mut select = Layer::new();
    for (j, &s) in layout.select.iter().enumerate() {
        let controls = std::iter::once((read(j, j), Polarity::Positive))
            .chain((0..j).map(|i| (read(i, j), Polarity::Negative)));
        select.push(Gate::multi_toffoli(controls, s)?)?;
    }
    let mut c = layout.circuit();
    if !fan.is_empty() {
        c.push_layer(fan.clone())?;
    }
    c.push_layer(select)?;
    if !fan.is_empty() {
        c.push_layer(fan.inverse())?;
    }
    Ok(c)
}

fn select_control(layout: &BlockLayout, row: usize, j: usize, i: usize) -> QubitId {
    if i == 0 {
        layout.select[j]
    } else {
        layout.select_copies[row][i - 1]
    }
}

fn select_fanout(layout: &BlockLayout, row: usize, j: usize) -> Result<Option<Gate>> {
    let copies = &layout.select_copies[row];
    if copies.is_empty() {
        return Ok(None);
    }
    Gate::fan_out(layout.select[j], copies.iter().copied()).map(Some)
}

/// Swaps `T_j` with `Q` controlled on `s_j`.
pub fn synth_cswap_extract(layout: &BlockLayout) -> Result<Circuit> {
    match layout.cswap {
        CswapMode::Sequential => cswap_sequential(layout),
        CswapMode::Parallel => cswap_parallel(layout),
    }
}

fn cswap_sequential(layout: &BlockLayout) -> Result<Circuit> {
    let mut c = layout.circuit();
    for (j, block) in layout.blocks.iter().enumerate() {
        let fan = select_fanout(layout, 0, j)?;
        let outer: Vec<Gate> = block
            .iter()
            .zip(&layout.q)
            .map(|(&t, &q)| cnot(q, t))
            .collect::<Result<_>>()?;
        let inner: Vec<Gate> = block
            .iter()
            .zip(&layout.q)
            .enumerate()
            .map(|(i, (&t, &q))| Gate::and([select_control(layout, 0, j, i), t], q))
            .collect::<Result<_>>()?;
        if let Some(g) = &fan {
            c.push_layer(Layer::from_gates([g.clone()])?)?;
        }
        c.push_layer(Layer::from_gates(outer.clone())?)?;
        c.push_layer(Layer::from_gates(inner)?)?;
        c.push_layer(Layer::from_gates(outer.into_iter().chain(fan))?)?;
    }
    Ok(c)
}

/// Each block swaps into its own work row, the rows are ORed into `Q`, and
/// the selected row is cleared again by XORing `Q` back into it.
fn cswap_parallel(layout: &BlockLayout) -> Result<Circuit> {
    let m = layout.m;
    let q_read = |j: usize, i: usize| {
        if j == 0 {
            layout.q[i]
        } else {
            layout.q_copies[i][j - 1]
        }
    };
    let mut fan_s = Layer::new();
    for j in 0..m {
        if let Some(g) = select_fanout(layout, j, j)? {
            fan_s.push(g)?;
        }
    }
    let (mut outer, mut inner, mut clear) = (Layer::new(), Layer::new(), Layer::new());
    for (j, block) in layout.blocks.iter().enumerate() {
        for (i, &t) in block.iter().enumerate() {
            let r = layout.swap_work[j][i];
            let s = select_control(layout, j, j, i);
            outer.push(cnot(r, t)?)?;
            inner.push(Gate::and([s, t], r)?)?;
            clear.push(Gate::and([s, q_read(j, i)], r)?)?;
        }
    }
    let mut preset = outer.clone();
    let mut or = Layer::new();
    let mut fan_q = Layer::new();
    for (i, &q) in layout.q.iter().enumerate() {
        preset.push(Gate::x(q))?;
        or.push(Gate::nor((0..m).map(|j| layout.swap_work[j][i]), q)?)?;
        if m > 1 {
            fan_q.push(Gate::fan_out(q, layout.q_copies[i].iter().copied())?)?;
        }
    }
    let mut unfan = fan_q.inverse();
    unfan.merge(fan_s.inverse())?;
    let mut c = layout.circuit();
    for layer in [fan_s, outer, inner, preset, or, fan_q, clear, unfan] {
        if !layer.is_empty() {
            c.push_layer(layer)?;
        }
    }
    Ok(c)
}

/// `a_0 = a_1 ∨ … ∨ a_M`.
pub fn synth_good_flag(layout: &BlockLayout) -> Result<Circuit> {
    let mut c = layout.circuit();
    c.push_layer(Layer::from_gates([Gate::x(layout.good)])?)?;
    c.push_layer(Layer::from_gates([Gate::nor(
        layout.flags.iter().copied(),
        layout.good,
    )?])?)?;
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTuning {
    /// Probability of the good branch before tuning.
    pub gamma: f64,
    /// `sin²(π/(4ℓ+2))`.
    pub gamma_tilde: f64,
    pub rounds: usize,
    /// `R_y(2φ)` on the tuning ancilla, `sin²φ = γ̃/γ`.
    pub phi: f64,
}

/// Smallest `ℓ` with `sin²(π/(4ℓ+2)) ≤ γ`, and the matching rotation.
pub fn tune_amplitude(gamma: f64) -> Result<AmplitudeTuning> {
    if !(gamma > 0.0 && gamma <= 1.0 + 1e-12) {
        return Err(Error::NoSolution(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let gamma = gamma.min(1.0);
    let (rounds, gamma_tilde) = (1..)
        .map(|l| (l, c_target(l)))
        .find(|&(_, c)| c <= gamma)
        .expect("sin²(π/(4ℓ+2)) tends to 0");
    let phi = (gamma_tilde / gamma).min(1.0).sqrt().asin();
    Ok(AmplitudeTuning {
        gamma,
        gamma_tilde,
        rounds,
        phi,
    })
}

/// The full preparation `V`: blocks, selection, extraction, good flag, the
/// tuning rotation on `a` and `b ^= EXACT_k(Q)`.
pub fn synth_preparation(layout: &BlockLayout, tuning: &AmplitudeTuning) -> Result<Circuit> {
    let mut c = synth_block_init(layout)?;
    for stage in [
        synth_lsb_onehot(layout)?,
        synth_cswap_extract(layout)?,
        synth_good_flag(layout)?,
    ] {
        c.extend_layers(stage.layers().iter().cloned())?;
    }
    c.push_layer(Layer::from_gates([
        Gate::ry(layout.tune, 2.0 * tuning.phi),
        Gate::oracle(OracleGate::Exact {
            inputs: layout.q.clone(),
            target: layout.b,
            weight: layout.k,
        })?,
    ])?)?;
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qac0fConfig {
    pub n: usize,
    pub k: usize,
    /// Block count; chosen by `m_mode` when absent.
    pub m: Option<usize>,
    pub m_mode: BlockCountMode,
    pub cswap: CswapMode,
    pub max_qubits: usize,
    pub convention: DepthConvention,
}

impl Qac0fConfig {
    pub fn new(n: usize, k: usize, m: usize) -> Self {
        Qac0fConfig {
            n,
            k,
            m: Some(m),
            m_mode: BlockCountMode::default(),
            cswap: CswapMode::default(),
            max_qubits: DEFAULT_MAX_SYNTH_QUBITS,
            convention: DepthConvention::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DickeQac0f {
    pub circuit: Circuit,
    /// `V` alone, before amplification.
    pub preparation: Circuit,
    pub layout: BlockLayout,
    pub tuning: AmplitudeTuning,
    pub report: ResourceReport,
}

/// `V` followed by `ℓ` rounds of [phase on `a = b = 1`, `V·(I − 2|0⟩⟨0|)·V†`].
/// The result holds `|D^n_k⟩` on `Q` next to a junk state.
pub fn synth_dicke_qac0f(config: &Qac0fConfig) -> Result<DickeQac0f> {
    let (n, k) = (config.n, config.k);
    if n == 0 || k > n {
        return Err(Error::ConfigMismatch(format!(
            "need 0 ≤ k ≤ n, n ≥ 1; got n = {n}, k = {k}"
        )));
    }
    let m = match config.m {
        Some(m) => m,
        None => choose_m(n, k, config.m_mode)?,
    };
    let layout = BlockLayout::new(n, k, m, config.cswap, config.max_qubits)?;
    let tuning = tune_amplitude(gamma(n, k, m))?;
    let mut prep = synth_preparation(&layout, &tuning)?;
    prep.set_convention(config.convention);
    let all: Vec<QubitId> = (0..layout.qubit_count()).map(QubitId).collect();
    let flip_all = Layer::from_gates(all.iter().map(|&q| Gate::x(q)))?;
    let inverse = prep.inverse();
    let mut c = prep.clone();
    for _ in 0..tuning.rounds {
        c.push_layer(Layer::from_gates([Gate::global_cz([
            layout.tune,
            layout.b,
        ])?])?)?;
        c.extend_layers(inverse.layers().iter().cloned())?;
        c.push_layer(flip_all.clone())?;
        c.push_layer(Layer::from_gates([Gate::global_cz(all.iter().copied())?])?)?;
        c.push_layer(flip_all.clone())?;
        c.extend_layers(prep.layers().iter().cloned())?;
    }
    c.set_convention(config.convention);
    c.validate()?;
    let mut report = c.resource_report()?;
    report.notes.extend([
        format!(
            "M = {m}, gamma = {}, gamma_tilde = {}, oaa_rounds = {}",
            tuning.gamma, tuning.gamma_tilde, tuning.rounds
        ),
        format!(
            "EXACT_k oracle gates charged depth {} each",
            config.convention.oracle_depth
        ),
    ]);
    Ok(DickeQac0f {
        circuit: c,
        preparation: prep,
        layout,
        tuning,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        assert!((p_good(4, 1) - 0.421875).abs() < 1e-15);
        assert!((p_good(4, 2) - 0.375).abs() < 1e-15);
        assert!((gamma(4, 1, 3) - (1.0 - 0.578125f64.powi(3))).abs() < 1e-15);
        assert!((gamma(5, 2, 1) - p_good(5, 2)).abs() < 1e-15);
    }

    #[test]
    fn block_counts() {
        assert_eq!(choose_m(4, 1, BlockCountMode::Paper).unwrap(), 3);
        assert_eq!(
            choose_m(3, 1, BlockCountMode::Desk { gamma_floor: 0.5 }).unwrap(),
            2
        );
        assert!(choose_m(3, 1, BlockCountMode::Desk { gamma_floor: 1.5 }).is_err());
    }

    #[test]
    fn tuning_examples() {
        let t = tune_amplitude(gamma(4, 1, 3)).unwrap();
        assert_eq!(t.rounds, 1);
        assert!((t.gamma_tilde - 0.25).abs() < 1e-15);
        let exact = tune_amplitude(0.25).unwrap();
        assert!((exact.phi - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        assert_eq!(tune_amplitude(0.2).unwrap().rounds, 2);
        assert!(tune_amplitude(0.0).is_err());
    }

    #[test]
    fn layout_budget_matches_allocation() {
        for mode in [CswapMode::Sequential, CswapMode::Parallel] {
            for (n, m) in [(2, 1), (3, 2), (4, 3)] {
                let l = BlockLayout::new(n, 1, m, mode, usize::MAX).unwrap();
                assert_eq!(l.qubit_count(), BlockLayout::estimate_qubits(n, m, mode));
                let v = l.to_json_value();
                assert_eq!(v["total_qubits"], l.qubit_count());
                assert_eq!(v["groups"]["Q"].as_array().unwrap().len(), n);
            }
        }
    }

    #[test]
    fn layout_over_cap_names_every_register() {
        let err = BlockLayout::new(4, 2, 3, CswapMode::Sequential, 24).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::ResourceLimit(_)));
        for part in ["blocks 12", "flags 3", "select 3", "q 4", "31 qubits"] {
            assert!(msg.contains(part), "{msg}");
        }
    }
}
