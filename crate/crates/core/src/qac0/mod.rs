//! QAC0 synthesis: THRESHOLD / EXACT bit circuits, phase oracles, exact
//! Dicke states by amplitude amplification, and the constant-ancilla
//! approximate W state.
//!
//! The Dicke construction starts from the product state
//! `|η_θ⟩ = (cos θ|0⟩ + sin θ|1⟩)^{⊗n}`, whose overlap with `|D^n_k⟩` is
//! `p(θ) = C(n,k)·sin^{2k}θ·cos^{2(n−k)}θ`. The angle is tuned so that
//! `p(θ) = sin²(π/(4ℓ+2))`, after which `ℓ` Grover rounds rotate the state
//! exactly onto `|D^n_k⟩`.

mod threshold;
mod wstate;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, DepthConvention, Gate, Layer, ResourceReport, Role};
use crate::{Error, Result};

pub(crate) use threshold::settle_model;
pub use threshold::{
    estimate_exact_qubits, estimate_threshold_qubits, phase_oracle, synth_exact_circuit,
    synth_exact_circuit_capped, synth_threshold_circuit, synth_threshold_circuit_capped,
    DEFAULT_MAX_SYNTH_QUBITS,
};
pub use wstate::{synth_w_approx, WApprox, WOptions, WOracle};

/// Largest weight (after complementing `k > n/2`) the QAC0 path accepts.
pub const MAX_QAC0_WEIGHT: usize = 4;

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `C(n,k)·s^k·(1−s)^{n−k}` evaluated in log space.
pub(crate) fn binomial_pmf(n: usize, k: usize, s: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let term = |count: usize, p: f64| {
        if count == 0 {
            0.0
        } else {
            count as f64 * p.ln()
        }
    };
    (ln_binomial(n, k) + term(k, s) + term(n - k, 1.0 - s)).exp()
}

/// `|⟨η_θ|D^n_k⟩|² = C(n,k)·(sin²θ)^k·(cos²θ)^{n−k}`.
pub fn binomial_overlap(n: usize, k: usize, theta: f64) -> f64 {
    binomial_pmf(n, k, theta.sin().powi(2))
}

/// Smallest `ℓ ≥ 1` with `sin²(π/(4ℓ+2)) < e^{−k}`, and that value.
pub fn grover_rounds(k: usize) -> (usize, f64) {
    let bound = (-(k as f64)).exp();
    (1..)
        .map(|l| (l, c_target(l)))
        .find(|&(_, c)| c < bound)
        .expect("sin²(π/(4ℓ+2)) tends to 0")
}

/// `sin²(π/(4ℓ+2))`: the initial success probability that `ℓ` rounds
/// amplify to exactly 1.
pub fn c_target(rounds: usize) -> f64 {
    (std::f64::consts::PI / (4 * rounds + 2) as f64)
        .sin()
        .powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSolution {
    pub theta: f64,
    pub c_target: f64,
    pub grover_rounds: usize,
    pub branch: Branch,
    /// `|p(θ) − c_target|`.
    pub residual: f64,
}

/// Bisects `p(θ) = c_target` on `θ ∈ (0, arcsin √(k/n))`, where `p` is
/// increasing.
pub fn solve_theta(n: usize, k: usize, c_target: f64, tol: f64) -> Result<AngleSolution> {
    if k == 0 || k >= n {
        return Err(Error::NoSolution(format!(
            "angle search needs 0 < k < n, got n = {n}, k = {k}"
        )));
    }
    let top = (k as f64 / n as f64).sqrt().asin();
    let peak = binomial_overlap(n, k, top);
    if !(c_target > 0.0 && c_target < peak) {
        return Err(Error::NoSolution(format!(
            "target {c_target} is outside (0, {peak}) for n = {n}, k = {k}"
        )));
    }
    let f = |t: f64| binomial_overlap(n, k, t) - c_target;
    let (mut lo, mut hi) = (0.0f64, top);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() < tol || mid <= lo || mid >= hi {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = f(mid).abs();
    if residual >= tol.max(1e-12) {
        return Err(Error::NoSolution(format!(
            "bisection stalled with residual {residual}"
        )));
    }
    Ok(AngleSolution {
        theta: mid,
        c_target,
        grover_rounds: 0,
        branch: Branch::Increasing,
        residual,
    })
}

/// Angle and round count for weight `k` on `n` qubits.
pub fn dicke_angle(n: usize, k: usize, tol: f64) -> Result<AngleSolution> {
    let (rounds, c) = grover_rounds(k);
    Ok(AngleSolution {
        grover_rounds: rounds,
        ..solve_theta(n, k, c, tol)?
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub n: usize,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub bisection_tol: f64,
    pub max_qubits: usize,
    pub convention: DepthConvention,
    /// Prepare `k > n/2` as weight `n − k` plus an X layer. Applied anyway
    /// when `k` itself exceeds [`MAX_QAC0_WEIGHT`].
    pub complement_high_weight: bool,
}

impl SynthesisConfig {
    pub fn new(n: usize, k: usize) -> Self {
        SynthesisConfig {
            n,
            k,
            epsilon: None,
            seed: 0,
            bisection_tol: 1e-13,
            max_qubits: DEFAULT_MAX_SYNTH_QUBITS,
            convention: DepthConvention::default(),
            complement_high_weight: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DickeQac0 {
    pub circuit: Circuit,
    /// `None` when no amplification is needed (`k ∈ {0, n}`).
    pub angle: Option<AngleSolution>,
    pub report: ResourceReport,
    /// Weight actually amplified; `n − k` when the output is complemented.
    pub effective_k: usize,
}

fn ry_layer(qubits: &[crate::circuit::QubitId], theta: f64) -> Result<Layer> {
    Layer::from_gates(qubits.iter().map(|&q| Gate::ry(q, 2.0 * theta)))
}

pub(crate) fn eta_reflection(qubits: &[crate::circuit::QubitId], theta: f64) -> Result<Layer> {
    let phi = [
        crate::circuit::c(theta.cos(), 0.0),
        crate::circuit::c(theta.sin(), 0.0),
    ];
    Layer::from_gates([Gate::product_reflection(qubits.iter().map(|&q| (q, phi)))?])
}

/// Exact `|D^n_k⟩` on qubits `0..n`: an `R_y(2θ)` layer followed by `ℓ`
/// rounds of [EXACT_k phase oracle, reflection about `|η_θ⟩`]. Weights
/// above `n/2` may be prepared as weight `n − k` followed by an X layer
/// (see [`SynthesisConfig::complement_high_weight`]).
pub fn synth_dicke_qac0(config: &SynthesisConfig) -> Result<DickeQac0> {
    let (n, k) = (config.n, config.k);
    if k > n || n == 0 {
        return Err(Error::ConfigMismatch(format!(
            "need 0 ≤ k ≤ n, n ≥ 1; got n = {n}, k = {k}"
        )));
    }
    let flip = k == n || (2 * k > n && (config.complement_high_weight || k > MAX_QAC0_WEIGHT));
    let kk = if flip { n - k } else { k };
    if kk > MAX_QAC0_WEIGHT {
        return Err(Error::Unsupported(format!(
            "weight {kk} exceeds the QAC0 cap of {MAX_QAC0_WEIGHT}: the amplification \
             approach needs super-constant depth for growing weight"
        )));
    }
    let mut notes = Vec::new();
    let (mut circ, system, angle) = if kk == 0 {
        let mut c = Circuit::empty(n, crate::circuit::Model::Qac0);
        c.registers_mut().add_group(
            "x",
            &(0..n).map(crate::circuit::QubitId).collect::<Vec<_>>(),
            Role::System,
        )?;
        let sys = c.registers().group("x").expect("just added").to_vec();
        (c, sys, None)
    } else {
        let angle = dicke_angle(n, kk, config.bisection_tol)?;
        let bit = synth_exact_circuit_capped(n, kk, config.max_qubits)?;
        let oracle = phase_oracle(&bit)?;
        let mut registers = bit.registers().clone();
        let out = registers.group("out").expect("bit circuit has out")[0];
        registers.set_role(out, Role::Ancilla)?;
        let system = registers.group("x").expect("bit circuit has x").to_vec();
        let mut c = Circuit::new(registers, bit.model());
        c.push_layer(ry_layer(&system, angle.theta)?)?;
        for _ in 0..angle.grover_rounds {
            c.extend_layers(oracle.layers().iter().cloned())?;
            c.push_layer(eta_reflection(&system, angle.theta)?)?;
        }
        notes.push(format!(
            "theta = {}, c_target = {}, grover_rounds = {}",
            angle.theta, angle.c_target, angle.grover_rounds
        ));
        (c, system, Some(angle))
    };
    if flip {
        circ.push_layer(Layer::from_gates(system.iter().map(|&q| Gate::x(q)))?)?;
        notes.push(format!("prepared weight {kk} and complemented"));
    }
    circ.set_convention(config.convention);
    if let Some(note) = settle_model(&mut circ)? {
        notes.push(note);
    }
    let mut report = circ.resource_report()?;
    report.notes.extend(notes);
    Ok(DickeQac0 {
        circuit: circ,
        angle,
        report,
        effective_k: kk,
    })
}
