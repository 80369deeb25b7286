//! Constant-depth Dicke state preparation over global-gate circuit models.
//!
//! The crate synthesizes circuits in two models:
//!
//! - **QAC0**: arbitrary single-qubit gates (depth 0) plus unbounded global CZ
//!   gates. Fan-out is only available up to logarithmic width.
//! - **QAC0f**: QAC0 plus the unbounded quantum FAN-OUT gate.
//!
//! Circuits are built from explicit [`circuit::Layer`]s so that the measured
//! depth is exactly the depth the synthesizer intended. They can be executed
//! on a dense statevector ([`sim::StateVector`]) or, when ancilla-heavy, on a
//! sparse basis map ([`sim::SparseState`]).
//!
//! Module map:
//!
//! - [`circuit`]: gates, layers, registers, depth accounting, JSON / text I/O
//! - [`sim`]: statevector execution, fidelities, reduced overlaps
//! - [`boolean`]: EXACT / THRESHOLD functions, the recursive threshold formula
//!   and the randomized EXACT_1 gadget
//! - [`qac0`]: threshold / EXACT circuits, the Dicke amplitude-amplification
//!   reduction, and the constant-ancilla approximate W state
//! - [`qac0f`]: the parallel-block arbitrary-weight construction
//! - [`verify`]: reference states and pass/fail verdicts

pub mod boolean;
pub mod circuit;
mod error;
pub mod qac0;
pub mod qac0f;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
