use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

/// Single-qubit state `(⟨0|φ⟩, ⟨1|φ⟩)`.
pub type Qubit1 = [Complex64; 2];

const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub usize);

impl QubitId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for QubitId {
    fn from(i: usize) -> Self {
        QubitId(i)
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Control polarity of a [`Gate::MultiToffoli`] control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    /// Fires on |1⟩.
    #[serde(rename = "+")]
    Positive,
    /// Fires on |0⟩.
    #[serde(rename = "-")]
    Negative,
}

impl Polarity {
    #[inline]
    pub fn fires(self, bit: bool) -> bool {
        match self {
            Polarity::Positive => bit,
            Polarity::Negative => !bit,
        }
    }
}

/// Classical predicates that are declared primitives with a configured
/// constant depth instead of being synthesized gate by gate.
///
/// `Exact` stands in for the fan-out based threshold construction of the
/// QAC0f model. `AtLeast` is the constant-width threshold over gadget
/// outcomes; its DNF realization has one term per subset of the required
/// size, which is constant in `n` but far too large to emit.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleGate {
    /// `target ^= [|x_inputs| == weight]`
    Exact {
        inputs: Vec<QubitId>,
        target: QubitId,
        weight: usize,
    },
    /// `target ^= [|x_inputs| >= count]`
    AtLeast {
        inputs: Vec<QubitId>,
        target: QubitId,
        count: usize,
    },
}

impl OracleGate {
    pub fn inputs(&self) -> &[QubitId] {
        match self {
            OracleGate::Exact { inputs, .. } | OracleGate::AtLeast { inputs, .. } => inputs,
        }
    }

    pub fn target(&self) -> QubitId {
        match self {
            OracleGate::Exact { target, .. } | OracleGate::AtLeast { target, .. } => *target,
        }
    }

    /// Evaluates the predicate on the Hamming weight of the inputs.
    pub fn fires(&self, weight: usize) -> bool {
        match *self {
            OracleGate::Exact { weight: w, .. } => weight == w,
            OracleGate::AtLeast { count, .. } => weight >= count,
        }
    }
}

/// A gate: the three primitives of the global-gate models, two expandable
/// macros, and declared oracle primitives.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    SingleQubit {
        target: QubitId,
        matrix: Matrix2,
    },
    /// Phase −1 iff every qubit of the support is |1⟩.
    GlobalCz {
        support: Vec<QubitId>,
    },
    /// XORs the control bit into every target.
    FanOut {
        control: QubitId,
        targets: Vec<QubitId>,
    },
    /// Flips `target` iff every control fires. Expands to an H-conjugated
    /// global CZ with X conjugation on negative controls.
    MultiToffoli {
        controls: Vec<(QubitId, Polarity)>,
        target: QubitId,
    },
    /// `I − 2|φ⟩⟨φ|` for the product state `φ = ⊗ φ_i`. Expands to a global
    /// CZ conjugated by single-qubit basis changes.
    ProductReflection {
        support: Vec<(QubitId, Qubit1)>,
    },
    Oracle(OracleGate),
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity2() -> Matrix2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

pub fn is_unitary(m: &Matrix2, tol: f64) -> bool {
    let p = mat_mul(&dagger(m), m);
    let id = identity2();
    (0..2).all(|i| (0..2).all(|j| (p[i][j] - id[i][j]).norm() <= tol))
}

fn is_identity(m: &Matrix2) -> bool {
    let id = identity2();
    (0..2).all(|i| (0..2).all(|j| (m[i][j] - id[i][j]).norm() <= 1e-15))
}

/// Unitary `W` with `W|1⟩ = |φ⟩`, so that `W·Z·W† = I − 2|φ⟩⟨φ|`.
pub fn basis_change_to(phi: &Qubit1) -> Matrix2 {
    let (a, b) = (phi[0], phi[1]);
    [[b.conj(), a], [-a.conj(), b]]
}

fn check_distinct(qubits: impl IntoIterator<Item = QubitId>, what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for q in qubits {
        if !seen.insert(q) {
            return Err(Error::InvalidGate(format!(
                "{what}: qubit {q} appears twice"
            )));
        }
    }
    Ok(())
}

impl Gate {
    pub fn single(target: impl Into<QubitId>, matrix: Matrix2) -> Result<Self> {
        let g = Gate::SingleQubit {
            target: target.into(),
            matrix,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn global_cz<I, Q>(support: I) -> Result<Self>
    where
        I: IntoIterator<Item = Q>,
        Q: Into<QubitId>,
    {
        let g = Gate::GlobalCz {
            support: support.into_iter().map(Into::into).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn fan_out<I, Q>(control: impl Into<QubitId>, targets: I) -> Result<Self>
    where
        I: IntoIterator<Item = Q>,
        Q: Into<QubitId>,
    {
        let g = Gate::FanOut {
            control: control.into(),
            targets: targets.into_iter().map(Into::into).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn multi_toffoli<I, Q>(controls: I, target: impl Into<QubitId>) -> Result<Self>
    where
        I: IntoIterator<Item = (Q, Polarity)>,
        Q: Into<QubitId>,
    {
        let g = Gate::MultiToffoli {
            controls: controls.into_iter().map(|(q, p)| (q.into(), p)).collect(),
            target: target.into(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Toffoli with all-positive controls.
    pub fn and<I, Q>(controls: I, target: impl Into<QubitId>) -> Result<Self>
    where
        I: IntoIterator<Item = Q>,
        Q: Into<QubitId>,
    {
        Gate::multi_toffoli(
            controls.into_iter().map(|q| (q.into(), Polarity::Positive)),
            target,
        )
    }

    /// Toffoli with all-negative controls: `target ^= NOR(controls)`.
    pub fn nor<I, Q>(controls: I, target: impl Into<QubitId>) -> Result<Self>
    where
        I: IntoIterator<Item = Q>,
        Q: Into<QubitId>,
    {
        Gate::multi_toffoli(
            controls.into_iter().map(|q| (q.into(), Polarity::Negative)),
            target,
        )
    }

    pub fn product_reflection<I, Q>(support: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Q, Qubit1)>,
        Q: Into<QubitId>,
    {
        let g = Gate::ProductReflection {
            support: support.into_iter().map(|(q, s)| (q.into(), s)).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn oracle(oracle: OracleGate) -> Result<Self> {
        let g = Gate::Oracle(oracle);
        g.validate()?;
        Ok(g)
    }

    pub fn x(q: impl Into<QubitId>) -> Self {
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        Gate::SingleQubit {
            target: q.into(),
            matrix: [[o, l], [l, o]],
        }
    }

    pub fn z(q: impl Into<QubitId>) -> Self {
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        Gate::SingleQubit {
            target: q.into(),
            matrix: [[l, o], [o, -l]],
        }
    }

    pub fn h(q: impl Into<QubitId>) -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Gate::SingleQubit {
            target: q.into(),
            matrix: [[s, s], [s, -s]],
        }
    }

    /// `R_y(angle) = exp(−i·angle·Y/2)`; `R_y(2θ)|0⟩ = cos θ|0⟩ + sin θ|1⟩`.
    pub fn ry(q: impl Into<QubitId>, angle: f64) -> Self {
        let (s, co) = (angle / 2.0).sin_cos();
        Gate::SingleQubit {
            target: q.into(),
            matrix: [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::SingleQubit { .. } => "1q",
            Gate::GlobalCz { .. } => "gcz",
            Gate::FanOut { .. } => "fanout",
            Gate::MultiToffoli { .. } => "mcx",
            Gate::ProductReflection { .. } => "reflect",
            Gate::Oracle(OracleGate::Exact { .. }) => "exact",
            Gate::Oracle(OracleGate::AtLeast { .. }) => "atleast",
        }
    }

    pub fn is_macro(&self) -> bool {
        matches!(
            self,
            Gate::MultiToffoli { .. } | Gate::ProductReflection { .. }
        )
    }

    /// Every qubit the gate touches.
    pub fn qubits(&self) -> Vec<QubitId> {
        match self {
            Gate::SingleQubit { target, .. } => vec![*target],
            Gate::GlobalCz { support } => support.clone(),
            Gate::FanOut { control, targets } => std::iter::once(*control)
                .chain(targets.iter().copied())
                .collect(),
            Gate::MultiToffoli { controls, target } => controls
                .iter()
                .map(|(q, _)| *q)
                .chain(std::iter::once(*target))
                .collect(),
            Gate::ProductReflection { support } => support.iter().map(|(q, _)| *q).collect(),
            Gate::Oracle(o) => o
                .inputs()
                .iter()
                .copied()
                .chain(std::iter::once(o.target()))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Gate::SingleQubit { matrix, target } => {
                if !is_unitary(matrix, UNITARY_TOL) {
                    return Err(Error::InvalidGate(format!(
                        "single-qubit matrix on {target} is not unitary"
                    )));
                }
                Ok(())
            }
            Gate::GlobalCz { support } => {
                if support.is_empty() {
                    return Err(Error::InvalidGate("global CZ with empty support".into()));
                }
                check_distinct(support.iter().copied(), "global CZ")
            }
            Gate::FanOut { control, targets } => {
                if targets.is_empty() {
                    return Err(Error::InvalidGate("fan-out without targets".into()));
                }
                if targets.contains(control) {
                    return Err(Error::InvalidGate(format!(
                        "fan-out control {control} is also a target"
                    )));
                }
                check_distinct(targets.iter().copied(), "fan-out")
            }
            Gate::MultiToffoli { .. } => check_distinct(self.qubits(), "multi-Toffoli"),
            Gate::ProductReflection { support } => {
                if support.is_empty() {
                    return Err(Error::InvalidGate(
                        "product reflection with empty support".into(),
                    ));
                }
                for (q, phi) in support {
                    let norm = phi[0].norm_sqr() + phi[1].norm_sqr();
                    if (norm - 1.0).abs() > UNITARY_TOL {
                        return Err(Error::InvalidGate(format!(
                            "reflection state on {q} has norm² {norm}"
                        )));
                    }
                }
                check_distinct(self.qubits(), "product reflection")
            }
            Gate::Oracle(o) => {
                if o.inputs().is_empty() {
                    return Err(Error::InvalidGate("oracle without inputs".into()));
                }
                check_distinct(self.qubits(), "oracle")
            }
        }
    }

    /// Conjugate transpose. Everything except single-qubit gates is an
    /// involution.
    pub fn inverse(&self) -> Gate {
        match self {
            Gate::SingleQubit { target, matrix } => Gate::SingleQubit {
                target: *target,
                matrix: dagger(matrix),
            },
            g => g.clone(),
        }
    }

    /// Phase-exact expansion into `(pre, middle, post)` gate lists, where
    /// `pre` and `post` hold only single-qubit gates.
    pub(crate) fn expand(&self) -> (Vec<Gate>, Vec<Gate>, Vec<Gate>) {
        match self {
            Gate::MultiToffoli { controls, target } => {
                let negs: Vec<Gate> = controls
                    .iter()
                    .filter(|(_, p)| *p == Polarity::Negative)
                    .map(|(q, _)| Gate::x(*q))
                    .collect();
                let mut pre = negs.clone();
                pre.push(Gate::h(*target));
                let mut post = vec![Gate::h(*target)];
                post.extend(negs);
                let support = controls
                    .iter()
                    .map(|(q, _)| *q)
                    .chain(std::iter::once(*target))
                    .collect();
                (pre, vec![Gate::GlobalCz { support }], post)
            }
            Gate::ProductReflection { support } => {
                let mut pre = Vec::new();
                let mut post = Vec::new();
                for (q, phi) in support {
                    let w = basis_change_to(phi);
                    if !is_identity(&w) {
                        pre.push(Gate::SingleQubit {
                            target: *q,
                            matrix: dagger(&w),
                        });
                        post.push(Gate::SingleQubit {
                            target: *q,
                            matrix: w,
                        });
                    }
                }
                let support = support.iter().map(|(q, _)| *q).collect();
                (pre, vec![Gate::GlobalCz { support }], post)
            }
            g => (Vec::new(), vec![g.clone()], Vec::new()),
        }
    }
}
