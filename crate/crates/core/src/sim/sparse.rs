use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::{
    bitstring, check_register, FidelityKind, FidelityResult, QuantumState, StateVector,
    PRUNE_NORM_SQR,
};
use crate::circuit::{Gate, Layer, Matrix2, Qubit1, QubitId};
use crate::{Error, Result};

/// Default bound on stored amplitudes.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 22;

/// A computational basis string of arbitrary width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisKey(Box<[u64]>);

impl BasisKey {
    pub fn zero(n: usize) -> Self {
        BasisKey(vec![0; n.div_ceil(64).max(1)].into_boxed_slice())
    }

    pub fn from_bits(n: usize, bits: impl IntoIterator<Item = (usize, bool)>) -> Self {
        let mut k = BasisKey::zero(n);
        for (q, b) in bits {
            k.set(q, b);
        }
        k
    }

    #[inline]
    pub fn get(&self, q: usize) -> bool {
        self.0[q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, q: usize, v: bool) {
        let w = &mut self.0[q / 64];
        let m = 1u64 << (q % 64);
        if v {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, q: usize) {
        self.0[q / 64] ^= 1u64 << (q % 64);
    }
}

/// Sparse statevector: only nonzero amplitudes are stored.
#[derive(Clone, Debug)]
pub struct SparseState {
    n: usize,
    amps: HashMap<BasisKey, Complex64>,
    max_entries: usize,
}

/// Outcome of a gate that maps basis states to basis states.
enum Classical {
    Keep,
    Negate,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl SparseState {
    pub fn zero(n: usize) -> Self {
        Self::basis(BasisKey::zero(n), n)
    }

    pub fn basis(key: BasisKey, n: usize) -> Self {
        let mut amps = HashMap::new();
        amps.insert(key, Complex64::new(1.0, 0.0));
        SparseState {
            n,
            amps,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }

    pub fn from_dense(state: &StateVector) -> Self {
        let n = state.qubits();
        let amps = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| {
                (
                    BasisKey::from_bits(n, (0..n).map(|q| (q, i >> q & 1 == 1))),
                    *a,
                )
            })
            .collect();
        SparseState {
            n,
            amps,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }

    pub fn to_dense(&self) -> Result<StateVector> {
        if self.n > super::DEFAULT_MAX_QUBITS {
            return Err(Error::ResourceLimit(format!(
                "{} qubits is too many for a dense copy",
                self.n
            )));
        }
        let mut out = vec![zero(); 1usize << self.n];
        for (k, a) in &self.amps {
            let idx = (0..self.n).fold(0usize, |acc, q| acc | (usize::from(k.get(q)) << q));
            out[idx] = *a;
        }
        StateVector::from_amplitudes(out)
    }

    pub fn set_max_entries(&mut self, max: usize) {
        self.max_entries = max;
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, key: &BasisKey) -> Complex64 {
        self.amps.get(key).copied().unwrap_or_else(zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BasisKey, &Complex64)> {
        self.amps.iter()
    }

    pub fn scale(&mut self, phase: Complex64) {
        self.amps.values_mut().for_each(|a| *a *= phase);
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SparseState) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionError(format!(
                "{} vs {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .filter_map(|(k, a)| other.amps.get(k).map(|b| a.conj() * b))
            .sum())
    }

    pub fn fidelity(&self, other: &SparseState) -> Result<FidelityResult> {
        Ok(FidelityResult::new(
            self.inner(other)?.norm_sqr(),
            FidelityKind::FullState,
        ))
    }

    fn check_entries(&self) -> Result<()> {
        if self.amps.len() > self.max_entries {
            return Err(Error::ResourceLimit(format!(
                "sparse state grew to {} entries (cap {})",
                self.amps.len(),
                self.max_entries
            )));
        }
        Ok(())
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        gate.validate()?;
        match gate.qubits().iter().find(|q| q.0 >= self.n) {
            Some(q) => Err(Error::InvalidGate(format!(
                "qubit {q} out of range for {} qubits",
                self.n
            ))),
            None => Ok(()),
        }
    }

    /// Classical action on one basis string, or `None` if the gate creates
    /// superpositions.
    fn classical(gate: &Gate, key: &mut BasisKey) -> Option<Classical> {
        match gate {
            Gate::GlobalCz { support } => Some(if support.iter().all(|q| key.get(q.0)) {
                Classical::Negate
            } else {
                Classical::Keep
            }),
            Gate::FanOut { control, targets } => {
                if key.get(control.0) {
                    targets.iter().for_each(|t| key.flip(t.0));
                }
                Some(Classical::Keep)
            }
            Gate::MultiToffoli { controls, target } => {
                if controls.iter().all(|(q, p)| p.fires(key.get(q.0))) {
                    key.flip(target.0);
                }
                Some(Classical::Keep)
            }
            Gate::Oracle(o) => {
                let w = o.inputs().iter().filter(|q| key.get(q.0)).count();
                if o.fires(w) {
                    key.flip(o.target().0);
                }
                Some(Classical::Keep)
            }
            _ => None,
        }
    }

    fn apply_classical_batch(&mut self, gates: &[&Gate]) {
        let old = std::mem::take(&mut self.amps);
        self.amps.reserve(old.len());
        for (mut k, mut a) in old {
            for g in gates {
                if let Some(Classical::Negate) = Self::classical(g, &mut k) {
                    a = -a;
                }
            }
            self.amps.insert(k, a);
        }
    }

    fn apply_single(&mut self, q: usize, m: &Matrix2) -> Result<()> {
        let off_diag = m[0][1].norm_sqr() + m[1][0].norm_sqr() == 0.0;
        let diag = m[0][0].norm_sqr() + m[1][1].norm_sqr() == 0.0;
        if off_diag || diag {
            // monomial matrix: basis strings map one to one
            let old = std::mem::take(&mut self.amps);
            for (mut k, a) in old {
                let b = usize::from(k.get(q));
                let (row, factor) = if off_diag {
                    (b, m[b][b])
                } else {
                    (1 - b, m[1 - b][b])
                };
                k.set(q, row == 1);
                self.amps.insert(k, a * factor);
            }
            return Ok(());
        }
        let mut out: HashMap<BasisKey, Complex64> = HashMap::with_capacity(self.amps.len() * 2);
        for (k, a) in self.amps.drain() {
            let b = usize::from(k.get(q));
            let mut k0 = k;
            k0.set(q, false);
            let mut k1 = k0.clone();
            k1.set(q, true);
            *out.entry(k0).or_insert_with(zero) += m[0][b] * a;
            *out.entry(k1).or_insert_with(zero) += m[1][b] * a;
        }
        out.retain(|_, a| a.norm_sqr() > PRUNE_NORM_SQR);
        self.amps = out;
        self.check_entries()
    }

    fn apply_reflection(&mut self, support: &[(QubitId, Qubit1)]) -> Result<()> {
        // nonzero components of φ on each support qubit
        let choices: Vec<Vec<(bool, Complex64)>> = support
            .iter()
            .map(|(_, s)| {
                [(false, s[0]), (true, s[1])]
                    .into_iter()
                    .filter(|(_, v)| v.norm_sqr() > 0.0)
                    .collect()
            })
            .collect();
        let combos: usize = choices.iter().map(Vec::len).product();
        if combos > self.max_entries {
            return Err(Error::ResourceLimit(format!(
                "reflection spreads over {combos} basis strings per group"
            )));
        }
        let mut terms: Vec<(Vec<bool>, Complex64)> = vec![(Vec::new(), Complex64::new(1.0, 0.0))];
        for ch in &choices {
            terms = terms
                .into_iter()
                .flat_map(|(bits, v)| {
                    ch.iter().map(move |(b, c)| {
                        let mut bits = bits.clone();
                        bits.push(*b);
                        (bits, v * c)
                    })
                })
                .collect();
        }
        let mut groups: HashMap<BasisKey, Complex64> = HashMap::new();
        for (k, a) in &self.amps {
            let mut base = k.clone();
            let mut phi = Complex64::new(1.0, 0.0);
            for (q, s) in support {
                phi *= s[usize::from(base.get(q.0))];
                base.set(q.0, false);
            }
            if phi.norm_sqr() > 0.0 {
                *groups.entry(base).or_insert_with(zero) += phi.conj() * a;
            }
        }
        for (base, inner) in groups {
            if inner.norm_sqr() == 0.0 {
                continue;
            }
            for (bits, phi) in &terms {
                let mut k = base.clone();
                for ((q, _), b) in support.iter().zip(bits) {
                    k.set(q.0, *b);
                }
                *self.amps.entry(k).or_insert_with(zero) -= 2.0 * inner * phi;
            }
        }
        self.amps.retain(|_, a| a.norm_sqr() > PRUNE_NORM_SQR);
        self.check_entries()
    }
}

impl QuantumState for SparseState {
    fn qubit_count(&self) -> usize {
        self.n
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        self.check_gate(gate)?;
        match gate {
            Gate::SingleQubit { target, matrix } => self.apply_single(target.0, matrix),
            Gate::ProductReflection { support } => self.apply_reflection(support),
            g => {
                self.apply_classical_batch(&[g]);
                Ok(())
            }
        }
    }

    /// Classical gates of a layer are applied in a single pass.
    fn apply_layer(&mut self, layer: &Layer) -> Result<()> {
        let mut batch = Vec::new();
        for g in layer.gates() {
            self.check_gate(g)?;
            match g {
                Gate::SingleQubit { .. } | Gate::ProductReflection { .. } => self.apply_gate(g)?,
                g => batch.push(g),
            }
        }
        if !batch.is_empty() {
            self.apply_classical_batch(&batch);
        }
        Ok(())
    }

    fn norm_sqr(&self) -> f64 {
        super::compensated_sum(self.amps.values().map(Complex64::norm_sqr))
    }

    fn reduced_overlap(
        &self,
        register: &[QubitId],
        target: &StateVector,
    ) -> Result<FidelityResult> {
        check_register(self.n, register)?;
        if target.qubits() != register.len() {
            return Err(Error::DimensionError(format!(
                "target has {} qubits, register has {}",
                target.qubits(),
                register.len()
            )));
        }
        let mut groups: HashMap<BasisKey, Complex64> = HashMap::new();
        for (k, a) in &self.amps {
            let mut rest = k.clone();
            let mut r = 0usize;
            for (j, q) in register.iter().enumerate() {
                r |= usize::from(rest.get(q.0)) << j;
                rest.set(q.0, false);
            }
            *groups.entry(rest).or_insert_with(zero) += target.amplitude(r).conj() * a;
        }
        let total = groups.values().map(Complex64::norm_sqr).sum();
        Ok(FidelityResult::new(total, FidelityKind::ReducedRegister))
    }

    fn register_distribution(&self, register: &[QubitId]) -> Result<BTreeMap<String, f64>> {
        check_register(self.n, register)?;
        let mut out = BTreeMap::new();
        for (k, a) in &self.amps {
            let key = bitstring(register.iter().map(|q| k.get(q.0)));
            *out.entry(key).or_insert(0.0) += a.norm_sqr();
        }
        Ok(out)
    }

    fn postselect(&self, qubit: QubitId, value: bool) -> Result<(Self, f64)> {
        check_register(self.n, &[qubit])?;
        let prob: f64 = self
            .amps
            .iter()
            .filter(|(k, _)| k.get(qubit.0) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if prob == 0.0 {
            return Err(Error::InvalidRegister(format!(
                "qubit {qubit} never reads {}",
                u8::from(value)
            )));
        }
        let scale = 1.0 / prob.sqrt();
        let amps = self
            .amps
            .iter()
            .filter(|(k, _)| k.get(qubit.0) == value)
            .map(|(k, a)| (k.clone(), a * scale))
            .collect();
        Ok((
            SparseState {
                n: self.n,
                amps,
                max_entries: self.max_entries,
            },
            prob,
        ))
    }
}
