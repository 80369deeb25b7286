use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;

use super::{
    bitstring, check_register, FidelityKind, FidelityResult, QuantumState, DEFAULT_MAX_QUBITS,
};
use crate::circuit::{Gate, Matrix2, OracleGate, Polarity, Qubit1, QubitId};
use crate::{Error, Result};

/// Dense statevector over `2^N` basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

fn mask_of(qs: &[QubitId]) -> usize {
    qs.iter().fold(0, |m, q| m | (1usize << q.0))
}

/// Scatters the low bits of `sub` onto the positions listed in `qs`.
fn spread(sub: usize, qs: &[QubitId]) -> usize {
    qs.iter()
        .enumerate()
        .filter(|(j, _)| sub >> j & 1 == 1)
        .fold(0, |acc, (_, q)| acc | (1usize << q.0))
}

fn gather(idx: usize, qs: &[QubitId]) -> usize {
    qs.iter()
        .enumerate()
        .fold(0, |acc, (j, q)| acc | ((idx >> q.0 & 1) << j))
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits, honoring the default qubit cap.
    pub fn zero(n: usize) -> Result<Self> {
        Self::zero_with_cap(n, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_with_cap(n: usize, cap: usize) -> Result<Self> {
        Self::basis_with_cap(n, 0, cap)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        Self::basis_with_cap(n, index, DEFAULT_MAX_QUBITS)
    }

    fn basis_with_cap(n: usize, index: usize, cap: usize) -> Result<Self> {
        if n > cap || n >= usize::BITS as usize {
            return Err(Error::ResourceLimit(format!(
                "{n} qubits exceeds the dense simulator cap of {cap}"
            )));
        }
        if index >> n != 0 {
            return Err(Error::DimensionError(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm
    /// one within `1e-10`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::DimensionError(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        let n = amps.len().trailing_zeros() as usize;
        let s = StateVector { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::DimensionError(format!("state has norm² {norm}")));
        }
        Ok(s)
    }

    /// `⊗_i (φ_i[0]|0⟩ + φ_i[1]|1⟩)`, qubit 0 first.
    pub fn product(states: &[Qubit1]) -> Result<Self> {
        let n = states.len();
        let mut s = StateVector::zero(n)?;
        for (idx, a) in s.amps.iter_mut().enumerate() {
            *a = states
                .iter()
                .enumerate()
                .map(|(q, phi)| phi[idx >> q & 1])
                .product();
        }
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionError(format!(
                "{} vs {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<FidelityResult> {
        Ok(FidelityResult::new(
            self.inner(other)?.norm_sqr(),
            FidelityKind::FullState,
        ))
    }

    /// Multiplies every amplitude by `phase`.
    pub fn scale(&mut self, phase: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= phase);
    }

    /// Little-endian interleaved `re, im` doubles in basis order.
    pub fn write_le<W: Write>(&self, mut w: W) -> Result<()> {
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_le<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::Parse(
                "amplitude dump is not a multiple of 16 bytes".into(),
            ));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        StateVector::from_amplitudes(amps)
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

    fn apply_single(&mut self, q: usize, m: &Matrix2) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Swaps `i` with `i | bit` wherever `i` lacks `bit` and `pred(i)` holds.
    fn controlled_flip(&mut self, bit: usize, pred: impl Fn(usize) -> bool) {
        for i in 0..self.amps.len() {
            if i & bit == 0 && pred(i) {
                self.amps.swap(i, i | bit);
            }
        }
    }

    fn apply_reflection(&mut self, support: &[(QubitId, Qubit1)]) {
        let qs: Vec<QubitId> = support.iter().map(|(q, _)| *q).collect();
        let smask = mask_of(&qs);
        let width = qs.len();
        let phi: Vec<Complex64> = (0..1usize << width)
            .map(|sub| {
                support
                    .iter()
                    .enumerate()
                    .map(|(j, (_, s))| s[sub >> j & 1])
                    .product()
            })
            .collect();
        let offsets: Vec<usize> = (0..1usize << width).map(|sub| spread(sub, &qs)).collect();
        for base in 0..self.amps.len() {
            if base & smask != 0 {
                continue;
            }
            let inner: Complex64 = offsets
                .iter()
                .zip(&phi)
                .map(|(off, p)| p.conj() * self.amps[base | off])
                .sum();
            if inner == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (off, p) in offsets.iter().zip(&phi) {
                self.amps[base | off] -= 2.0 * inner * p;
            }
        }
    }
}

impl QuantumState for StateVector {
    fn qubit_count(&self) -> usize {
        self.n
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        self.check_gate(gate)?;
        match gate {
            Gate::SingleQubit { target, matrix } => self.apply_single(target.0, matrix),
            Gate::GlobalCz { support } => {
                let mask = mask_of(support);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a = -*a;
                    }
                }
            }
            Gate::FanOut { control, targets } => {
                let cbit = 1usize << control.0;
                let tmask = mask_of(targets);
                let low = 1usize << targets.iter().map(|q| q.0).min().expect("non-empty");
                for i in 0..self.amps.len() {
                    if i & cbit != 0 && i & low == 0 {
                        self.amps.swap(i, i ^ tmask);
                    }
                }
            }
            Gate::MultiToffoli { controls, target } => {
                let cmask = controls.iter().fold(0, |m, (q, _)| m | (1usize << q.0));
                let want = controls
                    .iter()
                    .filter(|(_, p)| *p == Polarity::Positive)
                    .fold(0, |m, (q, _)| m | (1usize << q.0));
                self.controlled_flip(1 << target.0, |i| i & cmask == want);
            }
            Gate::ProductReflection { support } => self.apply_reflection(support),
            Gate::Oracle(o) => {
                let imask = mask_of(o.inputs());
                let oracle: &OracleGate = o;
                self.controlled_flip(1 << o.target().0, |i| {
                    oracle.fires((i & imask).count_ones() as usize)
                });
            }
        }
        Ok(())
    }

    fn norm_sqr(&self) -> f64 {
        super::compensated_sum(self.amps.iter().map(Complex64::norm_sqr))
    }

    fn reduced_overlap(
        &self,
        register: &[QubitId],
        target: &StateVector,
    ) -> Result<FidelityResult> {
        check_register(self.n, register)?;
        if target.n != register.len() {
            return Err(Error::DimensionError(format!(
                "target has {} qubits, register has {}",
                target.n,
                register.len()
            )));
        }
        let rmask = mask_of(register);
        let offsets: Vec<usize> = (0..target.amps.len())
            .map(|s| spread(s, register))
            .collect();
        let mut total = 0.0;
        for base in 0..self.amps.len() {
            if base & rmask != 0 {
                continue;
            }
            let proj: Complex64 = offsets
                .iter()
                .zip(&target.amps)
                .map(|(off, t)| t.conj() * self.amps[base | off])
                .sum();
            total += proj.norm_sqr();
        }
        Ok(FidelityResult::new(total, FidelityKind::ReducedRegister))
    }

    fn register_distribution(&self, register: &[QubitId]) -> Result<BTreeMap<String, f64>> {
        check_register(self.n, register)?;
        let mut probs = vec![0.0; 1 << register.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[gather(i, register)] += a.norm_sqr();
        }
        Ok(probs
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 0.0)
            .map(|(r, p)| (bitstring((0..register.len()).map(|j| r >> j & 1 == 1)), p))
            .collect())
    }

    fn postselect(&self, qubit: QubitId, value: bool) -> Result<(Self, f64)> {
        check_register(self.n, &[qubit])?;
        let bit = 1usize << qubit.0;
        let keep = |i: usize| (i & bit != 0) == value;
        let prob: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
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
            .enumerate()
            .map(|(i, a)| {
                if keep(i) {
                    a * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok((StateVector { n: self.n, amps }, prob))
    }
}
