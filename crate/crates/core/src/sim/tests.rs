use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::circuit::{c, Gate, Model, OracleGate, Polarity};

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-12
}

fn random_state(n: usize, seed: &[f64]) -> StateVector {
    let raw: Vec<Complex64> = (0..1usize << n)
        .map(|i| {
            c(
                seed[(2 * i) % seed.len()] + 0.1,
                seed[(2 * i + 1) % seed.len()],
            )
        })
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn w3() -> StateVector {
    let s = 1.0 / 3f64.sqrt();
    let mut v = vec![c(0.0, 0.0); 8];
    for i in [1, 2, 4] {
        v[i] = c(s, 0.0);
    }
    StateVector::from_amplitudes(v).unwrap()
}

#[test]
fn gcz_phases_all_ones_only() {
    let g = Gate::global_cz([0, 1]).unwrap();
    let mut s = StateVector::basis(2, 0b11).unwrap();
    s.apply_gate(&g).unwrap();
    assert!(close(s.amplitude(3), c(-1.0, 0.0)));
    let mut s = StateVector::basis(2, 0).unwrap();
    s.apply_gate(&g).unwrap();
    assert!(close(s.amplitude(0), c(1.0, 0.0)));
}

#[test]
fn fanout_copies_control() {
    let mut s = StateVector::basis(3, 0b001).unwrap();
    s.apply_gate(&Gate::fan_out(0, [1, 2]).unwrap()).unwrap();
    assert!(close(s.amplitude(0b111), c(1.0, 0.0)));
}

#[test]
fn out_of_range_gate_rejected() {
    let mut s = StateVector::zero(2).unwrap();
    assert!(matches!(
        s.apply_gate(&Gate::x(5)),
        Err(Error::InvalidGate(_))
    ));
    let mut sp = SparseState::zero(2);
    assert!(sp.apply_gate(&Gate::x(2)).is_err());
}

#[test]
fn dimension_mismatch() {
    let mut s = StateVector::zero(2).unwrap();
    let circ = Circuit::empty(3, Model::Qac0);
    assert!(matches!(
        s.apply_circuit(&circ),
        Err(Error::DimensionError(_))
    ));
}

#[test]
fn dense_cap() {
    assert!(matches!(
        StateVector::zero(25),
        Err(Error::ResourceLimit(_))
    ));
    assert!(StateVector::zero_with_cap(3, 2).is_err());
}

#[test]
fn product_state_overlap_with_w4() {
    // sin²θ = 1/4 on four qubits against W_4
    let phi = [c(0.75f64.sqrt(), 0.0), c(0.5, 0.0)];
    let eta = StateVector::product(&[phi; 4]).unwrap();
    let mut w = vec![c(0.0, 0.0); 16];
    for i in [1, 2, 4, 8] {
        w[i] = c(0.5, 0.0);
    }
    let w = StateVector::from_amplitudes(w).unwrap();
    let oracle = 4.0 * 0.25 * 0.75f64.powi(3);
    assert!((eta.fidelity(&w).unwrap().value - oracle).abs() < 1e-12);
    assert!((oracle - 0.421875).abs() < 1e-15);
}

#[test]
fn fidelity_trivial_cases() {
    let a = StateVector::basis(1, 0).unwrap();
    let b = StateVector::basis(1, 1).unwrap();
    assert_eq!(a.fidelity(&b).unwrap().value, 0.0);
    assert!((a.fidelity(&a).unwrap().value - 1.0).abs() < 1e-15);
}

fn reduced_example() -> StateVector {
    // √0.8·|W3⟩|α⟩ + √0.2·|000⟩|β⟩ with α = |0⟩|+⟩, β = |1⟩|−⟩ on qubits 3,4
    let w = w3();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![c(0.0, 0.0); 32];
    for sys in 0..8 {
        let a = w.amplitude(sys) * 0.8f64.sqrt();
        amps[sys] += a * h;
        amps[sys | 0b10000] += a * h;
    }
    let b = 0.2f64.sqrt() * h;
    amps[0b01000] += c(b, 0.0);
    amps[0b11000] -= c(b, 0.0);
    StateVector::from_amplitudes(amps).unwrap()
}

#[test]
fn reduced_overlap_mixture() {
    let s = reduced_example();
    let reg = [QubitId(0), QubitId(1), QubitId(2)];
    let f = s.reduced_overlap(&reg, &w3()).unwrap();
    assert_eq!(f.kind, FidelityKind::ReducedRegister);
    assert!((f.value - 0.8).abs() < 1e-12);
    let sp = SparseState::from_dense(&s);
    assert!((sp.reduced_overlap(&reg, &w3()).unwrap().value - 0.8).abs() < 1e-12);
}

#[test]
fn reduced_overlap_product_and_orthogonal() {
    let mut amps = vec![c(0.0, 0.0); 16];
    for i in [1, 2, 4] {
        amps[i | 8] = c(1.0 / 3f64.sqrt(), 0.0);
    }
    let s = StateVector::from_amplitudes(amps).unwrap();
    let reg = [QubitId(0), QubitId(1), QubitId(2)];
    assert!((s.reduced_overlap(&reg, &w3()).unwrap().value - 1.0).abs() < 1e-12);
    let z = StateVector::zero(4).unwrap();
    assert_eq!(z.reduced_overlap(&reg, &w3()).unwrap().value, 0.0);
    assert!(matches!(
        z.reduced_overlap(&[QubitId(0), QubitId(9), QubitId(1)], &w3()),
        Err(Error::InvalidRegister(_))
    ));
}

#[test]
fn register_distribution_and_postselect() {
    let s = reduced_example();
    let d = s.register_distribution(&[QubitId(3)]).unwrap();
    assert!((d["0"] - 0.8).abs() < 1e-12);
    assert!((d["1"] - 0.2).abs() < 1e-12);
    let (post, p) = s.postselect(QubitId(3), false).unwrap();
    assert!((p - 0.8).abs() < 1e-12);
    let reg = [QubitId(0), QubitId(1), QubitId(2)];
    assert!((post.reduced_overlap(&reg, &w3()).unwrap().value - 1.0).abs() < 1e-12);
    let sp = SparseState::from_dense(&s);
    let (sp_post, sp_p) = sp.postselect(QubitId(3), false).unwrap();
    assert!((sp_p - p).abs() < 1e-12);
    assert!((sp_post.to_dense().unwrap().fidelity(&post).unwrap().value - 1.0).abs() < 1e-12);
}

#[test]
fn binary_dump_round_trip() {
    let s = reduced_example();
    let mut buf = Vec::new();
    s.write_le(&mut buf).unwrap();
    assert_eq!(buf.len(), 32 * 16);
    assert_eq!(&buf[..8], &s.amplitude(0).re.to_le_bytes());
    assert_eq!(StateVector::read_le(buf.as_slice()).unwrap(), s);
}

#[test]
fn reflection_about_eta_fixes_orthogonal_and_negates_eta() {
    let phi = [c(0.6, 0.0), c(0.0, 0.8)];
    let g = Gate::product_reflection([(0, phi), (1, phi)]).unwrap();
    let mut eta = StateVector::product(&[phi, phi]).unwrap();
    let before = eta.clone();
    eta.apply_gate(&g).unwrap();
    for i in 0..4 {
        assert!(close(eta.amplitude(i), -before.amplitude(i)));
    }
    let mut sp = SparseState::from_dense(&before);
    sp.apply_gate(&g).unwrap();
    assert!((sp.to_dense().unwrap().inner(&eta).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
}

/// Explicit `2^N × 2^N` matrix of a gate, built from its definition.
#[allow(clippy::needless_range_loop)]
fn gate_matrix(n: usize, g: &Gate) -> Vec<Vec<Complex64>> {
    let dim = 1usize << n;
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    let bit = |i: usize, q: QubitId| i >> q.0 & 1 == 1;
    for col in 0..dim {
        match g {
            Gate::SingleQubit { target, matrix } => {
                let b = usize::from(bit(col, *target));
                for r in 0..2 {
                    let row = (col & !(1 << target.0)) | (r << target.0);
                    m[row][col] += matrix[r][b];
                }
            }
            Gate::GlobalCz { support } => {
                m[col][col] = if support.iter().all(|q| bit(col, *q)) {
                    c(-1.0, 0.0)
                } else {
                    c(1.0, 0.0)
                };
            }
            Gate::FanOut { control, targets } => {
                let row = if bit(col, *control) {
                    targets.iter().fold(col, |r, t| r ^ (1 << t.0))
                } else {
                    col
                };
                m[row][col] = c(1.0, 0.0);
            }
            _ => unreachable!(),
        }
    }
    m
}

fn arb_primitive(n: usize) -> impl Strategy<Value = Gate> {
    let qubits = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
    (qubits, 1..=n, any::<u8>(), -3.0f64..3.0, -3.0f64..3.0).prop_map(
        move |(qs, width, kind, a, b)| match kind % 3 {
            0 => {
                let (s, co) = a.sin_cos();
                let e = c(0.0, b).exp();
                Gate::single(
                    qs[0],
                    [
                        [c(co, 0.0), -c(s, 0.0) * e.conj()],
                        [c(s, 0.0) * e, c(co, 0.0)],
                    ],
                )
                .unwrap()
            }
            1 => Gate::global_cz(qs[..width].to_vec()).unwrap(),
            _ if qs.len() == 1 => Gate::global_cz([qs[0]]).unwrap(),
            _ => Gate::fan_out(qs[0], qs[1..width.max(2)].to_vec()).unwrap(),
        },
    )
}

fn arb_any_gate(n: usize) -> impl Strategy<Value = Gate> {
    let qubits = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
    (
        qubits,
        1..n,
        prop::collection::vec(any::<bool>(), n),
        prop::collection::vec(0.0f64..6.3, n),
        any::<u8>(),
    )
        .prop_map(move |(qs, width, pols, angles, kind)| match kind % 5 {
            0 => Gate::multi_toffoli(
                qs[1..=width].iter().zip(&pols).map(|(q, p)| {
                    (
                        *q,
                        if *p {
                            Polarity::Positive
                        } else {
                            Polarity::Negative
                        },
                    )
                }),
                qs[0],
            )
            .unwrap(),
            1 => Gate::product_reflection(
                qs[..width]
                    .iter()
                    .zip(&angles)
                    .map(|(q, a)| (*q, [c(a.cos(), 0.0), c(0.0, a.sin())])),
            )
            .unwrap(),
            2 => Gate::oracle(OracleGate::Exact {
                inputs: qs[1..=width].iter().map(|q| QubitId(*q)).collect(),
                target: QubitId(qs[0]),
                weight: pols.iter().filter(|p| **p).count() % (width + 1),
            })
            .unwrap(),
            3 => Gate::fan_out(qs[0], qs[1..=width].to_vec()).unwrap(),
            _ => Gate::ry(qs[0], angles[0]),
        })
}

fn seeds() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 16..64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_explicit_matrix(n in 1usize..=6, g in (1usize..=6).prop_flat_map(arb_primitive), seed in seeds()) {
        prop_assume!(g.qubits().iter().all(|q| q.0 < n));
        let psi = random_state(n, &seed);
        let mut out = psi.clone();
        out.apply_gate(&g).unwrap();
        let m = gate_matrix(n, &g);
        for (row, r) in m.iter().enumerate() {
            let expect: Complex64 = r.iter().zip(psi.amplitudes()).map(|(a, b)| a * b).sum();
            prop_assert!(close(out.amplitude(row), expect));
        }
    }

    #[test]
    fn dense_and_sparse_agree(gates in prop::collection::vec(arb_any_gate(5), 1..12), seed in seeds()) {
        let psi = random_state(5, &seed);
        let mut dense = psi.clone();
        let mut sparse = SparseState::from_dense(&psi);
        for g in &gates {
            dense.apply_gate(g).unwrap();
            sparse.apply_gate(g).unwrap();
            prop_assert!((dense.norm_sqr() - 1.0).abs() < 1e-10);
        }
        let back = sparse.to_dense().unwrap();
        for i in 0..32 {
            prop_assert!((back.amplitude(i) - dense.amplitude(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn gcz_and_fanout_preserve_magnitudes(n in 2usize..=12, g in (2usize..=12).prop_flat_map(arb_primitive), seed in seeds()) {
        prop_assume!(g.qubits().iter().all(|q| q.0 < n) && !matches!(g, Gate::SingleQubit { .. }));
        let psi = random_state(n, &seed);
        let mut out = psi.clone();
        out.apply_gate(&g).unwrap();
        let mut before: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm()).collect();
        let mut after: Vec<f64> = out.amplitudes().iter().map(|a| a.norm()).collect();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        prop_assert_eq!(before, after);
        if matches!(g, Gate::GlobalCz { .. }) {
            for i in 0..psi.amplitudes().len() {
                prop_assert_eq!(psi.amplitude(i).norm(), out.amplitude(i).norm());
            }
        }
    }

    #[test]
    fn reduced_overlap_on_full_register_is_fidelity(seed_a in seeds(), seed_b in seeds()) {
        let a = random_state(4, &seed_a);
        let b = random_state(4, &seed_b);
        let reg: Vec<QubitId> = (0..4).map(QubitId).collect();
        let r = a.reduced_overlap(&reg, &b).unwrap().value;
        prop_assert!((r - a.fidelity(&b).unwrap().value).abs() < 1e-12);
        let dist = a.register_distribution(&reg[..2]).unwrap();
        prop_assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn primitives_self_inverse_exhaustive() {
    let n = 10;
    let gates = [
        Gate::global_cz([0, 3, 7, 9]).unwrap(),
        Gate::fan_out(2, [0, 4, 5, 9]).unwrap(),
        Gate::global_cz([1]).unwrap(),
    ];
    for g in &gates {
        for idx in 0..1usize << n {
            let mut s = StateVector::basis(n, idx).unwrap();
            s.apply_gate(g).unwrap();
            s.apply_gate(g).unwrap();
            assert!(close(s.amplitude(idx), c(1.0, 0.0)), "{g:?} on {idx}");
        }
    }
}
