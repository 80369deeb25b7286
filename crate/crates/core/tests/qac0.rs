use dicke_core::boolean::{exact_k, threshold_k, BitString, SubsetFamily};
use dicke_core::circuit::{Gate, Model, QubitId};
use dicke_core::qac0::{
    estimate_exact_qubits, estimate_threshold_qubits, phase_oracle, synth_dicke_qac0,
    synth_exact_circuit, synth_threshold_circuit, synth_w_approx, SynthesisConfig, WOptions,
    WOracle,
};
use dicke_core::sim::{QuantumState, SparseState, StateVector};
use dicke_core::verify::{simulate_dicke, truth_table_check};
use dicke_core::Error;
use num_complex::Complex64;

fn system(n: usize) -> Vec<QubitId> {
    (0..n).map(QubitId).collect()
}

#[test]
fn threshold_truth_tables() {
    for n in 2..=8 {
        for k in 0..=2 {
            let c = synth_threshold_circuit(n, k).unwrap();
            assert_eq!(c.qubit_count(), estimate_threshold_qubits(n, k));
            let v = truth_table_check(&c, &|x| threshold_k(x, k), n).unwrap();
            assert!(v.pass, "TH_{k} n={n}: {v:?}");
        }
    }
}

#[test]
fn exact_truth_tables() {
    for n in 2..=8 {
        for k in 0..=2 {
            let c = synth_exact_circuit(n, k).unwrap();
            assert_eq!(c.qubit_count(), estimate_exact_qubits(n, k));
            let v = truth_table_check(&c, &|x| exact_k(x, k), n).unwrap();
            assert!(v.pass, "EXACT_{k} n={n}: {v:?}");
        }
    }
}

#[test]
fn nor_base_case_is_single_gate() {
    let c = synth_threshold_circuit(4, 0).unwrap();
    let gates: Vec<&Gate> = c.gates().collect();
    assert_eq!(gates.len(), 1);
    assert!(matches!(gates[0], Gate::MultiToffoli { controls, .. } if controls.len() == 4));
}

#[test]
fn exact_random_inputs_n10() {
    let c = synth_exact_circuit(10, 2).unwrap();
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    for _ in 0..200 {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let x = BitString::new(state & 0x3ff, 10).unwrap();
        let key =
            dicke_core::sim::BasisKey::from_bits(c.qubit_count(), (0..10).map(|j| (j, x.get(j))));
        let mut s = SparseState::basis(key, c.qubit_count());
        s.apply_circuit(&c).unwrap();
        let out = c.registers().group("out").unwrap()[0];
        let dist = s.register_distribution(&[out]).unwrap();
        let want = if exact_k(x, 2) { "1" } else { "0" };
        assert!((dist[want] - 1.0).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn phase_oracle_signs_and_square() {
    let bit = synth_exact_circuit(3, 1).unwrap();
    let oracle = phase_oracle(&bit).unwrap();
    let total = oracle.qubit_count();
    let mut s = SparseState::zero(total);
    for q in 0..3 {
        s.apply_gate(&Gate::h(q)).unwrap();
    }
    let before = s.clone();
    s.apply_circuit(&oracle).unwrap();
    for (key, amp) in s.entries() {
        let w = (0..3).filter(|&q| key.get(q)).count();
        let sign = if w == 1 { -1.0 } else { 1.0 };
        assert!((amp - before.amplitude(key) * sign).norm() < 1e-12);
        assert!((3..total).all(|q| !key.get(q)));
    }
    s.apply_circuit(&oracle).unwrap();
    assert!((s.inner(&before).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn dicke_small_cases() {
    for (n, k, flip) in [
        (3, 1, false),
        (4, 1, false),
        (4, 2, false),
        (3, 2, false),
        (5, 2, false),
        (6, 1, false),
        (5, 4, true),
        (4, 0, false),
        (3, 3, true),
        (3, 3, false),
    ] {
        let mut cfg = SynthesisConfig::new(n, k);
        cfg.complement_high_weight = flip;
        let out = synth_dicke_qac0(&cfg).unwrap();
        let run = simulate_dicke(&out.circuit, n, k, &system(n)).unwrap();
        assert!(run.fidelity > 1.0 - 1e-9, "n={n} k={k}: {run:?}");
        assert!(run.ancilla_zero_probability > 1.0 - 1e-9);
    }
}

#[test]
fn dicke_w3_amplitudes_positive_after_phase_normalization() {
    let out = synth_dicke_qac0(&SynthesisConfig::new(3, 1)).unwrap();
    let mut s = SparseState::zero(out.circuit.qubit_count());
    s.apply_circuit(&out.circuit).unwrap();
    let amps: Vec<Complex64> = [1usize, 2, 4]
        .iter()
        .map(|&i| {
            s.amplitude(&dicke_core::sim::BasisKey::from_bits(
                out.circuit.qubit_count(),
                (0..3).map(|q| (q, i >> q & 1 == 1)),
            ))
        })
        .collect();
    let phase = amps[0] / amps[0].norm();
    for a in amps {
        let a = a / phase;
        assert!((a.re - 1.0 / 3f64.sqrt()).abs() < 1e-10 && a.im.abs() < 1e-10);
    }
}

#[test]
fn dicke_depth_flat_in_n() {
    for k in 1..=2 {
        let depths: Vec<usize> = (k + 1..=10)
            .map(|n| {
                synth_dicke_qac0(&SynthesisConfig::new(n, k))
                    .unwrap()
                    .report
                    .depth
            })
            .collect();
        assert!(depths.windows(2).all(|w| w[0] == w[1]), "k={k}: {depths:?}");
    }
}

#[test]
fn dicke_rejects_large_weight() {
    let err = synth_dicke_qac0(&SynthesisConfig::new(12, 5)).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
    let mut cfg = SynthesisConfig::new(10, 2);
    cfg.max_qubits = 50;
    assert!(matches!(
        synth_dicke_qac0(&cfg),
        Err(Error::ResourceLimit(_))
    ));
}

#[test]
fn w_approx_perfect_oracle_is_exact() {
    for n in [3, 5] {
        let t = dicke_core::boolean::choose_t(0.5 / 9.0).unwrap();
        let fam = SubsetFamily::from_seed(n, t, 1);
        let opts = WOptions {
            oracle: WOracle::Perfect,
            parallel: false,
        };
        let w = synth_w_approx(n, 0.5, &fam, opts).unwrap();
        assert_eq!(w.circuit.model(), Model::Qac0f);
        let run = simulate_dicke(&w.circuit, n, 1, &system(n)).unwrap();
        assert!((run.fidelity - 1.0).abs() < 1e-12);
    }
}

#[test]
fn w_approx_sequential_matches_parallel() {
    let n = 4;
    let t = dicke_core::boolean::choose_t(0.5 / 9.0).unwrap();
    let fam = SubsetFamily::from_seed(n, t, 3);
    let seq = synth_w_approx(n, 0.5, &fam, WOptions::default()).unwrap();
    let par = synth_w_approx(
        n,
        0.5,
        &fam,
        WOptions {
            oracle: WOracle::Gadget,
            parallel: true,
        },
    )
    .unwrap();
    assert_eq!(seq.report.ancilla_count, t + 3);
    let a = simulate_dicke(&seq.circuit, n, 1, &system(n)).unwrap();
    let b = simulate_dicke(&par.circuit, n, 1, &system(n)).unwrap();
    assert!((a.fidelity - b.fidelity).abs() < 1e-12);
    assert!(par.report.depth < seq.report.depth);
}

#[test]
fn w_approx_rejects_wrong_family_length() {
    let fam = SubsetFamily::from_seed(4, 16, 0);
    assert!(matches!(
        synth_w_approx(4, 0.5, &fam, WOptions::default()),
        Err(Error::ConfigMismatch(_))
    ));
}

#[test]
fn dense_and_sparse_agree_on_dicke_circuit() {
    let out = synth_dicke_qac0(&SynthesisConfig::new(3, 1)).unwrap();
    let n = out.circuit.qubit_count();
    if n > 20 {
        return;
    }
    let mut d = StateVector::zero(n).unwrap();
    d.apply_circuit(&out.circuit.expand_macros().unwrap())
        .unwrap();
    let mut s = SparseState::zero(n);
    s.apply_circuit(&out.circuit).unwrap();
    let back = s.to_dense().unwrap();
    assert!((back.fidelity(&d).unwrap().value - 1.0).abs() < 1e-10);
}
