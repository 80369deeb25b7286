use dicke_core::circuit::{Circuit, Gate, QubitId};
use dicke_core::qac0f::{
    choose_m, gamma, p_good, synth_block_init, synth_cswap_extract, synth_dicke_qac0f,
    synth_good_flag, synth_lsb_onehot, synth_preparation, tune_amplitude, BlockCountMode,
    BlockLayout, CswapMode, Qac0fConfig,
};
use dicke_core::sim::{BasisKey, QuantumState, SparseState};
use dicke_core::verify::dicke_state;
use dicke_core::Error;
use proptest::prelude::*;

fn binomial(n: u64, k: u64) -> f64 {
    (1..=k).fold(1u128, |acc, i| acc * (n - k + i) as u128 / i as u128) as f64
}

fn p_good_oracle(n: u64, k: u64) -> f64 {
    let s = k as f64 / n as f64;
    binomial(n, k) * s.powi(k as i32) * (1.0 - s).powi((n - k) as i32)
}

fn run(circuits: &[&Circuit]) -> SparseState {
    let mut s = SparseState::zero(circuits[0].qubit_count());
    for c in circuits {
        s.apply_circuit(c).unwrap();
    }
    s
}

fn prob_ones(state: &SparseState, qubits: &[QubitId]) -> f64 {
    let key = "1".repeat(qubits.len());
    state
        .register_distribution(qubits)
        .unwrap()
        .get(&key)
        .copied()
        .unwrap_or(0.0)
}

fn layout(n: usize, k: usize, m: usize) -> BlockLayout {
    BlockLayout::new(n, k, m, CswapMode::Sequential, usize::MAX).unwrap()
}

#[test]
fn p_good_and_gamma_match_direct_arithmetic() {
    for n in 2..=30u64 {
        for k in 1..n {
            let p = p_good_oracle(n, k);
            assert!((p_good(n as usize, k as usize) - p).abs() < 1e-12 * p.max(1.0));
            for m in 1..5 {
                let g = 1.0 - (1.0 - p).powi(m as i32);
                assert!((gamma(n as usize, k as usize, m) - g).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn block_init_marginals() {
    let l = layout(3, 1, 2);
    let s = run(&[&synth_block_init(&l).unwrap()]);
    let p = p_good_oracle(3, 1);
    for (block, &a) in l.blocks.iter().zip(&l.flags) {
        let dist = s.register_distribution(block).unwrap();
        let weight_k: f64 = dist
            .iter()
            .filter(|(bits, _)| bits.chars().filter(|&c| c == '1').count() == 1)
            .map(|(_, p)| p)
            .sum();
        assert!((weight_k - p).abs() < 1e-10);
        assert!((prob_ones(&s, &[a]) - p).abs() < 1e-10);
        let (post, _) = s.postselect(a, true).unwrap();
        let overlap = post
            .reduced_overlap(block, &dicke_state(3, 1).unwrap())
            .unwrap();
        assert!((overlap.value - 1.0).abs() < 1e-10);
    }
    let zero = s.register_distribution(&l.flags).unwrap()["00"];
    assert!((zero - (1.0 - p).powi(2)).abs() < 1e-10);
}

#[test]
fn lsb_onehot_exhaustive() {
    let l = layout(1, 1, 4);
    let onehot = synth_lsb_onehot(&l).unwrap();
    for x in 0u32..16 {
        let key = BasisKey::from_bits(
            l.qubit_count(),
            l.flags
                .iter()
                .enumerate()
                .map(|(i, q)| (q.0, x >> i & 1 == 1)),
        );
        let mut s = SparseState::basis(key, l.qubit_count());
        s.apply_circuit(&onehot).unwrap();
        let (out, amp) = s.entries().next().map(|(k, a)| (k.clone(), *a)).unwrap();
        assert_eq!(s.len(), 1);
        assert!((amp.re - 1.0).abs() < 1e-12);
        let sel: Vec<bool> = l.select.iter().map(|q| out.get(q.0)).collect();
        let flags: Vec<bool> = l.flags.iter().map(|q| out.get(q.0)).collect();
        assert_eq!(flags, (0..4).map(|i| x >> i & 1 == 1).collect::<Vec<_>>());
        assert_eq!(sel.iter().filter(|&&b| b).count(), usize::from(x != 0));
        if x != 0 {
            assert!(sel[x.trailing_zeros() as usize]);
        }
        for copies in &l.flag_copies {
            assert!(copies.iter().all(|q| !out.get(q.0)));
        }
    }
}

#[test]
fn single_block_swap_on_basis_states() {
    let l = layout(3, 1, 1);
    let swap = synth_cswap_extract(&l).unwrap();
    for t in 0u32..8 {
        for sel in [false, true] {
            let key = BasisKey::from_bits(
                l.qubit_count(),
                l.blocks[0]
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (q.0, t >> i & 1 == 1))
                    .chain([(l.select[0].0, sel)]),
            );
            let mut s = SparseState::basis(key, l.qubit_count());
            s.apply_circuit(&swap).unwrap();
            let out = s.entries().next().unwrap().0.clone();
            for i in 0..3 {
                let bit = t >> i & 1 == 1;
                assert_eq!(out.get(l.q[i].0), sel && bit);
                assert_eq!(out.get(l.blocks[0][i].0), !sel && bit);
            }
        }
    }
}

#[test]
fn extraction_overlap_and_good_flag() {
    let l = layout(3, 1, 2);
    let g = 1.0 - (1.0 - p_good_oracle(3, 1)).powi(2);
    let s = run(&[
        &synth_block_init(&l).unwrap(),
        &synth_lsb_onehot(&l).unwrap(),
        &synth_cswap_extract(&l).unwrap(),
        &synth_good_flag(&l).unwrap(),
    ]);
    let d = dicke_state(3, 1).unwrap();
    assert!((s.reduced_overlap(&l.q, &d).unwrap().value - g).abs() < 1e-9);
    assert!((prob_ones(&s, &[l.good]) - g).abs() < 1e-10);
    let (post, _) = s.postselect(l.good, true).unwrap();
    assert!(post.reduced_overlap(&l.q, &d).unwrap().value > 1.0 - 1e-10);
    let (bad, _) = s.postselect(l.good, false).unwrap();
    assert!((bad.register_distribution(&l.q).unwrap()["000"] - 1.0).abs() < 1e-10);
}

/// Parallel layouts extend the sequential one with extra qubits at the end.
fn assert_embedded(seq: &SparseState, par: &SparseState, seq_n: usize) {
    let mut total = 0.0;
    for (key, amp) in par.entries() {
        let short = BasisKey::from_bits(seq_n, (0..seq_n).map(|q| (q, key.get(q))));
        let extra_zero = (seq_n..par.qubit_count()).all(|q| !key.get(q));
        if extra_zero {
            total += amp.norm_sqr();
            assert!((seq.amplitude(&short) - amp).norm() < 1e-12);
        } else {
            assert!(amp.norm() < 1e-12);
        }
    }
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(
        seq.entries().filter(|(_, a)| a.norm() > 1e-12).count(),
        par.entries().filter(|(_, a)| a.norm() > 1e-12).count()
    );
}

#[test]
fn sequential_and_parallel_extraction_agree() {
    for (n, k, m) in [(2, 1, 2), (3, 1, 3), (2, 2, 3)] {
        let ls = layout(n, k, m);
        let lp = BlockLayout::new(n, k, m, CswapMode::Parallel, usize::MAX).unwrap();
        let stages = |l: &BlockLayout| {
            run(&[
                &synth_block_init(l).unwrap(),
                &synth_lsb_onehot(l).unwrap(),
                &synth_cswap_extract(l).unwrap(),
            ])
        };
        assert_embedded(&stages(&ls), &stages(&lp), ls.qubit_count());
    }
    let mut cfg = Qac0fConfig::new(2, 1, 2);
    let seq = synth_dicke_qac0f(&cfg).unwrap();
    cfg.cswap = CswapMode::Parallel;
    let par = synth_dicke_qac0f(&cfg).unwrap();
    assert_embedded(
        &run(&[&seq.circuit]),
        &run(&[&par.circuit]),
        seq.layout.qubit_count(),
    );
}

#[test]
fn tuned_preparation_hits_gamma_tilde() {
    for (n, k, m) in [(3, 1, 2), (4, 2, 2), (2, 1, 1)] {
        let l = layout(n, k, m);
        let t = tune_amplitude(gamma(n, k, m)).unwrap();
        let s = run(&[&synth_preparation(&l, &t).unwrap()]);
        let want = (std::f64::consts::PI / (4 * t.rounds + 2) as f64)
            .sin()
            .powi(2);
        assert!((prob_ones(&s, &[l.tune, l.b]) - want).abs() < 1e-10);
        assert!((prob_ones(&s, &[l.b]) - prob_ones(&s, &[l.good])).abs() < 1e-12);
    }
}

#[test]
fn full_pipeline_is_exact() {
    for (n, k, m, mode) in [
        (3, 1, 2, CswapMode::Sequential),
        (3, 1, 3, CswapMode::Sequential),
        (3, 2, 2, CswapMode::Sequential),
        (2, 1, 2, CswapMode::Parallel),
        (3, 3, 1, CswapMode::Sequential),
        (3, 0, 1, CswapMode::Sequential),
    ] {
        let mut cfg = Qac0fConfig::new(n, k, m);
        cfg.cswap = mode;
        let out = synth_dicke_qac0f(&cfg).unwrap();
        let s = run(&[&out.circuit]);
        let f = s
            .reduced_overlap(&out.layout.q, &dicke_state(n, k).unwrap())
            .unwrap();
        assert!(f.value > 1.0 - 1e-9, "n={n} k={k} M={m}: {}", f.value);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        assert!(prob_ones(&s, &[out.layout.tune, out.layout.b]) > 1.0 - 1e-9);
    }
}

#[test]
fn small_gamma_needs_more_rounds() {
    // p_good(10, 5) ≈ 0.246 < 0.25
    let out = synth_dicke_qac0f(&Qac0fConfig::new(10, 5, 1)).unwrap();
    assert_eq!(out.tuning.rounds, 2);
    let s = run(&[&out.circuit]);
    let f = s
        .reduced_overlap(&out.layout.q, &dicke_state(10, 5).unwrap())
        .unwrap();
    assert!(f.value > 1.0 - 1e-9, "{}", f.value);
}

#[test]
fn depth_is_flat_in_n() {
    for mode in [CswapMode::Sequential, CswapMode::Parallel] {
        let depths: Vec<usize> = (3..=6)
            .map(|n| {
                let mut cfg = Qac0fConfig::new(n, 1, 2);
                cfg.cswap = mode;
                synth_dicke_qac0f(&cfg).unwrap().report.depth
            })
            .collect();
        assert!(
            depths.windows(2).all(|w| w[0] == w[1]),
            "{mode:?}: {depths:?}"
        );
    }
}

#[test]
fn parallel_extraction_depth_is_flat_in_m() {
    let depth = |m| {
        let l = BlockLayout::new(3, 1, m, CswapMode::Parallel, usize::MAX).unwrap();
        synth_cswap_extract(&l)
            .unwrap()
            .expand_macros()
            .unwrap()
            .depth()
            .unwrap()
    };
    assert_eq!(depth(2), depth(5));
}

#[test]
fn resource_limit_reports_layout() {
    let mut cfg = Qac0fConfig::new(4, 2, 3);
    cfg.max_qubits = 24;
    match synth_dicke_qac0f(&cfg) {
        Err(Error::ResourceLimit(msg)) => assert!(msg.contains("blocks 12"), "{msg}"),
        other => panic!("expected ResourceLimit, got {other:?}"),
    }
}

#[test]
fn block_count_modes() {
    let mut cfg = Qac0fConfig::new(3, 1, 0);
    cfg.m = None;
    let out = synth_dicke_qac0f(&cfg).unwrap();
    assert_eq!(out.layout.m, 2);
    assert_eq!(choose_m(4, 1, BlockCountMode::Paper).unwrap(), 3);
    for n in 2..40 {
        for k in 1..n {
            let m = choose_m(n, k, BlockCountMode::Paper).unwrap();
            assert!(m as f64 * p_good_oracle(n as u64, k as u64) >= 1.0);
            assert!(gamma(n, k, m) >= 1.0 - (-1.0f64).exp());
        }
    }
}

#[test]
fn layout_json_lists_disjoint_groups() {
    let l = BlockLayout::new(3, 1, 2, CswapMode::Parallel, usize::MAX).unwrap();
    let v = l.to_json_value();
    let mut seen = std::collections::BTreeSet::new();
    for (_, qs) in v["groups"].as_object().unwrap() {
        for q in qs.as_array().unwrap() {
            assert!(seen.insert(q.as_u64().unwrap()));
        }
    }
    assert_eq!(seen.len(), l.qubit_count());
}

#[test]
fn pipeline_has_no_unknown_gates() {
    let out = synth_dicke_qac0f(&Qac0fConfig::new(3, 1, 2)).unwrap();
    assert!(out
        .circuit
        .gates()
        .all(|g| !matches!(g, Gate::ProductReflection { .. })));
    assert!(out.circuit.validate().is_ok());
}

proptest! {
    #[test]
    fn p_good_at_least_exp_minus_k(n in 2usize..=1000, frac in 0.0f64..1.0) {
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        prop_assume!(k < n);
        prop_assert!(p_good(n, k) >= (-(k as f64)).exp());
    }

    #[test]
    fn gamma_exceeds_exponential_bound(n in 2usize..=200, frac in 0.0f64..1.0, m in 1usize..20) {
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        prop_assume!(k < n);
        prop_assert!(gamma(n, k, m) >= 1.0 - (-(m as f64) * p_good(n, k)).exp());
    }

    #[test]
    fn tuning_is_minimal(g in 0.001f64..=1.0) {
        let t = tune_amplitude(g).unwrap();
        prop_assert!(t.gamma_tilde <= g);
        if t.rounds > 1 {
            let prev = (std::f64::consts::PI / (4 * t.rounds - 2) as f64).sin().powi(2);
            prop_assert!(prev > g);
        }
        prop_assert!((t.phi.sin().powi(2) * g - t.gamma_tilde).abs() < 1e-12);
    }
}
