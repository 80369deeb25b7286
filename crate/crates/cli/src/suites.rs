use dicke_core::boolean::{choose_t, derandomize_family, exact_k, threshold_k};
use dicke_core::circuit::{Model, QubitId};
use dicke_core::qac0::{
    dicke_angle, synth_dicke_qac0, synth_exact_circuit_capped, synth_threshold_circuit_capped,
    synth_w_approx, SynthesisConfig, WOptions,
};
use dicke_core::qac0f::{gamma, synth_dicke_qac0f, Qac0fConfig};
use dicke_core::sim::{QuantumState, SparseState};
use dicke_core::verify::{
    dicke_state, dicke_verdict, gadget_statistics, resource_verdict, truth_table_check, Comparison,
    Verdict,
};

use crate::{Failure, Suite, VerifyArgs};

const QAC0F_GRID: [(usize, usize, usize); 4] = [(3, 1, 2), (3, 1, 3), (4, 1, 3), (4, 2, 3)];

fn system(n: usize) -> Vec<QubitId> {
    (0..n).map(QubitId).collect()
}

fn seed(a: &VerifyArgs) -> Result<u64, Failure> {
    a.seed.ok_or_else(|| {
        Failure::config(format!(
            "suite {} is randomized and needs --seed; there is no default seed",
            format!("{:?}", a.suite).to_lowercase()
        ))
    })
}

fn qac0(n: usize, k: usize, a: &VerifyArgs) -> SynthesisConfig {
    let mut cfg = SynthesisConfig::new(n, k);
    cfg.max_qubits = a.cap.max_qubits;
    cfg
}

fn exact(a: &VerifyArgs, out: &mut Vec<Verdict>) -> Result<(), Failure> {
    for n in 2..=a.nmax.min(8) {
        for k in 0..=2 {
            let th = synth_threshold_circuit_capped(n, k, a.cap.max_qubits)?;
            let v = truth_table_check(&th, &|x| threshold_k(x, k), n)?;
            out.push(Verdict {
                name: format!("truth_table TH_{k} n={n}"),
                ..v
            });
            let ex = synth_exact_circuit_capped(n, k, a.cap.max_qubits)?;
            let v = truth_table_check(&ex, &|x| exact_k(x, k), n)?;
            out.push(Verdict {
                name: format!("truth_table EXACT_{k} n={n}"),
                ..v
            });
        }
    }
    for n in 3..=a.nmax {
        for k in 1..=2 {
            let d = synth_dicke_qac0(&qac0(n, k, a))?;
            let v = dicke_verdict(&d.circuit, n, k, &system(n), a.threshold)?;
            out.push(Verdict {
                name: format!("qac0 dicke n={n} k={k}"),
                ..v
            });
        }
    }
    Ok(())
}

fn approx(a: &VerifyArgs, out: &mut Vec<Verdict>) -> Result<(), Failure> {
    let seed = seed(a)?;
    let t = choose_t(a.epsilon / 9.0)?;
    let mut ancillas = Vec::new();
    for n in (4..=a.nmax).step_by(2) {
        let theta = dicke_angle(n, 1, 1e-13)?.theta;
        let fam = derandomize_family(n, t, theta, a.trials, seed)?.family;
        let w = synth_w_approx(n, a.epsilon, &fam, WOptions::default())?;
        let v = dicke_verdict(&w.circuit, n, 1, &system(n), 1.0 - a.epsilon)?;
        out.push(Verdict {
            name: format!("w_approx n={n} eps={}", a.epsilon),
            ..v
        });
        ancillas.push(w.report.ancilla_count);
    }
    if let Some(&first) = ancillas.first() {
        let distinct = ancillas.iter().filter(|&&x| x != first).count();
        out.push(
            Verdict::new(
                "w_approx ancillas constant in n",
                distinct as f64,
                0.0,
                Comparison::Equal,
            )
            .with_detail(format!("ancilla counts {ancillas:?}")),
        );
    }
    Ok(())
}

fn gadget(a: &VerifyArgs, out: &mut Vec<Verdict>) -> Result<(), Failure> {
    let seed = seed(a)?;
    for t in [16, 64] {
        out.push(gadget_statistics(8, t, a.gadget_trials, seed)?.0);
    }
    Ok(())
}

fn qac0f(a: &VerifyArgs, out: &mut Vec<Verdict>) -> Result<(), Failure> {
    for (n, k, m) in QAC0F_GRID.into_iter().filter(|p| p.0 <= a.nmax) {
        let mut cfg = Qac0fConfig::new(n, k, m);
        cfg.max_qubits = a.cap.max_qubits;
        let d = synth_dicke_qac0f(&cfg)?;
        let tag = format!("n={n} k={k} M={m}");
        let mut pre = SparseState::zero(d.layout.qubit_count());
        pre.apply_circuit(&d.preparation)?;
        let measured = pre
            .register_distribution(&[d.layout.good])?
            .get("1")
            .copied()
            .unwrap_or(0.0);
        out.push(
            Verdict::new(
                format!("qac0f gamma error {tag}"),
                (measured - gamma(n, k, m)).abs(),
                1e-9,
                Comparison::AtMost,
            )
            .with_detail(format!("measured {measured}, formula {}", gamma(n, k, m))),
        );
        let target = dicke_state(n, k)?;
        let (post, _) = pre.postselect(d.layout.good, true)?;
        out.push(Verdict::new(
            format!("qac0f branch overlap {tag}"),
            post.reduced_overlap(&d.layout.q, &target)?.value,
            1.0 - 1e-10,
            Comparison::AtLeast,
        ));
        let mut fin = SparseState::zero(d.layout.qubit_count());
        fin.apply_circuit(&d.circuit)?;
        out.push(Verdict::new(
            format!("qac0f dicke {tag}"),
            fin.reduced_overlap(&d.layout.q, &target)?.value,
            a.threshold,
            Comparison::AtLeast,
        ));
    }
    Ok(())
}

fn resources(a: &VerifyArgs, out: &mut Vec<Verdict>) -> Result<(), Failure> {
    for k in 1..=2 {
        let reports = (k + 1..=a.nmax.max(k + 2))
            .map(|n| synth_dicke_qac0(&qac0(n, k, a)).map(|d| (n, d.report)))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(resource_verdict(&reports, k, Model::Qac0)?.0);
    }
    let reports = (3..=5)
        .map(|n| {
            let mut cfg = Qac0fConfig::new(n, 1, 2);
            cfg.max_qubits = a.cap.max_qubits;
            synth_dicke_qac0f(&cfg).map(|d| (n, d.report))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (v, _) = resource_verdict(&reports, 1, Model::Qac0f)?;
    out.push(Verdict {
        name: "resources qac0f k=1 M=2".into(),
        ..v
    });
    Ok(())
}

pub fn run(a: &VerifyArgs) -> Result<Vec<Verdict>, Failure> {
    let mut out = Vec::new();
    let all = a.suite == Suite::All;
    if all {
        seed(a)?;
    }
    if all || a.suite == Suite::Exact {
        exact(a, &mut out)?;
    }
    if all || a.suite == Suite::Approx {
        approx(a, &mut out)?;
    }
    if all || a.suite == Suite::Gadget {
        gadget(a, &mut out)?;
    }
    if all || a.suite == Suite::Qac0f {
        qac0f(a, &mut out)?;
    }
    if all || a.suite == Suite::Resources {
        resources(a, &mut out)?;
    }
    Ok(out)
}
