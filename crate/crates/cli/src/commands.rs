use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use dicke_core::boolean::{choose_t, derandomize_family, SubsetFamily};
use dicke_core::circuit::{Circuit, DepthConvention, QubitId};
use dicke_core::qac0::{
    dicke_angle, synth_dicke_qac0, synth_w_approx, SynthesisConfig, WOptions, WOracle,
    MAX_QAC0_WEIGHT,
};
use dicke_core::qac0f::{
    choose_m, gamma, synth_dicke_qac0f, BlockCountMode, CswapMode, Qac0fConfig,
};
use dicke_core::sim::{QuantumState, SparseState};
use dicke_core::verify::{dicke_state, simulate_dicke};

use crate::{
    suites, CapArgs, CswapArg, DerandomizeArgs, ExportArgs, Failure, Format, MModeArg, ModelArg,
    SweepArgs, SynthArgs, VerifyArgs, EXIT_VERIFY_FAILED,
};

type Outcome = Result<u8, Failure>;

fn convention(cap: &CapArgs) -> DepthConvention {
    DepthConvention {
        fanout_width_factor: cap.fanout_width_factor,
        oracle_depth: cap.oracle_depth,
        ..DepthConvention::default()
    }
}

fn block_mode(mode: MModeArg, gamma_floor: f64) -> BlockCountMode {
    match mode {
        MModeArg::Paper => BlockCountMode::Paper,
        MModeArg::Desk => BlockCountMode::Desk { gamma_floor },
    }
}

fn cswap(mode: CswapArg) -> CswapMode {
    match mode {
        CswapArg::Sequential => CswapMode::Sequential,
        CswapArg::Parallel => CswapMode::Parallel,
    }
}

fn envelope(
    command: &str,
    config: &impl Serialize,
) -> Result<serde_json::Map<String, Value>, Failure> {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), command.into());
    doc.insert("config".into(), serde_json::to_value(config)?);
    Ok(doc)
}

fn write_json(path: Option<&Path>, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn check_nk(n: usize, k: usize) -> Result<(), Failure> {
    if n == 0 || k > n {
        return Err(Failure::config(format!(
            "need n ≥ 1 and 0 ≤ k ≤ n, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// Weight the QAC0 path actually amplifies, mirroring the library's rule.
fn qac0_weight(n: usize, k: usize, complement: bool) -> usize {
    let flip = k == n || (2 * k > n && (complement || k > MAX_QAC0_WEIGHT));
    if flip {
        n - k
    } else {
        k
    }
}

fn qac0_config(
    n: usize,
    k: usize,
    complement: bool,
    cap: &CapArgs,
) -> Result<SynthesisConfig, Failure> {
    let kk = qac0_weight(n, k, complement);
    if kk > MAX_QAC0_WEIGHT {
        return Err(Failure::config(format!(
            "QAC0 synthesis is limited to weight ≤ {MAX_QAC0_WEIGHT} after complementing (got {kk}): \
             the amplification construction needs depth growing with k, and constant-depth QAC0 \
             circuits for growing weight would break known QAC0 lower-bound barriers; \
             use --model qac0f"
        )));
    }
    let mut cfg = SynthesisConfig::new(n, k);
    cfg.complement_high_weight = complement;
    cfg.max_qubits = cap.max_qubits;
    cfg.convention = convention(cap);
    Ok(cfg)
}

fn qac0f_config(
    n: usize,
    k: usize,
    m: Option<usize>,
    mode: BlockCountMode,
    cswap_mode: CswapArg,
    cap: &CapArgs,
) -> Qac0fConfig {
    let mut cfg = Qac0fConfig::new(n, k, 1);
    cfg.m = m;
    cfg.m_mode = mode;
    cfg.cswap = cswap(cswap_mode);
    cfg.max_qubits = cap.max_qubits;
    cfg.convention = convention(cap);
    cfg
}

fn load_family(path: &Path) -> Result<SubsetFamily, Failure> {
    let value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let inner = value.get("family").cloned().unwrap_or(value);
    Ok(SubsetFamily::from_json(&inner.to_string())?)
}

pub fn synth(a: &SynthArgs) -> Outcome {
    check_nk(a.n, a.k)?;
    let mut doc = envelope("synth", a)?;
    let circuit: Circuit = match (a.model, a.epsilon) {
        (ModelArg::Qac0, Some(epsilon)) => {
            if a.k != 1 {
                return Err(Failure::config(
                    "--epsilon builds the approximate W state and needs k = 1",
                ));
            }
            let t = choose_t(epsilon / 9.0)?;
            let family = match (&a.family, a.seed) {
                (Some(path), _) => load_family(path)?,
                (None, Some(seed)) => {
                    let theta = dicke_angle(a.n, 1, 1e-13)?.theta;
                    let d = derandomize_family(a.n, t, theta, a.trials, seed)?;
                    doc.insert("family_weighted_error".into(), d.weighted_error.into());
                    d.family
                }
                (None, None) => return Err(Failure::config(
                    "the approximate W state needs --seed (or --family); there is no default seed",
                )),
            };
            let options = WOptions {
                oracle: if a.perfect_oracle {
                    WOracle::Perfect
                } else {
                    WOracle::Gadget
                },
                parallel: a.parallel,
            };
            let w = synth_w_approx(a.n, epsilon, &family, options)?;
            doc.insert("t".into(), w.t.into());
            doc.insert("family_seed".into(), family.seed.into());
            doc.insert("angle".into(), serde_json::to_value(w.angle)?);
            doc.insert("report".into(), serde_json::to_value(&w.report)?);
            w.circuit
        }
        (ModelArg::Qac0, None) => {
            let out = synth_dicke_qac0(&qac0_config(a.n, a.k, a.complement, &a.cap)?)?;
            let rounds = out.angle.map_or(0, |x| x.grover_rounds);
            doc.insert("grover_rounds".into(), rounds.into());
            doc.insert("effective_k".into(), out.effective_k.into());
            doc.insert("angle".into(), serde_json::to_value(out.angle)?);
            doc.insert("report".into(), serde_json::to_value(&out.report)?);
            out.circuit
        }
        (ModelArg::Qac0f, _) => {
            let cfg = qac0f_config(
                a.n,
                a.k,
                a.m,
                block_mode(a.m_mode, a.gamma_floor),
                a.cswap,
                &a.cap,
            );
            let out = synth_dicke_qac0f(&cfg)?;
            doc.insert("tuning".into(), serde_json::to_value(out.tuning)?);
            doc.insert("layout".into(), out.layout.to_json_value());
            doc.insert("report".into(), serde_json::to_value(&out.report)?);
            out.circuit
        }
    };
    let doc = Value::Object(doc);
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("circuit.json"), circuit.to_json() + "\n")?;
            write_json(Some(&dir.join("report.json")), &doc)?;
        }
        None => write_json(None, &doc)?,
    }
    Ok(0)
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    let verdicts = suites::run(a)?;
    let mut lines = String::new();
    for v in &verdicts {
        println!("{}", v.summary_line());
        lines.push_str(&v.to_json_line()?);
        lines.push('\n');
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("{} verdicts, {failed} failed", verdicts.len());
    if let Some(path) = &a.out {
        fs::write(path, lines)?;
    }
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY_FAILED })
}

#[derive(Debug, Default, Serialize)]
struct Row {
    n: usize,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    qubits: usize,
    depth: usize,
    ancillas: usize,
    rounds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
}

fn sweep_point(a: &SweepArgs, n: usize, k: usize) -> Result<Row, Failure> {
    match a.model {
        ModelArg::Qac0 => {
            let out = synth_dicke_qac0(&qac0_config(n, k, false, &a.cap)?)?;
            let fidelity = if a.no_simulate {
                None
            } else {
                let sys: Vec<QubitId> = (0..n).map(QubitId).collect();
                Some(simulate_dicke(&out.circuit, n, k, &sys)?.fidelity)
            };
            Ok(Row {
                n,
                k,
                qubits: out.report.qubits,
                depth: out.report.depth,
                ancillas: out.report.ancilla_count,
                rounds: out.angle.map_or(0, |x| x.grover_rounds),
                fidelity,
                ..Row::default()
            })
        }
        ModelArg::Qac0f => {
            let mode = block_mode(a.m_mode, a.gamma_floor);
            let m = match a.m {
                Some(m) => m,
                None => choose_m(n, k, mode)?,
            };
            let out = synth_dicke_qac0f(&qac0f_config(n, k, Some(m), mode, a.cswap, &a.cap))?;
            let (measured_gamma, fidelity) = if a.no_simulate {
                (None, None)
            } else {
                let mut pre = SparseState::zero(out.layout.qubit_count());
                pre.apply_circuit(&out.preparation)?;
                let good = pre.register_distribution(&[out.layout.good])?;
                let mut fin = SparseState::zero(out.layout.qubit_count());
                fin.apply_circuit(&out.circuit)?;
                let f = fin.reduced_overlap(&out.layout.q, &dicke_state(n, k)?)?;
                (Some(good.get("1").copied().unwrap_or(0.0)), Some(f.value))
            };
            Ok(Row {
                n,
                k,
                m: Some(m),
                qubits: out.report.qubits,
                depth: out.report.depth,
                ancillas: out.report.ancilla_count,
                rounds: out.tuning.rounds,
                gamma: Some(gamma(n, k, m)),
                measured_gamma,
                fidelity,
            })
        }
    }
}

fn csv(rows: &[Row]) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out =
        String::from("n,k,m,qubits,depth,ancillas,rounds,gamma,measured_gamma,fidelity\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.k,
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            r.qubits,
            r.depth,
            r.ancillas,
            r.rounds,
            opt(r.gamma),
            opt(r.measured_gamma),
            opt(r.fidelity)
        ));
    }
    out
}

pub fn sweep(a: &SweepArgs) -> Outcome {
    let points: Vec<(usize, usize)> =
        a.k.0
            .iter()
            .flat_map(|&k| a.n.0.iter().map(move |&n| (n, k)))
            .filter(|&(n, k)| k <= n)
            .collect();
    if points.is_empty() {
        return Err(Failure::config("the grid has no point with k ≤ n"));
    }
    let results: Vec<Result<Row, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = points
            .iter()
            .map(|&(n, k)| s.spawn(move || sweep_point(a, n, k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut flat = serde_json::Map::new();
    for &k in &a.k.0 {
        let depths: Vec<usize> = rows.iter().filter(|r| r.k == k).map(|r| r.depth).collect();
        if !depths.is_empty() {
            flat.insert(
                k.to_string(),
                depths.windows(2).all(|w| w[0] == w[1]).into(),
            );
        }
    }
    match a.format {
        Format::Json => {
            let mut doc = envelope("sweep", a)?;
            doc.insert("rows".into(), serde_json::to_value(&rows)?);
            doc.insert("depth_flat".into(), Value::Object(flat));
            write_json(a.out.as_deref(), &Value::Object(doc))?;
        }
        Format::Csv => {
            let text = csv(&rows);
            match &a.out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            eprintln!("depth flat per k: {}", Value::Object(flat));
        }
    }
    Ok(0)
}

pub fn derandomize(a: &DerandomizeArgs) -> Outcome {
    let t = match a.t {
        Some(t) => t,
        None => choose_t(a.epsilon / 9.0)?,
    };
    let theta = dicke_angle(a.n, 1, 1e-13)?.theta;
    let d = derandomize_family(a.n, t, theta, a.trials, a.seed)?;
    let mut doc = envelope("derandomize", a)?;
    doc.insert("theta".into(), theta.into());
    doc.insert("t".into(), t.into());
    doc.insert("weighted_error".into(), d.weighted_error.into());
    doc.insert("mean_weighted_error".into(), d.mean_weighted_error.into());
    doc.insert("best_trial".into(), d.best_trial.into());
    doc.insert("family".into(), serde_json::to_value(&d.family)?);
    write_json(a.out.as_deref(), &Value::Object(doc))?;
    Ok(0)
}

pub fn export(a: &ExportArgs) -> Outcome {
    let text = fs::read_to_string(&a.input)?;
    let circuit = match Circuit::from_json(&text) {
        Ok(c) => c,
        Err(first) => {
            let value: Value = serde_json::from_str(&text)?;
            match value.get("circuit") {
                Some(inner) => Circuit::from_json(&inner.to_string())?,
                None => return Err(first.into()),
            }
        }
    };
    let out = circuit.to_text();
    match &a.out {
        Some(p) => fs::write(p, out)?,
        None => print!("{out}"),
    }
    Ok(0)
}
