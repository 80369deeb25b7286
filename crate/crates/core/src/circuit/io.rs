//! JSON circuit documents and the flat text gate list.
//!
//! Text format, one gate per line, a `LAYER` line opening each layer:
//!
//! ```text
//! QUBITS 8 qac0
//! LAYER
//! U1Q 3 [[0.7071067811865476+0i,0.7071067811865476+0i],[0.7071067811865476+0i,-0.7071067811865476+0i]]
//! LAYER
//! GCZ 0 3 7
//! FANOUT 2 -> 4 5 6
//! ```
//!
//! Macros and oracles use `MCX +0 -1 -> 2`, `REFLECT 0:(a,b) 1:(a,b)`,
//! `EXACT 2 : 0 1 2 -> 5` and `ATLEAST 3 : 0 1 2 -> 5`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    Circuit, DepthConvention, Gate, Layer, Matrix2, Model, OracleGate, Polarity, QubitId,
    RegisterMap,
};
use crate::{Error, Result};

type C = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "gate")]
enum GateDoc {
    #[serde(rename = "1q")]
    SingleQubit { target: usize, matrix: [[C; 2]; 2] },
    #[serde(rename = "gcz")]
    GlobalCz { support: Vec<usize> },
    #[serde(rename = "fanout")]
    FanOut { control: usize, targets: Vec<usize> },
    #[serde(rename = "mcx")]
    MultiToffoli {
        controls: Vec<(usize, Polarity)>,
        target: usize,
    },
    #[serde(rename = "reflect")]
    ProductReflection { support: Vec<(usize, [C; 2])> },
    #[serde(rename = "exact")]
    Exact {
        inputs: Vec<usize>,
        target: usize,
        weight: usize,
    },
    #[serde(rename = "atleast")]
    AtLeast {
        inputs: Vec<usize>,
        target: usize,
        count: usize,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct CircuitDoc {
    n: usize,
    model: Model,
    #[serde(default)]
    convention: Option<DepthConvention>,
    registers: RegisterMap,
    layers: Vec<Vec<GateDoc>>,
}

fn to_c(z: Complex64) -> C {
    [z.re, z.im]
}

fn from_c(v: C) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn ids(v: &[QubitId]) -> Vec<usize> {
    v.iter().map(|q| q.0).collect()
}

fn qids(v: Vec<usize>) -> Vec<QubitId> {
    v.into_iter().map(QubitId).collect()
}

impl From<&Gate> for GateDoc {
    fn from(g: &Gate) -> Self {
        match g {
            Gate::SingleQubit { target, matrix } => GateDoc::SingleQubit {
                target: target.0,
                matrix: matrix.map(|row| row.map(to_c)),
            },
            Gate::GlobalCz { support } => GateDoc::GlobalCz {
                support: ids(support),
            },
            Gate::FanOut { control, targets } => GateDoc::FanOut {
                control: control.0,
                targets: ids(targets),
            },
            Gate::MultiToffoli { controls, target } => GateDoc::MultiToffoli {
                controls: controls.iter().map(|(q, p)| (q.0, *p)).collect(),
                target: target.0,
            },
            Gate::ProductReflection { support } => GateDoc::ProductReflection {
                support: support.iter().map(|(q, s)| (q.0, s.map(to_c))).collect(),
            },
            Gate::Oracle(OracleGate::Exact {
                inputs,
                target,
                weight,
            }) => GateDoc::Exact {
                inputs: ids(inputs),
                target: target.0,
                weight: *weight,
            },
            Gate::Oracle(OracleGate::AtLeast {
                inputs,
                target,
                count,
            }) => GateDoc::AtLeast {
                inputs: ids(inputs),
                target: target.0,
                count: *count,
            },
        }
    }
}

impl GateDoc {
    fn into_gate(self) -> Result<Gate> {
        let g = match self {
            GateDoc::SingleQubit { target, matrix } => Gate::SingleQubit {
                target: QubitId(target),
                matrix: matrix.map(|row| row.map(from_c)),
            },
            GateDoc::GlobalCz { support } => Gate::GlobalCz {
                support: qids(support),
            },
            GateDoc::FanOut { control, targets } => Gate::FanOut {
                control: QubitId(control),
                targets: qids(targets),
            },
            GateDoc::MultiToffoli { controls, target } => Gate::MultiToffoli {
                controls: controls.into_iter().map(|(q, p)| (QubitId(q), p)).collect(),
                target: QubitId(target),
            },
            GateDoc::ProductReflection { support } => Gate::ProductReflection {
                support: support
                    .into_iter()
                    .map(|(q, s)| (QubitId(q), s.map(from_c)))
                    .collect(),
            },
            GateDoc::Exact {
                inputs,
                target,
                weight,
            } => Gate::Oracle(OracleGate::Exact {
                inputs: qids(inputs),
                target: QubitId(target),
                weight,
            }),
            GateDoc::AtLeast {
                inputs,
                target,
                count,
            } => Gate::Oracle(OracleGate::AtLeast {
                inputs: qids(inputs),
                target: QubitId(target),
                count,
            }),
        };
        g.validate()?;
        Ok(g)
    }
}

impl Circuit {
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = CircuitDoc {
            n: self.qubit_count,
            model: self.model,
            convention: Some(self.convention),
            registers: self.registers.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| l.gates().iter().map(GateDoc::from).collect())
                .collect(),
        };
        serde_json::to_value(doc).expect("circuit documents always serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_str(s)?;
        if doc.registers.len() != doc.n {
            return Err(Error::InvalidRegister(format!(
                "{} roles for {} qubits",
                doc.registers.len(),
                doc.n
            )));
        }
        doc.registers.validate()?;
        let mut circuit = Circuit::new(doc.registers, doc.model);
        if let Some(conv) = doc.convention {
            circuit.set_convention(conv);
        }
        for gates in doc.layers {
            let layer = Layer::from_gates(
                gates
                    .into_iter()
                    .map(GateDoc::into_gate)
                    .collect::<Result<Vec<_>>>()?,
            )?;
            circuit.push_layer(layer)?;
        }
        Ok(circuit)
    }

    /// Flat text gate list.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {} {}\n", self.qubit_count, self.model);
        for layer in &self.layers {
            out.push_str("LAYER\n");
            for g in layer.gates() {
                out.push_str(&gate_line(g));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Circuit> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty gate list".into()))?;
        let mut head = header.split_whitespace();
        if head.next() != Some("QUBITS") {
            return Err(Error::Parse(format!("bad header `{header}`")));
        }
        let n: usize = parse_num(head.next())?;
        let model: Model = head.next().unwrap_or("qac0f").parse()?;
        let mut circuit = Circuit::empty(n, model);
        let mut layers: Vec<Layer> = Vec::new();
        for line in lines {
            if line == "LAYER" {
                layers.push(Layer::new());
                continue;
            }
            let layer = layers
                .last_mut()
                .ok_or_else(|| Error::Parse("gate before first LAYER".into()))?;
            layer.push(parse_gate(line)?)?;
        }
        circuit.extend_layers(layers)?;
        Ok(circuit)
    }
}

fn fmt_c(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

fn fmt_list(qs: &[QubitId]) -> String {
    qs.iter()
        .map(|q| q.0.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn gate_line(g: &Gate) -> String {
    match g {
        Gate::SingleQubit { target, matrix } => format!(
            "U1Q {} [[{},{}],[{},{}]]",
            target,
            fmt_c(matrix[0][0]),
            fmt_c(matrix[0][1]),
            fmt_c(matrix[1][0]),
            fmt_c(matrix[1][1])
        ),
        Gate::GlobalCz { support } => format!("GCZ {}", fmt_list(support)),
        Gate::FanOut { control, targets } => format!("FANOUT {control} -> {}", fmt_list(targets)),
        Gate::MultiToffoli { controls, target } => {
            let mut s = String::from("MCX");
            for (q, p) in controls {
                let sign = match p {
                    Polarity::Positive => '+',
                    Polarity::Negative => '-',
                };
                let _ = write!(s, " {sign}{q}");
            }
            let _ = write!(s, " -> {target}");
            s
        }
        Gate::ProductReflection { support } => {
            let mut s = String::from("REFLECT");
            for (q, phi) in support {
                let _ = write!(s, " {q}:({},{})", fmt_c(phi[0]), fmt_c(phi[1]));
            }
            s
        }
        Gate::Oracle(OracleGate::Exact {
            inputs,
            target,
            weight,
        }) => format!("EXACT {weight} : {} -> {target}", fmt_list(inputs)),
        Gate::Oracle(OracleGate::AtLeast {
            inputs,
            target,
            count,
        }) => format!("ATLEAST {count} : {} -> {target}", fmt_list(inputs)),
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse("missing number".into()))?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad number `{tok}`")))
}

fn parse_c(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad complex `{s}`"));
    let body = s.strip_suffix('i').ok_or_else(bad)?;
    // split at the sign that starts the imaginary part (not an exponent sign)
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn parse_ids(s: &str) -> Result<Vec<QubitId>> {
    s.split_whitespace()
        .map(|t| parse_num(Some(t)).map(QubitId))
        .collect()
}

fn split_arrow(rest: &str) -> Result<(&str, &str)> {
    rest.split_once("->")
        .ok_or_else(|| Error::Parse(format!("missing `->` in `{rest}`")))
}

fn parse_oracle_head(rest: &str) -> Result<(usize, Vec<QubitId>, QubitId)> {
    let (param, io) = rest
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("missing `:` in `{rest}`")))?;
    let (ins, out) = split_arrow(io)?;
    Ok((
        parse_num(Some(param.trim()))?,
        parse_ids(ins)?,
        QubitId(parse_num(Some(out.trim()))?),
    ))
}

fn parse_gate(line: &str) -> Result<Gate> {
    let (op, rest) = line.split_once(' ').unwrap_or((line, ""));
    let gate = match op {
        "U1Q" => {
            let (t, m) = rest
                .trim()
                .split_once(' ')
                .ok_or_else(|| Error::Parse(format!("bad U1Q `{line}`")))?;
            let cleaned: String = m.chars().filter(|c| !matches!(c, '[' | ']')).collect();
            let entries = cleaned
                .split(',')
                .map(|e| parse_c(e.trim()))
                .collect::<Result<Vec<_>>>()?;
            if entries.len() != 4 {
                return Err(Error::Parse(format!("U1Q needs 4 entries: `{line}`")));
            }
            let matrix: Matrix2 = [[entries[0], entries[1]], [entries[2], entries[3]]];
            Gate::SingleQubit {
                target: QubitId(parse_num(Some(t))?),
                matrix,
            }
        }
        "GCZ" => Gate::GlobalCz {
            support: parse_ids(rest)?,
        },
        "FANOUT" => {
            let (ctrl, tg) = split_arrow(rest)?;
            Gate::FanOut {
                control: QubitId(parse_num(Some(ctrl.trim()))?),
                targets: parse_ids(tg)?,
            }
        }
        "MCX" => {
            let (ctrls, tg) = split_arrow(rest)?;
            let controls = ctrls
                .split_whitespace()
                .map(|t| {
                    let (p, q) = t.split_at(1);
                    let pol = match p {
                        "+" => Polarity::Positive,
                        "-" => Polarity::Negative,
                        _ => return Err(Error::Parse(format!("bad control `{t}`"))),
                    };
                    Ok((QubitId(parse_num(Some(q))?), pol))
                })
                .collect::<Result<Vec<_>>>()?;
            Gate::MultiToffoli {
                controls,
                target: QubitId(parse_num(Some(tg.trim()))?),
            }
        }
        "REFLECT" => {
            let support = rest
                .split_whitespace()
                .map(|t| {
                    let (q, st) = t
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad reflection term `{t}`")))?;
                    let inner = st.trim_start_matches('(').trim_end_matches(')');
                    let (a, b) = inner
                        .split_once(',')
                        .ok_or_else(|| Error::Parse(format!("bad reflection term `{t}`")))?;
                    Ok((QubitId(parse_num(Some(q))?), [parse_c(a)?, parse_c(b)?]))
                })
                .collect::<Result<Vec<_>>>()?;
            Gate::ProductReflection { support }
        }
        "EXACT" => {
            let (weight, inputs, target) = parse_oracle_head(rest)?;
            Gate::Oracle(OracleGate::Exact {
                inputs,
                target,
                weight,
            })
        }
        "ATLEAST" => {
            let (count, inputs, target) = parse_oracle_head(rest)?;
            Gate::Oracle(OracleGate::AtLeast {
                inputs,
                target,
                count,
            })
        }
        other => return Err(Error::Parse(format!("unknown gate `{other}`"))),
    };
    gate.validate()?;
    Ok(gate)
}
