//! Random pairs of small dynamic circuits.
//!
//! A pair is two realizations of one abstract program: measurements with
//! classically controlled fixes can be kept dynamic, written as a dispatch
//! or deferred into quantum-controlled gates with the measurement moved to
//! the end; identity pairs can be dropped; a one-bit teleport can become a
//! swap. In q-mode every gadget keeps the principal state independent of
//! the outcomes, and qubits that end up discarded are either untouched or
//! measured. Half of the pairs get one mutation on the second circuit.

use std::f64::consts::PI;

use dqcheck::bench::{mutations, Mutant, MutationKind};
use dqcheck::circuit::{
    BranchStep, CircuitSpec, Conditional, DynCircuit, Gate, InitState, MeasureStep, Mode,
};
use dqcheck::logic::BoolFunc;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const MAX_QUBITS: usize = 4;
pub const MAX_GATES: usize = 12;
pub const MAX_MEASUREMENTS: usize = 3;

#[derive(Clone, Debug)]
pub struct RandomPair {
    pub mode: Mode,
    pub a: CircuitSpec,
    pub b: CircuitSpec,
    pub mutation: Option<String>,
}

#[derive(Clone, Debug)]
enum Fix {
    X,
    Z,
    P(f64),
}

#[derive(Clone, Debug)]
enum Op {
    Gate(Gate),
    /// Gates whose product is the identity; may be dropped.
    Identity(Vec<Gate>),
    /// Measure `q`, then apply the fixes when the outcome is 1. `q` is not
    /// used afterwards.
    MeasCtl {
        q: String,
        bit: String,
        fixes: Vec<(Fix, String)>,
    },
    /// Moves the state of `from` to `to` (fresh, in |0>).
    Move {
        from: String,
        to: String,
        bit: String,
    },
}

fn g(name: &str, params: &[f64], qs: &[&str]) -> Gate {
    Gate::new(name, params, qs).expect("library gate")
}

fn random_angle(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(1..16) as f64 * PI / 8.0
    } else {
        rng.gen_range(0.0..2.0 * PI)
    }
}

fn random_1q(rng: &mut ChaCha8Rng, q: &str) -> Gate {
    let names = ["h", "x", "y", "z", "s", "sdg", "t", "tdg", "p", "rz"];
    let name = *names.choose(rng).unwrap();
    let params = if matches!(name, "p" | "rz") {
        vec![random_angle(rng)]
    } else {
        vec![]
    };
    g(name, &params, &[q])
}

fn random_2q(rng: &mut ChaCha8Rng, a: &str, b: &str) -> Gate {
    let name = *["cx", "cz", "cp", "swap"].choose(rng).unwrap();
    let params = if name == "cp" {
        vec![random_angle(rng)]
    } else {
        vec![]
    };
    g(name, &params, &[a, b])
}

fn inverse(gate: &Gate) -> Gate {
    let qs: Vec<&str> = gate.qubits().iter().map(String::as_str).collect();
    let neg: Vec<f64> = gate.params().iter().map(|p| -p).collect();
    match gate.name() {
        "s" => g("sdg", &[], &qs),
        "sdg" => g("s", &[], &qs),
        "t" => g("tdg", &[], &qs),
        "tdg" => g("t", &[], &qs),
        "p" | "rz" | "cp" => g(gate.name(), &neg, &qs),
        _ => gate.clone(),
    }
}

fn fix_gate(f: &Fix, target: &str) -> Gate {
    match f {
        Fix::X => g("x", &[], &[target]),
        Fix::Z => g("z", &[], &[target]),
        Fix::P(t) => g("p", &[*t], &[target]),
    }
}

fn controlled_fix(f: &Fix, control: &str, target: &str) -> Gate {
    match f {
        Fix::X => g("cx", &[], &[control, target]),
        Fix::Z => g("cz", &[], &[control, target]),
        Fix::P(t) => g("cp", &[*t], &[control, target]),
    }
}

fn random_fix(rng: &mut ChaCha8Rng) -> Fix {
    match rng.gen_range(0..3) {
        0 => Fix::X,
        1 => Fix::Z,
        _ => Fix::P(random_angle(rng)),
    }
}

struct Program {
    qubits: Vec<String>,
    init: Vec<(String, InitState)>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    ops: Vec<Op>,
    /// Measured after everything else.
    final_measure: Vec<(String, String)>,
    output_bits: Vec<String>,
}

/// Emits a measure-then-fix step in one of its three forms; deferred
/// measurements are appended to `tail`.
fn emit_measctl(
    rng: &mut ChaCha8Rng,
    q: &str,
    bit: &str,
    fixes: &[(Fix, String)],
    steps: &mut Vec<DynCircuit>,
    tail: &mut Vec<(String, String)>,
) {
    let gates: Vec<Gate> = fixes.iter().map(|(f, t)| fix_gate(f, t)).collect();
    match rng.gen_range(0..3) {
        0 => {
            steps.push(DynCircuit::Measure(MeasureStep::new(&[q], &[bit])));
            if !gates.is_empty() {
                if rng.gen_bool(0.5) {
                    steps.push(DynCircuit::Conditional(Conditional::on_bit(bit, gates)));
                } else {
                    for gate in gates {
                        steps.push(DynCircuit::Conditional(Conditional::on_bit(
                            bit,
                            vec![gate],
                        )));
                    }
                }
            }
        }
        1 => steps.push(DynCircuit::Branch(BranchStep {
            measure: MeasureStep::new(&[q], &[bit]),
            dispatch: BoolFunc::identity(1),
            branches: vec![DynCircuit::empty(), DynCircuit::Gates(gates)],
        })),
        _ => {
            for (f, t) in fixes {
                steps.push(DynCircuit::gate(controlled_fix(f, q, t)));
            }
            tail.push((q.to_owned(), bit.to_owned()));
        }
    }
}

fn realize(rng: &mut ChaCha8Rng, p: &Program) -> CircuitSpec {
    let mut steps = Vec::new();
    let mut tail = Vec::new();
    for op in &p.ops {
        match op {
            Op::Gate(gate) => steps.push(DynCircuit::gate(gate.clone())),
            Op::Identity(gs) => {
                if rng.gen_bool(0.5) {
                    steps.push(DynCircuit::Gates(gs.clone()));
                }
            }
            Op::MeasCtl { q, bit, fixes } => {
                emit_measctl(rng, q, bit, fixes, &mut steps, &mut tail)
            }
            Op::Move { from, to, bit } => {
                if rng.gen_bool(0.3) {
                    steps.push(DynCircuit::gate(g("swap", &[], &[from, to])));
                } else {
                    steps.push(DynCircuit::Gates(vec![
                        g("cx", &[], &[from, to]),
                        g("h", &[], &[from]),
                    ]));
                    emit_measctl(
                        rng,
                        from,
                        bit,
                        &[(Fix::Z, to.clone())],
                        &mut steps,
                        &mut tail,
                    );
                }
            }
        }
    }
    tail.extend(p.final_measure.iter().cloned());
    for (q, b) in tail {
        steps.push(DynCircuit::Measure(MeasureStep::new(&[&q], &[&b])));
    }
    CircuitSpec {
        qubits: p.qubits.clone(),
        circuit: DynCircuit::Seq(steps).flattened(),
        fixed_init: p.init.clone(),
        inputs: p.inputs.clone(),
        outputs: p.outputs.clone(),
        output_bits: p.output_bits.clone(),
    }
}

fn random_init(rng: &mut ChaCha8Rng, zero_bias: f64) -> InitState {
    if rng.gen_bool(zero_bias) {
        InitState::Zero
    } else if rng.gen_bool(0.5) {
        InitState::One
    } else {
        InitState::Plus
    }
}

fn m_program(rng: &mut ChaCha8Rng) -> Program {
    let n = rng.gen_range(2..=MAX_QUBITS);
    let qubits: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let init = qubits
        .iter()
        .map(|q| (q.clone(), random_init(rng, 0.4)))
        .collect();
    let budget = if rng.gen_bool(0.6) {
        MAX_MEASUREMENTS
    } else {
        rng.gen_range(1..=MAX_MEASUREMENTS)
    };
    let mut frozen: Vec<String> = Vec::new();
    let mut bits: Vec<String> = Vec::new();
    let mut ops = Vec::new();
    for _ in 0..rng.gen_range(3..=9) {
        let live: Vec<String> = qubits
            .iter()
            .filter(|q| !frozen.contains(q))
            .cloned()
            .collect();
        let roll = rng.gen_range(0..100);
        if roll < 25 && bits.len() < budget && live.len() >= 2 {
            let q = live.choose(rng).unwrap().clone();
            let others: Vec<&String> = live.iter().filter(|x| **x != q).collect();
            let fixes = (0..rng.gen_range(0..=2))
                .map(|_| (random_fix(rng), (*others.choose(rng).unwrap()).clone()))
                .collect();
            let bit = format!("c{}", bits.len());
            bits.push(bit.clone());
            frozen.push(q.clone());
            ops.push(Op::MeasCtl { q, bit, fixes });
        } else if roll < 40 {
            let q = live.choose(rng).unwrap();
            let a = random_1q(rng, q);
            ops.push(Op::Identity(vec![a.clone(), inverse(&a)]));
        } else if roll < 70 && live.len() >= 2 {
            let pick: Vec<&String> = live.choose_multiple(rng, 2).collect();
            ops.push(Op::Gate(random_2q(rng, pick[0], pick[1])));
        } else {
            let q = live.choose(rng).unwrap();
            ops.push(Op::Gate(random_1q(rng, q)));
        }
    }
    let live: Vec<String> = qubits
        .iter()
        .filter(|q| !frozen.contains(q))
        .cloned()
        .collect();
    let room = budget - bits.len();
    let want = if bits.is_empty() || rng.gen_bool(0.7) {
        room
    } else {
        rng.gen_range(0..=room)
    };
    let mut final_measure = Vec::new();
    for q in live.choose_multiple(rng, want.min(live.len())) {
        let bit = format!("f{}", final_measure.len());
        final_measure.push((q.clone(), bit.clone()));
        bits.push(bit);
    }
    // mostly every bit, sometimes with some left hidden
    let k = if rng.gen_bool(0.7) {
        bits.len()
    } else {
        rng.gen_range(1..=bits.len())
    };
    let output_bits: Vec<String> = bits.choose_multiple(rng, k).cloned().collect();
    Program {
        qubits,
        init,
        inputs: vec![],
        outputs: vec![],
        ops,
        final_measure,
        output_bits,
    }
}

fn q_program(rng: &mut ChaCha8Rng) -> Program {
    let k = rng.gen_range(1..=2);
    let n = rng.gen_range(k + 1..=MAX_QUBITS);
    let qubits: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let inputs: Vec<String> = qubits[..k].to_vec();
    let init: Vec<(String, InitState)> = qubits[k..]
        .iter()
        .map(|q| (q.clone(), random_init(rng, 0.6)))
        .collect();
    let init_of = |q: &str| init.iter().find(|(x, _)| x == q).map(|(_, s)| *s);
    let mut holders = inputs.clone();
    let mut frozen: Vec<String> = Vec::new();
    let mut touched: Vec<String> = Vec::new();
    let mut measured = 0;
    let mut ops = Vec::new();
    for _ in 0..rng.gen_range(3..=8) {
        let ancillas: Vec<String> = qubits
            .iter()
            .filter(|q| !holders.contains(q) && !frozen.contains(q))
            .cloned()
            .collect();
        let fresh_zero: Vec<String> = ancillas
            .iter()
            .filter(|q| !touched.contains(q) && init_of(q) == Some(InitState::Zero))
            .cloned()
            .collect();
        let roll = rng.gen_range(0..100);
        if roll < 15 && !fresh_zero.is_empty() && measured < MAX_MEASUREMENTS {
            // one-bit teleport onto a fresh ancilla
            let from = holders.choose(rng).unwrap().clone();
            let to = fresh_zero.choose(rng).unwrap().clone();
            let bit = format!("c{measured}");
            measured += 1;
            *holders.iter_mut().find(|h| **h == from).unwrap() = to.clone();
            frozen.push(from.clone());
            touched.push(to.clone());
            ops.push(Op::Move { from, to, bit });
        } else if roll < 25 && !fresh_zero.is_empty() && measured < MAX_MEASUREMENTS {
            // correction that never fires
            let a = fresh_zero.choose(rng).unwrap().clone();
            let t = holders.choose(rng).unwrap().clone();
            let bit = format!("c{measured}");
            measured += 1;
            frozen.push(a.clone());
            ops.push(Op::MeasCtl {
                q: a,
                bit,
                fixes: vec![(random_fix(rng), t)],
            });
        } else if roll < 35 && !ancillas.is_empty() && measured < MAX_MEASUREMENTS {
            // measure an ancilla, fix another ancilla
            let a = ancillas.choose(rng).unwrap().clone();
            let rest: Vec<&String> = ancillas.iter().filter(|x| **x != a).collect();
            let fixes = match rest.choose(rng) {
                Some(b) if rng.gen_bool(0.7) => {
                    touched.push((*b).clone());
                    vec![(random_fix(rng), (*b).clone())]
                }
                _ => vec![],
            };
            let bit = format!("c{measured}");
            measured += 1;
            frozen.push(a.clone());
            ops.push(Op::MeasCtl { q: a, bit, fixes });
        } else if roll < 50 && !ancillas.is_empty() {
            // compute and uncompute through an ancilla
            let a = ancillas.choose(rng).unwrap().clone();
            let p = holders.choose(rng).unwrap().clone();
            let mut v = vec![random_2q(rng, &p, &a)];
            if rng.gen_bool(0.5) {
                let q = if rng.gen_bool(0.5) { &p } else { &a };
                v.insert(0, random_1q(rng, q));
            }
            let mut block = v.clone();
            block.extend(v.iter().rev().map(inverse));
            touched.push(a);
            ops.push(Op::Identity(block));
        } else if roll < 60 && !ancillas.is_empty() {
            let a = ancillas.choose(rng).unwrap().clone();
            ops.push(Op::Gate(random_1q(rng, &a)));
            touched.push(a);
        } else if roll < 75 && holders.len() == 2 {
            ops.push(Op::Gate(random_2q(rng, &holders[0], &holders[1])));
        } else {
            let p = holders.choose(rng).unwrap().clone();
            let gate = random_1q(rng, &p);
            if rng.gen_bool(0.2) {
                ops.push(Op::Identity(vec![gate.clone(), inverse(&gate)]));
            } else {
                ops.push(Op::Gate(gate));
            }
        }
    }
    let mut final_measure = Vec::new();
    for q in &qubits {
        if touched.contains(q) && !frozen.contains(q) && !holders.contains(q) {
            final_measure.push((q.clone(), format!("f{}", final_measure.len())));
        }
    }
    Program {
        qubits,
        init,
        inputs,
        outputs: holders,
        ops,
        final_measure,
        output_bits: vec![],
    }
}

fn within_limits(p: &Program, a: &CircuitSpec, b: &CircuitSpec) -> bool {
    let measures = p.final_measure.len()
        + p.ops
            .iter()
            .filter(|o| matches!(o, Op::MeasCtl { .. } | Op::Move { .. }))
            .count();
    measures <= MAX_MEASUREMENTS
        && a.circuit.gate_count() <= MAX_GATES
        && b.circuit.gate_count() <= MAX_GATES
}

/// One random pair; `mutate` applies a random single mutation to `b`.
pub fn random_pair(rng: &mut ChaCha8Rng, mode: Mode, mutate: bool) -> RandomPair {
    loop {
        let p = match mode {
            Mode::M => m_program(rng),
            Mode::Q => q_program(rng),
        };
        let a = realize(rng, &p);
        let mut b = realize(rng, &p);
        if !within_limits(&p, &a, &b) {
            continue;
        }
        let mut mutation = None;
        if mutate {
            // one site per gate or control, then an alternative at it, so
            // gates with many alternatives do not crowd out the rest
            let ms = mutations(&b);
            let mut sites: Vec<(MutationKind, usize)> = Vec::new();
            for m in &ms {
                if !sites.contains(&(m.kind, m.site)) {
                    sites.push((m.kind, m.site));
                }
            }
            let Some(&site) = sites.choose(rng) else {
                continue;
            };
            let at: Vec<&Mutant> = ms.iter().filter(|m| (m.kind, m.site) == site).collect();
            let m = if rng.gen_bool(0.75) {
                at[0]
            } else {
                *at.choose(rng).expect("site has a mutant")
            };
            mutation = Some(m.description.clone());
            b = m.spec.clone();
        }
        return RandomPair {
            mode,
            a,
            b,
            mutation,
        };
    }
}
