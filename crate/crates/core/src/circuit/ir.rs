use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::gate::Gate;
use crate::logic::BoolFunc;

/// Computational-basis measurement of `qubits`, writing one classical bit
/// per qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureStep {
    pub qubits: Vec<String>,
    pub bits: Vec<String>,
}

impl MeasureStep {
    pub fn new(qubits: &[&str], bits: &[&str]) -> Self {
        MeasureStep {
            qubits: qubits.iter().map(|s| (*s).to_owned()).collect(),
            bits: bits.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

/// Measure-then-dispatch: runs `branches[f(outcome)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchStep {
    pub measure: MeasureStep,
    pub dispatch: BoolFunc,
    pub branches: Vec<DynCircuit>,
}

/// Gates applied iff `func(bits) == value`, on bits measured earlier.
#[derive(Clone, Debug, PartialEq)]
pub struct Conditional {
    pub bits: Vec<String>,
    pub func: BoolFunc,
    pub value: u32,
    pub gates: Vec<Gate>,
}

impl Conditional {
    /// Gates controlled by a single bit being 1.
    pub fn on_bit(bit: &str, gates: Vec<Gate>) -> Self {
        Conditional {
            bits: vec![bit.to_owned()],
            func: BoolFunc::identity(1),
            value: 1,
            gates,
        }
    }

    /// True when the condition is just "this one bit is 1".
    pub fn single_bit(&self) -> Option<&str> {
        (self.bits.len() == 1 && self.func.is_identity() && self.value == 1)
            .then(|| self.bits[0].as_str())
    }
}

/// A dynamic quantum circuit.
///
/// `Measure` and `Conditional` are the lowered form of a dispatch: a
/// measurement whose bits later control gates.
#[derive(Clone, Debug, PartialEq)]
pub enum DynCircuit {
    Gates(Vec<Gate>),
    Measure(MeasureStep),
    Conditional(Conditional),
    Branch(BranchStep),
    Seq(Vec<DynCircuit>),
}

impl DynCircuit {
    pub fn empty() -> Self {
        DynCircuit::Gates(Vec::new())
    }

    pub fn gate(g: Gate) -> Self {
        DynCircuit::Gates(vec![g])
    }

    /// Qubits the circuit acts on. As for a dispatch, whose qubits are those
    /// of its branches, measured qubits do not count by themselves.
    pub fn qvar(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_qvar(&mut out);
        out
    }

    fn collect_qvar(&self, out: &mut BTreeSet<String>) {
        match self {
            DynCircuit::Gates(gs) => {
                for g in gs {
                    out.extend(g.qubits().iter().cloned());
                }
            }
            DynCircuit::Measure(_) => {}
            DynCircuit::Conditional(c) => {
                for g in &c.gates {
                    out.extend(g.qubits().iter().cloned());
                }
            }
            DynCircuit::Branch(b) => {
                for br in &b.branches {
                    br.collect_qvar(out);
                }
            }
            DynCircuit::Seq(parts) => {
                for p in parts {
                    p.collect_qvar(out);
                }
            }
        }
    }

    /// Qubits touched by the circuit including measured ones.
    pub fn touched_qubits(&self) -> BTreeSet<String> {
        let mut out = self.qvar();
        self.visit(&mut |c| match c {
            DynCircuit::Branch(b) => out.extend(b.measure.qubits.iter().cloned()),
            DynCircuit::Measure(m) => out.extend(m.qubits.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&DynCircuit)) {
        f(self);
        match self {
            DynCircuit::Branch(b) => {
                for br in &b.branches {
                    br.visit(f);
                }
            }
            DynCircuit::Seq(parts) => {
                for p in parts {
                    p.visit(f);
                }
            }
            _ => {}
        }
    }

    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut DynCircuit)) {
        f(self);
        match self {
            DynCircuit::Branch(b) => {
                for br in &mut b.branches {
                    br.visit_mut(f);
                }
            }
            DynCircuit::Seq(parts) => {
                for p in parts {
                    p.visit_mut(f);
                }
            }
            _ => {}
        }
    }

    /// Classical bits written by measurements, in program order.
    pub fn produced_bits(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |c| match c {
            DynCircuit::Measure(m) => out.extend(m.bits.iter().cloned()),
            DynCircuit::Branch(b) => out.extend(b.measure.bits.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Number of gates, counting every branch.
    pub fn gate_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |c| match c {
            DynCircuit::Gates(gs) => n += gs.len(),
            DynCircuit::Conditional(cd) => n += cd.gates.len(),
            _ => {}
        });
        n
    }

    /// Flattens nested sequences and drops empty gate blocks.
    pub fn flattened(self) -> DynCircuit {
        fn push(out: &mut Vec<DynCircuit>, c: DynCircuit) {
            match c {
                DynCircuit::Seq(parts) => {
                    for p in parts {
                        push(out, p);
                    }
                }
                DynCircuit::Gates(gs) if gs.is_empty() => {}
                DynCircuit::Gates(gs) => {
                    if let Some(DynCircuit::Gates(prev)) = out.last_mut() {
                        prev.extend(gs);
                    } else {
                        out.push(DynCircuit::Gates(gs));
                    }
                }
                DynCircuit::Branch(mut b) => {
                    b.branches = b.branches.into_iter().map(DynCircuit::flattened).collect();
                    out.push(DynCircuit::Branch(b));
                }
                other => out.push(other),
            }
        }
        let mut out = Vec::new();
        push(&mut out, self);
        match out.len() {
            0 => DynCircuit::empty(),
            1 => out.pop().unwrap(),
            _ => DynCircuit::Seq(out),
        }
    }

    /// Top-level steps of the circuit.
    pub fn steps(&self) -> Vec<&DynCircuit> {
        match self {
            DynCircuit::Seq(parts) => parts.iter().collect(),
            other => vec![other],
        }
    }
}

/// Fixed initial state of one non-input qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InitState {
    Zero,
    One,
    Plus,
}

impl InitState {
    pub fn amplitudes(self) -> [f64; 2] {
        match self {
            InitState::Zero => [1.0, 0.0],
            InitState::One => [0.0, 1.0],
            InitState::Plus => [std::f64::consts::FRAC_1_SQRT_2; 2],
        }
    }
}

impl fmt::Display for InitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitState::Zero => f.write_str("0"),
            InitState::One => f.write_str("1"),
            InitState::Plus => f.write_str("+"),
        }
    }
}

/// Equivalence notion a spec is meant for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Output distribution over measured output bits.
    M,
    /// Outcome-independent output quantum state.
    Q,
}

/// A dynamic circuit together with its fixed input state, principal input
/// qubits, principal output qubits and (for m-mode) output bits.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitSpec {
    pub qubits: Vec<String>,
    pub circuit: DynCircuit,
    pub fixed_init: Vec<(String, InitState)>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub output_bits: Vec<String>,
}

impl CircuitSpec {
    /// Specs with output bits are compared on their outcome distribution.
    pub fn mode(&self) -> Mode {
        if self.output_bits.is_empty() {
            Mode::Q
        } else {
            Mode::M
        }
    }

    pub fn init_of(&self, q: &str) -> Option<InitState> {
        self.fixed_init
            .iter()
            .find(|(n, _)| n == q)
            .map(|(_, s)| *s)
    }

    pub fn qubit_position(&self, q: &str) -> Option<usize> {
        self.qubits.iter().position(|n| n == q)
    }

    /// Qubits discarded at the end (not principal outputs).
    pub fn discarded(&self) -> Vec<String> {
        self.qubits
            .iter()
            .filter(|q| !self.outputs.contains(q))
            .cloned()
            .collect()
    }
}

/// Outcome of an equivalence check.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent { witness: Witness },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equivalent => "Equivalent",
            Verdict::NotEquivalent { .. } => "NotEquivalent",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

/// Where two circuits differ: an assignment of classical outcomes and the
/// two values found there (probabilities for m-mode, branch norms for
/// q-mode).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub outcome: Vec<(String, u8)>,
    pub left: f64,
    pub right: f64,
    pub detail: String,
}
