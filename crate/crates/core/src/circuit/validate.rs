use std::collections::BTreeSet;

use super::ir::{CircuitSpec, DynCircuit};
use super::ValidationError;

const UNITARY_TOL: f64 = 1e-10;

struct Walker<'a> {
    qubits: BTreeSet<&'a str>,
    /// Every bit written anywhere so far (bits are write-once).
    written: BTreeSet<String>,
    errors: Vec<ValidationError>,
}

impl<'a> Walker<'a> {
    fn err(&mut self, loc: &str, message: String) {
        self.errors.push(ValidationError {
            location: loc.to_owned(),
            message,
        });
    }

    fn check_qubit(&mut self, loc: &str, q: &str) {
        if !self.qubits.contains(q) {
            self.err(loc, format!("undeclared qubit `{q}`"));
        }
    }

    fn write_bits(&mut self, loc: &str, bits: &[String], avail: &mut BTreeSet<String>) {
        for b in bits {
            if self.qubits.contains(b.as_str()) {
                self.err(loc, format!("classical bit `{b}` has the name of a qubit"));
            }
            if !self.written.insert(b.clone()) {
                self.err(
                    loc,
                    format!("classical bit `{b}` is written more than once"),
                );
            }
            avail.insert(b.clone());
        }
    }

    /// Walks `c`; `avail` holds the bits readable at this point of the path.
    fn walk(&mut self, c: &DynCircuit, loc: &str, avail: &mut BTreeSet<String>) {
        match c {
            DynCircuit::Gates(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    let gl = join(loc, &format!("gate {i}"));
                    for q in g.qubits() {
                        self.check_qubit(&gl, q);
                    }
                    let e = g.unitarity_error();
                    if e > UNITARY_TOL {
                        self.err(
                            &gl,
                            format!("gate `{}` is not unitary (error {e:.2e})", g.name()),
                        );
                    }
                }
            }
            DynCircuit::Measure(m) => {
                self.check_measure(loc, &m.qubits, &m.bits);
                self.write_bits(loc, &m.bits, avail);
            }
            DynCircuit::Conditional(cd) => {
                for b in &cd.bits {
                    if !avail.contains(b) {
                        self.err(
                            loc,
                            format!("condition reads bit `{b}` before it is measured on this path"),
                        );
                    }
                }
                if cd.func.arity() != cd.bits.len() {
                    self.err(
                        loc,
                        format!(
                            "condition function takes {} bit(s) but {} are given",
                            cd.func.arity(),
                            cd.bits.len()
                        ),
                    );
                }
                if cd.func.outputs() < 32 && u64::from(cd.value) >= 1u64 << cd.func.outputs() {
                    self.err(loc, format!("condition value {} is out of range", cd.value));
                }
                for (i, g) in cd.gates.iter().enumerate() {
                    let gl = join(loc, &format!("gate {i}"));
                    for q in g.qubits() {
                        self.check_qubit(&gl, q);
                    }
                    if g.unitarity_error() > UNITARY_TOL {
                        self.err(&gl, format!("gate `{}` is not unitary", g.name()));
                    }
                }
            }
            DynCircuit::Branch(b) => {
                self.check_measure(loc, &b.measure.qubits, &b.measure.bits);
                self.write_bits(loc, &b.measure.bits, avail);
                if b.dispatch.arity() != b.measure.qubits.len() {
                    self.err(
                        loc,
                        format!(
                            "dispatch function takes {} bit(s) but {} qubit(s) are measured",
                            b.dispatch.arity(),
                            b.measure.qubits.len()
                        ),
                    );
                }
                let t = b.dispatch.outputs();
                if t >= 32 || b.branches.len() != 1usize << t {
                    self.err(
                        loc,
                        format!(
                            "dispatch with {t} output bit(s) needs {} branches, found {}",
                            if t < 32 {
                                (1u64 << t).to_string()
                            } else {
                                "2^t".into()
                            },
                            b.branches.len()
                        ),
                    );
                }
                let measured: BTreeSet<&String> = b.measure.qubits.iter().collect();
                for (i, br) in b.branches.iter().enumerate() {
                    let bl = join(loc, &format!("branch {i}"));
                    for q in br.qvar() {
                        if measured.contains(&q) {
                            self.err(&bl, format!("branch acts on measured qubit `{q}`"));
                        }
                    }
                    // bits measured inside a branch are not readable after it
                    self.walk(br, &bl, &mut avail.clone());
                }
            }
            DynCircuit::Seq(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    self.walk(p, &join(loc, &format!("step {i}")), avail);
                }
            }
        }
    }

    fn check_measure(&mut self, loc: &str, qubits: &[String], bits: &[String]) {
        if qubits.len() != bits.len() {
            self.err(
                loc,
                format!(
                    "{} qubit(s) measured into {} bit(s)",
                    qubits.len(),
                    bits.len()
                ),
            );
        }
        if qubits.is_empty() {
            self.err(loc, "measurement of no qubits".into());
        }
        for (i, q) in qubits.iter().enumerate() {
            self.check_qubit(loc, q);
            if qubits[..i].contains(q) {
                self.err(loc, format!("qubit `{q}` measured twice in one step"));
            }
        }
        for (i, b) in bits.iter().enumerate() {
            if bits[..i].contains(b) {
                self.err(loc, format!("bit `{b}` repeated in one measurement"));
            }
        }
    }
}

fn join(loc: &str, part: &str) -> String {
    if loc.is_empty() {
        part.to_owned()
    } else {
        format!("{loc} / {part}")
    }
}

/// Checks every well-formedness rule of a spec and reports all violations.
pub fn validate(spec: &CircuitSpec) -> Result<(), Vec<ValidationError>> {
    let mut w = Walker {
        qubits: BTreeSet::new(),
        written: BTreeSet::new(),
        errors: Vec::new(),
    };
    for q in &spec.qubits {
        if !w.qubits.insert(q.as_str()) {
            w.err("header", format!("qubit `{q}` declared twice"));
        }
    }
    for q in &spec.inputs {
        w.check_qubit("inputs", q);
    }
    for q in &spec.outputs {
        w.check_qubit("outputs", q);
    }
    let mut seen = BTreeSet::new();
    for (q, _) in &spec.fixed_init {
        w.check_qubit("init", q);
        if !seen.insert(q.as_str()) {
            w.err("init", format!("qubit `{q}` initialised twice"));
        }
        if spec.inputs.contains(q) {
            w.err(
                "init",
                format!("principal input `{q}` has a fixed initial state"),
            );
        }
    }
    for q in &spec.qubits {
        if !spec.inputs.contains(q) && !seen.contains(q.as_str()) {
            w.err(
                "init",
                format!("qubit `{q}` is neither an input nor initialised"),
            );
        }
    }
    let mut avail = BTreeSet::new();
    w.walk(&spec.circuit, "", &mut avail);
    if !spec.output_bits.is_empty() {
        if !spec.inputs.is_empty() {
            w.err(
                "inputs",
                "a spec with output bits must have no principal inputs".into(),
            );
        }
        for (i, b) in spec.output_bits.iter().enumerate() {
            if !w.written.contains(b) {
                w.err("outbits", format!("output bit `{b}` is never measured"));
            }
            if spec.output_bits[..i].contains(b) {
                w.err("outbits", format!("output bit `{b}` listed twice"));
            }
        }
    }
    if w.errors.is_empty() {
        Ok(())
    } else {
        Err(w.errors)
    }
}
