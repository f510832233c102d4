//! Benchmark circuit pairs: a conventional circuit and its dynamic
//! counterpart, plus single-step mutations of the dynamic side.

use std::f64::consts::PI;

use thiserror::Error;

use crate::circuit::{
    BranchStep, CircuitSpec, Conditional, DynCircuit, Gate, InitState, MeasureStep, Mode,
};
use crate::logic::BoolFunc;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("{what} must lie in {lo}..={hi}, got {got}")]
    Range {
        what: &'static str,
        lo: usize,
        hi: usize,
        got: usize,
    },
    #[error("phase must lie in [0, 1), got {0}")]
    Phase(f64),
    #[error("error position {0} is not one of the three code qubits")]
    ErrorQubit(usize),
}

/// A conventional/dynamic pair and the verdict expected for it.
#[derive(Clone, Debug)]
pub struct BenchmarkPair {
    pub name: String,
    pub mode: Mode,
    pub spec_a: CircuitSpec,
    pub spec_b: CircuitSpec,
    pub expect_equivalent: bool,
}

fn g(name: &str, params: &[f64], qs: &[&str]) -> Gate {
    Gate::new(name, params, qs).expect("library gate")
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn check_range(what: &'static str, v: usize, lo: usize, hi: usize) -> Result<(), BenchError> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(BenchError::Range {
            what,
            lo,
            hi,
            got: v,
        })
    }
}

fn basis_init(qubits: &[String], value: u64) -> Vec<(String, InitState)> {
    let n = qubits.len();
    qubits
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let bit = (value >> (n - 1 - i)) & 1;
            (
                q.clone(),
                if bit == 1 {
                    InitState::One
                } else {
                    InitState::Zero
                },
            )
        })
        .collect()
}

/// Rotation angle of the controlled phase between qubits `j < k` of the QFT.
fn qft_angle(j: usize, k: usize) -> f64 {
    2.0 * PI / (1u64 << (k - j + 1)) as f64
}

/// QFT without the final swaps on `n` qubits prepared in basis state
/// `input`, every qubit measured at the end.
pub fn qft_with_input(n: usize, input: u64) -> Result<CircuitSpec, BenchError> {
    check_range("qft size", n, 2, 16)?;
    let qs = names("q", n);
    let cs = names("c", n);
    let mut gates = Vec::new();
    for j in 0..n {
        gates.push(g("h", &[], &[&qs[j]]));
        for k in j + 1..n {
            gates.push(g("cp", &[qft_angle(j, k)], &[&qs[j], &qs[k]]));
        }
    }
    let mut steps = vec![DynCircuit::Gates(gates)];
    for (q, c) in qs.iter().zip(&cs) {
        steps.push(DynCircuit::Measure(MeasureStep {
            qubits: vec![q.clone()],
            bits: vec![c.clone()],
        }));
    }
    Ok(CircuitSpec {
        fixed_init: basis_init(&qs, input),
        qubits: qs,
        circuit: DynCircuit::Seq(steps),
        inputs: vec![],
        outputs: vec![],
        output_bits: cs,
    })
}

pub fn qft(n: usize) -> Result<CircuitSpec, BenchError> {
    qft_with_input(n, 0)
}

/// Semiclassical QFT: each qubit is measured right after its Hadamard and
/// its outcome classically controls the later rotations.
pub fn dyn_qft_with_input(n: usize, input: u64) -> Result<CircuitSpec, BenchError> {
    check_range("qft size", n, 2, 16)?;
    let qs = names("q", n);
    let cs = names("c", n);
    let mut steps = Vec::new();
    for k in 0..n {
        for j in 0..k {
            steps.push(DynCircuit::Conditional(Conditional::on_bit(
                &cs[j],
                vec![g("p", &[qft_angle(j, k)], &[&qs[k]])],
            )));
        }
        steps.push(DynCircuit::gate(g("h", &[], &[&qs[k]])));
        steps.push(DynCircuit::Measure(MeasureStep {
            qubits: vec![qs[k].clone()],
            bits: vec![cs[k].clone()],
        }));
    }
    Ok(CircuitSpec {
        fixed_init: basis_init(&qs, input),
        qubits: qs,
        circuit: DynCircuit::Seq(steps).flattened(),
        inputs: vec![],
        outputs: vec![],
        output_bits: cs,
    })
}

pub fn dyn_qft(n: usize) -> Result<CircuitSpec, BenchError> {
    dyn_qft_with_input(n, 0)
}

/// Default phase for `n` counting qubits: 0.3125 truncated to `n` bits.
pub fn default_phase(n: usize) -> f64 {
    let scale = (1u64 << n) as f64;
    (0.3125 * scale).floor() / scale
}

fn check_pe(n: usize, phi: f64) -> Result<(), BenchError> {
    check_range("phase estimation size", n, 2, 7)?;
    if !(0.0..1.0).contains(&phi) {
        return Err(BenchError::Phase(phi));
    }
    Ok(())
}

fn pe_frame(n: usize, circuit: DynCircuit) -> CircuitSpec {
    let mut qubits: Vec<String> = (1..=n).map(|k| format!("q{k}")).collect();
    let mut fixed_init: Vec<(String, InitState)> = qubits
        .iter()
        .map(|q| (q.clone(), InitState::Zero))
        .collect();
    qubits.push("r".into());
    // |1⟩ is the eigenvector of U with eigenvalue e^{2πiφ}
    fixed_init.push(("r".into(), InitState::One));
    CircuitSpec {
        qubits,
        circuit,
        fixed_init,
        inputs: vec![],
        outputs: vec![],
        // most significant digit of the phase first
        output_bits: (1..=n).rev().map(|k| format!("c{k}")).collect(),
    }
}

/// Phase estimation with `n` counting qubits for `U = diag(1, e^{2πiφ})`
/// on eigenstate |1⟩; qubit `q_k` drives `U^(2^(n-k))`.
pub fn pe(n: usize, phi: f64) -> Result<CircuitSpec, BenchError> {
    check_pe(n, phi)?;
    let q: Vec<String> = (1..=n).map(|k| format!("q{k}")).collect();
    let mut gates = Vec::new();
    for qk in &q {
        gates.push(g("h", &[], &[qk]));
    }
    for (k, qk) in q.iter().enumerate() {
        gates.push(g("cu_pow", &[phi, (n - 1 - k) as f64], &[qk, "r"]));
    }
    for k in 0..n {
        for j in 0..k {
            gates.push(g("cp", &[-qft_angle(j, k)], &[&q[j], &q[k]]));
        }
        gates.push(g("h", &[], &[&q[k]]));
    }
    let mut steps = vec![DynCircuit::Gates(gates)];
    for (k, qk) in q.iter().enumerate() {
        steps.push(DynCircuit::Measure(MeasureStep {
            qubits: vec![qk.clone()],
            bits: vec![format!("c{}", k + 1)],
        }));
    }
    Ok(pe_frame(n, DynCircuit::Seq(steps)))
}

/// Dynamic phase estimation: each counting qubit is prepared, used,
/// corrected by the earlier outcomes and measured before the next one.
pub fn dyn_pe(n: usize, phi: f64) -> Result<CircuitSpec, BenchError> {
    check_pe(n, phi)?;
    let q: Vec<String> = (1..=n).map(|k| format!("q{k}")).collect();
    let mut steps = Vec::new();
    for k in 0..n {
        steps.push(DynCircuit::Gates(vec![
            g("h", &[], &[&q[k]]),
            g("cu_pow", &[phi, (n - 1 - k) as f64], &[&q[k], "r"]),
        ]));
        for j in 0..k {
            steps.push(DynCircuit::Conditional(Conditional::on_bit(
                &format!("c{}", j + 1),
                vec![g("p", &[-qft_angle(j, k)], &[&q[k]])],
            )));
        }
        steps.push(DynCircuit::gate(g("h", &[], &[&q[k]])));
        steps.push(DynCircuit::Measure(MeasureStep {
            qubits: vec![q[k].clone()],
            bits: vec![format!("c{}", k + 1)],
        }));
    }
    Ok(pe_frame(n, DynCircuit::Seq(steps).flattened()))
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| (*s).to_owned()).collect()
}

/// Teleportation of `q` to `q2` with the four-way dispatch on the
/// outcomes of `q` and `q1`.
pub fn teleport() -> CircuitSpec {
    let c0 = DynCircuit::Gates(vec![
        g("h", &[], &["q1"]),
        g("cx", &[], &["q1", "q2"]),
        g("cx", &[], &["q", "q1"]),
        g("h", &[], &["q"]),
    ]);
    let dispatch = DynCircuit::Branch(BranchStep {
        measure: MeasureStep::new(&["q", "q1"], &["m0", "m1"]),
        dispatch: BoolFunc::identity(2),
        branches: vec![
            DynCircuit::empty(),
            DynCircuit::gate(g("x", &[], &["q2"])),
            DynCircuit::gate(g("z", &[], &["q2"])),
            DynCircuit::Gates(vec![g("x", &[], &["q2"]), g("z", &[], &["q2"])]),
        ],
    });
    CircuitSpec {
        qubits: strs(&["q", "q1", "q2"]),
        circuit: DynCircuit::Seq(vec![c0, dispatch]),
        fixed_init: vec![
            ("q1".into(), InitState::Zero),
            ("q2".into(), InitState::Zero),
        ],
        inputs: strs(&["q"]),
        outputs: strs(&["q2"]),
        output_bits: vec![],
    }
}

/// Moves the state of `q` to `q2` with a swap.
pub fn swap_teleport() -> CircuitSpec {
    CircuitSpec {
        qubits: strs(&["q", "q2"]),
        circuit: DynCircuit::gate(g("swap", &[], &["q", "q2"])),
        fixed_init: vec![("q2".into(), InitState::Zero)],
        inputs: strs(&["q"]),
        outputs: strs(&["q2"]),
        output_bits: vec![],
    }
}

/// Identity on one logical qubit `q`.
pub fn identity_spec() -> CircuitSpec {
    CircuitSpec {
        qubits: strs(&["q"]),
        circuit: DynCircuit::empty(),
        fixed_init: vec![],
        inputs: strs(&["q"]),
        outputs: strs(&["q"]),
        output_bits: vec![],
    }
}

const CODE: [&str; 3] = ["q", "a1", "a2"];

/// Syndrome extraction onto `s1` (parity of q, a1) and `s2` (parity of
/// a1, a2), then a dispatch applying `fix` to the flagged code qubit.
fn syndrome_and_correct(fix: &str) -> Vec<DynCircuit> {
    let extract = DynCircuit::Gates(vec![
        g("cx", &[], &["q", "s1"]),
        g("cx", &[], &["a1", "s1"]),
        g("cx", &[], &["a1", "s2"]),
        g("cx", &[], &["a2", "s2"]),
    ]);
    // outcome (s1 s2): 01 -> a2, 10 -> q, 11 -> a1
    let dispatch = DynCircuit::Branch(BranchStep {
        measure: MeasureStep::new(&["s1", "s2"], &["b1", "b2"]),
        dispatch: BoolFunc::identity(2),
        branches: vec![
            DynCircuit::empty(),
            DynCircuit::gate(g(fix, &[], &["a2"])),
            DynCircuit::gate(g(fix, &[], &["q"])),
            DynCircuit::gate(g(fix, &[], &["a1"])),
        ],
    });
    vec![extract, dispatch]
}

fn code_frame(circuit: DynCircuit) -> CircuitSpec {
    let qubits = strs(&["q", "a1", "a2", "s1", "s2"]);
    CircuitSpec {
        fixed_init: qubits[1..]
            .iter()
            .map(|q| (q.clone(), InitState::Zero))
            .collect(),
        qubits,
        circuit,
        inputs: strs(&["q"]),
        outputs: strs(&["q"]),
        output_bits: vec![],
    }
}

fn error_gate(kind: &str, err: Option<usize>) -> Result<Vec<Gate>, BenchError> {
    match err {
        None => Ok(vec![]),
        Some(k) if k < 3 => Ok(vec![g(kind, &[], &[CODE[k]])]),
        Some(k) => Err(BenchError::ErrorQubit(k)),
    }
}

/// Three-qubit bit-flip code on logical qubit `q` with an optional X error
/// on code qubit `err` (0 = q, 1 = a1, 2 = a2).
pub fn bitflip_code(err: Option<usize>) -> Result<CircuitSpec, BenchError> {
    let mut steps = vec![DynCircuit::Gates(vec![
        g("cx", &[], &["q", "a1"]),
        g("cx", &[], &["q", "a2"]),
    ])];
    steps.push(DynCircuit::Gates(error_gate("x", err)?));
    steps.extend(syndrome_and_correct("x"));
    steps.push(DynCircuit::Gates(vec![
        g("cx", &[], &["q", "a2"]),
        g("cx", &[], &["q", "a1"]),
    ]));
    Ok(code_frame(DynCircuit::Seq(steps).flattened()))
}

/// Three-qubit phase-flip code with an optional Z error.
pub fn phaseflip_code(err: Option<usize>) -> Result<CircuitSpec, BenchError> {
    let hs = || CODE.iter().map(|q| g("h", &[], &[q])).collect::<Vec<_>>();
    let mut enc = vec![g("cx", &[], &["q", "a1"]), g("cx", &[], &["q", "a2"])];
    enc.extend(hs());
    let mut steps = vec![DynCircuit::Gates(enc)];
    steps.push(DynCircuit::Gates(error_gate("z", err)?));
    steps.push(DynCircuit::Gates(hs()));
    steps.extend(syndrome_and_correct("x"));
    steps.push(DynCircuit::Gates(vec![
        g("cx", &[], &["q", "a2"]),
        g("cx", &[], &["q", "a1"]),
    ]));
    Ok(code_frame(DynCircuit::Seq(steps).flattened()))
}

/// Gate teleportation of S or T through a magic ancilla `m`.
pub fn state_inject(gate: &str) -> Option<CircuitSpec> {
    let fix = match gate {
        "s" => "z",
        "t" => "s",
        _ => return None,
    };
    let circuit = DynCircuit::Seq(vec![
        DynCircuit::Gates(vec![g(gate, &[], &["m"]), g("cx", &[], &["q", "m"])]),
        DynCircuit::Branch(BranchStep {
            measure: MeasureStep::new(&["m"], &["k"]),
            dispatch: BoolFunc::identity(1),
            branches: vec![DynCircuit::empty(), DynCircuit::gate(g(fix, &[], &["q"]))],
        }),
    ]);
    Some(CircuitSpec {
        qubits: strs(&["q", "m"]),
        circuit,
        fixed_init: vec![("m".into(), InitState::Plus)],
        inputs: strs(&["q"]),
        outputs: strs(&["q"]),
        output_bits: vec![],
    })
}

/// The bare gate on one qubit.
pub fn bare_gate(gate: &str) -> CircuitSpec {
    CircuitSpec {
        circuit: DynCircuit::gate(g(gate, &[], &["q"])),
        ..identity_spec()
    }
}

fn pair(name: String, mode: Mode, a: CircuitSpec, b: CircuitSpec) -> BenchmarkPair {
    BenchmarkPair {
        name,
        mode,
        spec_a: a,
        spec_b: b,
        expect_equivalent: true,
    }
}

pub fn qft_pair(n: usize) -> Result<BenchmarkPair, BenchError> {
    Ok(pair(format!("qft_{n}"), Mode::M, qft(n)?, dyn_qft(n)?))
}

pub fn pe_pair(n: usize, phi: f64) -> Result<BenchmarkPair, BenchError> {
    Ok(pair(
        format!("PE_{n}"),
        Mode::M,
        pe(n, phi)?,
        dyn_pe(n, phi)?,
    ))
}

pub fn bitflip_pair(err: Option<usize>) -> Result<BenchmarkPair, BenchError> {
    let name = match err {
        None => "Bitflip_noerr".to_owned(),
        Some(k) => format!("Bitflip_x{k}"),
    };
    Ok(pair(name, Mode::Q, identity_spec(), bitflip_code(err)?))
}

pub fn phaseflip_pair(err: Option<usize>) -> Result<BenchmarkPair, BenchError> {
    let name = match err {
        None => "Phaseflip_noerr".to_owned(),
        Some(k) => format!("Phaseflip_z{k}"),
    };
    Ok(pair(name, Mode::Q, identity_spec(), phaseflip_code(err)?))
}

pub fn teleport_pair() -> BenchmarkPair {
    pair("Teleportation".into(), Mode::Q, swap_teleport(), teleport())
}

pub fn inject_pair(gate: &str) -> Option<BenchmarkPair> {
    let name = format!("State_inject_{}", gate.to_ascii_uppercase());
    Some(pair(name, Mode::Q, bare_gate(gate), state_inject(gate)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Qft,
    Pe,
    Qec,
    All,
}

/// Benchmark rows of a suite; `max_n` caps the QFT and PE sizes.
pub fn suite(s: Suite, max_n: usize) -> Vec<BenchmarkPair> {
    let mut out = Vec::new();
    if matches!(s, Suite::Qft | Suite::All) {
        for n in 2..=max_n.min(16) {
            out.extend(qft_pair(n));
        }
    }
    if matches!(s, Suite::Pe | Suite::All) {
        for n in 2..=max_n.min(7) {
            out.extend(pe_pair(n, default_phase(n)));
        }
    }
    if matches!(s, Suite::Qec | Suite::All) {
        // the suite rows carry an error on the middle code qubit
        for mut p in [bitflip_pair(Some(1)), phaseflip_pair(Some(1))]
            .into_iter()
            .flatten()
        {
            p.name = p.name.split('_').next().unwrap_or_default().to_owned();
            out.push(p);
        }
        out.push(teleport_pair());
        out.extend(inject_pair("s"));
        out.extend(inject_pair("t"));
    }
    out
}

/// Kind of a single-step change to a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationKind {
    GateSwap,
    DroppedCorrection,
    WrongControl,
}

#[derive(Clone, Debug)]
pub struct Mutant {
    pub kind: MutationKind,
    /// Gate index for swaps, control-site index otherwise.
    pub site: usize,
    pub description: String,
    pub spec: CircuitSpec,
}

/// Different gates on the same qubits, most disruptive first.
fn replacements(gate: &Gate) -> Vec<Gate> {
    let qs: Vec<&str> = gate.qubits().iter().map(String::as_str).collect();
    if qs.len() == 1 {
        return ["h", "x", "z", "y", "s", "t"]
            .iter()
            .filter(|n| **n != gate.name())
            .map(|n| g(n, &[], &qs))
            .collect();
    }
    let mut out = Vec::new();
    if gate.name() == "cx" {
        out.push(g("cx", &[], &[qs[1], qs[0]]));
    } else {
        out.push(g("cx", &[], &qs));
    }
    for n in ["cz", "swap"] {
        if n != gate.name() {
            out.push(g(n, &[], &qs));
        }
    }
    out
}

fn walk_gates(c: &mut DynCircuit, f: &mut dyn FnMut(&mut Vec<Gate>)) {
    match c {
        DynCircuit::Gates(gs) => f(gs),
        DynCircuit::Conditional(cd) => f(&mut cd.gates),
        DynCircuit::Branch(b) => b.branches.iter_mut().for_each(|br| walk_gates(br, f)),
        DynCircuit::Seq(parts) => parts.iter_mut().for_each(|p| walk_gates(p, f)),
        DynCircuit::Measure(_) => {}
    }
}

/// Visits classical-control sites: conditionals and dispatches.
fn walk_controls(
    c: &mut DynCircuit,
    seen_bits: &mut Vec<String>,
    f: &mut dyn FnMut(&mut DynCircuit, &[String]),
) {
    match c {
        DynCircuit::Measure(m) => seen_bits.extend(m.bits.iter().cloned()),
        DynCircuit::Conditional(_) => f(c, seen_bits),
        DynCircuit::Branch(_) => {
            f(c, seen_bits);
            if let DynCircuit::Branch(b) = c {
                seen_bits.extend(b.measure.bits.iter().cloned());
                for br in &mut b.branches {
                    let mut inner = seen_bits.clone();
                    walk_controls(br, &mut inner, f);
                }
            }
        }
        DynCircuit::Seq(parts) => {
            for p in parts {
                walk_controls(p, seen_bits, f);
            }
        }
        DynCircuit::Gates(_) => {}
    }
}

/// Every single-step mutation of `spec`: each gate replaced by several
/// different gates, each correction dropped, and each classical control
/// redirected. Mutants are listed in circuit order per kind.
pub fn mutations(spec: &CircuitSpec) -> Vec<Mutant> {
    let mut out = Vec::new();
    let mut total = 0;
    walk_gates(&mut spec.circuit.clone(), &mut |gs| total += gs.len());
    for target in 0..total {
        let mut alternatives = Vec::new();
        let mut k = 0;
        walk_gates(&mut spec.circuit.clone(), &mut |gs| {
            for gate in gs.iter() {
                if k == target {
                    alternatives = replacements(gate);
                }
                k += 1;
            }
        });
        for new in alternatives {
            let mut c = spec.circuit.clone();
            let mut k = 0;
            let mut desc = String::new();
            walk_gates(&mut c, &mut |gs| {
                for gate in gs.iter_mut() {
                    if k == target {
                        desc = format!("gate {target}: `{gate}` -> `{new}`");
                        *gate = new.clone();
                    }
                    k += 1;
                }
            });
            out.push(Mutant {
                kind: MutationKind::GateSwap,
                site: target,
                description: desc,
                spec: CircuitSpec {
                    circuit: c,
                    ..spec.clone()
                },
            });
        }
    }
    let mut sites = 0;
    walk_controls(&mut spec.circuit.clone(), &mut Vec::new(), &mut |_, _| {
        sites += 1
    });
    for target in 0..sites {
        // dropped correction
        let mut c = spec.circuit.clone();
        let mut k = 0;
        let mut dropped = Vec::new();
        walk_controls(&mut c, &mut Vec::new(), &mut |site, _| {
            if k == target {
                match site {
                    DynCircuit::Conditional(cd) => {
                        dropped.push(format!("control {target}: dropped conditional"));
                        cd.gates.clear();
                    }
                    DynCircuit::Branch(b) => {
                        if let Some(i) = (1..b.branches.len())
                            .rev()
                            .find(|&i| b.branches[i].gate_count() > 0)
                        {
                            dropped.push(format!("control {target}: dropped branch {i}"));
                            b.branches[i] = DynCircuit::empty();
                        }
                    }
                    _ => {}
                }
            }
            k += 1;
        });
        if let Some(d) = dropped.pop() {
            out.push(Mutant {
                kind: MutationKind::DroppedCorrection,
                site: target,
                description: d,
                spec: CircuitSpec {
                    circuit: c.flattened(),
                    ..spec.clone()
                },
            });
        }
        // wrong control
        let mut c = spec.circuit.clone();
        let mut k = 0;
        let mut changed = Vec::new();
        walk_controls(&mut c, &mut Vec::new(), &mut |site, avail| {
            if k == target {
                match site {
                    DynCircuit::Conditional(cd) => {
                        let other = avail.iter().rev().find(|b| !cd.bits.contains(b));
                        match (cd.single_bit(), other) {
                            (Some(bit), Some(o)) => {
                                changed.push(format!("control {target}: `{bit}` -> `{o}`"));
                                cd.bits = vec![o.clone()];
                            }
                            _ => {
                                changed.push(format!("control {target}: condition negated"));
                                let f = cd.func.equals(cd.value);
                                cd.func = f;
                                cd.value = 0;
                            }
                        }
                    }
                    DynCircuit::Branch(b) if b.branches.len() > 1 => {
                        b.branches.rotate_left(1);
                        changed.push(format!("control {target}: branches rotated"));
                    }
                    _ => {}
                }
            }
            k += 1;
        });
        if let Some(d) = changed.pop() {
            out.push(Mutant {
                kind: MutationKind::WrongControl,
                site: target,
                description: d,
                spec: CircuitSpec {
                    circuit: c,
                    ..spec.clone()
                },
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::validate;

    #[test]
    fn generators_validate() {
        let mut specs = vec![teleport(), swap_teleport(), identity_spec(), bare_gate("t")];
        for n in 2..=6 {
            specs.push(qft(n).unwrap());
            specs.push(dyn_qft(n).unwrap());
        }
        for n in 2..=7 {
            specs.push(pe(n, default_phase(n)).unwrap());
            specs.push(dyn_pe(n, default_phase(n)).unwrap());
        }
        for e in [None, Some(0), Some(1), Some(2)] {
            specs.push(bitflip_code(e).unwrap());
            specs.push(phaseflip_code(e).unwrap());
        }
        specs.push(state_inject("s").unwrap());
        specs.push(state_inject("t").unwrap());
        for s in &specs {
            assert_eq!(validate(s), Ok(()), "{s:?}");
        }
    }

    #[test]
    fn ranges_are_checked() {
        assert!(matches!(qft(1), Err(BenchError::Range { .. })));
        assert!(matches!(qft(17), Err(BenchError::Range { .. })));
        assert!(matches!(pe(8, 0.5), Err(BenchError::Range { .. })));
        assert_eq!(pe(3, 1.0).unwrap_err(), BenchError::Phase(1.0));
        assert_eq!(
            bitflip_code(Some(3)).unwrap_err(),
            BenchError::ErrorQubit(3)
        );
        assert!(state_inject("h").is_none());
    }

    #[test]
    fn suites_have_expected_rows() {
        assert_eq!(suite(Suite::Qft, 8).len(), 7);
        let qec: Vec<String> = suite(Suite::Qec, 0).into_iter().map(|p| p.name).collect();
        assert_eq!(
            qec,
            [
                "Bitflip",
                "Phaseflip",
                "Teleportation",
                "State_inject_S",
                "State_inject_T"
            ]
        );
    }

    #[test]
    fn default_phase_is_representable() {
        assert_eq!(default_phase(2), 0.25);
        assert_eq!(default_phase(3), 0.25);
        assert_eq!(default_phase(4), 0.3125);
        assert_eq!(default_phase(7), 0.3125);
    }

    #[test]
    fn mutants_validate_and_cover_all_kinds() {
        let ms = mutations(&teleport());
        assert!(ms.iter().any(|m| m.kind == MutationKind::GateSwap));
        assert!(ms.iter().any(|m| m.kind == MutationKind::DroppedCorrection));
        assert!(ms.iter().any(|m| m.kind == MutationKind::WrongControl));
        for m in &ms {
            assert_eq!(validate(&m.spec), Ok(()), "{}", m.description);
            assert_ne!(m.spec, teleport());
        }
        let dq = mutations(&dyn_qft(3).unwrap());
        assert!(dq.len() >= 10);
        for m in &dq {
            assert_eq!(validate(&m.spec), Ok(()), "{}", m.description);
        }
    }
}
