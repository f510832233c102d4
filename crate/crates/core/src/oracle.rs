//! Dense reference semantics: outcome ensembles of linear operators,
//! output distributions, Choi matrices and the three equivalence notions.
//! Exponential by design and guarded to small registers.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{CircuitSpec, DynCircuit, Gate};

/// Largest register the oracle accepts.
pub const MAX_QUBITS: usize = 12;
/// Largest number of ensemble members the oracle accepts.
pub const MAX_MEMBERS: usize = 1 << 20;
/// Entrywise tolerance on distributions and Choi matrices.
pub const ORACLE_TOL: f64 = 1e-9;
/// Branches below this weight for every input are unreachable.
pub const ZERO_BRANCH: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{0} qubits exceed the oracle limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("ensemble grows beyond {MAX_MEMBERS} members")]
    TooManyMembers,
    #[error("output distributions need output bits and no principal inputs")]
    NotMMode,
    #[error("circuits cannot be compared: {0}")]
    Incompatible(String),
}

/// Measured bits with their values, in execution order.
pub type OutcomeRecord = Vec<(String, u8)>;

/// One member of an ensemble: the outcome record and the operator, as a
/// `2^n × k` matrix (the operator applied to `k` input columns).
#[derive(Clone, Debug)]
pub struct Member {
    pub record: OutcomeRecord,
    pub op: DMatrix<Complex64>,
}

struct Sim<'a> {
    qubits: &'a [String],
    /// Drop members whose operator vanished (projected away).
    prune: bool,
}

impl Sim<'_> {
    fn pos(&self, q: &str) -> usize {
        self.qubits
            .iter()
            .position(|x| x == q)
            .expect("declared qubit")
    }

    fn shift(&self, q: &str) -> usize {
        self.qubits.len() - 1 - self.pos(q)
    }

    fn apply_gate(&self, g: &Gate, m: &mut DMatrix<Complex64>) {
        let shifts: Vec<usize> = g.qubits().iter().map(|q| self.shift(q)).collect();
        let k = shifts.len();
        let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
        let dim = m.nrows();
        let sub = 1usize << k;
        let offsets: Vec<usize> = (0..sub)
            .map(|v| {
                (0..k)
                    .filter(|j| (v >> (k - 1 - j)) & 1 == 1)
                    .map(|j| 1usize << shifts[j])
                    .sum()
            })
            .collect();
        let mut amp = vec![Complex64::new(0.0, 0.0); sub];
        for col in 0..m.ncols() {
            for base in (0..dim).filter(|b| b & mask == 0) {
                for v in 0..sub {
                    amp[v] = m[(base + offsets[v], col)];
                }
                for r in 0..sub {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..sub {
                        acc += g.entry(r, c) * amp[c];
                    }
                    m[(base + offsets[r], col)] = acc;
                }
            }
        }
    }

    fn project(&self, q: &str, bit: u8, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let s = self.shift(q);
        let mut out = m.clone();
        for r in 0..m.nrows() {
            if ((r >> s) & 1) as u8 != bit {
                out.row_mut(r).fill(Complex64::new(0.0, 0.0));
            }
        }
        out
    }

    fn measure(
        &self,
        qubits: &[String],
        bits: &[String],
        members: Vec<Member>,
    ) -> Result<Vec<Member>, OracleError> {
        let mut cur = members;
        for (q, b) in qubits.iter().zip(bits) {
            let mut next = Vec::with_capacity(cur.len() * 2);
            for mem in cur {
                for v in 0..2u8 {
                    let op = self.project(q, v, &mem.op);
                    if self.prune && op.iter().all(|z| z.norm_sqr() < 1e-30) {
                        continue;
                    }
                    let mut record = mem.record.clone();
                    record.push((b.clone(), v));
                    next.push(Member { record, op });
                }
            }
            if next.len() > MAX_MEMBERS {
                return Err(OracleError::TooManyMembers);
            }
            cur = next;
        }
        Ok(cur)
    }

    fn bit_value(record: &OutcomeRecord, bit: &str) -> u8 {
        record
            .iter()
            .rev()
            .find(|(b, _)| b == bit)
            .map(|(_, v)| *v)
            .expect("bit measured before use")
    }

    fn value_of(record: &OutcomeRecord, bits: &[String]) -> u64 {
        bits.iter().fold(0u64, |acc, b| {
            (acc << 1) | u64::from(Self::bit_value(record, b))
        })
    }

    fn run(&self, c: &DynCircuit, members: Vec<Member>) -> Result<Vec<Member>, OracleError> {
        match c {
            DynCircuit::Gates(gs) => Ok(members
                .into_iter()
                .map(|mut mem| {
                    for g in gs {
                        self.apply_gate(g, &mut mem.op);
                    }
                    mem
                })
                .collect()),
            DynCircuit::Measure(ms) => self.measure(&ms.qubits, &ms.bits, members),
            DynCircuit::Conditional(cd) => Ok(members
                .into_iter()
                .map(|mut mem| {
                    let v = Self::value_of(&mem.record, &cd.bits);
                    if cd.func.eval(v) == cd.value {
                        for g in &cd.gates {
                            self.apply_gate(g, &mut mem.op);
                        }
                    }
                    mem
                })
                .collect()),
            DynCircuit::Branch(b) => {
                let measured = self.measure(&b.measure.qubits, &b.measure.bits, members)?;
                let mut out = Vec::new();
                for mem in measured {
                    let j = Self::value_of(&mem.record, &b.measure.bits);
                    let i = b.dispatch.eval(j) as usize;
                    out.extend(self.run(&b.branches[i], vec![mem])?);
                    if out.len() > MAX_MEMBERS {
                        return Err(OracleError::TooManyMembers);
                    }
                }
                Ok(out)
            }
            DynCircuit::Seq(parts) => {
                let mut cur = members;
                for p in parts {
                    cur = self.run(p, cur)?;
                }
                Ok(cur)
            }
        }
    }
}

fn guard(n: usize) -> Result<(), OracleError> {
    if n > MAX_QUBITS {
        Err(OracleError::TooManyQubits(n))
    } else {
        Ok(())
    }
}

/// Ensemble of operators of `c` on the register `qubits` (`qubits[0]` is
/// the most significant bit of a basis index).
pub fn semantics(c: &DynCircuit, qubits: &[String]) -> Result<Vec<Member>, OracleError> {
    guard(qubits.len())?;
    let dim = 1usize << qubits.len();
    let sim = Sim {
        qubits,
        prune: false,
    };
    sim.run(
        c,
        vec![Member {
            record: Vec::new(),
            op: DMatrix::identity(dim, dim),
        }],
    )
}

/// `Σ F†F` over an ensemble of square operators.
pub fn completeness(members: &[Member]) -> DMatrix<Complex64> {
    let dim = members.first().map_or(1, |m| m.op.nrows());
    members.iter().fold(DMatrix::zeros(dim, dim), |acc, m| {
        acc + m.op.adjoint() * &m.op
    })
}

fn basis_value(qubits: &[String], assign: &BTreeMap<&str, u8>) -> usize {
    qubits.iter().fold(0usize, |acc, q| {
        (acc << 1) | usize::from(assign.get(q.as_str()).copied().unwrap_or(0))
    })
}

/// Columns `|a⟩_inputs ⊗ init` for every basis value `a` of `ins`.
fn input_columns(spec: &CircuitSpec, ins: &[String]) -> DMatrix<Complex64> {
    let n = spec.qubits.len();
    let k = ins.len();
    let mut cols = DMatrix::zeros(1usize << n, 1usize << k);
    let fixed: Vec<(&String, [f64; 2])> = spec
        .qubits
        .iter()
        .filter(|q| !ins.contains(q))
        .map(|q| (q, spec.init_of(q).map_or([1.0, 0.0], |s| s.amplitudes())))
        .collect();
    for a in 0..1usize << k {
        for f in 0..1usize << fixed.len() {
            let mut assign = BTreeMap::new();
            let mut amp = 1.0;
            for (j, q) in ins.iter().enumerate() {
                assign.insert(q.as_str(), ((a >> (k - 1 - j)) & 1) as u8);
            }
            for (j, (q, amps)) in fixed.iter().enumerate() {
                let bit = ((f >> (fixed.len() - 1 - j)) & 1) as u8;
                amp *= amps[bit as usize];
                assign.insert(q.as_str(), bit);
            }
            if amp != 0.0 {
                cols[(basis_value(&spec.qubits, &assign), a)] += Complex64::new(amp, 0.0);
            }
        }
    }
    cols
}

fn run_on_inputs(spec: &CircuitSpec, ins: &[String]) -> Result<Vec<Member>, OracleError> {
    guard(spec.qubits.len())?;
    let sim = Sim {
        qubits: &spec.qubits,
        prune: true,
    };
    sim.run(
        &spec.circuit,
        vec![Member {
            record: Vec::new(),
            op: input_columns(spec, ins),
        }],
    )
}

/// Probability of every output-bit string (`output_bits[0]` most
/// significant).
pub fn outcome_distribution(spec: &CircuitSpec) -> Result<Vec<f64>, OracleError> {
    if spec.output_bits.is_empty() || !spec.inputs.is_empty() {
        return Err(OracleError::NotMMode);
    }
    let members = run_on_inputs(spec, &[])?;
    let mut p = vec![0.0; 1usize << spec.output_bits.len()];
    for mem in members {
        let s = Sim::value_of(&mem.record, &spec.output_bits) as usize;
        p[s] += mem.op.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    Ok(p)
}

/// Choi matrix `Σ_{a,b} |a⟩⟨b| ⊗ E(|a⟩⟨b|)` of one member's map from the
/// `ins` qubits to the `outs` qubits, tracing out the rest.
fn member_choi(
    spec: &CircuitSpec,
    op: &DMatrix<Complex64>,
    ins: &[String],
    outs: &[String],
) -> DMatrix<Complex64> {
    let n = spec.qubits.len();
    let kin = ins.len();
    let kout = outs.len();
    let rest: Vec<&String> = spec.qubits.iter().filter(|q| !outs.contains(q)).collect();
    let shift = |q: &str| n - 1 - spec.qubits.iter().position(|x| x == q).expect("qubit");
    let dim = 1usize << (kin + kout);
    let mut j = DMatrix::zeros(dim, dim);
    for d in 0..1usize << rest.len() {
        let mut u = nalgebra::DVector::<Complex64>::zeros(dim);
        for a in 0..1usize << kin {
            for o in 0..1usize << kout {
                let mut row = 0usize;
                for (i, q) in outs.iter().enumerate() {
                    row |= ((o >> (kout - 1 - i)) & 1) << shift(q);
                }
                for (i, q) in rest.iter().enumerate() {
                    row |= ((d >> (rest.len() - 1 - i)) & 1) << shift(q);
                }
                u[(a << kout) | o] = op[(row, a)];
            }
        }
        j += &u * u.adjoint();
    }
    j
}

/// Choi matrix of the spec's channel from its principal inputs to its
/// principal outputs.
pub fn superoperator(spec: &CircuitSpec) -> Result<DMatrix<Complex64>, OracleError> {
    choi_with(spec, &spec.inputs, &spec.outputs)
}

/// As `superoperator` with explicit input and output qubit orders.
pub fn choi_with(
    spec: &CircuitSpec,
    ins: &[String],
    outs: &[String],
) -> Result<DMatrix<Complex64>, OracleError> {
    let members = run_on_inputs(spec, ins)?;
    let dim = 1usize << (ins.len() + outs.len());
    Ok(members.iter().fold(DMatrix::zeros(dim, dim), |acc, m| {
        acc + member_choi(spec, &m.op, ins, outs)
    }))
}

/// Choi matrix of every reachable outcome branch.
pub fn branch_chois(
    spec: &CircuitSpec,
    ins: &[String],
    outs: &[String],
) -> Result<Vec<(OutcomeRecord, DMatrix<Complex64>)>, OracleError> {
    let members = run_on_inputs(spec, ins)?;
    let mut by_record: BTreeMap<OutcomeRecord, DMatrix<Complex64>> = BTreeMap::new();
    for m in &members {
        let c = member_choi(spec, &m.op, ins, outs);
        by_record
            .entry(m.record.clone())
            .and_modify(|acc| *acc += &c)
            .or_insert(c);
    }
    Ok(by_record
        .into_iter()
        .filter(|(_, c)| c.trace().re >= ZERO_BRANCH)
        .collect())
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn oracle_m_eq(a: &CircuitSpec, b: &CircuitSpec) -> Result<bool, OracleError> {
    if a.output_bits.len() != b.output_bits.len() {
        return Err(OracleError::Incompatible("output bit counts differ".into()));
    }
    let pa = outcome_distribution(a)?;
    let pb = outcome_distribution(b)?;
    Ok(pa.iter().zip(&pb).all(|(x, y)| (x - y).abs() <= ORACLE_TOL))
}

fn same_designation(a: &CircuitSpec, b: &CircuitSpec) -> Result<(), OracleError> {
    let sorted = |v: &[String]| {
        let mut v = v.to_vec();
        v.sort();
        v
    };
    if sorted(&a.inputs) != sorted(&b.inputs) || sorted(&a.outputs) != sorted(&b.outputs) {
        return Err(OracleError::Incompatible(
            "principal inputs or outputs differ".into(),
        ));
    }
    Ok(())
}

/// Every reachable branch map is a multiple of one channel, and the two
/// circuits share that channel.
pub fn oracle_q_eq(a: &CircuitSpec, b: &CircuitSpec) -> Result<bool, OracleError> {
    same_designation(a, b)?;
    let (ins, outs) = (&a.inputs, &a.outputs);
    let scale = (1usize << ins.len()) as f64;
    let mut common: Option<DMatrix<Complex64>> = None;
    for spec in [a, b] {
        for (_, c) in branch_chois(spec, ins, outs)? {
            let normalized = &c * Complex64::new(scale / c.trace().re, 0.0);
            match &common {
                None => common = Some(normalized),
                Some(r) => {
                    if max_diff(r, &normalized) > ORACLE_TOL {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Equality of the summed channels.
pub fn oracle_full_eq(a: &CircuitSpec, b: &CircuitSpec) -> Result<bool, OracleError> {
    same_designation(a, b)?;
    let ja = choi_with(a, &a.inputs, &a.outputs)?;
    let jb = choi_with(b, &a.inputs, &a.outputs)?;
    Ok(max_diff(&ja, &jb) <= ORACLE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;
    use crate::circuit::{gates_unitary, BranchStep, InitState, MeasureStep};
    use crate::logic::BoolFunc;

    fn g(name: &str, qs: &[&str]) -> Gate {
        Gate::new(name, &[], qs).unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| (*s).to_owned()).collect()
    }

    fn is_identity(m: &DMatrix<Complex64>) -> bool {
        max_diff(m, &DMatrix::identity(m.nrows(), m.ncols())) < 1e-9
    }

    #[test]
    fn conventional_circuit_is_its_unitary() {
        let gates = vec![g("h", &["a"]), g("cx", &["a", "b"])];
        let reg = names(&["a", "b"]);
        let ens = semantics(&DynCircuit::Gates(gates.clone()), &reg).unwrap();
        assert_eq!(ens.len(), 1);
        let u = gates_unitary(&gates, &reg);
        let expect = DMatrix::from_row_slice(4, 4, &u);
        assert!(max_diff(&ens[0].op, &expect) < 1e-12);
    }

    #[test]
    fn teleport_ensemble_is_complete() {
        let t = bench::teleport();
        let ens = semantics(&t.circuit, &t.qubits).unwrap();
        assert_eq!(ens.len(), 4);
        assert!(is_identity(&completeness(&ens)));
    }

    #[test]
    fn collapsing_dispatch_counts_members() {
        // f maps all four outcomes to branch 0 except 11 -> branch 1, and
        // branch 1 measures another qubit
        let c = DynCircuit::Branch(BranchStep {
            measure: MeasureStep::new(&["a", "b"], &["x", "y"]),
            dispatch: BoolFunc::and(2),
            branches: vec![
                DynCircuit::empty(),
                DynCircuit::Measure(MeasureStep::new(&["c"], &["z"])),
            ],
        });
        let ens = semantics(&c, &names(&["a", "b", "c"])).unwrap();
        assert_eq!(ens.len(), 3 + 2);
        assert!(is_identity(&completeness(&ens)));
    }

    #[test]
    fn teleport_channel_is_identity() {
        let t = bench::teleport();
        let j = superoperator(&t).unwrap();
        let mut id = DMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            id[(r, c)] = Complex64::new(1.0, 0.0);
        }
        assert!(max_diff(&j, &id) < 1e-10);
        assert!(max_diff(&j, &superoperator(&bench::swap_teleport()).unwrap()) < 1e-10);
    }

    #[test]
    fn unitary_spec_channel() {
        let s = CircuitSpec {
            qubits: names(&["q"]),
            circuit: DynCircuit::gate(g("h", &["q"])),
            fixed_init: vec![],
            inputs: names(&["q"]),
            outputs: names(&["q"]),
            output_bits: vec![],
        };
        let j = superoperator(&s).unwrap();
        // vec(H) vec(H)†
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = [h, h, h, -h];
        for r in 0..4 {
            for c in 0..4 {
                assert!((j[(r, c)].re - v[r] * v[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measuring_plus_is_fair() {
        let s = CircuitSpec {
            qubits: names(&["q"]),
            circuit: DynCircuit::Measure(MeasureStep::new(&["q"], &["c"])),
            fixed_init: vec![("q".into(), InitState::Plus)],
            inputs: vec![],
            outputs: vec![],
            output_bits: names(&["c"]),
        };
        let p = outcome_distribution(&s).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dynamic_pe_reads_phase_digits() {
        let p = outcome_distribution(&bench::dyn_pe(2, 0.25).unwrap()).unwrap();
        assert!((p[0b01] - 1.0).abs() < 1e-9, "{p:?}");
        let p = outcome_distribution(&bench::pe(2, 0.0).unwrap()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-9);
        let a = bench::pe(4, 0.3125).unwrap();
        let b = bench::dyn_pe(4, 0.3125).unwrap();
        assert!(oracle_m_eq(&a, &b).unwrap());
        let p = outcome_distribution(&a).unwrap();
        assert!((p[0b0101] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn self_comparison_holds_in_all_modes() {
        let t = bench::teleport();
        assert!(oracle_q_eq(&t, &t).unwrap());
        assert!(oracle_full_eq(&t, &t).unwrap());
        let q = bench::dyn_qft(3).unwrap();
        assert!(oracle_m_eq(&q, &q).unwrap());
    }

    #[test]
    fn teleport_without_x_correction_differs() {
        let mut t = bench::teleport();
        t.circuit.visit_mut(&mut |c| {
            if let DynCircuit::Branch(b) = c {
                b.branches[1] = DynCircuit::empty();
                b.branches[3] = DynCircuit::gate(g("z", &["q2"]));
            }
        });
        assert!(!oracle_q_eq(&t, &bench::swap_teleport()).unwrap());
    }

    #[test]
    fn guards() {
        let qs: Vec<String> = (0..13).map(|i| format!("q{i}")).collect();
        assert_eq!(
            semantics(&DynCircuit::empty(), &qs).unwrap_err(),
            OracleError::TooManyQubits(13)
        );
        assert_eq!(
            outcome_distribution(&bench::teleport()).unwrap_err(),
            OracleError::NotMMode
        );
    }
}
