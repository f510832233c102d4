//! Circuits as tensor networks: index assignment, measurement and
//! classically controlled gate tensors, and contraction under a plan.

mod network;

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{CircuitSpec, Gate, InitState, Mode};
use crate::logic::{func_to_tensor_multi, LogicError};
use crate::tdd::{IndexId, IndexKind, Level, Manager, Tdd, TddError};

pub use network::{build_network, Naming, Network, Sym};
use network::{Payload, Subnet, TensorDesc};

/// Default bound on the number of open indices of any intermediate tensor.
pub const DEFAULT_MAX_OPEN: usize = 26;

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("intermediate tensor has {rank} open indices, above the limit of {limit}")]
    RankLimit { rank: usize, limit: usize },
    #[error("index order conflict: {0}")]
    Order(String),
    #[error(transparent)]
    Tdd(#[from] TddError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// How the tensors of a circuit are grouped and ordered for contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    Sequential,
    PerQubit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPlan {
    pub mode: PlanMode,
    /// Top-level tensor positions; each group is contracted on its own,
    /// then the group results are contracted in order.
    pub groups: Vec<Vec<usize>>,
    /// Owning qubit rank of each group.
    pub group_qubits: Vec<usize>,
}

/// Gates in circuit order, as one group.
pub fn plan_sequential(net: &Network) -> ContractionPlan {
    ContractionPlan {
        mode: PlanMode::Sequential,
        groups: vec![(0..net.tensor_count()).collect()],
        group_qubits: vec![0],
    }
}

/// One group per qubit holding the tensors whose smallest-rank qubit it
/// is, emitted in qubit order.
pub fn plan_per_qubit(net: &Network) -> ContractionPlan {
    let mut by_owner: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, o) in net.owners().into_iter().enumerate() {
        by_owner.entry(o).or_default().push(i);
    }
    ContractionPlan {
        mode: PlanMode::PerQubit,
        group_qubits: by_owner.keys().copied().collect(),
        groups: by_owner.into_values().collect(),
    }
}

/// Node statistics of one compilation.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CompileStats {
    pub final_nodes: usize,
    /// Largest node count among all tensors built along the way.
    pub max_nodes: usize,
    pub tdd_time: f64,
}

impl CompileStats {
    pub fn merge(&mut self, other: &CompileStats) {
        self.max_nodes = self.max_nodes.max(other.max_nodes);
        self.tdd_time += other.tdd_time;
    }
}

/// A compiled circuit in some manager.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub tdd: Tdd,
    /// Indices the equivalence checks split on, top first.
    pub peel: Vec<IndexId>,
    pub stats: CompileStats,
}

/// One group result of a per-qubit plan.
#[derive(Clone, Debug)]
pub struct Partition {
    pub qubit: usize,
    pub tdd: Tdd,
    /// Open indices shared with tensors of other groups.
    pub cut: Vec<IndexId>,
}

/// Assigns levels for all networks in `m` so that they share one order.
pub fn assign_levels(
    m: &mut Manager,
    nets: &[&Network],
) -> Result<Vec<HashMap<Sym, IndexId>>, EncodeError> {
    let mut all: BTreeMap<String, (network::SortKey, IndexKind)> = BTreeMap::new();
    for net in nets {
        for s in net.live_syms() {
            let info = &net.syms[s.0];
            match all.get(&info.name) {
                Some((k, _)) if *k != info.key => {
                    return Err(EncodeError::Order(format!(
                        "index `{}` placed inconsistently",
                        info.name
                    )))
                }
                Some(_) => {}
                None => {
                    all.insert(info.name.clone(), (info.key.clone(), info.kind));
                }
            }
        }
    }
    let mut ordered: Vec<(&String, &(network::SortKey, IndexKind))> = all.iter().collect();
    ordered.sort_by(|a, b| a.1 .0.cmp(&b.1 .0));
    let n = ordered.len() as u64;
    let mut ids = HashMap::new();
    for (pos, (name, (_, kind))) in ordered.into_iter().enumerate() {
        let id = m.index_at(name, *kind, n - pos as u64)?;
        ids.insert(name.clone(), id);
    }
    Ok(nets
        .iter()
        .map(|net| {
            (0..net.syms.len())
                .map(|i| {
                    let s = Sym(i);
                    (s, ids[&net.info(s).name].clone())
                })
                .collect()
        })
        .collect())
}

fn amplitudes(state: InitState) -> [Complex64; 2] {
    let a = state.amplitudes();
    [Complex64::new(a[0], 0.0), Complex64::new(a[1], 0.0)]
}

/// COPY tensor over the measured wire: rank 3 `φ(c, x, y)` when the outcome
/// index `c` is kept, otherwise the rank 2 identity over `(x, y)`.
pub fn measurement_tensor(
    m: &mut Manager,
    c: Option<&IndexId>,
    x: &IndexId,
    y: &IndexId,
) -> Result<Tdd, TddError> {
    let mut idx = Vec::new();
    if let Some(c) = c {
        idx.push(c.clone());
    }
    idx.push(x.clone());
    idx.push(y.clone());
    copy_tensor(m, &idx)
}

/// `from_fn` over a list that may name one index several times; repeated
/// positions always carry the same value.
fn from_fn_shared<F>(m: &mut Manager, idx: &[IndexId], f: F) -> Result<Tdd, TddError>
where
    F: Fn(&[u8]) -> Complex64,
{
    let mut uniq: Vec<IndexId> = Vec::new();
    let slot: Vec<usize> = idx
        .iter()
        .map(|i| match uniq.iter().position(|u| u == i) {
            Some(k) => k,
            None => {
                uniq.push(i.clone());
                uniq.len() - 1
            }
        })
        .collect();
    if uniq.len() == idx.len() {
        return m.from_fn(idx, f);
    }
    m.from_fn(&uniq, |bits| {
        let full: Vec<u8> = slot.iter().map(|&k| bits[k]).collect();
        f(&full)
    })
}

fn copy_tensor(m: &mut Manager, idx: &[IndexId]) -> Result<Tdd, TddError> {
    m.from_fn(idx, |bits| {
        if bits.iter().all(|&b| b == bits[0]) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `ψ(c, x̄, ȳ)`: the identity when `c = 0` and the gate when `c = 1`.
/// `ins`/`outs` are the gate's input and output wires in qubit order; a
/// qubit on which the gate is diagonal may use one index for both.
pub fn controlled_gate_tensor(
    m: &mut Manager,
    gate: &Gate,
    c: &IndexId,
    ins: &[IndexId],
    outs: &[IndexId],
) -> Result<Tdd, TddError> {
    let k = ins.len();
    let mut idx = vec![c.clone()];
    idx.extend_from_slice(ins);
    idx.extend_from_slice(outs);
    from_fn_shared(m, &idx, |bits| {
        let col = bits[1..=k]
            .iter()
            .fold(0usize, |a, &b| (a << 1) | b as usize);
        let row = bits[k + 1..]
            .iter()
            .fold(0usize, |a, &b| (a << 1) | b as usize);
        if bits[0] == 1 {
            gate.entry(row, col)
        } else if row == col {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Plain gate tensor `U(x̄ → ȳ)`.
pub fn gate_tensor(
    m: &mut Manager,
    gate: &Gate,
    ins: &[IndexId],
    outs: &[IndexId],
) -> Result<Tdd, TddError> {
    let k = ins.len();
    let mut idx = ins.to_vec();
    idx.extend_from_slice(outs);
    from_fn_shared(m, &idx, |bits| {
        let col = bits[..k].iter().fold(0usize, |a, &b| (a << 1) | b as usize);
        let row = bits[k..].iter().fold(0usize, |a, &b| (a << 1) | b as usize);
        gate.entry(row, col)
    })
}

/// Turns a network into TDDs and contracts it.
pub struct Materializer<'n> {
    net: &'n Network,
    ids: HashMap<Sym, IndexId>,
    /// `(open, scope)` of every index by level.
    by_level: HashMap<Level, (bool, usize)>,
    max_open: usize,
    pub stats: CompileStats,
}

impl<'n> Materializer<'n> {
    pub fn new(net: &'n Network, ids: HashMap<Sym, IndexId>) -> Self {
        let by_level = ids
            .iter()
            .map(|(s, i)| {
                let info = net.info(*s);
                (i.level(), (info.open, info.scope))
            })
            .collect();
        Materializer {
            net,
            ids,
            by_level,
            max_open: DEFAULT_MAX_OPEN,
            stats: CompileStats::default(),
        }
    }

    pub fn with_max_open(mut self, max_open: usize) -> Self {
        self.max_open = max_open;
        self
    }

    fn id(&self, s: Sym) -> IndexId {
        self.ids[&s].clone()
    }

    fn ids_of(&self, ss: &[Sym]) -> Vec<IndexId> {
        ss.iter().map(|&s| self.id(s)).collect()
    }

    fn summable(&self, i: &IndexId, scope: usize) -> bool {
        let (open, s) = self.by_level[&i.level()];
        !open && s == scope
    }

    fn observe(&mut self, m: &Manager, t: &Tdd) -> Result<(), EncodeError> {
        self.stats.max_nodes = self.stats.max_nodes.max(m.node_count(t));
        if t.rank() > self.max_open {
            return Err(EncodeError::RankLimit {
                rank: t.rank(),
                limit: self.max_open,
            });
        }
        Ok(())
    }

    fn tensor(&mut self, m: &mut Manager, t: &TensorDesc) -> Result<Tdd, EncodeError> {
        let out = match &t.payload {
            Payload::Gate { gate, ins, outs } => {
                gate_tensor(m, gate, &self.ids_of(ins), &self.ids_of(outs))?
            }
            Payload::Controlled {
                gate,
                ctrl,
                ins,
                outs,
            } => controlled_gate_tensor(
                m,
                gate,
                &self.id(*ctrl),
                &self.ids_of(ins),
                &self.ids_of(outs),
            )?,
            Payload::Copy(ss) => copy_tensor(m, &self.ids_of(ss))?,
            Payload::Init { wire, state } => {
                m.from_dense(&amplitudes(*state), &[self.id(*wire)])?
            }
            Payload::Logic {
                func,
                inputs,
                outputs,
            } => func_to_tensor_multi(m, func, &self.ids_of(inputs), &self.ids_of(outputs))?,
            Payload::Block { selector, branches } => self.block(m, selector, branches)?,
        };
        self.observe(m, &out)?;
        Ok(out)
    }

    fn block(
        &mut self,
        m: &mut Manager,
        selector: &[Sym],
        branches: &[Subnet],
    ) -> Result<Tdd, EncodeError> {
        let sel = self.ids_of(selector);
        let mut acc: Option<Tdd> = None;
        for (i, sub) in branches.iter().enumerate() {
            let parts = sub
                .tensors
                .iter()
                .map(|t| self.tensor(m, t))
                .collect::<Result<Vec<_>, _>>()?;
            let body = self.contract_parts(m, &parts, sub.scope)?;
            let t = sel.len();
            let pick = m.from_fn(&sel, |bits| {
                let v = bits.iter().fold(0usize, |a, &b| (a << 1) | b as usize);
                if v == i && t < 64 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })?;
            let term = m.contract(&body, &pick, &[]);
            acc = Some(match acc {
                None => term,
                Some(a) => m.add(&a, &term),
            });
        }
        Ok(acc.unwrap_or_else(|| m.constant(Complex64::new(1.0, 0.0))))
    }

    /// Contracts `parts` in order, summing an index of `scope` once no later
    /// part carries it.
    fn contract_parts(
        &mut self,
        m: &mut Manager,
        parts: &[Tdd],
        scope: usize,
    ) -> Result<Tdd, EncodeError> {
        self.contract_with(m, parts, |me, i| me.summable(i, scope))
    }

    fn contract_with(
        &mut self,
        m: &mut Manager,
        parts: &[Tdd],
        sum: impl Fn(&Self, &IndexId) -> bool,
    ) -> Result<Tdd, EncodeError> {
        let mut last = HashMap::new();
        for (k, p) in parts.iter().enumerate() {
            for i in p.indices() {
                last.insert(i.level(), k);
            }
        }
        let mut acc = m.constant(Complex64::new(1.0, 0.0));
        for (k, p) in parts.iter().enumerate() {
            let mut done: Vec<IndexId> = Vec::new();
            for i in acc.indices().iter().chain(p.indices()) {
                if last[&i.level()] == k && sum(self, i) && !done.contains(i) {
                    done.push(i.clone());
                }
            }
            acc = m.contract(&acc, p, &done);
            self.observe(m, &acc)?;
        }
        Ok(acc)
    }

    /// Contracts every group of `plan` and returns the group results.
    pub fn partitions(
        &mut self,
        m: &mut Manager,
        plan: &ContractionPlan,
    ) -> Result<Vec<Partition>, EncodeError> {
        let start = Instant::now();
        let tensors = &self.net.root.tensors;
        let mut group_of = HashMap::new();
        let mut built: Vec<Vec<Tdd>> = Vec::new();
        for (g, group) in plan.groups.iter().enumerate() {
            let mut parts = Vec::new();
            for &t in group {
                let tdd = self.tensor(m, &tensors[t])?;
                for i in tdd.indices() {
                    group_of.entry(i.level()).or_insert_with(Vec::new).push(g);
                }
                parts.push(tdd);
            }
            built.push(parts);
        }
        let mut out = Vec::new();
        for (g, parts) in built.iter().enumerate() {
            let local = |i: &IndexId| group_of[&i.level()].iter().all(|&h| h == g);
            let tdd = self.contract_with(m, parts, |me, i| me.summable(i, 0) && local(i))?;
            let cut = tdd
                .indices()
                .iter()
                .filter(|i| !local(i))
                .cloned()
                .collect();
            out.push(Partition {
                qubit: plan.group_qubits[g],
                tdd,
                cut,
            });
        }
        self.stats.tdd_time += start.elapsed().as_secs_f64();
        Ok(out)
    }

    /// Contracts group results in order, summing internal indices once
    /// every carrier has been included.
    pub fn assemble(&mut self, m: &mut Manager, parts: &[Tdd]) -> Result<Tdd, EncodeError> {
        self.assemble_keeping(m, parts, &[])
    }

    /// As `assemble`, leaving the indices at `keep` open (they are shared
    /// with group results left out of `parts`).
    pub fn assemble_keeping(
        &mut self,
        m: &mut Manager,
        parts: &[Tdd],
        keep: &[Level],
    ) -> Result<Tdd, EncodeError> {
        let start = Instant::now();
        let t = self.contract_with(m, parts, |me, i| {
            me.summable(i, 0) && !keep.contains(&i.level())
        })?;
        self.stats.final_nodes = m.node_count(&t);
        self.stats.tdd_time += start.elapsed().as_secs_f64();
        Ok(t)
    }

    /// Open indices to split on, top first.
    pub fn peel(&self) -> Vec<IndexId> {
        let mut out: Vec<IndexId> = self
            .net
            .live_syms()
            .filter(|s| self.net.syms[s.0].peel)
            .map(|s| self.id(s))
            .collect();
        out.sort_by_key(|i| std::cmp::Reverse(i.level()));
        out
    }

    /// Contracts the whole network under `plan`.
    pub fn compile(
        &mut self,
        m: &mut Manager,
        plan: &ContractionPlan,
    ) -> Result<Compiled, EncodeError> {
        let parts = self.partitions(m, plan)?;
        let tdds: Vec<Tdd> = parts.into_iter().map(|p| p.tdd).collect();
        let tdd = self.assemble(m, &tdds)?;
        Ok(Compiled {
            tdd,
            peel: self.peel(),
            stats: self.stats.clone(),
        })
    }
}

/// Compiles one validated spec in its own manager.
pub fn compile(
    spec: &CircuitSpec,
    mode: Mode,
    plan: PlanMode,
) -> Result<(Manager, Compiled), EncodeError> {
    let mut m = Manager::new();
    let net = build_network(spec, mode, &Naming::single(spec));
    let ids = assign_levels(&mut m, &[&net])?.pop().expect("one network");
    let plan = match plan {
        PlanMode::Sequential => plan_sequential(&net),
        PlanMode::PerQubit => plan_per_qubit(&net),
    };
    let compiled = Materializer::new(&net, ids).compile(&mut m, &plan)?;
    Ok((m, compiled))
}

/// The spec's gates as one unitary with every qubit open on both sides.
/// Measurements are dropped; classically controlled steps are not allowed.
pub fn unitary_spec(spec: &CircuitSpec) -> Option<CircuitSpec> {
    use crate::circuit::DynCircuit;
    let mut gates = Vec::new();
    let mut ok = true;
    spec.circuit.visit(&mut |c| match c {
        DynCircuit::Gates(gs) => gates.extend(gs.iter().cloned()),
        DynCircuit::Conditional(_) | DynCircuit::Branch(_) => ok = false,
        _ => {}
    });
    ok.then(|| CircuitSpec {
        qubits: spec.qubits.clone(),
        circuit: DynCircuit::Gates(gates),
        fixed_init: Vec::new(),
        inputs: spec.qubits.clone(),
        outputs: spec.qubits.clone(),
        output_bits: Vec::new(),
    })
}

/// Node count of the TDD of a conventional circuit's unitary, or `None`
/// when the circuit has classically controlled steps.
pub fn representation_nodes(spec: &CircuitSpec) -> Result<Option<usize>, EncodeError> {
    let Some(u) = unitary_spec(spec) else {
        return Ok(None);
    };
    let (m, c) = compile(&u, Mode::Q, PlanMode::Sequential)?;
    Ok(Some(m.node_count(&c.tdd)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{dyn_pe, dyn_qft, qft, teleport};
    use crate::circuit::{CircuitSpec, DynCircuit, Gate, MeasureStep};

    fn open_spec(qs: &[&str], circuit: DynCircuit) -> CircuitSpec {
        let qubits: Vec<String> = qs.iter().map(|q| (*q).to_owned()).collect();
        CircuitSpec {
            qubits: qubits.clone(),
            circuit,
            fixed_init: vec![],
            inputs: qubits.clone(),
            outputs: qubits,
            output_bits: vec![],
        }
    }

    /// Dense values over `names`, first name most significant.
    fn dense(m: &Manager, t: &Tdd, names: &[&str]) -> Vec<Complex64> {
        let order: Vec<IndexId> = names.iter().map(|n| m.lookup(n).unwrap().clone()).collect();
        m.to_dense_in(t, &order).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn single_gates_match_their_matrices() {
        for (name, qs) in [("cx", vec!["a", "b"]), ("sdg", vec!["a"]), ("h", vec!["a"])] {
            let g = Gate::new(name, &[], &qs).unwrap();
            let spec = open_spec(&qs, DynCircuit::gate(g.clone()));
            let (m, c) = compile(&spec, Mode::Q, PlanMode::Sequential).unwrap();
            let mut names: Vec<String> = qs.iter().map(|q| (*q).to_owned()).collect();
            names.extend(qs.iter().map(|q| format!("{q}'")));
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let got = dense(&m, &c.tdd, &names);
            let d = g.dim();
            // layout: inputs then outputs, so entry (out, in) sits at in * d + out
            let want: Vec<Complex64> = (0..d * d).map(|k| g.entry(k % d, k / d)).collect();
            assert!(close(&got, &want), "{name}");
        }
    }

    #[test]
    fn empty_circuit_is_identity() {
        let spec = open_spec(&["a"], DynCircuit::empty());
        let (m, c) = compile(&spec, Mode::Q, PlanMode::PerQubit).unwrap();
        let got = dense(&m, &c.tdd, &["a", "a'"]);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert!(close(&got, &[one, zero, zero, one]));
    }

    #[test]
    fn unitary_qft_node_counts() {
        for n in 2..=6 {
            let nodes = representation_nodes(&qft(n).unwrap()).unwrap();
            assert_eq!(nodes, Some((1 << (n + 1)) - 1), "qft_{n}");
        }
        assert_eq!(representation_nodes(&dyn_qft(3).unwrap()).unwrap(), None);
    }

    #[test]
    fn plans_compile_to_the_same_tensor() {
        for spec in [
            qft(4).unwrap(),
            dyn_qft(4).unwrap(),
            dyn_pe(3, 0.375).unwrap(),
        ] {
            let (ma, a) = compile(&spec, Mode::M, PlanMode::Sequential).unwrap();
            let (mb, b) = compile(&spec, Mode::M, PlanMode::PerQubit).unwrap();
            let names: Vec<String> = a
                .tdd
                .indices()
                .iter()
                .map(|i| i.name().to_owned())
                .collect();
            let bnames: Vec<String> = b
                .tdd
                .indices()
                .iter()
                .map(|i| i.name().to_owned())
                .collect();
            assert_eq!(names, bnames);
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            assert!(close(
                &dense(&ma, &a.tdd, &names),
                &dense(&mb, &b.tdd, &names)
            ));
            assert!(b.stats.max_nodes <= a.stats.max_nodes);
        }
    }

    #[test]
    fn trailing_measurement_shares_the_wire() {
        let circuit = DynCircuit::Seq(vec![
            DynCircuit::gate(Gate::new("h", &[], &["q"]).unwrap()),
            DynCircuit::Measure(MeasureStep::new(&["q"], &["c"])),
        ]);
        let spec = CircuitSpec {
            qubits: vec!["q".into()],
            circuit,
            fixed_init: vec![],
            inputs: vec![],
            outputs: vec![],
            output_bits: vec!["c".into()],
        };
        let (m, c) = compile(&spec, Mode::M, PlanMode::Sequential).unwrap();
        let names: Vec<&str> = c.tdd.indices().iter().map(|i| i.name()).collect();
        assert!(names.contains(&"c"));
        let order: Vec<IndexId> = c.tdd.indices().to_vec();
        let vals = m.to_dense_in(&c.tdd, &order).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // amplitude 1/sqrt(2) exactly where the bit and the final wire agree
        let nonzero: Vec<f64> = vals
            .iter()
            .filter(|v| v.norm() > 1e-12)
            .map(|v| v.re)
            .collect();
        assert_eq!(nonzero.len(), 2);
        assert!(nonzero.iter().all(|v| (v - h).abs() < 1e-12));
        assert_eq!(
            c.peel.iter().map(|i| i.name()).collect::<Vec<_>>(),
            vec!["c"]
        );
    }

    #[test]
    fn per_qubit_plan_groups_by_owner() {
        let spec = teleport();
        let net = build_network(&spec, Mode::Q, &Naming::single(&spec));
        let plan = plan_per_qubit(&net);
        assert_eq!(plan.group_qubits, vec![0, 1, 2]);
        let mut all: Vec<usize> = plan.groups.concat();
        all.sort_unstable();
        assert_eq!(all, (0..net.tensor_count()).collect::<Vec<_>>());
        assert_eq!(plan_sequential(&net).groups.len(), 1);
    }
}
