//! Decision procedures on compiled circuits: the norm-based m-equivalence
//! recursion, the node-set q-equivalence test, and the qubit-by-qubit
//! partitioned check with fallback to the basic one.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{CircuitSpec, Mode, Verdict, Witness};
use crate::encoding::{
    assign_levels, build_network, plan_per_qubit, plan_sequential, EncodeError, Materializer,
    Naming, Network, Partition, PlanMode, DEFAULT_MAX_OPEN,
};
use crate::tdd::{Edge, IndexId, Level, Manager, NodeId, Tdd};

/// Default tolerance on probability masses.
pub const DEFAULT_EPS: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("circuits cannot be compared: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub mode: Mode,
    pub plan: PlanMode,
    /// q-mode also compares the total branch weight of the two circuits.
    pub strict_q: bool,
    pub eps: f64,
    pub max_open: usize,
}

impl CheckConfig {
    pub fn new(mode: Mode, plan: PlanMode) -> Self {
        CheckConfig {
            mode,
            plan,
            strict_q: false,
            eps: DEFAULT_EPS,
            max_open: DEFAULT_MAX_OPEN,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckStats {
    /// Nodes of the final TDDs handed to the decision procedure, when the
    /// check got that far.
    pub final_nodes_a: Option<usize>,
    pub final_nodes_b: Option<usize>,
    pub max_nodes: usize,
    pub tdd_time: f64,
    pub total_time: f64,
    pub partitions: usize,
    pub discarded: usize,
    pub fell_back: bool,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub stats: CheckStats,
}

fn top_level(m: &Manager, e: Edge) -> Level {
    m.level(e.node)
}

fn abs_edge(e: Edge) -> Edge {
    e.with_weight(Complex64::new(e.weight.norm(), 0.0))
}

fn child(m: &Manager, e: Edge, bit: u8) -> Edge {
    let n = m.node(e.node);
    let c = if bit == 0 { n.low } else { n.high };
    c.with_weight(c.weight * e.weight)
}

struct MEq<'a> {
    m: &'a mut Manager,
    peel: BTreeMap<Level, String>,
    eps: f64,
    path: Vec<(String, u8)>,
    witness: Option<Witness>,
}

impl MEq<'_> {
    fn norm_of(&mut self, e: Edge, indices: &[IndexId]) -> f64 {
        let t = self.m.tdd_from_edge(e, indices.to_vec());
        self.m.norm(&t)
    }

    fn rec(&mut self, a: Edge, ia: &[IndexId], b: Edge, ib: &[IndexId]) -> bool {
        if self.m.identical_edges(a, b) {
            return true;
        }
        let x = top_level(self.m, a).max(top_level(self.m, b));
        let Some(name) = self.peel.get(&x).cloned() else {
            let (na, nb) = (self.norm_of(a, ia), self.norm_of(b, ib));
            let ok = (na - nb).abs() <= self.eps;
            if !ok && self.witness.is_none() {
                self.witness = Some(Witness {
                    outcome: self.path.clone(),
                    left: na,
                    right: nb,
                    detail: "outcome probabilities differ".into(),
                });
            }
            return ok;
        };
        let split = |m: &Manager, e: Edge| -> (Edge, Edge) {
            if top_level(m, e) == x {
                let w = abs_edge(e);
                (child(m, w, 0), child(m, w, 1))
            } else {
                (e, e)
            }
        };
        let (la, ha) = split(self.m, a);
        let (lb, hb) = split(self.m, b);
        let ia: Vec<IndexId> = ia.iter().filter(|i| i.level() != x).cloned().collect();
        let ib: Vec<IndexId> = ib.iter().filter(|i| i.level() != x).cloned().collect();
        self.path.push((name.clone(), 0));
        let lo = self.rec(la, &ia, lb, &ib);
        self.path.pop();
        self.path.push((name, 1));
        let hi = self.rec(ha, &ia, hb, &ib);
        self.path.pop();
        lo && hi
    }
}

/// m-equivalence of two compiled circuits whose measurement indices
/// `peel` sit above every other index. On failure the first outcome
/// prefix with differing probabilities is returned.
pub fn m_eq_witness(
    m: &mut Manager,
    a: &Tdd,
    b: &Tdd,
    peel: &[IndexId],
    eps: f64,
) -> Result<(), Witness> {
    let mut st = MEq {
        peel: peel
            .iter()
            .map(|i| (i.level(), i.name().to_owned()))
            .collect(),
        m,
        eps,
        path: Vec::new(),
        witness: None,
    };
    if st.rec(a.root(), a.indices(), b.root(), b.indices()) {
        Ok(())
    } else {
        Err(st.witness.expect("failure records a witness"))
    }
}

pub fn m_eq(m: &mut Manager, a: &Tdd, b: &Tdd, peel: &[IndexId], eps: f64) -> bool {
    m_eq_witness(m, a, b, peel, eps).is_ok()
}

/// Sub-diagram reached below the measurement indices along one outcome path.
#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: Vec<(String, u8)>,
    pub node: NodeId,
    /// Accumulated weight along the path, including the sub-diagram's
    /// own root weight.
    pub weight: Complex64,
}

/// Every nonzero branch below the measurement indices of `t`, in outcome
/// order.
pub fn get_branches(m: &Manager, t: &Tdd, peel: &[IndexId]) -> Vec<Branch> {
    let names: BTreeMap<Level, &str> = peel.iter().map(|i| (i.level(), i.name())).collect();
    let mut out = Vec::new();
    let mut path = Vec::new();
    fn rec(
        m: &Manager,
        e: Edge,
        names: &BTreeMap<Level, &str>,
        path: &mut Vec<(String, u8)>,
        out: &mut Vec<Branch>,
    ) {
        if m.is_zero(e.weight) {
            return;
        }
        let lvl = m.level(e.node);
        match names.get(&lvl) {
            Some(name) => {
                for bit in 0..2u8 {
                    path.push(((*name).to_owned(), bit));
                    rec(m, child(m, e, bit), names, path, out);
                    path.pop();
                }
            }
            None => out.push(Branch {
                outcome: path.clone(),
                node: e.node,
                weight: e.weight,
            }),
        }
    }
    rec(m, t.root(), &names, &mut path, &mut out);
    out
}

/// The node set of the q-equivalence test.
pub fn get_nodes(m: &Manager, t: &Tdd, peel: &[IndexId]) -> BTreeSet<NodeId> {
    get_branches(m, t, peel)
        .into_iter()
        .map(|b| b.node)
        .collect()
}

/// q-equivalence by node identity below the measurement indices. With
/// `strict`, the total branch weights of both circuits must also agree.
pub fn q_eq_witness(
    m: &Manager,
    a: &Tdd,
    b: &Tdd,
    peel: &[IndexId],
    strict: bool,
    eps: f64,
) -> Result<(), Witness> {
    let ba = get_branches(m, a, peel);
    let bb = get_branches(m, b, peel);
    let Some(first) = ba.first().or(bb.first()) else {
        return Ok(());
    };
    let reference = first.node;
    for (side, list) in [("left", &ba), ("right", &bb)] {
        if let Some(bad) = list.iter().find(|x| x.node != reference) {
            return Err(Witness {
                outcome: bad.outcome.clone(),
                left: first.weight.norm_sqr(),
                right: bad.weight.norm_sqr(),
                detail: format!("{side} circuit leaves a different state on this outcome"),
            });
        }
    }
    if strict {
        let mass = |l: &[Branch]| l.iter().map(|x| x.weight.norm_sqr()).sum::<f64>();
        let (wa, wb) = (mass(&ba), mass(&bb));
        if (wa - wb).abs() > eps * wa.abs().max(wb.abs()).max(1.0) {
            return Err(Witness {
                outcome: Vec::new(),
                left: wa,
                right: wb,
                detail: "total branch weights differ".into(),
            });
        }
    }
    Ok(())
}

pub fn q_eq(m: &Manager, a: &Tdd, b: &Tdd, peel: &[IndexId]) -> bool {
    q_eq_witness(m, a, b, peel, false, 0.0).is_ok()
}

fn compatible(a: &CircuitSpec, b: &CircuitSpec, mode: Mode) -> Result<(), CheckError> {
    let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
    match mode {
        Mode::M => {
            if a.output_bits.is_empty() || b.output_bits.is_empty() {
                return Err(CheckError::Incompatible(
                    "m-mode needs output bits on both sides".into(),
                ));
            }
            if a.output_bits.len() != b.output_bits.len() {
                return Err(CheckError::Incompatible(format!(
                    "{} output bits against {}",
                    a.output_bits.len(),
                    b.output_bits.len()
                )));
            }
            if !a.inputs.is_empty() || !b.inputs.is_empty() {
                return Err(CheckError::Incompatible(
                    "m-mode needs fully fixed inputs".into(),
                ));
            }
        }
        Mode::Q => {
            if set(&a.inputs) != set(&b.inputs) {
                return Err(CheckError::Incompatible("principal inputs differ".into()));
            }
            if set(&a.outputs) != set(&b.outputs) {
                return Err(CheckError::Incompatible("principal outputs differ".into()));
            }
        }
    }
    Ok(())
}

/// Index naming for the two sides of a check: shared qubit order (the
/// first circuit's qubits, then the second's extras) and output bits named
/// after the first circuit.
pub fn pair_naming(a: &CircuitSpec, b: &CircuitSpec) -> (Naming, Naming) {
    let mut order = a.qubits.clone();
    for q in &b.qubits {
        if !order.contains(q) {
            order.push(q.clone());
        }
    }
    let na = Naming {
        tag: "a:".into(),
        output_bits: a.output_bits.clone(),
        qubit_order: order.clone(),
        circuit: 0,
    };
    let nb = Naming {
        tag: "b:".into(),
        output_bits: a.output_bits.clone(),
        qubit_order: order,
        circuit: 1,
    };
    (na, nb)
}

struct Side<'n> {
    mat: Materializer<'n>,
    net: &'n Network,
}

fn decide(m: &mut Manager, cfg: &CheckConfig, a: &Tdd, b: &Tdd, peel: &[IndexId]) -> Verdict {
    let r = match cfg.mode {
        Mode::M => m_eq_witness(m, a, b, peel, cfg.eps),
        Mode::Q => q_eq_witness(m, a, b, peel, cfg.strict_q, cfg.eps),
    };
    match r {
        Ok(()) => Verdict::Equivalent,
        Err(witness) => Verdict::NotEquivalent { witness },
    }
}

fn union_peel(pa: Vec<IndexId>, pb: Vec<IndexId>) -> Vec<IndexId> {
    let mut all: BTreeMap<Level, IndexId> = BTreeMap::new();
    for i in pa.into_iter().chain(pb) {
        all.insert(i.level(), i);
    }
    all.into_values().rev().collect()
}

/// Checks two validated specs for m- or q-equivalence.
pub fn check(
    a: &CircuitSpec,
    b: &CircuitSpec,
    cfg: &CheckConfig,
) -> Result<CheckOutcome, CheckError> {
    let start = Instant::now();
    compatible(a, b, cfg.mode)?;
    let mut m = Manager::new();
    let (naming_a, naming_b) = pair_naming(a, b);
    let net_a = build_network(a, cfg.mode, &naming_a);
    let net_b = build_network(b, cfg.mode, &naming_b);
    let mut ids = assign_levels(&mut m, &[&net_a, &net_b])?;
    let ids_b = ids.pop().expect("two networks");
    let ids_a = ids.pop().expect("two networks");
    let mut sa = Side {
        mat: Materializer::new(&net_a, ids_a).with_max_open(cfg.max_open),
        net: &net_a,
    };
    let mut sb = Side {
        mat: Materializer::new(&net_b, ids_b).with_max_open(cfg.max_open),
        net: &net_b,
    };
    let peel = union_peel(sa.mat.peel(), sb.mat.peel());
    let mut stats = CheckStats::default();
    let verdict = match cfg.plan {
        PlanMode::Sequential => basic(&mut m, cfg, &mut sa, &mut sb, &peel, &mut stats)?,
        PlanMode::PerQubit => partitioned(&mut m, cfg, &mut sa, &mut sb, &peel, &mut stats)?,
    };
    stats.max_nodes = sa.mat.stats.max_nodes.max(sb.mat.stats.max_nodes);
    stats.tdd_time = sa.mat.stats.tdd_time + sb.mat.stats.tdd_time;
    stats.total_time = start.elapsed().as_secs_f64();
    Ok(CheckOutcome { verdict, stats })
}

fn basic(
    m: &mut Manager,
    cfg: &CheckConfig,
    sa: &mut Side,
    sb: &mut Side,
    peel: &[IndexId],
    stats: &mut CheckStats,
) -> Result<Verdict, CheckError> {
    let ta = sa.mat.compile(m, &plan_sequential(sa.net))?.tdd;
    let tb = sb.mat.compile(m, &plan_sequential(sb.net))?.tdd;
    stats.final_nodes_a = Some(m.node_count(&ta));
    stats.final_nodes_b = Some(m.node_count(&tb));
    Ok(decide(m, cfg, &ta, &tb, peel))
}

fn has_any(t: &Tdd, levels: &BTreeSet<Level>) -> bool {
    t.indices().iter().any(|i| levels.contains(&i.level()))
}

fn partitioned(
    m: &mut Manager,
    cfg: &CheckConfig,
    sa: &mut Side,
    sb: &mut Side,
    peel: &[IndexId],
    stats: &mut CheckStats,
) -> Result<Verdict, CheckError> {
    let pa = sa.mat.partitions(m, &plan_per_qubit(sa.net))?;
    let pb = sb.mat.partitions(m, &plan_per_qubit(sb.net))?;
    let peel_levels: BTreeSet<Level> = peel.iter().map(|i| i.level()).collect();
    let by_qubit = |ps: &[Partition]| -> BTreeMap<usize, usize> {
        ps.iter().enumerate().map(|(k, p)| (p.qubit, k)).collect()
    };
    let (qa, qb) = (by_qubit(&pa), by_qubit(&pb));
    let qubits: BTreeSet<usize> = qa.keys().chain(qb.keys()).copied().collect();
    stats.partitions = qubits.len();
    let mut dropped_a = BTreeSet::new();
    let mut dropped_b = BTreeSet::new();
    let mut cut_levels: Vec<Level> = Vec::new();
    for q in &qubits {
        let (Some(&ka), Some(&kb)) = (qa.get(q), qb.get(q)) else {
            continue;
        };
        let (x, y) = (&pa[ka], &pb[kb]);
        let same =
            m.identical_edges(x.tdd.root(), y.tdd.root()) && x.tdd.indices() == y.tdd.indices();
        let free = cfg.mode == Mode::M || !has_any(&x.tdd, &peel_levels);
        if same && free {
            dropped_a.insert(ka);
            dropped_b.insert(kb);
            cut_levels.extend(x.cut.iter().map(|i| i.level()));
        }
    }
    stats.discarded = dropped_a.len();
    let rest = |ps: &[Partition], dropped: &BTreeSet<usize>| -> Vec<Tdd> {
        ps.iter()
            .enumerate()
            .filter(|(k, _)| !dropped.contains(k))
            .map(|(_, p)| p.tdd.clone())
            .collect()
    };
    let ra = rest(&pa, &dropped_a);
    let rb = rest(&pb, &dropped_b);
    if ra.is_empty() && rb.is_empty() {
        // every pair identical: the two networks contract to the same tensor
        return Ok(Verdict::Equivalent);
    }
    if !dropped_a.is_empty() {
        let ta = sa.mat.assemble_keeping(m, &ra, &cut_levels)?;
        let tb = sb.mat.assemble_keeping(m, &rb, &cut_levels)?;
        stats.final_nodes_a = Some(m.node_count(&ta));
        stats.final_nodes_b = Some(m.node_count(&tb));
        if m.identical_edges(ta.root(), tb.root())
            && ta.indices() == tb.indices()
            && cfg.mode == Mode::M
        {
            return Ok(Verdict::Equivalent);
        }
        if cut_levels.is_empty() {
            // discarded pairs are disconnected factors shared by both sides
            let v = decide(m, cfg, &ta, &tb, peel);
            if v.is_equivalent() {
                return Ok(v);
            }
        }
    }
    // nothing could be concluded from the remainder: decide on the whole
    stats.fell_back = !dropped_a.is_empty();
    let all_a: Vec<Tdd> = pa.into_iter().map(|p| p.tdd).collect();
    let all_b: Vec<Tdd> = pb.into_iter().map(|p| p.tdd).collect();
    let ta = sa.mat.assemble(m, &all_a)?;
    let tb = sb.mat.assemble(m, &all_b)?;
    stats.final_nodes_a = Some(m.node_count(&ta));
    stats.final_nodes_b = Some(m.node_count(&tb));
    Ok(decide(m, cfg, &ta, &tb, peel))
}
