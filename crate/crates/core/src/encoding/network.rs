//! Symbolic tensor network of a circuit, built before index levels exist so
//! that two circuits can share one index order.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{
    lower_controls, BranchStep, CircuitSpec, Conditional, DynCircuit, Gate, InitState, MeasureStep,
    Mode,
};
use crate::logic::BoolFunc;
use crate::tdd::IndexKind;

/// Symbolic index; resolved to an `IndexId` once levels are assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub(crate) usize);

/// Position in the global order; smaller keys sit nearer the root.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct SortKey {
    pub group: u8,
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub tag: String,
}

impl SortKey {
    fn new(group: u8, a: u64, b: u64, c: u64, tag: &str) -> Self {
        SortKey {
            group,
            a,
            b,
            c,
            tag: tag.to_owned(),
        }
    }
}

/// Segment number used for final wires so they sort after every internal one.
pub(crate) const FINAL_SEG: u64 = u64::MAX;

#[derive(Clone, Debug)]
pub(crate) struct SymInfo {
    pub name: String,
    pub kind: IndexKind,
    pub key: SortKey,
    /// Left open in the compiled tensor.
    pub open: bool,
    /// Split on by the equivalence checks (measurement index).
    pub peel: bool,
    /// Sub-network that created the symbol.
    pub scope: usize,
    /// Internal wire that may still be renamed into a final wire.
    pub renamable: bool,
}

#[derive(Clone, Debug)]
pub(crate) enum Payload {
    Gate {
        gate: Gate,
        ins: Vec<Sym>,
        outs: Vec<Sym>,
    },
    Controlled {
        gate: Gate,
        ctrl: Sym,
        ins: Vec<Sym>,
        outs: Vec<Sym>,
    },
    /// 1 exactly when all indices agree.
    Copy(Vec<Sym>),
    Init {
        wire: Sym,
        state: InitState,
    },
    Logic {
        func: BoolFunc,
        inputs: Vec<Sym>,
        outputs: Vec<Sym>,
    },
    /// `Σ_i [selector = i] · branch_i`.
    Block {
        selector: Vec<Sym>,
        branches: Vec<Subnet>,
    },
}

#[derive(Clone, Debug)]
pub(crate) struct TensorDesc {
    pub payload: Payload,
    /// Rank of the qubit whose partition owns the tensor.
    pub owner: usize,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Subnet {
    pub scope: usize,
    pub tensors: Vec<TensorDesc>,
}

/// How index names of one circuit line up with the other circuit in a
/// check.
#[derive(Clone, Debug)]
pub struct Naming {
    /// Prefix for indices private to this circuit.
    pub tag: String,
    /// Names used for the output bits, by position.
    pub output_bits: Vec<String>,
    /// Global qubit order (rank = position).
    pub qubit_order: Vec<String>,
    /// Position of the circuit among those sharing the manager.
    pub circuit: u64,
}

impl Naming {
    pub fn single(spec: &CircuitSpec) -> Self {
        Naming {
            tag: String::new(),
            output_bits: spec.output_bits.clone(),
            qubit_order: spec.qubits.clone(),
            circuit: 0,
        }
    }
}

/// A circuit as a list of tensors over symbolic indices.
#[derive(Clone, Debug)]
pub struct Network {
    pub(crate) syms: Vec<SymInfo>,
    alias: Vec<usize>,
    pub(crate) root: Subnet,
}

impl Network {
    pub(crate) fn resolve(&self, s: Sym) -> Sym {
        let mut i = s.0;
        while self.alias[i] != i {
            i = self.alias[i];
        }
        Sym(i)
    }

    pub(crate) fn info(&self, s: Sym) -> &SymInfo {
        &self.syms[self.resolve(s).0]
    }

    /// Canonical symbols, skipping those merged into others.
    pub(crate) fn live_syms(&self) -> impl Iterator<Item = Sym> + '_ {
        (0..self.syms.len())
            .filter(|&i| self.alias[i] == i)
            .map(Sym)
    }

    /// Number of top-level tensors.
    pub fn tensor_count(&self) -> usize {
        self.root.tensors.len()
    }

    /// Owner qubit rank of every top-level tensor.
    pub fn owners(&self) -> Vec<usize> {
        self.root.tensors.iter().map(|t| t.owner).collect()
    }
}

struct Builder<'a> {
    spec: &'a CircuitSpec,
    naming: &'a Naming,
    mode: Mode,
    syms: Vec<SymInfo>,
    alias: Vec<usize>,
    rank: BTreeMap<String, usize>,
    seg: BTreeMap<String, u64>,
    cur: BTreeMap<String, Option<Sym>>,
    /// First wire and fixed state of every initialised qubit.
    pending: Vec<(Sym, InitState, usize)>,
    bits: BTreeMap<String, Sym>,
    /// Rank of the qubit each bit was measured from.
    bit_rank: BTreeMap<String, usize>,
    used_bits: BTreeSet<String>,
    aux: u64,
    scopes: usize,
    order: u64,
}

impl<'a> Builder<'a> {
    fn sym(&mut self, info: SymInfo) -> Sym {
        self.syms.push(info);
        self.alias.push(self.syms.len() - 1);
        Sym(self.syms.len() - 1)
    }

    fn rank_of(&self, q: &str) -> usize {
        self.rank[q]
    }

    fn new_wire(&mut self, q: &str, scope: usize) -> Sym {
        let s = self.seg.entry(q.to_owned()).or_insert(0);
        *s += 1;
        let seg = *s;
        let r = self.rank_of(q) as u64;
        self.sym(SymInfo {
            name: format!("{q}#{seg}"),
            kind: IndexKind::QuantumWire,
            key: SortKey::new(2, r, seg, 0, ""),
            open: false,
            peel: false,
            scope,
            renamable: true,
        })
    }

    fn current_seg(&self, q: &str) -> u64 {
        self.seg.get(q).copied().unwrap_or(0)
    }

    fn aux_sym(&mut self, q: Option<&str>, scope: usize) -> Sym {
        self.aux += 1;
        let (r, seg) = match q {
            Some(q) => (self.rank_of(q) as u64, self.current_seg(q)),
            None => (0, 0),
        };
        let name = format!("{}$y{}", self.naming.tag, self.aux);
        let tag = self.naming.tag.clone();
        self.sym(SymInfo {
            name,
            kind: IndexKind::ClassicalOutcome,
            key: SortKey::new(2, r, seg, 2 + self.aux, &tag),
            open: false,
            peel: false,
            scope,
            renamable: false,
        })
    }

    fn bit_sym(&mut self, bit: &str, q: &str, scope: usize) -> Sym {
        self.order += 1;
        let out_pos = self.spec.output_bits.iter().position(|b| b == bit);
        let tag = self.naming.tag.clone();
        let info = match (self.mode, out_pos) {
            (Mode::M, Some(i)) => SymInfo {
                name: self.naming.output_bits[i].clone(),
                kind: IndexKind::ClassicalOutcome,
                key: SortKey::new(0, i as u64, 0, 0, ""),
                open: true,
                peel: true,
                scope,
                renamable: false,
            },
            (Mode::M, None) => SymInfo {
                name: format!("{tag}{bit}"),
                kind: IndexKind::ClassicalOutcome,
                key: SortKey::new(2, self.rank_of(q) as u64, self.current_seg(q), 1, &tag),
                open: true,
                peel: false,
                scope,
                renamable: false,
            },
            (Mode::Q, _) => SymInfo {
                name: format!("{tag}{bit}"),
                kind: IndexKind::ClassicalOutcome,
                key: SortKey::new(0, 0, self.naming.circuit, self.order, ""),
                open: true,
                peel: true,
                scope,
                renamable: false,
            },
        };
        let s = self.sym(info);
        self.bits.insert(bit.to_owned(), s);
        let r = self.rank_of(q);
        self.bit_rank.insert(bit.to_owned(), r);
        s
    }

    fn final_sym(&mut self, q: &str) -> SymInfo {
        let r = self.rank_of(q) as u64;
        if self.spec.outputs.iter().any(|o| o == q) {
            SymInfo {
                name: format!("{q}'"),
                kind: IndexKind::PrincipalOutput,
                key: SortKey::new(2, r, FINAL_SEG, 0, ""),
                open: true,
                peel: false,
                scope: 0,
                renamable: false,
            }
        } else {
            let peel = self.mode == Mode::Q;
            SymInfo {
                name: format!("{q}~"),
                kind: IndexKind::Discarded,
                key: if peel {
                    SortKey::new(0, 1, r, 0, "")
                } else {
                    SortKey::new(2, r, FINAL_SEG, 0, "")
                },
                open: true,
                peel,
                scope: 0,
                renamable: false,
            }
        }
    }

    /// Current wire of `q`.
    fn take_wire(&mut self, q: &str) -> Sym {
        self.cur[q].expect("qubit already consumed by a final measurement")
    }

    fn owner(&self, qs: &[String]) -> usize {
        qs.iter().map(|q| self.rank_of(q)).min().unwrap_or(0)
    }

    fn emit_gate(&mut self, g: &Gate, out: &mut Subnet, ctrl: Option<(Sym, usize)>) {
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        // a qubit the gate leaves in its basis state keeps its wire
        for (p, q) in g.qubits().iter().enumerate() {
            let diag = g.diagonal_on(p);
            let x = self.take_wire(q);
            let y = if diag { x } else { self.new_wire(q, out.scope) };
            self.cur.insert(q.clone(), Some(y));
            ins.push(x);
            outs.push(y);
        }
        let mut owner = self.owner(g.qubits());
        let payload = match ctrl {
            None => Payload::Gate {
                gate: g.clone(),
                ins,
                outs,
            },
            Some((ctrl, ctrl_owner)) => {
                owner = owner.min(ctrl_owner);
                Payload::Controlled {
                    gate: g.clone(),
                    ctrl,
                    ins,
                    outs,
                }
            }
        };
        out.tensors.push(TensorDesc { payload, owner });
    }

    fn emit_measure(&mut self, m: &MeasureStep, out: &mut Subnet, trailing: &BTreeSet<String>) {
        for (q, bit) in m.qubits.iter().zip(&m.bits) {
            let is_out = self.spec.output_bits.contains(bit);
            let used = self.used_bits.contains(bit);
            let is_principal = self.spec.outputs.contains(q);
            let trail = trailing.contains(q) && out.scope == 0;
            let droppable = self.mode == Mode::M || !is_principal;
            if trail && !is_out && !used && droppable {
                // a final measurement nobody reads changes nothing
                continue;
            }
            let x = self.take_wire(q);
            let c = self.bit_sym(bit, q, out.scope);
            let owner = self.rank_of(q);
            if trail && !is_principal {
                // the outcome index doubles as the qubit's final wire
                self.cur.insert(q.clone(), None);
                out.tensors.push(TensorDesc {
                    payload: Payload::Copy(vec![x, c]),
                    owner,
                });
            } else {
                let y = self.new_wire(q, out.scope);
                self.cur.insert(q.clone(), Some(y));
                out.tensors.push(TensorDesc {
                    payload: Payload::Copy(vec![c, x, y]),
                    owner,
                });
            }
        }
    }

    fn emit_conditional(&mut self, cd: &Conditional, out: &mut Subnet) {
        if cd.gates.is_empty() {
            return;
        }
        let ctrl_owner = cd.bits.iter().map(|b| self.bit_rank[b]).min().unwrap_or(0);
        let ctrl = match cd.single_bit() {
            Some(bit) => self.bits[bit],
            None => {
                let first_q = cd.gates[0].qubits()[0].clone();
                let y = self.aux_sym(Some(&first_q), out.scope);
                let inputs = cd.bits.iter().map(|b| self.bits[b]).collect();
                let owner = self.owner(cd.gates[0].qubits()).min(ctrl_owner);
                out.tensors.push(TensorDesc {
                    payload: Payload::Logic {
                        func: cd.func.equals(cd.value),
                        inputs,
                        outputs: vec![y],
                    },
                    owner,
                });
                y
            }
        };
        for g in &cd.gates {
            self.emit_gate(g, out, Some((ctrl, ctrl_owner)));
        }
    }

    fn emit_branch(&mut self, b: &BranchStep, out: &mut Subnet) {
        let scope = out.scope;
        let mut cbits = Vec::new();
        for (q, bit) in b.measure.qubits.iter().zip(&b.measure.bits) {
            let x = self.take_wire(q);
            let c = self.bit_sym(bit, q, scope);
            let y = self.new_wire(q, scope);
            self.cur.insert(q.clone(), Some(y));
            out.tensors.push(TensorDesc {
                payload: Payload::Copy(vec![c, x, y]),
                owner: self.rank_of(q),
            });
            cbits.push(c);
        }
        let mut region: Vec<String> = b
            .branches
            .iter()
            .flat_map(|br| br.touched_qubits())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        region.sort_by_key(|q| self.rank_of(q));
        let nested: Vec<Vec<String>> = b.branches.iter().map(|br| br.produced_bits()).collect();
        if region.is_empty() && nested.iter().all(|n| n.is_empty()) {
            return;
        }
        let owner = if region.is_empty() {
            self.owner(&b.measure.qubits)
        } else {
            self.owner(&region)
        };
        let anchor = region
            .first()
            .cloned()
            .unwrap_or_else(|| b.measure.qubits[0].clone());
        let selector: Vec<Sym> = (0..b.dispatch.outputs())
            .map(|_| self.aux_sym(Some(&anchor), scope))
            .collect();
        if !selector.is_empty() {
            out.tensors.push(TensorDesc {
                payload: Payload::Logic {
                    func: b.dispatch.clone(),
                    inputs: cbits,
                    outputs: selector.clone(),
                },
                owner,
            });
        }
        let entry: Vec<Sym> = region.iter().map(|q| self.take_wire(q)).collect();
        let mut subnets = Vec::new();
        let mut lasts = Vec::new();
        for br in &b.branches {
            self.scopes += 1;
            let mut sub = Subnet {
                scope: self.scopes,
                tensors: Vec::new(),
            };
            for (q, s) in region.iter().zip(&entry) {
                self.cur.insert(q.clone(), Some(*s));
            }
            self.emit(br, &mut sub, &BTreeSet::new());
            lasts.push(
                region
                    .iter()
                    .map(|q| self.cur[q].unwrap())
                    .collect::<Vec<_>>(),
            );
            subnets.push(sub);
        }
        let exits: Vec<Sym> = region.iter().map(|q| self.new_wire(q, scope)).collect();
        for (i, sub) in subnets.iter_mut().enumerate() {
            for (k, &last) in lasts[i].iter().enumerate() {
                if last == entry[k] {
                    sub.tensors.push(TensorDesc {
                        payload: Payload::Copy(vec![entry[k], exits[k]]),
                        owner,
                    });
                } else {
                    self.alias[last.0] = exits[k].0;
                }
            }
            for (j, other) in nested.iter().enumerate() {
                if j == i {
                    continue;
                }
                for bit in other {
                    if !nested[i].contains(bit) {
                        sub.tensors.push(TensorDesc {
                            payload: Payload::Init {
                                wire: self.bits[bit],
                                state: InitState::Zero,
                            },
                            owner,
                        });
                    }
                }
            }
        }
        for (q, s) in region.iter().zip(&exits) {
            self.cur.insert(q.clone(), Some(*s));
        }
        out.tensors.push(TensorDesc {
            payload: Payload::Block {
                selector,
                branches: subnets,
            },
            owner,
        });
    }

    fn emit(&mut self, c: &DynCircuit, out: &mut Subnet, trailing: &BTreeSet<String>) {
        match c {
            DynCircuit::Gates(gs) => {
                for g in gs {
                    self.emit_gate(g, out, None);
                }
            }
            DynCircuit::Measure(m) => self.emit_measure(m, out, trailing),
            DynCircuit::Conditional(cd) => self.emit_conditional(cd, out),
            DynCircuit::Branch(b) => self.emit_branch(b, out),
            DynCircuit::Seq(parts) => {
                for p in parts {
                    self.emit(p, out, &BTreeSet::new());
                }
            }
        }
    }

    /// Gives `q` its final open index.
    fn finish(&mut self, q: &str, out: &mut Subnet) {
        let Some(s) = self.cur[q] else { return };
        let info = self.final_sym(q);
        if self.syms[s.0].renamable {
            self.syms[s.0] = info;
        } else {
            let f = self.sym(info);
            out.tensors.push(TensorDesc {
                payload: Payload::Copy(vec![s, f]),
                owner: self.rank_of(q),
            });
        }
    }
}

fn reads(c: &DynCircuit, out: &mut BTreeSet<String>) {
    c.visit(&mut |s| match s {
        DynCircuit::Conditional(cd) => out.extend(cd.bits.iter().cloned()),
        DynCircuit::Branch(b) => out.extend(b.measure.bits.iter().cloned()),
        _ => {}
    });
}

/// Builds the tensor network of a validated spec. Dispatches are lowered
/// first; `mode` decides which indices stay open and which are split on.
pub fn build_network(spec: &CircuitSpec, mode: Mode, naming: &Naming) -> Network {
    let circuit = lower_controls(&spec.circuit);
    let mut b = Builder {
        spec,
        naming,
        mode,
        syms: Vec::new(),
        alias: Vec::new(),
        rank: BTreeMap::new(),
        seg: BTreeMap::new(),
        cur: BTreeMap::new(),
        pending: Vec::new(),
        bits: BTreeMap::new(),
        bit_rank: BTreeMap::new(),
        used_bits: BTreeSet::new(),
        aux: 0,
        scopes: 0,
        order: 0,
    };
    let mut extra = naming.qubit_order.len();
    for q in &spec.qubits {
        let r = match naming.qubit_order.iter().position(|x| x == q) {
            Some(r) => r,
            None => {
                extra += 1;
                extra - 1
            }
        };
        b.rank.insert(q.clone(), r);
    }
    reads(&circuit, &mut b.used_bits);
    for q in &spec.qubits {
        let r = b.rank_of(q) as u64;
        let s = if spec.inputs.contains(q) {
            b.sym(SymInfo {
                name: q.clone(),
                kind: IndexKind::QuantumWire,
                key: SortKey::new(2, r, 0, 0, ""),
                open: true,
                peel: false,
                scope: 0,
                renamable: false,
            })
        } else {
            let w = b.new_wire(q, 0);
            let st = spec.init_of(q).unwrap_or(InitState::Zero);
            b.pending.push((w, st, r as usize));
            w
        };
        b.cur.insert(q.clone(), Some(s));
    }
    let steps: Vec<DynCircuit> = circuit.steps().into_iter().cloned().collect();
    let mut root = Subnet::default();
    for (i, step) in steps.iter().enumerate() {
        let mut trailing = BTreeSet::new();
        if let DynCircuit::Measure(m) = step {
            for q in &m.qubits {
                if !steps[i + 1..]
                    .iter()
                    .any(|s| s.touched_qubits().contains(q))
                {
                    trailing.insert(q.clone());
                }
            }
        }
        b.emit(step, &mut root, &trailing);
    }
    let qubits = spec.qubits.clone();
    for q in &qubits {
        b.finish(q, &mut root);
    }
    // initial states go last so tensors are built as functions of their
    // inputs and fixed only at the end
    for (wire, state, owner) in b.pending {
        root.tensors.push(TensorDesc {
            payload: Payload::Init { wire, state },
            owner,
        });
    }
    Network {
        syms: b.syms,
        alias: b.alias,
        root,
    }
}
