//! Hash-consed node storage and the core diagram algorithms.
//!
//! Every node lives in one [`Manager`]. A node is identified by its
//! `(level, low edge, high edge)` triple through the unique table, so two
//! structurally equal sub-diagrams are always the same [`NodeId`]. Edges
//! carry complex weights; a tensor entry is the product of the weights on
//! the path selected by an assignment.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rustc_hash::{FxHashMap, FxHashSet};

use super::index::{normalize_indices, IndexId, IndexKind, Level};
use super::weight::{WeightKey, DEFAULT_GRID, ONE, ZERO};
use super::TddError;

static NEXT_MANAGER_ID: AtomicU64 = AtomicU64::new(1);

/// Default cap on the number of indices accepted by dense conversions.
pub const DEFAULT_DENSE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub const TERMINAL: NodeId = NodeId(0);

    pub fn is_terminal(self) -> bool {
        self == Self::TERMINAL
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

/// A weighted pointer to a node.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub weight: Complex64,
    pub node: NodeId,
}

impl Edge {
    pub const ZERO: Edge = Edge {
        weight: ZERO,
        node: NodeId::TERMINAL,
    };

    pub fn constant(weight: Complex64) -> Edge {
        Edge {
            weight,
            node: NodeId::TERMINAL,
        }
    }

    pub fn with_weight(self, weight: Complex64) -> Edge {
        Edge { weight, ..self }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub level: Level,
    pub low: Edge,
    pub high: Edge,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct NodeKey {
    level: Level,
    low: (NodeId, WeightKey),
    high: (NodeId, WeightKey),
}

/// A tensor: a root edge plus the ordered list of its open indices.
#[derive(Clone, Debug)]
pub struct Tdd {
    pub(crate) root: Edge,
    pub(crate) indices: Vec<IndexId>,
    pub(crate) manager: u64,
}

impl Tdd {
    pub fn root(&self) -> Edge {
        self.root
    }

    pub fn weight(&self) -> Complex64 {
        self.root.weight
    }

    /// Open indices, root-most first.
    pub fn indices(&self) -> &[IndexId] {
        &self.indices
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    pub fn has_index(&self, x: &IndexId) -> bool {
        self.indices.iter().any(|i| i.level() == x.level())
    }
}

pub struct Manager {
    id: u64,
    grid: f64,
    dense_limit: usize,
    nodes: Vec<Node>,
    unique: FxHashMap<NodeKey, NodeId>,
    add_cache: FxHashMap<(NodeId, NodeId, WeightKey), Edge>,
    conj_cache: FxHashMap<NodeId, Edge>,
    by_name: FxHashMap<String, IndexId>,
    by_level: FxHashMap<Level, IndexId>,
    next_auto_level: Level,
}

impl Default for Manager {
    fn default() -> Self {
        Self::new()
    }
}

impl Manager {
    pub fn new() -> Self {
        Self::with_grid(DEFAULT_GRID)
    }

    pub fn with_grid(grid: f64) -> Self {
        let terminal = Node {
            level: 0,
            low: Edge::ZERO,
            high: Edge::ZERO,
        };
        Manager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            grid,
            dense_limit: DEFAULT_DENSE_LIMIT,
            nodes: vec![terminal],
            unique: FxHashMap::default(),
            add_cache: FxHashMap::default(),
            conj_cache: FxHashMap::default(),
            by_name: FxHashMap::default(),
            by_level: FxHashMap::default(),
            next_auto_level: 1 << 48,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn grid(&self) -> f64 {
        self.grid
    }

    pub fn dense_limit(&self) -> usize {
        self.dense_limit
    }

    pub fn set_dense_limit(&mut self, limit: usize) {
        self.dense_limit = limit;
    }

    /// Number of entries in the unique table (terminal included).
    pub fn allocated_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn level(&self, id: NodeId) -> Level {
        self.nodes[id.0 as usize].level
    }

    pub fn key(&self, w: Complex64) -> WeightKey {
        WeightKey::of(w, self.grid)
    }

    pub fn is_zero(&self, w: Complex64) -> bool {
        self.key(w).is_zero()
    }

    // ----- index registry -------------------------------------------------

    /// Registers an index at an explicit level. Re-registering the same
    /// name at the same level returns the existing id.
    pub fn index_at(
        &mut self,
        name: &str,
        kind: IndexKind,
        level: Level,
    ) -> Result<IndexId, TddError> {
        if level == 0 {
            return Err(TddError::IndexOrder(format!(
                "level 0 is reserved for the terminal (index {name})"
            )));
        }
        if let Some(existing) = self.by_name.get(name) {
            if existing.level() == level {
                return Ok(existing.clone());
            }
            return Err(TddError::IndexOrder(format!(
                "index {name} already registered at level {}",
                existing.level()
            )));
        }
        if let Some(other) = self.by_level.get(&level) {
            return Err(TddError::IndexOrder(format!(
                "level {level} already taken by index {}",
                other.name()
            )));
        }
        let id = IndexId::new(name, level, kind);
        self.by_name.insert(name.to_owned(), id.clone());
        self.by_level.insert(level, id.clone());
        Ok(id)
    }

    /// Registers an index below every automatically placed index declared
    /// so far; the first declared index ends up nearest the root.
    pub fn declare(&mut self, name: &str, kind: IndexKind) -> IndexId {
        if let Some(existing) = self.by_name.get(name) {
            return existing.clone();
        }
        loop {
            let level = self.next_auto_level;
            self.next_auto_level -= 1;
            if !self.by_level.contains_key(&level) {
                return self
                    .index_at(name, kind, level)
                    .expect("fresh automatic level");
            }
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&IndexId> {
        self.by_name.get(name)
    }

    pub fn index_by_level(&self, level: Level) -> Option<&IndexId> {
        self.by_level.get(&level)
    }

    // ----- construction ---------------------------------------------------

    fn wrap(&self, root: Edge, mut indices: Vec<IndexId>) -> Tdd {
        normalize_indices(&mut indices);
        Tdd {
            root,
            indices,
            manager: self.id,
        }
    }

    pub fn constant(&self, value: Complex64) -> Tdd {
        let root = if self.is_zero(value) {
            Edge::ZERO
        } else {
            Edge::constant(value)
        };
        self.wrap(root, Vec::new())
    }

    pub fn zero(&self, indices: &[IndexId]) -> Tdd {
        self.wrap(Edge::ZERO, indices.to_vec())
    }

    /// Wraps an edge built in this manager as a tensor over `indices`.
    pub fn tdd_from_edge(&self, root: Edge, indices: Vec<IndexId>) -> Tdd {
        self.wrap(self.canonical(root), indices)
    }

    fn canonical(&self, e: Edge) -> Edge {
        if self.is_zero(e.weight) {
            Edge::ZERO
        } else {
            e
        }
    }

    fn scale_edge(&self, e: Edge, c: Complex64) -> Edge {
        self.canonical(Edge {
            weight: e.weight * c,
            node: e.node,
        })
    }

    fn same_edge(&self, a: Edge, b: Edge) -> bool {
        a.node == b.node && self.key(a.weight) == self.key(b.weight)
    }

    /// Builds the canonical edge for a node over `level` with the given
    /// successors: the first nonzero successor weight is factored into the
    /// returned edge, redundant nodes collapse and duplicates are shared.
    pub fn mk_edge(&mut self, level: Level, low: Edge, high: Edge) -> Edge {
        debug_assert!(self.level(low.node) < level && self.level(high.node) < level);
        let low = self.canonical(low);
        let high = self.canonical(high);
        if self.same_edge(low, high) {
            return low;
        }
        let (factor, low, high) = if !self.is_zero(low.weight) {
            let f = low.weight;
            (
                f,
                low.with_weight(ONE),
                self.canonical(high.with_weight(high.weight / f)),
            )
        } else {
            (high.weight, Edge::ZERO, high.with_weight(ONE))
        };
        let key = NodeKey {
            level,
            low: (low.node, self.key(low.weight)),
            high: (high.node, self.key(high.weight)),
        };
        let node = match self.unique.get(&key) {
            Some(&id) => id,
            None => {
                let id = NodeId(u32::try_from(self.nodes.len()).expect("node table overflow"));
                self.nodes.push(Node { level, low, high });
                self.unique.insert(key, id);
                id
            }
        };
        Edge {
            weight: factor,
            node,
        }
    }

    fn check_dense(&self, n: usize) -> Result<(), TddError> {
        if n > self.dense_limit {
            Err(TddError::DenseLimit {
                requested: n,
                limit: self.dense_limit,
            })
        } else {
            Ok(())
        }
    }

    /// Builds a tensor from dense values. `values[k]` is the entry whose
    /// assignment reads `k` in binary with `indices[0]` as the most
    /// significant bit.
    pub fn from_dense(
        &mut self,
        values: &[Complex64],
        indices: &[IndexId],
    ) -> Result<Tdd, TddError> {
        let n = indices.len();
        self.check_dense(n)?;
        if values.len() != 1usize << n {
            return Err(TddError::Shape {
                expected: 1usize << n,
                got: values.len(),
            });
        }
        self.from_fn(indices, |bits| {
            let mut k = 0usize;
            for &b in bits {
                k = (k << 1) | b as usize;
            }
            values[k]
        })
    }

    /// Builds a tensor by evaluating `f` on every assignment; `bits[i]` is
    /// the value of `indices[i]`.
    pub fn from_fn<F>(&mut self, indices: &[IndexId], f: F) -> Result<Tdd, TddError>
    where
        F: Fn(&[u8]) -> Complex64,
    {
        let n = indices.len();
        self.check_dense(n)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| indices[b].level().cmp(&indices[a].level()));
        for w in order.windows(2) {
            if indices[w[0]].level() == indices[w[1]].level() {
                return Err(TddError::IndexOrder(format!(
                    "duplicate index {}",
                    indices[w[0]].name()
                )));
            }
        }
        let levels: Vec<Level> = order.iter().map(|&i| indices[i].level()).collect();
        let mut bits = vec![0u8; n];
        let root = self.build_rec(0, &order, &levels, &mut bits, &f);
        Ok(self.wrap(root, indices.to_vec()))
    }

    fn build_rec<F>(
        &mut self,
        depth: usize,
        order: &[usize],
        levels: &[Level],
        bits: &mut [u8],
        f: &F,
    ) -> Edge
    where
        F: Fn(&[u8]) -> Complex64,
    {
        if depth == order.len() {
            let v = f(bits);
            return self.canonical(Edge::constant(v));
        }
        let pos = order[depth];
        bits[pos] = 0;
        let low = self.build_rec(depth + 1, order, levels, bits, f);
        bits[pos] = 1;
        let high = self.build_rec(depth + 1, order, levels, bits, f);
        bits[pos] = 0;
        self.mk_edge(levels[depth], low, high)
    }

    /// Value of the tensor under an assignment given per index of
    /// `t.indices()`.
    pub fn eval(&self, t: &Tdd, bits: &[u8]) -> Complex64 {
        let mut e = t.root;
        let mut value = e.weight;
        while !e.node.is_terminal() {
            let node = self.node(e.node);
            let pos = t
                .indices
                .iter()
                .position(|i| i.level() == node.level)
                .expect("path index belongs to the tensor");
            e = if bits[pos] == 0 { node.low } else { node.high };
            value *= e.weight;
        }
        value
    }

    /// Dense values in the order of `t.indices()` (first index most
    /// significant).
    pub fn to_dense(&self, t: &Tdd) -> Result<Vec<Complex64>, TddError> {
        let order = t.indices.clone();
        self.to_dense_in(t, &order)
    }

    /// Dense values laid out over `order`, which must be a superset of the
    /// tensor's indices; entries are constant along indices it lacks.
    pub fn to_dense_in(&self, t: &Tdd, order: &[IndexId]) -> Result<Vec<Complex64>, TddError> {
        let n = order.len();
        self.check_dense(n)?;
        for i in &t.indices {
            if !order.iter().any(|o| o.level() == i.level()) {
                return Err(TddError::IndexOrder(format!(
                    "index {} missing from dense layout",
                    i.name()
                )));
            }
        }
        let positions: Vec<usize> = t
            .indices
            .iter()
            .map(|i| order.iter().position(|o| o.level() == i.level()).unwrap())
            .collect();
        let mut out = Vec::with_capacity(1 << n);
        let mut bits = vec![0u8; t.indices.len()];
        for k in 0..(1usize << n) {
            for (slot, &p) in positions.iter().enumerate() {
                bits[slot] = ((k >> (n - 1 - p)) & 1) as u8;
            }
            out.push(self.eval(t, &bits));
        }
        Ok(out)
    }

    // ----- algebra ----------------------------------------------------------

    fn cofactors(&self, e: Edge, level: Level) -> (Edge, Edge) {
        let node = self.node(e.node);
        if node.level == level && !e.node.is_terminal() {
            (
                self.scale_edge(node.low, e.weight),
                self.scale_edge(node.high, e.weight),
            )
        } else {
            (e, e)
        }
    }

    /// Fixes `x` to `bit`; tensors not depending on `x` come back unchanged.
    pub fn slice(&mut self, t: &Tdd, x: &IndexId, bit: u8) -> Tdd {
        if !t.has_index(x) {
            return t.clone();
        }
        let mut cache = FxHashMap::default();
        let root = self.slice_rec(t.root, x.level(), bit, &mut cache);
        let indices = t
            .indices
            .iter()
            .filter(|i| i.level() != x.level())
            .cloned()
            .collect();
        self.wrap(root, indices)
    }

    fn slice_rec(
        &mut self,
        e: Edge,
        level: Level,
        bit: u8,
        cache: &mut FxHashMap<NodeId, Edge>,
    ) -> Edge {
        let node = *self.node(e.node);
        if node.level < level {
            return e;
        }
        if node.level == level {
            let child = if bit == 0 { node.low } else { node.high };
            return self.scale_edge(child, e.weight);
        }
        let inner = if let Some(&r) = cache.get(&e.node) {
            r
        } else {
            let lo = self.slice_rec(node.low, level, bit, cache);
            let hi = self.slice_rec(node.high, level, bit, cache);
            let r = self.mk_edge(node.level, lo, hi);
            cache.insert(e.node, r);
            r
        };
        self.scale_edge(inner, e.weight)
    }

    pub fn scale(&self, t: &Tdd, c: Complex64) -> Tdd {
        Tdd {
            root: self.scale_edge(t.root, c),
            indices: t.indices.clone(),
            manager: self.id,
        }
    }

    /// Entrywise sum; the result lives over the union of both index sets.
    pub fn add(&mut self, a: &Tdd, b: &Tdd) -> Tdd {
        let root = self.add_edges(a.root, b.root);
        let mut indices = a.indices.clone();
        indices.extend(b.indices.iter().cloned());
        self.wrap(root, indices)
    }

    pub fn add_edges(&mut self, a: Edge, b: Edge) -> Edge {
        if self.is_zero(a.weight) {
            return self.canonical(b);
        }
        if self.is_zero(b.weight) {
            return a;
        }
        if a.node == b.node {
            return self.canonical(Edge {
                weight: a.weight + b.weight,
                node: a.node,
            });
        }
        // Normalise so the cache sees (1·a) + (r·b).
        let (a, b) = if a.node <= b.node { (a, b) } else { (b, a) };
        let ratio = b.weight / a.weight;
        let key = (a.node, b.node, self.key(ratio));
        if let Some(&r) = self.add_cache.get(&key) {
            return self.scale_edge(r, a.weight);
        }
        let level = self.level(a.node).max(self.level(b.node));
        let unit_a = a.with_weight(ONE);
        let scaled_b = b.with_weight(ratio);
        let (a0, a1) = self.cofactors(unit_a, level);
        let (b0, b1) = self.cofactors(scaled_b, level);
        let lo = self.add_edges(a0, b0);
        let hi = self.add_edges(a1, b1);
        let r = self.mk_edge(level, lo, hi);
        self.add_cache.insert(key, r);
        self.scale_edge(r, a.weight)
    }

    /// Sums the product of `a` and `b` over every index in `shared`.
    /// Indices in `shared` that a tensor does not depend on are summed as
    /// constants. The result is over `(indices(a) ∪ indices(b)) \ shared`.
    pub fn contract(&mut self, a: &Tdd, b: &Tdd, shared: &[IndexId]) -> Tdd {
        let mut levels: Vec<Level> = shared.iter().map(|i| i.level()).collect();
        levels.sort_unstable_by(|x, y| y.cmp(x));
        levels.dedup();
        let mut cache = FxHashMap::default();
        let root = self.contract_rec(a.root, b.root, 0, &levels, &mut cache);
        let indices = a
            .indices
            .iter()
            .chain(b.indices.iter())
            .filter(|i| !levels.contains(&i.level()))
            .cloned()
            .collect();
        self.wrap(root, indices)
    }

    fn contract_rec(
        &mut self,
        a: Edge,
        b: Edge,
        pos: usize,
        shared: &[Level],
        cache: &mut FxHashMap<(NodeId, NodeId, usize), Edge>,
    ) -> Edge {
        if self.is_zero(a.weight) || self.is_zero(b.weight) {
            return Edge::ZERO;
        }
        let w = a.weight * b.weight;
        let (na, nb) = if a.node <= b.node {
            (a.node, b.node)
        } else {
            (b.node, a.node)
        };
        if let Some(&r) = cache.get(&(na, nb, pos)) {
            return self.scale_edge(r, w);
        }
        let top = self.level(na).max(self.level(nb));
        let mut next = pos;
        while next < shared.len() && shared[next] > top {
            next += 1;
        }
        let factor = Complex64::new((1u64 << (next - pos)) as f64, 0.0);
        let r = if top == 0 {
            Edge::constant(factor)
        } else {
            let (a0, a1) = self.cofactors(
                Edge {
                    weight: ONE,
                    node: na,
                },
                top,
            );
            let (b0, b1) = self.cofactors(
                Edge {
                    weight: ONE,
                    node: nb,
                },
                top,
            );
            let inner = if next < shared.len() && shared[next] == top {
                let lo = self.contract_rec(a0, b0, next + 1, shared, cache);
                let hi = self.contract_rec(a1, b1, next + 1, shared, cache);
                self.add_edges(lo, hi)
            } else {
                let lo = self.contract_rec(a0, b0, next, shared, cache);
                let hi = self.contract_rec(a1, b1, next, shared, cache);
                self.mk_edge(top, lo, hi)
            };
            self.scale_edge(inner, factor)
        };
        cache.insert((na, nb, pos), r);
        self.scale_edge(r, w)
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&mut self, t: &Tdd) -> Tdd {
        let root = self.conj_rec(t.root);
        self.wrap(root, t.indices.clone())
    }

    fn conj_rec(&mut self, e: Edge) -> Edge {
        let w = e.weight.conj();
        if e.node.is_terminal() {
            return self.canonical(Edge::constant(w));
        }
        let inner = if let Some(&r) = self.conj_cache.get(&e.node) {
            r
        } else {
            let node = *self.node(e.node);
            let lo = self.conj_rec(node.low);
            let hi = self.conj_rec(node.high);
            let r = self.mk_edge(node.level, lo, hi);
            self.conj_cache.insert(e.node, r);
            r
        };
        self.scale_edge(inner, w)
    }

    /// Σ |t(a)|² over all assignments of `t.indices()`, computed by
    /// contracting `t` with its conjugate over every index.
    pub fn norm(&mut self, t: &Tdd) -> f64 {
        let conj = self.conjugate(t);
        let all = t.indices.clone();
        let s = self.contract(t, &conj, &all);
        debug_assert!(s.root.node.is_terminal());
        s.root.weight.re
    }

    /// Constant-time identity: same root weight on the grid and the same
    /// unique-table node.
    pub fn identical(&self, a: &Tdd, b: &Tdd) -> Result<bool, TddError> {
        if a.manager != self.id || b.manager != self.id {
            return Err(TddError::ForeignManager);
        }
        Ok(self.identical_edges(a.root, b.root))
    }

    pub fn identical_edges(&self, a: Edge, b: Edge) -> bool {
        self.same_edge(a, b)
    }

    /// Nodes reachable from the root, terminal included.
    pub fn node_count(&self, t: &Tdd) -> usize {
        self.reachable(t.root.node).len()
    }

    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = FxHashSet::default();
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            out.push(id);
            if !id.is_terminal() {
                let n = self.node(id);
                stack.push(n.low.node);
                stack.push(n.high.node);
            }
        }
        out
    }

    /// Copies a tensor from another manager, re-canonicalizing every node.
    /// Indices are re-registered by name and level.
    pub fn import(&mut self, other: &Manager, t: &Tdd) -> Result<Tdd, TddError> {
        let mut indices = Vec::with_capacity(t.indices.len());
        for i in &t.indices {
            indices.push(self.index_at(i.name(), i.kind(), i.level())?);
        }
        let mut cache = FxHashMap::default();
        let root = self.import_rec(other, t.root, &mut cache);
        Ok(self.wrap(root, indices))
    }

    fn import_rec(
        &mut self,
        other: &Manager,
        e: Edge,
        cache: &mut FxHashMap<NodeId, Edge>,
    ) -> Edge {
        if e.node.is_terminal() {
            return self.canonical(e);
        }
        let inner = if let Some(&r) = cache.get(&e.node) {
            r
        } else {
            let n = *other.node(e.node);
            let lo = self.import_rec(other, n.low, cache);
            let hi = self.import_rec(other, n.high, cache);
            let r = self.mk_edge(n.level, lo, hi);
            cache.insert(e.node, r);
            r
        };
        self.scale_edge(inner, e.weight)
    }

    /// Graphviz description of the diagram.
    pub fn to_dot(&self, t: &Tdd) -> String {
        use std::fmt::Write;
        let fmt_w = |w: Complex64| {
            if w.im.abs() < 1e-12 {
                format!("{:.6}", w.re)
            } else {
                format!("{:.6}{:+.6}i", w.re, w.im)
            }
        };
        let mut s = String::from("digraph tdd {\n  root [shape=point];\n");
        let mut nodes = self.reachable(t.root.node);
        nodes.sort();
        for id in &nodes {
            if id.is_terminal() {
                let _ = writeln!(s, "  n0 [label=\"1\", shape=box];");
            } else {
                let n = self.node(*id);
                let label = self
                    .index_by_level(n.level)
                    .map(|i| i.name().to_owned())
                    .unwrap_or_else(|| n.level.to_string());
                let _ = writeln!(s, "  n{} [label=\"{}\", shape=circle];", id.0, label);
            }
        }
        let _ = writeln!(
            s,
            "  root -> n{} [label=\"{}\"];",
            t.root.node.0,
            fmt_w(t.root.weight)
        );
        for id in &nodes {
            if id.is_terminal() {
                continue;
            }
            let n = self.node(*id);
            for (edge, style) in [(n.low, "dotted"), (n.high, "solid")] {
                if self.is_zero(edge.weight) {
                    continue;
                }
                let _ = writeln!(
                    s,
                    "  n{} -> n{} [style={}, label=\"{}\"];",
                    id.0,
                    edge.node.0,
                    style,
                    fmt_w(edge.weight)
                );
            }
        }
        s.push_str("}\n");
        s
    }
}
