//! Classical control logic: Boolean functions, reduced ordered BDDs, and
//! their lift to 0/1-valued tensors.
//!
//! Bit conventions: an input assignment is read as an integer with the
//! first argument as the most significant bit, and likewise for outputs.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::tdd::{IndexId, Manager, Tdd, TddError, ONE, ZERO};

/// Functions up to this arity are stored as explicit truth tables.
pub const TABLE_ARITY_LIMIT: usize = 16;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LogicError {
    #[error("truth table for arity {arity} needs {expected} rows, got {got}")]
    TableSize {
        arity: usize,
        expected: usize,
        got: usize,
    },
    #[error("output value {value} does not fit in {outputs} bits")]
    OutputRange { value: u32, outputs: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expected a single-output function, got {0} outputs")]
    NotSingleOutput(usize),
    #[error("function takes {expected} inputs, {got} indices given")]
    InputCount { expected: usize, got: usize },
    #[error(transparent)]
    Tdd(#[from] TddError),
}

#[derive(Clone, Debug, PartialEq)]
enum FuncRepr {
    Table(Vec<u32>),
    /// One diagram per output bit, most significant first.
    Bdds(Vec<Bdd>),
}

/// A total function `{0,1}^arity -> {0,1}^outputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoolFunc {
    arity: usize,
    outputs: usize,
    repr: FuncRepr,
}

impl BoolFunc {
    pub fn from_table(arity: usize, outputs: usize, table: Vec<u32>) -> Result<Self, LogicError> {
        let expected = 1usize << arity;
        if table.len() != expected {
            return Err(LogicError::TableSize {
                arity,
                expected,
                got: table.len(),
            });
        }
        if let Some(&value) = table.iter().find(|&&v| outputs < 32 && v >> outputs != 0) {
            return Err(LogicError::OutputRange { value, outputs });
        }
        Ok(BoolFunc {
            arity,
            outputs,
            repr: FuncRepr::Table(table),
        })
    }

    /// Builds from a closure; large arities are stored as BDDs.
    pub fn from_fn(arity: usize, outputs: usize, f: impl Fn(u64) -> u32) -> Self {
        if arity <= TABLE_ARITY_LIMIT {
            let table = (0..1u64 << arity).map(|j| f(j) & mask(outputs)).collect();
            return BoolFunc {
                arity,
                outputs,
                repr: FuncRepr::Table(table),
            };
        }
        let bdds = (0..outputs)
            .map(|k| Bdd::from_fn(arity, |j| (f(j) >> (outputs - 1 - k)) & 1 == 1))
            .collect();
        BoolFunc {
            arity,
            outputs,
            repr: FuncRepr::Bdds(bdds),
        }
    }

    pub fn from_bdds(bdds: Vec<Bdd>) -> Self {
        let arity = bdds.first().map_or(0, |b| b.arity());
        BoolFunc {
            arity,
            outputs: bdds.len(),
            repr: FuncRepr::Bdds(bdds),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |j| j as u32)
    }

    pub fn and(n: usize) -> Self {
        Self::from_fn(n, 1, move |j| (j == (1u64 << n) - 1) as u32)
    }

    pub fn or(n: usize) -> Self {
        Self::from_fn(n, 1, |j| (j != 0) as u32)
    }

    pub fn xor(n: usize) -> Self {
        Self::from_fn(n, 1, |j| j.count_ones() & 1)
    }

    pub fn constant(arity: usize, outputs: usize, value: u32) -> Self {
        Self::from_fn(arity, outputs, move |_| value)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn eval(&self, input: u64) -> u32 {
        match &self.repr {
            FuncRepr::Table(t) => t[input as usize],
            FuncRepr::Bdds(bdds) => bdds
                .iter()
                .fold(0, |acc, b| (acc << 1) | b.eval(input) as u32),
        }
    }

    pub fn eval_bits(&self, bits: &[u8]) -> u32 {
        self.eval(bits_to_int(bits))
    }

    /// Single-output projection onto output bit `k` (0 = most significant).
    pub fn output_bit(&self, k: usize) -> BoolFunc {
        let shift = self.outputs - 1 - k;
        BoolFunc::from_fn(self.arity, 1, |j| (self.eval(j) >> shift) & 1)
    }

    /// `[f(x) == value]` as a single-output function.
    pub fn equals(&self, value: u32) -> BoolFunc {
        BoolFunc::from_fn(self.arity, 1, |j| (self.eval(j) == value) as u32)
    }

    pub fn is_identity(&self) -> bool {
        self.arity == self.outputs && (0..1u64 << self.arity).all(|j| self.eval(j) == j as u32)
    }

    /// Reduced ordered BDD of a single-output function.
    pub fn to_bdd(&self) -> Result<Bdd, LogicError> {
        if self.outputs != 1 {
            return Err(LogicError::NotSingleOutput(self.outputs));
        }
        match &self.repr {
            FuncRepr::Bdds(b) => Ok(b[0].clone()),
            FuncRepr::Table(_) => Ok(Bdd::from_fn(self.arity, |j| self.eval(j) == 1)),
        }
    }

    /// Truth table text: one `bits -> bits` line per input assignment.
    pub fn to_table_text(&self) -> String {
        let mut s = String::new();
        for j in 0..1u64 << self.arity {
            s.push_str(&int_to_bitstring(j, self.arity));
            s.push_str(" -> ");
            s.push_str(&int_to_bitstring(self.eval(j) as u64, self.outputs));
            s.push('\n');
        }
        s
    }

    pub fn parse_table_text(text: &str) -> Result<Self, LogicError> {
        let mut rows: Vec<(usize, u64, u32, usize, usize)> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| LogicError::Parse {
                line: ln + 1,
                message: message.to_owned(),
            };
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| err("expected `bits -> bits`"))?;
            let (lhs, rhs) = (lhs.trim(), rhs.trim());
            let inp = parse_bitstring(lhs).ok_or_else(|| err("input is not a bit string"))?;
            let out = parse_bitstring(rhs).ok_or_else(|| err("output is not a bit string"))?;
            rows.push((ln + 1, inp, out as u32, lhs.len(), rhs.len()));
        }
        let Some(&(_, _, _, arity, outputs)) = rows.first() else {
            return Err(LogicError::Parse {
                line: 0,
                message: "empty truth table".into(),
            });
        };
        let mut table = vec![None; 1usize << arity];
        for (line, inp, out, a, o) in rows {
            if a != arity || o != outputs {
                return Err(LogicError::Parse {
                    line,
                    message: "inconsistent row width".into(),
                });
            }
            if table[inp as usize].replace(out).is_some() {
                return Err(LogicError::Parse {
                    line,
                    message: "duplicate input row".into(),
                });
            }
        }
        let table: Option<Vec<u32>> = table.into_iter().collect();
        let table = table.ok_or(LogicError::Parse {
            line: 0,
            message: "truth table is not total".into(),
        })?;
        Self::from_table(arity, outputs, table)
    }
}

impl fmt::Display for BoolFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table_text())
    }
}

fn mask(bits: usize) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

pub fn bits_to_int(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

pub fn int_to_bitstring(v: u64, width: usize) -> String {
    (0..width)
        .map(|i| {
            if (v >> (width - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

fn parse_bitstring(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 63 {
        return None;
    }
    s.chars().try_fold(0u64, |acc, ch| match ch {
        '0' => Some(acc << 1),
        '1' => Some((acc << 1) | 1),
        _ => None,
    })
}

/// Node reference inside a [`Bdd`]: 0 and 1 are the terminals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BddRef(u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BddNode {
    pub var: usize,
    pub low: BddRef,
    pub high: BddRef,
}

/// Reduced ordered BDD over variables `0..arity`, variable 0 at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct Bdd {
    arity: usize,
    nodes: Vec<BddNode>,
    root: BddRef,
}

impl Bdd {
    pub fn from_fn(arity: usize, f: impl Fn(u64) -> bool) -> Self {
        let mut b = Bdd {
            arity,
            nodes: Vec::new(),
            root: BddRef::FALSE,
        };
        let mut unique = FxHashMap::default();
        b.root = b.build(0, 0, &f, &mut unique);
        b
    }

    fn build(
        &mut self,
        var: usize,
        prefix: u64,
        f: &impl Fn(u64) -> bool,
        unique: &mut FxHashMap<BddNode, BddRef>,
    ) -> BddRef {
        if var == self.arity {
            return if f(prefix) {
                BddRef::TRUE
            } else {
                BddRef::FALSE
            };
        }
        let low = self.build(var + 1, prefix << 1, f, unique);
        let high = self.build(var + 1, (prefix << 1) | 1, f, unique);
        self.mk(var, low, high, unique)
    }

    fn mk(
        &mut self,
        var: usize,
        low: BddRef,
        high: BddRef,
        unique: &mut FxHashMap<BddNode, BddRef>,
    ) -> BddRef {
        if low == high {
            return low;
        }
        let node = BddNode { var, low, high };
        *unique.entry(node).or_insert_with(|| {
            self.nodes.push(node);
            BddRef(self.nodes.len() as u32 + 1)
        })
    }

    pub fn var(arity: usize, v: usize) -> Self {
        Self::from_fn(arity, move |j| (j >> (arity - 1 - v)) & 1 == 1)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> BddRef {
        self.root
    }

    pub fn node(&self, r: BddRef) -> Option<&BddNode> {
        if r.is_terminal() {
            None
        } else {
            Some(&self.nodes[r.0 as usize - 2])
        }
    }

    /// Internal nodes (terminals excluded).
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, input: u64) -> bool {
        let mut r = self.root;
        while let Some(n) = self.node(r) {
            let bit = (input >> (self.arity - 1 - n.var)) & 1;
            r = if bit == 0 { n.low } else { n.high };
        }
        r == BddRef::TRUE
    }
}

/// Tensor of a single-output function: 1 exactly where `f(inputs) = y`.
pub fn func_to_tensor(
    m: &mut Manager,
    f: &BoolFunc,
    inputs: &[IndexId],
    y: &IndexId,
) -> Result<Tdd, LogicError> {
    if f.outputs() != 1 {
        return Err(LogicError::NotSingleOutput(f.outputs()));
    }
    if inputs.len() != f.arity() {
        return Err(LogicError::InputCount {
            expected: f.arity(),
            got: inputs.len(),
        });
    }
    if inputs.len() + 1 > m.dense_limit() {
        let bdd = f.to_bdd()?;
        return bdd_to_tdd(m, &bdd, inputs, y);
    }
    let mut all = inputs.to_vec();
    all.push(y.clone());
    let n = inputs.len();
    Ok(m.from_fn(&all, |bits| {
        if f.eval_bits(&bits[..n]) == bits[n] as u32 {
            ONE
        } else {
            ZERO
        }
    })?)
}

/// Multi-output lift: the product of the per-bit tensors.
pub fn func_to_tensor_multi(
    m: &mut Manager,
    f: &BoolFunc,
    inputs: &[IndexId],
    ys: &[IndexId],
) -> Result<Tdd, LogicError> {
    let mut acc = m.constant(ONE);
    for (k, y) in ys.iter().enumerate() {
        let part = func_to_tensor(m, &f.output_bit(k), inputs, y)?;
        acc = m.contract(&acc, &part, &[]);
    }
    Ok(acc)
}

/// Converts a BDD into a tensor by sending every path that reaches the
/// 0-terminal into a `y` node with successors (1, 0) and every path that
/// reaches the 1-terminal into a `y` node with successors (0, 1).
pub fn bdd_to_tdd(
    m: &mut Manager,
    bdd: &Bdd,
    inputs: &[IndexId],
    y: &IndexId,
) -> Result<Tdd, LogicError> {
    if inputs.len() != bdd.arity() {
        return Err(LogicError::InputCount {
            expected: bdd.arity(),
            got: inputs.len(),
        });
    }
    let y_false = m.from_dense(&[ONE, ZERO], std::slice::from_ref(y))?;
    let y_true = m.from_dense(&[ZERO, ONE], std::slice::from_ref(y))?;
    let mut selectors = Vec::with_capacity(inputs.len());
    for x in inputs {
        let s0 = m.from_dense(&[ONE, ZERO], std::slice::from_ref(x))?;
        let s1 = m.from_dense(&[ZERO, ONE], std::slice::from_ref(x))?;
        selectors.push((s0, s1));
    }
    let mut memo: FxHashMap<BddRef, Tdd> = FxHashMap::default();
    let mut t = lift_rec(m, bdd, bdd.root(), &y_false, &y_true, &selectors, &mut memo);
    // Indices the function ignores are still part of the tensor.
    let mut all = inputs.to_vec();
    all.push(y.clone());
    t = m.tdd_from_edge(t.root(), all);
    Ok(t)
}

fn lift_rec(
    m: &mut Manager,
    bdd: &Bdd,
    r: BddRef,
    y_false: &Tdd,
    y_true: &Tdd,
    selectors: &[(Tdd, Tdd)],
    memo: &mut FxHashMap<BddRef, Tdd>,
) -> Tdd {
    if r == BddRef::FALSE {
        return y_false.clone();
    }
    if r == BddRef::TRUE {
        return y_true.clone();
    }
    if let Some(t) = memo.get(&r) {
        return t.clone();
    }
    let n = *bdd.node(r).unwrap();
    let lo = lift_rec(m, bdd, n.low, y_false, y_true, selectors, memo);
    let hi = lift_rec(m, bdd, n.high, y_false, y_true, selectors, memo);
    let (s0, s1) = &selectors[n.var];
    let a = m.contract(s0, &lo, &[]);
    let b = m.contract(s1, &hi, &[]);
    let t = m.add(&a, &b);
    memo.insert(r, t.clone());
    t
}

/// Contracts the tensors of a combinational network, summing the
/// `internal` wires (outputs of one gate feeding inputs of another).
pub fn compose_logic(m: &mut Manager, parts: &[Tdd], internal: &[IndexId]) -> Tdd {
    crate::tdd::contract_network(m, parts, internal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdd::IndexKind;

    fn dense01(m: &Manager, t: &Tdd, order: &[IndexId]) -> Vec<u8> {
        m.to_dense_in(t, order)
            .unwrap()
            .iter()
            .map(|v| {
                assert!(v.im.abs() < 1e-12);
                if (v.re - 1.0).abs() < 1e-12 {
                    1
                } else {
                    assert!(v.re.abs() < 1e-12);
                    0
                }
            })
            .collect()
    }

    fn idx(m: &mut Manager, names: &[&str]) -> Vec<IndexId> {
        names
            .iter()
            .map(|n| m.declare(n, IndexKind::ClassicalOutcome))
            .collect()
    }

    #[test]
    fn and_tensor() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["x1", "x2", "y"]);
        let t = func_to_tensor(&mut m, &BoolFunc::and(2), &v[..2], &v[2]).unwrap();
        // order x1 x2 y: ones at 000, 010, 100, 111
        assert_eq!(dense01(&m, &t, &v), vec![1, 0, 1, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn constant_zero_tensor() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["x1", "x2", "y"]);
        let t = func_to_tensor(&mut m, &BoolFunc::constant(2, 1, 0), &v[..2], &v[2]).unwrap();
        assert_eq!(dense01(&m, &t, &v), vec![1, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn xor3_matches_truth_table() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["a", "b", "c", "y"]);
        let t = func_to_tensor(&mut m, &BoolFunc::xor(3), &v[..3], &v[3]).unwrap();
        let d = dense01(&m, &t, &v);
        for k in 0..16u64 {
            let x = k >> 1;
            let y = k & 1;
            let expect = ((x.count_ones() as u64 & 1) == y) as u8;
            assert_eq!(d[k as usize], expect);
        }
        assert_eq!(d.iter().filter(|&&b| b == 1).count(), 8);
    }

    #[test]
    fn and_bdd_lifts_to_and_tensor() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["x1", "x2", "y"]);
        let bdd = BoolFunc::and(2).to_bdd().unwrap();
        assert_eq!(bdd.size(), 2);
        let t = bdd_to_tdd(&mut m, &bdd, &v[..2], &v[2]).unwrap();
        let direct = func_to_tensor(&mut m, &BoolFunc::and(2), &v[..2], &v[2]).unwrap();
        assert!(m.identical(&t, &direct).unwrap());
        // x1, x2 and the two y nodes, plus the terminal.
        assert_eq!(m.node_count(&t), 5);
    }

    #[test]
    fn identity_bdd_is_copy_tensor() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["x", "y"]);
        let t = bdd_to_tdd(&mut m, &Bdd::var(1, 0), &v[..1], &v[1]).unwrap();
        assert_eq!(dense01(&m, &t, &v), vec![1, 0, 0, 1]);
    }

    #[test]
    fn truth_table_text_round_trip() {
        let f = BoolFunc::from_table(2, 2, vec![0, 3, 1, 2]).unwrap();
        let text = f.to_table_text();
        assert_eq!(text, "00 -> 00\n01 -> 11\n10 -> 01\n11 -> 10\n");
        assert_eq!(BoolFunc::parse_table_text(&text).unwrap(), f);
        assert!(BoolFunc::parse_table_text("0 -> 1\n").is_err());
        assert!(BoolFunc::parse_table_text("0 -> 1\n0 -> 0\n").is_err());
        assert!(BoolFunc::parse_table_text("0 -> x\n").is_err());
    }

    #[test]
    fn large_arity_uses_bdds() {
        let f = BoolFunc::from_fn(18, 1, |j| j.count_ones() & 1);
        assert!(matches!(f.repr, FuncRepr::Bdds(_)));
        assert_eq!(f.eval(0b11), 0);
        assert_eq!(f.eval(0b111), 1);
    }

    #[test]
    fn wires_into_and_give_and() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["x1", "x2", "w1", "w2", "y"]);
        let id = BoolFunc::identity(1);
        let p1 = func_to_tensor(&mut m, &id, &v[0..1], &v[2]).unwrap();
        let p2 = func_to_tensor(&mut m, &id, &v[1..2], &v[3]).unwrap();
        let g = func_to_tensor(&mut m, &BoolFunc::and(2), &v[2..4], &v[4]).unwrap();
        let t = compose_logic(&mut m, &[p1, p2, g], &v[2..4]);
        let direct = func_to_tensor(&mut m, &BoolFunc::and(2), &v[0..2], &v[4]).unwrap();
        assert!(m.identical(&t, &direct).unwrap());
    }

    #[test]
    fn and_feeding_or() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["x1", "x2", "x3", "w", "z"]);
        let a = func_to_tensor(&mut m, &BoolFunc::and(2), &v[0..2], &v[3]).unwrap();
        let o = func_to_tensor(
            &mut m,
            &BoolFunc::or(2),
            &[v[3].clone(), v[2].clone()],
            &v[4],
        )
        .unwrap();
        let t = compose_logic(&mut m, &[a, o], &v[3..4]);
        let order = [v[0].clone(), v[1].clone(), v[2].clone(), v[4].clone()];
        let d = dense01(&m, &t, &order);
        for k in 0..16u64 {
            let (x1, x2, x3, z) = ((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1);
            let f = (x1 & x2) | x3;
            assert_eq!(d[k as usize], (f == z) as u8, "row {k}");
        }
    }

    #[test]
    fn parity_network_of_three_xors() {
        let mut m = Manager::new();
        let v = idx(&mut m, &["a", "b", "c", "d", "u", "w", "y"]);
        let x = BoolFunc::xor(2);
        let g1 = func_to_tensor(&mut m, &x, &v[0..2], &v[4]).unwrap();
        let g2 = func_to_tensor(&mut m, &x, &v[2..4], &v[5]).unwrap();
        let g3 = func_to_tensor(&mut m, &x, &v[4..6], &v[6]).unwrap();
        let t = compose_logic(&mut m, &[g1, g2, g3], &v[4..6]);
        let order = [
            v[0].clone(),
            v[1].clone(),
            v[2].clone(),
            v[3].clone(),
            v[6].clone(),
        ];
        let d = dense01(&m, &t, &order);
        for k in 0..32u64 {
            let x = k >> 1;
            assert_eq!(
                d[k as usize],
                ((x.count_ones() as u64 & 1) == (k & 1)) as u8
            );
        }
    }

    #[test]
    fn random_bdds_match_truth_tables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let table: Vec<u32> = (0..16).map(|_| rng.gen_range(0..2)).collect();
            let f = BoolFunc::from_table(4, 1, table).unwrap();
            let mut m = Manager::new();
            let v = idx(&mut m, &["a", "b", "c", "d", "y"]);
            let via_bdd = bdd_to_tdd(&mut m, &f.to_bdd().unwrap(), &v[..4], &v[4]).unwrap();
            let direct = func_to_tensor(&mut m, &f, &v[..4], &v[4]).unwrap();
            assert_eq!(dense01(&m, &via_bdd, &v), dense01(&m, &direct, &v));
            // functional: exactly one y per input row
            let d = dense01(&m, &direct, &v);
            assert!(d.chunks(2).all(|r| r[0] + r[1] == 1));
        }
    }

    #[test]
    fn output_bit_projection_is_msb_first() {
        let f = BoolFunc::identity(2);
        assert_eq!(f.output_bit(0).eval(0b10), 1);
        assert_eq!(f.output_bit(1).eval(0b10), 0);
        assert!(f.is_identity());
    }
}
