//! Line-oriented circuit text format.
//!
//! ```text
//! qubits q q1 q2
//! inputs q
//! outputs q2
//! init q1=0 q2=0
//!
//! sub fix_x {
//!   gate x q2
//! }
//!
//! gate h q1
//! gate cx q1 q2
//! measure q q1 -> c0 c1
//! dispatch id(c0, c1) { 1: fix_x }
//! ```
//!
//! Header lines: `qubits`, `inputs`, `outputs`, `outbits` and
//! `init q=0|1|+`. Body lines: `gate NAME(params) q...`,
//! `measure q... -> c...`, `ifc F(c...) == k apply G; G...` and
//! `dispatch F(c...) { k: sub, ... }`, where a dispatch consumes the
//! measurement on the line right before it. `F` is `id`, `and`, `or`,
//! `xor` or a truth table declared with `func NAME { bits -> bits ... }`.
//! Branches missing from a dispatch are empty. Parameters accept numbers,
//! `pi`, unary minus, `*` and `/`. `#` starts a comment.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{
    format_param, validate, BranchStep, CircuitSpec, Conditional, DynCircuit, Gate, InitState,
    MeasureStep, ValidationError,
};
use crate::logic::{int_to_bitstring, BoolFunc, TABLE_ARITY_LIMIT};

/// A syntax or name-resolution error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.col, self.message
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextError {
    #[error("{0}")]
    Parse(ParseError),
    #[error("invalid circuit:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ValidationError>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "->", "==", "(", ")", ",", "{", "}", ":", ";", "=", "+", "-", "*", "/",
];

fn lex(line: &str, ln: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token {
                tok: Tok::Num(chars[start..i].iter().collect()),
                col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    col,
                });
                i += s.len();
            }
            None => {
                return Err(ParseError {
                    line: ln,
                    col,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Cursor over the tokens of one line.
struct Line {
    ln: usize,
    toks: Vec<Token>,
    pos: usize,
    end_col: usize,
}

impl Line {
    fn err<T>(&self, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.ln,
            col,
            message: message.into(),
        })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(self.col(), format!("expected `{s}`"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let col = self.col();
        match self.next() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => Ok((s, col)),
            _ => self.err(col, format!("expected {what}")),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(self.col(), "unexpected text at end of line")
        }
    }

    fn idents(&mut self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        while let Some(Tok::Ident(s)) = self.peek() {
            let s = s.clone();
            out.push((s, self.col()));
            self.pos += 1;
        }
        out
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        let col = self.col();
        if self.eat("-") {
            return Ok(-self.factor()?);
        }
        match self.next() {
            Some(Token {
                tok: Tok::Num(s), ..
            }) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => self.err(col, format!("invalid number `{s}`")),
            },
            Some(Token {
                tok: Tok::Ident(s), ..
            }) if s == "pi" => Ok(PI),
            _ => self.err(col, "expected a number or `pi`"),
        }
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.factor()?;
        loop {
            if self.eat("*") {
                v *= self.factor()?;
            } else if self.eat("/") {
                let col = self.col();
                let d = self.factor()?;
                if d == 0.0 {
                    return self.err(col, "division by zero");
                }
                v /= d;
            } else if v.is_finite() {
                return Ok(v);
            } else {
                return self.err(self.col(), "parameter overflows");
            }
        }
    }

    fn uint(&mut self, what: &str) -> Result<u64, ParseError> {
        let col = self.col();
        match self.next() {
            Some(Token {
                tok: Tok::Num(s), ..
            }) => match s.parse::<u64>() {
                Ok(v) => Ok(v),
                Err(_) => self.err(col, format!("expected {what}")),
            },
            _ => self.err(col, format!("expected {what}")),
        }
    }
}

#[derive(Default)]
struct Header {
    qubits: Option<Vec<String>>,
    inputs: Option<Vec<String>>,
    outputs: Option<Vec<String>>,
    outbits: Option<Vec<String>>,
    init: Option<Vec<(String, InitState)>>,
}

enum Block {
    Top,
    Sub {
        name: String,
        steps: Vec<DynCircuit>,
    },
    Func {
        name: String,
        rows: Vec<(usize, String, String)>,
        col: usize,
    },
}

struct Parser {
    header: Header,
    funcs: BTreeMap<String, BoolFunc>,
    subs: BTreeMap<String, DynCircuit>,
    top: Vec<DynCircuit>,
}

const BUILTIN_FUNCS: &[&str] = &["id", "and", "or", "xor"];

impl Parser {
    fn qubits(&self) -> &[String] {
        self.header.qubits.as_deref().unwrap_or(&[])
    }

    fn check_qubit(&self, l: &Line, q: &str, col: usize) -> Result<(), ParseError> {
        if self.qubits().iter().any(|x| x == q) {
            Ok(())
        } else {
            l.err(col, format!("undeclared qubit `{q}`"))
        }
    }

    fn header_line(&mut self, kw: &str, l: &mut Line, kw_col: usize) -> Result<(), ParseError> {
        let slot_taken = match kw {
            "qubits" => self.header.qubits.is_some(),
            "inputs" => self.header.inputs.is_some(),
            "outputs" => self.header.outputs.is_some(),
            "outbits" => self.header.outbits.is_some(),
            _ => self.header.init.is_some(),
        };
        if slot_taken {
            return l.err(kw_col, format!("`{kw}` given twice"));
        }
        if kw != "qubits" && self.header.qubits.is_none() {
            return l.err(kw_col, "`qubits` must come first");
        }
        if kw == "init" {
            let mut v = Vec::new();
            while !l.at_end() {
                let (q, col) = l.ident("a qubit name")?;
                self.check_qubit(l, &q, col)?;
                l.expect("=")?;
                let c = l.col();
                let st = match l.next().map(|t| t.tok) {
                    Some(Tok::Num(s)) if s == "0" => InitState::Zero,
                    Some(Tok::Num(s)) if s == "1" => InitState::One,
                    Some(Tok::Sym("+")) => InitState::Plus,
                    _ => return l.err(c, "initial state must be 0, 1 or +"),
                };
                v.push((q, st));
            }
            self.header.init = Some(v);
            return Ok(());
        }
        let names = l.idents();
        l.done()?;
        if kw != "qubits" && kw != "outbits" {
            for (q, col) in &names {
                self.check_qubit(l, q, *col)?;
            }
        }
        let names: Vec<String> = names.into_iter().map(|(s, _)| s).collect();
        match kw {
            "qubits" => self.header.qubits = Some(names),
            "inputs" => self.header.inputs = Some(names),
            "outputs" => self.header.outputs = Some(names),
            _ => self.header.outbits = Some(names),
        }
        Ok(())
    }

    fn gate(&self, l: &mut Line) -> Result<Gate, ParseError> {
        let (name, ncol) = l.ident("a gate name")?;
        let mut params = Vec::new();
        if l.eat("(") {
            loop {
                params.push(l.expr()?);
                if l.eat(")") {
                    break;
                }
                l.expect(",")?;
            }
        }
        let mut qs = Vec::new();
        while let Some(Tok::Ident(_)) = l.peek() {
            let (q, col) = l.ident("a qubit")?;
            self.check_qubit(l, &q, col)?;
            qs.push(q);
        }
        let refs: Vec<&str> = qs.iter().map(String::as_str).collect();
        Gate::new(&name, &params, &refs).or_else(|e| l.err(ncol, e.to_string()))
    }

    /// `F(c0, c1, ...)` with the function resolved for that many bits.
    fn func_call(&self, l: &mut Line) -> Result<(BoolFunc, Vec<String>, usize), ParseError> {
        let (fname, fcol) = l.ident("a function name")?;
        l.expect("(")?;
        let mut bits = Vec::new();
        if !l.eat(")") {
            loop {
                bits.push(l.ident("a bit name")?.0);
                if l.eat(")") {
                    break;
                }
                l.expect(",")?;
            }
        }
        let n = bits.len();
        if n == 0 || n > TABLE_ARITY_LIMIT {
            return l.err(
                fcol,
                format!("a function reads 1 to {TABLE_ARITY_LIMIT} bits"),
            );
        }
        let f = match fname.as_str() {
            "id" => BoolFunc::identity(n),
            "and" => BoolFunc::and(n),
            "or" => BoolFunc::or(n),
            "xor" => BoolFunc::xor(n),
            other => match self.funcs.get(other) {
                Some(f) if f.arity() == n => f.clone(),
                Some(f) => {
                    return l.err(
                        fcol,
                        format!("`{other}` takes {} bit(s), {n} given", f.arity()),
                    )
                }
                None => return l.err(fcol, format!("unknown function `{other}`")),
            },
        };
        Ok((f, bits, fcol))
    }

    fn body_line(
        &self,
        kw: &str,
        kw_col: usize,
        l: &mut Line,
        steps: &mut Vec<DynCircuit>,
    ) -> Result<(), ParseError> {
        if self.header.qubits.is_none() {
            return l.err(kw_col, "`qubits` must come first");
        }
        match kw {
            "gate" => {
                let g = self.gate(l)?;
                l.done()?;
                steps.push(DynCircuit::gate(g));
            }
            "measure" => {
                let qs = l.idents();
                l.expect("->")?;
                let bits = l.idents();
                l.done()?;
                for (q, col) in &qs {
                    self.check_qubit(l, q, *col)?;
                }
                if qs.is_empty() || qs.len() != bits.len() {
                    return l.err(kw_col, "measure needs as many bits as qubits, at least one");
                }
                steps.push(DynCircuit::Measure(MeasureStep {
                    qubits: qs.into_iter().map(|x| x.0).collect(),
                    bits: bits.into_iter().map(|x| x.0).collect(),
                }));
            }
            "ifc" => {
                let (func, bits, _) = self.func_call(l)?;
                l.expect("==")?;
                let vcol = l.col();
                let value = l.uint("the condition value")?;
                if func.outputs() < 64 && value >> func.outputs() != 0 {
                    return l.err(
                        vcol,
                        format!("value {value} does not fit in {} bit(s)", func.outputs()),
                    );
                }
                let akw = l.ident("`apply`")?;
                if akw.0 != "apply" {
                    return l.err(akw.1, "expected `apply`");
                }
                let mut gates = Vec::new();
                if !l.at_end() {
                    loop {
                        gates.push(self.gate(l)?);
                        if !l.eat(";") {
                            break;
                        }
                    }
                }
                l.done()?;
                steps.push(DynCircuit::Conditional(Conditional {
                    bits,
                    func,
                    value: value as u32,
                    gates,
                }));
            }
            "dispatch" => {
                let (func, bits, fcol) = self.func_call(l)?;
                let measure = match steps.last() {
                    Some(DynCircuit::Measure(m)) if m.bits == bits => m.clone(),
                    _ => {
                        return l.err(
                            fcol,
                            "dispatch must read exactly the bits measured on the line before",
                        )
                    }
                };
                let t = func.outputs();
                let count = 1usize << t;
                let mut branches = vec![DynCircuit::empty(); count];
                let mut seen = vec![false; count];
                l.expect("{")?;
                if !l.eat("}") {
                    loop {
                        let kcol = l.col();
                        let k = l.uint("a branch number")?;
                        if k >= count as u64 {
                            return l.err(
                                kcol,
                                format!("branch {k} out of range for {count} branches"),
                            );
                        }
                        if std::mem::replace(&mut seen[k as usize], true) {
                            return l.err(kcol, format!("branch {k} given twice"));
                        }
                        l.expect(":")?;
                        let (name, ncol) = l.ident("a subcircuit name")?;
                        branches[k as usize] = match self.subs.get(&name) {
                            Some(c) => c.clone(),
                            None => return l.err(ncol, format!("unknown subcircuit `{name}`")),
                        };
                        if l.eat("}") {
                            break;
                        }
                        l.expect(",")?;
                    }
                }
                l.done()?;
                steps.pop();
                steps.push(DynCircuit::Branch(BranchStep {
                    measure,
                    dispatch: func,
                    branches,
                }));
            }
            other => return l.err(kw_col, format!("unknown statement `{other}`")),
        }
        Ok(())
    }

    fn finish_func(
        &mut self,
        name: String,
        rows: Vec<(usize, String, String)>,
        ln: usize,
        col: usize,
    ) -> Result<(), ParseError> {
        let err = |line: usize, col: usize, m: &str| {
            Err(ParseError {
                line,
                col,
                message: m.to_owned(),
            })
        };
        let Some((_, a0, o0)) = rows.first() else {
            return err(ln, col, "empty truth table");
        };
        let (arity, outputs) = (a0.len(), o0.len());
        let mut table = vec![None; 1usize << arity];
        for (line, a, o) in &rows {
            if a.len() != arity || o.len() != outputs {
                return err(*line, 1, "inconsistent row width");
            }
            let x = u64::from_str_radix(a, 2).expect("checked bit string");
            let y = u32::from_str_radix(o, 2).expect("checked bit string");
            if table[x as usize].replace(y).is_some() {
                return err(*line, 1, "duplicate input row");
            }
        }
        let Some(table) = table.into_iter().collect::<Option<Vec<u32>>>() else {
            return err(ln, 1, "truth table is not total");
        };
        let f = BoolFunc::from_table(arity, outputs, table).map_err(|e| ParseError {
            line: ln,
            col: 1,
            message: e.to_string(),
        })?;
        self.funcs.insert(name, f);
        Ok(())
    }
}

fn is_bits(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c == '0' || c == '1')
}

/// Parses and validates a circuit file.
pub fn parse(text: &str) -> Result<CircuitSpec, TextError> {
    parse_inner(text)
        .map_err(TextError::Parse)
        .and_then(|spec| {
            validate(&spec).map_err(TextError::Invalid)?;
            Ok(spec)
        })
}

fn parse_inner(text: &str) -> Result<CircuitSpec, ParseError> {
    let mut p = Parser {
        header: Header::default(),
        funcs: BTreeMap::new(),
        subs: BTreeMap::new(),
        top: Vec::new(),
    };
    let mut block = Block::Top;
    let mut block_line = 0;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let toks = lex(raw, ln)?;
        if toks.is_empty() {
            continue;
        }
        let mut l = Line {
            ln,
            toks,
            pos: 0,
            end_col: raw.chars().count() + 1,
        };
        if l.eat("}") {
            l.done()?;
            match std::mem::replace(&mut block, Block::Top) {
                Block::Top => return l.err(1, "`}` without an open block"),
                Block::Sub { name, steps } => {
                    p.subs.insert(name, DynCircuit::Seq(steps).flattened());
                }
                Block::Func { name, rows, col } => p.finish_func(name, rows, block_line, col)?,
            }
            continue;
        }
        if let Block::Func { rows, .. } = &mut block {
            let c = l.col();
            let a = match l.next().map(|t| t.tok) {
                Some(Tok::Num(s)) if is_bits(&s) => s,
                _ => return l.err(c, "expected an input bit string"),
            };
            l.expect("->")?;
            let c = l.col();
            let o = match l.next().map(|t| t.tok) {
                Some(Tok::Num(s)) if is_bits(&s) => s,
                _ => return l.err(c, "expected an output bit string"),
            };
            l.done()?;
            if a.len() > TABLE_ARITY_LIMIT || o.len() > TABLE_ARITY_LIMIT {
                return l.err(
                    1,
                    format!("truth tables take at most {TABLE_ARITY_LIMIT} bits"),
                );
            }
            rows.push((ln, a, o));
            continue;
        }
        let (kw, kw_col) = l.ident("a statement")?;
        match kw.as_str() {
            "qubits" | "inputs" | "outputs" | "outbits" | "init" => {
                if !matches!(block, Block::Top) {
                    return l.err(kw_col, "header lines are not allowed inside a block");
                }
                p.header_line(&kw, &mut l, kw_col)?;
            }
            "func" | "sub" => {
                if !matches!(block, Block::Top) {
                    return l.err(kw_col, "blocks do not nest");
                }
                let (name, ncol) = l.ident("a block name")?;
                l.expect("{")?;
                l.done()?;
                let taken = if kw == "func" {
                    BUILTIN_FUNCS.contains(&name.as_str()) || p.funcs.contains_key(&name)
                } else {
                    p.subs.contains_key(&name)
                };
                if taken {
                    return l.err(ncol, format!("`{name}` is already defined"));
                }
                block_line = ln;
                block = if kw == "func" {
                    Block::Func {
                        name,
                        rows: Vec::new(),
                        col: ncol,
                    }
                } else {
                    Block::Sub {
                        name,
                        steps: Vec::new(),
                    }
                };
            }
            _ => {
                let mut steps = match &mut block {
                    Block::Sub { steps, .. } => std::mem::take(steps),
                    _ => std::mem::take(&mut p.top),
                };
                let r = p.body_line(&kw, kw_col, &mut l, &mut steps);
                match &mut block {
                    Block::Sub { steps: s, .. } => *s = steps,
                    _ => p.top = steps,
                }
                r?;
            }
        }
    }
    if !matches!(block, Block::Top) {
        return Err(ParseError {
            line: block_line,
            col: 1,
            message: "block is never closed".into(),
        });
    }
    let Some(qubits) = p.header.qubits else {
        return Err(ParseError {
            line: last_line.max(1),
            col: 1,
            message: "missing `qubits` header".into(),
        });
    };
    Ok(CircuitSpec {
        qubits,
        circuit: DynCircuit::Seq(p.top).flattened(),
        fixed_init: p.header.init.unwrap_or_default(),
        inputs: p.header.inputs.unwrap_or_default(),
        outputs: p.header.outputs.unwrap_or_default(),
        output_bits: p.header.outbits.unwrap_or_default(),
    })
}

struct Printer {
    funcs: Vec<(String, BoolFunc)>,
    defs: String,
    subs: usize,
}

impl Printer {
    fn func_name(&mut self, f: &BoolFunc) -> String {
        let n = f.arity();
        for (name, g) in [
            ("id", BoolFunc::identity(n)),
            ("and", BoolFunc::and(n)),
            ("or", BoolFunc::or(n)),
            ("xor", BoolFunc::xor(n)),
        ] {
            if same_func(f, &g) {
                return name.to_owned();
            }
        }
        if let Some((name, _)) = self.funcs.iter().find(|(_, g)| same_func(f, g)) {
            return name.clone();
        }
        let name = format!("f{}", self.funcs.len());
        let _ = writeln!(self.defs, "func {name} {{");
        for j in 0..1u64 << n {
            let _ = writeln!(
                self.defs,
                "  {} -> {}",
                int_to_bitstring(j, n),
                int_to_bitstring(u64::from(f.eval(j)), f.outputs())
            );
        }
        self.defs.push_str("}\n\n");
        self.funcs.push((name.clone(), f.clone()));
        name
    }

    fn call(&mut self, f: &BoolFunc, bits: &[String]) -> String {
        format!("{}({})", self.func_name(f), bits.join(", "))
    }

    fn body(&mut self, c: &DynCircuit, indent: &str, out: &mut String) {
        for step in c.steps() {
            match step {
                DynCircuit::Gates(gs) => {
                    for g in gs {
                        let _ = writeln!(out, "{indent}gate {}", gate_text(g));
                    }
                }
                DynCircuit::Measure(m) => {
                    let _ = writeln!(
                        out,
                        "{indent}measure {} -> {}",
                        m.qubits.join(" "),
                        m.bits.join(" ")
                    );
                }
                DynCircuit::Conditional(cd) => {
                    let call = self.call(&cd.func, &cd.bits);
                    let gates: Vec<String> = cd.gates.iter().map(gate_text).collect();
                    let _ = write!(out, "{indent}ifc {call} == {} apply", cd.value);
                    if !gates.is_empty() {
                        let _ = write!(out, " {}", gates.join("; "));
                    }
                    out.push('\n');
                }
                DynCircuit::Branch(b) => {
                    let mut arms = Vec::new();
                    for (k, br) in b.branches.iter().enumerate() {
                        if br
                            .steps()
                            .iter()
                            .all(|s| matches!(s, DynCircuit::Gates(g) if g.is_empty()))
                        {
                            continue;
                        }
                        let name = format!("br{}", self.subs);
                        self.subs += 1;
                        let mut inner = String::new();
                        self.body(br, "  ", &mut inner);
                        let _ = write!(self.defs, "sub {name} {{\n{inner}}}\n\n");
                        arms.push(format!("{k}: {name}"));
                    }
                    let call = self.call(&b.dispatch, &b.measure.bits);
                    let _ = writeln!(
                        out,
                        "{indent}measure {} -> {}",
                        b.measure.qubits.join(" "),
                        b.measure.bits.join(" ")
                    );
                    if arms.is_empty() {
                        let _ = writeln!(out, "{indent}dispatch {call} {{}}");
                    } else {
                        let _ = writeln!(out, "{indent}dispatch {call} {{ {} }}", arms.join(", "));
                    }
                }
                DynCircuit::Seq(_) => self.body(step, indent, out),
            }
        }
    }
}

fn same_func(a: &BoolFunc, b: &BoolFunc) -> bool {
    a.arity() == b.arity()
        && a.outputs() == b.outputs()
        && (0..1u64 << a.arity()).all(|j| a.eval(j) == b.eval(j))
}

fn gate_text(g: &Gate) -> String {
    let mut s = g.name().to_owned();
    if !g.params().is_empty() {
        let ps: Vec<String> = g.params().iter().map(|p| format_param(*p)).collect();
        let _ = write!(s, "({})", ps.join(", "));
    }
    for q in g.qubits() {
        s.push(' ');
        s.push_str(q);
    }
    s
}

/// Canonical text of a spec.
pub fn print(spec: &CircuitSpec) -> String {
    let mut head = String::new();
    let _ = writeln!(head, "qubits {}", spec.qubits.join(" "));
    for (kw, list) in [
        ("inputs", &spec.inputs),
        ("outputs", &spec.outputs),
        ("outbits", &spec.output_bits),
    ] {
        if !list.is_empty() {
            let _ = writeln!(head, "{kw} {}", list.join(" "));
        }
    }
    if !spec.fixed_init.is_empty() {
        let inits: Vec<String> = spec
            .fixed_init
            .iter()
            .map(|(q, s)| format!("{q}={s}"))
            .collect();
        let _ = writeln!(head, "init {}", inits.join(" "));
    }
    let mut pr = Printer {
        funcs: Vec::new(),
        defs: String::new(),
        subs: 0,
    };
    let mut body = String::new();
    pr.body(&spec.circuit, "", &mut body);
    let mut out = head;
    out.push('\n');
    out.push_str(&pr.defs);
    out.push_str(&body);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    const TELEPORT: &str = "\
qubits q q1 q2
inputs q
outputs q2
init q1=0 q2=0

sub br0 {
  gate x q2
}

sub br1 {
  gate z q2
}

sub br2 {
  gate x q2
  gate z q2
}

gate h q1
gate cx q1 q2
gate cx q q1
gate h q
measure q q1 -> m0 m1
dispatch id(m0, m1) { 1: br0, 2: br1, 3: br2 }
";

    #[test]
    fn teleport_file_matches_generator() {
        let spec = parse(TELEPORT).unwrap();
        let mut t = bench::teleport();
        t.circuit = t.circuit.flattened();
        assert_eq!(spec, t);
        assert_eq!(print(&spec), TELEPORT);
    }

    #[test]
    fn undeclared_qubit_is_located() {
        let src = "qubits a\ninit a=0\n\ngate h a\ngate cx a b\n";
        let TextError::Parse(e) = parse(src).unwrap_err() else {
            panic!()
        };
        assert_eq!((e.line, e.col), (5, 11));
        assert!(e.message.contains("undeclared qubit `b`"));
    }

    #[test]
    fn params_and_conditionals() {
        let src = "qubits a b\noutbits c\ninit a=+ b=1\ngate cp(-pi/4) a b\nmeasure a -> c\nifc id(c) == 1 apply rz(2*pi/8) b; x b\n";
        let spec = parse(src).unwrap();
        let DynCircuit::Seq(steps) = &spec.circuit else {
            panic!()
        };
        let DynCircuit::Gates(gs) = &steps[0] else {
            panic!()
        };
        assert!((gs[0].params()[0] + PI / 4.0).abs() < 1e-15);
        let DynCircuit::Conditional(cd) = &steps[2] else {
            panic!()
        };
        assert_eq!(cd.gates.len(), 2);
        assert_eq!(parse(&print(&spec)).unwrap(), spec);
    }

    #[test]
    fn custom_truth_table() {
        let src = "qubits a b x\ninputs x\noutputs x\ninit a=+ b=+\n\nfunc f {\n  00 -> 0\n  01 -> 1\n  10 -> 1\n  11 -> 1\n}\n\nsub br0 {\n  gate z x\n}\n\nmeasure a b -> c d\ndispatch f(c, d) { 1: br0 }\n";
        let spec = parse(src).unwrap();
        // `f` is `or`, so it prints as the builtin
        let printed = print(&spec);
        assert!(
            printed.contains("dispatch or(c, d) { 1: br0 }"),
            "{printed}"
        );
        assert_eq!(parse(&printed).unwrap(), spec);
    }

    #[test]
    fn validation_errors_are_forwarded() {
        let TextError::Invalid(errs) =
            parse("qubits a\ninit a=0\noutbits c\ngate h a\n").unwrap_err()
        else {
            panic!()
        };
        assert!(errs[0].message.contains("never measured"));
    }

    #[test]
    fn syntax_errors() {
        for (src, line, needle) in [
            ("gate h a\n", 1, "`qubits` must come first"),
            ("qubits a\ninit a=2\n", 2, "0, 1 or +"),
            ("qubits a\ngate h(1 a\n", 2, "expected `,`"),
            ("qubits a\nsub s {\n", 2, "never closed"),
            ("qubits a\n}\n", 2, "without an open block"),
            (
                "qubits a\ninit a=0\nmeasure a -> c\ndispatch id(d) {}\n",
                4,
                "bits measured on the line before",
            ),
            ("qubits a\ngate foo a\n", 2, "unknown gate"),
            ("qubits a\ngate h a $\n", 2, "unexpected character"),
            ("", 1, "missing `qubits`"),
        ] {
            let TextError::Parse(e) = parse(src).unwrap_err() else {
                panic!("{src}")
            };
            assert_eq!(e.line, line, "{src}: {e}");
            assert!(e.message.contains(needle), "{src}: {e}");
        }
    }

    #[test]
    fn benchmarks_round_trip() {
        let mut specs = vec![
            bench::teleport(),
            bench::swap_teleport(),
            bench::identity_spec(),
        ];
        for n in 2..=5 {
            specs.push(bench::qft(n).unwrap());
            specs.push(bench::dyn_qft(n).unwrap());
            specs.push(bench::pe(n, bench::default_phase(n)).unwrap());
            specs.push(bench::dyn_pe(n, bench::default_phase(n)).unwrap());
        }
        for e in [None, Some(0), Some(1), Some(2)] {
            specs.push(bench::bitflip_code(e).unwrap());
            specs.push(bench::phaseflip_code(e).unwrap());
        }
        specs.extend(bench::state_inject("t"));
        specs.extend(bench::state_inject("s"));
        for s in specs {
            let text = print(&s);
            let back = parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(print(&back), text);
            let mut flat = s.clone();
            flat.circuit = flat.circuit.flattened();
            assert_eq!(back, flat);
        }
    }
}
