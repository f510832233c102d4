//! Gate library.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use num_complex::Complex64;

use super::CircuitError;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// A unitary applied to an ordered list of qubits. The matrix is row-major
/// over `2^k` basis states with `qubits[0]` as the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    name: String,
    params: Vec<f64>,
    qubits: Vec<String>,
    matrix: Vec<Complex64>,
}

/// Names understood by [`Gate::new`] with their parameter and qubit counts.
pub const LIBRARY: &[(&str, usize, usize)] = &[
    ("id", 0, 1),
    ("h", 0, 1),
    ("x", 0, 1),
    ("y", 0, 1),
    ("z", 0, 1),
    ("s", 0, 1),
    ("sdg", 0, 1),
    ("t", 0, 1),
    ("tdg", 0, 1),
    ("p", 1, 1),
    ("rz", 1, 1),
    ("cx", 0, 2),
    ("cz", 0, 2),
    ("cp", 1, 2),
    ("swap", 0, 2),
    // controlled-U^(2^j) for U = diag(1, e^{2πiφ}); params = [φ, j]
    ("cu_pow", 2, 2),
];

impl Gate {
    pub fn new(name: &str, params: &[f64], qubits: &[&str]) -> Result<Gate, CircuitError> {
        let lname = name.to_ascii_lowercase();
        let &(_, np, nq) = LIBRARY
            .iter()
            .find(|(n, _, _)| *n == lname)
            .ok_or_else(|| CircuitError::UnknownGate(name.to_owned()))?;
        if params.len() != np || qubits.len() != nq {
            return Err(CircuitError::GateArity {
                gate: lname,
                params: params.len(),
                qubits: qubits.len(),
            });
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(CircuitError::RepeatedQubit {
                    gate: lname,
                    qubit: (*q).to_owned(),
                });
            }
        }
        let matrix = library_matrix(&lname, params);
        Ok(Gate {
            name: lname,
            params: params.to_vec(),
            qubits: qubits.iter().map(|q| (*q).to_owned()).collect(),
            matrix,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn qubits(&self) -> &[String] {
        &self.qubits
    }

    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits.len()
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    /// Entry `<row|U|col>`.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim() + col]
    }

    /// Same gate acting on different qubits.
    pub fn on(&self, qubits: &[&str]) -> Result<Gate, CircuitError> {
        Gate::new(&self.name, &self.params, qubits)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|r| (0..d).all(|col| r == col || self.entry(r, col).norm() < 1e-12))
    }

    /// True when the gate never changes the basis value of its `pos`-th
    /// qubit (controls, diagonal gates).
    pub fn diagonal_on(&self, pos: usize) -> bool {
        let d = self.dim();
        let bit = 1 << (self.arity() - 1 - pos);
        (0..d).all(|r| (0..d).all(|col| (r ^ col) & bit == 0 || self.entry(r, col).norm() < 1e-12))
    }

    /// max |U†U - I| entrywise.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut s = c(0., 0.);
                for k in 0..d {
                    s += self.entry(k, i).conj() * self.entry(k, j);
                }
                let expect = if i == j { c(1., 0.) } else { c(0., 0.) };
                err = err.max((s - expect).norm());
            }
        }
        err
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format_param(*p)).collect();
            write!(f, "({})", ps.join(","))?;
        }
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// Shortest decimal that parses back to the same float.
pub fn format_param(p: f64) -> String {
    format!("{p:?}")
}

fn diag(entries: &[Complex64]) -> Vec<Complex64> {
    let d = entries.len();
    let mut m = vec![c(0., 0.); d * d];
    for (i, e) in entries.iter().enumerate() {
        m[i * d + i] = *e;
    }
    m
}

fn library_matrix(name: &str, params: &[f64]) -> Vec<Complex64> {
    let o = c(0., 0.);
    let l = c(1., 0.);
    let h = FRAC_1_SQRT_2;
    match name {
        "id" => diag(&[l, l]),
        "h" => vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)],
        "x" => vec![o, l, l, o],
        "y" => vec![o, c(0., -1.), c(0., 1.), o],
        "z" => diag(&[l, -l]),
        "s" => diag(&[l, phase(FRAC_PI_2)]),
        "sdg" => diag(&[l, phase(-FRAC_PI_2)]),
        "t" => diag(&[l, phase(FRAC_PI_4)]),
        "tdg" => diag(&[l, phase(-FRAC_PI_4)]),
        "p" => diag(&[l, phase(params[0])]),
        "rz" => diag(&[phase(-params[0] / 2.0), phase(params[0] / 2.0)]),
        "cx" => vec![
            l, o, o, o, //
            o, l, o, o, //
            o, o, o, l, //
            o, o, l, o,
        ],
        "cz" => diag(&[l, l, l, -l]),
        "cp" => diag(&[l, l, l, phase(params[0])]),
        "swap" => vec![
            l, o, o, o, //
            o, o, l, o, //
            o, l, o, o, //
            o, o, o, l,
        ],
        "cu_pow" => {
            let k = params[1].round();
            let angle = 2.0 * PI * params[0] * 2f64.powf(k);
            diag(&[l, l, l, phase(angle)])
        }
        _ => unreachable!("library lookup checked the name"),
    }
}
