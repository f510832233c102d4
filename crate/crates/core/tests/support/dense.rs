//! Plain dense tensors keyed by index name, the reference for engine
//! operations.

use std::collections::BTreeMap;

use dqcheck::tdd::{c, IndexId, IndexKind, Manager, Tdd};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense tensor keyed by index name; `values` is laid out over `names`
/// with the first name as the most significant bit.
#[derive(Clone, Debug)]
pub struct Dense {
    pub names: Vec<String>,
    pub values: Vec<Complex64>,
}

impl Dense {
    pub fn get(&self, assign: &BTreeMap<String, u8>) -> Complex64 {
        let mut k = 0usize;
        for n in &self.names {
            k = (k << 1) | assign[n] as usize;
        }
        self.values[k]
    }
}

pub fn assignments(names: &[String]) -> Vec<BTreeMap<String, u8>> {
    let n = names.len();
    (0..1usize << n)
        .map(|k| {
            names
                .iter()
                .enumerate()
                .map(|(i, name)| (name.clone(), ((k >> (n - 1 - i)) & 1) as u8))
                .collect()
        })
        .collect()
}

pub fn dense_contract(a: &Dense, b: &Dense, shared: &[String]) -> Dense {
    let mut out_names: Vec<String> = a
        .names
        .iter()
        .chain(b.names.iter())
        .filter(|n| !shared.contains(n))
        .cloned()
        .collect();
    out_names.sort();
    out_names.dedup();
    let values = assignments(&out_names)
        .into_iter()
        .map(|free| {
            let mut sum = Complex64::new(0.0, 0.0);
            for s in assignments(shared) {
                let mut full = free.clone();
                full.extend(s);
                sum += a.get(&full) * b.get(&full);
            }
            sum
        })
        .collect();
    Dense {
        names: out_names,
        values,
    }
}

pub fn dense_add(a: &Dense, b: &Dense) -> Dense {
    let mut names: Vec<String> = a.names.iter().chain(b.names.iter()).cloned().collect();
    names.sort();
    names.dedup();
    let values = assignments(&names)
        .iter()
        .map(|asg| a.get(asg) + b.get(asg))
        .collect();
    Dense { names, values }
}

pub fn pool(m: &mut Manager, n: usize) -> Vec<IndexId> {
    (0..n)
        .map(|i| m.declare(&format!("i{i}"), IndexKind::QuantumWire))
        .collect()
}

pub fn random_dense(rng: &mut ChaCha8Rng, pool: &[IndexId], rank: usize, grid: bool) -> Dense {
    let mut picks: Vec<usize> = (0..pool.len()).collect();
    for i in (1..picks.len()).rev() {
        let j = rng.gen_range(0..=i);
        picks.swap(i, j);
    }
    let names: Vec<String> = picks[..rank]
        .iter()
        .map(|&i| pool[i].name().to_owned())
        .collect();
    let values = (0..1usize << rank)
        .map(|_| {
            if grid {
                // small dyadic values, some zeros, so structure repeats
                let re = rng.gen_range(-2..=2) as f64 * 0.5;
                let im = if rng.gen_bool(0.3) {
                    rng.gen_range(-2..=2) as f64 * 0.25
                } else {
                    0.0
                };
                c(re, im)
            } else {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
        .collect();
    Dense { names, values }
}

pub fn build(m: &mut Manager, d: &Dense) -> Tdd {
    let idx: Vec<IndexId> = d
        .names
        .iter()
        .map(|n| m.lookup(n).unwrap().clone())
        .collect();
    m.from_dense(&d.values, &idx).unwrap()
}

pub fn max_dev(m: &Manager, t: &Tdd, d: &Dense) -> f64 {
    let idx: Vec<IndexId> = d
        .names
        .iter()
        .map(|n| m.lookup(n).unwrap().clone())
        .collect();
    let got = m.to_dense_in(t, &idx).unwrap();
    got.iter()
        .zip(&d.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
