use num_complex::Complex64;

use super::gate::Gate;
use super::ir::{BranchStep, Conditional, DynCircuit, MeasureStep};

/// Largest register on which lowering compares branch unitaries.
const LOWER_QUBIT_LIMIT: usize = 8;
const LOWER_TOL: f64 = 1e-10;

/// Dense unitary of a gate list over `qubits` (`qubits[0]` most significant).
pub fn gates_unitary(gates: &[Gate], qubits: &[String]) -> Vec<Complex64> {
    let n = qubits.len();
    let dim = 1usize << n;
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        u[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    for g in gates {
        let pos: Vec<usize> = g
            .qubits()
            .iter()
            .map(|q| {
                qubits
                    .iter()
                    .position(|x| x == q)
                    .expect("gate qubit in register")
            })
            .collect();
        let k = pos.len();
        let mut next = vec![Complex64::new(0.0, 0.0); dim * dim];
        for row in 0..dim {
            let sub_row = pos
                .iter()
                .fold(0usize, |acc, &p| (acc << 1) | ((row >> (n - 1 - p)) & 1));
            for sub_col in 0..1usize << k {
                let a = g.entry(sub_row, sub_col);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut src = row;
                for (j, &p) in pos.iter().enumerate() {
                    let bit = (sub_col >> (k - 1 - j)) & 1;
                    src = (src & !(1 << (n - 1 - p))) | (bit << (n - 1 - p));
                }
                for col in 0..dim {
                    next[row * dim + col] += a * u[src * dim + col];
                }
            }
        }
        u = next;
    }
    u
}

/// True when `a = e^{iθ} b` for some phase.
fn equal_up_to_phase(a: &[Complex64], b: &[Complex64]) -> bool {
    let Some(k) = (0..a.len()).max_by(|&i, &j| a[i].norm().total_cmp(&a[j].norm())) else {
        return true;
    };
    if b[k].norm() < LOWER_TOL {
        return false;
    }
    let ph = a[k] / b[k];
    if (ph.norm() - 1.0).abs() > LOWER_TOL {
        return false;
    }
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - ph * y).norm() <= LOWER_TOL)
}

fn gate_list(c: &DynCircuit) -> Option<Vec<Gate>> {
    match c {
        DynCircuit::Gates(gs) => Some(gs.clone()),
        DynCircuit::Seq(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(gate_list(p)?);
            }
            Some(out)
        }
        _ => None,
    }
}

/// Rewrites a dispatch into a measurement followed by one conditional
/// block per output bit of the dispatch function, when the branch
/// unitaries factor that way (bit blocks applied least significant first).
fn lower_branch(b: &BranchStep) -> Option<DynCircuit> {
    let lists: Vec<Vec<Gate>> = b.branches.iter().map(gate_list).collect::<Option<_>>()?;
    let t = b.dispatch.outputs();
    let mut register: Vec<String> = Vec::new();
    for gs in &lists {
        for g in gs {
            for q in g.qubits() {
                if !register.contains(q) {
                    register.push(q.clone());
                }
            }
        }
    }
    if register.len() > LOWER_QUBIT_LIMIT {
        return None;
    }
    let identity = gates_unitary(&[], &register);
    if !equal_up_to_phase(&gates_unitary(&lists[0], &register), &identity) {
        return None;
    }
    // block for output bit k (0 = most significant) is branch 2^(t-1-k)
    let blocks: Vec<Vec<Gate>> = (0..t).map(|k| lists[1 << (t - 1 - k)].clone()).collect();
    for (i, gs) in lists.iter().enumerate() {
        let mut composed = Vec::new();
        for k in (0..t).rev() {
            if (i >> (t - 1 - k)) & 1 == 1 {
                composed.extend(blocks[k].iter().cloned());
            }
        }
        if !equal_up_to_phase(
            &gates_unitary(gs, &register),
            &gates_unitary(&composed, &register),
        ) {
            return None;
        }
    }
    let mut steps = vec![DynCircuit::Measure(MeasureStep {
        qubits: b.measure.qubits.clone(),
        bits: b.measure.bits.clone(),
    })];
    for k in (0..t).rev() {
        if blocks[k].is_empty() {
            continue;
        }
        let func = b.dispatch.output_bit(k);
        let cond = match single_used_input(&func) {
            Some(j) => Conditional::on_bit(&b.measure.bits[j], blocks[k].clone()),
            None => Conditional {
                bits: b.measure.bits.clone(),
                func,
                value: 1,
                gates: blocks[k].clone(),
            },
        };
        steps.push(DynCircuit::Conditional(cond));
    }
    Some(DynCircuit::Seq(steps))
}

/// Input position `j` when the single-output function is just `x_j`.
fn single_used_input(f: &crate::logic::BoolFunc) -> Option<usize> {
    let n = f.arity();
    if n > 16 {
        return None;
    }
    (0..n).find(|&j| (0..1u64 << n).all(|x| f.eval(x) as u64 == (x >> (n - 1 - j)) & 1))
}

/// Normal form used by the encoder: every dispatch whose branches are plain
/// gate lists that factor per output bit becomes a measurement plus
/// classically controlled gates. Other dispatches are kept (with their
/// branches lowered recursively).
pub fn lower_controls(c: &DynCircuit) -> DynCircuit {
    match c {
        DynCircuit::Branch(b) => match lower_branch(b) {
            Some(lowered) => lowered,
            None => DynCircuit::Branch(BranchStep {
                measure: b.measure.clone(),
                dispatch: b.dispatch.clone(),
                branches: b.branches.iter().map(lower_controls).collect(),
            }),
        },
        DynCircuit::Seq(parts) => DynCircuit::Seq(parts.iter().map(lower_controls).collect()),
        other => other.clone(),
    }
    .flattened()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::BoolFunc;

    fn g(name: &str, qs: &[&str]) -> Gate {
        Gate::new(name, &[], qs).unwrap()
    }

    fn teleport_dispatch() -> DynCircuit {
        DynCircuit::Branch(BranchStep {
            measure: MeasureStep::new(&["q", "q1"], &["c0", "c1"]),
            dispatch: BoolFunc::identity(2),
            branches: vec![
                DynCircuit::empty(),
                DynCircuit::gate(g("x", &["q2"])),
                DynCircuit::gate(g("z", &["q2"])),
                DynCircuit::Gates(vec![g("x", &["q2"]), g("z", &["q2"])]),
            ],
        })
    }

    #[test]
    fn teleport_dispatch_becomes_two_controls() {
        let lowered = lower_controls(&teleport_dispatch());
        let DynCircuit::Seq(steps) = &lowered else {
            panic!("expected a sequence, got {lowered:?}");
        };
        assert_eq!(steps.len(), 3);
        assert!(matches!(&steps[0], DynCircuit::Measure(m) if m.bits == ["c0", "c1"]));
        let DynCircuit::Conditional(x) = &steps[1] else {
            panic!()
        };
        assert_eq!(x.single_bit(), Some("c1"));
        assert_eq!(x.gates, vec![g("x", &["q2"])]);
        let DynCircuit::Conditional(z) = &steps[2] else {
            panic!()
        };
        assert_eq!(z.single_bit(), Some("c0"));
        assert_eq!(z.gates, vec![g("z", &["q2"])]);
    }

    #[test]
    fn qvar_is_preserved() {
        let c = teleport_dispatch();
        assert_eq!(lower_controls(&c).qvar(), c.qvar());
    }

    #[test]
    fn non_factoring_dispatch_is_kept() {
        let mut c = teleport_dispatch();
        if let DynCircuit::Branch(b) = &mut c {
            b.branches[3] = DynCircuit::gate(g("h", &["q2"]));
        }
        assert!(matches!(lower_controls(&c), DynCircuit::Branch(_)));
    }

    #[test]
    fn phase_differences_are_ignored() {
        let mut c = teleport_dispatch();
        // ZX and XZ differ by a global phase of -1
        if let DynCircuit::Branch(b) = &mut c {
            b.branches[3] = DynCircuit::Gates(vec![g("z", &["q2"]), g("x", &["q2"])]);
        }
        assert!(matches!(lower_controls(&c), DynCircuit::Seq(_)));
    }

    #[test]
    fn gate_free_circuit_is_unchanged() {
        let c = DynCircuit::Gates(vec![g("h", &["a"]), g("cx", &["a", "b"])]);
        assert_eq!(lower_controls(&c), c);
    }

    #[test]
    fn unitary_of_cx_then_h() {
        let reg = vec!["a".to_owned(), "b".to_owned()];
        let u = gates_unitary(&[g("cx", &["a", "b"])], &reg);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(u[0], one);
        assert_eq!(u[5], one);
        assert_eq!(u[2 * 4 + 3], one);
        assert_eq!(u[3 * 4 + 2], one);
        let v = gates_unitary(&[g("cx", &["b", "a"])], &reg);
        assert_eq!(v[3 * 4 + 1], one);
    }
}
