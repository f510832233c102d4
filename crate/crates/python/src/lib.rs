//! Python bindings: circuits in the text format, the checker, the
//! benchmark generators and the dense oracle.

use dqcheck::bench::{self as gen, Suite};
use dqcheck::circuit::{CircuitSpec, Mode};
use dqcheck::encoding::PlanMode;
use dqcheck::equivalence::CheckConfig;
use dqcheck::report::{self, Report};
use dqcheck::{oracle, text};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated circuit with its input/output designation.
#[pyclass(frozen, skip_from_py_object, name = "Circuit", module = "dqcheck")]
struct PyCircuit {
    spec: CircuitSpec,
}

#[pymethods]
impl PyCircuit {
    #[staticmethod]
    fn parse(source: &str) -> PyResult<Self> {
        text::parse(source)
            .map(|spec| PyCircuit { spec })
            .map_err(value_err)
    }

    fn to_text(&self) -> String {
        text::print(&self.spec)
    }

    #[getter]
    fn qubits(&self) -> Vec<String> {
        self.spec.qubits.clone()
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.spec.inputs.clone()
    }

    #[getter]
    fn outputs(&self) -> Vec<String> {
        self.spec.outputs.clone()
    }

    #[getter]
    fn output_bits(&self) -> Vec<String> {
        self.spec.output_bits.clone()
    }

    #[getter]
    fn gate_count(&self) -> usize {
        self.spec.circuit.gate_count()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.spec == other.spec
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(qubits={:?}, gates={}, inputs={:?}, outputs={:?}, output_bits={:?})",
            self.spec.qubits,
            self.spec.circuit.gate_count(),
            self.spec.inputs,
            self.spec.outputs,
            self.spec.output_bits
        )
    }
}

fn wrap(spec: CircuitSpec) -> PyCircuit {
    PyCircuit { spec }
}

fn parse_mode(s: &str) -> PyResult<Mode> {
    match s {
        "m" => Ok(Mode::M),
        "q" => Ok(Mode::Q),
        _ => Err(PyValueError::new_err(format!("unknown mode `{s}`"))),
    }
}

fn parse_plan(s: &str) -> PyResult<PlanMode> {
    match s {
        "basic" => Ok(PlanMode::Sequential),
        "partitioned" => Ok(PlanMode::PerQubit),
        _ => Err(PyValueError::new_err(format!("unknown plan `{s}`"))),
    }
}

fn to_dict<'py>(py: Python<'py>, r: &Report) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (r.to_json(),))
}

#[pyfunction]
fn parse(source: &str) -> PyResult<PyCircuit> {
    PyCircuit::parse(source)
}

/// Checks two circuits; returns the report as a dict.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (a, b, mode = "m", plan = "partitioned", strict_q = false, eps = None, name = "check"))]
fn check<'py>(
    py: Python<'py>,
    a: &PyCircuit,
    b: &PyCircuit,
    mode: &str,
    plan: &str,
    strict_q: bool,
    eps: Option<f64>,
    name: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let r = if mode == "full" {
        report::run_full(name, &a.spec, &b.spec)
    } else {
        let mut cfg = CheckConfig::new(parse_mode(mode)?, parse_plan(plan)?);
        cfg.strict_q = strict_q;
        if let Some(e) = eps {
            if !(e.is_finite() && e > 0.0) {
                return Err(PyValueError::new_err("eps must be a positive number"));
            }
            cfg.eps = e;
        }
        let (sa, sb) = (a.spec.clone(), b.spec.clone());
        py.detach(move || report::run_check(name, &sa, &sb, &cfg))
    };
    to_dict(py, &r)
}

/// Runs a benchmark suite (`qft`, `pe`, `qec` or `all`) under the given
/// plans; returns one dict per row.
#[pyfunction]
#[pyo3(name = "bench", signature = (suite, max_n = 12, plans = None))]
fn run_bench<'py>(
    py: Python<'py>,
    suite: &str,
    max_n: usize,
    plans: Option<Vec<String>>,
) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let s = match suite {
        "qft" => Suite::Qft,
        "pe" => Suite::Pe,
        "qec" => Suite::Qec,
        "all" => Suite::All,
        _ => return Err(PyValueError::new_err(format!("unknown suite `{suite}`"))),
    };
    let plans = plans
        .unwrap_or_else(|| vec!["basic".into(), "partitioned".into()])
        .iter()
        .map(|p| parse_plan(p))
        .collect::<PyResult<Vec<_>>>()?;
    let rows = py.detach(move || {
        let mut rows = Vec::new();
        for pair in gen::suite(s, max_n) {
            for &plan in &plans {
                rows.push(report::run_pair(&pair, plan));
            }
        }
        rows
    });
    rows.iter().map(|r| to_dict(py, r)).collect()
}

/// Oracle verdict from dense simulation, for small circuits.
#[pyfunction]
#[pyo3(signature = (a, b, mode = "m"))]
fn oracle_equivalent(a: &PyCircuit, b: &PyCircuit, mode: &str) -> PyResult<bool> {
    let r = match mode {
        "full" => oracle::oracle_full_eq(&a.spec, &b.spec),
        _ => match parse_mode(mode)? {
            Mode::M => oracle::oracle_m_eq(&a.spec, &b.spec),
            Mode::Q => oracle::oracle_q_eq(&a.spec, &b.spec),
        },
    };
    r.map_err(value_err)
}

/// Probabilities of the output bit strings, first bit most significant.
#[pyfunction]
fn outcome_distribution(c: &PyCircuit) -> PyResult<Vec<f64>> {
    oracle::outcome_distribution(&c.spec).map_err(value_err)
}

#[pyfunction]
fn qft(n: usize) -> PyResult<PyCircuit> {
    gen::qft(n).map(wrap).map_err(value_err)
}

#[pyfunction]
fn dyn_qft(n: usize) -> PyResult<PyCircuit> {
    gen::dyn_qft(n).map(wrap).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (n, phi = None))]
fn pe(n: usize, phi: Option<f64>) -> PyResult<PyCircuit> {
    gen::pe(n, phi.unwrap_or_else(|| gen::default_phase(n)))
        .map(wrap)
        .map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (n, phi = None))]
fn dyn_pe(n: usize, phi: Option<f64>) -> PyResult<PyCircuit> {
    gen::dyn_pe(n, phi.unwrap_or_else(|| gen::default_phase(n)))
        .map(wrap)
        .map_err(value_err)
}

#[pyfunction]
fn teleport() -> PyCircuit {
    wrap(gen::teleport())
}

#[pyfunction]
fn swap_teleport() -> PyCircuit {
    wrap(gen::swap_teleport())
}

#[pymodule]
#[pyo3(name = "dqcheck")]
fn dqcheck_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(outcome_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(qft, m)?)?;
    m.add_function(wrap_pyfunction!(dyn_qft, m)?)?;
    m.add_function(wrap_pyfunction!(pe, m)?)?;
    m.add_function(wrap_pyfunction!(dyn_pe, m)?)?;
    m.add_function(wrap_pyfunction!(teleport, m)?)?;
    m.add_function(wrap_pyfunction!(swap_teleport, m)?)?;
    Ok(())
}
