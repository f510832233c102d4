//! Dynamic circuit model: gates, measure-and-dispatch steps, and the
//! wrapper fixing initial states and principal inputs/outputs.

mod gate;
mod ir;
mod lower;
mod validate;

use std::fmt;

use thiserror::Error;

pub use gate::{format_param, Gate, LIBRARY};
pub use ir::{
    BranchStep, CircuitSpec, Conditional, DynCircuit, InitState, MeasureStep, Mode, Verdict,
    Witness,
};
pub use lower::{gates_unitary, lower_controls};
pub use validate::validate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{gate}` does not take {params} parameter(s) and {qubits} qubit(s)")]
    GateArity {
        gate: String,
        params: usize,
        qubits: usize,
    },
    #[error("gate `{gate}` names qubit `{qubit}` twice")]
    RepeatedQubit { gate: String, qubit: String },
    #[error("invalid circuit:\n{}", join_errors(.0))]
    Invalid(Vec<ValidationError>),
}

fn join_errors(errs: &[ValidationError]) -> String {
    errs.iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// One violated well-formedness rule and where it was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    /// Path to the offending step, e.g. `step 2 / branch 1 / step 0`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.location, self.message)
        }
    }
}
