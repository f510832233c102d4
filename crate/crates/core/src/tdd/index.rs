use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// Position in the global index order. Larger levels sit nearer the root;
/// level 0 is reserved for the terminal node.
pub type Level = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexKind {
    QuantumWire,
    /// Final wire of a qubit that is discarded at the end of the circuit.
    Discarded,
    PrincipalOutput,
    ClassicalOutcome,
}

/// A named Boolean tensor index with its rank in the manager's order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexId {
    name: Arc<str>,
    level: Level,
    kind: IndexKind,
}

impl IndexId {
    pub(crate) fn new(name: &str, level: Level, kind: IndexKind) -> Self {
        IndexId {
            name: Arc::from(name),
            level,
            kind,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }
}

impl fmt::Debug for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.level)
    }
}

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Sorts indices root-first and removes duplicates.
pub fn normalize_indices(indices: &mut Vec<IndexId>) {
    indices.sort_by_key(|i| std::cmp::Reverse(i.level));
    indices.dedup_by(|a, b| a.level == b.level);
}
