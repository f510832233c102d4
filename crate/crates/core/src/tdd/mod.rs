//! Tensor decision diagrams over Boolean indices.

mod index;
mod manager;
mod weight;

pub use index::{normalize_indices, IndexId, IndexKind, Level};
pub use manager::{Edge, Manager, Node, NodeId, Tdd, DEFAULT_DENSE_LIMIT};
pub use weight::{c, WeightKey, DEFAULT_GRID, ONE, ZERO};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TddError {
    #[error("dense conversion over {requested} indices exceeds the limit of {limit}")]
    DenseLimit { requested: usize, limit: usize },
    #[error("expected {expected} dense values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("index order violation: {0}")]
    IndexOrder(String),
    #[error("diagrams belong to different managers")]
    ForeignManager,
}

/// Contracts `parts` left to right. An index listed in `summed` is summed
/// out as soon as no later part carries it; every other index stays open.
pub fn contract_network(m: &mut Manager, parts: &[Tdd], summed: &[IndexId]) -> Tdd {
    contract_network_with(m, parts, summed, |_, _| {})
}

/// As [`contract_network`], calling `on_step` with every intermediate result.
pub fn contract_network_with(
    m: &mut Manager,
    parts: &[Tdd],
    summed: &[IndexId],
    mut on_step: impl FnMut(&Manager, &Tdd),
) -> Tdd {
    use rustc_hash::FxHashMap;
    let mut last_use: FxHashMap<Level, usize> = FxHashMap::default();
    for (k, p) in parts.iter().enumerate() {
        for i in p.indices() {
            last_use.insert(i.level(), k);
        }
    }
    let summed: Vec<Level> = summed.iter().map(|i| i.level()).collect();
    let mut acc = m.constant(ONE);
    for (k, p) in parts.iter().enumerate() {
        let done: Vec<IndexId> = acc
            .indices()
            .iter()
            .chain(p.indices())
            .filter(|i| summed.contains(&i.level()) && last_use[&i.level()] == k)
            .cloned()
            .collect();
        acc = m.contract(&acc, p, &done);
        on_step(m, &acc);
    }
    acc
}
