// index loops read closer to the math in the simulators and generators
#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod circuit;
pub mod encoding;
pub mod equivalence;
pub mod logic;
pub mod oracle;
pub mod report;
pub mod tdd;
pub mod text;
