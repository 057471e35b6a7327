//! CONGEST-model simulation with expander decomposition, distributed Nibble,
//! and triangle / small-subgraph enumeration, each paired with an exact
//! sequential oracle.

pub mod graph;
pub mod math;
pub mod nibble;
pub mod decomposition;
pub mod rng;
pub mod runtime;
pub mod routing;
pub mod triangle;
pub mod report;
