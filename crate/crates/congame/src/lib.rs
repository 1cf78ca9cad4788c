//! Exact-computation laboratory for the connected (and ordinary) graph
//! coloring and marking games: a game engine, a memoized exhaustive solver,
//! explicit strategies with adversarial verification harnesses, and
//! generators for the graph families the games are studied on.

pub mod constructions;
pub mod engine;
pub mod graph;
pub mod outerplanar;
pub mod strategies;
pub mod report;
pub mod solver;

#[cfg(test)]
pub(crate) mod testutil;
