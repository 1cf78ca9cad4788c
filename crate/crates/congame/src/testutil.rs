//! Shared helpers for unit tests: seeded rngs and small-graph generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{is_connected, Graph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn below(rng: &mut ChaCha8Rng, bound: u32) -> u32 {
    rng.gen_range(0..bound)
}

/// Erdos-Renyi-style random graph with edge probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Rejection-samples a connected random graph, densifying on failure.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut p = 0.4;
    loop {
        let g = random_graph(rng, n, p);
        if is_connected(&g) {
            return g;
        }
        p = (p + 0.1).min(0.95);
    }
}

/// All labeled graphs on n vertices, by edge mask.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(u32, u32)> =
        (0..n as u32).flat_map(|u| (u + 1..n as u32).map(move |v| (u, v))).collect();
    let total: u64 = 1 << pairs.len();
    (0..total).map(move |mask| {
        let edges: Vec<(u32, u32)> = pairs
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        Graph::from_edges(n, &edges).unwrap()
    })
}

pub fn all_connected_graphs(n: usize) -> impl Iterator<Item = Graph> {
    all_graphs(n).filter(is_connected)
}
