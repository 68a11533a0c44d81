//! Shared fixtures for the benchmarks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dpmst::{generate, Graph, WeightVector};

pub fn grid(side: usize) -> Graph {
    generate::grid(side, side).unwrap()
}

pub fn clique(n: usize) -> Graph {
    generate::clique(n).unwrap()
}

pub fn sparse(n: usize, extra: usize) -> Graph {
    generate::tree_plus_k(n, extra, 7).unwrap()
}

pub fn random_weights(graph: &Graph, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightVector::new((0..graph.edge_count()).map(|_| rng.gen::<f64>()).collect()).unwrap()
}
