//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use graphheat::graph::{EdgeEntry, NodeEntry};
use graphheat::{Graph, NodeField, ProblemSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph on `n` nodes: a random spanning tree plus extra edges,
/// with measures and weights drawn from [0.5, 2].
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let nodes: Vec<NodeEntry> = (0..n)
        .map(|i| NodeEntry {
            id: format!("v{i}"),
            mu: rng.gen_range(0.5..2.0),
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        pairs.push((order[k].min(parent), order[k].max(parent)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !pairs.contains(&(i, j)) && rng.gen_bool(0.25) {
                pairs.push((i, j));
            }
        }
    }
    let edges: Vec<EdgeEntry> = pairs
        .into_iter()
        .map(|(i, j)| EdgeEntry {
            a: format!("v{i}"),
            b: format!("v{j}"),
            w: rng.gen_range(0.5..2.0),
        })
        .collect();
    Graph::new(&nodes, &edges).unwrap()
}

/// a ≥ 0 with some zero entries but never identically zero.
pub fn random_potential(rng: &mut ChaCha8Rng, g: &Graph) -> NodeField {
    let mut a: Vec<f64> = (0..g.len())
        .map(|_| {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.1..2.0)
            }
        })
        .collect();
    if a.iter().all(|&v| v == 0.0) {
        let i = rng.gen_range(0..a.len());
        a[i] = rng.gen_range(0.1..2.0);
    }
    a.into()
}

pub fn random_field(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> NodeField {
    (0..n)
        .map(|_| rng.gen_range(lo..hi))
        .collect::<Vec<_>>()
        .into()
}

/// Random graph with 2..=max_n nodes, random potential, p ∈ [1.5, 4], u₀ = 0.
pub fn random_problem(rng: &mut ChaCha8Rng, max_n: usize) -> ProblemSpec {
    let n = rng.gen_range(2..=max_n);
    let g = random_graph(rng, n);
    let a = random_potential(rng, &g);
    let p = rng.gen_range(1.5..4.0);
    ProblemSpec::new(g.clone(), a, p, NodeField::zeros(&g)).unwrap()
}
