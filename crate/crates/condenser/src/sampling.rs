//! Deterministic random instances for property checks and self-tests.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{NodeSet, WeightedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph: a random tree plus a few extra edges, with node
/// measures and conductances in [0.5, 2] and positions in the unit square.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, node_count: usize, p: f64) -> WeightedGraph {
    assert!(node_count >= 1);
    let mut edges = Vec::new();
    for i in 1..node_count {
        let parent = rng.gen_range(0..i);
        edges.push((parent, i, rng.gen_range(0.5..2.0)));
    }
    let extra = node_count / 2;
    for _ in 0..extra {
        let a = rng.gen_range(0..node_count);
        let b = rng.gen_range(0..node_count);
        if a != b && !edges.iter().any(|&(x, y, _)| {
            (x, y) == (a.min(b), a.max(b)) || (y, x) == (a.min(b), a.max(b))
        }) {
            edges.push((a.min(b), a.max(b), rng.gen_range(0.5..2.0)));
        }
    }
    let measures = (0..node_count).map(|_| rng.gen_range(0.5..2.0)).collect();
    let positions = (0..node_count)
        .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
        .collect();
    WeightedGraph::new(measures, edges, Some(positions), p).expect("tree construction is valid")
}

/// Random nonempty subset of the given size bound.
fn random_subset(rng: &mut ChaCha8Rng, from: &NodeSet, max_len: usize) -> NodeSet {
    let pool: Vec<usize> = from.iter().collect();
    let len = rng.gen_range(1..=max_len.min(pool.len()));
    let mut picked = Vec::with_capacity(len);
    for _ in 0..len {
        picked.push(pool[rng.gen_range(0..pool.len())]);
    }
    NodeSet::from_indices(picked)
}

/// Random (E₁, E₂, Ω) triples with E₁, E₂ ⊆ Ω and Ω a proper subset, for
/// the capacity axiom checker.
pub fn random_condenser_triples(
    rng: &mut ChaCha8Rng,
    graph: &WeightedGraph,
    count: usize,
) -> Vec<(NodeSet, NodeSet, NodeSet)> {
    let n = graph.node_count();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let omega_len = rng.gen_range((n / 2).max(2)..n.max(3)).min(n - 1);
        let omega = random_subset(rng, &NodeSet::full(n), omega_len.max(2));
        let e1 = random_subset(rng, &omega, 3.max(omega.len() / 2));
        let e2 = random_subset(rng, &omega, 3.max(omega.len() / 2));
        out.push((e1, e2, omega));
    }
    out
}

/// Random connected Ω containing `x0` with a nonempty complement: a
/// breadth-limited random walk region.
pub fn random_domain_around(
    rng: &mut ChaCha8Rng,
    graph: &WeightedGraph,
    x0: usize,
) -> NodeSet {
    let n = graph.node_count();
    let target = rng.gen_range((n / 3).max(1)..(4 * n / 5).max(2));
    let mut in_set = vec![false; n];
    in_set[x0] = true;
    let mut frontier = vec![x0];
    let mut picked = vec![x0];
    while picked.len() < target && !frontier.is_empty() {
        let idx = rng.gen_range(0..frontier.len());
        let node = frontier.swap_remove(idx);
        for &(j, _) in graph.neighbors(node) {
            if !in_set[j] && picked.len() < target {
                in_set[j] = true;
                picked.push(j);
                frontier.push(j);
            }
        }
    }
    NodeSet::from_indices(picked)
}
