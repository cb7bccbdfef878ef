//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use gsim_core::{EdgeFlow, EdgeProfile, Graph, Measure, RootedIndex};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree over `n` nodes plus up to `extra` chords, weights
/// uniform in `[0.1, 2]`.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut edges = Vec::with_capacity(n - 1 + extra);
    let mut seen = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        seen.insert((u, v));
        edges.push((u, v, rng.random_range(0.1..=2.0)));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let key = (u.min(v), u.max(v));
        if u != v && seen.insert(key) {
            edges.push((key.0, key.1, rng.random_range(0.1..=2.0)));
        }
    }
    Graph::new(n, None, edges).expect("generated graph is valid")
}

pub fn tree(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    connected_graph(rng, n, 0)
}

/// Measure on `1..=max_support` distinct random nodes with random masses.
pub fn measure(rng: &mut ChaCha8Rng, n: usize, max_support: usize) -> Measure {
    let k = rng.random_range(1..=max_support.min(n));
    let nodes = sample(rng, n, k).into_vec();
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Measure::new(nodes.into_iter().zip(raw.iter().map(|m| m / total)).collect())
        .expect("generated measure is valid")
}

/// One graph with a rooted profile and a flow between two random measures.
pub struct Instance {
    pub graph: Graph,
    pub index: RootedIndex,
    pub profile: EdgeProfile,
    pub mu: Measure,
    pub nu: Measure,
    pub flow: EdgeFlow,
}

impl Instance {
    pub fn new(graph: Graph, root: usize, mu: Measure, nu: Measure) -> Self {
        let index = RootedIndex::new(&graph, root).unwrap();
        let profile = EdgeProfile::new(&graph, &index);
        let flow = EdgeFlow::new(&index, &mu, &nu).unwrap();
        Self {
            graph,
            index,
            profile,
            mu,
            nu,
            flow,
        }
    }
}

/// The standard instance family: connected graphs with 8 to 64 nodes and
/// sparse measures.
pub fn instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(8..=64);
            let extra = r.random_range(0..=n);
            let g = connected_graph(&mut r, n, extra);
            let root = r.random_range(0..n);
            let mu = measure(&mut r, n, 6);
            let nu = measure(&mut r, n, 6);
            Instance::new(g, root, mu, nu)
        })
        .collect()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
