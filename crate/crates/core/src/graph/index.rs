use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Graph, GraphError, IndexKey};
use crate::{EdgeId, NodeId};

/// Relaxations whose candidate distance is within this of the current label
/// count as ties; ties go to the predecessor with the smaller node id.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Frontier {
    dist: f64,
    node: NodeId,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // min-heap on distance, then node id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source labels: distances plus the predecessor tree, and the order in
/// which nodes were settled.
struct Labels {
    dist: Vec<f64>,
    parent: Vec<Option<NodeId>>,
    parent_edge: Vec<Option<EdgeId>>,
    settled: Vec<NodeId>,
}

fn dijkstra(g: &Graph, source: NodeId) -> Labels {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut settled = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();

    dist[source] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        node: source,
    });
    while let Some(Frontier { dist: d, node: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        settled.push(u);
        for &(v, e) in g.neighbors(u) {
            if done[v] {
                continue;
            }
            let cand = d + g.edge(e).weight;
            let improves = cand < dist[v] - TIE_EPS;
            let ties = !improves && (cand - dist[v]).abs() <= TIE_EPS && parent[v].is_some_and(|p| u < p);
            if improves || ties {
                dist[v] = cand;
                parent[v] = Some(u);
                parent_edge[v] = Some(e);
                heap.push(Frontier { dist: cand, node: v });
            }
        }
    }
    Labels {
        dist,
        parent,
        parent_edge,
        settled,
    }
}

/// Shortest-path tree of a graph from a fixed root.
///
/// `order` lists every node in nonincreasing distance from the root, so a
/// forward pass over it visits every child before its parent.
#[derive(Debug, Clone)]
pub struct RootedIndex {
    key: IndexKey,
    root: NodeId,
    dist: Vec<f64>,
    parent: Vec<Option<NodeId>>,
    parent_edge: Vec<Option<EdgeId>>,
    order: Vec<NodeId>,
    position: Vec<usize>,
    far_node_of_edge: Vec<Option<NodeId>>,
}

impl RootedIndex {
    pub fn new(g: &Graph, root: NodeId) -> Result<Self, GraphError> {
        if root >= g.node_count() {
            return Err(GraphError::InvalidRoot {
                root,
                node_count: g.node_count(),
            });
        }
        let labels = dijkstra(g, root);
        let mut order = labels.settled;
        order.reverse();
        let mut position = vec![0; g.node_count()];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut far_node_of_edge = vec![None; g.edge_count()];
        for (v, e) in labels.parent_edge.iter().enumerate() {
            if let Some(e) = e {
                far_node_of_edge[*e] = Some(v);
            }
        }
        Ok(Self {
            key: IndexKey {
                graph: g.fingerprint(),
                root,
            },
            root,
            dist: labels.dist,
            parent: labels.parent,
            parent_edge: labels.parent_edge,
            order,
            position,
            far_node_of_edge,
        })
    }

    pub fn key(&self) -> IndexKey {
        self.key
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.dist.len()
    }

    pub fn dist(&self) -> &[f64] {
        &self.dist
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn parent_edge(&self, v: NodeId) -> Option<EdgeId> {
        self.parent_edge[v]
    }

    /// Nodes in bottom-up order (farthest first).
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// Position of `v` in [`Self::order`].
    pub fn position(&self, v: NodeId) -> usize {
        self.position[v]
    }

    /// For a tree edge, the endpoint farther from the root; `None` for non-tree edges.
    pub fn far_node(&self, e: EdgeId) -> Option<NodeId> {
        self.far_node_of_edge[e]
    }

    /// Edge ids on the tree path from the root to `v`, from `v` upwards.
    pub fn root_path_edges(&self, mut v: NodeId) -> Vec<EdgeId> {
        let mut out = Vec::new();
        while let Some(e) = self.parent_edge[v] {
            out.push(e);
            v = self.parent[v].expect("parent edge without parent");
        }
        out
    }
}

/// Root drawn uniformly from `0..node_count` by a seeded generator.
pub fn seeded_root(node_count: usize, seed: u64) -> Result<NodeId, GraphError> {
    use rand::{Rng, SeedableRng};
    if node_count == 0 {
        return Err(GraphError::Empty);
    }
    Ok(rand_chacha::ChaCha8Rng::seed_from_u64(seed).random_range(0..node_count))
}

/// Exact shortest-path distances between the listed nodes, one single-source
/// search per node. The result is symmetrized from the upper triangle.
pub fn pairwise_distances(g: &Graph, nodes: &[NodeId]) -> Result<Vec<Vec<f64>>, GraphError> {
    for &v in nodes {
        if v >= g.node_count() {
            return Err(GraphError::InvalidSupportNode {
                node: v,
                node_count: g.node_count(),
            });
        }
    }
    let k = nodes.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        let labels = dijkstra(g, nodes[i]);
        for j in (i + 1)..k {
            let d = labels.dist[nodes[j]];
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    Ok(out)
}
