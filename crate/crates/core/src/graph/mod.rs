//! Graph carrier, shortest-path rooting, length-measure profiles of tree edges,
//! node-supported measures and their subtree masses.

mod construct;
mod index;
pub mod io;
mod measure;
mod profile;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::{EdgeId, NodeId};

pub use construct::{build_random_graph, farthest_point_clustering, Clustering, GraphMode};
pub use index::{pairwise_distances, seeded_root, RootedIndex};
pub use measure::{EdgeFlow, FlowEntry, Measure, SubtreeEntry, SubtreeMasses};
pub use profile::{EdgeProfile, TreeEdgeProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge {edge} references node {node}, but the graph has {node_count} nodes")]
    InvalidNode {
        edge: usize,
        node: usize,
        node_count: usize,
    },
    #[error("edge {edge} is a self-loop on node {node}")]
    SelfLoop { edge: usize, node: NodeId },
    #[error("edge {edge} has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { edge: usize, weight: f64 },
    #[error("duplicate undirected edge ({u}, {v})")]
    DuplicateEdge { u: NodeId, v: NodeId },
    #[error("graph is disconnected: {reachable} of {node_count} nodes reachable from node 0")]
    DisconnectedGraph { reachable: usize, node_count: usize },
    #[error("coordinate row {row} has dimension {got}, expected {expected}")]
    CoordinateDimension {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("invalid root {root} for a graph with {node_count} nodes")]
    InvalidRoot { root: NodeId, node_count: usize },
    #[error("support node {node} is not a node of the graph ({node_count} nodes)")]
    InvalidSupportNode { node: NodeId, node_count: usize },
    #[error("support node {node} appears more than once")]
    DuplicateSupport { node: NodeId },
    #[error("mass {mass} at node {node} is negative or not finite")]
    InvalidMass { node: NodeId, mass: f64 },
    #[error("masses sum to {sum}, expected 1")]
    MassSum { sum: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("need at least {needed} centroids, got {got}")]
    TooFewCentroids { needed: usize, got: usize },
    #[error("index and measure data come from different graphs or roots")]
    MismatchedIndex,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

impl Edge {
    /// The endpoint opposite to `node`.
    pub fn other(&self, node: NodeId) -> NodeId {
        if self.u == node {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected, connected graph with positive edge lengths.
#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    coords: Option<Vec<Vec<f64>>>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    fingerprint: u64,
}

impl Graph {
    /// Validates the edge list and checks connectivity.
    pub fn new(
        node_count: usize,
        coords: Option<Vec<Vec<f64>>>,
        edges: Vec<(NodeId, NodeId, f64)>,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        if let Some(rows) = &coords {
            if rows.len() != node_count {
                return Err(GraphError::CoordinateDimension {
                    row: rows.len(),
                    got: rows.len(),
                    expected: node_count,
                });
            }
            let dim = rows[0].len();
            if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
                return Err(GraphError::CoordinateDimension {
                    row,
                    got: r.len(),
                    expected: dim,
                });
            }
        }

        let mut adjacency = vec![Vec::new(); node_count];
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (id, &(u, v, weight)) in edges.iter().enumerate() {
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::InvalidNode {
                        edge: id,
                        node,
                        node_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { edge: id, node: u });
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(GraphError::NonPositiveWeight { edge: id, weight });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge { u: key.0, v: key.1 });
            }
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
            out.push(Edge { u, v, weight });
        }

        let reachable = count_reachable(&adjacency);
        if reachable != node_count {
            return Err(GraphError::DisconnectedGraph {
                reachable,
                node_count,
            });
        }

        let fingerprint = fingerprint(node_count, &out);
        Ok(Self {
            node_count,
            coords,
            edges: out,
            adjacency,
            fingerprint,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    /// Neighbors of `node` together with the connecting edge id.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[node]
    }

    /// Total length of all edges, tree and non-tree.
    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.node_count
    }

    /// Content hash of the node count and edge list.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

fn count_reachable(adjacency: &[Vec<(NodeId, EdgeId)>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &(v, _) in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count
}

fn fingerprint(node_count: usize, edges: &[Edge]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update((node_count as u64).to_le_bytes());
    for e in edges {
        hasher.update((e.u as u64).to_le_bytes());
        hasher.update((e.v as u64).to_le_bytes());
        hasher.update(e.weight.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// Identifies the (graph, root) pair an index was built for, so that profiles
/// and flows from different indexes are never mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexKey {
    pub graph: u64,
    pub root: NodeId,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_total_length() {
        let g = Graph::new(3, None, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(g.total_length(), 2.0);
        assert!(g.is_tree());
    }

    #[test]
    fn rejects_negative_weight() {
        let err = Graph::new(2, None, vec![(0, 1, -1.0)]).unwrap_err();
        assert!(matches!(err, GraphError::NonPositiveWeight { edge: 0, .. }));
        let err = Graph::new(2, None, vec![(0, 1, f64::NAN)]).unwrap_err();
        assert!(matches!(err, GraphError::NonPositiveWeight { .. }));
    }

    #[test]
    fn rejects_disconnected() {
        let err = Graph::new(4, None, vec![(0, 1, 1.0), (2, 3, 1.0)]).unwrap_err();
        assert_eq!(
            err,
            GraphError::DisconnectedGraph {
                reachable: 2,
                node_count: 4
            }
        );
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert!(matches!(
            Graph::new(2, None, vec![(1, 1, 1.0)]),
            Err(GraphError::SelfLoop { .. })
        ));
        assert!(matches!(
            Graph::new(2, None, vec![(0, 1, 1.0), (1, 0, 2.0)]),
            Err(GraphError::DuplicateEdge { u: 0, v: 1 })
        ));
        assert!(matches!(
            Graph::new(2, None, vec![(0, 5, 1.0)]),
            Err(GraphError::InvalidNode { node: 5, .. })
        ));
    }

    #[test]
    fn fingerprint_depends_on_weights() {
        let a = Graph::new(2, None, vec![(0, 1, 1.0)]).unwrap();
        let b = Graph::new(2, None, vec![(0, 1, 1.5)]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(
            a.fingerprint(),
            Graph::new(2, None, vec![(0, 1, 1.0)]).unwrap().fingerprint()
        );
    }
}
