use super::{Graph, IndexKey, RootedIndex};
use crate::nfunc::EdgeGeometry;
use crate::{EdgeId, NodeId};

/// Length-measure data for one shortest-path tree edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeEdgeProfile {
    pub edge: EdgeId,
    pub far_node: NodeId,
    /// `w_e`, `λ(γ_e)` and `λ(G)` for this edge.
    pub geometry: EdgeGeometry,
}

/// Per tree edge: its length, the length measure of the part of the graph
/// hanging below it (`λ(γ_e)`), and the total length `λ(G)` of the graph.
#[derive(Debug, Clone)]
pub struct EdgeProfile {
    key: IndexKey,
    lambda_total: f64,
    node_count: usize,
    edge_count: usize,
    /// Indexed by edge id; `None` for non-tree edges.
    by_edge: Vec<Option<TreeEdgeProfile>>,
}

impl EdgeProfile {
    /// Computes `λ(γ_e)` for all tree edges in O(|V| + |E|).
    ///
    /// Each graph edge `⟨a, b⟩` is split at the point where routing to the
    /// root through `a` and through `b` costs the same. The part on `a`'s side
    /// belongs to `Λ(a)` (and so to every `Λ(x)` for `x` on the root path of
    /// `a`); a bottom-up pass then sums these loads over subtrees.
    pub fn new(g: &Graph, idx: &RootedIndex) -> Self {
        assert_eq!(
            g.fingerprint(),
            idx.key().graph,
            "rooted index was built on a different graph"
        );
        let dist = idx.dist();
        let mut load = vec![0.0; g.node_count()];
        for e in g.edges() {
            let w = e.weight;
            let split = ((dist[e.v] + w - dist[e.u]) / (2.0 * w)).clamp(0.0, 1.0);
            load[e.u] += split * w;
            load[e.v] += (1.0 - split) * w;
        }

        let mut below = vec![0.0; g.node_count()];
        for &v in idx.order() {
            below[v] += load[v];
            if let Some(p) = idx.parent(v) {
                below[p] += below[v];
            }
        }

        let lambda_total = g.total_length();
        let mut by_edge = vec![None; g.edge_count()];
        for &v in idx.order() {
            if let Some(e) = idx.parent_edge(v) {
                let weight = g.edge(e).weight;
                // rounding in the subtree sums can push this a hair past the bound
                let lambda_gamma = below[v].clamp(0.0, (lambda_total - weight).max(0.0));
                by_edge[e] = Some(TreeEdgeProfile {
                    edge: e,
                    far_node: v,
                    geometry: EdgeGeometry {
                        weight,
                        lambda_gamma,
                        lambda_total,
                    },
                });
            }
        }

        Self {
            key: idx.key(),
            lambda_total,
            node_count: g.node_count(),
            edge_count: g.edge_count(),
            by_edge,
        }
    }

    pub fn key(&self) -> IndexKey {
        self.key
    }

    /// `λ(G)`, the sum of all edge lengths.
    pub fn lambda_total(&self) -> f64 {
        self.lambda_total
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn get(&self, edge: EdgeId) -> Option<&TreeEdgeProfile> {
        self.by_edge.get(edge).and_then(Option::as_ref)
    }

    /// All tree edges in edge-id order.
    pub fn tree_edges(&self) -> impl Iterator<Item = &TreeEdgeProfile> {
        self.by_edge.iter().filter_map(Option::as_ref)
    }
}
