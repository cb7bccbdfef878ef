use std::collections::HashMap;

use super::{GraphError, IndexKey, RootedIndex};
use crate::{EdgeId, NodeId};

/// Inputs whose total mass is within this of 1 are renormalized.
const RENORMALIZE_WINDOW: f64 = 1e-9;
/// Flow entries smaller than this in magnitude are dropped.
const FLOW_EPS: f64 = 1e-15;

/// Probability measure with finite support on graph nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    support: Vec<(NodeId, f64)>,
}

impl Measure {
    pub fn new(support: Vec<(NodeId, f64)>) -> Result<Self, GraphError> {
        if support.is_empty() {
            return Err(GraphError::EmptyInput);
        }
        let mut seen = std::collections::HashSet::with_capacity(support.len());
        for &(node, mass) in &support {
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(GraphError::InvalidMass { node, mass });
            }
            if !seen.insert(node) {
                return Err(GraphError::DuplicateSupport { node });
            }
        }
        let sum: f64 = support.iter().map(|&(_, m)| m).sum();
        if (sum - 1.0).abs() > RENORMALIZE_WINDOW {
            return Err(GraphError::MassSum { sum });
        }
        let support = if sum == 1.0 {
            support
        } else {
            support.into_iter().map(|(v, m)| (v, m / sum)).collect()
        };
        Ok(Self { support })
    }

    pub fn dirac(node: NodeId) -> Self {
        Self {
            support: vec![(node, 1.0)],
        }
    }

    /// Uniform mass over the given distinct nodes.
    pub fn uniform(nodes: &[NodeId]) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::EmptyInput);
        }
        let m = 1.0 / nodes.len() as f64;
        Self::new(nodes.iter().map(|&v| (v, m)).collect())
    }

    pub fn support(&self) -> &[(NodeId, f64)] {
        &self.support
    }

    pub fn check_nodes(&self, node_count: usize) -> Result<(), GraphError> {
        match self.support.iter().find(|&&(v, _)| v >= node_count) {
            Some(&(node, _)) => Err(GraphError::InvalidSupportNode { node, node_count }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubtreeEntry {
    pub edge: EdgeId,
    pub far_node: NodeId,
    /// `μ(γ_e)`: mass of the support nodes whose root path contains the edge.
    pub mass: f64,
}

/// Sparse `e ↦ μ(γ_e)` over tree edges, sorted by edge id. Edges carrying no
/// mass are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeMasses {
    key: IndexKey,
    entries: Vec<SubtreeEntry>,
}

impl SubtreeMasses {
    /// One bottom-up pass restricted to the nodes lying on root paths of the
    /// support.
    pub fn new(idx: &RootedIndex, m: &Measure) -> Result<Self, GraphError> {
        m.check_nodes(idx.node_count())?;
        let mut active = Vec::new();
        let mut mass: HashMap<NodeId, f64> = HashMap::with_capacity(m.support().len() * 4);
        for &(v, _) in m.support() {
            let mut u = v;
            while let std::collections::hash_map::Entry::Vacant(slot) = mass.entry(u) {
                slot.insert(0.0);
                active.push(u);
                match idx.parent(u) {
                    Some(p) => u = p,
                    None => break,
                }
            }
        }
        for &(v, w) in m.support() {
            *mass.get_mut(&v).expect("support registered") += w;
        }
        // Children precede parents in index order.
        active.sort_unstable_by_key(|&v| idx.position(v));

        let mut entries = Vec::with_capacity(active.len());
        for &v in &active {
            let Some(e) = idx.parent_edge(v) else {
                continue;
            };
            let below = mass[&v];
            let p = idx.parent(v).expect("tree edge without parent");
            *mass.get_mut(&p).expect("ancestor registered") += below;
            if below != 0.0 {
                entries.push(SubtreeEntry {
                    edge: e,
                    far_node: v,
                    mass: below,
                });
            }
        }
        entries.sort_unstable_by_key(|s| s.edge);
        Ok(Self {
            key: idx.key(),
            entries,
        })
    }

    pub fn key(&self) -> IndexKey {
        self.key
    }

    pub fn entries(&self) -> &[SubtreeEntry] {
        &self.entries
    }

    pub fn get(&self, edge: EdgeId) -> Option<f64> {
        self.entries
            .binary_search_by_key(&edge, |s| s.edge)
            .ok()
            .map(|i| self.entries[i].mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEntry {
    pub edge: EdgeId,
    pub far_node: NodeId,
    /// `h̄(e) = μ(γ_e) − ν(γ_e)`.
    pub value: f64,
}

/// Sparse edge flow `h̄(e) = μ(γ_e) − ν(γ_e)` over the tree edges that lie on
/// a root path of some support point of either measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFlow {
    key: IndexKey,
    entries: Vec<FlowEntry>,
}

impl EdgeFlow {
    pub fn new(idx: &RootedIndex, mu: &Measure, nu: &Measure) -> Result<Self, GraphError> {
        let a = SubtreeMasses::new(idx, mu)?;
        let b = SubtreeMasses::new(idx, nu)?;
        Self::from_masses(&a, &b)
    }

    /// Merges two precomputed subtree-mass maps.
    pub fn from_masses(mu: &SubtreeMasses, nu: &SubtreeMasses) -> Result<Self, GraphError> {
        if mu.key != nu.key {
            return Err(GraphError::MismatchedIndex);
        }
        let (xs, ys) = (&mu.entries, &nu.entries);
        let mut entries = Vec::with_capacity(xs.len().max(ys.len()));
        let (mut i, mut j) = (0, 0);
        let mut push = |edge, far_node, value: f64| {
            if value.abs() >= FLOW_EPS {
                entries.push(FlowEntry {
                    edge,
                    far_node,
                    value,
                });
            }
        };
        while i < xs.len() || j < ys.len() {
            let take_x = j >= ys.len() || (i < xs.len() && xs[i].edge < ys[j].edge);
            let take_y = i >= xs.len() || (j < ys.len() && ys[j].edge < xs[i].edge);
            if take_x {
                push(xs[i].edge, xs[i].far_node, xs[i].mass);
                i += 1;
            } else if take_y {
                push(ys[j].edge, ys[j].far_node, -ys[j].mass);
                j += 1;
            } else {
                push(xs[i].edge, xs[i].far_node, xs[i].mass - ys[j].mass);
                i += 1;
                j += 1;
            }
        }
        Ok(Self {
            key: mu.key,
            entries,
        })
    }

    pub fn key(&self) -> IndexKey {
        self.key
    }

    pub fn entries(&self) -> &[FlowEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, edge: EdgeId) -> Option<f64> {
        self.entries
            .binary_search_by_key(&edge, |f| f.edge)
            .ok()
            .map(|i| self.entries[i].value)
    }
}
