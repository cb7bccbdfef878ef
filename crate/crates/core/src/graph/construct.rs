//! Point cloud to graph: greedy k-center clustering and random sparse graphs
//! over the centers.

use petgraph::unionfind::UnionFind;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphError};
use crate::NodeId;

/// How many random edges to draw for `M` centroids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphMode {
    /// `⌈M ln M⌉` edges.
    Log,
    /// `⌈M^{3/2}⌉` edges.
    Sqrt,
}

impl GraphMode {
    /// Number of edges sampled before components are joined, capped at the
    /// number of node pairs.
    pub fn edge_budget(self, m: usize) -> usize {
        let mf = m as f64;
        let raw = match self {
            GraphMode::Log => (mf * mf.ln()).ceil(),
            GraphMode::Sqrt => mf.powf(1.5).ceil(),
        };
        let pairs = m * m.saturating_sub(1) / 2;
        (raw.max(0.0) as usize).min(pairs)
    }
}

impl std::str::FromStr for GraphMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(GraphMode::Log),
            "sqrt" => Ok(GraphMode::Sqrt),
            other => Err(format!("unknown graph mode `{other}` (expected log or sqrt)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Indices into the input point list, in the order they were chosen.
    pub centers: Vec<usize>,
    /// For each input point, the ordinal (into `centers`) of its nearest center.
    pub assignment: Vec<usize>,
}

impl Clustering {
    pub fn centroids(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.centers.iter().map(|&i| points[i].clone()).collect()
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Greedy farthest-point selection of at most `m` centers.
///
/// The first center is drawn from `seed`; each next one is the point farthest
/// from the chosen set (lowest index on ties). Selection stops early once every
/// point coincides with a center.
pub fn farthest_point_clustering(
    points: &[Vec<f64>],
    m: usize,
    seed: u64,
) -> Result<Clustering, GraphError> {
    if points.is_empty() || m == 0 {
        return Err(GraphError::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.random_range(0..points.len());
    let mut centers = vec![first];
    let mut nearest: Vec<f64> = points.iter().map(|p| euclidean(p, &points[first])).collect();
    let mut assignment = vec![0usize; points.len()];

    while centers.len() < m {
        let (far, &d) = nearest
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        if d <= 0.0 {
            break;
        }
        let ordinal = centers.len();
        centers.push(far);
        for (i, p) in points.iter().enumerate() {
            let dist = euclidean(p, &points[far]);
            // strict comparison keeps the earlier center on ties
            if dist < nearest[i] {
                nearest[i] = dist;
                assignment[i] = ordinal;
            }
        }
    }
    Ok(Clustering {
        centers,
        assignment,
    })
}

/// Random sparse graph over `centroids` with Euclidean edge lengths.
///
/// Draws `mode.edge_budget(M)` distinct pairs uniformly without replacement;
/// if that leaves `n_c > 1` components, adds `n_c − 1` edges between randomly
/// chosen nodes of distinct components so the result is connected.
pub fn build_random_graph(
    centroids: &[Vec<f64>],
    mode: GraphMode,
    seed: u64,
) -> Result<Graph, GraphError> {
    let m = centroids.len();
    if m < 2 {
        return Err(GraphError::TooFewCentroids { needed: 2, got: m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = m * (m - 1) / 2;
    let mut ranks = index::sample(&mut rng, pairs, mode.edge_budget(m)).into_vec();
    ranks.sort_unstable();

    let mut pairs_out: Vec<(NodeId, NodeId)> = ranks.iter().map(|&r| unrank_pair(m, r)).collect();

    let mut uf = UnionFind::<usize>::new(m);
    for &(u, v) in &pairs_out {
        uf.union(u, v);
    }
    let labels = uf.into_labeling();
    let mut members: Vec<Vec<NodeId>> = Vec::new();
    let mut slot_of_label = std::collections::HashMap::new();
    for (v, &l) in labels.iter().enumerate() {
        let slot = *slot_of_label.entry(l).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[slot].push(v);
    }
    // members are ordered by smallest node since nodes are visited in order
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.shuffle(&mut rng);
    for i in 1..order.len() {
        let j = rng.random_range(0..i);
        let a = &members[order[i]];
        let b = &members[order[j]];
        let u = a[rng.random_range(0..a.len())];
        let v = b[rng.random_range(0..b.len())];
        pairs_out.push((u.min(v), u.max(v)));
    }

    let edges = pairs_out
        .into_iter()
        .map(|(u, v)| (u, v, euclidean(&centroids[u], &centroids[v])))
        .collect();
    Graph::new(m, Some(centroids.to_vec()), edges)
}

/// Maps a row-major rank over pairs `i < j` of `m` nodes back to the pair.
fn unrank_pair(m: usize, r: usize) -> (NodeId, NodeId) {
    let offset = |i: usize| i * (2 * m - i - 1) / 2;
    let (mut lo, mut hi) = (0usize, m - 1);
    // largest i with offset(i) <= r
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if offset(mid) <= r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, lo + 1 + r - offset(lo))
}
