//! Reference distances: Sobolev transport, generalized Sobolev transport, the
//! regularized Sobolev IPM, tree-Wasserstein, and small exact transport
//! oracles (1-Wasserstein and Orlicz-Wasserstein).

mod orlicz;
mod transport;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{EdgeFlow, EdgeProfile, Graph, GraphError};
use crate::nfunc::{NFuncError, NFunction, NFunctionKind};
use crate::solver::{active_edges, minimize_amemiya, AmemiyaResult, Modular, SolverError, SolverOptions};

pub use orlicz::{ow_oracle, ow_oracle_with_trace};
pub use transport::{w1_oracle, TransportPlan};

/// Largest support per side accepted by [`w1_oracle`].
pub const W1_MAX_SUPPORT: usize = 256;
/// Largest support per side accepted by [`ow_oracle`].
pub const OW_MAX_SUPPORT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("expected a tree: {edges} edges on {nodes} nodes")]
    NotATree { nodes: usize, edges: usize },
    #[error("marginals do not match: source mass {source_mass}, target mass {target_mass}")]
    Infeasible { source_mass: f64, target_mass: f64 },
    #[error("invalid mass {0} in a marginal")]
    InvalidMass(f64),
    #[error("support of size {got} exceeds the oracle limit {limit}")]
    TooLarge { got: usize, limit: usize },
    #[error("cost matrix is {rows}×{cols} but marginals have sizes {sources}×{targets}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        sources: usize,
        targets: usize,
    },
    #[error("cost entry {0} is negative or not finite")]
    InvalidCost(f64),
    #[error("exponent must be at least {min}, got {p}")]
    InvalidExponent { p: f64, min: f64 },
    #[error("transport pivoting did not terminate within {0} iterations")]
    PivotLimit(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Function(#[from] NFuncError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Sobolev transport `ST_p = (Σ_e w_e |h̄(e)|ᵖ)^{1/p}`.
pub fn st_distance(prof: &EdgeProfile, flow: &EdgeFlow, p: f64) -> Result<f64, BaselineError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(BaselineError::InvalidExponent { p, min: 1.0 });
    }
    let edges = active_edges(prof, flow)?;
    if p == 1.0 {
        return Ok(edges.iter().map(|(g, h)| g.weight * h).sum());
    }
    let sum: f64 = edges.iter().map(|(g, h)| g.weight * h.powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Generalized Sobolev transport: `inf_k (1 + Σ_e w_e Φ(k|h̄(e)|))/k`.
pub fn gst_distance(
    prof: &EdgeProfile,
    flow: &EdgeFlow,
    f: &NFunction,
    opts: &SolverOptions,
) -> Result<AmemiyaResult, BaselineError> {
    opts.validate()?;
    let edges = active_edges(prof, flow)?;
    if edges.is_empty() {
        return Ok(AmemiyaResult::exact(0.0));
    }
    match f.kind() {
        NFunctionKind::LimitLinear => Ok(AmemiyaResult::exact(st_distance(prof, flow, 1.0)?)),
        NFunctionKind::Power { p, scaled } if !opts.force_optimizer => {
            let st = st_distance(prof, flow, p)?;
            Ok(AmemiyaResult::exact(if scaled {
                st
            } else {
                st / f.prefactor_of_scaled().powf(1.0 / p)
            }))
        }
        _ => {
            let modular = |k: f64| -> Result<Modular, NFuncError> {
                let mut m = Modular::default();
                for (g, h) in &edges {
                    let s = k * h;
                    m.value += g.weight * f.value(s)?;
                    m.dk += g.weight * h * f.derivative(s)?;
                    m.d2k += g.weight * h * h * f.second_derivative(s)?;
                }
                Ok(m)
            };
            Ok(minimize_amemiya(modular, opts)?)
        }
    }
}

/// Regularized Sobolev IPM with weight `1 + λ(Λ(x))`:
/// `(Σ_e |h̄(e)|ᵖ ∫_{1+λ(γ_e)}^{1+λ(γ_e)+w_e} u^{1−p} du)^{1/p}`.
pub fn rsipm_distance(prof: &EdgeProfile, flow: &EdgeFlow, p: f64) -> Result<f64, BaselineError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(BaselineError::InvalidExponent { p, min: 1.0 });
    }
    let edges = active_edges(prof, flow)?;
    let sum: f64 = edges
        .iter()
        .map(|(g, h)| h.powf(p) * power_moment(1.0 + g.lambda_gamma, g.weight, p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

// ∫_L^{L+w} u^{1−p} du without the (2 − p) cancellation
fn power_moment(lower: f64, width: f64, p: f64) -> f64 {
    let ell = (width / lower).ln_1p();
    let x = (2.0 - p) * ell;
    if x == 0.0 {
        return ell;
    }
    lower.powf(2.0 - p) * ell * (x.exp_m1() / x)
}

/// Tree-Wasserstein distance `Σ_e w_e |h̄(e)|`; the profile must come from a
/// tree.
pub fn tree_wasserstein(prof: &EdgeProfile, flow: &EdgeFlow) -> Result<f64, BaselineError> {
    if prof.edge_count() + 1 != prof.node_count() {
        return Err(BaselineError::NotATree {
            nodes: prof.node_count(),
            edges: prof.edge_count(),
        });
    }
    st_distance(prof, flow, 1.0)
}

/// Spanning tree from a seeded random edge order (randomized Kruskal). Edges
/// keep their original relative order, so a tree comes back unchanged.
pub fn random_spanning_tree(g: &Graph, seed: u64) -> Result<Graph, BaselineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.shuffle(&mut rng);
    let mut uf = UnionFind::<usize>::new(g.node_count());
    let mut keep = vec![false; g.edge_count()];
    for e in order {
        let edge = g.edge(e);
        if uf.union(edge.u, edge.v) {
            keep[e] = true;
        }
    }
    let edges = g
        .edges()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(e, _)| (e.u, e.v, e.weight))
        .collect();
    Ok(Graph::new(g.node_count(), g.coords().map(<[_]>::to_vec), edges)?)
}
