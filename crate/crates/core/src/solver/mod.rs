//! GSI-M distances: closed forms for power and linear N-functions, and the
//! Amemiya minimization for everything else.

mod minimize;

use thiserror::Error;

use crate::graph::{EdgeFlow, EdgeProfile};
use crate::nfunc::{beta_e, edge_terms, EdgeGeometry, Method, NFuncError, NFunction, NFunctionKind};

pub use minimize::{minimize_amemiya, Modular};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("edge profile and edge flow come from different rooted indexes")]
    MismatchedIndex,
    #[error("flow references edge {0}, which is not a shortest-path tree edge")]
    NotATreeEdge(usize),
    #[error("no finite objective value found on the search grid")]
    NoFiniteBracket,
    #[error("no convergence after {} iterations (best value {})", best.iterations, best.distance)]
    NonConvergence { best: AmemiyaResult },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Function(#[from] NFuncError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance on the bracket width and on the stationarity test.
    pub tol: f64,
    pub max_iter: usize,
    /// Route power N-functions through the minimizer instead of their closed
    /// form. The linear limit has no minimizer and ignores this.
    pub force_optimizer: bool,
    /// How per-edge integrals are evaluated inside the minimizer.
    pub method: Method,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            force_optimizer: false,
            method: Method::Analytic,
        }
    }
}

impl SolverOptions {
    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(SolverError::InvalidOptions(format!(
                "tol must lie in (0, 1e-2], got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidOptions("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmemiyaResult {
    pub distance: f64,
    /// Minimizing `k`; `None` when a closed form was used.
    pub k_star: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl AmemiyaResult {
    pub(crate) fn exact(distance: f64) -> Self {
        Self {
            distance,
            k_star: None,
            iterations: 0,
            converged: true,
        }
    }
}

/// Pairs each active edge's geometry with `|h̄(e)|`.
pub(crate) fn active_edges(
    prof: &EdgeProfile,
    flow: &EdgeFlow,
) -> Result<Vec<(EdgeGeometry, f64)>, SolverError> {
    if prof.key() != flow.key() {
        return Err(SolverError::MismatchedIndex);
    }
    flow.entries()
        .iter()
        .map(|fe| {
            prof.get(fe.edge)
                .map(|t| (t.geometry, fe.value.abs()))
                .ok_or(SolverError::NotATreeEdge(fe.edge))
        })
        .collect()
}

/// GSI-M distance between the two measures behind `flow`.
pub fn gsim_distance(
    prof: &EdgeProfile,
    flow: &EdgeFlow,
    f: &NFunction,
    opts: &SolverOptions,
) -> Result<AmemiyaResult, SolverError> {
    opts.validate()?;
    let edges = active_edges(prof, flow)?;
    if edges.is_empty() {
        return Ok(AmemiyaResult::exact(0.0));
    }
    match f.kind() {
        NFunctionKind::LimitLinear => Ok(AmemiyaResult::exact(
            edges.iter().map(|(g, h)| g.weight * h).sum(),
        )),
        NFunctionKind::Power { p, scaled } if !opts.force_optimizer => {
            let sum: f64 = edges.iter().map(|(g, h)| beta_e(p, g) * h.powf(p)).sum();
            let closed = sum.powf(1.0 / p);
            Ok(AmemiyaResult::exact(if scaled {
                closed
            } else {
                closed / f.prefactor_of_scaled().powf(1.0 / p)
            }))
        }
        _ => minimize_amemiya(|k| modular(f, &edges, k, opts.method), opts),
    }
}

fn modular(
    f: &NFunction,
    edges: &[(EdgeGeometry, f64)],
    k: f64,
    method: Method,
) -> Result<Modular, NFuncError> {
    let mut m = Modular::default();
    for (g, h) in edges {
        let t = edge_terms(f, g, *h, k, method)?;
        m.value += t.value;
        m.dk += t.dk;
        m.d2k += t.d2k;
    }
    Ok(m)
}
