//! Generalized Sobolev IPM with Musielak regularization (GSI-M) for probability
//! measures supported on the nodes of a weighted graph.
//!
//! The pipeline is: build a [`Graph`], root it with [`RootedIndex::new`],
//! profile its shortest-path tree edges with [`EdgeProfile::new`], turn two
//! measures into an [`EdgeFlow`], then hand profile and flow to
//! [`gsim_distance`].
//!
//! ```
//! use gsim_core::{Graph, Measure, RootedIndex, EdgeProfile, EdgeFlow, NFunction, gsim_distance, SolverOptions};
//!
//! let g = Graph::new(3, None, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
//! let idx = RootedIndex::new(&g, 0).unwrap();
//! let prof = EdgeProfile::new(&g, &idx);
//! let mu = Measure::dirac(2);
//! let nu = Measure::dirac(0);
//! let flow = EdgeFlow::new(&idx, &mu, &nu).unwrap();
//! let d = gsim_distance(&prof, &flow, &NFunction::scaled_power(2.0).unwrap(), &SolverOptions::default()).unwrap();
//! assert!((d.distance - (2.0f64 * 2f64.ln()).sqrt()).abs() < 1e-12);
//! ```

pub mod baselines;
pub mod graph;
pub mod gram;
pub mod nfunc;
pub mod selftest;
pub mod solver;

pub use baselines::{
    gst_distance, ow_oracle, random_spanning_tree, rsipm_distance, st_distance, tree_wasserstein,
    w1_oracle, BaselineError, TransportPlan,
};
pub use graph::{
    build_random_graph, farthest_point_clustering, pairwise_distances, seeded_root, EdgeFlow,
    EdgeProfile, Graph, GraphError, GraphMode, Measure, RootedIndex, SubtreeMasses,
};
pub use gram::{
    benchmark_pairs, gram_distances, kernel_matrix, psd_regularize, quantile_bandwidths,
    random_pairs, BenchReport, GramError, GramMatrix,
};
pub use nfunc::{ei, NFunction, NFuncError};
pub use solver::{gsim_distance, minimize_amemiya, AmemiyaResult, SolverError, SolverOptions};

pub type NodeId = usize;
pub type EdgeId = usize;
