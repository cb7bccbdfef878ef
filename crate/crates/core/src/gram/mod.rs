//! Batch distance matrices over measure collections, exponential kernels,
//! bandwidth selection, PSD repair, and throughput timing.

pub mod io;

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{EdgeFlow, EdgeProfile, GraphError, Measure, RootedIndex, SubtreeMasses};
use crate::nfunc::NFunction;
use crate::solver::{gsim_distance, SolverError, SolverOptions};

/// Default quantile levels, in percent.
pub const DEFAULT_QUANTILES: [f64; 9] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;
const PSD_MARGIN: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GramError {
    #[error("distance sample is empty")]
    EmptySample,
    #[error("every distance in the sample is zero")]
    AllZero,
    #[error("the {0}% quantile of the sample is zero")]
    ZeroQuantile(f64),
    #[error("quantile level {0} is outside (0, 100]")]
    InvalidQuantile(f64),
    #[error("sample value {0} is negative or not finite")]
    InvalidValue(f64),
    #[error("kernel bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("matrix is not square")]
    NotSquare,
    #[error("profile and index belong to different graphs or roots")]
    MismatchedIndex,
    #[error("pair ({i}, {j}) index out of range for {n} measures")]
    PairOutOfRange { i: usize, j: usize, n: usize },
    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: SolverError,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("matrix file: {0}")]
    Format(String),
}

/// Provenance recorded alongside a distance matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GramMeta {
    pub phi: String,
    pub graph: u64,
    pub root: usize,
    pub seconds: f64,
}

/// Dense symmetric `n × n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
    pub meta: GramMeta,
}

impl GramMatrix {
    pub fn from_entries(n: usize, entries: Vec<f64>, meta: GramMeta) -> Result<Self, GramError> {
        if entries.len() != n * n {
            return Err(GramError::NotSquare);
        }
        Ok(Self { n, entries, meta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        if self.n == 0 {
            return Vec::new();
        }
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Off-diagonal upper-triangle values, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// Evaluates `pairs` in contiguous blocks, one block per worker. Every result
/// lands in the slot of its pair, so the output does not depend on `threads`.
fn run_pairs(
    prof: &EdgeProfile,
    masses: &[SubtreeMasses],
    pairs: &[(usize, usize)],
    f: &NFunction,
    opts: &SolverOptions,
    threads: usize,
) -> Result<Vec<f64>, GramError> {
    if threads == 0 {
        return Err(GramError::NoWorkers);
    }
    let one = |&(i, j): &(usize, usize)| -> Result<f64, GramError> {
        let flow = EdgeFlow::from_masses(&masses[i], &masses[j])?;
        gsim_distance(prof, &flow, f, opts)
            .map(|r| r.distance)
            .map_err(|source| GramError::Pair { i, j, source })
    };
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let block = pairs.len().div_ceil(threads);
    let results: Vec<Result<Vec<f64>, GramError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .chunks(block)
            .map(|chunk| scope.spawn(move || chunk.iter().map(one).collect::<Result<Vec<_>, _>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("distance worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(pairs.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn subtree_masses(
    prof: &EdgeProfile,
    idx: &RootedIndex,
    measures: &[Measure],
) -> Result<Vec<SubtreeMasses>, GramError> {
    if prof.key() != idx.key() {
        return Err(GramError::MismatchedIndex);
    }
    Ok(measures
        .iter()
        .map(|m| SubtreeMasses::new(idx, m))
        .collect::<Result<_, _>>()?)
}

/// All pairwise GSI-M distances among `measures`.
pub fn gram_distances(
    prof: &EdgeProfile,
    idx: &RootedIndex,
    measures: &[Measure],
    f: &NFunction,
    opts: &SolverOptions,
    threads: usize,
) -> Result<GramMatrix, GramError> {
    let start = Instant::now();
    let n = measures.len();
    let masses = subtree_masses(prof, idx, measures)?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values = run_pairs(prof, &masses, &pairs, f, opts, threads)?;
    let mut entries = vec![0.0; n * n];
    for (&(i, j), &d) in pairs.iter().zip(&values) {
        entries[i * n + j] = d;
        entries[j * n + i] = d;
    }
    let meta = GramMeta {
        phi: f.to_string(),
        graph: idx.key().graph,
        root: idx.root(),
        seconds: start.elapsed().as_secs_f64(),
    };
    GramMatrix::from_entries(n, entries, meta)
}

/// `exp(−t̃·d)` entrywise.
pub fn kernel_matrix(d: &GramMatrix, t_tilde: f64) -> Result<Vec<Vec<f64>>, GramError> {
    if !(t_tilde > 0.0 && t_tilde.is_finite()) {
        return Err(GramError::InvalidBandwidth(t_tilde));
    }
    Ok(d
        .rows()
        .into_iter()
        .map(|row| row.into_iter().map(|x| (-t_tilde * x).exp()).collect())
        .collect())
}

/// Nearest-rank `s`% quantile `q_s` of the sample for each level, expanded to
/// the bandwidths `1/q_s, 1/(2q_s), 1/(5q_s)`.
pub fn quantile_bandwidths(sample: &[f64], levels: &[f64]) -> Result<Vec<f64>, GramError> {
    if sample.is_empty() {
        return Err(GramError::EmptySample);
    }
    if let Some(&v) = sample.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(GramError::InvalidValue(v));
    }
    if sample.iter().all(|&v| v == 0.0) {
        return Err(GramError::AllZero);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut out = Vec::with_capacity(3 * levels.len());
    for &s in levels {
        if !(s > 0.0 && s <= 100.0) {
            return Err(GramError::InvalidQuantile(s));
        }
        let rank = ((s / 100.0 * n as f64).ceil() as usize).clamp(1, n);
        let q = sorted[rank - 1];
        if q == 0.0 {
            return Err(GramError::ZeroQuantile(s));
        }
        out.extend([1.0 / q, 1.0 / (2.0 * q), 1.0 / (5.0 * q)]);
    }
    Ok(out)
}

/// Outcome of [`psd_regularize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Regularized {
    pub matrix: Vec<Vec<f64>>,
    /// Amount added to the diagonal; zero when the input already looked PSD.
    pub eta: f64,
    /// Estimated smallest eigenvalue of the input.
    pub lambda_min: f64,
}

/// Estimates the smallest eigenvalue of a symmetric matrix by power iteration
/// on `σI − K`, with `σ` a Gershgorin bound on the spectrum.
pub fn smallest_eigenvalue(k: &[Vec<f64>]) -> Result<f64, GramError> {
    let n = k.len();
    if k.iter().any(|r| r.len() != n) {
        return Err(GramError::NotSquare);
    }
    if n == 0 {
        return Ok(0.0);
    }
    let sigma = k
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v);
    let mut rho = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let mut w: Vec<f64> = (0..n)
            .map(|i| sigma * v[i] - k[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        if normalize(&mut w) == 0.0 {
            // v spans the top of the spectrum of K exactly: λ = σ
            return Ok(sigma);
        }
        v = w;
        let done = (next - rho).abs() <= POWER_TOL * next.abs().max(1.0);
        rho = next;
        if done {
            break;
        }
    }
    Ok(sigma - rho)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Shifts the diagonal by `|λ_min| + 1e−10` when the estimated smallest
/// eigenvalue is negative.
pub fn psd_regularize(k: &[Vec<f64>]) -> Result<Regularized, GramError> {
    let lambda_min = smallest_eigenvalue(k)?;
    let eta = if lambda_min < 0.0 {
        lambda_min.abs() + PSD_MARGIN
    } else {
        0.0
    };
    let mut matrix = k.to_vec();
    if eta > 0.0 {
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] += eta;
        }
    }
    Ok(Regularized {
        matrix,
        eta,
        lambda_min,
    })
}

/// `count` pairs `(i, j)` with `i ≠ j` drawn uniformly with replacement from
/// `n` measures.
pub fn random_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            (i, j)
        })
        .collect()
}

/// Throughput of a batch of distance evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub n_pairs: usize,
    pub seconds: f64,
    pub pairs_per_second: f64,
    /// Distances in pair order, when requested.
    pub distances: Option<Vec<f64>>,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pairs={} seconds={:.6} pps={:.3}",
            self.n_pairs, self.seconds, self.pairs_per_second
        )
    }
}

/// Times GSI-M over explicit `(i, j)` pairs of `measures`, including the
/// per-measure subtree passes.
#[allow(clippy::too_many_arguments)]
pub fn benchmark_pairs(
    prof: &EdgeProfile,
    idx: &RootedIndex,
    measures: &[Measure],
    pairs: &[(usize, usize)],
    f: &NFunction,
    opts: &SolverOptions,
    threads: usize,
    keep_distances: bool,
) -> Result<BenchReport, GramError> {
    let n = measures.len();
    if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(GramError::PairOutOfRange { i, j, n });
    }
    if pairs.is_empty() {
        return Ok(BenchReport {
            n_pairs: 0,
            seconds: 0.0,
            pairs_per_second: 0.0,
            distances: keep_distances.then(Vec::new),
        });
    }
    let start = Instant::now();
    let masses = subtree_masses(prof, idx, measures)?;
    let values = run_pairs(prof, &masses, pairs, f, opts, threads)?;
    let seconds = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        n_pairs: pairs.len(),
        seconds,
        pairs_per_second: if seconds > 0.0 {
            pairs.len() as f64 / seconds
        } else {
            f64::INFINITY
        },
        distances: keep_distances.then_some(values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn path_setup() -> (EdgeProfile, RootedIndex) {
        let g = Graph::new(3, None, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let idx = RootedIndex::new(&g, 0).unwrap();
        (EdgeProfile::new(&g, &idx), idx)
    }

    #[test]
    fn single_measure_matrix() {
        let (prof, idx) = path_setup();
        let f = NFunction::exp_linear();
        let g = gram_distances(&prof, &idx, &[Measure::dirac(1)], &f, &SolverOptions::default(), 2)
            .unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.get(0, 0), 0.0);
    }

    #[test]
    fn duplicates_are_zero_and_symmetric() {
        let (prof, idx) = path_setup();
        let ms = vec![Measure::dirac(2), Measure::dirac(0), Measure::dirac(2)];
        let f = NFunction::scaled_power(2.0).unwrap();
        let g = gram_distances(&prof, &idx, &ms, &f, &SolverOptions::default(), 3).unwrap();
        assert_eq!(g.get(0, 2), 0.0);
        assert_eq!(g.get(0, 1), g.get(1, 0));
        assert!((g.get(0, 1) - 1.177_410_022_515_474_7).abs() < 1e-14);
        assert_eq!(g.meta.phi, "ps:2");
    }

    #[test]
    fn kernel_values() {
        let d = GramMatrix::from_entries(2, vec![0.0, 2f64.ln(), 2f64.ln(), 0.0], GramMeta::default())
            .unwrap();
        let k = kernel_matrix(&d, 1.0).unwrap();
        assert_eq!(k[0][0], 1.0);
        assert!((k[0][1] - 0.5).abs() < 1e-15);
        assert!(kernel_matrix(&d, 0.0).is_err());
    }

    #[test]
    fn quantiles() {
        let sample: Vec<f64> = (1..=100).map(f64::from).collect();
        let b = quantile_bandwidths(&sample, &[50.0]).unwrap();
        assert_eq!(b, vec![0.02, 0.01, 0.004]);
        assert_eq!(quantile_bandwidths(&sample, &DEFAULT_QUANTILES).unwrap().len(), 27);
        let c = quantile_bandwidths(&[3.0; 7], &DEFAULT_QUANTILES).unwrap();
        assert!(c.chunks(3).all(|w| w[0] == 1.0 / 3.0));
        assert_eq!(quantile_bandwidths(&[], &[50.0]), Err(GramError::EmptySample));
        assert_eq!(quantile_bandwidths(&[0.0, 0.0], &[50.0]), Err(GramError::AllZero));
    }

    #[test]
    fn psd_repair() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(psd_regularize(&id).unwrap().eta, 0.0);
        let swap = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let r = psd_regularize(&swap).unwrap();
        assert!((r.lambda_min + 1.0).abs() < 1e-7);
        assert!((r.eta - 1.0).abs() < 1e-7);
        assert!(smallest_eigenvalue(&r.matrix).unwrap() >= -1e-8);
    }

    #[test]
    fn bench_report() {
        let (prof, idx) = path_setup();
        let ms = vec![Measure::dirac(2), Measure::dirac(0)];
        let f = NFunction::exp_linear();
        let opts = SolverOptions::default();
        let empty = benchmark_pairs(&prof, &idx, &ms, &[], &f, &opts, 1, false).unwrap();
        assert_eq!(empty.n_pairs, 0);
        assert_eq!(empty.seconds, 0.0);
        let r = benchmark_pairs(&prof, &idx, &ms, &[(0, 1); 10], &f, &opts, 4, true).unwrap();
        let d = r.distances.clone().unwrap();
        assert_eq!(d.len(), 10);
        assert!(d.iter().all(|&x| x == d[0]));
        assert!(r.to_string().starts_with("pairs=10 seconds="));
    }
}
