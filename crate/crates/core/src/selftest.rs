//! Fast built-in consistency checks, shared by the command-line `selftest`
//! and the test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{gst_distance, ow_oracle, st_distance, tree_wasserstein, w1_oracle};
use crate::graph::{pairwise_distances, EdgeFlow, EdgeProfile, Graph, Measure, RootedIndex};
use crate::nfunc::{beta_e, ei, EdgeGeometry, NFunction};
use crate::solver::{gsim_distance, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<(), String>;

const CHECKS: &[(&str, Check)] = &[
    ("exponential-integral-values", check_ei),
    ("edge-weight-closed-form", check_beta),
    ("triangle-length-profile", check_triangle_profile),
    ("path-distances", check_path_distances),
    ("transport-oracles", check_oracles),
    ("metric-axioms", check_metric_axioms),
    ("sobolev-sandwich", check_sandwich),
    ("closed-form-vs-optimizer", check_forced_optimizer),
    ("tree-wasserstein-agreement", check_tree_agreement),
];

/// Runs every check; never panics.
pub fn run_all() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let res = std::panic::catch_unwind(check)
                .unwrap_or_else(|_| Err("check panicked".to_string()));
            CheckOutcome {
                name,
                passed: res.is_ok(),
                detail: res.err().unwrap_or_default(),
            }
        })
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check_ei() -> Result<(), String> {
    for (x, want) in [
        (0.1, -1.622_812_813_969_276_7),
        (1.0, 1.895_117_816_355_936_8),
        (5.0, 40.185_275_355_803_177),
        (10.0, 2_492.228_976_241_877_8),
        (30.0, 368_973_209_407.274_2),
    ] {
        let got = ei(x).map_err(|e| e.to_string())?;
        ensure(rel(got, want) <= 1e-12, || format!("Ei({x}) = {got}, expected {want}"))?;
    }
    Ok(())
}

fn check_beta() -> Result<(), String> {
    let e1 = EdgeGeometry {
        weight: 1.0,
        lambda_gamma: 1.0,
        lambda_total: 2.0,
    };
    let got = beta_e(2.0, &e1);
    ensure(rel(got, 2.0 * (4.0f64 / 3.0).ln()) < 1e-14, || format!("beta = {got}"))?;
    let near = beta_e(2.0 + 1e-6, &e1);
    ensure(rel(near, got) < 1e-5, || format!("beta near p = 2: {near}"))
}

fn check_triangle_profile() -> Result<(), String> {
    let g = Graph::new(3, None, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.5)]).map_err(|e| e.to_string())?;
    let idx = RootedIndex::new(&g, 0).map_err(|e| e.to_string())?;
    let prof = EdgeProfile::new(&g, &idx);
    let lg = prof.get(0).map(|t| t.geometry.lambda_gamma);
    ensure(lg.is_some_and(|v| (v - 0.75).abs() < 1e-14), || format!("lambda_gamma = {lg:?}"))
}

fn check_path_distances() -> Result<(), String> {
    let g = Graph::new(3, None, vec![(0, 1, 1.0), (1, 2, 1.0)]).map_err(|e| e.to_string())?;
    let idx = RootedIndex::new(&g, 0).map_err(|e| e.to_string())?;
    let prof = EdgeProfile::new(&g, &idx);
    let flow = EdgeFlow::new(&idx, &Measure::dirac(2), &Measure::dirac(0)).map_err(|e| e.to_string())?;
    let opts = SolverOptions::default();
    let d = |f: NFunction| gsim_distance(&prof, &flow, &f, &opts).map(|r| r.distance).map_err(|e| e.to_string());
    let ps2 = d(NFunction::scaled_power(2.0).map_err(|e| e.to_string())?)?;
    ensure(rel(ps2, (2.0 * 2f64.ln()).sqrt()) < 1e-14, || format!("ps:2 distance {ps2}"))?;
    let lin = d(NFunction::limit_linear())?;
    ensure(lin == 2.0, || format!("linear distance {lin}"))?;
    let exp = d(NFunction::exp_linear())?;
    ensure(exp > 0.0 && exp.is_finite(), || format!("exp distance {exp}"))
}

fn check_oracles() -> Result<(), String> {
    let (w1, _) = w1_oracle(&[vec![1.0], vec![1.0]], &[0.5, 0.5], &[1.0]).map_err(|e| e.to_string())?;
    ensure((w1 - 1.0).abs() < 1e-14, || format!("W1 = {w1}"))?;
    let ow = ow_oracle(&[vec![1.0]], &[1.0], &[1.0], &NFunction::exp_linear()).map_err(|e| e.to_string())?;
    let s = 1.146_193_220_620_582_6;
    ensure(rel(ow, 1.0 / s) < 1e-7, || format!("OW = {ow}"))
}

pub(crate) fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        seen.insert((u, v));
        edges.push((u, v, rng.random_range(0.1..2.0)));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            edges.push((key.0, key.1, rng.random_range(0.1..2.0)));
        }
    }
    Graph::new(n, None, edges).expect("random graph is valid")
}

pub(crate) fn random_measure(rng: &mut ChaCha8Rng, n: usize, max_support: usize) -> Measure {
    let k = rng.random_range(1..=max_support.min(n));
    let nodes = rand::seq::index::sample(rng, n, k).into_vec();
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Measure::new(nodes.into_iter().zip(raw.into_iter().map(|m| m / total)).collect())
        .expect("normalized masses")
}

fn kinds() -> Vec<NFunction> {
    vec![
        NFunction::limit_linear(),
        NFunction::scaled_power(1.5).expect("valid exponent"),
        NFunction::scaled_power(3.0).expect("valid exponent"),
        NFunction::exp_linear(),
        NFunction::exp_square(),
    ]
}

fn check_metric_axioms() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = SolverOptions::default();
    for _ in 0..10 {
        let n = rng.random_range(4..16);
        let g = random_connected_graph(&mut rng, n, n);
        let idx = RootedIndex::new(&g, 0).map_err(|e| e.to_string())?;
        let prof = EdgeProfile::new(&g, &idx);
        let ms: Vec<Measure> = (0..3).map(|_| random_measure(&mut rng, n, 4)).collect();
        for f in kinds() {
            let d = |a: &Measure, b: &Measure| -> Result<f64, String> {
                let flow = EdgeFlow::new(&idx, a, b).map_err(|e| e.to_string())?;
                gsim_distance(&prof, &flow, &f, &opts).map(|r| r.distance).map_err(|e| e.to_string())
            };
            let (ab, ba) = (d(&ms[0], &ms[1])?, d(&ms[1], &ms[0])?);
            ensure(ab == ba, || format!("{f}: asymmetric {ab} vs {ba}"))?;
            ensure(d(&ms[0], &ms[0])? == 0.0, || format!("{f}: d(mu, mu) != 0"))?;
            let (ac, cb) = (d(&ms[0], &ms[2])?, d(&ms[2], &ms[1])?);
            ensure(ab <= ac + cb + 1e-9, || format!("{f}: triangle {ab} > {ac} + {cb}"))?;
        }
    }
    Ok(())
}

fn check_sandwich() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let opts = SolverOptions::default();
    for _ in 0..10 {
        let n = rng.random_range(4..16);
        let g = random_connected_graph(&mut rng, n, n / 2);
        let idx = RootedIndex::new(&g, 0).map_err(|e| e.to_string())?;
        let prof = EdgeProfile::new(&g, &idx);
        let flow = EdgeFlow::new(&idx, &random_measure(&mut rng, n, 4), &random_measure(&mut rng, n, 4))
            .map_err(|e| e.to_string())?;
        for f in kinds() {
            let gs = gsim_distance(&prof, &flow, &f, &opts).map_err(|e| e.to_string())?.distance;
            let gst = gst_distance(&prof, &flow, &f, &opts).map_err(|e| e.to_string())?.distance;
            ensure(0.5 * gst <= gs && gs <= gst + 1e-9, || format!("{f}: {gs} outside [{}, {gst}]", 0.5 * gst))?;
        }
    }
    Ok(())
}

fn check_forced_optimizer() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let forced = SolverOptions {
        force_optimizer: true,
        ..SolverOptions::default()
    };
    for _ in 0..10 {
        let n = rng.random_range(4..16);
        let g = random_connected_graph(&mut rng, n, n);
        let idx = RootedIndex::new(&g, 0).map_err(|e| e.to_string())?;
        let prof = EdgeProfile::new(&g, &idx);
        let flow = EdgeFlow::new(&idx, &random_measure(&mut rng, n, 4), &random_measure(&mut rng, n, 4))
            .map_err(|e| e.to_string())?;
        for p in [1.5, 2.0, 3.0] {
            let f = NFunction::scaled_power(p).map_err(|e| e.to_string())?;
            let closed = gsim_distance(&prof, &flow, &f, &SolverOptions::default()).map_err(|e| e.to_string())?;
            let opt = gsim_distance(&prof, &flow, &f, &forced).map_err(|e| e.to_string())?;
            ensure(rel(opt.distance, closed.distance) <= 1e-6 || closed.distance == 0.0, || {
                format!("p = {p}: optimizer {} vs closed form {}", opt.distance, closed.distance)
            })?;
        }
    }
    Ok(())
}

fn check_tree_agreement() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..10 {
        let n = rng.random_range(3..10);
        let g = random_connected_graph(&mut rng, n, 0);
        let idx = RootedIndex::new(&g, 0).map_err(|e| e.to_string())?;
        let prof = EdgeProfile::new(&g, &idx);
        let (mu, nu) = (random_measure(&mut rng, n, 3), random_measure(&mut rng, n, 3));
        let flow = EdgeFlow::new(&idx, &mu, &nu).map_err(|e| e.to_string())?;
        let tw = tree_wasserstein(&prof, &flow).map_err(|e| e.to_string())?;
        let st = st_distance(&prof, &flow, 1.0).map_err(|e| e.to_string())?;
        let src: Vec<usize> = mu.support().iter().map(|s| s.0).collect();
        let dst: Vec<usize> = nu.support().iter().map(|s| s.0).collect();
        let all = pairwise_distances(&g, &(0..n).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        let cost: Vec<Vec<f64>> = src.iter().map(|&i| dst.iter().map(|&j| all[i][j]).collect()).collect();
        let a: Vec<f64> = mu.support().iter().map(|s| s.1).collect();
        let b: Vec<f64> = nu.support().iter().map(|s| s.1).collect();
        let (w1, _) = w1_oracle(&cost, &a, &b).map_err(|e| e.to_string())?;
        ensure(tw == st && (tw - w1).abs() <= 1e-8 * w1.max(1.0), || format!("tree {tw}, st {st}, W1 {w1}"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for o in super::run_all() {
            assert!(o.passed, "{}: {}", o.name, o.detail);
        }
    }
}
