//! Property tests against brute-force and independent oracles.

mod common;

use common::{connected_graph, measure, rel_diff, rng, tree, Instance};
use gsim_core::baselines::ow_oracle_with_trace;
use gsim_core::gram::smallest_eigenvalue;
use gsim_core::nfunc::{edge_terms, EdgeGeometry, Method};
use gsim_core::{
    ei, gram_distances, kernel_matrix, pairwise_distances, psd_regularize, tree_wasserstein,
    w1_oracle, EdgeFlow, EdgeProfile, NFunction, RootedIndex, SolverOptions, SubtreeMasses,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn ancestors_or_self(idx: &RootedIndex, mut v: usize) -> Vec<usize> {
    let mut out = vec![v];
    while let Some(p) = idx.parent(v) {
        out.push(p);
        v = p;
    }
    out
}

fn random_instance(seed: u64, n: usize, chords: usize) -> Instance {
    let mut r = rng(seed);
    let g = connected_graph(&mut r, n, chords);
    let root = r.random_range(0..n);
    let mu = measure(&mut r, n, 5);
    let nu = measure(&mut r, n, 5);
    Instance::new(g, root, mu, nu)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rooted_distances_match_all_pairs(seed in any::<u64>(), n in 2usize..30, chords in 0usize..40) {
        let inst = random_instance(seed, n, chords);
        let all: Vec<usize> = (0..n).collect();
        let d = pairwise_distances(&inst.graph, &all).unwrap();
        let root = inst.index.root();
        for v in 0..n {
            prop_assert!((inst.index.dist()[v] - d[root][v]).abs() <= 1e-12 * (1.0 + d[root][v]));
        }
        // parent pointers realise the distances
        for v in 0..n {
            if let (Some(p), Some(e)) = (inst.index.parent(v), inst.index.parent_edge(v)) {
                let w = inst.graph.edge(e).weight;
                prop_assert!((inst.index.dist()[p] + w - inst.index.dist()[v]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn lambda_gamma_matches_discretised_graph(seed in any::<u64>(), n in 2usize..16, chords in 0usize..20) {
        let inst = random_instance(seed, n, chords);
        let (g, idx) = (&inst.graph, &inst.index);
        let dist = idx.dist();
        const PIECES: usize = 4000;
        // length routed through each node, from midpoint samples of every edge
        let mut routed = vec![0.0; n];
        for e in g.edges() {
            let h = e.weight / PIECES as f64;
            for i in 0..PIECES {
                let s = (i as f64 + 0.5) * h;
                let via_u = dist[e.u] + s;
                let via_v = dist[e.v] + e.weight - s;
                routed[if via_u <= via_v { e.u } else { e.v }] += h;
            }
        }
        // the tree edge itself is routed through its near end, so λ(γ_e) is
        // everything routed through the subtree of the far node
        for te in inst.profile.tree_edges() {
            let expected: f64 = (0..n)
                .filter(|&x| ancestors_or_self(idx, x).contains(&te.far_node))
                .map(|x| routed[x])
                .sum();
            let slack = g.total_length() / PIECES as f64 + 1e-9;
            prop_assert!(
                (te.geometry.lambda_gamma - expected).abs() <= slack,
                "edge {}: {} vs {}", te.edge, te.geometry.lambda_gamma, expected
            );
        }
    }

    #[test]
    fn lambda_gamma_nests(seed in any::<u64>(), n in 2usize..40, chords in 0usize..60) {
        let inst = random_instance(seed, n, chords);
        let prof = &inst.profile;
        prop_assert!((prof.lambda_total() - inst.graph.total_length()).abs() <= 1e-12);
        for te in prof.tree_edges() {
            let g = te.geometry;
            prop_assert!(g.lambda_gamma >= 0.0 && g.lambda_gamma + g.weight <= g.lambda_total + 1e-12);
            if let Some(up) = inst.index.parent(te.far_node).and_then(|p| inst.index.parent_edge(p)) {
                let parent = prof.get(up).unwrap().geometry;
                prop_assert!(parent.lambda_gamma >= g.lambda_gamma + g.weight - 1e-9);
            }
        }
    }

    #[test]
    fn subtree_masses_match_brute_force(seed in any::<u64>(), n in 2usize..40, chords in 0usize..40) {
        let inst = random_instance(seed, n, chords);
        let idx = &inst.index;
        let masses = SubtreeMasses::new(idx, &inst.mu).unwrap();
        for v in 0..n {
            let Some(e) = idx.parent_edge(v) else { continue };
            let brute: f64 = inst
                .mu
                .support()
                .iter()
                .filter(|&&(x, _)| idx.root_path_edges(x).contains(&e))
                .map(|&(_, m)| m)
                .sum();
            let got = masses.get(e).unwrap_or(0.0);
            prop_assert!((got - brute).abs() <= 1e-14, "edge {e}: {got} vs {brute}");
        }
    }

    #[test]
    fn flow_is_antisymmetric(seed in any::<u64>(), n in 2usize..40, chords in 0usize..40) {
        let inst = random_instance(seed, n, chords);
        let back = EdgeFlow::new(&inst.index, &inst.nu, &inst.mu).unwrap();
        prop_assert_eq!(inst.flow.len(), back.len());
        for (a, b) in inst.flow.entries().iter().zip(back.entries()) {
            prop_assert_eq!(a.edge, b.edge);
            prop_assert_eq!(a.value, -b.value);
            prop_assert!(a.value.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn edge_integral_is_increasing_and_convex(
        weight in 0.1f64..2.0,
        spread in 0.0f64..4.0,
        below in 0.0f64..1.0,
        habs in 0.01f64..1.0,
        log_k in -3.0f64..1.2,
        kind in 0usize..4,
    ) {
        let lambda_total = weight * 10f64.powf(spread);
        let geom = EdgeGeometry { weight, lambda_gamma: below * (lambda_total - weight), lambda_total };
        let f = [
            NFunction::exp_linear(),
            NFunction::exp_square(),
            NFunction::scaled_power(1.5).unwrap(),
            NFunction::power(3.0).unwrap(),
        ][kind];
        let k = 10f64.powf(log_k);
        let at = |k: f64| edge_terms(&f, &geom, habs, k, Method::Analytic).unwrap();
        let (lo, hi) = (at(k), at(1.1 * k));
        prop_assert!(lo.value > 0.0 && lo.dk > 0.0 && lo.d2k >= 0.0);
        prop_assert!(hi.value > lo.value && hi.dk >= lo.dk);
        // the secant lies above the curve at the midpoint
        let mid = at(1.05 * k).value;
        prop_assert!(mid <= 0.5 * (lo.value + hi.value) * (1.0 + 1e-12));
    }

    #[test]
    fn ei_derivative(x in 0.05f64..600.0) {
        let h = 1e-5 * x.min(1.0);
        let numeric = (ei(x + h).unwrap() - ei(x - h).unwrap()) / (2.0 * h);
        let exact = x.exp() / x;
        prop_assert!(rel_diff(numeric, exact) <= 1e-7, "{numeric} vs {exact}");
    }

    #[test]
    fn w1_plan_is_feasible_and_matches_tree(seed in any::<u64>(), n in 2usize..14) {
        let mut r = rng(seed);
        let g = tree(&mut r, n);
        let (mu, nu) = (measure(&mut r, n, 6), measure(&mut r, n, 6));
        let inst = Instance::new(g, r.random_range(0..n), mu, nu);
        let all: Vec<usize> = (0..n).collect();
        let d = pairwise_distances(&inst.graph, &all).unwrap();
        let a: Vec<f64> = inst.mu.support().iter().map(|s| s.1).collect();
        let b: Vec<f64> = inst.nu.support().iter().map(|s| s.1).collect();
        let cost: Vec<Vec<f64>> = inst.mu.support().iter()
            .map(|&(i, _)| inst.nu.support().iter().map(|&(j, _)| d[i][j]).collect())
            .collect();
        let (value, plan) = w1_oracle(&cost, &a, &b).unwrap();
        for (x, y) in plan.row_sums().iter().zip(&a) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        for (x, y) in plan.col_sums().iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!(plan.coupling.iter().flatten().all(|&p| p >= 0.0));
        prop_assert!((plan.cost(&cost) - value).abs() <= 1e-12 * (1.0 + value));
        let tw = tree_wasserstein(&inst.profile, &inst.flow).unwrap();
        prop_assert!(rel_diff(value, tw) <= 1e-10, "{value} vs {tw}");
    }

    #[test]
    fn ow_feasibility_trace_is_monotone(seed in any::<u64>(), n in 2usize..9, kind in 0usize..3) {
        let mut r = rng(seed);
        let g = tree(&mut r, n);
        let (mu, nu) = (measure(&mut r, n, 4), measure(&mut r, n, 4));
        let all: Vec<usize> = (0..n).collect();
        let d = pairwise_distances(&g, &all).unwrap();
        let cost: Vec<Vec<f64>> = mu.support().iter()
            .map(|&(i, _)| nu.support().iter().map(|&(j, _)| d[i][j]).collect())
            .collect();
        let a: Vec<f64> = mu.support().iter().map(|s| s.1).collect();
        let b: Vec<f64> = nu.support().iter().map(|s| s.1).collect();
        let f = [NFunction::exp_linear(), NFunction::exp_square(), NFunction::scaled_power(2.0).unwrap()][kind];
        let (value, mut trace) = ow_oracle_with_trace(&cost, &a, &b, &f).unwrap();
        trace.sort_by(|x, y| x.0.total_cmp(&y.0));
        for pair in trace.windows(2) {
            prop_assert!(pair[1].1 <= pair[0].1 * (1.0 + 1e-12) + 1e-300);
        }
        // the returned scale sits between the last infeasible and the first feasible probe
        if let Some(first_ok) = trace.iter().find(|p| p.1 <= 1.0) {
            prop_assert!(value <= first_ok.0 * (1.0 + 1e-12));
        }
        if let Some(last_bad) = trace.iter().rev().find(|p| p.1 > 1.0) {
            prop_assert!(value >= last_bad.0 * (1.0 - 1e-12));
        }
    }

    #[test]
    fn psd_regularisation_is_idempotent(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = r.random_range(-1.0..1.0);
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        let exact = DMatrix::from_fn(n, n, |i, j| k[i][j]).symmetric_eigen().eigenvalues.min();
        let estimate = smallest_eigenvalue(&k).unwrap();
        prop_assert!((estimate - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "{estimate} vs {exact}");
        let reg = psd_regularize(&k).unwrap();
        let shifted = DMatrix::from_fn(n, n, |i, j| reg.matrix[i][j]).symmetric_eigen().eigenvalues.min();
        prop_assert!(shifted >= -1e-5 * (1.0 + exact.abs()));
        let again = psd_regularize(&reg.matrix).unwrap();
        prop_assert!(again.eta <= 1e-5 * (1.0 + exact.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gram_is_a_metric_and_thread_invariant(seed in any::<u64>(), n in 4usize..24, count in 3usize..10, kind in 0usize..3) {
        let mut r = rng(seed);
        let g = connected_graph(&mut r, n, n);
        let idx = RootedIndex::new(&g, r.random_range(0..n)).unwrap();
        let prof = EdgeProfile::new(&g, &idx);
        let ms: Vec<_> = (0..count).map(|_| measure(&mut r, n, 4)).collect();
        let f = [NFunction::exp_linear(), NFunction::exp_square(), NFunction::scaled_power(3.0).unwrap()][kind];
        let opts = SolverOptions::default();
        let one = gram_distances(&prof, &idx, &ms, &f, &opts, 1).unwrap();
        let many = gram_distances(&prof, &idx, &ms, &f, &opts, 3).unwrap();
        prop_assert!(one.entries().iter().zip(many.entries()).all(|(a, b)| a.to_bits() == b.to_bits()));
        for i in 0..count {
            prop_assert_eq!(one.get(i, i), 0.0);
            for j in 0..count {
                prop_assert_eq!(one.get(i, j), one.get(j, i));
                for l in 0..count {
                    prop_assert!(one.get(i, l) <= one.get(i, j) + one.get(j, l) + 1e-9);
                }
            }
        }
        let kernel = kernel_matrix(&one, r.random_range(0.1..10.0)).unwrap();
        prop_assert!(kernel.iter().flatten().all(|&v| v > 0.0 && v <= 1.0));
    }
}
