use hardcore_core::estimators::*;
use hardcore_core::graph::{random_regular, random_tree, Graph};
use hardcore_core::model::{lambda_c, IndependentSet};
use hardcore_core::oracle::exact_glauber_kernel;

fn rel_close(x: f64, pin: f64) -> bool {
    (x / pin - 1.0).abs() <= 0.1
}

/// Dense transition matrix and Gibbs vector built straight from the update
/// rule over all 2^n subsets, independent subsets only.
fn dense_chain(g: &Graph, lambda: f64) -> (Vec<u64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = g.vertex_count();
    let independent = |m: u64| g.edges().all(|(a, b)| m >> a & 1 == 0 || m >> b & 1 == 0);
    let states: Vec<u64> = (0..1u64 << n).filter(|&m| independent(m)).collect();
    let index = |m: u64| states.binary_search(&m).unwrap();
    let p = lambda / (1.0 + lambda);
    let mut matrix = vec![vec![0.0; states.len()]; states.len()];
    for (i, &m) in states.iter().enumerate() {
        for v in 0..n {
            let blocked = g.neighbors(v).iter().any(|&z| m >> z & 1 == 1);
            if blocked {
                matrix[i][i] += 1.0 / n as f64;
            } else {
                matrix[i][index(m | 1 << v)] += p / n as f64;
                matrix[i][index(m & !(1 << v))] += (1.0 - p) / n as f64;
            }
        }
    }
    let weights: Vec<f64> = states.iter().map(|m| lambda.powi(m.count_ones() as i32)).collect();
    let z: f64 = weights.iter().sum();
    (states, matrix, weights.iter().map(|w| w / z).collect())
}

#[test]
fn tv_matches_dense_powering() {
    for (g, lambda) in [(Graph::cycle(6), 1.0), (Graph::star(3), 2.0), (Graph::path(5), 0.5)] {
        let (states, matrix, pi) = dense_chain(&g, lambda);
        let start_mask = states[states.len() - 1];
        let start = IndependentSet::from_vertices(
            &g,
            &(0..g.vertex_count()).filter(|&v| start_mask >> v & 1 == 1).collect::<Vec<_>>(),
        )
        .unwrap();
        let mut dist = vec![0.0; states.len()];
        dist[states.len() - 1] = 1.0;
        for t in 0..=12 {
            let tv = 0.5 * dist.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum::<f64>();
            assert!((tv_exact(&g, lambda, t, &start).unwrap() - tv).abs() < 1e-12);
            let mut next = vec![0.0; states.len()];
            for (i, row) in matrix.iter().enumerate() {
                for (j, &q) in row.iter().enumerate() {
                    next[j] += dist[i] * q;
                }
            }
            dist = next;
        }
    }
}

#[test]
fn small_mixing_times() {
    let edge = Graph::path(2);
    assert_eq!(mixing_time_exact(&edge, 1.0, 0.25, &StartSet::All, 100).unwrap(), 3);
    // One vertex is resampled exactly on every step.
    let single = Graph::empty(1);
    assert_eq!(mixing_time_exact(&single, 1.0, 0.25, &StartSet::All, 100).unwrap(), 1);
    assert_eq!(mixing_time_exact(&single, 1.0, 1e-9, &StartSet::All, 100).unwrap(), 1);
    let kernel = exact_glauber_kernel(&edge, 1.0).unwrap();
    let curve = tv_curve(&kernel, 0, 20);
    assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    assert!(matches!(
        mixing_time_exact(&Graph::star(6), 20.0, 1e-6, &StartSet::All, 5),
        Err(EstimatorError::MixingNotReached { .. })
    ));
}

#[test]
fn bp_accuracy_is_exact_on_trees() {
    for seed in 0..5 {
        let t = random_tree(18 + 8 * seed as usize, seed);
        for lambda in [0.1, 1.0, 4.0] {
            let r = bp_accuracy(&t, lambda, 200).unwrap();
            assert!(r.max_edge_error <= 1e-9);
        }
    }
    // The unrooted recursion drops the parent and is not exact even on an edge.
    let r = bp_accuracy(&Graph::path(2), 1.0, 200).unwrap();
    let x = (5f64.sqrt() - 1.0) / 2.0;
    assert!((r.max_vertex_error - ((x / (1.0 + x)) * 3.0 - 1.0).abs()).abs() < 1e-9);
}

#[test]
fn four_cycle_accuracy_is_pinned() {
    let r = bp_accuracy(&Graph::cycle(4), 1.0, 100).unwrap();
    assert!(rel_close(r.max_edge_error, 0.045_085), "{}", r.max_edge_error);
    assert!(rel_close(r.max_vertex_error, 0.111_853), "{}", r.max_vertex_error);
}

#[test]
fn empty_graph_log_estimates_are_unbiased() {
    let g = Graph::empty(5);
    let lambda: f64 = 1.0;
    let truth = 5.0 * (1.0 + lambda).ln();
    let logs: Vec<f64> = (0..200)
        .map(|seed| {
            estimate_partition(&g, lambda, 0.2, Z_95, seed, PartitionOptions::default())
                .unwrap()
                .log_estimate
        })
        .collect();
    let e = Estimate::from_values(logs, 3.0);
    assert!((e.mean - truth).abs() <= e.half_width, "{e:?}");
}

#[test]
fn triangle_estimate_within_interval() {
    let g = Graph::complete(3);
    let est = estimate_partition(&g, 1.0, 0.05, Z_95, 4, PartitionOptions::default()).unwrap();
    assert!((est.estimate / 4.0 - 1.0).abs() <= 0.05);
    assert!(est.lower < est.estimate && est.estimate < est.upper);
    let rb = PartitionOptions {
        estimator: FactorEstimator::RaoBlackwell,
        ..PartitionOptions::default()
    };
    let est = estimate_partition(&g, 1.0, 0.05, Z_95, 4, rb).unwrap();
    assert!((est.estimate / 4.0 - 1.0).abs() <= 0.05);
}

#[test]
fn heawood_uniformity_is_pinned() {
    let g = Graph::heawood();
    let lambda = 0.5 * lambda_c(3).unwrap();
    let params = UniformityParams {
        vertex: 0,
        epsilon: 0.3,
        burn_in: 1400,
        window: 14,
        replicates: 400,
        seed: 1,
    };
    let r = UniformityExperiment::new(&g, lambda, IndependentSet::empty(14), params).unwrap().run();
    assert!(r.stationary_exact);
    assert!(rel_close(r.stationary_fraction, 0.463_361), "{}", r.stationary_fraction);
    assert!(rel_close(r.dynamic_fraction.mean, 0.4225), "{}", r.dynamic_fraction.mean);
}

#[test]
fn burn_in_probe_is_pinned() {
    let n = 500;
    let g = random_regular(n, 8, 5).unwrap();
    let lambda = 0.7 * lambda_c(8).unwrap();
    let start = IndependentSet::greedy_maximal(&g, 0..n);
    let long = (10.0 * n as f64 * 8f64.ln()) as u64;
    let params = BurnInParams {
        vertex: 0,
        rho: 2.0,
        radius: 2,
        checkpoints: vec![0, 500, 2000, long],
        replicates: 200,
        seed: 3,
    };
    let r = BurnInProbe::new(&g, lambda, start, params).unwrap().run();
    assert_eq!(r.fractions[0], 0.0);
    for (got, pin) in r.fractions[1..].iter().zip([0.73, 0.98, 0.985]) {
        assert!(rel_close(*got, pin), "{:?}", r.fractions);
    }
}

#[test]
fn coalesced_start_stays_coalesced() {
    let g = random_regular(60, 4, 2).unwrap();
    let lambda = 0.5;
    let sol = solve_bp(&g, lambda).unwrap();
    let params = CouplingParams {
        steps: 3000,
        replicates: 10,
        start: StartPolicy::Coalesced,
        seed: 2,
    };
    let r = CouplingExperiment::new(&g, lambda, sol.phi, params).unwrap().run();
    assert_eq!(r.hamming.mean, 0.0);
    assert_eq!(r.coalesced_fraction, 1.0);
}

#[test]
fn replicates_are_reproducible_and_order_free() {
    let g = random_regular(200, 6, 9).unwrap();
    let lambda = 0.5 * lambda_c(6).unwrap();
    let sol = solve_bp(&g, lambda).unwrap();
    let params = CouplingParams {
        steps: 2000,
        replicates: 16,
        start: StartPolicy::EmptyPlusRandom,
        seed: 11,
    };
    let exp = CouplingExperiment::new(&g, lambda, sol.phi.clone(), params).unwrap();
    let first = exp.run();
    assert_eq!(first, exp.run());
    let mut outcomes: Vec<(usize, CouplingOutcome)> =
        (0..16).rev().map(|i| (i, exp.run_replicate(i))).collect();
    outcomes.sort_by_key(|(i, _)| *i);
    assert_eq!(first, exp.aggregate(outcomes.into_iter().map(|(_, o)| o).collect()));
    // Weighted distance dominates Hamming replicate by replicate.
    assert!(first.weighted.mean >= first.hamming.mean);
}

#[test]
fn heawood_solution_uses_newton() {
    let g = Graph::heawood();
    let lambda = 0.5 * lambda_c(3).unwrap();
    let sol = solve_bp(&g, lambda).unwrap();
    assert_eq!(sol.method, FixedPointMethod::Newton);
    let x = hardcore_core::bp::x_hat(lambda, 3);
    assert!(sol.omega_star.values().iter().all(|&w| (w - x).abs() < 1e-10));
}
