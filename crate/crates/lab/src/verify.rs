//! Verification suites. Each suite checks one acceptance criterion and
//! reports a single pass/fail verdict with the measured values behind it.

use hardcore_core::bp::{
    alpha, apply_f, contraction_factor, iterate_f, jacobian_rows, observed_delta0,
    scaled_jacobian_times_phi, uniqueness_margin, verify_phi_contraction, FixedPointOptions,
    VertexField,
};
use hardcore_core::dynamics::ChainState;
use hardcore_core::estimators::{
    bp_accuracy, estimate_partition, solve_bp, CouplingExperiment, CouplingParams,
    PartitionOptions, Replicated, StartPolicy, UniformityExperiment, UniformityParams, Z_95,
};
use hardcore_core::graph::{random_connected, random_regular, random_tree};
use hardcore_core::model::lambda_c;
use hardcore_core::oracle::{exact_glauber_kernel, exact_partition};
use hardcore_core::rng::stream_rng;
use hardcore_core::{Graph, IndependentSet};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::report::Check;
use crate::runner::pool;

/// Relative tolerance on every regression pin.
pub const PIN_TOLERANCE: f64 = 0.1;

pub mod pins {
    /// Heawood graph, `λ = λ_c(3)/2`, 100 rounds of BP.
    pub const HEAWOOD_EDGE_ERROR: f64 = 0.093_415;
    pub const HEAWOOD_VERTEX_ERROR: f64 = 0.730_199;
    /// Heawood uniformity at vertex 0, `ε = 0.3`.
    pub const HEAWOOD_STATIONARY_FRACTION: f64 = 0.463_361;
    pub const HEAWOOD_DYNAMIC_FRACTION: f64 = 0.4225;
    /// Random 12-regular graph on 2000 vertices, `λ = 0.7 λ_c(12)`, `T = 10n`.
    pub const COUPLING_MEAN_HAMMING: f64 = 0.175;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    fn new(id: u32, name: &'static str, checks: Vec<Check>, summary: String) -> Self {
        Self {
            id,
            name,
            passed: checks.iter().all(|c| c.passed),
            summary,
            checks,
        }
    }
}

/// Sample sizes for the Monte Carlo criteria; `full` is the acceptance setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effort {
    pub stationarity_samples: usize,
    pub counting_trials: usize,
    pub jobs: usize,
}

impl Effort {
    pub fn full(jobs: usize) -> Self {
        Self {
            stationarity_samples: 1_000_000,
            counting_trials: 100,
            jobs,
        }
    }
}

pub const SUITES: &[&str] = &[
    "oracle",
    "lambda-c",
    "uniqueness",
    "contraction",
    "phi",
    "jacobian",
    "stationarity",
    "trees",
    "counting",
    "pins",
];

pub fn run_suite(name: &str, effort: Effort) -> Result<Vec<CriterionOutcome>> {
    let one = |r: Result<CriterionOutcome>| r.map(|c| vec![c]);
    match name {
        "oracle" => one(oracle_equivalence()),
        "lambda-c" => one(lambda_c_facts()),
        "uniqueness" => one(bp_uniqueness()),
        "contraction" => one(psi_contraction()),
        "phi" => one(phi_certification()),
        "jacobian" => one(jacobian_finite_differences()),
        "stationarity" => one(sampler_stationarity(effort.stationarity_samples, effort.jobs)),
        "trees" => one(tree_exactness()),
        "counting" => one(partition_estimator(effort.counting_trials, effort.jobs)),
        "pins" => one(pinned_regressions(effort.jobs)),
        "all" => {
            let mut out = Vec::new();
            for suite in SUITES {
                out.extend(run_suite(suite, effort)?);
            }
            Ok(out)
        }
        other => Err(LabError::usage(format!(
            "unknown suite `{other}`; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}

/// `Z` by direct enumeration of all `2^n` vertex subsets.
pub fn brute_force_partition(g: &Graph, lambda: f64) -> f64 {
    let n = g.vertex_count();
    assert!(n < 26, "brute force is limited to small graphs");
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0, |m, &u| m | 1 << u))
        .collect();
    let mut by_size = vec![0u64; n + 1];
    for set in 0u32..1 << n {
        if (0..n).all(|v| set >> v & 1 == 0 || nbr[v] & set == 0) {
            by_size[set.count_ones() as usize] += 1;
        }
    }
    by_size.iter().rev().fold(0.0, |acc, &c| acc * lambda + c as f64)
}

/// Every connected labeled graph on `n` vertices.
pub fn all_connected_graphs(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u64..1 << pairs.len())
        .filter_map(|bits| {
            let edges = pairs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &e)| e);
            let g = Graph::from_edges(n, edges).unwrap();
            g.is_connected().then_some(g)
        })
        .collect()
}

/// All connected labeled graphs on at most 6 vertices, 60 seeded random
/// connected graphs for each `n` from 7 to 12, and named graphs.
pub fn oracle_corpus() -> Vec<Graph> {
    let mut corpus: Vec<Graph> = (1..=6).flat_map(all_connected_graphs).collect();
    for n in 7..=12 {
        for seed in 0..60u64 {
            corpus.push(random_connected(n, (seed as usize) % (2 * n), seed));
        }
    }
    corpus.extend([
        Graph::petersen(),
        Graph::grid(3, 4),
        Graph::complete_bipartite(6, 6),
        Graph::complete(12),
        Graph::cycle(12),
        Graph::star(11),
    ]);
    corpus
}

pub fn oracle_equivalence() -> Result<CriterionOutcome> {
    let corpus = oracle_corpus();
    let mut worst: f64 = 0.0;
    for g in &corpus {
        for lambda in [0.25, 1.0, 2.0] {
            let brute = brute_force_partition(g, lambda);
            let exact = exact_partition(g, lambda)?;
            worst = worst.max((exact / brute - 1.0).abs());
        }
    }
    Ok(CriterionOutcome::new(
        1,
        "oracle equivalence",
        vec![Check::at_most("max relative error", worst, 1e-12)],
        format!("{} graphs x 3 fugacities, max relative error {worst:.2e}", corpus.len()),
    ))
}

pub fn lambda_c_facts() -> Result<CriterionOutcome> {
    let l5 = lambda_c(5)?;
    let l6 = lambda_c(6)?;
    Ok(CriterionOutcome::new(
        2,
        "critical fugacity signs",
        vec![
            Check::at_least("lambda_c(5) - 1", l5 - 1.0, f64::MIN_POSITIVE),
            Check::at_most("lambda_c(6) - 1", l6 - 1.0, -f64::MIN_POSITIVE),
        ],
        format!("lambda_c(5) = {l5:.6}, lambda_c(6) = {l6:.6}"),
    ))
}

fn random_field(g: &Graph, seed: u64, stream: u64, lo: f64, hi: f64) -> VertexField {
    let mut rng = stream_rng(seed, stream);
    let values = (0..g.vertex_count()).map(|_| rng.random_range(lo..=hi)).collect();
    VertexField::new(g, values).expect("values lie in [0, 1]")
}

/// Residuals below this are dominated by rounding and excluded from rates.
const RATE_FLOOR: f64 = 1e-8;

pub fn bp_uniqueness() -> Result<CriterionOutcome> {
    let mut checks = Vec::new();
    let mut parts = Vec::new();
    for d in [4usize, 6, 8, 12] {
        let lambda = 0.8 * lambda_c(d)?;
        let a = alpha(lambda, d);
        let (mut converged, mut runs, mut spread, mut rate) = (0usize, 0usize, 0.0f64, 0.0f64);
        for seed in 0..3u64 {
            let g = random_regular(50, d, seed)?;
            let mut points: Vec<VertexField> = Vec::new();
            for init in 0..10u64 {
                let start = random_field(&g, 1000 * d as u64 + seed, init, 0.0, 1.0);
                let r = iterate_f(&g, lambda, start, FixedPointOptions::default());
                runs += 1;
                if let Some(x) = r.observed_rate(RATE_FLOOR) {
                    rate = rate.max(x);
                }
                if r.converged {
                    converged += 1;
                    for p in &points {
                        spread = spread.max(p.max_abs_difference(&r.fixed_point));
                    }
                    points.push(r.fixed_point);
                }
            }
        }
        checks.push(Check::at_least(&format!("degree {d}: converged runs"), converged as f64, runs as f64));
        checks.push(Check::at_most(&format!("degree {d}: fixed point spread"), spread, 1e-8));
        checks.push(Check::at_most(&format!("degree {d}: observed rate"), rate, a + 1e-6));
        parts.push(format!("D={d}: {converged}/{runs} converged, spread {spread:.1e}, rate {rate:.4} vs alpha {a:.4}"));
    }
    Ok(CriterionOutcome::new(3, "BP uniqueness", checks, parts.join("; ")))
}

pub fn psi_contraction() -> Result<CriterionOutcome> {
    let (mut pairs, mut violations, mut worst_slack) = (0usize, 0usize, f64::NEG_INFINITY);
    for d in [3usize, 4, 6, 8, 12] {
        let at_ratio = 0.8 * lambda_c(d)?;
        let edge = 0.99 * lambda_c(d + 1)?;
        for lambda in [at_ratio, edge] {
            let a = alpha(lambda, d);
            if a > 1.0 {
                continue;
            }
            for seed in 0..3u64 {
                let g = random_regular(50, d, seed)?;
                for pair in 0..100u64 {
                    let x = random_field(&g, seed, 2 * pair, 0.0, 1.0);
                    let y = random_field(&g, seed, 2 * pair + 1, 0.0, 1.0);
                    if let Some(k) = contraction_factor(&g, lambda, &x, &y) {
                        pairs += 1;
                        worst_slack = worst_slack.max(k - a);
                        if k > a + 1e-9 {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(CriterionOutcome::new(
        4,
        "potential contraction",
        vec![Check::at_most("violations", violations as f64, 0.0)],
        format!("{pairs} field pairs, {violations} violations, max factor - alpha = {worst_slack:.3e}"),
    ))
}

/// `random_regular(n, d)` with every seventh edge removed, when that keeps
/// the maximum degree at `d`.
fn thinned_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    let g = random_regular(n, d, seed)?;
    let edges = g.edges().enumerate().filter(|(i, _)| i % 7 != 3).map(|(_, e)| e);
    let h = Graph::from_edges(n, edges)?;
    Ok(if h.max_degree() == d { h } else { g })
}

pub fn phi_certification() -> Result<CriterionOutcome> {
    let delta = 0.2;
    let threshold = 1.0 - delta / 6.0;
    let (mut graphs, mut worst_ratio, mut worst_jphi) = (0usize, 0.0f64, f64::NEG_INFINITY);
    let (mut phi_lo, mut phi_hi) = (f64::INFINITY, 0.0f64);
    let mut degrees = Vec::new();
    for d in 3..=40usize {
        let lambda = 0.8 * lambda_c(d)?;
        if uniqueness_margin(lambda, d, delta) < 0.0 {
            continue;
        }
        degrees.push(d);
        let n = 2 * d + 20;
        for g in [random_regular(n, d, 1)?, thinned_regular(n, d, 2)?] {
            graphs += 1;
            let sol = solve_bp(&g, lambda)?;
            phi_lo = phi_lo.min(sol.phi.min());
            phi_hi = phi_hi.max(sol.phi.max());
            let report = verify_phi_contraction(&g, lambda, &sol.omega_star, &sol.phi, delta);
            worst_ratio = worst_ratio.max(report.max_ratio);
            let jphi = scaled_jacobian_times_phi(&g, lambda, &sol.omega_star, &sol.phi);
            for (v, x) in jphi.iter().enumerate() {
                worst_jphi = worst_jphi.max(x - threshold * sol.phi.get(v));
            }
        }
    }
    let delta0 = observed_delta0(1.0 - delta, delta, 10_000);
    let checks = vec![
        Check::at_least("pairs with nonnegative margin", degrees.len() as f64, 1.0),
        Check::at_least("min phi", phi_lo, 1.0),
        Check::at_most("max phi", phi_hi, 12.0),
        Check::at_most("max contraction ratio", worst_ratio, threshold),
        Check::at_most("max (J Phi - (1 - delta/6) Phi)", worst_jphi, 1e-10),
    ];
    Ok(CriterionOutcome::new(
        5,
        "phi certification",
        checks,
        format!(
            "degrees {}..={} ({graphs} graphs), Delta0 = {}, phi in [{phi_lo:.4}, {phi_hi:.4}], max ratio {worst_ratio:.5} vs {threshold:.5}",
            degrees.first().copied().unwrap_or(0),
            degrees.last().copied().unwrap_or(0),
            delta0.map_or("none".to_string(), |d| d.to_string()),
        ),
    ))
}

pub fn jacobian_finite_differences() -> Result<CriterionOutcome> {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..10u64 {
        let n = 5 + 2 * i as usize;
        let g = random_connected(n, 2 * i as usize, i);
        let lambda = 0.5 + 0.35 * i as f64;
        let w = random_field(&g, 77, i, 0.05, 0.95);
        let jac = jacobian_rows(&g, lambda, &w);
        for u in 0..n {
            let shifted = |s: f64| {
                let mut x = w.values().to_vec();
                x[u] += s;
                apply_f(&g, lambda, &VertexField::new(&g, x).expect("stays in range"))
            };
            let (plus, minus) = (shifted(h), shifted(-h));
            for v in 0..n {
                // Entries are magnitudes: F decreases in every neighbor.
                let fd = (minus.get(v) - plus.get(v)) / (2.0 * h);
                worst = worst.max((jac.entry(&g, v, u) - fd).abs());
            }
        }
    }
    Ok(CriterionOutcome::new(
        6,
        "Jacobian vs finite differences",
        vec![Check::at_most("max entry error", worst, 1e-6)],
        format!("10 graphs, h = 1e-5, max entry error {worst:.2e}"),
    ))
}

fn stationarity_graphs() -> Vec<(&'static str, Graph, f64)> {
    vec![
        ("cycle 8", Graph::cycle(8), 1.0),
        ("petersen", Graph::petersen(), 0.5),
        ("path 9", Graph::path(9), 2.0),
        ("K3,4", Graph::complete_bipartite(3, 4), 1.0),
        ("star 6", Graph::star(6), 1.5),
    ]
}

fn occupancy_mask(occupied: &[bool]) -> u64 {
    occupied.iter().enumerate().fold(0, |m, (v, &o)| m | (u64::from(o) << v))
}

pub fn sampler_stationarity(samples: usize, jobs: usize) -> Result<CriterionOutcome> {
    let graphs = stationarity_graphs();
    let results: Vec<Result<(f64, f64)>> = pool(jobs)?.install(|| {
        graphs
            .par_iter()
            .enumerate()
            .map(|(i, (_, g, lambda))| {
                let kernel = exact_glauber_kernel(g, *lambda)?;
                let table = kernel.table();
                let pi = table.probabilities();
                let mut balance: f64 = 0.0;
                for from in 0..kernel.state_count() {
                    for &(to, p) in kernel.row(from) {
                        balance = balance.max((pi[from] * p - pi[to] * kernel.entry(to, from)).abs());
                    }
                }
                let n = g.vertex_count() as u64;
                let mut chain = ChainState::empty(g, *lambda, stream_rng(31, i as u64));
                chain.run(100 * n);
                let mut counts = vec![0u64; kernel.state_count()];
                for _ in 0..samples {
                    chain.run(10 * n);
                    let state = table
                        .index_of_mask(occupancy_mask(chain.occupied()))
                        .expect("chain stays on independent sets");
                    counts[state] += 1;
                }
                let tv = 0.5
                    * counts
                        .iter()
                        .zip(pi)
                        .map(|(&c, &p)| (c as f64 / samples as f64 - p).abs())
                        .sum::<f64>();
                Ok((balance, tv))
            })
            .collect()
    });
    let mut checks = Vec::new();
    let mut parts = Vec::new();
    for ((name, _, _), r) in graphs.iter().zip(results) {
        let (balance, tv) = r?;
        checks.push(Check::at_most(&format!("{name}: detailed balance"), balance, 1e-12));
        checks.push(Check::at_most(&format!("{name}: empirical TV"), tv, 0.01));
        parts.push(format!("{name}: TV {tv:.4}"));
    }
    Ok(CriterionOutcome::new(
        7,
        "sampler stationarity",
        checks,
        format!("{samples} samples per graph; {}", parts.join(", ")),
    ))
}

pub fn tree_exactness() -> Result<CriterionOutcome> {
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let n = 5 + (45 * i as usize) / 19;
        let t = random_tree(n, i);
        for lambda in [0.1, 1.0, 4.0] {
            worst = worst.max(bp_accuracy(&t, lambda, n)?.max_edge_error);
        }
    }
    Ok(CriterionOutcome::new(
        8,
        "BP exact on trees",
        vec![Check::at_most("max edge error", worst, 1e-9)],
        format!("20 trees with 5..=50 vertices x 3 fugacities, max error {worst:.2e}"),
    ))
}

pub fn partition_estimator(trials: usize, jobs: usize) -> Result<CriterionOutcome> {
    let cases = [
        ("triangle", Graph::complete(3), 1.0),
        ("3-regular n=20", random_regular(20, 3, 1)?, 0.5 * lambda_c(3)?),
    ];
    let required = (trials * 95).div_ceil(100);
    let mut checks = Vec::new();
    let mut parts = Vec::new();
    for (name, g, lambda) in &cases {
        let z = exact_partition(g, *lambda)?;
        let hits: Vec<Result<bool>> = pool(jobs)?.install(|| {
            (0..trials as u64)
                .into_par_iter()
                .map(|seed| {
                    let est = estimate_partition(g, *lambda, 0.05, Z_95, seed, PartitionOptions::default())?;
                    Ok((est.estimate / z - 1.0).abs() <= 0.05)
                })
                .collect()
        });
        let hits = hits.into_iter().collect::<Result<Vec<_>>>()?.into_iter().filter(|&h| h).count();
        checks.push(Check::at_least(&format!("{name}: trials within 5%"), hits as f64, required as f64));
        parts.push(format!("{name}: {hits}/{trials}"));
    }
    Ok(CriterionOutcome::new(9, "partition estimator", checks, parts.join(", ")))
}

fn pin_check(name: &str, value: f64, pin: f64) -> Check {
    Check::at_most(name, (value / pin - 1.0).abs(), PIN_TOLERANCE)
}

pub fn pinned_regressions(jobs: usize) -> Result<CriterionOutcome> {
    let heawood = Graph::heawood();
    let lambda = 0.5 * lambda_c(3)?;
    let acc = bp_accuracy(&heawood, lambda, 100)?;

    let params = UniformityParams {
        vertex: 0,
        epsilon: 0.3,
        burn_in: 1400,
        window: 14,
        replicates: 400,
        seed: 1,
    };
    let uniformity = UniformityExperiment::new(&heawood, lambda, IndependentSet::empty(14), params)?;
    let uni = crate::runner::run(&uniformity, jobs)?;

    let n = 2000;
    let g = random_regular(n, 12, 1)?;
    let lambda12 = 0.7 * lambda_c(12)?;
    let sol = solve_bp(&g, lambda12)?;
    let params = CouplingParams {
        steps: 10 * n as u64,
        replicates: 200,
        start: StartPolicy::BurnedIn {
            burn_in: (10.0 * n as f64 * 12f64.ln()) as u64,
        },
        seed: 7,
    };
    let coupling = CouplingExperiment::new(&g, lambda12, sol.phi, params)?;
    debug_assert_eq!(coupling.replicates(), 200);
    let cr = crate::runner::run(&coupling, jobs)?;

    let checks = vec![
        pin_check("heawood edge error", acc.max_edge_error, pins::HEAWOOD_EDGE_ERROR),
        pin_check("heawood vertex error", acc.max_vertex_error, pins::HEAWOOD_VERTEX_ERROR),
        pin_check("heawood stationary fraction", uni.stationary_fraction, pins::HEAWOOD_STATIONARY_FRACTION),
        pin_check("heawood dynamic fraction", uni.dynamic_fraction.mean, pins::HEAWOOD_DYNAMIC_FRACTION),
        pin_check("coupling mean hamming", cr.hamming.mean, pins::COUPLING_MEAN_HAMMING),
    ];
    Ok(CriterionOutcome::new(
        10,
        "pinned regressions",
        checks,
        format!(
            "heawood errors {:.6}/{:.6}, fractions {:.6}/{:.4}, coupling hamming {:.4} +- {:.4}",
            acc.max_edge_error,
            acc.max_vertex_error,
            uni.stationary_fraction,
            uni.dynamic_fraction.mean,
            cr.hamming.mean,
            cr.hamming.half_width
        ),
    ))
}
