//! Experiments built from the other modules: exact total variation and
//! mixing times, uniformity checks, BP accuracy against the oracle, coupling
//! contraction, the partition-function estimator and the burn-in probe.
//!
//! Randomized experiments implement [`Replicated`]: every replicate draws
//! from its own stream `stream_rng(seed, index)`, so replicates can run in
//! any order or in parallel and the aggregate stays bit-identical.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::bp::{
    apply_f, build_phi, iterate_f, loopy_bp_marginals, newton_fixed_point_f, BpError, BpMode,
    FixedPointOptions, PhiFunction, VertexField, NEWTON_MAX_VERTICES,
};
use crate::dynamics::{
    s_stat, w_stat, ChainState, Configuration, CoupledPair, DynamicsError, HeavinessClassifier,
};
use crate::graph::Graph;
use crate::model::IndependentSet;
use crate::oracle::{self, GibbsTable, GlauberKernel, OracleError, PartitionSolver};
use crate::rng::{stream_rng, SimRng};
use crate::stats::Summary;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("total variation still above {epsilon} after {max_steps} steps")]
    MixingNotReached { epsilon: f64, max_steps: usize },
    #[error("factor {index} estimated as {estimate:e}, at or below the floor {floor:e}")]
    DegenerateFactor { index: usize, estimate: f64, floor: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(&'static str),
}

/// An experiment made of independent replicates.
pub trait Replicated: Sync {
    type Outcome: Send;
    type Report;

    fn replicates(&self) -> usize;
    fn run_replicate(&self, index: usize) -> Self::Outcome;
    /// Combines outcomes given in replicate order.
    fn aggregate(&self, outcomes: Vec<Self::Outcome>) -> Self::Report;

    fn run(&self) -> Self::Report {
        let outcomes = (0..self.replicates()).map(|i| self.run_replicate(i)).collect();
        self.aggregate(outcomes)
    }
}

/// A mean with its normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
    pub count: u64,
}

impl Estimate {
    pub fn from_summary(summary: &Summary, z: f64) -> Self {
        Self {
            mean: summary.mean(),
            half_width: z * summary.std_error(),
            count: summary.count(),
        }
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>, z: f64) -> Self {
        Self::from_summary(&values.into_iter().collect(), z)
    }
}

/// `d_TV(X_t, μ)` for the chain started at `start`.
pub fn tv_exact(
    g: &Graph,
    lambda: f64,
    t: usize,
    start: &IndependentSet,
) -> Result<f64, EstimatorError> {
    let kernel = oracle::exact_glauber_kernel(g, lambda)?;
    let index = kernel
        .table()
        .index_of(start)
        .ok_or(EstimatorError::InvalidParameters("start state is not in Ω"))?;
    Ok(tv_curve(&kernel, index, t).pop().unwrap_or(0.0))
}

/// `d_TV(X_s, μ)` for `s = 0..=t` from the state with table index `start`.
pub fn tv_curve(kernel: &GlauberKernel, start: usize, t: usize) -> Vec<f64> {
    let table = kernel.table();
    let mut dist = vec![0.0; kernel.state_count()];
    dist[start] = 1.0;
    let mut next = vec![0.0; dist.len()];
    let mut curve = Vec::with_capacity(t + 1);
    curve.push(table.tv_distance(&dist));
    for _ in 0..t {
        kernel.step_distribution(&dist, &mut next);
        core::mem::swap(&mut dist, &mut next);
        curve.push(table.tv_distance(&dist));
    }
    curve
}

/// Starting states over which the worst-case distance is taken.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSet {
    All,
    /// Table indices.
    States(Vec<usize>),
}

/// `T_mix(ε)`: the least `t` with `d_TV(X_t, μ) ≤ ε` for every start.
pub fn mixing_time_exact(
    g: &Graph,
    lambda: f64,
    epsilon: f64,
    starts: &StartSet,
    max_steps: usize,
) -> Result<usize, EstimatorError> {
    let kernel = oracle::exact_glauber_kernel(g, lambda)?;
    mixing_time_from_kernel(&kernel, epsilon, starts, max_steps)
}

pub fn mixing_time_from_kernel(
    kernel: &GlauberKernel,
    epsilon: f64,
    starts: &StartSet,
    max_steps: usize,
) -> Result<usize, EstimatorError> {
    let m = kernel.state_count();
    let indices: Vec<usize> = match starts {
        StartSet::All => (0..m).collect(),
        StartSet::States(s) => s.clone(),
    };
    if indices.iter().any(|&i| i >= m) {
        return Err(EstimatorError::InvalidParameters("start index outside Ω"));
    }
    let table = kernel.table();
    let mut dists: Vec<Vec<f64>> = indices
        .iter()
        .map(|&i| {
            let mut d = vec![0.0; m];
            d[i] = 1.0;
            d
        })
        .collect();
    let mut scratch = vec![0.0; m];
    for t in 0..=max_steps {
        let worst = dists
            .iter()
            .map(|d| table.tv_distance(d))
            .fold(0.0, f64::max);
        if worst <= epsilon {
            return Ok(t);
        }
        for d in dists.iter_mut() {
            kernel.step_distribution(d, &mut scratch);
            core::mem::swap(d, &mut scratch);
        }
    }
    Err(EstimatorError::MixingNotReached {
        epsilon,
        max_steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointMethod {
    /// Synchronous iteration of `F` from `ω ≡ 1` converged.
    Iteration,
    /// Iteration did not converge; Newton's method found the fixed point.
    Newton,
}

/// BP fixed point `ω*` and the weights `Φ` built from it.
#[derive(Debug, Clone)]
pub struct BpSolution {
    pub omega_star: VertexField,
    pub phi: PhiFunction,
    pub method: FixedPointMethod,
    pub iterations: usize,
}

/// `ω*` by plain iteration, falling back to Newton's method on graphs with
/// at most [`NEWTON_MAX_VERTICES`] vertices when iteration does not converge.
pub fn solve_bp(g: &Graph, lambda: f64) -> Result<BpSolution, EstimatorError> {
    let options = FixedPointOptions::default();
    let iterated = iterate_f(g, lambda, VertexField::constant(g, 1.0), options);
    let (report, method) = if iterated.converged {
        (iterated, FixedPointMethod::Iteration)
    } else if g.vertex_count() <= NEWTON_MAX_VERTICES {
        // Start between the two branches of the 2-cycle.
        let next = apply_f(g, lambda, &iterated.fixed_point);
        let mid: Vec<f64> = iterated
            .fixed_point
            .values()
            .iter()
            .zip(next.values())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let init = VertexField::new(g, mid)?;
        (newton_fixed_point_f(g, lambda, init, options)?, FixedPointMethod::Newton)
    } else {
        return Err(iterated.into_result().unwrap_err().into());
    };
    let phi = build_phi(lambda, &report.fixed_point)?;
    Ok(BpSolution {
        omega_star: report.fixed_point,
        phi,
        method,
        iterations: report.iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityParams {
    pub vertex: usize,
    pub epsilon: f64,
    pub burn_in: u64,
    pub window: u64,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityReport {
    pub vertex: usize,
    pub epsilon: f64,
    /// `Σ_{z ∈ N(v)} ω*(z)`.
    pub s_center: f64,
    /// `Σ_{z ∈ N(v)} ω*(z)Φ(z) + εΔ`.
    pub w_bound: f64,
    /// `εΔ`.
    pub tolerance: f64,
    /// Probability under `μ` that `|S_X(v) − Σω*| ≤ εΔ`.
    pub stationary_fraction: f64,
    /// Whether the stationary fraction is exact or from replicates.
    pub stationary_exact: bool,
    /// Fraction of replicates keeping `W_{X_t}(v)` below the bound over the
    /// whole window.
    pub dynamic_fraction: Estimate,
    pub replicates: usize,
    pub seed: u64,
}

/// Uniformity of the unblocked neighbors of one vertex, statically under
/// `μ` and along trajectories after burn-in.
pub struct UniformityExperiment<'g> {
    graph: &'g Graph,
    lambda: f64,
    params: UniformityParams,
    start: IndependentSet,
    solution: BpSolution,
    s_center: f64,
    w_bound: f64,
    tolerance: f64,
    table: Option<GibbsTable>,
}

/// What one uniformity replicate observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformityOutcome {
    /// `|S_X(v) − Σω*| ≤ εΔ` at the end of burn-in.
    pub s_within: bool,
    /// `W_{X_t}(v)` stayed below the bound at every step of the window.
    pub w_below: bool,
}

impl<'g> UniformityExperiment<'g> {
    pub fn new(
        graph: &'g Graph,
        lambda: f64,
        start: IndependentSet,
        params: UniformityParams,
    ) -> Result<Self, EstimatorError> {
        let v = params.vertex;
        if v >= graph.vertex_count() {
            return Err(EstimatorError::InvalidParameters("vertex out of range"));
        }
        if params.replicates == 0 || params.epsilon <= 0.0 {
            return Err(EstimatorError::InvalidParameters(
                "need at least one replicate and ε > 0",
            ));
        }
        if start.vertex_count() != graph.vertex_count() {
            return Err(EstimatorError::InvalidParameters("start state has the wrong size"));
        }
        let solution = solve_bp(graph, lambda)?;
        let w = solution.omega_star.values();
        let s_center = graph.neighbors(v).iter().map(|&z| w[z]).sum();
        let tolerance = params.epsilon * graph.max_degree() as f64;
        let w_bound = graph
            .neighbors(v)
            .iter()
            .map(|&z| w[z] * solution.phi.get(z))
            .sum::<f64>()
            + tolerance;
        let table = if graph.vertex_count() <= oracle::DISTRIBUTION_MAX_VERTICES {
            GibbsTable::new(graph, lambda, oracle::DEFAULT_STATE_CAP).ok()
        } else {
            None
        };
        Ok(Self {
            graph,
            lambda,
            params,
            start,
            solution,
            s_center,
            w_bound,
            tolerance,
            table,
        })
    }

    pub fn solution(&self) -> &BpSolution {
        &self.solution
    }

    fn s_within(&self, occupied: &[bool]) -> bool {
        let s = s_stat(self.graph, occupied, self.params.vertex) as f64;
        libm::fabs(s - self.s_center) <= self.tolerance
    }
}

impl Replicated for UniformityExperiment<'_> {
    type Outcome = UniformityOutcome;
    type Report = UniformityReport;

    fn replicates(&self) -> usize {
        self.params.replicates
    }

    fn run_replicate(&self, index: usize) -> UniformityOutcome {
        let p = &self.params;
        let rng = stream_rng(p.seed, index as u64);
        let mut chain = ChainState::from_set(self.graph, self.lambda, &self.start, rng);
        chain.run(p.burn_in);
        let s_within = self.s_within(chain.occupied());
        let mut w_below = true;
        for _ in 0..p.window {
            chain.step();
            if w_stat(self.graph, chain.occupied(), p.vertex, &self.solution.phi) >= self.w_bound {
                w_below = false;
                break;
            }
        }
        UniformityOutcome { s_within, w_below }
    }

    fn aggregate(&self, outcomes: Vec<UniformityOutcome>) -> UniformityReport {
        let (stationary_fraction, stationary_exact) = match &self.table {
            Some(table) => (
                table.expectation(|s| f64::from(u8::from(self.s_within(s.occupancy())))),
                true,
            ),
            None => (
                outcomes.iter().filter(|o| o.s_within).count() as f64 / outcomes.len() as f64,
                false,
            ),
        };
        let dynamic_fraction = Estimate::from_values(
            outcomes.iter().map(|o| f64::from(u8::from(o.w_below))),
            Z_95,
        );
        UniformityReport {
            vertex: self.params.vertex,
            epsilon: self.params.epsilon,
            s_center: self.s_center,
            w_bound: self.w_bound,
            tolerance: self.tolerance,
            stationary_fraction,
            stationary_exact,
            dynamic_fraction,
            replicates: self.params.replicates,
            seed: self.params.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpAccuracyReport {
    pub iterations: usize,
    /// `max_{(v,p)} |q^t(v,p) / μ(v occ | p unocc) − 1|`.
    pub max_edge_error: f64,
    /// Arc `(v, p)` attaining the maximum.
    pub worst_edge: Option<(usize, usize)>,
    /// `max_v |q̃^t(v) / μ(v occ) − 1|`.
    pub max_vertex_error: f64,
    pub worst_vertex: Option<usize>,
}

pub fn bp_accuracy(g: &Graph, lambda: f64, t: usize) -> Result<BpAccuracyReport, EstimatorError> {
    let mut solver = PartitionSolver::new(g, lambda)?;
    let parented = loopy_bp_marginals(g, lambda, t, BpMode::Parented);
    let unrooted = loopy_bp_marginals(g, lambda, t, BpMode::Unrooted);
    let mut max_edge_error = 0.0;
    let mut worst_edge = None;
    for arc in 0..g.arc_count() {
        let (v, p) = (g.arc_tail(arc), g.arc_head(arc));
        let exact = solver.conditional_marginal(v, p)?;
        let err = libm::fabs(parented.values[arc] / exact - 1.0);
        if worst_edge.is_none() || err > max_edge_error {
            max_edge_error = err;
            worst_edge = Some((v, p));
        }
    }
    let mut max_vertex_error = 0.0;
    let mut worst_vertex = None;
    for v in 0..g.vertex_count() {
        let exact = solver.marginal(v)?;
        let err = libm::fabs(unrooted.values[v] / exact - 1.0);
        if worst_vertex.is_none() || err > max_vertex_error {
            max_vertex_error = err;
            worst_vertex = Some(v);
        }
    }
    Ok(BpAccuracyReport {
        iterations: t,
        max_edge_error,
        worst_edge,
        max_vertex_error,
        worst_vertex,
    })
}

/// How the adjacent starting pair `(X₀, Y₀)` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum StartPolicy {
    /// `X₀ = ∅`, `Y₀ = {v}`.
    EmptyPlus(usize),
    /// `X₀ = ∅`, `Y₀ = {v}` with `v` uniform per replicate.
    EmptyPlusRandom,
    /// `X₀` is a single chain run for `burn_in` steps from `∅`; `Y₀` toggles
    /// a uniform vertex among those whose toggle keeps independence.
    BurnedIn { burn_in: u64 },
    /// Both chains start equal.
    Coalesced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingParams {
    pub steps: u64,
    pub replicates: usize,
    pub start: StartPolicy,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOutcome {
    pub hamming: usize,
    pub weighted: f64,
    pub initial_weighted: f64,
    pub coalesced: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    pub steps: u64,
    /// `E[H(X_T, Y_T)]`.
    pub hamming: Estimate,
    /// `E[𝒟(X_T, Y_T)]`.
    pub weighted: Estimate,
    /// `E[𝒟(X_T, Y_T) − 𝒟(X₀, Y₀)] / T`.
    pub weighted_drift_per_step: f64,
    pub coalesced_fraction: f64,
    pub replicates: usize,
    pub seed: u64,
}

/// Distance between two coupled chains after `T` steps, from an adjacent
/// starting pair.
pub struct CouplingExperiment<'g> {
    graph: &'g Graph,
    lambda: f64,
    phi: PhiFunction,
    params: CouplingParams,
}

impl<'g> CouplingExperiment<'g> {
    pub fn new(
        graph: &'g Graph,
        lambda: f64,
        phi: PhiFunction,
        params: CouplingParams,
    ) -> Result<Self, EstimatorError> {
        if params.replicates == 0 || graph.vertex_count() == 0 {
            return Err(EstimatorError::InvalidParameters(
                "need at least one replicate and a nonempty graph",
            ));
        }
        if phi.values().len() != graph.vertex_count() {
            return Err(EstimatorError::InvalidParameters("Φ has the wrong length"));
        }
        if let StartPolicy::EmptyPlus(v) = params.start {
            if v >= graph.vertex_count() {
                return Err(EstimatorError::InvalidParameters("start vertex out of range"));
            }
        }
        Ok(Self {
            graph,
            lambda,
            phi,
            params,
        })
    }

    fn start_pair(&self, rng: &mut SimRng) -> (Vec<bool>, Vec<bool>) {
        let g = self.graph;
        let n = g.vertex_count();
        let empty = vec![false; n];
        match self.params.start {
            StartPolicy::EmptyPlus(v) => {
                let mut y = empty.clone();
                y[v] = true;
                (empty, y)
            }
            StartPolicy::EmptyPlusRandom => {
                let mut y = empty.clone();
                y[rng.random_range(0..n)] = true;
                (empty, y)
            }
            StartPolicy::BurnedIn { burn_in } => {
                let seed: u64 = rng.random();
                let mut chain = ChainState::empty(g, self.lambda, stream_rng(seed, 0));
                chain.run(burn_in);
                let x = chain.occupied().to_vec();
                let candidates: Vec<usize> = (0..n)
                    .filter(|&v| x[v] || !chain.config().is_blocked(v))
                    .collect();
                let v = candidates[rng.random_range(0..candidates.len())];
                let mut y = x.clone();
                y[v] = !y[v];
                (x, y)
            }
            StartPolicy::Coalesced => (empty.clone(), empty),
        }
    }
}

impl Replicated for CouplingExperiment<'_> {
    type Outcome = CouplingOutcome;
    type Report = CouplingReport;

    fn replicates(&self) -> usize {
        self.params.replicates
    }

    fn run_replicate(&self, index: usize) -> CouplingOutcome {
        let mut rng = stream_rng(self.params.seed, index as u64);
        let (x, y) = self.start_pair(&mut rng);
        let x = Configuration::new(self.graph, x).expect("sized start");
        let y = Configuration::new(self.graph, y).expect("sized start");
        let mut pair = CoupledPair::new(x, y, self.lambda, rng).expect("same graph");
        let initial_weighted = pair.weighted_distance(&self.phi);
        pair.run(self.params.steps);
        CouplingOutcome {
            hamming: pair.hamming(),
            weighted: pair.weighted_distance(&self.phi),
            initial_weighted,
            coalesced: pair.coalesced(),
        }
    }

    fn aggregate(&self, outcomes: Vec<CouplingOutcome>) -> CouplingReport {
        let reps = outcomes.len() as f64;
        let drift = outcomes
            .iter()
            .map(|o| o.weighted - o.initial_weighted)
            .sum::<f64>()
            / reps;
        CouplingReport {
            steps: self.params.steps,
            hamming: Estimate::from_values(outcomes.iter().map(|o| o.hamming as f64), Z_95),
            weighted: Estimate::from_values(outcomes.iter().map(|o| o.weighted), Z_95),
            weighted_drift_per_step: if self.params.steps == 0 {
                0.0
            } else {
                drift / self.params.steps as f64
            },
            coalesced_fraction: outcomes.iter().filter(|o| o.coalesced).count() as f64 / reps,
            replicates: self.params.replicates,
            seed: self.params.seed,
        }
    }
}

/// How each factor `μ_{G_i}(v_i unoccupied)` is estimated from a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorEstimator {
    /// The indicator that `v_i` is unoccupied.
    Indicator,
    /// Its conditional expectation given the rest: 1 when `v_i` is blocked,
    /// `1/(1+λ)` otherwise.
    RaoBlackwell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOptions {
    /// Samples per factor are `ceil(C · n / ε²)`.
    pub sample_constant: f64,
    /// Burn-in per factor is `burn_in_factor · n_i · ln n_i` steps.
    pub burn_in_factor: f64,
    /// A factor estimate at or below this is an error.
    pub floor: f64,
    pub estimator: FactorEstimator,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self {
            sample_constant: 64.0,
            burn_in_factor: 20.0,
            floor: 1e-6,
            estimator: FactorEstimator::Indicator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorEstimate {
    /// Vertices of `G_i`.
    pub vertices: usize,
    pub burn_in: u64,
    pub samples: u64,
    /// Estimate of `μ_{G_i}(v_i unoccupied)`.
    pub estimate: f64,
    /// Standard error of the estimate.
    pub std_error: f64,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEstimate {
    pub estimate: f64,
    pub log_estimate: f64,
    /// Standard deviation of `ln Ẑ` by the delta method.
    pub log_std_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub z_score: f64,
    pub factors: Vec<FactorEstimate>,
    pub total_steps: u64,
    pub seed: u64,
}

/// Self-reducibility estimator `Z = Π_i 1 / μ_{G_i}(v_i unoccupied)` with
/// `G_i = G − {v_1, …, v_{i−1}}` and `v_i = i`. Each factor is a replicate.
pub struct PartitionEstimator<'g> {
    graph: &'g Graph,
    lambda: f64,
    epsilon: f64,
    z_score: f64,
    seed: u64,
    options: PartitionOptions,
    samples: u64,
}

impl<'g> PartitionEstimator<'g> {
    pub fn new(
        graph: &'g Graph,
        lambda: f64,
        epsilon: f64,
        z_score: f64,
        seed: u64,
        options: PartitionOptions,
    ) -> Result<Self, EstimatorError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(EstimatorError::InvalidParameters("λ must be positive"));
        }
        if !(epsilon > 0.0) || !(z_score > 0.0) {
            return Err(EstimatorError::InvalidParameters("ε and the z-score must be positive"));
        }
        let n = graph.vertex_count() as f64;
        let samples = libm::ceil(options.sample_constant * n / (epsilon * epsilon)) as u64;
        Ok(Self {
            graph,
            lambda,
            epsilon,
            z_score,
            seed,
            options,
            samples: samples.max(1),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn samples_per_factor(&self) -> u64 {
        self.samples
    }
}

impl Replicated for PartitionEstimator<'_> {
    type Outcome = FactorEstimate;
    type Report = Result<PartitionEstimate, EstimatorError>;

    fn replicates(&self) -> usize {
        self.graph.vertex_count()
    }

    fn run_replicate(&self, index: usize) -> FactorEstimate {
        let n = self.graph.vertex_count();
        let keep: Vec<bool> = (0..n).map(|v| v >= index).collect();
        // Order-preserving, so v_i becomes vertex 0 of G_i.
        let (sub, _) = self.graph.induced_subgraph(&keep);
        let ni = sub.vertex_count();
        let burn_in =
            libm::ceil(self.options.burn_in_factor * ni as f64 * libm::log(ni as f64)) as u64;
        let mut chain = ChainState::empty(&sub, self.lambda, stream_rng(self.seed, index as u64));
        chain.run(burn_in);
        let unblocked_value = 1.0 / (1.0 + self.lambda);
        let mut summary = Summary::default();
        for _ in 0..self.samples {
            chain.run(ni as u64);
            let x = match self.options.estimator {
                FactorEstimator::Indicator => f64::from(u8::from(!chain.config().is_occupied(0))),
                FactorEstimator::RaoBlackwell => {
                    if chain.config().is_blocked(0) {
                        1.0
                    } else {
                        unblocked_value
                    }
                }
            };
            summary.push(x);
        }
        let estimate = summary.mean();
        let std_error = match self.options.estimator {
            // Binomial standard error.
            FactorEstimator::Indicator => {
                libm::sqrt(estimate * (1.0 - estimate) / self.samples as f64)
            }
            FactorEstimator::RaoBlackwell => summary.std_error(),
        };
        FactorEstimate {
            vertices: ni,
            burn_in,
            samples: self.samples,
            estimate,
            std_error,
            steps: chain.steps(),
        }
    }

    fn aggregate(&self, factors: Vec<FactorEstimate>) -> Result<PartitionEstimate, EstimatorError> {
        if let Some((index, f)) = factors
            .iter()
            .enumerate()
            .find(|(_, f)| f.estimate <= self.options.floor)
        {
            return Err(EstimatorError::DegenerateFactor {
                index,
                estimate: f.estimate,
                floor: self.options.floor,
            });
        }
        let log_estimate = -factors.iter().map(|f| libm::log(f.estimate)).sum::<f64>();
        let log_var: f64 = factors
            .iter()
            .map(|f| {
                let r = f.std_error / f.estimate;
                r * r
            })
            .sum();
        let log_std_error = libm::sqrt(log_var);
        let spread = self.z_score * log_std_error;
        Ok(PartitionEstimate {
            estimate: libm::exp(log_estimate),
            log_estimate,
            log_std_error,
            lower: libm::exp(log_estimate - spread),
            upper: libm::exp(log_estimate + spread),
            z_score: self.z_score,
            total_steps: factors.iter().map(|f| f.steps).sum(),
            factors,
            seed: self.seed,
        })
    }
}

pub fn estimate_partition(
    g: &Graph,
    lambda: f64,
    epsilon: f64,
    z_score: f64,
    seed: u64,
    options: PartitionOptions,
) -> Result<PartitionEstimate, EstimatorError> {
    PartitionEstimator::new(g, lambda, epsilon, z_score, seed, options)?.run()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurnInParams {
    pub vertex: usize,
    pub rho: f64,
    pub radius: usize,
    /// Times, in steps, at which the state is classified; must be ascending.
    pub checkpoints: Vec<u64>,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurnInReport {
    pub vertex: usize,
    pub rho: f64,
    pub radius: usize,
    pub checkpoints: Vec<u64>,
    /// Fraction of replicates above suspicion at each checkpoint.
    pub fractions: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

/// How fast chains started from a heavy state become above suspicion.
pub struct BurnInProbe<'g> {
    graph: &'g Graph,
    lambda: f64,
    start: IndependentSet,
    classifier: HeavinessClassifier,
    params: BurnInParams,
}

impl<'g> BurnInProbe<'g> {
    pub fn new(
        graph: &'g Graph,
        lambda: f64,
        start: IndependentSet,
        params: BurnInParams,
    ) -> Result<Self, EstimatorError> {
        if params.replicates == 0 {
            return Err(EstimatorError::InvalidParameters("need at least one replicate"));
        }
        if params.checkpoints.windows(2).any(|w| w[0] > w[1]) {
            return Err(EstimatorError::InvalidParameters("checkpoints must be ascending"));
        }
        if start.vertex_count() != graph.vertex_count() {
            return Err(EstimatorError::InvalidParameters("start state has the wrong size"));
        }
        let classifier = HeavinessClassifier::new(graph, params.vertex, params.rho, params.radius)?;
        Ok(Self {
            graph,
            lambda,
            start,
            classifier,
            params,
        })
    }
}

impl Replicated for BurnInProbe<'_> {
    type Outcome = Vec<bool>;
    type Report = BurnInReport;

    fn replicates(&self) -> usize {
        self.params.replicates
    }

    fn run_replicate(&self, index: usize) -> Vec<bool> {
        let rng = stream_rng(self.params.seed, index as u64);
        let mut chain = ChainState::from_set(self.graph, self.lambda, &self.start, rng);
        self.params
            .checkpoints
            .iter()
            .map(|&t| {
                chain.run(t - chain.steps());
                self.classifier.above_suspicion(chain.occupied())
            })
            .collect()
    }

    fn aggregate(&self, outcomes: Vec<Vec<bool>>) -> BurnInReport {
        let reps = outcomes.len() as f64;
        let fractions = (0..self.params.checkpoints.len())
            .map(|k| outcomes.iter().filter(|o| o[k]).count() as f64 / reps)
            .collect();
        BurnInReport {
            vertex: self.params.vertex,
            rho: self.params.rho,
            radius: self.params.radius,
            checkpoints: self.params.checkpoints.clone(),
            fractions,
            replicates: self.params.replicates,
            seed: self.params.seed,
        }
    }
}
