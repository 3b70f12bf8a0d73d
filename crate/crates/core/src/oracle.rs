//! Exact ground truth on small graphs.
//!
//! Vertex subsets are `u64` bitmasks, so every routine here is limited to
//! 64 vertices; the practical limits are the configurable budgets.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::model::IndependentSet;
use crate::stats::log_add_exp;

pub const MAX_VERTICES: usize = 64;
/// Largest graph [`exact_distribution`] will enumerate.
pub const DISTRIBUTION_MAX_VERTICES: usize = 25;
pub const DEFAULT_SUBPROBLEM_CAP: usize = 1 << 22;
pub const DEFAULT_STATE_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("graph has {vertices} vertices, oracle limit is {limit}")]
    TooManyVertices { vertices: usize, limit: usize },
    #[error("exact computation exceeded its budget of {limit}")]
    BudgetExceeded { limit: usize },
    #[error("{p} is not a neighbor of {v}")]
    NotNeighbor { v: usize, p: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("fugacity must be positive and finite, got {0}")]
    InvalidFugacity(f64),
}

pub(crate) fn neighbor_masks(g: &Graph) -> Result<Vec<u64>, OracleError> {
    if g.vertex_count() > MAX_VERTICES {
        return Err(OracleError::TooManyVertices {
            vertices: g.vertex_count(),
            limit: MAX_VERTICES,
        });
    }
    Ok((0..g.vertex_count())
        .map(|v| g.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect())
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_lambda(lambda: f64) -> Result<(), OracleError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(OracleError::InvalidFugacity(lambda))
    }
}

/// Arithmetic for the deletion recursion, linear or logarithmic.
trait Weight: Copy {
    fn one() -> Self;
    fn plus(self, other: Self) -> Self;
    fn times(self, other: Self) -> Self;
    fn times_lambda(self, lambda: f64, ln_lambda: f64) -> Self;
}

#[derive(Clone, Copy)]
struct Linear(f64);

#[derive(Clone, Copy)]
struct Logarithmic(f64);

impl Weight for Linear {
    fn one() -> Self {
        Linear(1.0)
    }
    fn plus(self, other: Self) -> Self {
        Linear(self.0 + other.0)
    }
    fn times(self, other: Self) -> Self {
        Linear(self.0 * other.0)
    }
    fn times_lambda(self, lambda: f64, _: f64) -> Self {
        Linear(self.0 * lambda)
    }
}

impl Weight for Logarithmic {
    fn one() -> Self {
        Logarithmic(0.0)
    }
    fn plus(self, other: Self) -> Self {
        Logarithmic(log_add_exp(self.0, other.0))
    }
    fn times(self, other: Self) -> Self {
        Logarithmic(self.0 + other.0)
    }
    fn times_lambda(self, _: f64, ln_lambda: f64) -> Self {
        Logarithmic(self.0 + ln_lambda)
    }
}

struct Recursion<W> {
    neighbors: Vec<u64>,
    lambda: f64,
    ln_lambda: f64,
    memo: BTreeMap<u64, W>,
    cap: usize,
}

impl<W: Weight> Recursion<W> {
    fn new(g: &Graph, lambda: f64, cap: usize) -> Result<Self, OracleError> {
        check_lambda(lambda)?;
        Ok(Self {
            neighbors: neighbor_masks(g)?,
            lambda,
            ln_lambda: libm::log(lambda),
            memo: BTreeMap::new(),
            cap,
        })
    }

    /// Connected component of `mask` containing its lowest vertex.
    fn component(&self, mask: u64) -> u64 {
        let mut comp = mask & mask.wrapping_neg();
        let mut frontier = comp;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.neighbors[v] & mask & !comp;
            comp |= fresh;
            frontier |= fresh;
        }
        comp
    }

    /// `Z(S) = Z(S - v) + λ Z(S - v - N(v))`, branching on the vertex of
    /// largest degree inside `S`, lowest index on ties. A disconnected `S`
    /// factors over its components first.
    fn solve(&mut self, mask: u64) -> Result<W, OracleError> {
        if mask == 0 {
            return Ok(W::one());
        }
        if let Some(&w) = self.memo.get(&mask) {
            return Ok(w);
        }
        if self.memo.len() >= self.cap {
            return Err(OracleError::BudgetExceeded { limit: self.cap });
        }
        let comp = self.component(mask);
        if comp != mask {
            let z = self.solve(comp)?.times(self.solve(mask & !comp)?);
            self.memo.insert(mask, z);
            return Ok(z);
        }
        let mut best_degree = 0;
        let mut best = mask.trailing_zeros() as usize;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let deg = (self.neighbors[v] & mask).count_ones();
            if deg > best_degree {
                best_degree = deg;
                best = v;
            }
        }
        let result = if best_degree == 0 {
            // Only isolated vertices left: (1 + λ)^|S|.
            let mut z = W::one();
            for _ in 0..mask.count_ones() {
                z = z.plus(z.times_lambda(self.lambda, self.ln_lambda));
            }
            z
        } else {
            let without = mask & !(1u64 << best);
            let skip = self.solve(without)?;
            let take = self.solve(without & !self.neighbors[best])?;
            skip.plus(take.times_lambda(self.lambda, self.ln_lambda))
        };
        self.memo.insert(mask, result);
        Ok(result)
    }
}

/// Memoizing solver for `Z` of the graph and of its induced subgraphs.
pub struct PartitionSolver {
    inner: Recursion<Linear>,
    n: usize,
}

impl PartitionSolver {
    pub fn new(g: &Graph, lambda: f64) -> Result<Self, OracleError> {
        Self::with_cap(g, lambda, DEFAULT_SUBPROBLEM_CAP)
    }

    /// `cap` bounds the number of memoized subproblems.
    pub fn with_cap(g: &Graph, lambda: f64, cap: usize) -> Result<Self, OracleError> {
        Ok(Self {
            inner: Recursion::new(g, lambda, cap)?,
            n: g.vertex_count(),
        })
    }

    /// `Z` of the subgraph induced by `mask`.
    pub fn partition_of(&mut self, mask: u64) -> Result<f64, OracleError> {
        Ok(self.inner.solve(mask & full_mask(self.n))?.0)
    }

    pub fn partition(&mut self) -> Result<f64, OracleError> {
        self.partition_of(full_mask(self.n))
    }

    /// `μ(v occupied) = λ Z(G - v - N(v)) / Z(G)`.
    pub fn marginal(&mut self, v: usize) -> Result<f64, OracleError> {
        self.marginal_within(full_mask(self.n), v)
    }

    /// `μ(v occupied | p unoccupied)`, i.e. the marginal of `v` in `G - p`.
    pub fn conditional_marginal(&mut self, v: usize, p: usize) -> Result<f64, OracleError> {
        if v >= self.n {
            return Err(OracleError::VertexOutOfRange(v));
        }
        if p >= self.n || self.inner.neighbors[v] >> p & 1 == 0 {
            return Err(OracleError::NotNeighbor { v, p });
        }
        self.marginal_within(full_mask(self.n) & !(1u64 << p), v)
    }

    fn marginal_within(&mut self, mask: u64, v: usize) -> Result<f64, OracleError> {
        if v >= self.n {
            return Err(OracleError::VertexOutOfRange(v));
        }
        let z = self.partition_of(mask)?;
        let blocked = self.partition_of(mask & !(1u64 << v) & !self.inner.neighbors[v])?;
        Ok(self.inner.lambda * blocked / z)
    }
}

pub fn exact_partition(g: &Graph, lambda: f64) -> Result<f64, OracleError> {
    PartitionSolver::new(g, lambda)?.partition()
}

/// `ln Z` through the same recursion carried out in log space.
pub fn exact_log_partition(g: &Graph, lambda: f64) -> Result<f64, OracleError> {
    let mut rec = Recursion::<Logarithmic>::new(g, lambda, DEFAULT_SUBPROBLEM_CAP)?;
    Ok(rec.solve(full_mask(g.vertex_count()))?.0)
}

pub fn exact_marginal(g: &Graph, lambda: f64, v: usize) -> Result<f64, OracleError> {
    PartitionSolver::new(g, lambda)?.marginal(v)
}

pub fn exact_conditional_marginal(
    g: &Graph,
    lambda: f64,
    v: usize,
    p: usize,
) -> Result<f64, OracleError> {
    PartitionSolver::new(g, lambda)?.conditional_marginal(v, p)
}

/// All independent sets as ascending bitmasks, failing past `cap` sets.
pub fn independent_set_masks(g: &Graph, cap: usize) -> Result<Vec<u64>, OracleError> {
    let neighbors = neighbor_masks(g)?;
    let n = g.vertex_count();
    let mut out = Vec::new();
    // Decide vertices from high to low so the output comes out ascending.
    fn visit(
        v: usize,
        current: u64,
        neighbors: &[u64],
        out: &mut Vec<u64>,
        cap: usize,
    ) -> Result<(), OracleError> {
        if v == 0 {
            if out.len() >= cap {
                return Err(OracleError::BudgetExceeded { limit: cap });
            }
            out.push(current);
            return Ok(());
        }
        let u = v - 1;
        visit(u, current, neighbors, out, cap)?;
        if current & neighbors[u] == 0 {
            visit(u, current | 1 << u, neighbors, out, cap)?;
        }
        Ok(())
    }
    visit(n, 0, &neighbors, &mut out, cap)?;
    out.sort_unstable();
    Ok(out)
}

/// The Gibbs distribution tabulated over every independent set.
#[derive(Debug, Clone)]
pub struct GibbsTable {
    n: usize,
    states: Vec<u64>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
    partition: f64,
}

pub fn exact_distribution(g: &Graph, lambda: f64) -> Result<GibbsTable, OracleError> {
    GibbsTable::new(g, lambda, DEFAULT_STATE_CAP)
}

impl GibbsTable {
    pub fn new(g: &Graph, lambda: f64, state_cap: usize) -> Result<Self, OracleError> {
        check_lambda(lambda)?;
        if g.vertex_count() > DISTRIBUTION_MAX_VERTICES {
            return Err(OracleError::TooManyVertices {
                vertices: g.vertex_count(),
                limit: DISTRIBUTION_MAX_VERTICES,
            });
        }
        let states = independent_set_masks(g, state_cap)?;
        let weights: Vec<f64> = states
            .iter()
            .map(|m| libm::pow(lambda, m.count_ones() as f64))
            .collect();
        let partition: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / partition).collect();
        let cumulative = probabilities
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            n: g.vertex_count(),
            states,
            probabilities,
            cumulative,
            partition,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `Z` as the plain sum of weights.
    pub fn partition(&self) -> f64 {
        self.partition
    }

    pub fn masks(&self) -> &[u64] {
        &self.states
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn index_of_mask(&self, mask: u64) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }

    pub fn index_of(&self, set: &IndependentSet) -> Option<usize> {
        self.index_of_mask(to_mask(set.occupancy()))
    }

    pub fn state(&self, index: usize) -> IndependentSet {
        IndependentSet::from_mask_unchecked(self.n, self.states[index])
    }

    pub fn iter(&self) -> impl Iterator<Item = (IndependentSet, f64)> + '_ {
        (0..self.len()).map(|i| (self.state(i), self.probabilities[i]))
    }

    /// `Σ_σ μ(σ) f(σ)`.
    pub fn expectation<F: FnMut(&IndependentSet) -> f64>(&self, mut statistic: F) -> f64 {
        self.iter().map(|(s, p)| p * statistic(&s)).sum()
    }

    /// Index of the state drawn by inverse transform from `u ∈ [0, 1)`.
    pub fn sample_index(&self, u: f64) -> usize {
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.len() - 1)
    }

    /// Total variation distance between `dist` (indexed like the table) and `μ`.
    pub fn tv_distance(&self, dist: &[f64]) -> f64 {
        0.5 * dist
            .iter()
            .zip(&self.probabilities)
            .map(|(a, b)| libm::fabs(a - b))
            .sum::<f64>()
    }
}

pub fn exact_stat_expectation<F: FnMut(&IndependentSet) -> f64>(
    g: &Graph,
    lambda: f64,
    statistic: F,
) -> Result<f64, OracleError> {
    Ok(exact_distribution(g, lambda)?.expectation(statistic))
}

pub(crate) fn to_mask(occupied: &[bool]) -> u64 {
    occupied
        .iter()
        .enumerate()
        .fold(0, |m, (v, &o)| if o { m | 1 << v } else { m })
}

/// Sparse transition matrix of discrete-time Glauber dynamics over `Ω`.
#[derive(Debug, Clone)]
pub struct GlauberKernel {
    table: GibbsTable,
    rows: Vec<Vec<(usize, f64)>>,
}

pub fn exact_glauber_kernel(g: &Graph, lambda: f64) -> Result<GlauberKernel, OracleError> {
    GlauberKernel::new(g, lambda, DEFAULT_STATE_CAP)
}

impl GlauberKernel {
    pub fn new(g: &Graph, lambda: f64, state_cap: usize) -> Result<Self, OracleError> {
        let table = GibbsTable::new(g, lambda, state_cap)?;
        let neighbors = neighbor_masks(g)?;
        let n = g.vertex_count();
        let pick = 1.0 / n as f64;
        let occupy = lambda / (1.0 + lambda);
        let vacate = 1.0 / (1.0 + lambda);
        let rows = table
            .states
            .iter()
            .map(|&state| {
                let mut stay = 0.0;
                let mut row = Vec::with_capacity(n + 1);
                for v in 0..n {
                    let bit = 1u64 << v;
                    if state & neighbors[v] != 0 {
                        stay += pick;
                    } else if state & bit != 0 {
                        stay += pick * occupy;
                        row.push((table.index_of_mask(state & !bit).unwrap(), pick * vacate));
                    } else {
                        stay += pick * vacate;
                        row.push((table.index_of_mask(state | bit).unwrap(), pick * occupy));
                    }
                }
                row.push((table.index_of_mask(state).unwrap(), stay));
                row.sort_unstable_by_key(|&(j, _)| j);
                row
            })
            .collect();
        Ok(Self { table, rows })
    }

    pub fn table(&self) -> &GibbsTable {
        &self.table
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    /// Nonzero entries `(target, probability)` of row `from`, ascending.
    pub fn row(&self, from: usize) -> &[(usize, f64)] {
        &self.rows[from]
    }

    /// Dense entry `P(from, to)`.
    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.rows[from]
            .binary_search_by_key(&to, |&(j, _)| j)
            .map_or(0.0, |k| self.rows[from][k].1)
    }

    /// One step of the chain applied to a distribution: `dist · P`.
    pub fn step_distribution(&self, dist: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let mass = dist[i];
            if mass == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += mass * p;
            }
        }
    }

    /// Distribution after `steps` steps from the point mass at `start`.
    pub fn distribution_after(&self, start: usize, steps: usize) -> Vec<f64> {
        let mut dist = vec![0.0; self.state_count()];
        dist[start] = 1.0;
        let mut next = vec![0.0; self.state_count()];
        for _ in 0..steps {
            self.step_distribution(&dist, &mut next);
            core::mem::swap(&mut dist, &mut next);
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn small_partition_functions() {
        assert_eq!(exact_partition(&Graph::empty(1), 1.0).unwrap(), 2.0);
        assert_eq!(exact_partition(&Graph::complete(3), 1.0).unwrap(), 4.0);
        assert_eq!(exact_partition(&Graph::path(3), 1.0).unwrap(), 5.0);
        assert!(close(
            exact_partition(&Graph::empty(7), 0.5).unwrap(),
            libm::pow(1.5, 7.0)
        ));
        assert_eq!(exact_partition(&Graph::empty(0), 2.0).unwrap(), 1.0);
    }

    #[test]
    fn log_path_agrees() {
        for g in [Graph::petersen(), Graph::heawood(), Graph::grid(4, 5)] {
            for lambda in [0.25, 1.0, 2.0] {
                let z = exact_partition(&g, lambda).unwrap();
                let lz = exact_log_partition(&g, lambda).unwrap();
                assert!((libm::log(z) - lz).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginals() {
        let lambda = 1.3;
        let m = exact_marginal(&Graph::empty(1), lambda, 0).unwrap();
        assert!(close(m, lambda / (1.0 + lambda)));
        let edge = Graph::path(2);
        assert!(close(exact_marginal(&edge, 1.0, 0).unwrap(), 1.0 / 3.0));
        assert!(close(
            exact_conditional_marginal(&edge, lambda, 1, 0).unwrap(),
            lambda / (1.0 + lambda)
        ));
        let p3 = Graph::path(3);
        assert!(close(
            exact_conditional_marginal(&p3, 1.0, 1, 0).unwrap(),
            1.0 / 3.0
        ));
        assert_eq!(
            exact_conditional_marginal(&p3, 1.0, 0, 2),
            Err(OracleError::NotNeighbor { v: 0, p: 2 })
        );
        let h = Graph::heawood();
        for v in 0..14 {
            let m = exact_marginal(&h, 2.0, v).unwrap();
            assert!(m > 0.0 && m <= 2.0 / 3.0);
        }
    }

    #[test]
    fn conditional_is_marginal_of_deleted_graph() {
        let g = Graph::petersen();
        let lambda = 0.8;
        for v in 0..10 {
            for &p in g.neighbors(v) {
                let (h, original) = g.without_vertices(&[p]);
                let v_new = original.iter().position(|&o| o == v).unwrap();
                let a = exact_conditional_marginal(&g, lambda, v, p).unwrap();
                let b = exact_marginal(&h, lambda, v_new).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn self_reducibility_identity() {
        let g = Graph::heawood();
        let lambda = 1.7;
        let mut solver = PartitionSolver::new(&g, lambda).unwrap();
        let z = solver.partition().unwrap();
        for v in 0..14 {
            let unocc = 1.0 - solver.marginal(v).unwrap();
            let (h, _) = g.without_vertices(&[v]);
            let zh = exact_partition(&h, lambda).unwrap();
            assert!(close(z * unocc, zh));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = Graph::grid(5, 5);
        assert_eq!(
            PartitionSolver::with_cap(&g, 1.0, 10).unwrap().partition(),
            Err(OracleError::BudgetExceeded { limit: 10 })
        );
        assert!(matches!(
            exact_distribution(&Graph::empty(26), 1.0),
            Err(OracleError::TooManyVertices { .. })
        ));
        assert!(matches!(
            GibbsTable::new(&Graph::empty(10), 1.0, 100),
            Err(OracleError::BudgetExceeded { limit: 100 })
        ));
    }

    #[test]
    fn distributions() {
        let single = exact_distribution(&Graph::empty(1), 1.0).unwrap();
        assert_eq!(single.probabilities(), [0.5, 0.5]);
        let tri = exact_distribution(&Graph::complete(3), 2.0).unwrap();
        assert_eq!(tri.len(), 4);
        assert!(close(tri.probabilities()[0], 1.0 / 7.0));
        for p in &tri.probabilities()[1..] {
            assert!(close(*p, 2.0 / 7.0));
        }
        assert_eq!(tri.sample_index(0.0), 0);
        assert_eq!(tri.sample_index(0.999_999), 3);
        let h = exact_distribution(&Graph::heawood(), 0.7).unwrap();
        assert!((h.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectations() {
        let g = Graph::empty(1);
        assert!(close(exact_stat_expectation(&g, 1.0, |_| 1.0).unwrap(), 1.0));
        assert!(close(
            exact_stat_expectation(&g, 1.0, |s| s.size() as f64).unwrap(),
            0.5
        ));
    }

    #[test]
    fn kernel_is_stochastic_and_reversible() {
        for (g, lambda) in [
            (Graph::empty(1), 1.5),
            (Graph::cycle(5), 1.0),
            (Graph::star(3), 2.0),
            (Graph::petersen(), 0.6),
        ] {
            let kernel = exact_glauber_kernel(&g, lambda).unwrap();
            let mu = kernel.table().probabilities().to_vec();
            for i in 0..kernel.state_count() {
                let sum: f64 = kernel.row(i).iter().map(|e| e.1).sum();
                assert!((sum - 1.0).abs() < 1e-12);
                for &(j, p) in kernel.row(i) {
                    assert!((mu[i] * p - mu[j] * kernel.entry(j, i)).abs() < 1e-12);
                }
            }
            let mut next = vec![0.0; mu.len()];
            kernel.step_distribution(&mu, &mut next);
            let l1: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
            assert!(l1 < 1e-12);
        }
        let single = exact_glauber_kernel(&Graph::empty(1), 3.0).unwrap();
        assert!(close(single.entry(0, 1), 0.75));
    }
}
