//! Glauber dynamics, its oriented variant, coupled pairs and the local
//! statistics of a configuration.
//!
//! A step picks a vertex `v` uniformly and a uniform `u ∈ [0, 1)`. If some
//! blocker of `v` is occupied nothing changes; otherwise `v` becomes
//! occupied iff `u < λ/(1+λ)`. Both draws are taken on every step, so two
//! chains fed from one stream stay in lockstep.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::bp::PhiFunction;
use crate::graph::{ball, Graph, OrientedView};
use crate::model::IndependentSet;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("occupancy has {found} entries, graph has {expected} vertices")]
    LengthMismatch { expected: usize, found: usize },
    #[error("heaviness needs maximum degree at least 3, got {0}")]
    DegreeTooSmall(usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
}

/// Who can block whom. `blockers(v)` must be a subset of the neighbors of
/// `v`, and `watchers(x)` lists exactly the `y` with `x ∈ blockers(y)`.
pub trait Topology {
    fn vertex_count(&self) -> usize;
    fn blockers(&self, v: usize) -> &[usize];
    fn watchers(&self, v: usize) -> &[usize];
}

impl Topology for Graph {
    fn vertex_count(&self) -> usize {
        Graph::vertex_count(self)
    }
    #[inline]
    fn blockers(&self, v: usize) -> &[usize] {
        self.neighbors(v)
    }
    #[inline]
    fn watchers(&self, v: usize) -> &[usize] {
        self.neighbors(v)
    }
}

impl Topology for OrientedView<'_> {
    fn vertex_count(&self) -> usize {
        self.base().vertex_count()
    }
    #[inline]
    fn blockers(&self, v: usize) -> &[usize] {
        self.in_neighbors(v)
    }
    #[inline]
    fn watchers(&self, v: usize) -> &[usize] {
        OrientedView::watchers(self, v)
    }
}

/// Occupancy plus, per vertex, the number of occupied blockers.
#[derive(Debug, Clone)]
pub struct Configuration<'t, T: Topology + ?Sized> {
    topology: &'t T,
    occupied: Vec<bool>,
    blocked_by: Vec<u32>,
}

impl<'t, T: Topology + ?Sized> Configuration<'t, T> {
    pub fn new(topology: &'t T, occupied: Vec<bool>) -> Result<Self, DynamicsError> {
        let n = topology.vertex_count();
        if occupied.len() != n {
            return Err(DynamicsError::LengthMismatch {
                expected: n,
                found: occupied.len(),
            });
        }
        let blocked_by = (0..n)
            .map(|v| topology.blockers(v).iter().filter(|&&z| occupied[z]).count() as u32)
            .collect();
        Ok(Self {
            topology,
            occupied,
            blocked_by,
        })
    }

    pub fn empty(topology: &'t T) -> Self {
        let n = topology.vertex_count();
        Self {
            topology,
            occupied: vec![false; n],
            blocked_by: vec![0; n],
        }
    }

    pub fn topology(&self) -> &'t T {
        self.topology
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    #[inline]
    pub fn is_occupied(&self, v: usize) -> bool {
        self.occupied[v]
    }

    #[inline]
    pub fn is_blocked(&self, v: usize) -> bool {
        self.blocked_by[v] > 0
    }

    pub fn occupied_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter_map(|(v, &o)| o.then_some(v))
    }

    pub fn size(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Applies the update rule at `v` with draw `u`; returns whether `v`
    /// changed.
    #[inline]
    pub fn update(&mut self, v: usize, u: f64, occupy_probability: f64) -> bool {
        if self.blocked_by[v] > 0 {
            return false;
        }
        let next = u < occupy_probability;
        if next == self.occupied[v] {
            return false;
        }
        self.occupied[v] = next;
        for &y in self.topology.watchers(v) {
            if next {
                self.blocked_by[y] += 1;
            } else {
                self.blocked_by[y] -= 1;
            }
        }
        true
    }
}

/// A single Glauber chain with its own random stream.
#[derive(Debug, Clone)]
pub struct ChainState<'t, T: Topology + ?Sized = Graph> {
    config: Configuration<'t, T>,
    lambda: f64,
    occupy_probability: f64,
    steps: u64,
    clock: f64,
    rng: SimRng,
}

impl<'t, T: Topology + ?Sized> ChainState<'t, T> {
    pub fn new(config: Configuration<'t, T>, lambda: f64, rng: SimRng) -> Self {
        Self {
            config,
            lambda,
            occupy_probability: lambda / (1.0 + lambda),
            steps: 0,
            clock: 0.0,
            rng,
        }
    }

    pub fn empty(topology: &'t T, lambda: f64, rng: SimRng) -> Self {
        Self::new(Configuration::empty(topology), lambda, rng)
    }

    pub fn config(&self) -> &Configuration<'t, T> {
        &self.config
    }

    pub fn occupied(&self) -> &[bool] {
        self.config.occupied()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Elapsed continuous time.
    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn rng_mut(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    /// One discrete step; returns the updated vertex and whether it changed.
    #[inline]
    pub fn step(&mut self) -> (usize, bool) {
        let n = self.config.occupied.len();
        let v = self.rng.random_range(0..n);
        let u: f64 = self.rng.random();
        self.steps += 1;
        (v, self.config.update(v, u, self.occupy_probability))
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Runs for `duration` units of continuous time, with events at the
    /// jumps of a rate-1 Poisson clock. Returns the number of events.
    pub fn continuous_run(&mut self, duration: f64) -> u64 {
        let end = self.clock + duration;
        let mut events = 0;
        loop {
            let wait = exponential(&mut self.rng);
            if self.clock + wait > end {
                self.clock = end;
                return events;
            }
            self.clock += wait;
            self.step();
            events += 1;
        }
    }
}

impl<'g> ChainState<'g, Graph> {
    pub fn from_set(g: &'g Graph, lambda: f64, start: &IndependentSet, rng: SimRng) -> Self {
        let config = Configuration::new(g, start.occupancy().to_vec())
            .expect("independent set sized for its graph");
        Self::new(config, lambda, rng)
    }

    /// The current state as an [`IndependentSet`].
    pub fn current(&self) -> IndependentSet {
        IndependentSet::from_occupancy(self.config.topology, self.config.occupied.clone())
            .expect("Glauber dynamics preserves independence")
    }
}

#[inline]
fn exponential(rng: &mut SimRng) -> f64 {
    let u: f64 = rng.random();
    -libm::log1p(-u)
}

/// Two chains driven by one stream: both see the same vertex and the same
/// uniform on every step. The disagreement set is tracked incrementally.
#[derive(Debug, Clone)]
pub struct CoupledPair<'a, 'b, A: Topology + ?Sized = Graph, B: Topology + ?Sized = Graph> {
    x: Configuration<'a, A>,
    y: Configuration<'b, B>,
    occupy_probability: f64,
    steps: u64,
    rng: SimRng,
    /// Position in `disagreements`, or `usize::MAX`.
    slot: Vec<usize>,
    disagreements: Vec<usize>,
    ever: Vec<bool>,
    ever_count: usize,
}

impl<'a, 'b, A: Topology + ?Sized, B: Topology + ?Sized> CoupledPair<'a, 'b, A, B> {
    pub fn new(
        x: Configuration<'a, A>,
        y: Configuration<'b, B>,
        lambda: f64,
        rng: SimRng,
    ) -> Result<Self, DynamicsError> {
        let n = x.occupied.len();
        if y.occupied.len() != n {
            return Err(DynamicsError::LengthMismatch {
                expected: n,
                found: y.occupied.len(),
            });
        }
        let mut slot = vec![usize::MAX; n];
        let mut disagreements = Vec::new();
        for v in 0..n {
            if x.occupied[v] != y.occupied[v] {
                slot[v] = disagreements.len();
                disagreements.push(v);
            }
        }
        let ever: Vec<bool> = slot.iter().map(|&s| s != usize::MAX).collect();
        let ever_count = disagreements.len();
        Ok(Self {
            x,
            y,
            occupy_probability: lambda / (1.0 + lambda),
            steps: 0,
            rng,
            slot,
            disagreements,
            ever,
            ever_count,
        })
    }

    pub fn x(&self) -> &Configuration<'a, A> {
        &self.x
    }

    pub fn y(&self) -> &Configuration<'b, B> {
        &self.y
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One coupled step; returns the updated vertex.
    #[inline]
    pub fn step(&mut self) -> usize {
        let n = self.slot.len();
        let v = self.rng.random_range(0..n);
        let u: f64 = self.rng.random();
        self.steps += 1;
        let cx = self.x.update(v, u, self.occupy_probability);
        let cy = self.y.update(v, u, self.occupy_probability);
        if cx != cy {
            self.toggle_disagreement(v);
        }
        v
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    fn toggle_disagreement(&mut self, v: usize) {
        let s = self.slot[v];
        if s == usize::MAX {
            self.slot[v] = self.disagreements.len();
            self.disagreements.push(v);
            if !self.ever[v] {
                self.ever[v] = true;
                self.ever_count += 1;
            }
        } else {
            self.disagreements.swap_remove(s);
            if let Some(&moved) = self.disagreements.get(s) {
                self.slot[moved] = s;
            }
            self.slot[v] = usize::MAX;
        }
    }

    /// `D_t`, in no particular order.
    pub fn disagreements(&self) -> &[usize] {
        &self.disagreements
    }

    pub fn is_disagreement(&self, v: usize) -> bool {
        self.slot[v] != usize::MAX
    }

    /// Vertices that have disagreed at some time up to now.
    pub fn ever_disagreed(&self) -> &[bool] {
        &self.ever
    }

    pub fn ever_disagreed_count(&self) -> usize {
        self.ever_count
    }

    pub fn coalesced(&self) -> bool {
        self.disagreements.is_empty()
    }

    pub fn hamming(&self) -> usize {
        self.disagreements.len()
    }

    /// `Σ_{v ∈ D_t} Φ(v)`.
    pub fn weighted_distance(&self, phi: &PhiFunction) -> f64 {
        self.disagreements.iter().map(|&v| phi.get(v)).sum()
    }
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn weighted_distance(a: &[bool], b: &[bool], phi: &PhiFunction) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(v, _)| phi.get(v))
        .sum()
}

/// `U_{v,p}(σ)`: no vertex of `N(v) \ p` is occupied. `p = None` uses all of `N(v)`.
#[inline]
pub fn unblocked_indicator(g: &Graph, occupied: &[bool], v: usize, p: Option<usize>) -> bool {
    g.neighbors(v)
        .iter()
        .all(|&z| Some(z) == p || !occupied[z])
}

/// `S_σ(v) = Σ_{z ∈ N(v)} U_{z,v}(σ)`, the number of unblocked neighbors.
pub fn s_stat(g: &Graph, occupied: &[bool], v: usize) -> usize {
    g.neighbors(v)
        .iter()
        .filter(|&&z| unblocked_indicator(g, occupied, z, Some(v)))
        .count()
}

/// `W_σ(v) = Σ_{z ∈ N(v)} U_{z,v}(σ) Φ(z)`.
pub fn w_stat(g: &Graph, occupied: &[bool], v: usize, phi: &PhiFunction) -> f64 {
    g.neighbors(v)
        .iter()
        .filter(|&&z| unblocked_indicator(g, occupied, z, Some(v)))
        .map(|&z| phi.get(z))
        .sum()
}

/// `R(σ, v) = Π_{z ∈ N(v)} (1 − λ/(1+λ) · U_{z,v}(σ))`.
pub fn r_stat(g: &Graph, occupied: &[bool], v: usize, lambda: f64) -> f64 {
    let keep = 1.0 / (1.0 + lambda);
    g.neighbors(v)
        .iter()
        .map(|&z| {
            if unblocked_indicator(g, occupied, z, Some(v)) {
                keep
            } else {
                1.0
            }
        })
        .product()
}

/// `|R(σ, v) − Π_{z ∈ N(v)} (1 − λ R(σ, z) / (1+λ))|`.
pub fn bp_residual(g: &Graph, occupied: &[bool], v: usize, lambda: f64) -> f64 {
    let p = lambda / (1.0 + lambda);
    let recurrence: f64 = g
        .neighbors(v)
        .iter()
        .map(|&z| 1.0 - p * r_stat(g, occupied, z, lambda))
        .product();
    libm::fabs(r_stat(g, occupied, v, lambda) - recurrence)
}

/// Default `ρ` values for the heaviness classifier.
pub const DEFAULT_RHO_BURN_IN: f64 = 50.0;
pub const DEFAULT_RHO_LIGHT: f64 = 400.0;

/// `σ` is ρ-heavy at `w` when `|B₂(w) ∩ σ| ≥ ρΔ` or `|B₁(w) ∩ σ| ≥ ρΔ / ln Δ`.
/// `σ` is ρ-above suspicion for radius `r` at `v` when no `w ∈ B_r(v)` is
/// ρ-heavy. Precomputes the balls around one center.
#[derive(Debug, Clone)]
pub struct HeavinessClassifier {
    rho: f64,
    max_degree: usize,
    /// Index of the center within `suspects`.
    center_index: usize,
    suspects: Vec<usize>,
    b1: Vec<Vec<usize>>,
    b2: Vec<Vec<usize>>,
}

impl HeavinessClassifier {
    pub fn new(g: &Graph, center: usize, rho: f64, radius: usize) -> Result<Self, DynamicsError> {
        let max_degree = g.max_degree();
        if max_degree < 3 {
            return Err(DynamicsError::DegreeTooSmall(max_degree));
        }
        if center >= g.vertex_count() {
            return Err(DynamicsError::VertexOutOfRange(center));
        }
        let suspects = ball(g, center, radius);
        let center_index = suspects.binary_search(&center).expect("center lies in its ball");
        let b1 = suspects.iter().map(|&w| ball(g, w, 1)).collect();
        let b2 = suspects.iter().map(|&w| ball(g, w, 2)).collect();
        Ok(Self {
            rho,
            max_degree,
            center_index,
            suspects,
            b1,
            b2,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn center(&self) -> usize {
        self.suspects[self.center_index]
    }

    /// `B_r(center)`, sorted.
    pub fn suspects(&self) -> &[usize] {
        &self.suspects
    }

    /// `(ρΔ, ρΔ / ln Δ)`, the thresholds for `B₂` and `B₁`.
    pub fn thresholds(&self) -> (f64, f64) {
        let d = self.max_degree as f64;
        (self.rho * d, self.rho * d / libm::log(d))
    }

    fn heavy_at(&self, index: usize, occupied: &[bool]) -> bool {
        let (t2, t1) = self.thresholds();
        let count = |set: &[usize]| set.iter().filter(|&&z| occupied[z]).count() as f64;
        count(&self.b2[index]) >= t2 || count(&self.b1[index]) >= t1
    }

    /// Heaviness at the center. Occupancy need not be independent.
    pub fn is_heavy(&self, occupied: &[bool]) -> bool {
        self.heavy_at(self.center_index, occupied)
    }

    pub fn above_suspicion(&self, occupied: &[bool]) -> bool {
        (0..self.suspects.len()).all(|i| !self.heavy_at(i, occupied))
    }
}

/// Whether `occupied` is ρ-heavy at `v`. Occupancy need not be independent.
pub fn is_heavy(g: &Graph, occupied: &[bool], v: usize, rho: f64) -> Result<bool, DynamicsError> {
    Ok(HeavinessClassifier::new(g, v, rho, 0)?.is_heavy(occupied))
}

/// Whether no vertex of `B_r(v)` is ρ-heavy.
pub fn above_suspicion(
    g: &Graph,
    occupied: &[bool],
    v: usize,
    rho: f64,
    radius: usize,
) -> Result<bool, DynamicsError> {
    Ok(HeavinessClassifier::new(g, v, rho, radius)?.above_suspicion(occupied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn set(n: usize, vs: &[usize]) -> Vec<bool> {
        let mut o = vec![false; n];
        for &v in vs {
            o[v] = true;
        }
        o
    }

    #[test]
    fn blocked_vertex_never_changes() {
        let g = Graph::star(3);
        let mut c = Configuration::new(&g, set(4, &[1])).unwrap();
        assert!(c.is_blocked(0));
        assert!(!c.update(0, 0.0, 0.9));
        assert!(!c.is_occupied(0));
        assert!(c.update(2, 0.1, 0.5));
        assert!(c.update(1, 0.7, 0.5));
        assert!(c.is_blocked(0));
        assert!(c.update(2, 0.7, 0.5));
        assert!(!c.is_blocked(0));
    }

    #[test]
    fn chain_stays_independent_and_is_deterministic() {
        let g = crate::graph::random_regular(40, 5, 3).unwrap();
        let mut a = ChainState::empty(&g, 1.3, stream_rng(9, 0));
        let mut b = ChainState::empty(&g, 1.3, stream_rng(9, 0));
        for _ in 0..20_000 {
            a.step();
            b.step();
            assert!(crate::model::is_independent(&g, a.occupied()).unwrap());
        }
        assert_eq!(a.occupied(), b.occupied());
        assert_eq!(a.steps(), 20_000);
        assert_eq!(a.current().size(), a.config().size());
    }

    #[test]
    fn continuous_zero_duration() {
        let g = Graph::cycle(5);
        let mut c = ChainState::empty(&g, 1.0, stream_rng(1, 1));
        assert_eq!(c.continuous_run(0.0), 0);
        assert_eq!(c.steps(), 0);
        let events = c.continuous_run(100.0);
        assert_eq!(events, c.steps());
        assert_eq!(c.clock(), 100.0);
    }

    #[test]
    fn coupling_tracks_disagreements() {
        let g = crate::graph::random_regular(30, 4, 11).unwrap();
        let x = Configuration::new(&g, IndependentSet::greedy_maximal(&g, 0..30).occupancy().to_vec()).unwrap();
        let y = Configuration::empty(&g);
        let mut pair = CoupledPair::new(x, y, 0.8, stream_rng(5, 2)).unwrap();
        for _ in 0..5_000 {
            pair.step();
            let fresh = hamming(pair.x().occupied(), pair.y().occupied());
            assert_eq!(pair.hamming(), fresh);
            for &v in pair.disagreements() {
                assert!(pair.ever_disagreed()[v]);
            }
        }
        let phi = PhiFunction::uniform(30);
        assert_eq!(pair.weighted_distance(&phi), pair.hamming() as f64);
    }

    #[test]
    fn coalescence_is_absorbing() {
        let g = Graph::path(6);
        let x = Configuration::new(&g, set(6, &[2])).unwrap();
        let y = Configuration::empty(&g);
        let mut pair = CoupledPair::new(x, y, 1.0, stream_rng(2, 0)).unwrap();
        let mut merged = false;
        for _ in 0..10_000 {
            pair.step();
            if merged {
                assert!(pair.coalesced());
            }
            merged |= pair.coalesced();
        }
        assert!(merged);
    }

    #[test]
    fn oriented_view_without_orientation_matches_graph() {
        // On a graph where every vertex is farther than 2 from the root's
        // component, nothing is oriented; use a disconnected root instead.
        let edges = [(1, 2), (2, 3), (3, 4), (4, 1)];
        let g = Graph::from_edges(5, edges).unwrap();
        let view = OrientedView::new(&g, 0);
        let mut a = ChainState::empty(&g, 1.0, stream_rng(4, 4));
        let mut b = ChainState::empty(&view, 1.0, stream_rng(4, 4));
        for _ in 0..1_000 {
            assert_eq!(a.step(), b.step());
        }
        assert_eq!(a.occupied(), b.occupied());
    }

    #[test]
    fn oriented_leaf_is_never_blocked() {
        let g = Graph::star(4);
        let view = OrientedView::new(&g, 0);
        let c = Configuration::new(&view, set(5, &[0])).unwrap();
        for leaf in 1..5 {
            assert!(!c.is_blocked(leaf));
        }
        assert!(!c.is_blocked(0));
    }

    #[test]
    fn local_statistics() {
        let g = Graph::star(3);
        let empty = vec![false; 4];
        assert!(unblocked_indicator(&g, &empty, 0, None));
        assert!(unblocked_indicator(&g, &set(4, &[1]), 0, Some(1)));
        assert!(!unblocked_indicator(&g, &set(4, &[1]), 0, Some(2)));
        assert_eq!(s_stat(&g, &empty, 0), 3);
        assert_eq!(s_stat(&g, &empty, 1), 1);
        let lambda = 2.0;
        assert!((r_stat(&g, &empty, 0, lambda) - libm::pow(1.0 / 3.0, 3.0)).abs() < 1e-15);
        assert_eq!(bp_residual(&Graph::empty(1), &[false], 0, lambda), 0.0);

        // A leaf of the center whose other neighbor is occupied is blocked.
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (1, 4)]).unwrap();
        assert_eq!(s_stat(&g, &set(5, &[4]), 0), 2);
        let phi = PhiFunction::uniform(5);
        assert_eq!(w_stat(&g, &set(5, &[4]), 0, &phi), 2.0);
        // Every neighbor blocked from outside.
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (1, 3), (2, 4)]).unwrap();
        assert_eq!(r_stat(&g, &set(5, &[3, 4]), 0, lambda), 1.0);
    }

    #[test]
    fn residual_closed_form_on_regular_graph() {
        let g = Graph::petersen();
        let lambda = 0.7;
        let d = 3.0;
        let r = libm::pow(1.0 + lambda, -d);
        let expected = (r - libm::pow(1.0 - lambda * r / (1.0 + lambda), d)).abs();
        assert!((bp_residual(&g, &[false; 10], 4, lambda) - expected).abs() < 1e-15);
    }

    #[test]
    fn heaviness() {
        let g = Graph::petersen();
        let empty = vec![false; 10];
        assert!(!is_heavy(&g, &empty, 0, 0.1).unwrap());
        assert!(above_suspicion(&g, &empty, 0, 0.1, 3).unwrap());
        let packed = vec![true; 10];
        // |B₂| = 10 in the Petersen graph.
        assert!(is_heavy(&g, &packed, 0, 10.0 / 3.0).unwrap());
        assert!(matches!(
            is_heavy(&Graph::cycle(5), &[false; 5], 0, 1.0),
            Err(DynamicsError::DegreeTooSmall(2))
        ));
        let c = HeavinessClassifier::new(&g, 7, 1.0, 1).unwrap();
        assert_eq!(c.center(), 7);
        assert_eq!(c.suspects().len(), 4);
    }

    #[test]
    fn interpolated_sets_are_not_twice_heavy() {
        let g = Graph::grid(3, 4);
        let sets = crate::oracle::independent_set_masks(&g, 1 << 16).unwrap();
        let to_occ = |m: u64| (0..12).map(|v| m >> v & 1 == 1).collect::<Vec<_>>();
        for rho in [0.4, 0.7, 1.0] {
            for v in [0, 5] {
                let light: Vec<u64> = sets
                    .iter()
                    .copied()
                    .filter(|&m| !is_heavy(&g, &to_occ(m), v, rho).unwrap())
                    .collect();
                for (i, &x) in light.iter().enumerate().step_by(7) {
                    for &y in light.iter().skip(i).step_by(5) {
                        let (lo, free) = (x & y, x ^ y);
                        let mut sub = free;
                        loop {
                            let z = lo | sub;
                            assert!(!is_heavy(&g, &to_occ(z), v, 2.0 * rho).unwrap());
                            if sub == 0 {
                                break;
                            }
                            sub = (sub - 1) & free;
                        }
                    }
                }
            }
        }
    }
}
