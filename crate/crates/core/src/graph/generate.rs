//! Random graph generators: regular and bipartite regular graphs by
//! configuration-model pairing, uniform random trees, and G(n, p).

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use super::{Graph, GraphError};
use crate::rng::SimRng;

/// How half-edges are matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingMethod {
    /// Uniform pairing, restarted on the first loop or repeated edge.
    /// Exactly uniform over simple graphs, but the acceptance probability
    /// decays like `exp(-(d^2 - 1) / 4)`.
    Rejection,
    /// Pairs uniformly among the half-edge pairs that keep the graph simple
    /// and restarts only when stuck. Asymptotically uniform for fixed degree.
    Sequential,
    /// `Rejection` for small degrees, `Sequential` otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy)]
pub struct RegularGenerator {
    pub method: PairingMethod,
    pub max_attempts: usize,
}

impl Default for RegularGenerator {
    fn default() -> Self {
        Self {
            method: PairingMethod::Auto,
            max_attempts: 100_000,
        }
    }
}

/// Largest degree for which `Auto` uses whole-pairing rejection.
const AUTO_REJECTION_MAX_DEGREE: usize = 5;
const AUTO_BIPARTITE_REJECTION_MAX_DEGREE: usize = 4;

/// Random simple `degree`-regular graph on `n` vertices.
pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<Graph, GraphError> {
    RegularGenerator::default().regular(n, degree, seed)
}

/// Random simple bipartite `degree`-regular graph with sides `0..n` and `n..2n`.
pub fn random_regular_bipartite(
    n_per_side: usize,
    degree: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    RegularGenerator::default().bipartite(n_per_side, degree, seed)
}

impl RegularGenerator {
    pub fn regular(&self, n: usize, degree: usize, seed: u64) -> Result<Graph, GraphError> {
        if !(n * degree).is_multiple_of(2) {
            return Err(GraphError::InvalidParameters("n * degree must be even"));
        }
        if degree >= n.max(1) && degree > 0 {
            return Err(GraphError::InvalidParameters("degree must be below n"));
        }
        let mut rng = SimRng::seed_from_u64(seed);
        let method = match self.method {
            PairingMethod::Auto if degree <= AUTO_REJECTION_MAX_DEGREE => PairingMethod::Rejection,
            PairingMethod::Auto => PairingMethod::Sequential,
            m => m,
        };
        let points: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, degree)).collect();
        for _ in 0..self.max_attempts {
            let mut adjacency = vec![Vec::with_capacity(degree); n];
            let ok = match method {
                PairingMethod::Rejection => {
                    pair_by_rejection(&points, &mut adjacency, &mut rng)
                }
                _ => pair_sequentially(&points, &mut adjacency, &mut rng),
            };
            if ok {
                return Ok(finish(adjacency));
            }
        }
        Err(GraphError::AttemptsExhausted(self.max_attempts))
    }

    pub fn bipartite(&self, n: usize, degree: usize, seed: u64) -> Result<Graph, GraphError> {
        if degree > n {
            return Err(GraphError::InvalidParameters("degree must not exceed n_per_side"));
        }
        let mut rng = SimRng::seed_from_u64(seed);
        let method = match self.method {
            PairingMethod::Auto if degree <= AUTO_BIPARTITE_REJECTION_MAX_DEGREE => {
                PairingMethod::Rejection
            }
            PairingMethod::Auto => PairingMethod::Sequential,
            m => m,
        };
        let left: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, degree)).collect();
        let right: Vec<usize> = left.iter().map(|&v| v + n).collect();
        for _ in 0..self.max_attempts {
            let mut adjacency = vec![Vec::with_capacity(degree); 2 * n];
            let ok = match method {
                PairingMethod::Rejection => {
                    pair_sides_by_rejection(&left, &right, &mut adjacency, &mut rng)
                }
                _ => pair_sides_sequentially(&left, &right, &mut adjacency, &mut rng),
            };
            if ok {
                return Ok(finish(adjacency));
            }
        }
        Err(GraphError::AttemptsExhausted(self.max_attempts))
    }
}

fn finish(mut adjacency: Vec<Vec<usize>>) -> Graph {
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Graph::from_sorted_adjacency(adjacency)
}

#[inline]
fn can_join(adjacency: &[Vec<usize>], a: usize, b: usize) -> bool {
    a != b && !adjacency[a].contains(&b)
}

fn join(adjacency: &mut [Vec<usize>], a: usize, b: usize) {
    adjacency[a].push(b);
    adjacency[b].push(a);
}

/// Uniform perfect matching built one pair at a time; aborts as soon as the
/// partial matching is not simple.
fn pair_by_rejection(points: &[usize], adjacency: &mut [Vec<usize>], rng: &mut SimRng) -> bool {
    let mut pts = points.to_vec();
    let len = pts.len();
    let mut i = 0;
    while i < len {
        let j = rng.random_range(i + 1..len);
        pts.swap(i + 1, j);
        let (a, b) = (pts[i], pts[i + 1]);
        if !can_join(adjacency, a, b) {
            return false;
        }
        join(adjacency, a, b);
        i += 2;
    }
    true
}

fn pair_sides_by_rejection(
    left: &[usize],
    right: &[usize],
    adjacency: &mut [Vec<usize>],
    rng: &mut SimRng,
) -> bool {
    let mut pts = right.to_vec();
    for (i, &a) in left.iter().enumerate() {
        let j = rng.random_range(i..pts.len());
        pts.swap(i, j);
        let b = pts[i];
        if !can_join(adjacency, a, b) {
            return false;
        }
        join(adjacency, a, b);
    }
    true
}

/// Repeatedly draws two free half-edges uniformly and keeps the pair when it
/// keeps the graph simple. When draws keep failing, checks exhaustively
/// whether any admissible pair is left and gives up if not.
fn pair_sequentially(points: &[usize], adjacency: &mut [Vec<usize>], rng: &mut SimRng) -> bool {
    let mut free = points.to_vec();
    let mut failures = 0usize;
    while !free.is_empty() {
        let i = rng.random_range(0..free.len());
        let mut j = rng.random_range(0..free.len() - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (free[i], free[j]);
        if can_join(adjacency, a, b) {
            join(adjacency, a, b);
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            free.swap_remove(hi);
            free.swap_remove(lo);
            failures = 0;
            continue;
        }
        failures += 1;
        if failures > 32 * free.len() + 64 {
            if !any_admissible(&free, &free, adjacency) {
                return false;
            }
            failures = 0;
        }
    }
    true
}

fn pair_sides_sequentially(
    left: &[usize],
    right: &[usize],
    adjacency: &mut [Vec<usize>],
    rng: &mut SimRng,
) -> bool {
    let mut free_left = left.to_vec();
    let mut free_right = right.to_vec();
    let mut failures = 0usize;
    while !free_left.is_empty() {
        let i = rng.random_range(0..free_left.len());
        let j = rng.random_range(0..free_right.len());
        let (a, b) = (free_left[i], free_right[j]);
        if can_join(adjacency, a, b) {
            join(adjacency, a, b);
            free_left.swap_remove(i);
            free_right.swap_remove(j);
            failures = 0;
            continue;
        }
        failures += 1;
        if failures > 32 * free_left.len() + 64 {
            if !any_admissible(&free_left, &free_right, adjacency) {
                return false;
            }
            failures = 0;
        }
    }
    true
}

fn any_admissible(xs: &[usize], ys: &[usize], adjacency: &[Vec<usize>]) -> bool {
    xs.iter()
        .any(|&a| ys.iter().any(|&b| can_join(adjacency, a, b)))
}

/// Uniform random labeled tree on `n` vertices (Prüfer decoding).
pub fn random_tree(n: usize, seed: u64) -> Graph {
    if n <= 2 {
        return Graph::path(n);
    }
    let mut rng = SimRng::seed_from_u64(seed);
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: alloc::collections::BinaryHeap<core::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| degree[v] == 1)
        .map(core::cmp::Reverse)
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let core::cmp::Reverse(leaf) = leaves.pop().expect("Prüfer code always has a leaf");
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.push(core::cmp::Reverse(c));
        }
    }
    let core::cmp::Reverse(a) = leaves.pop().unwrap();
    let core::cmp::Reverse(b) = leaves.pop().unwrap();
    edges.push((a, b));
    Graph::from_edges(n, edges).expect("Prüfer decoding yields a tree")
}

/// Erdős–Rényi G(n, p).
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("G(n,p) is simple")
}

/// Random connected graph: a uniform random tree plus `extra_edges` distinct
/// random chords (capped by the number of available non-edges).
pub fn random_connected(n: usize, extra_edges: usize, seed: u64) -> Graph {
    let tree = random_tree(n, seed);
    let mut rng = SimRng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut non_edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !tree.has_edge(u, v))
        .collect();
    non_edges.shuffle(&mut rng);
    non_edges.truncate(extra_edges);
    Graph::from_edges(n, tree.edges().chain(non_edges)).expect("chords are new edges")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::girth;

    #[test]
    fn regular_on_four_vertices_is_k4() {
        for seed in 0..5 {
            assert_eq!(random_regular(4, 3, seed).unwrap(), Graph::complete(4));
        }
    }

    #[test]
    fn regular_is_deterministic() {
        let a = random_regular(10, 3, 42).unwrap();
        let b = random_regular(10, 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn regular_degree_audit() {
        let g = random_regular(1000, 10, 3).unwrap();
        assert!((0..1000).all(|v| g.degree(v) == 10));
        let g = random_regular(60, 4, 9).unwrap();
        assert!((0..60).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn regular_rejects_bad_parameters() {
        assert!(matches!(
            random_regular(5, 3, 0),
            Err(GraphError::InvalidParameters(_))
        ));
        assert!(matches!(
            random_regular(4, 4, 0),
            Err(GraphError::InvalidParameters(_))
        ));
        assert_eq!(random_regular(6, 0, 0).unwrap(), Graph::empty(6));
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let generator = RegularGenerator {
            method: PairingMethod::Rejection,
            max_attempts: 3,
        };
        assert_eq!(
            generator.regular(200, 16, 1),
            Err(GraphError::AttemptsExhausted(3))
        );
    }

    #[test]
    fn bipartite_small_and_large() {
        let k33 = random_regular_bipartite(3, 3, 11).unwrap();
        assert_eq!(k33, Graph::complete_bipartite(3, 3));
        let g = random_regular_bipartite(500, 8, 5).unwrap();
        assert!((0..1000).all(|v| g.degree(v) == 8));
        for (u, v) in g.edges() {
            assert!(u < 500 && v >= 500);
        }
        assert!(girth(&g).is_none_or(|l| l >= 4 && l % 2 == 0));
    }

    #[test]
    fn trees_have_n_minus_one_edges() {
        for n in [1, 2, 3, 10, 50] {
            let t = random_tree(n, n as u64);
            assert_eq!(t.edge_count(), n.saturating_sub(1));
            assert!(t.is_connected());
            assert_eq!(girth(&t), None);
        }
    }
}
