//! Model parameters, the tree uniqueness threshold, and independent sets.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("lambda_c is defined for degree >= 3, got {0}")]
    DegreeTooSmall(usize),
    #[error("fugacity must be positive and finite, got {0}")]
    InvalidFugacity(f64),
    #[error("slack delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("occupancy has length {got}, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("vertices {0} and {1} are adjacent and both occupied")]
    NotIndependent(usize, usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
}

/// Degrees above this use the log-space formula.
const LOG_SPACE_FROM: usize = 64;

/// `λ_c(Δ) = (Δ-1)^(Δ-1) / (Δ-2)^Δ`.
pub fn lambda_c(max_degree: usize) -> Result<f64, ModelError> {
    if max_degree < 3 {
        return Err(ModelError::DegreeTooSmall(max_degree));
    }
    let d = max_degree as f64;
    if max_degree <= LOG_SPACE_FROM {
        // ((Δ-1)/(Δ-2))^(Δ-1) / (Δ-2); exact at Δ = 3.
        Ok(libm::pow((d - 1.0) / (d - 2.0), d - 1.0) / (d - 2.0))
    } else {
        Ok(libm::exp((d - 1.0) * libm::log1p(1.0 / (d - 2.0)) - libm::log(d - 2.0)))
    }
}

pub const DEFAULT_DELTA: f64 = 0.2;

/// Fugacity plus the slack `δ` used by "λ < (1-δ)λ_c" style statements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    lambda: f64,
    delta: f64,
}

impl ModelParams {
    pub fn new(lambda: f64) -> Result<Self, ModelError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ModelError::InvalidFugacity(lambda));
        }
        Ok(Self {
            lambda,
            delta: DEFAULT_DELTA,
        })
    }

    /// `λ = ratio · λ_c(Δ)`.
    pub fn from_ratio(ratio: f64, max_degree: usize) -> Result<Self, ModelError> {
        Self::new(ratio * lambda_c(max_degree)?)
    }

    pub fn with_delta(self, delta: f64) -> Result<Self, ModelError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ModelError::InvalidDelta(delta));
        }
        Ok(Self { delta, ..self })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Occupation probability of an unblocked vertex, `λ/(1+λ)`.
    pub fn occupy_probability(&self) -> f64 {
        self.lambda / (1.0 + self.lambda)
    }

    /// Whether `λ ≤ (1-δ)λ_c(Δ)`; `None` when `Δ < 3`.
    pub fn within_slack(&self, max_degree: usize) -> Option<bool> {
        lambda_c(max_degree)
            .ok()
            .map(|lc| self.lambda <= (1.0 - self.delta) * lc)
    }
}

/// `true` iff no edge has both endpoints occupied.
pub fn is_independent(g: &Graph, occupied: &[bool]) -> Result<bool, ModelError> {
    check_length(g, occupied)?;
    Ok(first_conflict(g, occupied).is_none())
}

fn check_length(g: &Graph, occupied: &[bool]) -> Result<(), ModelError> {
    if occupied.len() != g.vertex_count() {
        return Err(ModelError::LengthMismatch {
            expected: g.vertex_count(),
            got: occupied.len(),
        });
    }
    Ok(())
}

fn first_conflict(g: &Graph, occupied: &[bool]) -> Option<(usize, usize)> {
    g.edges().find(|&(u, v)| occupied[u] && occupied[v])
}

/// An independent set, stored as an occupancy array.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndependentSet {
    occupied: Vec<bool>,
}

impl IndependentSet {
    pub fn empty(n: usize) -> Self {
        Self {
            occupied: vec![false; n],
        }
    }

    pub fn from_occupancy(g: &Graph, occupied: Vec<bool>) -> Result<Self, ModelError> {
        check_length(g, &occupied)?;
        if let Some((u, v)) = first_conflict(g, &occupied) {
            return Err(ModelError::NotIndependent(u, v));
        }
        Ok(Self { occupied })
    }

    pub fn from_vertices(g: &Graph, vertices: &[usize]) -> Result<Self, ModelError> {
        let mut occupied = vec![false; g.vertex_count()];
        for &v in vertices {
            *occupied
                .get_mut(v)
                .ok_or(ModelError::VertexOutOfRange(v))? = true;
        }
        Self::from_occupancy(g, occupied)
    }

    /// Bit `v` of `mask` marks vertex `v`; used by the exact oracles.
    pub(crate) fn from_mask_unchecked(n: usize, mask: u64) -> Self {
        Self {
            occupied: (0..n).map(|v| mask >> v & 1 == 1).collect(),
        }
    }

    /// Greedy maximal independent set, scanning vertices in `order`.
    pub fn greedy_maximal(g: &Graph, order: impl IntoIterator<Item = usize>) -> Self {
        let mut occupied = vec![false; g.vertex_count()];
        for v in order {
            if !g.neighbors(v).iter().any(|&w| occupied[w]) {
                occupied[v] = true;
            }
        }
        Self { occupied }
    }

    pub fn vertex_count(&self) -> usize {
        self.occupied.len()
    }

    /// `|σ|`.
    pub fn size(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.occupied[v]
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(v, _)| v)
    }

    /// `λ^|σ|`.
    pub fn weight(&self, lambda: f64) -> f64 {
        libm::pow(lambda, self.size() as f64)
    }

    /// `|σ| ln λ`.
    pub fn log_weight(&self, lambda: f64) -> f64 {
        self.size() as f64 * libm::log(lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_c_values() {
        assert_eq!(lambda_c(3).unwrap(), 4.0);
        let l5 = lambda_c(5).unwrap();
        assert!((l5 - 256.0 / 243.0).abs() < 1e-15 && l5 > 1.0);
        let l6 = lambda_c(6).unwrap();
        assert!((l6 - 3125.0 / 4096.0).abs() < 1e-15 && l6 < 1.0);
        assert_eq!(lambda_c(2), Err(ModelError::DegreeTooSmall(2)));
    }

    #[test]
    fn lambda_c_decreases_across_the_formula_switch() {
        let mut prev = lambda_c(3).unwrap();
        for d in 4..=10_000 {
            let cur = lambda_c(d).unwrap();
            assert!(cur < prev, "not decreasing at {d}");
            prev = cur;
        }
    }

    #[test]
    fn lambda_c_asymptotics() {
        for d in (100..=10_000).step_by(37) {
            let ratio = d as f64 * lambda_c(d).unwrap() / core::f64::consts::E;
            assert!((ratio - 1.0).abs() <= 3.0 / d as f64, "d = {d}");
        }
    }

    #[test]
    fn weights() {
        let g = Graph::empty(5);
        assert_eq!(IndependentSet::empty(5).weight(3.0), 1.0);
        let s = IndependentSet::from_vertices(&g, &[0, 2, 4]).unwrap();
        assert_eq!(s.weight(2.0), 8.0);
        for size in 0..=50usize {
            let verts: Vec<usize> = (0..size).collect();
            let s = IndependentSet::from_vertices(&Graph::empty(50), &verts).unwrap();
            for lambda in [0.1, 0.5, 1.0, 2.5, 4.0] {
                let lin = s.weight(lambda);
                let log = libm::exp(s.log_weight(lambda));
                assert!((lin - log).abs() <= 1e-12 * lin);
            }
        }
    }

    #[test]
    fn weight_is_multiplicative_over_disjoint_unions() {
        let g = Graph::empty(8);
        let a = IndependentSet::from_vertices(&g, &[0, 1, 2]).unwrap();
        let b = IndependentSet::from_vertices(&g, &[5, 7]).unwrap();
        let ab = IndependentSet::from_vertices(&g, &[0, 1, 2, 5, 7]).unwrap();
        assert!((ab.weight(1.7) - a.weight(1.7) * b.weight(1.7)).abs() < 1e-12);
    }

    #[test]
    fn independence_checks() {
        let g = Graph::path(3);
        assert!(is_independent(&g, &[false; 3]).unwrap());
        assert!(!is_independent(&g, &[true, true, false]).unwrap());
        assert!(matches!(
            is_independent(&g, &[false; 2]),
            Err(ModelError::LengthMismatch { .. })
        ));
        assert_eq!(
            IndependentSet::from_vertices(&g, &[1, 2]),
            Err(ModelError::NotIndependent(1, 2))
        );
        for g in [Graph::petersen(), Graph::heawood(), Graph::grid(4, 4)] {
            for start in 0..g.vertex_count() {
                let n = g.vertex_count();
                let s = IndependentSet::greedy_maximal(&g, (0..n).map(|i| (i + start) % n));
                assert!(is_independent(&g, s.occupancy()).unwrap());
            }
        }
    }

    #[test]
    fn slack_flag() {
        let p = ModelParams::from_ratio(0.7, 6).unwrap();
        assert_eq!(p.within_slack(6), Some(true));
        assert_eq!(p.within_slack(2), None);
        let p = ModelParams::from_ratio(0.9, 6).unwrap();
        assert_eq!(p.within_slack(6), Some(false));
        assert!(ModelParams::new(0.0).is_err());
        assert!(ModelParams::new(1.0).unwrap().with_delta(1.0).is_err());
    }
}
