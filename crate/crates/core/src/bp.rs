//! Loopy belief propagation for the hard-core model.
//!
//! `ω(v)` is the probability that `v` is unblocked. The unrooted operator
//! `F` updates a [`VertexField`]; the parented operator `H` updates a
//! [`DirectedMessageField`] indexed by the arcs of the graph, where the
//! entry at arc `(v, p)` is the message from `v` to its parent `p`.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{distances_from, Graph};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BpError {
    #[error("field entry {index} is {value}, expected a value in [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("field has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("fixed point entry at vertex {0} is zero")]
    ZeroEntry(usize),
    #[error("no convergence after {iterations} sweeps, last residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
}

fn validate(values: &[f64], expected: usize) -> Result<(), BpError> {
    if values.len() != expected {
        return Err(BpError::LengthMismatch {
            expected,
            found: values.len(),
        });
    }
    match values.iter().position(|x| !(0.0..=1.0).contains(x)) {
        Some(index) => Err(BpError::OutOfRange {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// A value in `[0, 1]` per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexField {
    values: Vec<f64>,
}

impl VertexField {
    pub fn new(g: &Graph, values: Vec<f64>) -> Result<Self, BpError> {
        validate(&values, g.vertex_count())?;
        Ok(Self { values })
    }

    pub fn constant(g: &Graph, x: f64) -> Self {
        assert!((0.0..=1.0).contains(&x));
        Self {
            values: vec![x; g.vertex_count()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        max_abs_difference(&self.values, &other.values)
    }
}

/// A value in `[0, 1]` per arc of the graph, i.e. per oriented edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedMessageField {
    values: Vec<f64>,
}

impl DirectedMessageField {
    pub fn new(g: &Graph, values: Vec<f64>) -> Result<Self, BpError> {
        validate(&values, g.arc_count())?;
        Ok(Self { values })
    }

    pub fn constant(g: &Graph, x: f64) -> Self {
        assert!((0.0..=1.0).contains(&x));
        Self {
            values: vec![x; g.arc_count()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry at arc index `arc`.
    pub fn get(&self, arc: usize) -> f64 {
        self.values[arc]
    }

    /// Message from `tail` to `head`, if they are adjacent.
    pub fn message(&self, g: &Graph, tail: usize, head: usize) -> Option<f64> {
        g.arc_index(tail, head).map(|a| self.values[a])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        max_abs_difference(&self.values, &other.values)
    }
}

fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| libm::fabs(x - y))
        .fold(0.0, f64::max)
}

fn blocking_factors(lambda: f64, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&x| 1.0 / (1.0 + lambda * x)).collect()
}

/// `F(ω)(z) = Π_{y ∈ N(z)} 1 / (1 + λ ω(y))`.
pub fn apply_f(g: &Graph, lambda: f64, omega: &VertexField) -> VertexField {
    let factors = blocking_factors(lambda, &omega.values);
    let values = (0..g.vertex_count())
        .map(|z| g.neighbors(z).iter().map(|&y| factors[y]).product())
        .collect();
    VertexField { values }
}

/// `H(ω)(v, p) = Π_{u ∈ N(v) \ p} 1 / (1 + λ ω(u, v))`.
pub fn apply_h(g: &Graph, lambda: f64, omega: &DirectedMessageField) -> DirectedMessageField {
    let factors = blocking_factors(lambda, &omega.values);
    let mut values = vec![1.0; g.arc_count()];
    for v in 0..g.vertex_count() {
        let arcs = g.arcs_from(v);
        for parent_arc in arcs.clone() {
            values[parent_arc] = arcs
                .clone()
                .filter(|&a| a != parent_arc)
                .map(|a| factors[g.reverse_arc(a)])
                .product();
        }
    }
    DirectedMessageField { values }
}

/// `Ψ(x) = asinh(√(λx)) / √λ`.
pub fn psi(lambda: f64, x: f64) -> f64 {
    let s = libm::sqrt(lambda);
    libm::asinh(libm::sqrt(lambda * x)) / s
}

/// `Ψ'(x) = 1 / (2 √(x (1 + λx)))`, infinite at zero.
pub fn psi_derivative(lambda: f64, x: f64) -> f64 {
    0.5 / libm::sqrt(x * (1.0 + lambda * x))
}

/// Global metric `D(a, b) = max_z |Ψ(a(z)) − Ψ(b(z))|` over two value slices.
pub fn psi_distance(lambda: f64, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| libm::fabs(psi(lambda, x) - psi(lambda, y)))
        .fold(0.0, f64::max)
}

/// `D_{v,ℓ}`: the Ψ-distance restricted to `B(center, radius)`; `None` is the
/// whole graph.
pub fn psi_metric(
    g: &Graph,
    lambda: f64,
    a: &VertexField,
    b: &VertexField,
    center: usize,
    radius: Option<usize>,
) -> f64 {
    match radius {
        None => psi_distance(lambda, &a.values, &b.values),
        Some(r) => {
            let dist = distances_from(g, center, Some(r));
            (0..g.vertex_count())
                .filter(|&z| dist[z] <= r)
                .map(|z| libm::fabs(psi(lambda, a.values[z]) - psi(lambda, b.values[z])))
                .fold(0.0, f64::max)
        }
    }
}

/// One-sweep contraction factor `D(F(a), F(b)) / D(a, b)`; `None` when `a = b`.
pub fn contraction_factor(g: &Graph, lambda: f64, a: &VertexField, b: &VertexField) -> Option<f64> {
    let before = psi_distance(lambda, &a.values, &b.values);
    if before == 0.0 {
        return None;
    }
    let after = psi_distance(
        lambda,
        &apply_f(g, lambda, a).values,
        &apply_f(g, lambda, b).values,
    );
    Some(after / before)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Stop once successive iterates are within this Ψ-distance.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport<F> {
    /// The last iterate.
    pub fixed_point: F,
    pub iterations: usize,
    /// Ψ-distance between the last two iterates.
    pub final_residual: f64,
    /// Ψ-distance between successive iterates, one per sweep.
    pub residuals: Vec<f64>,
    /// `residuals[i + 1] / residuals[i]`, skipping sweeps with a zero residual.
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
}

impl<F> FixedPointReport<F> {
    /// Largest per-sweep contraction factor among sweeps whose incoming
    /// residual is at least `floor`, which keeps rounding noise out.
    pub fn observed_rate(&self, floor: f64) -> Option<f64> {
        self.residuals
            .windows(2)
            .filter(|w| w[0] >= floor)
            .map(|w| w[1] / w[0])
            .reduce(f64::max)
    }

    pub fn into_result(self) -> Result<Self, BpError> {
        if self.converged {
            Ok(self)
        } else {
            Err(BpError::NotConverged {
                iterations: self.iterations,
                residual: self.final_residual,
            })
        }
    }
}

fn iterate<T, S>(
    lambda: f64,
    init: T,
    options: FixedPointOptions,
    values: fn(&T) -> &[f64],
    mut step: S,
) -> FixedPointReport<T>
where
    S: FnMut(&T) -> T,
{
    let mut current = init;
    let mut residuals = Vec::new();
    let mut converged = false;
    while residuals.len() < options.max_iterations {
        let next = step(&current);
        let residual = psi_distance(lambda, values(&next), values(&current));
        residuals.push(residual);
        current = next;
        if residual <= options.tolerance {
            converged = true;
            break;
        }
    }
    let contraction_factors = residuals
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    FixedPointReport {
        fixed_point: current,
        iterations: residuals.len(),
        final_residual: residuals.last().copied().unwrap_or(0.0),
        residuals,
        contraction_factors,
        converged,
    }
}

/// Synchronous iteration of `F` from `init`, returning the report whether
/// or not it converged.
pub fn iterate_f(
    g: &Graph,
    lambda: f64,
    init: VertexField,
    options: FixedPointOptions,
) -> FixedPointReport<VertexField> {
    iterate(lambda, init, options, VertexField::values, |w| {
        apply_f(g, lambda, w)
    })
}

/// Like [`iterate_f`], but non-convergence is an error.
pub fn fixed_point_f(
    g: &Graph,
    lambda: f64,
    init: VertexField,
    options: FixedPointOptions,
) -> Result<FixedPointReport<VertexField>, BpError> {
    iterate_f(g, lambda, init, options).into_result()
}

pub fn iterate_h(
    g: &Graph,
    lambda: f64,
    init: DirectedMessageField,
    options: FixedPointOptions,
) -> FixedPointReport<DirectedMessageField> {
    iterate(lambda, init, options, DirectedMessageField::values, |w| {
        apply_h(g, lambda, w)
    })
}

pub fn fixed_point_h(
    g: &Graph,
    lambda: f64,
    init: DirectedMessageField,
    options: FixedPointOptions,
) -> Result<FixedPointReport<DirectedMessageField>, BpError> {
    iterate_h(g, lambda, init, options).into_result()
}

/// Largest graph [`newton_fixed_point_f`] accepts; it factors a dense
/// `n × n` matrix per step.
pub const NEWTON_MAX_VERTICES: usize = 1500;

/// Solves `ω = F(ω)` by Newton's method from `init`.
///
/// Plain iteration 2-cycles once `F` stops contracting, although the fixed
/// point still exists and is unique. Residuals are the Ψ-distance between
/// `ω` and `F(ω)`.
pub fn newton_fixed_point_f(
    g: &Graph,
    lambda: f64,
    init: VertexField,
    options: FixedPointOptions,
) -> Result<FixedPointReport<VertexField>, BpError> {
    let n = g.vertex_count();
    if n > NEWTON_MAX_VERTICES {
        return Err(BpError::LengthMismatch {
            expected: NEWTON_MAX_VERTICES,
            found: n,
        });
    }
    let mut omega = init.values;
    let mut residuals = Vec::new();
    let mut matrix = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    let mut converged = false;
    while residuals.len() < options.max_iterations {
        let field = VertexField {
            values: omega.clone(),
        };
        let f = apply_f(g, lambda, &field);
        let residual = psi_distance(lambda, &f.values, &omega);
        residuals.push(residual);
        if residual <= options.tolerance {
            converged = true;
            break;
        }
        // (I + J) Δ = F(ω) − ω, with J the Jacobian magnitudes of F.
        matrix.iter_mut().for_each(|x| *x = 0.0);
        for v in 0..n {
            matrix[v * n + v] = 1.0;
            for &u in g.neighbors(v) {
                matrix[v * n + u] += lambda * f.values[v] / (1.0 + lambda * omega[u]);
            }
            rhs[v] = f.values[v] - omega[v];
        }
        if !solve_dense(&mut matrix, &mut rhs, n) {
            break;
        }
        for v in 0..n {
            omega[v] = (omega[v] + rhs[v]).clamp(f64::MIN_POSITIVE, 1.0);
        }
    }
    let contraction_factors = residuals
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    FixedPointReport {
        fixed_point: VertexField { values: omega },
        iterations: residuals.len(),
        final_residual: residuals.last().copied().unwrap_or(0.0),
        residuals,
        contraction_factors,
        converged,
    }
    .into_result()
}

/// Gaussian elimination with partial pivoting; the solution replaces `rhs`.
fn solve_dense(a: &mut [f64], rhs: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| libm::fabs(a[i * n + col]).total_cmp(&libm::fabs(a[j * n + col])))
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            rhs.swap(pivot, col);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * rhs[k];
        }
        rhs[col] = acc / a[col * n + col];
    }
    true
}

/// Bisection tolerance for [`x_hat`].
pub const X_HAT_TOLERANCE: f64 = 1e-13;

/// The unique root of `x = (1 + λx)^{-d}` in `[0, 1]`.
pub fn x_hat(lambda: f64, d: usize) -> f64 {
    let gap = |x: f64| x - libm::pow(1.0 + lambda * x, -(d as f64));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > X_HAT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `α(λ, d) = √(d λ x̂ / (1 + λ x̂))`, the Ψ-metric contraction rate of `F`
/// on graphs of maximum degree `d`.
pub fn alpha(lambda: f64, d: usize) -> f64 {
    let x = x_hat(lambda, d);
    libm::sqrt(d as f64 * lambda * x / (1.0 + lambda * x))
}

/// `(1 − δ/6) − α(λ, Δ)`; nonnegative means the certified contraction regime.
pub fn uniqueness_margin(lambda: f64, max_degree: usize, delta: f64) -> f64 {
    (1.0 - delta / 6.0) - alpha(lambda, max_degree)
}

/// Smallest `Δ₀ ≥ 3` such that the margin at `λ = ratio · λ_c(Δ)` is
/// nonnegative for every `Δ` in `Δ₀..=max_degree`, or `None` if it fails at
/// `max_degree` itself.
pub fn observed_delta0(ratio: f64, delta: f64, max_degree: usize) -> Option<usize> {
    let mut delta0 = None;
    for d in (3..=max_degree).rev() {
        let lambda = ratio * crate::model::lambda_c(d).ok()?;
        if uniqueness_margin(lambda, d, delta) < 0.0 {
            break;
        }
        delta0 = Some(d);
    }
    delta0
}

/// Smallest fixed-point entry for which `Φ ≤ 12` is certified.
pub const PHI_CERTIFIED_FLOOR: f64 = 1.0 / 125.0;

/// Path-coupling weights `Φ(v) = √((1 + λω*(v)) / ω*(v))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFunction {
    values: Vec<f64>,
    certified: bool,
}

impl PhiFunction {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// Uniform weights `Φ ≡ 1`, which turn weighted distances into Hamming.
    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
            certified: true,
        }
    }

    /// Set when every `ω*(v) ≥ 5^{-3}` and `λ ≤ 4`, which forces `Φ ≤ 12`.
    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn build_phi(lambda: f64, omega_star: &VertexField) -> Result<PhiFunction, BpError> {
    if let Some(v) = omega_star.values.iter().position(|&x| x <= 0.0) {
        return Err(BpError::ZeroEntry(v));
    }
    let values = omega_star
        .values
        .iter()
        .map(|&x| libm::sqrt((1.0 + lambda * x) / x))
        .collect();
    let certified =
        lambda <= 4.0 && omega_star.values.iter().all(|&x| x >= PHI_CERTIFIED_FLOOR);
    Ok(PhiFunction { values, certified })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiContractionReport {
    /// `Σ_{u ∈ N(v)} λω*(u)Φ(u) / (1 + λω*(u))` divided by `Φ(v)`, per vertex.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub worst_vertex: Option<usize>,
    /// `1 − δ/6`.
    pub threshold: f64,
    pub holds: bool,
}

pub fn verify_phi_contraction(
    g: &Graph,
    lambda: f64,
    omega_star: &VertexField,
    phi: &PhiFunction,
    delta: f64,
) -> PhiContractionReport {
    let weight: Vec<f64> = omega_star
        .values
        .iter()
        .zip(&phi.values)
        .map(|(&x, &p)| lambda * x * p / (1.0 + lambda * x))
        .collect();
    let ratios: Vec<f64> = (0..g.vertex_count())
        .map(|v| g.neighbors(v).iter().map(|&u| weight[u]).sum::<f64>() / phi.values[v])
        .collect();
    let (worst_vertex, max_ratio) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((None, 0.0), |(bv, bm), (v, r)| {
            if bv.is_none() || r > bm {
                (Some(v), r)
            } else {
                (bv, bm)
            }
        });
    let threshold = 1.0 - delta / 6.0;
    PhiContractionReport {
        holds: max_ratio <= threshold,
        ratios,
        max_ratio,
        worst_vertex,
        threshold,
    }
}

/// Jacobian magnitudes of `F`, stored per arc: the entry at arc `(v, u)` is
/// `λF(ω)(v) / (1 + λω(u)) = −∂F(ω)(v)/∂ω(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianRows {
    entries: Vec<f64>,
}

impl JacobianRows {
    /// Entries of row `v`, aligned with `g.neighbors(v)`.
    pub fn row<'a>(&'a self, g: &Graph, v: usize) -> &'a [f64] {
        &self.entries[g.arcs_from(v)]
    }

    pub fn entry(&self, g: &Graph, v: usize, u: usize) -> f64 {
        g.arc_index(v, u).map_or(0.0, |a| self.entries[a])
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

pub fn jacobian_rows(g: &Graph, lambda: f64, omega: &VertexField) -> JacobianRows {
    let f = apply_f(g, lambda, omega);
    let entries = (0..g.arc_count())
        .map(|a| {
            let (v, u) = (g.arc_tail(a), g.arc_head(a));
            lambda * f.values[v] / (1.0 + lambda * omega.values[u])
        })
        .collect();
    JacobianRows { entries }
}

/// `ĴΦ` with `Ĵ = D⁻¹ J* D` and `D = diag(ω*)`, computed from the Jacobian at
/// `ω*`: `Ĵ(v, u) = J*(v, u) ω*(u) / ω*(v)`.
pub fn scaled_jacobian_times_phi(
    g: &Graph,
    lambda: f64,
    omega_star: &VertexField,
    phi: &PhiFunction,
) -> Vec<f64> {
    let jac = jacobian_rows(g, lambda, omega_star);
    let w = &omega_star.values;
    (0..g.vertex_count())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .zip(jac.row(g, v))
                .map(|(&u, &j)| j * w[u] / w[v] * phi.values[u])
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpMode {
    /// Messages `R^t_{v→p}` along arcs, giving `q^t(v, p)`.
    Parented,
    /// Vertex messages `R̃^t_v`, giving `q̃^t(v)`.
    Unrooted,
}

/// Loopy BP occupation probabilities after `t` rounds started from `R⁰ ≡ λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopyMarginals {
    pub mode: BpMode,
    /// Arc-indexed `q^t(v, p)` when parented, vertex-indexed `q̃^t(v)` when
    /// unrooted.
    pub values: Vec<f64>,
}

pub fn loopy_bp_marginals(g: &Graph, lambda: f64, t: usize, mode: BpMode) -> LoopyMarginals {
    // R = λω, and R⁰ ≡ λ corresponds to ω⁰ ≡ 1.
    let to_q = |omega: &[f64]| {
        omega
            .iter()
            .map(|&w| {
                let r = lambda * w;
                r / (1.0 + r)
            })
            .collect()
    };
    let values = match mode {
        BpMode::Parented => {
            let mut omega = DirectedMessageField::constant(g, 1.0);
            for _ in 0..t {
                omega = apply_h(g, lambda, &omega);
            }
            to_q(&omega.values)
        }
        BpMode::Unrooted => {
            let mut omega = VertexField::constant(g, 1.0);
            for _ in 0..t {
                omega = apply_f(g, lambda, &omega);
            }
            to_q(&omega.values)
        }
    };
    LoopyMarginals { mode, values }
}
