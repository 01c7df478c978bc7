//! Deterministic hierarchical graphs with known diameter and cost bounds.

mod exponents;

pub use exponents::{
    critical_exponent, default_sigma, h_of, theoretical_exponent, zeta_p, zeta_p_delta,
    ExponentError,
};

use serde::Serialize;

use crate::distance::exact_diameter;
use crate::graph::{Edge, Graph, GraphError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("invalid dyadic levels {k_low}..={k_high} for N = {n} (need 1 <= k_low <= k_high and 2^k_high < N)")]
    InvalidLevels { n: usize, k_low: u32, k_high: u32 },
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Largest `n` with `2^n < N`.
pub fn dyadic_depth(n_vertices: usize) -> u32 {
    let mut n = 0;
    while (1usize << (n + 1)) < n_vertices {
        n += 1;
    }
    n
}

/// `E_N(k,l)`: all `{i 2^j, (i+1) 2^j}` with `k ≤ j ≤ l` inside `V_N`.
pub fn dyadic_edges(n_vertices: usize, k_low: u32, k_high: u32) -> Result<Vec<Edge>, ConstructionError> {
    let invalid = ConstructionError::InvalidLevels { n: n_vertices, k_low, k_high };
    if k_low < 1 || k_low > k_high || k_high >= usize::BITS - 1 || (1usize << k_high) >= n_vertices {
        return Err(invalid);
    }
    let mut edges = Vec::new();
    for j in k_low..=k_high {
        let step = 1usize << j;
        let mut x = 0;
        while x + step < n_vertices {
            edges.push(Edge::new(x, x + step));
            x += step;
        }
    }
    edges.sort();
    Ok(edges)
}

/// A dyadic graph together with the levels it uses and its diameter bound.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicConstruction {
    pub graph: Graph,
    pub k: u32,
    /// Largest `n` with `2^n < N`.
    pub depth: u32,
    pub diameter_bound: u64,
}

fn check_alpha(alpha: f64) -> Result<(), ConstructionError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(ConstructionError::Alpha(alpha))
    }
}

/// Bound `2^{k+1} + 2(n-k)` on the diameter of `E_N(k,n)`.
pub fn topdown_bound(k: u32, depth: u32) -> u64 {
    (1u64 << (k + 1)) + 2 * u64::from(depth - k)
}

/// Bound `2^{n-k+2} + 2k` on the diameter of `E_N(1,k)`.
pub fn bottomup_bound(k: u32, depth: u32) -> u64 {
    (1u64 << (depth - k + 2)) + 2 * u64::from(k)
}

/// Levels `k..=n` with `k` the largest integer such that `2^k ≤ N^α / 4`.
pub fn topdown_construction(n_vertices: usize, alpha: f64) -> Result<DyadicConstruction, ConstructionError> {
    check_alpha(alpha)?;
    let depth = dyadic_depth(n_vertices);
    let budget = (n_vertices as f64).powf(alpha) / 4.0;
    let k = (1..=depth).take_while(|&k| (1u64 << k) as f64 <= budget).last().ok_or_else(|| {
        ConstructionError::Infeasible(format!("no k >= 1 with 2^k <= N^alpha/4 = {budget}"))
    })?;
    let graph = Graph::with_edges(n_vertices, dyadic_edges(n_vertices, k, depth)?)?;
    Ok(DyadicConstruction { graph, k, depth, diameter_bound: topdown_bound(k, depth) })
}

/// Levels `1..=k` with `k` the smallest integer in `[1, n]` such that
/// `2^{n-k} ≤ N^α / 8`.
pub fn bottomup_construction(n_vertices: usize, alpha: f64) -> Result<DyadicConstruction, ConstructionError> {
    check_alpha(alpha)?;
    let depth = dyadic_depth(n_vertices);
    let budget = (n_vertices as f64).powf(alpha) / 8.0;
    let k = (1..=depth).find(|&k| (1u64 << (depth - k)) as f64 <= budget).ok_or_else(|| {
        ConstructionError::Infeasible(format!("no k in [1, {depth}] with 2^(n-k) <= N^alpha/8 = {budget}"))
    })?;
    let graph = Graph::with_edges(n_vertices, dyadic_edges(n_vertices, 1, k)?)?;
    Ok(DyadicConstruction { graph, k, depth, diameter_bound: bottomup_bound(k, depth) })
}

/// `⌊N^{1/k}⌋` computed exactly.
pub fn integer_root(n: usize, k: u32) -> usize {
    if k <= 1 {
        return n;
    }
    let fits = |r: usize| (r as u128).checked_pow(k).is_some_and(|v| v <= n as u128);
    let mut r = (n as f64).powf(1.0 / f64::from(k)).round() as usize;
    while r > 0 && !fits(r) {
        r -= 1;
    }
    while fits(r + 1) {
        r += 1;
    }
    r
}

/// The `k`-layer graph with edges `{i L^j, (i+1) L^j}`, `L = ⌊N^{1/k}⌋`,
/// `1 ≤ j ≤ k-1`, together with its measured cost and diameter.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalConstruction {
    pub graph: Graph,
    pub k: u32,
    pub base: usize,
    /// Measured `C_1`.
    pub cost: u64,
    /// Measured `H_∞`.
    pub diameter: u32,
    /// `(k-1) N`.
    pub cost_bound: u64,
    /// `3 k N^{1/k}`.
    pub diameter_bound: f64,
}

impl CriticalConstruction {
    pub fn within_bounds(&self) -> bool {
        self.cost <= self.cost_bound && f64::from(self.diameter) <= self.diameter_bound
    }
}

pub fn critical_edges(n_vertices: usize, k: u32) -> Result<Vec<Edge>, ConstructionError> {
    if k < 1 {
        return Err(ConstructionError::Infeasible("k must be at least 1".into()));
    }
    let base = integer_root(n_vertices, k);
    if base < 2 {
        return Err(ConstructionError::Infeasible(format!("floor(N^(1/{k})) = {base} < 2 for N = {n_vertices}")));
    }
    let mut edges = Vec::new();
    let mut step = 1usize;
    for _ in 1..k {
        step *= base;
        let count = (n_vertices - 1) / step;
        edges.extend((0..count).map(|i| Edge::new(i * step, (i + 1) * step)));
    }
    edges.sort();
    Ok(edges)
}

pub fn critical_construction(n_vertices: usize, k: u32) -> Result<CriticalConstruction, ConstructionError> {
    let graph = Graph::with_edges(n_vertices, critical_edges(n_vertices, k)?)?;
    let n = n_vertices as f64;
    Ok(CriticalConstruction {
        k,
        base: integer_root(n_vertices, k),
        cost: graph.linear_cost(),
        diameter: exact_diameter(&graph),
        cost_bound: u64::from(k - 1) * n_vertices as u64,
        diameter_bound: 3.0 * f64::from(k) * n.powf(1.0 / f64::from(k)),
        graph,
    })
}
