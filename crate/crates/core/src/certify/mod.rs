//! Covering numbers, regular vertices and the three-level recursion that
//! extracts nested layers of long edges from a graph with small `H_p`.
//!
//! Every threshold is a real number compared against integer counts. Logs
//! are natural. Each returned object carries an [`Audit`] of independently
//! re-checked inequalities.

mod recursion;

pub use recursion::{
    level1_decompose, level2_decompose, level3_layers, Layer, LayerCertificate, Level1Branch,
    Level1Result, Level2Branch, Level2Result,
};

use serde::Serialize;

use crate::constructions::{default_sigma, zeta_p_delta};
use crate::distance::{avg_path_length, DistanceCache};
use crate::graph::{Edge, Graph};
use crate::scalar::{PathExponent, Real};

#[derive(Debug, Clone, thiserror::Error)]
pub enum CertifyError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0} is not a ground edge")]
    NotGround(Edge),
    #[error("certificate audit failed although H_p <= N^eta holds: {failed} inequalities violated")]
    AuditFailed { failed: usize, certificate: Box<LayerCertificate> },
}

/// Exponents `(p, k, η, δ, σ)` with `η ∈ (1/(k+1), 1/k)`,
/// `δ ∈ (0, 1 - kη)` and `σ ≥ η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertParams<T> {
    pub p: PathExponent<T>,
    pub k: u32,
    pub eta: T,
    pub delta: T,
    pub sigma: T,
}

impl<T: Real> CertParams<T> {
    /// Parameters with the default `σ`.
    pub fn new(p: PathExponent<T>, k: u32, eta: T, delta: T) -> Result<Self, CertifyError> {
        Self::with_sigma(p, k, eta, delta, default_sigma(&p, k, eta, delta))
    }

    pub fn with_sigma(p: PathExponent<T>, k: u32, eta: T, delta: T, sigma: T) -> Result<Self, CertifyError> {
        if k < 1 {
            return Err(CertifyError::Params("k must be at least 1".into()));
        }
        if !p.is_valid() {
            return Err(CertifyError::Params(format!("path exponent {p} < 1")));
        }
        let kk = T::of(i64::from(k));
        if !(eta > (kk + T::one()).recip() && eta < kk.recip()) {
            return Err(CertifyError::Params(format!("eta = {eta} outside (1/{}, 1/{k})", k + 1)));
        }
        if !(delta > T::zero() && delta < T::one() - kk * eta) {
            return Err(CertifyError::Params(format!("delta = {delta} outside (0, 1 - k eta)")));
        }
        if !(sigma >= eta) {
            return Err(CertifyError::Params(format!("sigma = {sigma} < eta = {eta}")));
        }
        Ok(Self { p, k, eta, delta, sigma })
    }
}

/// One audited inequality `lhs op rhs` with both sides evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub scope: String,
    pub label: &'static str,
    pub lhs: f64,
    pub op: &'static str,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Audit {
    pub checks: Vec<Check>,
}

impl Audit {
    pub fn le(&mut self, scope: &str, label: &'static str, lhs: f64, rhs: f64) {
        self.checks.push(Check { scope: scope.to_string(), label, lhs, op: "<=", rhs, holds: lhs <= rhs });
    }

    pub fn ge(&mut self, scope: &str, label: &'static str, lhs: f64, rhs: f64) {
        self.checks.push(Check { scope: scope.to_string(), label, lhs, op: ">=", rhs, holds: lhs >= rhs });
    }

    /// Either `a` or `b` holds; recorded as `lhs` = number that hold.
    pub fn any(&mut self, scope: &str, label: &'static str, a: bool, b: bool) {
        let n = f64::from(u8::from(a) + u8::from(b));
        self.ge(scope, label, n, 1.0);
    }

    pub fn extend(&mut self, other: &Audit) {
        self.checks.extend(other.checks.iter().cloned());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Number of non-ground edges `{a', b'}` in `edges` with `a' ≤ a` and
/// `b' ≥ a + 1`.
pub fn psi<'a>(ground_edge: Edge, edges: impl IntoIterator<Item = &'a Edge>) -> Result<usize, CertifyError> {
    if !ground_edge.is_ground() {
        return Err(CertifyError::NotGround(ground_edge));
    }
    let (a, b) = (ground_edge.lo(), ground_edge.hi());
    Ok(edges.into_iter().filter(|e| e.is_long() && e.lo() <= a && e.hi() >= b).count())
}

/// `ψ({a, a+1}, edges)` for every `a ∈ 0..N-1`, by a difference array.
pub fn coverage_counts<'a>(n: usize, edges: impl IntoIterator<Item = &'a Edge>) -> Vec<u32> {
    let mut diff = vec![0i64; n];
    for e in edges.into_iter().filter(|e| e.is_long()) {
        diff[e.lo()] += 1;
        diff[e.hi()] -= 1;
    }
    let mut acc = 0i64;
    diff[..n - 1]
        .iter()
        .map(|d| {
            acc += d;
            acc as u32
        })
        .collect()
}

/// `(C_1(g), Σ_{e ground} ψ(e, E_N))`. The two always agree.
pub fn cost_psi_identity(graph: &Graph) -> (u64, u64) {
    let edges: Vec<Edge> = graph.long_edges().collect();
    let psi_sum = coverage_counts(graph.n(), &edges).iter().map(|&c| u64::from(c)).sum();
    (graph.linear_cost(), psi_sum)
}

/// Regularity of every vertex: `x` is irregular when `d(x, y) > N^σ` for
/// every `y` with `|y - x| ≥ N/4`.
#[derive(Debug, Clone)]
pub struct Regularity {
    irregular: Vec<bool>,
    prefix: Vec<usize>,
}

impl Regularity {
    pub fn new<T: Real>(cache: &DistanceCache<T>, sigma_exp: T) -> Self {
        let n = cache.n();
        let radius = T::of_usize(n).powf(sigma_exp);
        let quarter = n.div_ceil(4);
        let irregular: Vec<bool> = (0..n)
            .map(|x| {
                let row = cache.row(x);
                let left = x.checked_sub(quarter).map(|hi| &row[..=hi]).unwrap_or(&[]);
                let right = row.get(x + quarter..).unwrap_or(&[]);
                !left.iter().chain(right).any(|&d| T::of_usize(d as usize) <= radius)
            })
            .collect();
        let mut prefix = vec![0; n + 1];
        for (i, &f) in irregular.iter().enumerate() {
            prefix[i + 1] = prefix[i] + usize::from(f);
        }
        Self { irregular, prefix }
    }

    pub fn is_irregular(&self, x: usize) -> bool {
        self.irregular[x]
    }

    /// Irregular vertices in `lo..=hi` (zero when `lo > hi`).
    pub fn count_in(&self, lo: usize, hi: usize) -> usize {
        if lo > hi {
            0
        } else {
            self.prefix[hi + 1] - self.prefix[lo]
        }
    }

    pub fn total(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    pub fn vertices(&self) -> Vec<usize> {
        (0..self.irregular.len()).filter(|&x| self.irregular[x]).collect()
    }
}

pub fn irregular_vertices<T: Real>(graph: &Graph, cache: &DistanceCache<T>, sigma_exp: T) -> Vec<usize> {
    debug_assert_eq!(graph.n(), cache.n());
    Regularity::new(cache, sigma_exp).vertices()
}

/// `2 N^{1 - p(σ - η)}` (zero for `p = ∞`, where every vertex is regular).
pub fn irregular_bound<T: Real>(n: usize, p: &PathExponent<T>, sigma: T, eta: T) -> T {
    match p {
        PathExponent::Infinite => T::zero(),
        PathExponent::Finite(p) => T::of(2) * T::of_usize(n).powf(T::one() - *p * (sigma - eta)),
    }
}

/// Both sides of the long-edge mass implication on one graph.
#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub n: usize,
    pub p: PathExponent<f64>,
    pub k: u32,
    pub eta: f64,
    pub delta: f64,
    pub sigma: f64,
    pub zeta_p_delta: f64,
    pub h_p: f64,
    /// `N^η`.
    pub h_threshold: f64,
    pub hypothesis: bool,
    /// `Σ_{|e| ≥ N^δ} |e|`.
    pub long_edge_mass: f64,
    /// `kN - N^{1-ζ_{p,δ}(η)} (ln N)^{6k}`.
    pub mass_threshold: f64,
    pub conclusion: bool,
}

impl MassReport {
    pub fn implication_holds(&self) -> bool {
        !self.hypothesis || self.conclusion
    }
}

/// Sum of lengths of edges with `|e| ≥ N^δ`.
pub fn long_edge_mass<T: Real>(graph: &Graph, delta: T) -> T {
    let min_len = T::of_usize(graph.n()).powf(delta);
    graph.long_edges().filter(|e| T::of_usize(e.len()) >= min_len).map(|e| T::of_usize(e.len())).sum()
}

pub fn certify_long_edge_mass<T: Real>(
    graph: &Graph,
    cache: &DistanceCache<T>,
    p: PathExponent<T>,
    k: u32,
    eta: T,
    delta: T,
) -> Result<MassReport, CertifyError> {
    let params = CertParams::new(p, k, eta, delta)?;
    let n = T::of_usize(graph.n());
    let h_p = avg_path_length(cache, p);
    let h_threshold = n.powf(eta);
    let zeta = zeta_p_delta(&p, k, eta, delta);
    let mass = long_edge_mass(graph, delta);
    let kk = T::of(i64::from(k));
    let mass_threshold = kk * n - n.powf(T::one() - zeta) * n.ln().powi(6 * k as i32);
    Ok(MassReport {
        n: graph.n(),
        p: p.to_f64(),
        k,
        eta: eta.to_f64_lossy(),
        delta: delta.to_f64_lossy(),
        sigma: params.sigma.to_f64_lossy(),
        zeta_p_delta: zeta.to_f64_lossy(),
        h_p: h_p.to_f64_lossy(),
        h_threshold: h_threshold.to_f64_lossy(),
        hypothesis: h_p <= h_threshold,
        long_edge_mass: mass.to_f64_lossy(),
        mass_threshold: mass_threshold.to_f64_lossy(),
        conclusion: mass >= mass_threshold,
    })
}
