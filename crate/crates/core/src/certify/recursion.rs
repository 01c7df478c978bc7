use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use super::{coverage_counts, irregular_bound, long_edge_mass, Audit, CertParams, CertifyError, Regularity};
use crate::distance::{avg_path_length, DistanceCache};
use crate::graph::{Edge, Graph};
use crate::scalar::Real;

/// Integer interval `{a, …, b}`.
pub type Interval = (usize, usize);

fn size(i: Interval) -> usize {
    i.1 - i.0 + 1
}

fn scope(level: &str, i: Interval) -> String {
    format!("{level} [{}, {}]", i.0, i.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level1Branch {
    Decomposed,
    IrregularHeavy,
}

#[derive(Debug, Clone, Serialize)]
pub struct Level1Result {
    pub interval: Interval,
    pub branch: Level1Branch,
    /// The interval was small enough to take `I′ = I` without a path.
    pub shortcut: bool,
    pub phi: Vec<Edge>,
    pub i_prime: Option<Interval>,
    pub i_doubleprime: Option<Interval>,
    /// Escape path from a regular vertex of the middle third.
    pub path: Vec<usize>,
    pub exit_left: Option<bool>,
    pub irregular_in_interval: usize,
    pub audit: Audit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level2Branch {
    SmallRemainder,
    IrregularHeavy,
}

#[derive(Debug, Clone, Serialize)]
pub struct Level2Result {
    pub interval: Interval,
    pub branch: Level2Branch,
    pub gamma_set: Vec<Edge>,
    /// Left endpoints `a` of the ground edges `{a, a+1}` in `Ẽ_I`.
    pub uncovered: Vec<usize>,
    pub iterations: usize,
    pub irregular_in_interior: usize,
    pub audit: Audit,
}

#[derive(Debug, Clone, Serialize)]
pub struct Layer {
    pub j: u32,
    pub edges: Vec<Edge>,
    /// `3 N^{σj} (ln N)^{3j}`.
    pub size_bound: f64,
    /// Ground edges with `ψ(e, Λ_j) ≥ j`.
    pub covered: usize,
    /// `N - (ln N)^{5j} N^{σj+δ} - 10 j · #irregular`.
    pub coverage_bound: f64,
    /// Number of level-2 intervals that produced the layer.
    pub intervals: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LayerCertificate {
    pub n: usize,
    pub params: CertParams<f64>,
    pub h_p: f64,
    pub h_threshold: f64,
    pub hypothesis: bool,
    pub irregular_count: usize,
    pub irregular_bound: f64,
    pub splits: [usize; 4],
    pub layers: Vec<Layer>,
    /// `Σ_{|e| ≥ N^δ} |e|`.
    pub long_edge_mass: f64,
    pub audit: Audit,
}

impl LayerCertificate {
    pub fn passed(&self) -> bool {
        self.audit.passed()
    }
}

struct Ctx<'a, T> {
    graph: &'a Graph,
    params: CertParams<T>,
    regular: Regularity,
    n: T,
    ln_n: T,
    /// `N^σ`
    n_sigma: T,
    /// `N^δ`
    n_delta: T,
}

impl<'a, T: Real> Ctx<'a, T> {
    fn new(graph: &'a Graph, cache: &DistanceCache<T>, params: CertParams<T>) -> Self {
        let n = T::of_usize(graph.n());
        Self {
            graph,
            params,
            regular: Regularity::new(cache, params.sigma),
            n,
            ln_n: n.ln(),
            n_sigma: n.powf(params.sigma),
            n_delta: n.powf(params.delta),
        }
    }

    fn f(x: T) -> f64 {
        x.to_f64_lossy()
    }

    fn c(x: usize) -> T {
        T::of_usize(x)
    }

    fn is_long(&self, e: &Edge) -> bool {
        Self::c(e.len()) >= self.n_delta
    }

    fn escape_path(&self, x: usize, (a, b): Interval) -> (Vec<usize>, bool) {
        if x <= a || x >= b {
            return (vec![x], x <= a);
        }
        let mut parent = vec![usize::MAX; b - a + 1];
        parent[x - a] = x;
        let mut queue = vec![x];
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for w in self.graph.neighbors(u) {
                if w <= a || w >= b {
                    let mut path = vec![w, u];
                    let mut v = u;
                    while v != x {
                        v = parent[v - a];
                        path.push(v);
                    }
                    path.reverse();
                    return (path, w <= a);
                }
                if parent[w - a] == usize::MAX {
                    parent[w - a] = u;
                    queue.push(w);
                }
            }
        }
        unreachable!("the ground path always leaves int(I)")
    }

    /// Ground edges `{y, y+1}` of `i` with `ψ(·, edges) = 0`.
    fn uncovered_in(&self, i: Interval, edges: &[Edge]) -> Vec<usize> {
        let (lo, hi) = i;
        if lo >= hi {
            return Vec::new();
        }
        let mut diff = vec![0i64; hi - lo + 1];
        for e in edges {
            let (s, t) = (e.lo().max(lo), e.hi().min(hi));
            if s < t {
                diff[s - lo] += 1;
                diff[t - lo] -= 1;
            }
        }
        let mut acc = 0;
        (lo..hi)
            .filter(|&y| {
                acc += diff[y - lo];
                acc == 0
            })
            .collect()
    }

    fn audit_edges(&self, audit: &mut Audit, sc: &str, edges: &[Edge], interior: Option<Interval>) {
        let short = edges.iter().filter(|e| !self.is_long(e)).count();
        audit.le(sc, "edges shorter than N^delta", short as f64, 0.0);
        let foreign = edges.iter().filter(|e| !self.graph.contains(**e)).count();
        audit.le(sc, "edges not in graph", foreign as f64, 0.0);
        if let Some((a, b)) = interior {
            let inside = |v: usize| a < v && v < b;
            let detached = edges.iter().filter(|e| !(inside(e.lo()) || inside(e.hi()))).count();
            audit.le(sc, "edges not incident to int(I)", detached as f64, 0.0);
        }
    }

    fn level1(&self, i: Interval) -> Result<Level1Result, CertifyError> {
        let (a, b) = i;
        let len = size(i);
        if 4 * len > self.graph.n() {
            return Err(CertifyError::Precondition(format!("level 1 needs |I| <= N/4, got |I| = {len}")));
        }
        let sc = scope("level1", i);
        let irregular = self.regular.count_in(a, b);
        let mut audit = Audit::default();
        let small = self.n.powf(self.params.sigma + self.params.delta);
        if Self::c(len) <= small {
            audit.le(&sc, "|I| <= N^(sigma+delta)", len as f64, Self::f(small));
            return Ok(Level1Result {
                interval: i,
                branch: Level1Branch::Decomposed,
                shortcut: true,
                phi: Vec::new(),
                i_prime: Some(i),
                i_doubleprime: None,
                path: Vec::new(),
                exit_left: None,
                irregular_in_interval: irregular,
                audit,
            });
        }
        let third = Self::c(len) / T::of(3);
        let lo = a + third.ceil().to_usize().unwrap_or(usize::MAX);
        let hi = a + (third * T::of(2)).floor().to_usize().unwrap_or(0);
        let Some(x) = (lo..=hi.min(b)).find(|&x| !self.regular.is_irregular(x)) else {
            audit.ge(&sc, "irregular in I >= |I|/4", irregular as f64, len as f64 / 4.0);
            return Ok(Level1Result {
                interval: i,
                branch: Level1Branch::IrregularHeavy,
                shortcut: false,
                phi: Vec::new(),
                i_prime: None,
                i_doubleprime: None,
                path: Vec::new(),
                exit_left: None,
                irregular_in_interval: irregular,
                audit,
            });
        };
        let (path, left) = self.escape_path(x, i);
        let mut phi: Vec<Edge> =
            path.windows(2).map(|w| Edge::new(w[0], w[1])).filter(|e| self.is_long(e)).collect();
        phi.sort();
        phi.dedup();
        let (i_prime, i_doubleprime) = if left {
            let c = a + len / 3;
            ((a, c), (c, b))
        } else {
            let c = a + (2 * len).div_ceil(3);
            ((c, b), (a, c))
        };
        audit.le(&sc, "escape path length <= N^sigma", (path.len() - 1) as f64, Self::f(self.n_sigma));
        audit.le(&sc, "|Phi| <= N^sigma", phi.len() as f64, Self::f(self.n_sigma));
        self.audit_edges(&mut audit, &sc, &phi, Some(i));
        audit.le(&sc, "|I''| <= 3|I|/4", size(i_doubleprime) as f64, 0.75 * len as f64);
        let uncovered = self.uncovered_in(i_prime, &phi).len();
        audit.le(&sc, "uncovered in I' <= 2 N^(sigma+delta)", uncovered as f64, 2.0 * Self::f(small));
        Ok(Level1Result {
            interval: i,
            branch: Level1Branch::Decomposed,
            shortcut: false,
            phi,
            i_prime: Some(i_prime),
            i_doubleprime: Some(i_doubleprime),
            path,
            exit_left: Some(left),
            irregular_in_interval: irregular,
            audit,
        })
    }

    fn level2(&self, i: Interval) -> Result<Level2Result, CertifyError> {
        let (a, b) = i;
        if 4 * size(i) >= self.graph.n() {
            return Err(CertifyError::Precondition(format!("level 2 needs |I| < N/4, got |I| = {}", size(i))));
        }
        let sc = scope("level2", i);
        let p = &self.params;
        let stop_size = self.n.powf(p.sigma + p.delta) * self.ln_n.powi(3);
        let max_iter = self.ln_n.powi(2);
        let mut audit = Audit::default();
        let mut current = i;
        let mut gamma: BTreeSet<Edge> = BTreeSet::new();
        let mut uncovered: BTreeSet<usize> = BTreeSet::new();
        let mut iterations = 0;
        let mut heavy = false;
        loop {
            let len = size(current);
            if Self::c(len) <= stop_size {
                break;
            }
            let irr = self.regular.count_in(current.0 + 1, current.1.saturating_sub(1));
            if irr * 4 >= len {
                heavy = true;
                break;
            }
            if Self::c(iterations) > max_iter {
                break;
            }
            let step = self.level1(current)?;
            audit.extend(&step.audit);
            match (step.branch, step.i_prime, step.i_doubleprime) {
                (Level1Branch::Decomposed, Some(ip), Some(ipp)) => {
                    uncovered.extend(self.uncovered_in(ip, &step.phi));
                    gamma.extend(step.phi);
                    current = ipp;
                    iterations += 1;
                }
                _ => {
                    heavy = true;
                    break;
                }
            }
        }
        uncovered.extend(current.0..current.1);
        let gamma_set: Vec<Edge> = gamma.into_iter().collect();
        let uncovered: Vec<usize> = uncovered.into_iter().collect();
        let irregular = self.regular.count_in(a + 1, b.saturating_sub(1));

        audit.le(&sc, "iterations <= (ln N)^2", iterations as f64, Self::f(max_iter));
        audit.le(&sc, "|Gamma| <= N^sigma (ln N)^2", gamma_set.len() as f64, Self::f(self.n_sigma * max_iter));
        self.audit_edges(&mut audit, &sc, &gamma_set, Some(i));
        let cover = self.uncovered_in(i, &gamma_set);
        let missed = cover.iter().filter(|y| uncovered.binary_search(y).is_err()).count();
        audit.le(&sc, "psi(e, Gamma) = 0 outside E~", missed as f64, 0.0);
        let small_bound = self.n.powf(p.sigma + p.delta) * self.ln_n.powi(4);
        let e_tilde = uncovered.len();
        audit.any(
            &sc,
            "|E~| <= N^(sigma+delta) (ln N)^4 or irregular in int(I) >= |E~|/5",
            Self::c(e_tilde) <= small_bound,
            5 * irregular >= e_tilde,
        );
        Ok(Level2Result {
            interval: i,
            branch: if heavy { Level2Branch::IrregularHeavy } else { Level2Branch::SmallRemainder },
            gamma_set,
            uncovered,
            iterations,
            irregular_in_interior: irregular,
            audit,
        })
    }
}

/// Level 1: a short escape path from the middle third of `interval` and the
/// induced split `I = I′ ∪ I″`, or the irregular-heavy alternative.
pub fn level1_decompose<T: Real>(
    graph: &Graph,
    cache: &DistanceCache<T>,
    interval: Interval,
    params: &CertParams<T>,
) -> Result<Level1Result, CertifyError> {
    check_interval(graph, interval)?;
    Ctx::new(graph, cache, *params).level1(interval)
}

/// Level 2: Level 1 iterated on `I_0 ⊃ I_1 ⊃ …` with `I_{i+1} = I_i″`.
pub fn level2_decompose<T: Real>(
    graph: &Graph,
    cache: &DistanceCache<T>,
    interval: Interval,
    params: &CertParams<T>,
) -> Result<Level2Result, CertifyError> {
    check_interval(graph, interval)?;
    Ctx::new(graph, cache, *params).level2(interval)
}

fn check_interval(graph: &Graph, (a, b): Interval) -> Result<(), CertifyError> {
    if a <= b && b < graph.n() {
        Ok(())
    } else {
        Err(CertifyError::Precondition(format!("[{a}, {b}] is not an interval of V_N")))
    }
}

/// Level 3: nested layers `Λ_1 ⊆ … ⊆ Λ_k`.
///
/// The certificate is returned whenever the recursion completes. An audit
/// failure is an error only when `H_p ≤ N^η` holds, since only then do the
/// inequalities have to hold.
pub fn level3_layers<T: Real>(
    graph: &Graph,
    cache: &DistanceCache<T>,
    params: &CertParams<T>,
) -> Result<LayerCertificate, CertifyError> {
    let n = graph.n();
    let splits: [usize; 4] = [1, 2, 3, 4].map(|i| (i * n).div_ceil(5));
    let bounds = [0, splits[0], splits[1], splits[2], splits[3], n - 1];
    let ks: Vec<Interval> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
    if ks.iter().any(|&k| 4 * size(k) >= n) {
        return Err(CertifyError::Precondition(format!("N = {n} too small for a 5-way split into parts < N/4")));
    }
    let ctx = Ctx::new(graph, cache, *params);
    let h_p = avg_path_length(cache, params.p);
    let h_threshold = ctx.n.powf(params.eta);
    let irregular = ctx.regular.total();
    let mut audit = Audit::default();

    let first: Vec<Level2Result> = ks.par_iter().map(|&k| ctx.level2(k)).collect::<Result<_, _>>()?;
    let mut lambda: BTreeSet<Edge> = BTreeSet::new();
    for r in &first {
        audit.extend(&r.audit);
        lambda.extend(r.gamma_set.iter().copied());
    }
    let mut layers = Vec::new();
    let mut previous: Option<BTreeSet<Edge>> = None;
    let mut intervals = ks.len();
    for j in 1..=params.k {
        if j > 1 {
            let cover = coverage_counts(n, &lambda);
            let mut z: BTreeSet<usize> = bounds.iter().copied().collect();
            z.extend(lambda.iter().flat_map(|e| [e.lo(), e.hi()]));
            let z: Vec<usize> = z.into_iter().collect();
            let js: Vec<Interval> = z
                .windows(2)
                .map(|w| (w[0], w[1]))
                .filter(|&(lo, _)| cover[lo] >= j - 1)
                .collect();
            let results: Vec<Level2Result> = js.par_iter().map(|&iv| ctx.level2(iv)).collect::<Result<_, _>>()?;
            let before = lambda.clone();
            let sc = format!("level3 j={j}");
            let mut overlap = 0;
            for r in &results {
                audit.extend(&r.audit);
                overlap += r.gamma_set.iter().filter(|e| before.contains(e)).count();
                lambda.extend(r.gamma_set.iter().copied());
            }
            audit.le(&sc, "Gamma_J meets Lambda_(j-1)", overlap as f64, 0.0);
            intervals = js.len();
        }
        let sc = format!("level3 j={j}");
        if let Some(prev) = &previous {
            let lost = prev.iter().filter(|e| !lambda.contains(e)).count();
            audit.le(&sc, "Lambda_(j-1) not contained in Lambda_j", lost as f64, 0.0);
        }
        let edges: Vec<Edge> = lambda.iter().copied().collect();
        let jj = T::of(i64::from(j));
        let size_bound = T::of(3) * ctx.n.powf(params.sigma * jj) * ctx.ln_n.powf(T::of(3) * jj);
        audit.le(&sc, "|Lambda_j| <= 3 N^(sigma j) (ln N)^(3j)", edges.len() as f64, Ctx::<T>::f(size_bound));
        ctx.audit_edges(&mut audit, &sc, &edges, None);
        let covered = coverage_counts(n, &edges).iter().filter(|&&c| c >= j).count();
        let coverage_bound = ctx.n
            - ctx.ln_n.powf(T::of(5) * jj) * ctx.n.powf(params.sigma * jj + params.delta)
            - T::of(10) * jj * T::of_usize(irregular);
        audit.ge(
            &sc,
            "#{psi(e, Lambda_j) >= j} >= N - (ln N)^(5j) N^(sigma j + delta) - 10 j #irregular",
            covered as f64,
            Ctx::<T>::f(coverage_bound),
        );
        layers.push(Layer {
            j,
            edges,
            size_bound: Ctx::<T>::f(size_bound),
            covered,
            coverage_bound: Ctx::<T>::f(coverage_bound),
            intervals,
        });
        previous = Some(lambda.clone());
    }

    let hypothesis = h_p <= h_threshold;
    if hypothesis {
        let bound = irregular_bound(n, &params.p, params.sigma, params.eta);
        let scope = "irregular vertices";
        audit.le(scope, "#irregular <= 2 N^(1 - p (sigma - eta))", irregular as f64, Ctx::<T>::f(bound));
    }
    let certificate = LayerCertificate {
        n,
        params: CertParams {
            p: params.p.to_f64(),
            k: params.k,
            eta: params.eta.to_f64_lossy(),
            delta: params.delta.to_f64_lossy(),
            sigma: params.sigma.to_f64_lossy(),
        },
        h_p: h_p.to_f64_lossy(),
        h_threshold: h_threshold.to_f64_lossy(),
        hypothesis,
        irregular_count: irregular,
        irregular_bound: irregular_bound(n, &params.p, params.sigma, params.eta).to_f64_lossy(),
        splits,
        layers,
        long_edge_mass: long_edge_mass(graph, params.delta).to_f64_lossy(),
        audit,
    };
    if hypothesis && !certificate.passed() {
        let failed = certificate.audit.failures().count();
        return Err(CertifyError::AuditFailed { failed, certificate: Box::new(certificate) });
    }
    Ok(certificate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::PathExponent;
    use crate::constructions::critical_construction;
    use crate::distance::apsp;

    fn params(k: u32, eta: f64, delta: f64) -> CertParams<f64> {
        CertParams::new(PathExponent::Finite(1.0), k, eta, delta).unwrap()
    }

    #[test]
    fn small_interval_shortcut() {
        let g = Graph::new(400).unwrap();
        let cache = apsp::<f64>(&g, PathExponent::Finite(1.0));
        let r = level1_decompose(&g, &cache, (10, 20), &params(1, 0.75, 0.05)).unwrap();
        assert!(r.shortcut);
        assert_eq!((r.i_prime, r.i_doubleprime), (Some((10, 20)), None));
        assert!(r.phi.is_empty());
        assert!(r.audit.passed());
        assert!(level1_decompose(&g, &cache, (0, 150), &params(1, 0.75, 0.05)).is_err());
    }

    #[test]
    fn ground_graph_is_irregular_heavy() {
        let g = Graph::new(2000).unwrap();
        let cache = apsp::<f64>(&g, PathExponent::Finite(1.0));
        // N^σ ≈ 7.2, far fewer steps than the 500 needed to reach N/4
        let p = CertParams::with_sigma(PathExponent::Finite(1.0), 3, 0.26, 0.04, 0.26).unwrap();
        let r = level1_decompose(&g, &cache, (100, 400), &p).unwrap();
        assert_eq!(r.branch, Level1Branch::IrregularHeavy);
        assert!(r.audit.passed());
        let r = level2_decompose(&g, &cache, (100, 400), &p).unwrap();
        assert_eq!(r.uncovered, (100..400).collect::<Vec<_>>());
        assert!(r.gamma_set.is_empty());
    }

    #[test]
    fn tiny_level2() {
        let g = Graph::new(100).unwrap();
        let cache = apsp::<f64>(&g, PathExponent::Finite(1.0));
        let r = level2_decompose(&g, &cache, (3, 9), &params(1, 0.75, 0.05)).unwrap();
        assert_eq!(r.branch, Level2Branch::SmallRemainder);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.uncovered, (3..9).collect::<Vec<_>>());
    }

    #[test]
    fn decomposition_on_layered_graph() {
        let c = critical_construction(4096, 3).unwrap();
        let cache = apsp::<f64>(&c.graph, PathExponent::Infinite);
        let p = CertParams::with_sigma(PathExponent::Infinite, 2, 0.4, 0.05, 0.4).unwrap();
        let r = level1_decompose(&c.graph, &cache, (1536, 2559), &p).unwrap();
        assert_eq!(r.branch, Level1Branch::Decomposed);
        assert!(!r.shortcut);
        assert!(r.audit.passed(), "{:?}", r.audit.failures().collect::<Vec<_>>());
        assert!(!r.phi.is_empty());
    }

    #[test]
    fn level3_runs_on_ground_graph() {
        let g = Graph::new(500).unwrap();
        let cache = apsp::<f64>(&g, PathExponent::Finite(1.0));
        let cert = level3_layers(&g, &cache, &params(1, 0.75, 0.05)).unwrap();
        assert!(!cert.hypothesis);
        assert_eq!(cert.layers.len(), 1);
        assert!(cert.layers[0].coverage_bound < 0.0);
        let tiny = Graph::new(20).unwrap();
        let tiny_cache = apsp::<f64>(&tiny, PathExponent::Infinite);
        assert!(level3_layers(&tiny, &tiny_cache, &params(1, 0.75, 0.05)).is_err());
    }
}
