//! σ-cutpoints, reach, local cutpoints and the lower bounds on path length
//! they imply.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::distance::DistanceCache;
use crate::graph::Graph;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CutpointError {
    #[error("sigma must be at least 1")]
    ZeroSigma,
    #[error("need 0 < T1 < T2 <= T, got T1 = {t1}, T2 = {t2}, T = {t}")]
    IndexRange { t1: usize, t2: usize, t: usize },
    #[error("interval [{a}, {b}] must satisfy a < b <= N-1 = {max}")]
    BadInterval { a: usize, b: usize, max: usize },
    #[error("intervals [{0}, {1}] and [{2}, {3}] overlap")]
    Overlap(usize, usize, usize, usize),
}

/// `true` iff no edge `{e⁻, e⁺}` has `e⁻ < x` and `e⁺ ≥ x + σ`.
///
/// Ground edges never qualify for `σ ≥ 1`, so only long edges are scanned.
pub fn is_sigma_cutpoint(graph: &Graph, x: usize, sigma: usize) -> bool {
    !graph.long_edges().any(|e| e.lo() < x && e.hi() >= x + sigma)
}

/// Windowed reach `R(x) = max(0, max{e⁺ - x : e⁻ < x ≤ e⁺})` for every
/// vertex, in `O(N + M)` via a prefix maximum of right endpoints.
#[derive(Debug, Clone)]
pub struct ReachTable {
    reach: Vec<usize>,
}

impl ReachTable {
    pub fn new(graph: &Graph) -> Self {
        let n = graph.n();
        // right[x] = largest e⁺ over edges with e⁻ = x (ground edge included)
        let mut right: Vec<usize> = (0..n).map(|x| (x + 1).min(n - 1)).collect();
        for e in graph.long_edges() {
            right[e.lo()] = right[e.lo()].max(e.hi());
        }
        let mut reach = vec![0; n];
        let mut best = 0;
        for x in 1..n {
            best = best.max(right[x - 1]);
            reach[x] = best.saturating_sub(x);
        }
        Self { reach }
    }

    pub fn get(&self, x: usize) -> usize {
        self.reach[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.reach
    }
}

pub fn reach(graph: &Graph, x: usize) -> usize {
    graph
        .long_edges()
        .filter(|e| e.lo() < x && x <= e.hi())
        .map(|e| e.hi() - x)
        .max()
        .unwrap_or(0)
}

/// The recursion `X_0 = 0`, `X_{i+1}` = least σ-cutpoint `≥ X_i + σ`
/// (or `N` if none). `points` lists `X_1, X_2, …` below `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutpointReport {
    pub n: usize,
    pub sigma: usize,
    pub points: Vec<usize>,
    /// `T = sup{i : X_i < N}`.
    pub t_count: usize,
}

impl CutpointReport {
    /// `X_i` for `1 ≤ i ≤ T`.
    pub fn x(&self, i: usize) -> Option<usize> {
        i.checked_sub(1).and_then(|j| self.points.get(j).copied())
    }
}

pub fn cutpoint_sequence(graph: &Graph, sigma: usize) -> Result<CutpointReport, CutpointError> {
    if sigma == 0 {
        return Err(CutpointError::ZeroSigma);
    }
    let n = graph.n();
    let reach = ReachTable::new(graph);
    let mut points = Vec::new();
    let mut next = sigma;
    let mut x = next;
    while x < n {
        if reach.get(x) < sigma {
            points.push(x);
            next = x + sigma;
            x = next;
        } else {
            x += 1;
        }
    }
    Ok(CutpointReport { n, sigma, t_count: points.len(), points })
}

/// Number of vertices that are σ-cutpoints (without the spacing rule).
pub fn count_sigma_cutpoints(graph: &Graph, sigma: usize) -> usize {
    let reach = ReachTable::new(graph);
    (1..graph.n()).filter(|&x| reach.get(x) < sigma).count()
}

/// `2 X_{T1} (N - X_{T2}) (T2 - T1) / N²`, a lower bound on `H_1`.
pub fn h1_lower_bound_cutpoints(report: &CutpointReport, t1: usize, t2: usize) -> Result<f64, CutpointError> {
    let t = report.t_count;
    if !(0 < t1 && t1 < t2 && t2 <= t) {
        return Err(CutpointError::IndexRange { t1, t2, t });
    }
    let (x1, x2) = (report.points[t1 - 1] as f64, report.points[t2 - 1] as f64);
    let n = report.n as f64;
    Ok(2.0 * x1 * (n - x2) * (t2 - t1) as f64 / (n * n))
}

/// Best bound over `T1, T2` on the decile grid of `1..=T`.
pub fn best_h1_lower_bound(report: &CutpointReport) -> Option<(f64, usize, usize)> {
    let t = report.t_count;
    let mut grid: Vec<usize> = (0..=10).map(|i| (i * t).div_ceil(10).max(1)).collect();
    grid.dedup();
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, &t1) in grid.iter().enumerate() {
        for &t2 in &grid[i + 1..] {
            if let Ok(v) = h1_lower_bound_cutpoints(report, t1, t2) {
                if best.map_or(true, |(b, _, _)| v > b) {
                    best = Some((v, t1, t2));
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalCutpointReport {
    pub interval: (usize, usize),
    pub points: Vec<usize>,
}

impl LocalCutpointReport {
    pub fn t_count(&self) -> usize {
        self.points.len()
    }
}

fn check_interval(graph: &Graph, (a, b): (usize, usize)) -> Result<(), CutpointError> {
    if a < b && b < graph.n() {
        Ok(())
    } else {
        Err(CutpointError::BadInterval { a, b, max: graph.n() - 1 })
    }
}

/// Local cutpoint predicate for a single vertex.
pub fn is_local_cutpoint(graph: &Graph, (a, b): (usize, usize), x: usize) -> bool {
    let inside = |v: usize| a <= v && v <= b;
    (a..=b).contains(&x)
        && !graph.long_edges().any(|e| e.lo() < x && x < e.hi() && (inside(e.lo()) || inside(e.hi())))
}

/// All `x ∈ [a, b]` such that every edge passing strictly above `x` has
/// both endpoints outside `[a, b]`.
///
/// Intervals must have at least two vertices: a single vertex is trivially a
/// local cutpoint of itself, which the `T³/63` bound cannot accommodate.
pub fn local_cutpoints(graph: &Graph, interval: (usize, usize)) -> Result<LocalCutpointReport, CutpointError> {
    check_interval(graph, interval)?;
    let (a, b) = interval;
    // cover[x - a] counts edges with an endpoint in I passing over x
    let mut diff = vec![0i64; b - a + 2];
    let inside = |v: usize| a <= v && v <= b;
    for e in graph.long_edges() {
        if !(inside(e.lo()) || inside(e.hi())) {
            continue;
        }
        let lo = (e.lo() + 1).max(a);
        let hi = (e.hi() - 1).min(b);
        if lo <= hi {
            diff[lo - a] += 1;
            diff[hi - a + 1] -= 1;
        }
    }
    let mut points = Vec::new();
    let mut cover = 0;
    for x in a..=b {
        cover += diff[x - a];
        if cover == 0 {
            points.push(x);
        }
    }
    Ok(LocalCutpointReport { interval, points })
}

/// `T³ / 63`.
pub fn h1_lower_bound_local(t_count: usize) -> f64 {
    (t_count as f64).powi(3) / 63.0
}

/// `Σ_{x∈I, y∈I′} d(x, y)` over ordered pairs.
pub fn interval_distance_sum<T: Real>(cache: &DistanceCache<T>, i: (usize, usize), j: (usize, usize)) -> u64 {
    (i.0..=i.1)
        .map(|x| {
            let row = cache.row(x);
            row[j.0..=j.1].iter().map(|&d| u64::from(d)).sum::<u64>()
        })
        .sum()
}

/// Pair form of the local bound: `min(T_I, T_I′)³ / 63` for disjoint
/// intervals.
pub fn h1_lower_bound_local_pair(
    graph: &Graph,
    i: (usize, usize),
    j: (usize, usize),
) -> Result<f64, CutpointError> {
    if i.1 >= j.0 && j.1 >= i.0 {
        return Err(CutpointError::Overlap(i.0, i.1, j.0, j.1));
    }
    let ti = local_cutpoints(graph, i)?.t_count();
    let tj = local_cutpoints(graph, j)?.t_count();
    Ok(h1_lower_bound_local(ti.min(tj)))
}

/// Vertices incident to a long edge of length at least `threshold`.
pub fn endpoints_of_long_edges(graph: &Graph, threshold: usize) -> BTreeSet<usize> {
    graph
        .long_edges()
        .filter(|e| e.len() >= threshold)
        .flat_map(|e| [e.lo(), e.hi()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::apsp;
    use crate::scalar::PathExponent;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::with_edges(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn sigma_cutpoint_examples() {
        let h = g(6, &[(1, 4)]);
        assert!(!is_sigma_cutpoint(&h, 2, 1));
        assert!(is_sigma_cutpoint(&h, 5, 1));
        let ground = Graph::new(8).unwrap();
        assert!((1..8).all(|x| is_sigma_cutpoint(&ground, x, 1)));
    }

    #[test]
    fn sequences() {
        let ground = Graph::new(7).unwrap();
        let r = cutpoint_sequence(&ground, 1).unwrap();
        assert_eq!((r.points.clone(), r.t_count), ((1..7).collect(), 6));

        // 2 and 3 are passed by {1,4}; 1, 4 and 5 are not
        let r = cutpoint_sequence(&g(6, &[(1, 4)]), 1).unwrap();
        assert_eq!(r.points, vec![1, 4, 5]);

        // in K_4 only x = 3 survives: nothing reaches past N-1
        let k4 = g(4, &[(0, 2), (0, 3), (1, 3)]);
        assert_eq!(cutpoint_sequence(&k4, 1).unwrap().points, vec![3]);

        let r = cutpoint_sequence(&Graph::new(10).unwrap(), 3).unwrap();
        assert_eq!(r.points, vec![3, 6, 9]);
        assert!(cutpoint_sequence(&ground, 0).is_err());
    }

    #[test]
    fn lower_bound_arithmetic() {
        let r = CutpointReport { n: 10, sigma: 1, points: vec![1, 3, 5, 7], t_count: 4 };
        assert!((h1_lower_bound_cutpoints(&r, 2, 4).unwrap() - 0.36).abs() < 1e-15);
        assert!(h1_lower_bound_cutpoints(&r, 2, 2).is_err());
        assert!(h1_lower_bound_cutpoints(&r, 0, 2).is_err());
        assert!(h1_lower_bound_cutpoints(&r, 2, 5).is_err());
    }

    #[test]
    fn ground_bound_below_h1() {
        let ground = Graph::new(100).unwrap();
        let r = cutpoint_sequence(&ground, 1).unwrap();
        let h1 = apsp::<f64>(&ground, PathExponent::Finite(1.0)).h_p();
        assert!(h1_lower_bound_cutpoints(&r, 25, 75).unwrap() <= h1);
        assert!(best_h1_lower_bound(&r).unwrap().0 <= h1);
    }

    #[test]
    fn reach_examples() {
        let ground = Graph::new(6).unwrap();
        assert!((0..6).all(|x| reach(&ground, x) == 0));
        let h = g(6, &[(1, 4)]);
        assert_eq!(reach(&h, 2), 2);
        let table = ReachTable::new(&h);
        assert_eq!(table.as_slice(), &[0, 0, 2, 1, 0, 0]);
    }

    #[test]
    fn local_examples() {
        let ground = Graph::new(8).unwrap();
        assert_eq!(local_cutpoints(&ground, (2, 5)).unwrap().points, vec![2, 3, 4, 5]);

        let h = g(10, &[(3, 7)]);
        let r = local_cutpoints(&h, (2, 8)).unwrap();
        assert!(!r.points.contains(&5));
        assert_eq!(r.points, vec![2, 3, 7, 8]);

        let h = g(10, &[(0, 9)]);
        assert_eq!(local_cutpoints(&h, (3, 6)).unwrap().points, vec![3, 4, 5, 6]);

        assert!(local_cutpoints(&h, (4, 4)).is_err());
        assert!(local_cutpoints(&h, (4, 10)).is_err());

        for x in 0..10 {
            assert_eq!(is_local_cutpoint(&g(10, &[(3, 7)]), (2, 8), x), [2, 3, 7, 8].contains(&x));
        }
    }

    #[test]
    fn local_bound() {
        assert_eq!(h1_lower_bound_local(0), 0.0);
        assert_eq!(h1_lower_bound_local(63), 3969.0);
        let ground = Graph::new(64).unwrap();
        let cache = apsp::<f64>(&ground, PathExponent::Finite(1.0));
        let t = local_cutpoints(&ground, (0, 63)).unwrap().t_count();
        assert!(h1_lower_bound_local(t) <= interval_distance_sum(&cache, (0, 63), (0, 63)) as f64);
        assert_eq!(interval_distance_sum(&cache, (0, 63), (0, 63)), cache.sum_distances());
        let pair = h1_lower_bound_local_pair(&ground, (0, 20), (40, 63)).unwrap();
        assert!(pair <= interval_distance_sum(&cache, (0, 20), (40, 63)) as f64);
        assert!(h1_lower_bound_local_pair(&ground, (0, 20), (20, 63)).is_err());
    }

    #[test]
    fn endpoint_sets() {
        assert!(endpoints_of_long_edges(&Graph::new(6).unwrap(), 2).is_empty());
        let h = g(6, &[(0, 4), (2, 5)]);
        assert_eq!(endpoints_of_long_edges(&h, 4).into_iter().collect::<Vec<_>>(), vec![0, 4]);
        assert_eq!(endpoints_of_long_edges(&h, 3).into_iter().collect::<Vec<_>>(), vec![0, 2, 4, 5]);
    }
}
