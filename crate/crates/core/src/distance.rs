//! Exact all-pairs graph distances with maintained `Σ d^p` and diameter.
//!
//! The cache keeps the full `N×N` matrix together with a histogram of
//! ordered-pair distances; `Σ d^p` and the diameter are read off the
//! histogram, so they are always consistent with the matrix. Edge insertions
//! are applied in `O(N²)`; deletions recompute from scratch.

use crate::graph::{Edge, Graph, GraphError};
use crate::scalar::{CompensatedSum, PathExponent, Real};

const WITNESS_LIMIT: usize = 64;

#[derive(Clone, Debug)]
pub struct DistanceCache<T> {
    n: usize,
    dist: Vec<u32>,
    /// `hist[d]` = number of ordered pairs `(x, y)` with `d_g(x, y) = d`.
    hist: Vec<u64>,
    row_max: Vec<u32>,
    p: PathExponent<T>,
    pow: Vec<T>,
    sum_pow_p: T,
    diameter: u32,
    /// Some unordered pairs realizing the diameter.
    witnesses: Vec<(u32, u32)>,
}

/// A tentative update of a cache, evaluated but not yet committed.
#[derive(Clone, Debug)]
pub struct Trial<T> {
    rows: Vec<u32>,
    row_ids: Vec<usize>,
    row_max: Vec<u32>,
    full: bool,
    hist: Vec<u64>,
    sum_pow_p: T,
    diameter: u32,
}

impl<T: Real> Default for Trial<T> {
    fn default() -> Self {
        Self {
            rows: Vec::new(),
            row_ids: Vec::new(),
            row_max: Vec::new(),
            full: false,
            hist: Vec::new(),
            sum_pow_p: T::zero(),
            diameter: 0,
        }
    }
}

impl<T: Real> Trial<T> {
    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    pub fn sum_pow_p(&self) -> T {
        self.sum_pow_p
    }

    /// Number of matrix rows the update touches.
    pub fn changed_rows(&self) -> usize {
        self.row_ids.len()
    }
}

fn power_table<T: Real>(n: usize, p: &PathExponent<T>) -> Vec<T> {
    match p {
        PathExponent::Finite(p) => (0..=n).map(|d| T::of_usize(d).powf(*p)).collect(),
        PathExponent::Infinite => Vec::new(),
    }
}

fn sum_from_hist<T: Real>(hist: &[u64], pow: &[T]) -> T {
    if pow.is_empty() {
        return T::zero();
    }
    let acc: CompensatedSum<T> = hist
        .iter()
        .zip(pow)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &w)| T::from_u64(c).unwrap_or_else(T::nan) * w)
        .collect();
    acc.value()
}

fn top_of(hist: &[u64], start: usize) -> u32 {
    (0..=start.min(hist.len().saturating_sub(1)))
        .rev()
        .find(|&d| hist[d] > 0)
        .unwrap_or(0) as u32
}

/// `(N^{-2} Σ d^p)^{1/p}` from a distance histogram, or the diameter for
/// `p = ∞`.
pub fn h_from_hist<T: Real>(hist: &[u64], n: usize, p: &PathExponent<T>) -> T {
    match p {
        PathExponent::Infinite => T::of_usize(top_of(hist, hist.len()) as usize),
        PathExponent::Finite(q) => {
            let pow = power_table(hist.len().saturating_sub(1), p);
            let mean = sum_from_hist(hist, &pow) / T::of_usize(n * n);
            root(mean, *q)
        }
    }
}

fn root<T: Real>(mean: T, q: T) -> T {
    if q == T::one() {
        mean
    } else {
        mean.powf(q.recip())
    }
}

impl<T: Real> DistanceCache<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> PathExponent<T> {
        self.p
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    /// `Σ_{x,y} d(x,y)^p` over ordered pairs (zero for `p = ∞`).
    pub fn sum_pow_p(&self) -> T {
        self.sum_pow_p
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    pub fn histogram(&self) -> &[u64] {
        &self.hist
    }

    /// `Σ_{x,y} d(x,y)` over ordered pairs, exact.
    pub fn sum_distances(&self) -> u64 {
        self.hist.iter().enumerate().map(|(d, &c)| d as u64 * c).sum()
    }

    /// `H_p` for the exponent the cache was built with.
    pub fn h_p(&self) -> T {
        self.h_for_total(self.sum_pow_p, self.diameter)
    }

    fn h_for_total(&self, sum_pow_p: T, diameter: u32) -> T {
        match self.p {
            PathExponent::Infinite => T::of_usize(diameter as usize),
            PathExponent::Finite(q) => root(sum_pow_p / T::of_usize(self.n * self.n), q),
        }
    }

    /// `H_p` of the graph a trial describes.
    pub fn h_of_trial(&self, trial: &Trial<T>) -> T {
        self.h_for_total(trial.sum_pow_p, trial.diameter)
    }

    /// Lower bound on `H_p` after inserting `e`, in `O(1)`-ish time.
    ///
    /// New distances satisfy `d' ≥ d - (d(u,v) - 1)` pointwise, which bounds
    /// every ℓ^p mean. For the diameter the witness pairs give a sharper bound.
    pub fn h_lower_bound_after_add(&self, e: Edge) -> T {
        let (u, v) = (e.lo(), e.hi());
        let duv = self.get(u, v);
        let generic = self.h_p() - T::of_usize(duv.saturating_sub(1) as usize);
        match self.p {
            PathExponent::Finite(_) => generic,
            PathExponent::Infinite => {
                if self.witnesses.is_empty() {
                    return generic;
                }
                let mut best = 0;
                for &(a, b) in &self.witnesses {
                    let (a, b) = (a as usize, b as usize);
                    let via_uv = self.get(a, u) + 1 + self.get(v, b);
                    let via_vu = self.get(a, v) + 1 + self.get(u, b);
                    best = best.max(self.get(a, b).min(via_uv).min(via_vu));
                    if best == self.diameter {
                        break;
                    }
                }
                T::of_usize(best as usize)
            }
        }
    }

    /// Distances after inserting `e = {u, v}`:
    /// `d'(x,y) = min(d(x,y), d(x,u)+1+d(v,y), d(x,v)+1+d(u,y))`.
    ///
    /// A row `x` can only change when `|d(x,u) - d(x,v)| ≥ 2`; only those
    /// rows are materialized.
    pub fn trial_add(&self, e: Edge, trial: &mut Trial<T>) {
        let n = self.n;
        let (u, v) = (e.lo(), e.hi());
        trial.full = false;
        trial.rows.clear();
        trial.row_ids.clear();
        trial.row_max.clear();
        trial.hist.clear();
        trial.hist.extend_from_slice(&self.hist);
        let du = self.row(u);
        let dv = self.row(v);
        for x in 0..n {
            let (dxu, dxv) = (du[x], dv[x]);
            if dxu.abs_diff(dxv) < 2 {
                continue;
            }
            let (a, b) = (dxu + 1, dxv + 1);
            let old = self.row(x);
            let start = trial.rows.len();
            let mut mx = 0;
            for y in 0..n {
                let d = old[y].min(a + dv[y]).min(b + du[y]);
                mx = mx.max(d);
                trial.rows.push(d);
            }
            for (y, &d) in trial.rows[start..].iter().enumerate() {
                let o = old[y];
                if d != o {
                    trial.hist[o as usize] -= 1;
                    trial.hist[d as usize] += 1;
                }
            }
            trial.row_ids.push(x);
            trial.row_max.push(mx);
        }
        trial.diameter = top_of(&trial.hist, self.diameter as usize);
        trial.sum_pow_p = sum_from_hist(&trial.hist, &self.pow);
    }

    /// `true` iff the diameter after inserting `e` is at least `t`.
    ///
    /// Only rows whose current eccentricity reaches `t` can keep a pair at
    /// distance `≥ t`, and the scan stops at the first such pair, so this is
    /// usually far cheaper than `trial_add`.
    pub fn diameter_after_add_reaches(&self, e: Edge, t: u32) -> bool {
        if t > self.diameter {
            return false;
        }
        let (u, v) = (e.lo(), e.hi());
        let du = self.row(u);
        let dv = self.row(v);
        for &(a, b) in &self.witnesses {
            let (a, b) = (a as usize, b as usize);
            if self.get(a, b).min(du[a] + 1 + dv[b]).min(dv[a] + 1 + du[b]) >= t {
                return true;
            }
        }
        for x in 0..self.n {
            if self.row_max[x] < t {
                continue;
            }
            let (dxu, dxv) = (du[x], dv[x]);
            if dxu.abs_diff(dxv) < 2 {
                return true;
            }
            let (a, b) = (dxu + 1, dxv + 1);
            let old = self.row(x);
            if (0..self.n).any(|y| old[y].min(a + dv[y]).min(b + du[y]) >= t) {
                return true;
            }
        }
        false
    }

    /// Full recomputation for `graph` (used after deletions).
    pub fn trial_recompute(&self, graph: &Graph, trial: &mut Trial<T>) {
        let n = self.n;
        trial.full = true;
        trial.rows.resize(n * n, 0);
        trial.row_ids.clear();
        trial.row_ids.extend(0..n);
        trial.row_max.clear();
        trial.hist.clear();
        trial.hist.resize(n, 0);
        let mut queue = Vec::with_capacity(n);
        for x in 0..n {
            let row = &mut trial.rows[x * n..(x + 1) * n];
            graph.bfs_into(x, row, &mut queue);
            let mut mx = 0;
            for &d in row.iter() {
                trial.hist[d as usize] += 1;
                mx = mx.max(d);
            }
            trial.row_max.push(mx);
        }
        trial.diameter = top_of(&trial.hist, n);
        trial.sum_pow_p = sum_from_hist(&trial.hist, &self.pow);
    }

    /// Make a trial the current state. The trial buffer is left reusable.
    pub fn commit(&mut self, trial: &mut Trial<T>) {
        let n = self.n;
        if trial.full {
            std::mem::swap(&mut self.dist, &mut trial.rows);
            self.row_max.copy_from_slice(&trial.row_max);
        } else {
            for (i, &x) in trial.row_ids.iter().enumerate() {
                self.dist[x * n..(x + 1) * n].copy_from_slice(&trial.rows[i * n..(i + 1) * n]);
                self.row_max[x] = trial.row_max[i];
            }
        }
        std::mem::swap(&mut self.hist, &mut trial.hist);
        self.sum_pow_p = trial.sum_pow_p;
        self.diameter = trial.diameter;
        self.collect_witnesses();
    }

    fn collect_witnesses(&mut self) {
        self.witnesses.clear();
        let n = self.n;
        let d = self.diameter;
        for x in 0..n {
            if self.row_max[x] != d {
                continue;
            }
            if let Some(y) = (x + 1..n).find(|&y| self.get(x, y) == d) {
                self.witnesses.push((x as u32, y as u32));
                if self.witnesses.len() >= WITNESS_LIMIT {
                    break;
                }
            }
        }
    }

    /// Recompute `Σ d^p`, diameter and histogram from the matrix and compare.
    pub fn is_consistent(&self) -> bool {
        let mut hist = vec![0u64; self.n];
        for &d in &self.dist {
            match hist.get_mut(d as usize) {
                Some(c) => *c += 1,
                None => return false,
            }
        }
        let sum = sum_from_hist(&hist, &self.pow);
        let scale = T::one().max(sum.abs());
        hist == self.hist
            && top_of(&hist, self.n) == self.diameter
            && (sum - self.sum_pow_p).abs() <= scale * T::epsilon() * T::of(16)
    }

    /// Symmetric, zero exactly on the diagonal, and `d(x,y) ≤ |x-y|`.
    pub fn satisfies_metric_bounds(&self) -> bool {
        let n = self.n;
        (0..n).all(|x| {
            (0..n).all(|y| {
                let d = self.get(x, y);
                d == self.get(y, x) && ((d == 0) == (x == y)) && d as usize <= x.abs_diff(y)
            })
        })
    }

    /// Same distances and exponent.
    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && self.dist == other.dist && self.hist == other.hist && self.p == other.p
    }
}

/// Exact distances by `N` breadth-first searches.
pub fn apsp<T: Real>(graph: &Graph, p: PathExponent<T>) -> DistanceCache<T> {
    let n = graph.n();
    let pow = power_table(n, &p);
    let mut cache = DistanceCache {
        n,
        dist: vec![0; n * n],
        hist: vec![0; n],
        row_max: vec![0; n],
        p,
        pow,
        sum_pow_p: T::zero(),
        diameter: 0,
        witnesses: Vec::new(),
    };
    let mut trial = Trial::default();
    cache.trial_recompute(graph, &mut trial);
    cache.commit(&mut trial);
    cache
}

/// `H_p`: `(N^{-2} Σ_{x,y ∈ V_N} d^p)^{1/p}` over ordered pairs with the
/// diagonal included; the diameter for `p = ∞`.
pub fn avg_path_length<T: Real>(cache: &DistanceCache<T>, p: PathExponent<T>) -> T {
    if p == cache.p {
        cache.h_p()
    } else {
        h_from_hist(&cache.hist, cache.n, &p)
    }
}

/// Insert `e` into `graph` and update `cache` in `O(N²)`.
pub fn add_edge_incremental<T: Real>(
    cache: &mut DistanceCache<T>,
    graph: &mut Graph,
    e: Edge,
) -> Result<(), GraphError> {
    graph.insert(e)?;
    let mut trial = Trial::default();
    cache.trial_add(e, &mut trial);
    cache.commit(&mut trial);
    Ok(())
}

/// Remove `e` from `graph` and recompute `cache` from scratch.
pub fn remove_edge_recompute<T: Real>(
    cache: &mut DistanceCache<T>,
    graph: &mut Graph,
    e: Edge,
) -> Result<(), GraphError> {
    graph.remove(e)?;
    let mut trial = Trial::default();
    cache.trial_recompute(graph, &mut trial);
    cache.commit(&mut trial);
    Ok(())
}

/// Ordered-pair distance histogram by streaming BFS, without storing the
/// matrix. Suitable for graphs too large for a [`DistanceCache`].
pub fn distance_histogram(graph: &Graph) -> Vec<u64> {
    let n = graph.n();
    let mut hist = vec![0u64; n];
    let mut dist = vec![0u32; n];
    let mut queue = Vec::with_capacity(n);
    for x in 0..n {
        graph.bfs_into(x, &mut dist, &mut queue);
        for &d in &dist {
            hist[d as usize] += 1;
        }
    }
    hist
}

/// Exact diameter by eccentricity bounding.
///
/// Every BFS from `v` with eccentricity `e` gives, for each `w`,
/// `max(d(v,w), e - d(v,w)) ≤ ecc(w) ≤ e + d(v,w)`. Vertices whose upper bound
/// cannot beat the best eccentricity seen are dropped; the loop ends when no
/// vertex is left. Sources alternate between the largest upper bound and the
/// smallest lower bound.
pub fn exact_diameter(graph: &Graph) -> u32 {
    let n = graph.n();
    let mut lo = vec![0u32; n];
    let mut hi = vec![u32::MAX; n];
    let mut alive: Vec<usize> = (0..n).collect();
    let mut dist = vec![0u32; n];
    let mut queue = Vec::with_capacity(n);
    let mut best = 0u32;
    let mut pick_high = true;
    while !alive.is_empty() {
        let pos = if pick_high {
            (0..alive.len()).max_by_key(|&i| (hi[alive[i]], lo[alive[i]])).unwrap()
        } else {
            (0..alive.len()).min_by_key(|&i| (lo[alive[i]], hi[alive[i]])).unwrap()
        };
        pick_high = !pick_high;
        let v = alive.swap_remove(pos);
        graph.bfs_into(v, &mut dist, &mut queue);
        let ecc = dist[*queue.last().expect("bfs visits the source")];
        best = best.max(ecc);
        lo[v] = ecc;
        hi[v] = ecc;
        alive.retain(|&w| {
            let d = dist[w];
            lo[w] = lo[w].max(d).max(ecc.saturating_sub(d));
            hi[w] = hi[w].min(ecc + d);
            best = best.max(lo[w]);
            hi[w] > best && lo[w] < hi[w]
        });
        // `best` may have grown during the pass; prune again
        alive.retain(|&w| hi[w] > best);
    }
    best
}

/// Eccentricity of every vertex by `N` BFS (reference for small graphs).
pub fn eccentricities(graph: &Graph) -> Vec<u32> {
    let n = graph.n();
    let mut dist = vec![0u32; n];
    let mut queue = Vec::with_capacity(n);
    (0..n)
        .map(|x| {
            graph.bfs_into(x, &mut dist, &mut queue);
            dist[*queue.last().unwrap()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P1: PathExponent<f64> = PathExponent::Finite(1.0);
    const INF: PathExponent<f64> = PathExponent::Infinite;

    fn floyd_warshall(g: &Graph) -> Vec<u32> {
        let n = g.n();
        let big = u32::MAX / 4;
        let mut d = vec![big; n * n];
        for x in 0..n {
            d[x * n + x] = 0;
            if x + 1 < n {
                d[x * n + x + 1] = 1;
                d[(x + 1) * n + x] = 1;
            }
        }
        for e in g.long_edges() {
            d[e.lo() * n + e.hi()] = 1;
            d[e.hi() * n + e.lo()] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i * n + k] + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn diameter_threshold_matches_trial() {
        let g = Graph::with_edges(40, [(3, 17), (20, 31), (5, 9)]).unwrap();
        let c = apsp(&g, INF);
        let mut trial = Trial::default();
        for (a, b) in [(0, 39), (10, 30), (2, 4), (17, 35), (0, 20)] {
            let e = Edge::new(a, b);
            c.trial_add(e, &mut trial);
            let d = trial.diameter();
            for t in 0..=c.diameter() + 1 {
                assert_eq!(c.diameter_after_add_reaches(e, t), d >= t, "{e} t={t}");
            }
        }
    }

    #[test]
    fn path_graph_metric() {
        let g = Graph::new(5).unwrap();
        let c = apsp(&g, P1);
        for x in 0..5 {
            for y in 0..5 {
                assert_eq!(c.get(x, y) as usize, x.abs_diff(y));
            }
        }
        assert!(c.satisfies_metric_bounds());
    }

    #[test]
    fn small_shortcut() {
        let g = Graph::new(3).unwrap();
        let c = apsp(&g, INF);
        assert_eq!((c.get(0, 2), c.diameter()), (2, 2));
        let g = Graph::with_edges(3, [(0, 2)]).unwrap();
        let c = apsp(&g, INF);
        assert_eq!((c.get(0, 2), c.diameter()), (1, 1));
    }

    #[test]
    fn dyadic_matches_floyd_warshall() {
        let edges = [(0, 2), (2, 4), (4, 6), (6, 8), (0, 4), (4, 8), (0, 8)];
        let g = Graph::with_edges(9, edges).unwrap();
        let c = apsp(&g, P1);
        assert_eq!(c.dist, floyd_warshall(&g));
    }

    #[test]
    fn average_path_length_examples() {
        let c = apsp(&Graph::new(2).unwrap(), P1);
        assert_eq!(avg_path_length(&c, P1), 0.5);
        let c = apsp(&Graph::new(3).unwrap(), P1);
        // ordered pairs: 4×1 + 2×2 = 8
        assert!((avg_path_length(&c, P1) - 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(avg_path_length(&c, INF), 2.0);
    }

    #[test]
    fn add_edge_examples() {
        let mut g = Graph::new(3).unwrap();
        let mut c = apsp(&g, P1);
        assert_eq!(c.sum_pow_p(), 8.0);
        add_edge_incremental(&mut c, &mut g, Edge::new(0, 2)).unwrap();
        assert_eq!(c.get(0, 2), 1);
        assert_eq!(c.sum_pow_p(), 6.0);
        assert!(c.same_as(&apsp(&g, P1)));
        assert_eq!(
            add_edge_incremental(&mut c, &mut g, Edge::new(0, 2)),
            Err(GraphError::DuplicateEdge(Edge::new(0, 2)))
        );

        let mut g = Graph::new(5).unwrap();
        let mut c = apsp(&g, P1);
        assert_eq!(c.get(1, 4), 3);
        add_edge_incremental(&mut c, &mut g, Edge::new(0, 4)).unwrap();
        assert_eq!(c.get(1, 4), 2);
        assert!(c.same_as(&apsp(&g, P1)));
    }

    #[test]
    fn remove_edge_examples() {
        let mut g = Graph::with_edges(6, [(0, 4)]).unwrap();
        let mut c = apsp(&g, P1);
        remove_edge_recompute(&mut c, &mut g, Edge::new(0, 4)).unwrap();
        assert!(c.same_as(&apsp(&Graph::new(6).unwrap(), P1)));

        let mut g = Graph::with_edges(8, [(0, 4), (2, 6)]).unwrap();
        let mut c = apsp(&g, P1);
        remove_edge_recompute(&mut c, &mut g, Edge::new(2, 6)).unwrap();
        let expected = floyd_warshall(&Graph::with_edges(8, [(0, 4)]).unwrap());
        assert_eq!(c.dist, expected);
        assert!(c.is_consistent());

        assert_eq!(
            remove_edge_recompute(&mut c, &mut g, Edge::new(3, 4)),
            Err(GraphError::NotLong(Edge::new(3, 4)))
        );
        assert_eq!(
            remove_edge_recompute(&mut c, &mut g, Edge::new(1, 5)),
            Err(GraphError::MissingEdge(Edge::new(1, 5)))
        );
    }

    #[test]
    fn add_then_remove_is_identity() {
        let mut g = Graph::with_edges(10, [(1, 5), (3, 9)]).unwrap();
        let mut c = apsp(&g, PathExponent::Finite(2.0));
        let before = c.clone();
        let gb = g.clone();
        add_edge_incremental(&mut c, &mut g, Edge::new(0, 7)).unwrap();
        remove_edge_recompute(&mut c, &mut g, Edge::new(0, 7)).unwrap();
        assert_eq!(g, gb);
        assert!(c.same_as(&before));
        assert_eq!(c.sum_pow_p(), before.sum_pow_p());
    }

    #[test]
    fn histogram_h_matches_cache() {
        let g = Graph::with_edges(12, [(0, 5), (5, 11), (2, 9)]).unwrap();
        let c = apsp(&g, PathExponent::Finite(1.5));
        let hist = distance_histogram(&g);
        assert_eq!(hist, c.histogram());
        let h: f64 = h_from_hist(&hist, 12, &PathExponent::Finite(1.5));
        assert!((h - c.h_p()).abs() < 1e-12);
    }

    #[test]
    fn exact_diameter_agrees_with_eccentricities() {
        let g = Graph::with_edges(40, [(0, 13), (13, 26), (26, 39), (5, 30), (17, 19)]).unwrap();
        let ecc = eccentricities(&g);
        assert_eq!(exact_diameter(&g), *ecc.iter().max().unwrap());
        assert_eq!(exact_diameter(&Graph::new(2).unwrap()), 1);
        assert_eq!(exact_diameter(&Graph::new(100).unwrap()), 99);
    }

    #[test]
    fn f32_cache_works() {
        let g = Graph::new(3).unwrap();
        let c = apsp::<f32>(&g, PathExponent::Finite(1.0));
        assert!((c.h_p() - 8.0 / 9.0).abs() < 1e-6);
    }
}
