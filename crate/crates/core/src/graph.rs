//! Graphs on `V_N = {0, …, N-1}` that contain the ground path.
//!
//! Ground edges `{x, x+1}` are implicit. Only long edges (length at least 2)
//! are stored, both as an ordered set and as an adjacency list for BFS.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{CompensatedSum, PathExponent, Real, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("a graph needs at least 2 vertices, got {0}")]
    InvalidSize(usize),
    #[error("vertex {vertex} is outside V_N with N = {n}")]
    OutOfRange { vertex: usize, n: usize },
    #[error("{0} is not a long edge (ground edges are immutable, loops are not edges)")]
    NotLong(Edge),
    #[error("edge {0} is already present")]
    DuplicateEdge(Edge),
    #[error("edge {0} is not present")]
    MissingEdge(Edge),
}

/// Unordered vertex pair, stored with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    /// Euclidean length `|e| = hi - lo`.
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_ground(&self) -> bool {
        self.len() == 1
    }

    pub fn is_long(&self) -> bool {
        self.len() >= 2
    }

    pub fn has_endpoint(&self, x: usize) -> bool {
        self.lo == x || self.hi == x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(serializer)
    }
}

impl From<(usize, usize)> for Edge {
    fn from((a, b): (usize, usize)) -> Self {
        Edge::new(a, b)
    }
}

#[derive(Clone)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// The ground graph `G°_N`.
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::InvalidSize(n));
        }
        Ok(Self { n, edges: BTreeSet::new(), adj: vec![Vec::new(); n] })
    }

    pub fn with_edges<I, E>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        let mut g = Self::new(n)?;
        for e in edges {
            g.insert(e.into())?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_long_edges(&self) -> usize {
        self.edges.len()
    }

    /// Long edges in lexicographic order.
    pub fn long_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    /// Long-edge neighbours of `x` (ground neighbours excluded).
    pub fn long_neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    /// All neighbours of `x`: ground neighbours first, then long neighbours.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        let left = x.checked_sub(1);
        let right = (x + 1 < self.n).then_some(x + 1);
        left.into_iter().chain(right).chain(self.adj[x].iter().copied())
    }

    pub fn check_long(&self, e: Edge) -> Result<(), GraphError> {
        if e.hi >= self.n {
            return Err(GraphError::OutOfRange { vertex: e.hi, n: self.n });
        }
        if !e.is_long() {
            return Err(GraphError::NotLong(e));
        }
        Ok(())
    }

    pub fn insert(&mut self, e: Edge) -> Result<(), GraphError> {
        self.check_long(e)?;
        if !self.edges.insert(e) {
            return Err(GraphError::DuplicateEdge(e));
        }
        self.adj[e.lo].push(e.hi);
        self.adj[e.hi].push(e.lo);
        Ok(())
    }

    pub fn remove(&mut self, e: Edge) -> Result<(), GraphError> {
        self.check_long(e)?;
        if !self.edges.remove(&e) {
            return Err(GraphError::MissingEdge(e));
        }
        let drop_from = |list: &mut Vec<usize>, v: usize| {
            let pos = list.iter().position(|&w| w == v).expect("adjacency out of sync");
            list.swap_remove(pos);
        };
        drop_from(&mut self.adj[e.lo], e.hi);
        drop_from(&mut self.adj[e.hi], e.lo);
        Ok(())
    }

    /// `C_γ(g) = Σ_{long e} |e|^γ`; ground edges cost nothing.
    pub fn cost<T: Real>(&self, gamma: T) -> T {
        let acc: CompensatedSum<T> =
            self.edges.iter().map(|e| T::of_usize(e.len()).powf(gamma)).collect();
        acc.value()
    }

    /// Cost at `γ = 1`, exact in integers.
    pub fn linear_cost(&self) -> u64 {
        self.edges.iter().map(|e| e.len() as u64).sum()
    }

    pub fn count_edges_of_length_at_least(&self, threshold: usize) -> usize {
        self.edges.iter().filter(|e| e.len() >= threshold).count()
    }

    /// Single-source BFS with unit weights. `dist` must have length `n`.
    pub fn bfs_into(&self, source: usize, dist: &mut [u32], queue: &mut Vec<usize>) {
        dist.fill(u32::MAX);
        queue.clear();
        dist[source] = 0;
        queue.push(source);
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            let next = dist[x] + 1;
            for y in self.neighbors(x) {
                if dist[y] == u32::MAX {
                    dist[y] = next;
                    queue.push(y);
                }
            }
        }
    }

    pub fn bfs(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![0; self.n];
        let mut queue = Vec::with_capacity(self.n);
        self.bfs_into(source, &mut dist, &mut queue);
        dist
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("n", &self.n).field("long_edges", &self.edges).finish()
    }
}

/// Wire form: `{"n": N, "edges": [[x, y], …]}`, `x < y`, lexicographic.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphJson { n: self.n, edges: self.edges.iter().map(|e| [e.lo, e.hi]).collect() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = GraphJson::deserialize(deserializer)?;
        Graph::with_edges(raw.n, raw.edges.into_iter().map(|[a, b]| Edge::new(a, b)))
            .map_err(serde::de::Error::custom)
    }
}

/// Parameters `(N, γ, b, p)` of the reference and Gibbs measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub n: usize,
    pub gamma: T,
    pub b: T,
    pub p: PathExponent<T>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamsError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("gamma must be positive, got {0}")]
    Gamma(String),
    #[error("path exponent must be >= 1, got {0}")]
    PathExponent(String),
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(n: usize, gamma: T, b: T, p: PathExponent<T>) -> Result<Self, ParamsError> {
        if n < 2 {
            return Err(GraphError::InvalidSize(n).into());
        }
        if gamma <= T::zero() {
            return Err(ParamsError::Gamma(format!("{gamma:?}")));
        }
        if !p.is_valid() {
            return Err(ParamsError::PathExponent(format!("{p:?}")));
        }
        Ok(Self { n, gamma, b, p })
    }
}

impl<T: Real> ModelParams<T> {
    /// `N^b`, computed as `exp(b ln N)`.
    pub fn n_pow_b(&self) -> T {
        (self.b * T::of_usize(self.n).ln()).exp()
    }
}
