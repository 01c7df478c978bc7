//! Spatial Gibbs random graphs on `V_N = {0, …, N-1}`.
//!
//! Graphs always contain the ground path `{x, x+1}` and carry an arbitrary set
//! of long edges. The crate computes ℓ^p average path lengths and link costs,
//! samples the independent reference measure and the Gibbs measure tilted by
//! `exp(-N^b H_p)`, builds deterministic hierarchical graphs, and certifies
//! nested edge layers in graphs with small path length.
//!
//! Numeric code is generic over [`scalar::Real`]; closed-form exponents are
//! generic over [`scalar::Scalar`] and also run on [`Rational`]. The aliases
//! below fix the common `f64` instantiation.

pub mod certify;
pub mod constructions;
pub mod cutpoints;
pub mod distance;
pub mod gibbs;
pub mod graph;
pub mod harness;
pub mod scalar;

pub use graph::{Edge, Graph, GraphError};
pub use scalar::{PathExponent, Real, Scalar};

/// Exact rational scalar for closed-form exponent arithmetic.
pub type Rational = num_rational::Ratio<i64>;

pub type ModelParams = graph::ModelParams<f64>;
pub type DistanceCache = distance::DistanceCache<f64>;
pub type ChainState = gibbs::ChainState<f64>;
