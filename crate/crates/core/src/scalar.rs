//! Scalar abstractions.
//!
//! Closed-form exponent arithmetic only needs field operations and an order,
//! so it is written against [`Scalar`] and runs unchanged on `f32`, `f64` and
//! exact rationals. Everything that takes powers, roots or logarithms needs
//! [`Real`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An ordered field element.
pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug {
    /// Exact embedding of a small integer.
    fn of(n: i64) -> Self {
        Self::from_i64(n).expect("integer not representable in scalar type")
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::of(num) / Self::of(den)
    }

    fn of_usize(n: usize) -> Self {
        Self::of(i64::try_from(n).expect("count exceeds i64"))
    }
}

impl<T: Num + Clone + PartialOrd + FromPrimitive + Debug> Scalar for T {}

/// Floating point scalar used by every metric and sampling routine.
pub trait Real: Scalar + Float + FloatConst + Sum + Display + Send + Sync + 'static {
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).unwrap_or_else(Self::nan)
    }
}

impl<T: Scalar + Float + FloatConst + Sum + Display + Send + Sync + 'static> Real for T {}

pub fn max_of<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub fn min_of<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

/// Clamp into `[0, 1]`.
pub fn clamp_unit<T: Scalar>(x: T) -> T {
    min_of(max_of(x, T::zero()), T::one())
}

/// The exponent `p` of the ℓ^p average path length: a real number `p ≥ 1`
/// or the sup-norm (diameter).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathExponent<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> PathExponent<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, PathExponent::Infinite)
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            PathExponent::Finite(p) => Some(p),
            PathExponent::Infinite => None,
        }
    }

    /// `p ≥ 1` (always true for the infinite exponent).
    pub fn is_valid(&self) -> bool {
        match self {
            PathExponent::Finite(p) => *p >= T::one(),
            PathExponent::Infinite => true,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> PathExponent<U> {
        match self {
            PathExponent::Finite(p) => PathExponent::Finite(f(p)),
            PathExponent::Infinite => PathExponent::Infinite,
        }
    }
}

impl<T: Real> PathExponent<T> {
    pub fn to_f64(self) -> PathExponent<f64> {
        self.map(Real::to_f64_lossy)
    }
}

impl<T: Display> Display for PathExponent<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PathExponent::Finite(p) => write!(f, "{p}"),
            PathExponent::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid path exponent {0:?}: expected a number >= 1 or \"inf\"")]
pub struct ParsePathExponentError(String);

impl std::str::FromStr for PathExponent<f64> {
    type Err = ParsePathExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let p = match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => PathExponent::Infinite,
            _ => {
                let v: f64 = t.parse().map_err(|_| ParsePathExponentError(s.to_string()))?;
                if v.is_infinite() && v > 0.0 {
                    PathExponent::Infinite
                } else {
                    PathExponent::Finite(v)
                }
            }
        };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(ParsePathExponentError(s.to_string()))
        }
    }
}

// Finite exponents serialize as JSON numbers, the infinite one as "inf".
impl<T: Serialize> Serialize for PathExponent<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PathExponent::Finite(p) => p.serialize(serializer),
            PathExponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PathExponent<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) if v >= 1.0 => Ok(PathExponent::Finite(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("path exponent {v} < 1"))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
