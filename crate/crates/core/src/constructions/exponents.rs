//! Closed-form path-length exponents. Everything here only needs field
//! arithmetic, so it runs on floats and on exact rationals alike.

use crate::scalar::{clamp_unit, PathExponent, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExponentError {
    #[error("gamma = 1 is the critical case; use critical_exponent")]
    CriticalGamma,
    #[error("gamma must be positive")]
    NonPositiveGamma,
}

/// `α(γ, b)` for `γ ≠ 1`: `((1-b)/(2-γ) ∧ 1) ∨ 0` below one and
/// `((γ-b)/γ ∧ 1) ∨ 0` above.
pub fn theoretical_exponent<T: Scalar>(gamma: T, b: T) -> Result<T, ExponentError> {
    if gamma <= T::zero() {
        return Err(ExponentError::NonPositiveGamma);
    }
    let one = T::one();
    if gamma == one {
        return Err(ExponentError::CriticalGamma);
    }
    let raw = if gamma < one {
        (one - b) / (T::of(2) - gamma)
    } else {
        (gamma.clone() - b) / gamma
    };
    Ok(clamp_unit(raw))
}

/// `h(k, p) = max(0, (2p - (p-1)k) / (k(k+1)(k+2p)))`; for `p = ∞` it is
/// `1/4` at `k = 1` and `0` otherwise.
pub fn h_of<T: Scalar>(k: u32, p: &PathExponent<T>) -> T {
    let kk = T::of(i64::from(k));
    match p {
        PathExponent::Infinite => {
            if k == 1 {
                T::ratio(1, 4)
            } else {
                T::zero()
            }
        }
        PathExponent::Finite(p) => {
            let num = T::of(2) * p.clone() - (p.clone() - T::one()) * kk.clone();
            let den = kk.clone() * (kk.clone() + T::one()) * (kk + T::of(2) * p.clone());
            let v = num / den;
            if v > T::zero() {
                v
            } else {
                T::zero()
            }
        }
    }
}

/// `1/(k+1)` when `b` lies in the band `((k-1)/k + h(k,p), k/(k+1))` for some
/// `k ≥ 1`, and `None` otherwise.
pub fn critical_exponent<T: Scalar>(b: T, p: &PathExponent<T>) -> Option<T> {
    if b <= T::zero() || b >= T::one() {
        return None;
    }
    let mut k: u32 = 1;
    loop {
        let kk = T::of(i64::from(k));
        // bands for k are above (k-1)/k, so stop once that passes b
        if kk.clone() - T::one() >= b.clone() * kk.clone() {
            return None;
        }
        let lower = (kk.clone() - T::one()) / kk.clone() + h_of(k, p);
        let upper = kk.clone() / (kk.clone() + T::one());
        if lower < b && b < upper {
            return Some(T::one() / (kk + T::one()));
        }
        k += 1;
    }
}

/// `ζ_p(η) = p/(k+2p) (1 - kη)`, or `(1 - kη)/2` for `p = ∞`.
pub fn zeta_p<T: Scalar>(p: &PathExponent<T>, k: u32, eta: T) -> T {
    let kk = T::of(i64::from(k));
    let gap = T::one() - kk.clone() * eta;
    match p {
        PathExponent::Infinite => gap / T::of(2),
        PathExponent::Finite(p) => p.clone() / (kk + T::of(2) * p.clone()) * gap,
    }
}

/// `ζ_{p,δ}(η) = p/(k+p) (1 - kη - δ)`, or `1 - kη - δ` for `p = ∞`.
pub fn zeta_p_delta<T: Scalar>(p: &PathExponent<T>, k: u32, eta: T, delta: T) -> T {
    let kk = T::of(i64::from(k));
    let gap = T::one() - kk.clone() * eta - delta;
    match p {
        PathExponent::Infinite => gap,
        PathExponent::Finite(p) => p.clone() / (kk + p.clone()) * gap,
    }
}

/// Regularity exponent `σ = (1 + pη - δ)/(k + p)`, or `σ = η` for `p = ∞`.
pub fn default_sigma<T: Scalar>(p: &PathExponent<T>, k: u32, eta: T, delta: T) -> T {
    match p {
        PathExponent::Infinite => eta,
        PathExponent::Finite(p) => {
            (T::one() + p.clone() * eta - delta) / (T::of(i64::from(k)) + p.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn exponent_band_examples_exact() {
        assert_eq!(theoretical_exponent(q(1, 2), q(0, 1)), Ok(q(2, 3)));
        assert_eq!(theoretical_exponent(q(2, 1), q(1, 1)), Ok(q(1, 2)));
        assert_eq!(theoretical_exponent(q(1, 2), q(2, 1)), Ok(q(0, 1)));
        assert_eq!(theoretical_exponent(q(1, 1), q(0, 1)), Err(ExponentError::CriticalGamma));
        assert_eq!(theoretical_exponent(q(2, 1), q(3, 1)), Ok(q(0, 1)));
        assert_eq!(theoretical_exponent(q(1, 2), q(-1, 2)), Ok(q(1, 1)));
    }

    #[test]
    fn exponent_band_floats() {
        assert!((theoretical_exponent(0.5f64, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((theoretical_exponent(0.5f32, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_of::<Q>(1, &PathExponent::Infinite), q(1, 4));
        assert_eq!(h_of::<Q>(2, &PathExponent::Infinite), q(0, 1));
        assert_eq!(h_of(1, &PathExponent::Finite(q(2, 1))), q(3, 10));
        // 2p - (p-1)k < 0 clamps
        assert_eq!(h_of(5, &PathExponent::Finite(q(2, 1))), q(0, 1));
    }

    #[test]
    fn staircase_examples() {
        let inf = PathExponent::<Q>::Infinite;
        assert_eq!(critical_exponent(q(3, 10), &inf), Some(q(1, 2)));
        assert_eq!(critical_exponent(q(7, 10), &inf), Some(q(1, 4)));
        assert_eq!(critical_exponent(q(1, 5), &inf), None);
        assert_eq!(critical_exponent(q(1, 2), &inf), None);
        assert_eq!(critical_exponent(q(0, 1), &inf), None);
        assert_eq!(critical_exponent(q(1, 1), &inf), None);
        assert_eq!(critical_exponent(q(-3, 1), &inf), None);
        assert_eq!(critical_exponent(0.3f64, &PathExponent::Infinite), Some(0.5));
    }

    #[test]
    fn zeta_examples() {
        let p2 = PathExponent::Finite(q(2, 1));
        assert_eq!(zeta_p_delta(&p2, 1, q(3, 5), q(0, 1)), q(4, 15));
        assert_eq!(zeta_p(&p2, 1, q(3, 5)), q(4, 25));
        assert_eq!(default_sigma(&PathExponent::Infinite, 2, q(2, 5), q(1, 10)), q(2, 5));
        // σ = (1 + 2·(2/5) - 1/10)/(2 + 2) = 17/40
        assert_eq!(default_sigma(&PathExponent::Finite(q(2, 1)), 2, q(2, 5), q(1, 10)), q(17, 40));
    }
}
