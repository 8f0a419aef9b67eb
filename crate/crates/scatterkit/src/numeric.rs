//! Complex vector primitives shared by every solver: the inner product
//! convention, norms, and the complex soft-threshold.
//!
//! The inner product is linear in the first argument and conjugate-linear in
//! the second: `⟨x, y⟩ = Σ xᵢ·conj(yᵢ)`. Under this convention the minimizer
//! of `‖E + sA‖²` over complex `s` is `s = ⟨E, −A⟩ / ‖A‖²`, which is exactly
//! the form the closed-form CSI/SOM step sizes rely on:
//!
//! `‖E + sA‖² = ‖E‖² + s⟨A,E⟩ + conj(s)⟨E,A⟩ + |s|²‖A‖²`, and setting the
//! Wirtinger derivative w.r.t. `conj(s)` to zero gives `⟨E,A⟩ + s‖A‖² = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = Complex64;

/// `Σ xᵢ·conj(yᵢ)`; conjugate-linear in the second argument.
pub fn inner(x: &[c64], y: &[c64]) -> Result<c64> {
    if x.len() != y.len() {
        return Err(Error::Contract(format!(
            "inner product length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(inner_unchecked(x, y))
}

/// Same as [`inner`] for callers that guarantee equal lengths.
pub fn inner_unchecked(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm_sq(x: &[c64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

pub fn norm_l2(x: &[c64]) -> f64 {
    norm_sq(x).sqrt()
}

pub fn norm_l1(x: &[c64]) -> f64 {
    x.iter().map(|a| a.norm()).sum()
}

pub fn norm_linf(x: &[c64]) -> f64 {
    x.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

/// `(ℓ1, ℓ2, ℓ∞)` of a complex vector, moduli entrywise.
pub fn norms(x: &[c64]) -> (f64, f64, f64) {
    (norm_l1(x), norm_l2(x), norm_linf(x))
}

/// Complex soft-threshold `S_τ(a)`: `(|a|−τ)·a/|a|` when `|a| > τ`, else `0`.
///
/// This is the proximal map of `τ|·|`; `a = 0` and `|a| = τ` both land in the
/// zero branch (the continuous limit of the two branches).
pub fn soft_threshold(a: c64, tau: f64) -> c64 {
    debug_assert!(tau >= 0.0);
    let r = a.norm();
    if r > tau {
        a * ((r - tau) / r)
    } else {
        c64::new(0.0, 0.0)
    }
}

/// True when every entry is finite; solver state must stay in this set.
pub fn all_finite(x: &[c64]) -> bool {
    x.iter().all(|a| a.re.is_finite() && a.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn inner_norm_squared_case() {
        let x = [c(1.0, 0.0), c(0.0, 1.0)];
        let v = inner(&x, &x).unwrap();
        assert_eq!(v, c(2.0, 0.0));
    }

    #[test]
    fn inner_direct_values() {
        let v = inner(&[c(0.0, 1.0)], &[c(1.0, 0.0)]).unwrap();
        assert_eq!(v, c(0.0, 1.0));
        let v = inner(&[c(1.0, 1.0), c(2.0, 0.0)], &[c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(v, c(0.0, -2.0));
    }

    #[test]
    fn inner_length_mismatch() {
        assert!(inner(&[c(1.0, 0.0)], &[]).is_err());
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(c(2.0, 0.0), 1.0), c(1.0, 0.0));
        assert_eq!(soft_threshold(c(0.5, 0.0), 1.0), c(0.0, 0.0));
        let v = soft_threshold(c(0.0, 3.0), 2.0);
        assert!((v - c(0.0, 1.0)).norm() < 1e-15);
        // boundary |a| = tau and a = 0 both map to zero
        assert_eq!(soft_threshold(c(1.0, 0.0), 1.0), c(0.0, 0.0));
        assert_eq!(soft_threshold(c(0.0, 0.0), 0.5), c(0.0, 0.0));
    }

    #[test]
    fn norms_cases() {
        let (l1, l2, li) = norms(&[c(3.0, 0.0), c(0.0, 4.0)]);
        assert_eq!((l1, l2, li), (7.0, 5.0, 4.0));
        assert_eq!(norms(&[]), (0.0, 0.0, 0.0));
        let (l1, l2, li) = norms(&[c(1.0, 1.0)]);
        let s = 2f64.sqrt();
        assert!((l1 - s).abs() < 1e-15 && (l2 - s).abs() < 1e-15 && (li - s).abs() < 1e-15);
    }

    /// soft_threshold is the exact minimizer of the scalar prox problem
    /// `c|s|² + 2·Re(s·b) + τ|s|`: the closed form
    /// `s* = S_{τ/(2c)}(−conj(b)/c)` beats a dense grid of candidates.
    #[test]
    fn soft_threshold_prox_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let obj = |s: c64, cc: f64, b: c64, tau: f64| {
            cc * s.norm_sqr() + 2.0 * (s * b).re + tau * s.norm()
        };
        for _ in 0..200 {
            let cc: f64 = rng.gen_range(0.1..5.0);
            let b = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let tau: f64 = rng.gen_range(0.0..3.0);
            let s_star = soft_threshold(-b.conj() / cc, tau / (2.0 * cc));
            let f_star = obj(s_star, cc, b, tau);
            let radius = 2.0 * (b.norm() / cc + 1.0);
            for _ in 0..10_000 {
                let s = c(
                    rng.gen_range(-radius..radius),
                    rng.gen_range(-radius..radius),
                );
                assert!(f_star <= obj(s, cc, b, tau) + 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn norm_inequalities(v in proptest::collection::vec((-10f64..10.0, -10f64..10.0), 1..40)) {
            let x: Vec<c64> = v.iter().map(|&(re, im)| c(re, im)).collect();
            let (l1, l2, li) = norms(&x);
            let n = x.len() as f64;
            prop_assert!(l1 <= n.sqrt() * l2 + 1e-12);
            prop_assert!(li <= l2 + 1e-12);
        }

        #[test]
        fn inner_self_is_l2_squared(v in proptest::collection::vec((-10f64..10.0, -10f64..10.0), 1..40)) {
            let x: Vec<c64> = v.iter().map(|&(re, im)| c(re, im)).collect();
            let ip = inner(&x, &x).unwrap();
            let l2 = norm_l2(&x);
            prop_assert!(ip.im.abs() <= 1e-14 * ip.re.max(1.0));
            prop_assert!(ip.re >= 0.0);
            prop_assert!((ip.re - l2 * l2).abs() <= 1e-14 * (l2 * l2).max(1.0));
        }
    }
}
