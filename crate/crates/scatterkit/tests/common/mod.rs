//! Shared helpers for the integration test suites.
#![allow(dead_code)] // each test target uses a different subset

pub mod transcription;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scatterkit::numeric::c64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_cvec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<c64> {
    (0..n)
        .map(|_| c64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        .collect()
}

/// Random symmetric (not Hermitian) complex matrix, row-major `n×n`.
pub fn rand_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<c64> {
    let mut t = vec![c64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in a..n {
            let v = c64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            t[a * n + b] = v;
            t[b * n + a] = v;
        }
    }
    t
}

/// Central-difference gradient with real/imaginary splitting:
/// `g_l = ∂F/∂Re(x_l) + i·∂F/∂Im(x_l)`.
pub fn fd_gradient<F: FnMut(&[c64]) -> f64>(x: &[c64], h: f64, mut f: F) -> Vec<c64> {
    let mut g = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for l in 0..x.len() {
        let orig = xp[l];
        xp[l] = orig + h;
        let fpr = f(&xp);
        xp[l] = orig - h;
        let fmr = f(&xp);
        xp[l] = orig + c64::new(0.0, h);
        let fpi = f(&xp);
        xp[l] = orig - c64::new(0.0, h);
        let fmi = f(&xp);
        xp[l] = orig;
        g.push(c64::new((fpr - fmr) / (2.0 * h), (fpi - fmi) / (2.0 * h)));
    }
    g
}

pub fn rel_l2(a: &[c64], b: &[c64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
