//! SVD of the far-field matrix `T∞` and the deterministic orthonormal
//! completion of the leading right-singular subspace.
//!
//! `T∞` is `Q×M` with tiny `Q` (16 in the reference setup), so the SVD is
//! computed by one-sided Jacobi on the `M×Q` conjugate transpose: unitary
//! 2×2 rotations orthogonalize its columns to working precision, which keeps
//! small singular values fully accurate. The completion `V^n` of
//! `span(v₁,…,v_{Lα})` is represented implicitly by the `Lα` Householder
//! reflectors of the QR factorization of `(v₁ … v_{Lα})`; applying it or its
//! adjoint costs `O(Lα·M)`.

use crate::error::{Error, Result};
use crate::numeric::{c64, norm_l2};
use crate::operators::{ScatterOps, ScatteringOperators};

/// Relative threshold under which singular values count as numerically zero.
pub const RANK_RTOL: f64 = 1e-12;

/// Singular triplets of `T∞`, `λ₁ ≥ λ₂ ≥ …`, all `Q` of them.
#[derive(Debug, Clone)]
pub struct TinfSvd {
    /// Singular values, nonincreasing.
    pub lambda: Vec<f64>,
    /// Left singular vectors `u_k ∈ C^Q`.
    pub u: Vec<Vec<c64>>,
    /// Right singular vectors `v_k ∈ C^M`.
    pub v: Vec<Vec<c64>>,
    /// Numerical rank: count of `λ_k > λ₁·RANK_RTOL`.
    pub l0: usize,
}

impl TinfSvd {
    /// One-sided Jacobi SVD of the far-field matrix.
    pub fn compute(ops: &ScatteringOperators) -> Self {
        let q = ops.q();
        let m = ops.m();
        let entries = ops.tinf_entries();
        // columns of B = Tinf^* (M x Q)
        let mut b: Vec<Vec<c64>> = (0..q)
            .map(|k| (0..m).map(|l| entries[k * m + l].conj()).collect())
            .collect();
        // accumulated right rotations: B_final = B V, V is Q x Q
        let mut vrot: Vec<Vec<c64>> = (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| {
                        if i == j {
                            c64::new(1.0, 0.0)
                        } else {
                            c64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            })
            .collect();

        for _sweep in 0..60 {
            let mut converged = true;
            for i in 0..q {
                for j in i + 1..q {
                    let (aii, ajj, aij) = gram_pair(&b[i], &b[j]);
                    if aij.norm() <= 1e-15 * (aii * ajj).sqrt().max(f64::MIN_POSITIVE) {
                        continue;
                    }
                    converged = false;
                    // unitary 2x2 rotation diagonalizing [[aii, aij], [conj(aij), ajj]]
                    let phase = aij / aij.norm();
                    let tau = (aii - ajj) / (2.0 * aij.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = phase * (c * t);
                    for l in 0..m {
                        let bi = b[i][l];
                        let bj = b[j][l];
                        b[i][l] = c * bi + s * bj;
                        b[j][l] = -s.conj() * bi + c * bj;
                    }
                    for r in 0..q {
                        let vi = vrot[i][r];
                        let vj = vrot[j][r];
                        vrot[i][r] = c * vi + s * vj;
                        vrot[j][r] = -s.conj() * vi + c * vj;
                    }
                }
            }
            if converged {
                break;
            }
        }

        // column norms are the singular values; sort nonincreasing
        let mut order: Vec<usize> = (0..q).collect();
        let sigmas: Vec<f64> = b.iter().map(|col| norm_l2(col)).collect();
        order.sort_by(|&a, &c| sigmas[c].partial_cmp(&sigmas[a]).unwrap());

        let mut lambda = Vec::with_capacity(q);
        let mut u = Vec::with_capacity(q);
        let mut v = Vec::with_capacity(q);
        for &k in &order {
            let sigma = sigmas[k];
            lambda.push(sigma);
            // Tinf^* · V = W Σ, so Tinf = V Σ W^*: the rotated columns are
            // v_k·σ_k and the accumulated rotation columns are the u_k.
            if sigma > 0.0 {
                v.push(b[k].iter().map(|x| x / sigma).collect());
            } else {
                v.push(vec![c64::new(0.0, 0.0); m]);
            }
            u.push(vrot[k].clone());
        }
        let l0 = lambda
            .iter()
            .filter(|&&s| s > lambda[0] * RANK_RTOL)
            .count();
        TinfSvd { lambda, u, v, l0 }
    }

    /// Scaled signal basis `V̂^s = (v₁/λ₁, …, v_{Lα}/λ_{Lα})`.
    pub fn vs_hat(&self, l_alpha: usize) -> Result<Vec<Vec<c64>>> {
        self.check_l_alpha(l_alpha)?;
        Ok((0..l_alpha)
            .map(|k| self.v[k].iter().map(|x| x / self.lambda[k]).collect())
            .collect())
    }

    /// Deterministic orthonormal completion of `span(v₁,…,v_{Lα})`.
    pub fn complement(&self, l_alpha: usize) -> Result<Complement> {
        self.check_l_alpha(l_alpha)?;
        Ok(Complement::from_basis(&self.v[..l_alpha]))
    }

    pub fn check_l_alpha(&self, l_alpha: usize) -> Result<()> {
        if l_alpha < 1 || l_alpha > self.l0 {
            return Err(Error::Config(format!(
                "L_alpha = {} outside [1, L0 = {}]",
                l_alpha, self.l0
            )));
        }
        Ok(())
    }
}

fn gram_pair(bi: &[c64], bj: &[c64]) -> (f64, f64, c64) {
    let mut aii = 0.0;
    let mut ajj = 0.0;
    let mut aij = c64::new(0.0, 0.0);
    for (x, y) in bi.iter().zip(bj) {
        aii += x.norm_sqr();
        ajj += y.norm_sqr();
        aij += x * y.conj();
    }
    (aii, ajj, aij)
}

/// Implicit orthonormal basis `V^n : C^{M−Lα} → C^M` of the orthogonal
/// complement, held as Householder reflectors of the QR factorization of the
/// leading right-singular vectors. `V^n·α` embeds `α` below the first `Lα`
/// coordinates and applies the reflectors in reverse; the adjoint reverses
/// that.
#[derive(Debug, Clone)]
pub struct Complement {
    m: usize,
    l_alpha: usize,
    /// Hermitian unitary reflectors `H_k = I − 2 u u*/‖u‖²`; `u` is zero when
    /// the column was already reduced.
    reflectors: Vec<Vec<c64>>,
}

impl Complement {
    fn from_basis(basis: &[Vec<c64>]) -> Self {
        let l_alpha = basis.len();
        let m = basis[0].len();
        let mut a: Vec<Vec<c64>> = basis.to_vec(); // working columns
        let mut reflectors = Vec::with_capacity(l_alpha);
        for k in 0..l_alpha {
            let x = &a[k][k..];
            let xnorm = norm_l2(x);
            let mut u = vec![c64::new(0.0, 0.0); m];
            if xnorm > 0.0 {
                let x0 = x[0];
                let phase = if x0.norm() == 0.0 {
                    c64::new(1.0, 0.0)
                } else {
                    x0 / x0.norm()
                };
                let beta = -phase * xnorm;
                u[k..].copy_from_slice(x);
                u[k] -= beta;
                if norm_l2(&u[k..]) > 0.0 {
                    for col in a.iter_mut().skip(k) {
                        reflect(&u, col, k);
                    }
                }
            }
            reflectors.push(u);
        }
        Complement {
            m,
            l_alpha,
            reflectors,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l_alpha(&self) -> usize {
        self.l_alpha
    }

    /// Dimension `M − Lα` of the complement.
    pub fn dim(&self) -> usize {
        self.m - self.l_alpha
    }

    /// `V^n · α`.
    pub fn apply(&self, alpha: &[c64]) -> Vec<c64> {
        assert_eq!(alpha.len(), self.dim());
        let mut x = vec![c64::new(0.0, 0.0); self.m];
        x[self.l_alpha..].copy_from_slice(alpha);
        for k in (0..self.l_alpha).rev() {
            reflect(&self.reflectors[k], &mut x, k);
        }
        x
    }

    /// `(V^n)* · x`.
    pub fn apply_adj(&self, x: &[c64]) -> Vec<c64> {
        let mut y = x.to_vec();
        for k in 0..self.l_alpha {
            reflect(&self.reflectors[k], &mut y, k);
        }
        y.split_off(self.l_alpha)
    }

    /// Materialized columns; intended for tests and small grids.
    pub fn materialize(&self) -> Vec<Vec<c64>> {
        (0..self.dim())
            .map(|i| {
                let mut e = vec![c64::new(0.0, 0.0); self.dim()];
                e[i] = c64::new(1.0, 0.0);
                self.apply(&e)
            })
            .collect()
    }
}

/// Apply the Hermitian reflector `I − 2uu*/‖u‖²` restricted to rows `k..`.
fn reflect(u: &[c64], x: &mut [c64], k: usize) {
    let usq: f64 = u[k..].iter().map(|v| v.norm_sqr()).sum();
    if usq == 0.0 {
        return;
    }
    let proj: c64 = u[k..]
        .iter()
        .zip(&x[k..])
        .map(|(ui, xi)| ui.conj() * xi)
        .sum();
    let f = 2.0 * proj / usq;
    for (xi, ui) in x[k..].iter_mut().zip(&u[k..]) {
        *xi -= f * ui;
    }
}
