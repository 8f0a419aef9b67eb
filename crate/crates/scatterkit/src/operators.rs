//! The discrete scattering operators: the grid convolution matrix `T` with
//! entries `κ²h²·Φ_{pᵃ−pᵇ,h}` and the dense `Q×M` far-field matrix `T∞` with
//! entries `θ·h²·e^{−iκ x̂^q·p^ℓ h}`.
//!
//! `T` is applied matrix-free through a block-Toeplitz circulant embedding of
//! size `(2N)²` with FFTs; a dense materialization exists for `N ≤ 64` and
//! serves as the test oracle. `T` is symmetric (`Φ` depends only on `|p−k|`),
//! so its conjugate transpose is applied as `T* x = conj(T conj(x))`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;
use crate::hankel::hankel1_0;
use crate::numeric::c64;

/// Lattice kernel `Φ_{p,h}`: `(i/4)·H₀⁽¹⁾(κ|p|h)` off the origin, `0` at it.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub kappa: f64,
}

impl Kernel {
    pub fn new(kappa: f64) -> Self {
        assert!(kappa > 0.0, "wave number must be positive");
        Kernel { kappa }
    }

    pub fn phi(&self, p: (i32, i32), h: f64) -> c64 {
        if p == (0, 0) {
            return c64::new(0.0, 0.0);
        }
        let r = ((p.0 as f64).hypot(p.1 as f64)) * h;
        c64::new(0.0, 0.25) * hankel1_0(self.kappa * r)
    }
}

/// Far-field prefactor `θ_{2,κ} = κ²·e^{iπ/4}/√(8κπ)`.
pub fn theta_2d(kappa: f64) -> c64 {
    kappa * kappa / (8.0 * kappa * PI).sqrt() * c64::from_polar(1.0, PI / 4.0)
}

/// Abstract operator pair used by the solvers. The FFT-backed implementation
/// is [`ScatteringOperators`]; tests substitute small dense instances.
pub trait ScatterOps: Sync {
    /// Pixel count `M`.
    fn m(&self) -> usize;
    /// Observation direction count `Q`.
    fn q(&self) -> usize;
    /// `T w`.
    fn apply_t(&self, w: &[c64]) -> Vec<c64>;
    /// `T* x` (conjugate transpose).
    fn apply_t_adj(&self, x: &[c64]) -> Vec<c64>;
    /// `T∞ w`.
    fn apply_tinf(&self, w: &[c64]) -> Vec<c64>;
    /// `(T∞)* r`.
    fn apply_tinf_adj(&self, r: &[c64]) -> Vec<c64>;
}

pub struct ScatteringOperators {
    grid: Grid,
    kernel: Kernel,
    theta: c64,
    /// Q×M row-major far-field matrix.
    tinf: Vec<c64>,
    obs_dirs: Vec<(f64, f64)>,
    /// FFT of the (2N)² circulant embedding of the T kernel, with the
    /// κ²h² scale and the inverse-FFT normalization folded in.
    khat: Vec<c64>,
    pad: usize,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl ScatteringOperators {
    pub fn new(grid: Grid, kappa: f64, obs_dirs: &[(f64, f64)]) -> Self {
        let kernel = Kernel::new(kappa);
        let n = grid.n();
        let h = grid.h();
        let pad = 2 * n;
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(pad);
        let fft_inv = planner.plan_fft_inverse(pad);

        // circulant first "column": kernel value at each wrapped offset
        let scale = kappa * kappa * h * h / (pad * pad) as f64;
        let mut khat = vec![c64::new(0.0, 0.0); pad * pad];
        for d1 in -(n as i32 - 1)..n as i32 {
            for d2 in -(n as i32 - 1)..n as i32 {
                let i1 = d1.rem_euclid(pad as i32) as usize;
                let i2 = d2.rem_euclid(pad as i32) as usize;
                khat[i1 * pad + i2] = kernel.phi((d1, d2), h) * scale;
            }
        }
        fft2_in_place(&mut khat, pad, &fft_fwd);

        let theta = theta_2d(kappa);
        let mut tinf = Vec::with_capacity(obs_dirs.len() * grid.m());
        for &(dx, dy) in obs_dirs {
            for l in 0..grid.m() {
                let (x, y) = grid.center(l);
                let phase = -kappa * (dx * x + dy * y);
                tinf.push(theta * h * h * c64::from_polar(1.0, phase));
            }
        }

        ScatteringOperators {
            grid,
            kernel,
            theta,
            tinf,
            obs_dirs: obs_dirs.to_vec(),
            khat,
            pad,
            fft_fwd,
            fft_inv,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.grid_ref()
    }

    fn grid_ref(&self) -> &Grid {
        &self.grid
    }

    pub fn kappa(&self) -> f64 {
        self.kernel.kappa
    }

    pub fn theta(&self) -> c64 {
        self.theta
    }

    pub fn obs_dirs(&self) -> &[(f64, f64)] {
        &self.obs_dirs
    }

    /// Row-major `Q×M` entries of `T∞`.
    pub fn tinf_entries(&self) -> &[c64] {
        &self.tinf
    }

    /// Dense `M×M` materialization of `T`; oracle path, `N ≤ 64` only.
    pub fn dense_t(&self) -> Vec<c64> {
        let n = self.grid.n();
        assert!(n <= 64, "dense T is only materialized for N <= 64");
        let m = self.grid.m();
        let h = self.grid.h();
        let scale = self.kernel.kappa * self.kernel.kappa * h * h;
        let mut t = vec![c64::new(0.0, 0.0); m * m];
        for a in 0..m {
            let pa = self.grid.lattice(a);
            for b in 0..m {
                let pb = self.grid.lattice(b);
                t[a * m + b] = self.kernel.phi((pa.0 - pb.0, pa.1 - pb.1), h) * scale;
            }
        }
        t
    }
}

impl ScatterOps for ScatteringOperators {
    fn m(&self) -> usize {
        self.grid.m()
    }

    fn q(&self) -> usize {
        self.obs_dirs.len()
    }

    fn apply_t(&self, w: &[c64]) -> Vec<c64> {
        assert_eq!(w.len(), self.m());
        let n = self.grid.n();
        let pad = self.pad;
        let mut buf = vec![c64::new(0.0, 0.0); pad * pad];
        for a1 in 0..n {
            buf[a1 * pad..a1 * pad + n].copy_from_slice(&w[a1 * n..(a1 + 1) * n]);
        }
        fft2_in_place(&mut buf, pad, &self.fft_fwd);
        for (b, k) in buf.iter_mut().zip(&self.khat) {
            *b *= k;
        }
        fft2_in_place(&mut buf, pad, &self.fft_inv);
        let mut out = vec![c64::new(0.0, 0.0); n * n];
        for a1 in 0..n {
            out[a1 * n..(a1 + 1) * n].copy_from_slice(&buf[a1 * pad..a1 * pad + n]);
        }
        out
    }

    fn apply_t_adj(&self, x: &[c64]) -> Vec<c64> {
        let conj: Vec<c64> = x.iter().map(|v| v.conj()).collect();
        let mut out = self.apply_t(&conj);
        for v in &mut out {
            *v = v.conj();
        }
        out
    }

    fn apply_tinf(&self, w: &[c64]) -> Vec<c64> {
        dense_matvec(&self.tinf, self.q(), self.m(), w)
    }

    fn apply_tinf_adj(&self, r: &[c64]) -> Vec<c64> {
        dense_matvec_adj(&self.tinf, self.q(), self.m(), r)
    }
}

/// Row-major `rows×cols` matrix times vector.
pub fn dense_matvec(a: &[c64], rows: usize, cols: usize, x: &[c64]) -> Vec<c64> {
    assert_eq!(x.len(), cols);
    (0..rows)
        .map(|i| {
            a[i * cols..(i + 1) * cols]
                .iter()
                .zip(x)
                .map(|(aij, xj)| aij * xj)
                .sum()
        })
        .collect()
}

/// Conjugate transpose of a row-major `rows×cols` matrix times vector.
pub fn dense_matvec_adj(a: &[c64], rows: usize, cols: usize, y: &[c64]) -> Vec<c64> {
    assert_eq!(y.len(), rows);
    let mut out = vec![c64::new(0.0, 0.0); cols];
    for i in 0..rows {
        let yi = y[i];
        for (o, aij) in out.iter_mut().zip(&a[i * cols..(i + 1) * cols]) {
            *o += aij.conj() * yi;
        }
    }
    out
}

/// Small dense operator pair for tests: an arbitrary symmetric `T` and an
/// arbitrary `T∞`, both materialized.
pub struct DenseOps {
    pub t: Vec<c64>,
    pub tinf: Vec<c64>,
    pub m: usize,
    pub q: usize,
}

impl DenseOps {
    /// `t` must be symmetric (`t[a,b] = t[b,a]`), matching the structure of
    /// the scattering convolution matrix.
    pub fn new(t: Vec<c64>, tinf: Vec<c64>, m: usize, q: usize) -> Self {
        assert_eq!(t.len(), m * m);
        assert_eq!(tinf.len(), q * m);
        DenseOps { t, tinf, m, q }
    }
}

impl ScatterOps for DenseOps {
    fn m(&self) -> usize {
        self.m
    }
    fn q(&self) -> usize {
        self.q
    }
    fn apply_t(&self, w: &[c64]) -> Vec<c64> {
        dense_matvec(&self.t, self.m, self.m, w)
    }
    fn apply_t_adj(&self, x: &[c64]) -> Vec<c64> {
        dense_matvec_adj(&self.t, self.m, self.m, x)
    }
    fn apply_tinf(&self, w: &[c64]) -> Vec<c64> {
        dense_matvec(&self.tinf, self.q, self.m, w)
    }
    fn apply_tinf_adj(&self, r: &[c64]) -> Vec<c64> {
        dense_matvec_adj(&self.tinf, self.q, self.m, r)
    }
}

/// 2-D FFT of a `size×size` row-major buffer, rows then columns.
fn fft2_in_place(buf: &mut [c64], size: usize, fft: &Arc<dyn Fft<f64>>) {
    debug_assert_eq!(buf.len(), size * size);
    for row in buf.chunks_exact_mut(size) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); size];
    for j in 0..size {
        for i in 0..size {
            col[i] = buf[i * size + j];
        }
        fft.process(&mut col);
        for i in 0..size {
            buf[i * size + j] = col[i];
        }
    }
}

/// `J` (or `Q`) unit vectors uniformly spaced on the circle, first at angle 0.
pub fn uniform_directions(count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / count as f64;
            (a.cos(), a.sin())
        })
        .collect()
}

/// Sampled incident plane waves `uⁱ_j(p^ℓ h) = e^{iκ p^ℓ h·d_j}`.
pub fn incident_fields(grid: &Grid, kappa: f64, dirs: &[(f64, f64)]) -> Vec<Vec<c64>> {
    dirs.iter()
        .map(|&(dx, dy)| {
            (0..grid.m())
                .map(|l| {
                    let (x, y) = grid.center(l);
                    c64::from_polar(1.0, kappa * (dx * x + dy * y))
                })
                .collect()
        })
        .collect()
}
