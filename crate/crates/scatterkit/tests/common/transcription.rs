//! Plain dense-matrix transcriptions of the original CSI and SOM iterations,
//! written with their own loops for cross-checking the library solvers.

use rand::Rng;
use scatterkit::csi::CsiWeights;
use scatterkit::forward::{add_noise, synthesize, FarFieldData, IncidentData};
use scatterkit::grid::Grid;
use scatterkit::numeric::c64;
use scatterkit::operators::{uniform_directions, DenseOps, ScatterOps, ScatteringOperators};
use scatterkit::svd::TinfSvd;

use super::rng;

pub struct Setup {
    pub dense: DenseOps,
    pub t: Vec<c64>,
    pub tinf: Vec<c64>,
    pub m_len: usize,
    pub q: usize,
    pub j_count: usize,
    pub incident: IncidentData,
    pub data: FarFieldData,
    pub weights: CsiWeights,
    pub svd: TinfSvd,
}

impl Setup {
    /// Random scattering instance at grid `n` with dense operator copies.
    pub fn new(seed: u64, n: usize, j_count: usize, q: usize) -> Self {
        let grid = Grid::new(n);
        let ops = ScatteringOperators::new(grid, 6.0, &uniform_directions(q));
        let incident =
            IncidentData::new(&grid, 6.0, uniform_directions(j_count), uniform_directions(q));
        let mut r = rng(seed);
        let truth: Vec<c64> = (0..ops.m())
            .map(|_| c64::new(r.gen_range(-0.3..0.3), r.gen_range(-0.1..0.1)))
            .collect();
        let (exact, _) = synthesize(&ops, &truth, &incident).unwrap();
        let data = add_noise(&exact, 0.05, seed).unwrap();
        let t = ops.dense_t();
        let tinf = ops.tinf_entries().to_vec();
        let m_len = ops.m();
        let svd = TinfSvd::compute(&ops);
        let weights = CsiWeights::uniform(j_count, 0.7, 1.3);
        Setup {
            dense: DenseOps::new(t.clone(), tinf.clone(), m_len, q),
            t,
            tinf,
            m_len,
            q,
            j_count,
            incident,
            data,
            weights,
            svd,
        }
    }
}

pub fn matvec(a: &[c64], rows: usize, cols: usize, x: &[c64]) -> Vec<c64> {
    (0..rows)
        .map(|i| (0..cols).map(|k| a[i * cols + k] * x[k]).sum())
        .collect()
}

pub fn matvec_adj(a: &[c64], rows: usize, cols: usize, y: &[c64]) -> Vec<c64> {
    (0..cols)
        .map(|k| (0..rows).map(|i| a[i * cols + k].conj() * y[i]).sum())
        .collect()
}

pub fn dot(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn nrm2(x: &[c64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum()
}

/// Original CSI iteration state at fixed weights.
pub struct CsiTranscription {
    pub omegas: Vec<Vec<c64>>,
    pub m: Vec<c64>,
    g_prev: Vec<Option<Vec<c64>>>,
    v_prev: Vec<Option<Vec<c64>>>,
}

impl CsiTranscription {
    pub fn init(s: &Setup) -> Self {
        // back-propagation start and unregularized contrast update
        let omegas: Vec<Vec<c64>> = s
            .data
            .uinf
            .iter()
            .map(|ud| {
                let a = matvec_adj(&s.tinf, s.q, s.m_len, ud);
                let ta = matvec(&s.tinf, s.q, s.m_len, &a);
                let scale = nrm2(&a) / nrm2(&ta);
                a.into_iter().map(|x| scale * x).collect()
            })
            .collect();
        let m = Self::contrast(s, &omegas, &vec![c64::new(0.0, 0.0); s.m_len]);
        CsiTranscription {
            omegas,
            m,
            g_prev: vec![None; s.j_count],
            v_prev: vec![None; s.j_count],
        }
    }

    pub fn contrast(s: &Setup, omegas: &[Vec<c64>], m_prev: &[c64]) -> Vec<c64> {
        (0..s.m_len)
            .map(|l| {
                let mut num = c64::new(0.0, 0.0);
                let mut den = 0.0;
                for j in 0..omegas.len() {
                    let tw = matvec(&s.t, s.m_len, s.m_len, &omegas[j]);
                    let u = s.incident.ui[j][l] + tw[l];
                    num += s.weights.eta_s[j] * u.conj() * omegas[j][l];
                    den += s.weights.eta_s[j] * u.norm_sqr();
                }
                if den == 0.0 {
                    m_prev[l]
                } else {
                    num / den
                }
            })
            .collect()
    }

    pub fn iterate(&mut self, s: &Setup) {
        for j in 0..s.j_count {
            // gradient of F_j at (ω_j, m)
            let tw = matvec(&s.t, s.m_len, s.m_len, &self.omegas[j]);
            let e_s: Vec<c64> = (0..s.m_len)
                .map(|l| self.m[l] * (s.incident.ui[j][l] + tw[l]) - self.omegas[j][l])
                .collect();
            let tinf_w = matvec(&s.tinf, s.q, s.m_len, &self.omegas[j]);
            let e_d: Vec<c64> = s.data.uinf[j]
                .iter()
                .zip(&tinf_w)
                .map(|(d, t)| d - t)
                .collect();
            let me: Vec<c64> = self
                .m
                .iter()
                .zip(&e_s)
                .map(|(mi, e)| mi.conj() * e)
                .collect();
            let t_adj = matvec_adj(&s.t, s.m_len, s.m_len, &me);
            let tinf_adj = matvec_adj(&s.tinf, s.q, s.m_len, &e_d);
            let g: Vec<c64> = (0..s.m_len)
                .map(|l| {
                    2.0 * s.weights.eta_s[j] * (t_adj[l] - e_s[l])
                        - 2.0 * s.weights.eta_d[j] * tinf_adj[l]
                })
                .collect();

            // Polak–Ribière direction
            let v: Vec<c64> = match (&self.g_prev[j], &self.v_prev[j]) {
                (Some(gp), Some(vp)) if nrm2(gp) > 0.0 => {
                    let diff: Vec<c64> = g.iter().zip(gp).map(|(a, b)| a - b).collect();
                    let beta = dot(&g, &diff).re / nrm2(gp);
                    g.iter().zip(vp).map(|(gi, vi)| gi + beta * vi).collect()
                }
                _ => g.clone(),
            };

            // exact unregularized line search
            let tv = matvec(&s.t, s.m_len, s.m_len, &v);
            let a: Vec<c64> = (0..s.m_len).map(|l| v[l] - self.m[l] * tv[l]).collect();
            let b = matvec(&s.tinf, s.q, s.m_len, &v);
            let denom = s.weights.eta_s[j] * nrm2(&a) + s.weights.eta_d[j] * nrm2(&b);
            let step =
                (s.weights.eta_s[j] * dot(&e_s, &a) + s.weights.eta_d[j] * dot(&e_d, &b)) / denom;
            for l in 0..s.m_len {
                self.omegas[j][l] += step * v[l];
            }
            self.g_prev[j] = Some(g);
            self.v_prev[j] = Some(v);
        }
        self.m = Self::contrast(s, &self.omegas, &self.m);
    }
}

/// Original SOM iteration on explicit matrices, sharing only the singular
/// system with the library.
pub struct SomTranscription {
    pub vn: Vec<Vec<c64>>, // explicit complement columns
    pub omega_s: Vec<Vec<c64>>,
    pub alphas: Vec<Vec<c64>>,
    pub m: Vec<c64>,
    g_prev: Vec<Option<Vec<c64>>>,
    v_prev: Vec<Option<Vec<c64>>>,
}

impl SomTranscription {
    pub fn init(s: &Setup, l_alpha: usize) -> Self {
        let comp = s.svd.complement(l_alpha).unwrap();
        let vn = comp.materialize();
        let omega_s: Vec<Vec<c64>> = s
            .data
            .uinf
            .iter()
            .map(|ud| {
                let mut w = vec![c64::new(0.0, 0.0); s.m_len];
                for k in 0..l_alpha {
                    let coeff = dot(ud, &s.svd.u[k]) / s.svd.lambda[k];
                    for l in 0..s.m_len {
                        w[l] += coeff * s.svd.v[k][l];
                    }
                }
                w
            })
            .collect();
        let m = CsiTranscription::contrast(s, &omega_s, &vec![c64::new(0.0, 0.0); s.m_len]);
        let dim = vn.len();
        SomTranscription {
            vn,
            omega_s,
            alphas: vec![vec![c64::new(0.0, 0.0); dim]; s.j_count],
            m,
            g_prev: vec![None; s.j_count],
            v_prev: vec![None; s.j_count],
        }
    }

    pub fn omega(&self, j: usize, m_len: usize) -> Vec<c64> {
        let mut w = self.omega_s[j].clone();
        for (i, col) in self.vn.iter().enumerate() {
            for l in 0..m_len {
                w[l] += self.alphas[j][i] * col[l];
            }
        }
        w
    }

    pub fn iterate(&mut self, s: &Setup) {
        let dim = self.vn.len();
        for j in 0..s.j_count {
            let omega = self.omega(j, s.m_len);
            let tw = matvec(&s.t, s.m_len, s.m_len, &omega);
            let e_s: Vec<c64> = (0..s.m_len)
                .map(|l| self.m[l] * (s.incident.ui[j][l] + tw[l]) - omega[l])
                .collect();
            let tinf_w = matvec(&s.tinf, s.q, s.m_len, &omega);
            let e_d: Vec<c64> = s.data.uinf[j]
                .iter()
                .zip(&tinf_w)
                .map(|(d, t)| d - t)
                .collect();
            let me: Vec<c64> = self
                .m
                .iter()
                .zip(&e_s)
                .map(|(mi, e)| mi.conj() * e)
                .collect();
            let t_adj = matvec_adj(&s.t, s.m_len, s.m_len, &me);
            let tinf_adj = matvec_adj(&s.tinf, s.q, s.m_len, &e_d);
            let g_omega: Vec<c64> = (0..s.m_len)
                .map(|l| {
                    2.0 * s.weights.eta_s[j] * (t_adj[l] - e_s[l])
                        - 2.0 * s.weights.eta_d[j] * tinf_adj[l]
                })
                .collect();
            let g: Vec<c64> = self.vn.iter().map(|col| dot(&g_omega, col)).collect();

            let rho: Vec<c64> = match (&self.g_prev[j], &self.v_prev[j]) {
                (Some(gp), Some(vp)) if nrm2(gp) > 0.0 => {
                    let diff: Vec<c64> = g.iter().zip(gp).map(|(a, b)| a - b).collect();
                    let beta = dot(&g, &diff).re / nrm2(gp);
                    g.iter().zip(vp).map(|(gi, vi)| gi + beta * vi).collect()
                }
                _ => g.clone(),
            };

            // w = V^n ρ, then the same line search as CSI in ω-space
            let mut w = vec![c64::new(0.0, 0.0); s.m_len];
            for (i, col) in self.vn.iter().enumerate() {
                for l in 0..s.m_len {
                    w[l] += rho[i] * col[l];
                }
            }
            let tv = matvec(&s.t, s.m_len, s.m_len, &w);
            let a: Vec<c64> = (0..s.m_len).map(|l| w[l] - self.m[l] * tv[l]).collect();
            let b = matvec(&s.tinf, s.q, s.m_len, &w);
            let denom = s.weights.eta_s[j] * nrm2(&a) + s.weights.eta_d[j] * nrm2(&b);
            let step =
                (s.weights.eta_s[j] * dot(&e_s, &a) + s.weights.eta_d[j] * dot(&e_d, &b)) / denom;
            for i in 0..dim {
                self.alphas[j][i] += step * rho[i];
            }
            self.g_prev[j] = Some(g);
            self.v_prev[j] = Some(rho);
        }
        let omegas: Vec<Vec<c64>> = (0..s.j_count).map(|j| self.omega(j, s.m_len)).collect();
        self.m = CsiTranscription::contrast(s, &omegas, &self.m);
    }
}
