//! Contrast source inversion with iterate-proximal `ℓ1` regularization.
//!
//! One iteration updates every contrast source `ω_j` along a Polak–Ribière
//! conjugate gradient direction with a soft-thresholded closed-form step, then
//! solves the per-pixel LASSO for the contrast `m`. With `γ = β = 0` the
//! iteration is the classic CSI method; with positive parameters each update
//! is the exact minimizer of its regularized subproblem, which yields the
//! descent inequalities the diagnostics verify.

use rayon::prelude::*;

use crate::diagnostics::{relative_error, IterationRecord};
use crate::error::Result;
use crate::forward::{FarFieldData, IncidentData};
use crate::numeric::{c64, inner_unchecked, norm_l1, norm_linf, norm_sq, soft_threshold};
use crate::operators::ScatterOps;

/// Constant positive weights `η_{s,j}`, `η_{d,j}` of the objective.
#[derive(Debug, Clone)]
pub struct CsiWeights {
    pub eta_s: Vec<f64>,
    pub eta_d: Vec<f64>,
}

impl CsiWeights {
    pub fn uniform(j: usize, eta_s: f64, eta_d: f64) -> Self {
        assert!(eta_s > 0.0 && eta_d > 0.0);
        CsiWeights {
            eta_s: vec![eta_s; j],
            eta_d: vec![eta_d; j],
        }
    }

    /// The constant-weight formulas evaluated at an initial contrast guess:
    /// `η_s = (Σ_j ‖m⁰⊙uⁱ_j‖²)⁻¹`, `η_d = (Σ_j ‖u^{∞,δ}_j‖²)⁻¹`.
    /// A zero denominator (zero data or zero initial contrast) falls back to
    /// weight 1 so the degenerate all-zero problem stays well defined.
    pub fn from_initial_guess(m0: &[c64], incident: &IncidentData, data: &FarFieldData) -> Self {
        let s_denom: f64 = incident
            .ui
            .iter()
            .map(|ui| {
                ui.iter()
                    .zip(m0)
                    .map(|(u, m)| (m * u).norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        let d_denom: f64 = data.uinf.iter().map(|u| norm_sq(u)).sum();
        let eta_s = if s_denom > 0.0 { 1.0 / s_denom } else { 1.0 };
        let eta_d = if d_denom > 0.0 { 1.0 / d_denom } else { 1.0 };
        CsiWeights::uniform(incident.j(), eta_s, eta_d)
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationStatus {
    /// `‖∇Ψ‖∞ ≤ 2ε` reached.
    Converged,
    /// Iteration cap hit.
    MaxIters,
    /// Objective change below 1e-15 for 100 consecutive iterations.
    Stagnated,
}

impl TerminationStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationStatus::Converged => "converged",
            TerminationStatus::MaxIters => "max_iters",
            TerminationStatus::Stagnated => "stagnated",
        }
    }
}

/// Loop controls shared by IRCSI and IRSOM.
#[derive(Debug, Clone)]
pub struct RunParams {
    pub gamma: f64,
    pub beta: f64,
    /// Stationarity target; termination at `‖∇Ψ‖∞ ≤ 2ε`. Use `max(γL, β)`.
    pub eps: f64,
    pub max_iters: usize,
    /// Ground truth for the per-iteration relative error column, if known.
    pub truth: Option<Vec<c64>>,
}

impl RunParams {
    pub fn new(gamma: f64, beta: f64, norm_equiv_l: f64, max_iters: usize) -> Self {
        assert!(gamma >= 0.0 && beta >= 0.0);
        RunParams {
            gamma,
            beta,
            eps: (gamma * norm_equiv_l).max(beta),
            max_iters,
            truth: None,
        }
    }

    pub fn with_truth(mut self, truth: Vec<c64>) -> Self {
        self.truth = Some(truth);
        self
    }
}

const STAGNATION_TOL: f64 = 1e-15;
const STAGNATION_WINDOW: usize = 100;

/// Final iterate plus the diagnostics trail.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub m: Vec<c64>,
    /// Contrast sources `ω_j` (for IRSOM: reconstructed `ω^s_j + V^n α_j`).
    pub omegas: Vec<Vec<c64>>,
    pub records: Vec<IterationRecord>,
    pub status: TerminationStatus,
    pub iterations: usize,
    pub final_grad_inf: f64,
}

/// The CSI problem instance: operators, data, and weights.
pub struct CsiProblem<'a, O: ScatterOps> {
    pub ops: &'a O,
    pub incident: &'a IncidentData,
    pub data: &'a FarFieldData,
    pub weights: CsiWeights,
}

/// Per-incidence residuals evaluated at `(ω, m)` from the cached products
/// `Tω` and `T∞ω`.
pub(crate) fn residuals(
    m: &[c64],
    ui: &[c64],
    omega: &[c64],
    t_omega: &[c64],
    tinf_omega: &[c64],
    uinf: &[c64],
) -> (Vec<c64>, Vec<c64>) {
    let e_s = (0..m.len())
        .map(|l| m[l] * (ui[l] + t_omega[l]) - omega[l])
        .collect();
    let e_d = uinf.iter().zip(tinf_omega).map(|(d, t)| d - t).collect();
    (e_s, e_d)
}

impl<'a, O: ScatterOps> CsiProblem<'a, O> {
    pub fn new(
        ops: &'a O,
        incident: &'a IncidentData,
        data: &'a FarFieldData,
        weights: CsiWeights,
    ) -> Self {
        assert_eq!(incident.j(), data.uinf.len());
        assert_eq!(weights.eta_s.len(), incident.j());
        CsiProblem {
            ops,
            incident,
            data,
            weights,
        }
    }

    pub fn j(&self) -> usize {
        self.incident.j()
    }

    /// `F^csi(ω, m) = Σ_j η_s‖E_{s,j}‖² + η_d‖E_{d,j}‖²`.
    pub fn objective(&self, m: &[c64], omegas: &[Vec<c64>]) -> f64 {
        (0..self.j())
            .map(|j| {
                let t_omega = self.ops.apply_t(&omegas[j]);
                let tinf_omega = self.ops.apply_tinf(&omegas[j]);
                self.objective_j_cached(m, &omegas[j], &t_omega, &tinf_omega, j)
            })
            .sum()
    }

    fn objective_j_cached(
        &self,
        m: &[c64],
        omega: &[c64],
        t_omega: &[c64],
        tinf_omega: &[c64],
        j: usize,
    ) -> f64 {
        let (e_s, e_d) = residuals(
            m,
            &self.incident.ui[j],
            omega,
            t_omega,
            tinf_omega,
            &self.data.uinf[j],
        );
        self.weights.eta_s[j] * norm_sq(&e_s) + self.weights.eta_d[j] * norm_sq(&e_d)
    }

    /// `∇_{ω_j} F^csi = 2η_s (D(m)T − I)* E_{s,j} − 2η_d (T∞)* E_{d,j}`.
    pub fn gradient_omega(&self, m: &[c64], omega_j: &[c64], j: usize) -> Vec<c64> {
        let t_omega = self.ops.apply_t(omega_j);
        let tinf_omega = self.ops.apply_tinf(omega_j);
        self.gradient_omega_cached(m, omega_j, &t_omega, &tinf_omega, j)
    }

    fn gradient_omega_cached(
        &self,
        m: &[c64],
        omega_j: &[c64],
        t_omega: &[c64],
        tinf_omega: &[c64],
        j: usize,
    ) -> Vec<c64> {
        let (e_s, e_d) = residuals(
            m,
            &self.incident.ui[j],
            omega_j,
            t_omega,
            tinf_omega,
            &self.data.uinf[j],
        );
        self.gradient_from_residuals(m, &e_s, &e_d, j)
    }

    /// Shared with the SOM chain rule: the ω-space gradient given residuals.
    pub(crate) fn gradient_from_residuals(
        &self,
        m: &[c64],
        e_s: &[c64],
        e_d: &[c64],
        j: usize,
    ) -> Vec<c64> {
        // (D(m)T - I)* E = T*(conj(m)⊙E) - E
        let me: Vec<c64> = m.iter().zip(e_s).map(|(mi, e)| mi.conj() * e).collect();
        let t_adj = self.ops.apply_t_adj(&me);
        let tinf_adj = self.ops.apply_tinf_adj(e_d);
        let (es2, ed2) = (2.0 * self.weights.eta_s[j], 2.0 * self.weights.eta_d[j]);
        (0..m.len())
            .map(|l| es2 * (t_adj[l] - e_s[l]) - ed2 * tinf_adj[l])
            .collect()
    }

    /// `∇_m F^csi` with the total fields `u_j = uⁱ_j + Tω_j` fixed by `ω`.
    pub fn gradient_m(&self, m: &[c64], us: &[Vec<c64>], omegas: &[Vec<c64>]) -> Vec<c64> {
        let mut g = vec![c64::new(0.0, 0.0); m.len()];
        for j in 0..self.j() {
            let es2 = 2.0 * self.weights.eta_s[j];
            for l in 0..m.len() {
                g[l] += es2 * us[j][l].conj() * (m[l] * us[j][l] - omegas[j][l]);
            }
        }
        g
    }

    /// Soft-thresholded closed-form step along `v_j` for the regularized line
    /// problem `min_s F_j(ω_j + s v_j, m) + γ‖s v_j‖₁`.
    pub fn step_size(
        &self,
        m: &[c64],
        e_s: &[c64],
        e_d: &[c64],
        v_j: &[c64],
        t_v: &[c64],
        tinf_v: &[c64],
        j: usize,
        gamma: f64,
    ) -> c64 {
        // a = v - m⊙Tv is the (negated) state-residual direction
        let a: Vec<c64> = (0..m.len()).map(|l| v_j[l] - m[l] * t_v[l]).collect();
        let na = norm_sq(&a);
        let nb = norm_sq(tinf_v);
        let (eta_s, eta_d) = (self.weights.eta_s[j], self.weights.eta_d[j]);
        let denom = eta_s * na + eta_d * nb;
        if denom == 0.0 {
            return c64::new(0.0, 0.0);
        }
        let z = (eta_s * inner_unchecked(e_s, &a) + eta_d * inner_unchecked(e_d, tinf_v)) / denom;
        let tau = gamma * norm_l1(v_j) / (2.0 * denom);
        soft_threshold(z, tau)
    }

    /// Back-propagation initialization: spectrally scaled `(T∞)*` applied to
    /// the data, followed by the unregularized contrast update.
    pub fn backprop_init(&self) -> (Vec<Vec<c64>>, Vec<c64>) {
        backprop_init(self.ops, self.incident, self.data, &self.weights.eta_s)
    }

    /// Run IRCSI (Algorithm 1); `γ = β = 0` reproduces the original CSI.
    pub fn run(&self, params: &RunParams) -> Result<RunResult> {
        let m_len = self.ops.m();
        let j_count = self.j();

        let (mut omegas, mut m) = self.backprop_init();
        let mut t_omegas: Vec<Vec<c64>> = omegas.par_iter().map(|w| self.ops.apply_t(w)).collect();
        let mut tinf_omegas: Vec<Vec<c64>> = omegas.iter().map(|w| self.ops.apply_tinf(w)).collect();

        let mut g_prev: Vec<Option<Vec<c64>>> = vec![None; j_count];
        let mut v_prev: Vec<Option<Vec<c64>>> = vec![None; j_count];

        let mut records = Vec::new();
        let mut status = TerminationStatus::MaxIters;
        let mut stagnant = 0usize;
        let mut last_objective = f64::INFINITY;
        let mut grad_inf = f64::INFINITY;
        let mut iterations = 0;

        for r in 0..params.max_iters {
            // residuals, objective, and gradients at (ω^r, m^r)
            let per_j: Vec<(Vec<c64>, Vec<c64>, f64, Vec<c64>)> = (0..j_count)
                .into_par_iter()
                .map(|j| {
                    let (e_s, e_d) = residuals(
                        &m,
                        &self.incident.ui[j],
                        &omegas[j],
                        &t_omegas[j],
                        &tinf_omegas[j],
                        &self.data.uinf[j],
                    );
                    let f_j = self.weights.eta_s[j] * norm_sq(&e_s)
                        + self.weights.eta_d[j] * norm_sq(&e_d);
                    let g_j = self.gradient_from_residuals(&m, &e_s, &e_d, j);
                    (e_s, e_d, f_j, g_j)
                })
                .collect();
            let f_start: f64 = per_j.iter().map(|t| t.2).sum();

            let us: Vec<Vec<c64>> = (0..j_count)
                .map(|j| {
                    (0..m_len)
                        .map(|l| self.incident.ui[j][l] + t_omegas[j][l])
                        .collect()
                })
                .collect();
            let gm = self.gradient_m(&m, &us, &omegas);
            grad_inf = per_j
                .iter()
                .map(|t| norm_linf(&t.3))
                .fold(norm_linf(&gm), f64::max);

            if grad_inf <= 2.0 * params.eps {
                status = TerminationStatus::Converged;
                break;
            }
            iterations = r + 1;

            // ω updates
            let mut step_l1_x = 0.0;
            let updates: Vec<(Vec<c64>, c64, Vec<c64>, Vec<c64>)> = (0..j_count)
                .into_par_iter()
                .map(|j| {
                    let g_j = &per_j[j].3;
                    let v_j = prcg_direction(
                        g_j,
                        g_prev[j].as_deref(),
                        v_prev[j].as_deref(),
                    );
                    let t_v = self.ops.apply_t(&v_j);
                    let tinf_v = self.ops.apply_tinf(&v_j);
                    let s = self.step_size(
                        &m,
                        &per_j[j].0,
                        &per_j[j].1,
                        &v_j,
                        &t_v,
                        &tinf_v,
                        j,
                        params.gamma,
                    );
                    (v_j, s, t_v, tinf_v)
                })
                .collect();
            for j in 0..j_count {
                let (v_j, s, t_v, tinf_v) = &updates[j];
                step_l1_x += params.gamma * s.norm() * norm_l1(v_j);
                for l in 0..m_len {
                    omegas[j][l] += s * v_j[l];
                    t_omegas[j][l] += s * t_v[l];
                }
                for (to, tv) in tinf_omegas[j].iter_mut().zip(tinf_v) {
                    *to += s * tv;
                }
                g_prev[j] = Some(per_j[j].3.clone());
                v_prev[j] = Some(v_j.clone());
            }

            // F(ω^{r+1}, m^r) for the x-descent slack
            let f_mid: f64 = (0..j_count)
                .map(|j| self.objective_j_cached(&m, &omegas[j], &t_omegas[j], &tinf_omegas[j], j))
                .sum();

            // contrast update (per-pixel LASSO)
            let us: Vec<Vec<c64>> = (0..j_count)
                .map(|j| {
                    (0..m_len)
                        .map(|l| self.incident.ui[j][l] + t_omegas[j][l])
                        .collect()
                })
                .collect();
            let m_new = update_m(&m, &us, &omegas, &self.weights.eta_s, params.beta);
            let step_l1_y = params.beta
                * m.iter()
                    .zip(&m_new)
                    .map(|(a, b)| (a - b).norm())
                    .sum::<f64>();
            let m_l1_change: f64 = m.iter().zip(&m_new).map(|(a, b)| (a - b).norm()).sum();
            m = m_new;

            let f_end: f64 = (0..j_count)
                .map(|j| self.objective_j_cached(&m, &omegas[j], &t_omegas[j], &tinf_omegas[j], j))
                .sum();

            records.push(IterationRecord {
                iter: r,
                objective: f_end,
                grad_inf,
                step_l1_x,
                step_l1_y,
                descent_slack_x: (f_start - f_mid) - step_l1_x,
                descent_slack_y: (f_mid - f_end) - step_l1_y,
                rel_error: params
                    .truth
                    .as_deref()
                    .map(|truth| relative_error(&m, truth).unwrap_or(f64::NAN)),
            });
            let _ = m_l1_change;

            if (last_objective - f_end).abs() < STAGNATION_TOL {
                stagnant += 1;
                if stagnant >= STAGNATION_WINDOW {
                    status = TerminationStatus::Stagnated;
                    break;
                }
            } else {
                stagnant = 0;
            }
            last_objective = f_end;
        }

        Ok(RunResult {
            m,
            omegas,
            records,
            status,
            iterations,
            final_grad_inf: grad_inf,
        })
    }
}

/// Polak–Ribière conjugate gradient direction with restart on a vanished
/// previous gradient.
pub fn prcg_direction(g_now: &[c64], g_prev: Option<&[c64]>, v_prev: Option<&[c64]>) -> Vec<c64> {
    match (g_prev, v_prev) {
        (Some(gp), Some(vp)) => {
            let denom = norm_sq(gp);
            if denom == 0.0 {
                return g_now.to_vec();
            }
            let diff: Vec<c64> = g_now.iter().zip(gp).map(|(a, b)| a - b).collect();
            let beta = inner_unchecked(g_now, &diff).re / denom;
            g_now
                .iter()
                .zip(vp)
                .map(|(g, v)| g + beta * v)
                .collect()
        }
        _ => g_now.to_vec(),
    }
}

/// Exact solution of the per-pixel LASSO contrast subproblem
/// `min_m Σ_j η_s‖m⊙u_j − ω_j‖² + β‖m − m_prev‖₁`; `β = 0` recovers the
/// plain quotient update. Pixels where every `u_j` vanishes keep their value.
pub fn update_m(
    m_prev: &[c64],
    us: &[Vec<c64>],
    omegas: &[Vec<c64>],
    eta_s: &[f64],
    beta: f64,
) -> Vec<c64> {
    let m_len = m_prev.len();
    (0..m_len)
        .map(|l| {
            let mut denom = 0.0;
            let mut num = c64::new(0.0, 0.0);
            for j in 0..us.len() {
                let u = us[j][l];
                denom += eta_s[j] * u.norm_sqr();
                num += eta_s[j] * u.conj() * omegas[j][l];
            }
            if denom == 0.0 {
                m_prev[l]
            } else {
                let z = num / denom;
                let tau = beta / (2.0 * denom);
                m_prev[l] + soft_threshold(z - m_prev[l], tau)
            }
        })
        .collect()
}

/// Back-propagation: `ω⁰_j = [‖(T∞)*uᵟ_j‖² / ‖T∞(T∞)*uᵟ_j‖²]·(T∞)*uᵟ_j`,
/// then `m⁰` from the unregularized contrast update.
pub fn backprop_init<O: ScatterOps>(
    ops: &O,
    incident: &IncidentData,
    data: &FarFieldData,
    eta_s: &[f64],
) -> (Vec<Vec<c64>>, Vec<c64>) {
    let m_len = ops.m();
    let omegas: Vec<Vec<c64>> = data
        .uinf
        .iter()
        .map(|ud| {
            let a = ops.apply_tinf_adj(ud);
            let ta = ops.apply_tinf(&a);
            let denom = norm_sq(&ta);
            let scale = if denom == 0.0 { 0.0 } else { norm_sq(&a) / denom };
            a.into_iter().map(|x| scale * x).collect()
        })
        .collect();
    let us: Vec<Vec<c64>> = omegas
        .iter()
        .zip(&incident.ui)
        .map(|(w, ui)| {
            let tw = ops.apply_t(w);
            (0..m_len).map(|l| ui[l] + tw[l]).collect()
        })
        .collect();
    let m0 = update_m(&vec![c64::new(0.0, 0.0); m_len], &us, &omegas, eta_s, 0.0);
    (omegas, m0)
}
