//! Forward solve of the discrete state equation, far-field synthesis, and
//! calibrated noise injection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::krylov::{bicgstab, DEFAULT_MAX_ITERS, DEFAULT_RTOL};
use crate::numeric::{c64, norm_l2};
use crate::operators::{incident_fields, ScatterOps};

/// Incident plane-wave bundle: directions, observation directions, and the
/// sampled fields `uⁱ_j` on the grid.
#[derive(Debug, Clone)]
pub struct IncidentData {
    pub dirs: Vec<(f64, f64)>,
    pub obs_dirs: Vec<(f64, f64)>,
    pub ui: Vec<Vec<c64>>,
}

impl IncidentData {
    pub fn new(grid: &Grid, kappa: f64, dirs: Vec<(f64, f64)>, obs_dirs: Vec<(f64, f64)>) -> Self {
        let ui = incident_fields(grid, kappa, &dirs);
        IncidentData { dirs, obs_dirs, ui }
    }

    pub fn j(&self) -> usize {
        self.dirs.len()
    }
}

/// Far-field measurements per incidence, exact or noisy.
#[derive(Debug, Clone)]
pub struct FarFieldData {
    /// `u∞_j` (or `u^{∞,δ}_j`), one `C^Q` vector per incidence.
    pub uinf: Vec<Vec<c64>>,
    /// Relative noise level used to generate the data (0 for exact data).
    pub noise_level: f64,
    /// Absolute noise bound `δ = noise_level · max_j ‖u∞_j‖`.
    pub delta: f64,
}

/// Solve `[I − T D(m)] u = uⁱ` for the total field of one incidence.
///
/// The residual contract is `‖u − uⁱ − T(m ⊙ u)‖ ≤ rtol·‖uⁱ‖` with
/// `rtol = 1e-10`; the contrast source is then `ω = m ⊙ u`.
pub fn solve_state<O: ScatterOps>(ops: &O, m: &[c64], ui: &[c64]) -> Result<Vec<c64>> {
    if m.len() != ops.m() || ui.len() != ops.m() {
        return Err(Error::Contract("solve_state dimension mismatch".into()));
    }
    let apply = |u: &[c64]| {
        let mu: Vec<c64> = m.iter().zip(u).map(|(mi, ui)| mi * ui).collect();
        let tmu = ops.apply_t(&mu);
        u.iter().zip(&tmu).map(|(ui, ti)| ui - ti).collect()
    };
    bicgstab(apply, ui, DEFAULT_RTOL, DEFAULT_MAX_ITERS)
}

/// `u∞_j = T∞ ω_j` for one contrast source.
pub fn far_field<O: ScatterOps>(ops: &O, omega: &[c64]) -> Vec<c64> {
    ops.apply_tinf(omega)
}

/// Solve the state equation for every incidence and return the exact
/// far-field data together with the contrast sources `ω_j = m ⊙ u_j`.
pub fn synthesize<O: ScatterOps>(
    ops: &O,
    m: &[c64],
    incident: &IncidentData,
) -> Result<(FarFieldData, Vec<Vec<c64>>)> {
    let omegas: Vec<Vec<c64>> = incident
        .ui
        .par_iter()
        .map(|ui| {
            let u = solve_state(ops, m, ui)?;
            Ok(m.iter().zip(&u).map(|(mi, ui)| mi * ui).collect())
        })
        .collect::<Result<_>>()?;
    let uinf: Vec<Vec<c64>> = omegas.iter().map(|w| far_field(ops, w)).collect();
    Ok((
        FarFieldData {
            uinf,
            noise_level: 0.0,
            delta: 0.0,
        },
        omegas,
    ))
}

/// Add complex Gaussian noise rescaled so each incidence is perturbed by
/// exactly `rel` in relative `ℓ2` norm; records `δ = rel·max_j ‖u∞_j‖`.
/// Deterministic for a given seed.
pub fn add_noise(ff: &FarFieldData, rel: f64, seed: u64) -> Result<FarFieldData> {
    if rel < 0.0 {
        return Err(Error::Contract("noise level must be nonnegative".into()));
    }
    let max_norm = ff
        .uinf
        .iter()
        .map(|u| norm_l2(u))
        .fold(0.0f64, f64::max);
    if rel == 0.0 {
        return Ok(FarFieldData {
            uinf: ff.uinf.clone(),
            noise_level: 0.0,
            delta: 0.0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let uinf = ff
        .uinf
        .iter()
        .map(|u| {
            let g: Vec<c64> = (0..u.len())
                .map(|_| c64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
                .collect();
            let gnorm = norm_l2(&g);
            let scale = if gnorm == 0.0 {
                0.0
            } else {
                rel * norm_l2(u) / gnorm
            };
            u.iter().zip(&g).map(|(ui, gi)| ui + scale * gi).collect()
        })
        .collect();
    Ok(FarFieldData {
        uinf,
        noise_level: rel,
        delta: rel * max_norm,
    })
}
