//! Experiment configuration: JSON document plus CLI flag overrides.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Which reconstruction algorithm to run. `csi` and `som` are the original
/// methods, i.e. the regularized variants with `γ = β = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Csi,
    Som,
    Ircsi,
    Irsom,
}

impl Algorithm {
    pub fn is_regularized(self) -> bool {
        matches!(self, Algorithm::Ircsi | Algorithm::Irsom)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::Csi => "csi",
            Algorithm::Som => "som",
            Algorithm::Ircsi => "ircsi",
            Algorithm::Irsom => "irsom",
        };
        f.write_str(s)
    }
}

/// Ground-truth phantom selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Phantom {
    /// Radial bump `e^{-1/(1-|x|²)}` supported on the unit disk.
    Bump,
    /// Grayscale PGM image stretched over the region (requires `image_path`).
    Image,
}

/// Optional replacement of the data-derived objective weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaOverrides {
    /// One value per incidence, or a single value broadcast to all.
    pub eta_s: Option<Vec<f64>>,
    pub eta_d: Option<Vec<f64>>,
}

/// Full description of one experiment; a pipeline run is a pure function of
/// this struct, so the manifest echoes every field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Wave number κ.
    pub kappa: f64,
    /// Number of incident directions, uniformly spaced on the unit circle.
    pub j: usize,
    /// Number of observation directions, uniformly spaced on the unit circle.
    pub q: usize,
    /// Synthesis grid size (data generation).
    pub n_synth: usize,
    /// Inversion grid size; kept different from `n_synth` to avoid the
    /// inverse crime.
    pub n_inv: usize,
    pub algorithm: Algorithm,
    /// `ℓ1` weight on the contrast update.
    pub beta: f64,
    /// `ℓ1` weight on the source update; defaults to `beta / n_inv`.
    pub gamma: Option<f64>,
    /// Norm-equivalence constant `L` with `‖ξ‖₁ ≤ L‖ξ‖`; defaults to `n_inv`,
    /// so `γL = β` and the stationarity target is `ε = β`.
    pub l: Option<f64>,
    /// Retained singular subspace dimension for SOM/IRSOM.
    pub l_alpha: usize,
    /// Relative measurement noise per incidence.
    pub noise_rel: f64,
    /// Noise RNG seed; same config + seed gives byte-identical outputs.
    pub seed: u64,
    pub max_iters: usize,
    pub phantom: Phantom,
    /// PGM file for the image phantom.
    pub image_path: Option<PathBuf>,
    /// Contrast value an image gray level of 255 maps to.
    pub image_scale: f64,
    pub eta_overrides: Option<EtaOverrides>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kappa: 6.0,
            j: 16,
            q: 16,
            n_synth: 128,
            n_inv: 32,
            algorithm: Algorithm::Ircsi,
            beta: 1e-4,
            gamma: None,
            l: None,
            l_alpha: 10,
            noise_rel: 0.05,
            seed: 0,
            max_iters: 5000,
            phantom: Phantom::Bump,
            image_path: None,
            image_scale: 1.0,
            eta_overrides: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Effective `γ`: the stored value, or `β/N_inv` (0 for the original
    /// algorithms, which carry no regularization).
    pub fn gamma(&self) -> f64 {
        if !self.algorithm.is_regularized() {
            return 0.0;
        }
        self.gamma.unwrap_or(self.beta / self.n_inv as f64)
    }

    /// Effective `β` (0 for the original algorithms).
    pub fn beta(&self) -> f64 {
        if self.algorithm.is_regularized() {
            self.beta
        } else {
            0.0
        }
    }

    pub fn l(&self) -> f64 {
        self.l.unwrap_or(self.n_inv as f64)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.kappa > 0.0) {
            return Err("kappa must be positive".into());
        }
        if self.j == 0 || self.q == 0 {
            return Err("j and q must be positive".into());
        }
        if self.n_synth == 0 || self.n_inv == 0 {
            return Err("grid sizes must be positive".into());
        }
        if self.beta < 0.0 || self.gamma.map_or(false, |g| g < 0.0) {
            return Err("beta and gamma must be nonnegative".into());
        }
        if self.noise_rel < 0.0 {
            return Err("noise_rel must be nonnegative".into());
        }
        if self.l.map_or(false, |l| !(l > 0.0)) {
            return Err("l must be positive".into());
        }
        if self.l_alpha == 0 {
            return Err("l_alpha must be positive".into());
        }
        if self.max_iters == 0 {
            return Err("max_iters must be positive".into());
        }
        if self.phantom == Phantom::Image && self.image_path.is_none() {
            return Err("image phantom requires image_path".into());
        }
        if let Some(eta) = &self.eta_overrides {
            for (name, v) in [("eta_s", &eta.eta_s), ("eta_d", &eta.eta_d)] {
                if let Some(v) = v {
                    if v.len() != 1 && v.len() != self.j {
                        return Err(format!("{name} override must have 1 or {} values", self.j));
                    }
                    if v.iter().any(|x| !(*x > 0.0)) {
                        return Err(format!("{name} override values must be positive"));
                    }
                }
            }
        }
        if self.n_synth == self.n_inv {
            eprintln!(
                "warning: n_synth == n_inv ({}): synthesis and inversion share a grid \
                 (inverse crime)",
                self.n_inv
            );
        }
        Ok(())
    }
}
