//! File outputs: per-iteration CSV, PGM rendering of `|m|`, raw complex
//! dumps, and the JSON run manifest.

use std::fs;
use std::io::Write;
use std::path::Path;

use scatterkit::c64;
use scatterkit::diagnostics::{IterationRecord, SelectionReport, CSV_HEADER};
use serde::Serialize;

use crate::config::ExperimentConfig;

pub fn write_csv(path: &Path, records: &[IterationRecord]) -> std::io::Result<()> {
    let mut out = String::with_capacity(records.len() * 160 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    fs::write(path, out)
}

/// Render `|m|` as an 8-bit PGM, mapping `[0, vmax]` linearly to `[0, 255]`.
/// Image row 0 is the top of the region (largest second coordinate).
pub fn write_pgm(path: &Path, n: usize, m: &[c64], vmax: f64) -> std::io::Result<()> {
    assert_eq!(m.len(), n * n);
    let mut bytes = Vec::with_capacity(n * n + 32);
    bytes.extend_from_slice(format!("P5\n{n} {n}\n255\n").as_bytes());
    for row in 0..n {
        let a2 = n - 1 - row;
        for col in 0..n {
            let v = m[col * n + a2].norm();
            let g = if vmax > 0.0 {
                (v / vmax * 255.0).round().clamp(0.0, 255.0)
            } else {
                0.0
            };
            bytes.push(g as u8);
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)
}

/// Raw dump of complex values as interleaved little-endian 64-bit floats
/// (re, im per entry) in the given order.
pub fn write_raw(path: &Path, values: &[c64]) -> std::io::Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 16);
    for v in values {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, bytes)
}

/// Serializable mirror of [`SelectionReport`].
#[derive(Debug, Clone, Serialize)]
pub struct SelectionSummary {
    pub delta: f64,
    pub delta_csi: f64,
    pub delta_som: f64,
    pub eps_h: Option<f64>,
    pub tinf_adj_norm: f64,
    pub vhat_norm: f64,
    pub lambda_next: f64,
}

impl From<&SelectionReport> for SelectionSummary {
    fn from(r: &SelectionReport) -> Self {
        SelectionSummary {
            delta: r.delta,
            delta_csi: r.delta_csi,
            delta_som: r.delta_som,
            eps_h: r.eps_h,
            tinf_adj_norm: r.tinf_adj_norm,
            vhat_norm: r.vhat_norm,
            lambda_next: r.lambda_next,
        }
    }
}

/// Everything needed to interpret or re-run an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    /// Effective regularization parameters after defaults.
    pub gamma: f64,
    pub beta: f64,
    /// Stationarity target `ε = max(γL, β)`.
    pub epsilon: f64,
    /// `converged` / `max_iters` / `stagnated`, or `failed`.
    pub status: String,
    pub error: Option<String>,
    pub iterations: usize,
    pub final_grad_inf: Option<f64>,
    pub final_rel_error: Option<f64>,
    pub selection: Option<SelectionSummary>,
    /// `max |m†|` used as the PGM intensity scale.
    pub pgm_scale_max: Option<f64>,
    pub outputs: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text)
}
