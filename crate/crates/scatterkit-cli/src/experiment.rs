//! Experiment orchestration: synthesize → invert → diagnose → write files.

use std::fs;
use std::path::Path;

use scatterkit::csi::{CsiProblem, CsiWeights, RunParams, RunResult};
use scatterkit::diagnostics::{relative_error, selection_quantities, SelectionReport};
use scatterkit::forward::{add_noise, far_field, solve_state, synthesize, FarFieldData, IncidentData};
use scatterkit::operators::{uniform_directions, ScatteringOperators};
use scatterkit::phantoms::{bump_contrast, image_contrast, read_pgm_file};
use scatterkit::som::{build_split, SomProblem};
use scatterkit::svd::TinfSvd;
use scatterkit::{c64, Grid};

use crate::config::{Algorithm, ExperimentConfig, Phantom};
use crate::output::{
    write_csv, write_manifest, write_pgm, write_raw, Manifest, SelectionSummary,
};

pub enum RunError {
    /// Bad configuration or unreadable input; nothing was produced.
    Usage(String),
    /// The solver or an output write failed; a failure manifest was written
    /// when possible.
    Run(String),
}

fn phantom_on(cfg: &ExperimentConfig, grid: &Grid) -> Result<Vec<c64>, RunError> {
    match cfg.phantom {
        Phantom::Bump => Ok(bump_contrast(grid)),
        Phantom::Image => {
            let path = cfg.image_path.as_ref().expect("validated");
            let image = read_pgm_file(path).map_err(|e| RunError::Usage(e.to_string()))?;
            Ok(image_contrast(grid, &image, cfg.image_scale))
        }
    }
}

/// Far-field data from the synthesis grid: `(noisy, exact)`.
fn synthesize_data(cfg: &ExperimentConfig) -> Result<(FarFieldData, FarFieldData), RunError> {
    let grid = Grid::new(cfg.n_synth);
    let ops = ScatteringOperators::new(grid, cfg.kappa, &uniform_directions(cfg.q));
    let incident = IncidentData::new(
        &grid,
        cfg.kappa,
        uniform_directions(cfg.j),
        uniform_directions(cfg.q),
    );
    let truth = phantom_on(cfg, &grid)?;
    let (exact, _) = synthesize(&ops, &truth, &incident)
        .map_err(|e| RunError::Run(format!("synthesis failed: {e}")))?;
    let noisy = add_noise(&exact, cfg.noise_rel, cfg.seed)
        .map_err(|e| RunError::Run(format!("noise model failed: {e}")))?;
    Ok((noisy, exact))
}

fn apply_overrides(cfg: &ExperimentConfig, mut weights: CsiWeights) -> CsiWeights {
    if let Some(eta) = &cfg.eta_overrides {
        if let Some(v) = &eta.eta_s {
            weights.eta_s = broadcast(v, cfg.j);
        }
        if let Some(v) = &eta.eta_d {
            weights.eta_d = broadcast(v, cfg.j);
        }
    }
    weights
}

fn broadcast(v: &[f64], j: usize) -> Vec<f64> {
    if v.len() == 1 {
        vec![v[0]; j]
    } else {
        v.to_vec()
    }
}

/// Generate far-field data only and dump it alongside a manifest.
pub fn synth(cfg: &ExperimentConfig) -> Result<(), RunError> {
    cfg.validate().map_err(RunError::Usage)?;
    let (noisy, _) = synthesize_data(cfg)?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| RunError::Run(format!("cannot create output dir: {e}")))?;

    let stacked: Vec<c64> = noisy.uinf.iter().flatten().copied().collect();
    write_raw(&dir.join("farfield.raw"), &stacked)
        .map_err(|e| RunError::Run(format!("cannot write far-field dump: {e}")))?;

    let manifest = Manifest {
        config: cfg.clone(),
        gamma: cfg.gamma(),
        beta: cfg.beta(),
        epsilon: (cfg.gamma() * cfg.l()).max(cfg.beta()),
        status: "synthesized".into(),
        error: None,
        iterations: 0,
        final_grad_inf: None,
        final_rel_error: None,
        selection: None,
        pgm_scale_max: None,
        outputs: vec!["farfield.raw".into()],
    };
    write_manifest(&dir.join("manifest.json"), &manifest)
        .map_err(|e| RunError::Run(format!("cannot write manifest: {e}")))?;
    println!(
        "synthesized {}x{} far-field samples (delta {:.6e}) into {}",
        cfg.j,
        cfg.q,
        noisy.delta,
        dir.display()
    );
    Ok(())
}

/// Full pipeline: synthesize data, reconstruct, and write all artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Manifest, RunError> {
    cfg.validate().map_err(RunError::Usage)?;
    let (data, exact) = synthesize_data(cfg)?;

    let grid = Grid::new(cfg.n_inv);
    let ops = ScatteringOperators::new(grid, cfg.kappa, &uniform_directions(cfg.q));
    let incident = IncidentData::new(
        &grid,
        cfg.kappa,
        uniform_directions(cfg.j),
        uniform_directions(cfg.q),
    );
    let truth = phantom_on(cfg, &grid)?;

    // weights evaluated at the back-propagation initial guess, then overrides
    let pre = CsiProblem::new(&ops, &incident, &data, CsiWeights::uniform(cfg.j, 1.0, 1.0));
    let (_, m0) = pre.backprop_init();
    let weights = apply_overrides(cfg, CsiWeights::from_initial_guess(&m0, &incident, &data));

    let gamma = cfg.gamma();
    let beta = cfg.beta();
    let params = RunParams::new(gamma, beta, cfg.l(), cfg.max_iters).with_truth(truth.clone());

    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir)
        .map_err(|e| RunError::Run(format!("cannot create output dir: {e}")))?;

    let selection = selection_report(cfg, &ops, &incident, &data, &exact, &truth, &weights);

    let run: Result<RunResult, scatterkit::Error> = match cfg.algorithm {
        Algorithm::Csi | Algorithm::Ircsi => {
            CsiProblem::new(&ops, &incident, &data, weights).run(&params)
        }
        Algorithm::Som | Algorithm::Irsom => {
            let svd = TinfSvd::compute(&ops);
            build_split(&svd, &data, cfg.l_alpha)
                .and_then(|split| SomProblem::new(&ops, &incident, &data, weights, split).run(&params))
        }
    };

    let run = match run {
        Ok(r) => r,
        Err(e) => {
            let manifest = Manifest {
                config: cfg.clone(),
                gamma,
                beta,
                epsilon: params.eps,
                status: "failed".into(),
                error: Some(e.to_string()),
                iterations: 0,
                final_grad_inf: None,
                final_rel_error: None,
                selection: selection.as_ref().map(SelectionSummary::from),
                pgm_scale_max: None,
                outputs: vec![],
            };
            let _ = write_manifest(&dir.join("manifest.json"), &manifest);
            return Err(RunError::Run(format!("solver failed: {e}")));
        }
    };

    let vmax = truth.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let io = |e: std::io::Error| RunError::Run(format!("cannot write output: {e}"));
    write_csv(&dir.join("iterations.csv"), &run.records).map_err(io)?;
    write_pgm(&dir.join("reconstruction.pgm"), cfg.n_inv, &run.m, vmax).map_err(io)?;
    write_raw(&dir.join("reconstruction.raw"), &run.m).map_err(io)?;

    let manifest = Manifest {
        config: cfg.clone(),
        gamma,
        beta,
        epsilon: params.eps,
        status: run.status.as_str().into(),
        error: None,
        iterations: run.iterations,
        final_grad_inf: Some(run.final_grad_inf),
        final_rel_error: relative_error(&run.m, &truth).ok(),
        selection: selection.as_ref().map(SelectionSummary::from),
        pgm_scale_max: Some(vmax),
        outputs: vec![
            "iterations.csv".into(),
            "reconstruction.pgm".into(),
            "reconstruction.raw".into(),
        ],
    };
    write_manifest(&dir.join("manifest.json"), &manifest)
        .map_err(|e| RunError::Run(format!("cannot write manifest: {e}")))?;
    Ok(manifest)
}

/// The regularization-parameter selection quantities plus the discretization
/// residual `ε_h`; skipped (with a warning) when the subspace is unavailable.
fn selection_report(
    cfg: &ExperimentConfig,
    ops: &ScatteringOperators,
    incident: &IncidentData,
    data: &FarFieldData,
    exact: &FarFieldData,
    truth: &[c64],
    csi_weights: &CsiWeights,
) -> Option<SelectionReport> {
    let svd = TinfSvd::compute(ops);
    let split = match build_split(&svd, data, cfg.l_alpha) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("warning: selection quantities unavailable: {e}");
            return None;
        }
    };
    let som_w = scatterkit::som::som_weights(&split, data);
    let mut report =
        match selection_quantities(ops, &svd, cfg.l_alpha, csi_weights, &som_w, data.delta) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("warning: selection quantities unavailable: {e}");
                return None;
            }
        };
    report.eps_h = eps_h(ops, incident, exact, truth);
    Some(report)
}

/// `max_j ‖u∞_j − T∞ω†_j‖` with `ω†_j` solved on the inversion grid and
/// `u∞_j` taken from the (noise-free) synthesis grid.
fn eps_h(
    ops: &ScatteringOperators,
    incident: &IncidentData,
    exact: &FarFieldData,
    truth: &[c64],
) -> Option<f64> {
    let mut worst = 0.0f64;
    for (ui, uinf) in incident.ui.iter().zip(&exact.uinf) {
        let u = solve_state(ops, truth, ui).ok()?;
        let omega: Vec<c64> = truth.iter().zip(&u).map(|(m, u)| m * u).collect();
        let ff = far_field(ops, &omega);
        let d: f64 = ff
            .iter()
            .zip(uinf)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d);
    }
    Some(worst)
}

/// Run the experiment once per `β` and write a cross-run summary CSV.
pub fn sweep(cfg: &ExperimentConfig, betas: &[f64]) -> Result<usize, RunError> {
    if betas.is_empty() {
        return Err(RunError::Usage("sweep needs at least one beta".into()));
    }
    cfg.validate().map_err(RunError::Usage)?;
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| RunError::Run(format!("cannot create output dir: {e}")))?;

    let mut rows = vec!["beta,final_rel_error,final_grad_inf,iterations,terminated_by".to_string()];
    let mut failures = 0usize;
    for &beta in betas {
        let mut sub = cfg.clone();
        sub.beta = beta;
        sub.gamma = None;
        sub.output_dir = cfg.output_dir.join(format!("beta-{beta:e}"));
        println!("running {} with beta {beta:e} ...", sub.algorithm);
        match run_experiment(&sub) {
            Ok(man) => rows.push(format!(
                "{beta:e},{},{},{},{}",
                man.final_rel_error
                    .map(|v| format!("{v:.17e}"))
                    .unwrap_or_default(),
                man.final_grad_inf
                    .map(|v| format!("{v:.17e}"))
                    .unwrap_or_default(),
                man.iterations,
                man.status
            )),
            Err(RunError::Usage(e)) => return Err(RunError::Usage(e)),
            Err(RunError::Run(e)) => {
                eprintln!("beta {beta:e} failed: {e}");
                failures += 1;
                rows.push(format!("{beta:e},,,0,failed"));
            }
        }
    }
    let mut text = rows.join("\n");
    text.push('\n');
    fs::write(cfg.output_dir.join("summary.csv"), text)
        .map_err(|e| RunError::Run(format!("cannot write summary: {e}")))?;
    Ok(failures)
}

pub fn print_path_summary(manifest: &Manifest, dir: &Path) {
    println!(
        "{}: {} after {} iterations (grad_inf {:.3e}{}) -> {}",
        manifest.config.algorithm,
        manifest.status,
        manifest.iterations,
        manifest.final_grad_inf.unwrap_or(f64::NAN),
        manifest
            .final_rel_error
            .map(|r| format!(", rel_error {r:.4}"))
            .unwrap_or_default(),
        dir.display()
    );
}
