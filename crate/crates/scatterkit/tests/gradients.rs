//! Finite-difference oracles for the solver gradients: the analytic
//! `∇_ω F^csi` and `∇_α F^som` must match central differences taken on the
//! real and imaginary parts separately.

mod common;

use common::{rand_cvec, rel_l2, rng};
use common::fd_gradient as fd_gradient_h;
use rand::Rng;
use scatterkit::csi::{CsiProblem, CsiWeights};
use scatterkit::forward::{add_noise, synthesize, IncidentData};
use scatterkit::grid::Grid;
use scatterkit::numeric::c64;
use scatterkit::operators::{uniform_directions, ScatterOps, ScatteringOperators};
use scatterkit::phantoms::bump_contrast;
use scatterkit::som::{build_split, SomProblem};
use scatterkit::svd::TinfSvd;

const FD_H: f64 = 1e-5;

fn fd_gradient<F: FnMut(&[c64]) -> f64>(x: &[c64], f: F) -> Vec<c64> {
    fd_gradient_h(x, FD_H, f)
}

struct Instance {
    ops: ScatteringOperators,
    incident: IncidentData,
    data: scatterkit::forward::FarFieldData,
}

fn random_instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let grid = Grid::new(6);
    let ops = ScatteringOperators::new(grid, 6.0, &uniform_directions(5));
    let incident = IncidentData::new(&grid, 6.0, uniform_directions(4), uniform_directions(5));
    // synthesize data from a perturbed bump so the residuals are nontrivial
    let mut truth = bump_contrast(&grid);
    for v in truth.iter_mut() {
        *v += c64::new(r.gen_range(-0.1..0.1), r.gen_range(-0.1..0.1));
    }
    let (exact, _) = synthesize(&ops, &truth, &incident).unwrap();
    let data = add_noise(&exact, 0.05, seed).unwrap();
    Instance {
        ops,
        incident,
        data,
    }
}

#[test]
fn csi_gradient_matches_central_differences() {
    for case in 0..20u64 {
        let inst = random_instance(1000 + case);
        let mut r = rng(2000 + case);
        let m_len = inst.ops.m();
        let j_count = inst.incident.j();
        let weights = CsiWeights::uniform(
            j_count,
            r.gen_range(0.2..2.0),
            r.gen_range(0.2..2.0),
        );
        let prob = CsiProblem::new(&inst.ops, &inst.incident, &inst.data, weights);
        let m = rand_cvec(&mut r, m_len, 0.5);
        let omegas: Vec<Vec<c64>> = (0..j_count)
            .map(|_| rand_cvec(&mut r, m_len, 0.5))
            .collect();
        let j = (case as usize) % j_count;

        let analytic = prob.gradient_omega(&m, &omegas[j], j);
        let fd = fd_gradient(&omegas[j], |w| {
            let mut pert = omegas.clone();
            pert[j] = w.to_vec();
            prob.objective(&m, &pert)
        });
        let err = rel_l2(&analytic, &fd);
        assert!(err < 1e-6, "case {case}: ∇_ω rel err {err:.3e}");
    }
}

#[test]
fn som_gradient_matches_central_differences() {
    for case in 0..20u64 {
        let inst = random_instance(3000 + case);
        let mut r = rng(4000 + case);
        let j_count = inst.incident.j();
        let weights = CsiWeights::uniform(
            j_count,
            r.gen_range(0.2..2.0),
            r.gen_range(0.2..2.0),
        );
        let svd = TinfSvd::compute(&inst.ops);
        let l_alpha = 1 + (case as usize) % svd.l0.min(4);
        let split = build_split(&svd, &inst.data, l_alpha).unwrap();
        let prob = SomProblem::new(&inst.ops, &inst.incident, &inst.data, weights, split);
        let m = rand_cvec(&mut r, inst.ops.m(), 0.5);
        let dim = prob.split.complement.dim();
        let alphas: Vec<Vec<c64>> = (0..j_count)
            .map(|_| rand_cvec(&mut r, dim, 0.5))
            .collect();
        let j = (case as usize) % j_count;

        let analytic = prob.gradient_alpha(&m, &alphas[j], j);
        let fd = fd_gradient(&alphas[j], |a| {
            let mut pert = alphas.clone();
            pert[j] = a.to_vec();
            prob.objective(&m, &pert)
        });
        let err = rel_l2(&analytic, &fd);
        assert!(err < 1e-6, "case {case}: ∇_α rel err {err:.3e}");
    }
}

#[test]
fn contrast_gradient_matches_central_differences() {
    for case in 0..10u64 {
        let inst = random_instance(5000 + case);
        let mut r = rng(6000 + case);
        let m_len = inst.ops.m();
        let j_count = inst.incident.j();
        let weights = CsiWeights::uniform(j_count, r.gen_range(0.2..2.0), 1.0);
        let prob = CsiProblem::new(&inst.ops, &inst.incident, &inst.data, weights);
        let m = rand_cvec(&mut r, m_len, 0.5);
        let omegas: Vec<Vec<c64>> = (0..j_count)
            .map(|_| rand_cvec(&mut r, m_len, 0.5))
            .collect();
        let us: Vec<Vec<c64>> = (0..j_count)
            .map(|j| {
                let tw = inst.ops.apply_t(&omegas[j]);
                (0..m_len)
                    .map(|l| inst.incident.ui[j][l] + tw[l])
                    .collect()
            })
            .collect();

        let analytic = prob.gradient_m(&m, &us, &omegas);
        let fd = fd_gradient(&m, |mm| prob.objective(mm, &omegas));
        let err = rel_l2(&analytic, &fd);
        assert!(err < 1e-6, "case {case}: ∇_m rel err {err:.3e}");
    }
}
