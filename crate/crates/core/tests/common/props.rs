//! Property bodies shared by the proptest suite and the acceptance run.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use risbf::ambf::{ambf_solve, AmbfConfig, AmbfStatus};
use risbf::bs_qos::{build_covariance, DualMultipliers};
use risbf::experiment::{run_experiment, write_results_csv};
use risbf::linalg::{complex_gaussian_vector, hermitian_defect, min_eigenvalue_hermitian, random_phases, CVector, C64};
use risbf::mmf_psa::{build_r_tilde, mmf_solve, psa_mmf_solve_with, JointVariable, MmfConfig, MmfProblem};
use risbf::model::check_qos_feasible;
use risbf::ris_psa::{project_unit_disk, psa_solve_with, PsaConfig, RisProblem};
use risbf::{EffectiveChannels, Method, Problem, RunConfig};

use super::{random_channels, rng};

/// `(seed, antennas, RIS elements, group sizes)`.
pub fn instance() -> impl Strategy<Value = (u64, usize, usize, Vec<usize>)> {
    (any::<u64>(), 1usize..=4, 1usize..=8, prop::collection::vec(1usize..=2, 1..=3))
}

pub fn disk_projection(seed: u64, m: usize) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let e = complex_gaussian_vector(&mut r, m, 2.0);
    let p = project_unit_disk(&e);
    prop_assert_eq!(project_unit_disk(&p), p.clone());
    for (x, y) in e.iter().zip(p.iter()) {
        prop_assert!(y.norm() <= 1.0 + 1e-15);
        if x.norm() <= 1.0 {
            prop_assert_eq!(x, y);
        } else {
            prop_assert!((y.arg() - x.arg()).abs() < 1e-12 || (y.norm() - 1.0).abs() < 1e-15);
        }
    }
    Ok(())
}

pub fn psa_iterates_in_set(seed: u64, n: usize, m: usize, sizes: Vec<usize>) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let ch = random_channels(&mut r, n, m, sizes.clone(), 0.5);
    let w: Vec<CVector> = sizes.iter().map(|_| complex_gaussian_vector(&mut r, n, 1.0)).collect();
    let problem = RisProblem::new(&ch, &w, &vec![1.0; ch.n_users()], 0.1);
    let e0 = complex_gaussian_vector(&mut r, m, 4.0);
    let cfg = PsaConfig { max_iters: 60, stall_window: 1000, ..Default::default() };
    let mut worst: f64 = 0.0;
    let out = psa_solve_with(&problem, &e0, &cfg, |e| worst = e.iter().fold(worst, |a, v| a.max(v.norm())));
    prop_assert!(worst <= 1.0 + 1e-9, "iterate modulus {}", worst);
    let mut running = f64::NEG_INFINITY;
    for row in &out.trace {
        running = running.max(row.objective);
    }
    prop_assert_eq!(out.best_objective, running);
    prop_assert!((problem.objective(&out.e, cfg.zeta) - out.best_objective).abs() <= 1e-12 * out.best_objective.abs().max(1.0));
    Ok(())
}

pub fn mmf_iterates_in_set(seed: u64, n: usize, m: usize, sizes: Vec<usize>) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let ch = random_channels(&mut r, n, m, sizes.clone(), 0.5);
    let e0 = random_phases(&mut r, m);
    let maps = build_r_tilde(&ch, &e0, 0.1, 2.0).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let problem = MmfProblem::new(&ch, maps, &vec![1.0; ch.n_users()], 0.1, 2.0);
    let a: Vec<CVector> = sizes.iter().map(|&k| complex_gaussian_vector(&mut r, k, 25.0)).collect();
    let x = JointVariable { a, e: complex_gaussian_vector(&mut r, m, 4.0) };
    let p = problem.project(&x);
    prop_assert!(problem.in_set(&p, 1e-12));
    let pp = problem.project(&p);
    prop_assert!(pp.e == p.e && pp.a.iter().zip(&p.a).all(|(u, v)| (u - v).norm() <= 1e-12 * v.norm().max(1e-300)));
    let cfg = MmfConfig { power_budget: 2.0, stall_window: 1000, ..Default::default() };
    let mut outside = 0;
    psa_mmf_solve_with(&problem, &x, &cfg, false, 60, |xi| outside += usize::from(!problem.in_set(xi, 1e-9)));
    prop_assert_eq!(outside, 0);
    Ok(())
}

pub fn covariances_positive_definite(seed: u64, n: usize, m: usize, sizes: Vec<usize>) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let ch = random_channels(&mut r, n, m, sizes, 0.5);
    let e = random_phases(&mut r, m);
    let eff = EffectiveChannels::new(&ch, &e);
    let k = ch.n_users();
    let lambda = DualMultipliers((0..k).map(|u| (u as f64 + 0.5) * 3.0).collect());
    let cov = build_covariance(&eff, &vec![2.0; k], &lambda);
    prop_assert!(hermitian_defect(&cov) <= 1e-12 * cov.norm());
    prop_assert!(min_eigenvalue_hermitian(&cov) >= 1.0 - 1e-10);
    let maps = build_r_tilde(&ch, &e, 0.01, 10.0).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(hermitian_defect(&maps.r_tilde) <= 1e-12 * maps.r_tilde.norm());
    prop_assert!(min_eigenvalue_hermitian(&maps.r_tilde) >= 1.0 - 1e-10);
    for (g, c) in maps.c.iter().enumerate() {
        let residual = (&maps.r_tilde * c - eff.group_matrix(g)).norm();
        prop_assert!(residual <= 1e-10 * maps.r_tilde.norm() * c.norm().max(1.0));
    }
    Ok(())
}

pub fn solutions_hard_feasible(seed: u64, n: usize, m: usize, sizes: Vec<usize>) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let n = n.max(2);
    let ch = random_channels(&mut r, n, m, sizes, 0.5);
    let k = ch.n_users();
    let targets = vec![0.5; k];
    let cfg = AmbfConfig { max_ao_iters: 4, psa: PsaConfig { max_iters: 100, ..Default::default() }, seed, ..Default::default() };
    let res = ambf_solve(&ch, &targets, 0.1, &cfg);
    if res.status != AmbfStatus::Infeasible {
        let rep = check_qos_feasible(&ch, &res.bf_final, &targets, 0.1, 1e-6);
        prop_assert!(rep.feasible, "{:?}", rep);
        prop_assert!(res.bf_final.modulus_defect() <= 1e-12);
    }
    let mc = MmfConfig { power_budget: 2.0, max_iters: 100, final_max_iters: 50, seed, ..Default::default() };
    let out = mmf_solve(&ch, &targets, 0.1, &mc).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(out.bf_final.total_power() <= 2.0 * (1.0 + 1e-9));
    prop_assert!(out.bf_final.e.iter().all(|v| (v.norm() - 1.0).abs() <= 1e-12));
    prop_assert!(out.min_weighted_sinr > 0.0);
    Ok(())
}

fn csv_bytes(seed: u64) -> Vec<u8> {
    let mut cfg = RunConfig::default();
    cfg.scenario.n_antennas = 4;
    cfg.psa.max_iters = 60;
    cfg.ambf.max_ao_iters = 3;
    cfg.mmf.max_iters = 60;
    cfg.mmf.final_max_iters = 30;
    cfg.experiment.values = vec![4.0, 9.0];
    cfg.experiment.trials = 2;
    cfg.experiment.seed = seed;
    cfg.experiment.methods = vec![Method::Ambf, Method::RandomRis, Method::NoRis];
    let mut out = Vec::new();
    for problem in [Problem::Qos, Problem::Mmf] {
        let mut spec = cfg.experiment_spec().unwrap();
        spec.problem = problem;
        if problem == Problem::Mmf {
            spec.methods = vec![Method::Mmf, Method::MmfRelaxed, Method::NoRis];
        }
        write_results_csv(&run_experiment(&spec).unwrap(), &mut out).unwrap();
    }
    out
}

pub fn csv_deterministic(seed: u64) -> Result<(), TestCaseError> {
    let a = csv_bytes(seed);
    prop_assert!(!a.is_empty());
    prop_assert_eq!(a, csv_bytes(seed));
    Ok(())
}

pub fn unit_phases(seed: u64, m: usize) -> Result<(), TestCaseError> {
    let e = random_phases(&mut rng(seed), m);
    prop_assert!(e.iter().all(|v| (v.norm() - 1.0).abs() <= 1e-15));
    prop_assert!(e.iter().all(|v| *v != C64::new(0.0, 0.0)));
    Ok(())
}
