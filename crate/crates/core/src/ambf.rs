//! Alternating optimization for the QoS problem: BS beamformers for the
//! current RIS vector, then RIS phases for the new beamformers, repeated
//! until the BS power settles. A final step snaps the RIS vector to unit
//! modulus and re-solves the beamformers so the output is hard-feasible.

use log::{debug, info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bs_qos::{solve_qos, QosSolution, QosSolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{phase_only, random_phases, CVector};
use crate::model::{BeamformerSet, EffectiveChannels};
use crate::ris_psa::{psa_solve, PsaConfig, RisProblem};
use crate::scenario_gen::ChannelSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmbfConfig {
    pub max_ao_iters: usize,
    /// Relative BS power change between consecutive beamformer updates.
    pub ao_tol: f64,
    pub psa: PsaConfig,
    pub qos: QosSolverConfig,
    /// Seed for the random initial RIS phases.
    pub seed: u64,
}

impl Default for AmbfConfig {
    fn default() -> Self {
        Self { max_ao_iters: 30, ao_tol: 1e-3, psa: PsaConfig::default(), qos: QosSolverConfig::default(), seed: 0 }
    }
}

impl AmbfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ao_tol > 0.0) || self.max_ao_iters == 0 {
            return Err(Error::Config("AO tolerance must be positive and at least one AO iteration allowed".into()));
        }
        self.psa.validate()?;
        self.qos.validate()
    }

    /// Single beamformer update and single RIS update before final processing.
    pub fn one_shot(&self) -> Self {
        Self { max_ao_iters: 1, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmbfStatus {
    Converged,
    MaxIters,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbfResult {
    /// Hard-feasible output; beamformers are zero when infeasible.
    pub bf_final: BeamformerSet,
    pub power: f64,
    /// BS power after each beamformer update, at that update's RIS vector.
    pub ao_trace: Vec<f64>,
    pub ao_iters: usize,
    pub psa_iters: usize,
    pub status: AmbfStatus,
    /// Relaxed iterate handed to final processing.
    pub bf_star: BeamformerSet,
    pub diagnostics: Option<String>,
}

/// Runs the alternating solver from i.i.d. uniform random RIS phases.
pub fn ambf_solve(channels: &ChannelSet, targets: &[f64], noise_power: f64, config: &AmbfConfig) -> AmbfResult {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let e0 = random_phases(&mut rng, channels.n_ris());
    ambf_solve_from(channels, targets, noise_power, &e0, config)
}

pub fn ambf_solve_from(
    channels: &ChannelSet,
    targets: &[f64],
    noise_power: f64,
    e0: &CVector,
    config: &AmbfConfig,
) -> AmbfResult {
    let mut e = e0.clone();
    let mut trace = Vec::new();
    let mut psa_iters = 0;
    let mut status = AmbfStatus::MaxIters;
    let mut current: Option<(QosSolution, CVector)> = None;
    let mut ao_iters = 0;
    for n in 1..=config.max_ao_iters {
        let eff = EffectiveChannels::new(channels, &e);
        let sol = match solve_qos(&eff, targets, noise_power, &config.qos) {
            Ok(s) => s,
            Err(err) => {
                if current.is_none() {
                    warn!("initial BS solve failed: {err}");
                    return infeasible(channels, &e, err.to_string());
                }
                // fall back to the RIS vector of the last successful solve
                warn!("BS solve failed at AO iteration {n}: {err}");
                e = current.as_ref().map(|c| c.1.clone()).unwrap_or(e);
                break;
            }
        };
        ao_iters = n;
        let power = sol.power;
        let prev = trace.last().copied();
        trace.push(power);
        let w = sol.w.clone();
        current = Some((sol, e.clone()));
        if let Some(p) = prev {
            if (p - power).abs() <= config.ao_tol * p {
                status = AmbfStatus::Converged;
                debug!("AO converged after {n} iterations at power {power:e}");
                break;
            }
        }
        if channels.n_ris() == 0 {
            status = AmbfStatus::Converged;
            break;
        }
        // on the last sweep this RIS update feeds final processing
        let problem = RisProblem::new(channels, &w, targets, noise_power);
        let out = psa_solve(&problem, &e, &config.psa);
        psa_iters += out.iterations;
        e = out.e;
    }
    let (sol, _) = current.expect("at least one successful BS solve");
    let bf_star = BeamformerSet { w: sol.w, e };
    match final_processing(channels, targets, noise_power, &bf_star, &config.qos) {
        Ok((bf_final, power)) => {
            info!("AMBF finished: power {power:e} after {ao_iters} AO iterations");
            AmbfResult { bf_final, power, ao_trace: trace, ao_iters, psa_iters, status, bf_star, diagnostics: None }
        }
        Err(err) => {
            let mut r = infeasible(channels, &phase_only(&bf_star.e), err.to_string());
            r.ao_trace = trace;
            r.ao_iters = ao_iters;
            r.psa_iters = psa_iters;
            r.bf_star = bf_star;
            r
        }
    }
}

/// `e_final = exp(j angle(e*))` (zero entries get phase 0), then the BS
/// beamformers are re-solved for `e_final`.
pub fn final_processing(
    channels: &ChannelSet,
    targets: &[f64],
    noise_power: f64,
    bf_star: &BeamformerSet,
    qos: &QosSolverConfig,
) -> Result<(BeamformerSet, f64)> {
    let e = phase_only(&bf_star.e);
    let eff = EffectiveChannels::new(channels, &e);
    let sol = solve_qos(&eff, targets, noise_power, qos)?;
    Ok((BeamformerSet { w: sol.w, e }, sol.power))
}

fn infeasible(channels: &ChannelSet, e: &CVector, msg: String) -> AmbfResult {
    let bf = BeamformerSet { w: vec![CVector::zeros(channels.n_antennas()); channels.layout().n_groups()], e: e.clone() };
    AmbfResult {
        bf_final: bf.clone(),
        power: f64::INFINITY,
        ao_trace: Vec::new(),
        ao_iters: 0,
        psa_iters: 0,
        status: AmbfStatus::Infeasible,
        bf_star: bf,
        diagnostics: Some(msg),
    }
}
