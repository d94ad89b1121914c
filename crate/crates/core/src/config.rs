//! TOML run configuration.
//!
//! ```toml
//! [scenario]
//! n_antennas = 16
//! group_sizes = [2, 2]
//! sinr_target_db = 10.0
//! power_budget_dbm = 10.0
//!
//! [geometry]
//! ris_grid = [10, 10]
//!
//! [channel]
//! noise_power_dbm = -100.0
//!
//! [experiment]
//! problem = "qos"
//! sweep = "m"
//! values = [16, 64, 144]
//! trials = 20
//! methods = ["ambf", "random_ris", "no_ris"]
//! ```
//!
//! Every section and key is optional; missing keys take the defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ambf::AmbfConfig;
use crate::bs_qos::QosSolverConfig;
use crate::error::{Error, Result};
use crate::experiment::{ExperimentSpec, Method, Problem, SweepVariable};
use crate::linalg::from_db;
use crate::mmf_psa::MmfConfig;
use crate::model::{GroupLayout, Scenario};
use crate::ris_psa::PsaConfig;
use crate::scenario_gen::{ChannelParams, GeometryConfig, PathLoss};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub n_antennas: usize,
    pub group_sizes: Vec<usize>,
    /// Common SINR target (QoS) or weight (MMF) in dB.
    pub sinr_target_db: f64,
    /// Optional per-user targets in dB, flat (group, member) order.
    pub sinr_targets_db: Option<Vec<f64>>,
    pub power_budget_dbm: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self { n_antennas: 16, group_sizes: vec![2, 2], sinr_target_db: 10.0, sinr_targets_db: None, power_budget_dbm: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub rician_factor: f64,
    pub bs_ris_pathloss: PathLoss,
    pub ris_user_pathloss: PathLoss,
    pub bs_user_pathloss: PathLoss,
    pub noise_power_dbm: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let p = ChannelParams::default();
        Self {
            rician_factor: p.rician_factor,
            bs_ris_pathloss: p.bs_ris_pathloss,
            ris_user_pathloss: p.ris_user_pathloss,
            bs_user_pathloss: p.bs_user_pathloss,
            noise_power_dbm: -100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmbfSection {
    pub max_ao_iters: usize,
    pub ao_tol: f64,
    pub seed: u64,
}

impl Default for AmbfSection {
    fn default() -> Self {
        let d = AmbfConfig::default();
        Self { max_ao_iters: d.max_ao_iters, ao_tol: d.ao_tol, seed: d.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmfSection {
    pub delta: f64,
    pub step_size: f64,
    pub max_iters: usize,
    pub final_max_iters: usize,
    pub stall_window: usize,
    pub stall_tol: f64,
    pub seed: u64,
}

impl Default for MmfSection {
    fn default() -> Self {
        let d = MmfConfig::default();
        Self {
            delta: d.delta,
            step_size: d.step_size,
            max_iters: d.max_iters,
            final_max_iters: d.final_max_iters,
            stall_window: d.stall_window,
            stall_tol: d.stall_tol,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub problem: Problem,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub include_timing: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            problem: Problem::Qos,
            sweep: SweepVariable::M,
            values: vec![16.0, 64.0, 144.0],
            trials: 20,
            methods: vec![Method::Ambf, Method::RandomRis, Method::NoRis],
            seed: 1,
            output: None,
            include_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub geometry: GeometryConfig,
    pub channel: ChannelSection,
    pub psa: PsaConfig,
    pub qos: QosSolverConfig,
    pub ambf: AmbfSection,
    pub mmf: MmfSection,
    pub experiment: ExperimentSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario()?.validate()?;
        self.geometry.validate()?;
        self.channel_params().validate()?;
        self.ambf_config().validate()?;
        self.mmf_config().validate()?;
        Ok(())
    }

    pub fn noise_power(&self) -> f64 {
        from_db(self.channel.noise_power_dbm)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let layout = GroupLayout::new(self.scenario.group_sizes.clone())?;
        let k = layout.total_users();
        let sinr_targets = match &self.scenario.sinr_targets_db {
            Some(t) => t.iter().map(|&db| from_db(db)).collect(),
            None => vec![from_db(self.scenario.sinr_target_db); k],
        };
        let s = Scenario {
            n_antennas: self.scenario.n_antennas,
            n_ris: self.geometry.n_ris(),
            layout,
            sinr_targets,
            noise_power: self.noise_power(),
            power_budget: from_db(self.scenario.power_budget_dbm),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            rician_factor: self.channel.rician_factor,
            bs_ris_pathloss: self.channel.bs_ris_pathloss,
            ris_user_pathloss: self.channel.ris_user_pathloss,
            bs_user_pathloss: self.channel.bs_user_pathloss,
            noise_power: self.noise_power(),
        }
    }

    pub fn ambf_config(&self) -> AmbfConfig {
        AmbfConfig {
            max_ao_iters: self.ambf.max_ao_iters,
            ao_tol: self.ambf.ao_tol,
            psa: self.psa.clone(),
            qos: self.qos.clone(),
            seed: self.ambf.seed,
        }
    }

    pub fn mmf_config(&self) -> MmfConfig {
        MmfConfig {
            delta: self.mmf.delta,
            step_size: self.mmf.step_size,
            max_iters: self.mmf.max_iters,
            final_max_iters: self.mmf.final_max_iters,
            power_budget: from_db(self.scenario.power_budget_dbm),
            stall_window: self.mmf.stall_window,
            stall_tol: self.mmf.stall_tol,
            seed: self.mmf.seed,
            qos: self.qos.clone(),
        }
    }

    pub fn experiment_spec(&self) -> Result<ExperimentSpec> {
        let spec = ExperimentSpec {
            base: self.clone(),
            problem: self.experiment.problem,
            sweep: self.experiment.sweep,
            values: self.experiment.values.clone(),
            trials: self.experiment.trials,
            methods: self.experiment.methods.clone(),
            seed: self.experiment.seed,
            output: self.experiment.output.clone(),
            include_timing: self.experiment.include_timing,
            dump_dir: None,
        };
        spec.validate()?;
        Ok(spec)
    }
}
