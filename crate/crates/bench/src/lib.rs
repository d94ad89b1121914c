//! Seeded fixtures for the solver benchmarks.

use risbf::bs_qos::solve_qos;
use risbf::linalg::{random_phases, CVector};
use risbf::mmf_psa::{build_r_tilde, init_weights, JointVariable, MmfProblem};
use risbf::ris_psa::RisProblem;
use risbf::scenario_gen::generate_channels;
use risbf::{ChannelSet, EffectiveChannels, RunConfig, Scenario};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default scenario with `m` RIS elements and `n` BS antennas.
pub struct Fixture {
    pub config: RunConfig,
    pub scenario: Scenario,
    pub channels: ChannelSet,
    /// Random unit-modulus starting point.
    pub e0: CVector,
}

impl Fixture {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        let mut config = RunConfig::default();
        config.scenario.n_antennas = n;
        config.geometry.ris_grid = risbf::GeometryConfig::grid_for(m);
        let scenario = config.scenario().expect("default scenario is valid");
        let channels = generate_channels(&scenario, &config.geometry, &config.channel_params(), seed).expect("valid geometry");
        let e0 = random_phases(&mut ChaCha8Rng::seed_from_u64(seed ^ 1), m);
        Self { config, scenario, channels, e0 }
    }

    pub fn effective(&self) -> EffectiveChannels {
        EffectiveChannels::new(&self.channels, &self.e0)
    }

    /// RIS subproblem for the QoS beamformers at `e0`.
    pub fn ris_problem(&self) -> RisProblem {
        let s = &self.scenario;
        let w = solve_qos(&self.effective(), &s.sinr_targets, s.noise_power, &self.config.qos).expect("feasible").w;
        RisProblem::new(&self.channels, &w, &s.sinr_targets, s.noise_power)
    }

    /// Joint MMF problem with maps at `e0` and its initial point.
    pub fn mmf_problem(&self) -> (MmfProblem, JointVariable) {
        let s = &self.scenario;
        let maps = build_r_tilde(&self.channels, &self.e0, s.noise_power, s.power_budget).expect("non-degenerate");
        let p = MmfProblem::new(&self.channels, maps, &s.sinr_targets, s.noise_power, s.power_budget);
        let a = init_weights(&p, &self.channels, &self.e0, &self.config.qos);
        (p, JointVariable { a, e: self.e0.clone() })
    }
}
