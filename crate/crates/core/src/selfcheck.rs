//! Quick end-to-end checks on small seeded instances.

use crate::ambf::{ambf_solve, AmbfConfig, AmbfStatus};
use crate::bs_qos::{solve_qos, QosSolverConfig};
use crate::linalg::CVector;
use crate::mmf_psa::{mmf_solve, qos_mmf_inversion_check, MmfConfig};
use crate::model::{check_qos_feasible, sinr_all, EffectiveChannels, GroupLayout, Scenario};
use crate::ris_psa::PsaConfig;
use crate::scenario_gen::{generate_channels, ChannelParams, ChannelSet, GeometryConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn small(sizes: Vec<usize>, m: usize, seed: u64) -> (Scenario, ChannelSet) {
    let layout = GroupLayout::new(sizes).expect("non-empty groups");
    let k = layout.total_users();
    let scenario = Scenario {
        n_antennas: 4,
        n_ris: m,
        layout,
        sinr_targets: vec![10.0; k],
        noise_power: 1e-10,
        power_budget: 10.0,
    };
    let geometry = GeometryConfig { ris_grid: GeometryConfig::grid_for(m), ..Default::default() };
    let channels = generate_channels(&scenario, &geometry, &ChannelParams::default(), seed).expect("valid scenario");
    (scenario, channels)
}

pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();

    let (s, ch) = small(vec![1, 1], 16, 11);
    let eff = EffectiveChannels::new(&ch, &CVector::from_element(16, crate::linalg::ONE));
    out.push(match solve_qos(&eff, &s.sinr_targets, s.noise_power, &QosSolverConfig::default()) {
        Ok(sol) => {
            let worst = sinr_all(&eff, &sol.w, s.noise_power)
                .iter()
                .zip(&s.sinr_targets)
                .map(|(x, g)| (x / g - 1.0).abs())
                .fold(0.0, f64::max);
            check("unicast SINR equality", worst <= 1e-6, format!("max relative deviation {worst:.2e}"))
        }
        Err(e) => check("unicast SINR equality", false, e.to_string()),
    });

    let (s, ch) = small(vec![2, 2], 16, 12);
    let cfg = AmbfConfig { psa: PsaConfig { max_iters: 300, ..Default::default() }, max_ao_iters: 5, ..Default::default() };
    let r = ambf_solve(&ch, &s.sinr_targets, s.noise_power, &cfg);
    let feasible = r.status != AmbfStatus::Infeasible && check_qos_feasible(&ch, &r.bf_final, &s.sinr_targets, s.noise_power, 1e-6).feasible;
    out.push(check("AMBF hard feasibility", feasible, format!("power {:.3} dBm, status {:?}", crate::linalg::to_db(r.power), r.status)));

    let cfg = MmfConfig { max_iters: 300, final_max_iters: 100, power_budget: s.power_budget, ..Default::default() };
    out.push(match mmf_solve(&ch, &s.sinr_targets, s.noise_power, &cfg) {
        Ok(r) => {
            let ok = r.bf_final.total_power() <= s.power_budget * (1.0 + 1e-9) && r.bf_final.modulus_defect() <= 1e-12;
            check("MMF budget and unit modulus", ok, format!("min weighted SINR {:.3} dB", crate::linalg::to_db(r.min_weighted_sinr)))
        }
        Err(e) => check("MMF budget and unit modulus", false, e.to_string()),
    });

    let (s, ch) = small(vec![1, 1, 1], 16, 13);
    let ch = ch.without_ris();
    out.push(match qos_mmf_inversion_check(&ch, &s.sinr_targets, s.noise_power, s.power_budget, &QosSolverConfig::default()) {
        Ok(rep) => check(
            "QoS/MMF inversion",
            rep.passed,
            format!("power residual {:.1e}, roundtrip residual {:.1e}", rep.power_residual, rep.roundtrip_residual),
        ),
        Err(e) => check("QoS/MMF inversion", false, e.to_string()),
    });

    let mut buf = Vec::new();
    let roundtrip = ch.write_dump(&mut buf).and_then(|_| ChannelSet::read_dump(buf.as_slice()));
    out.push(check("channel dump roundtrip", roundtrip.as_ref().is_ok_and(|c| *c == ch), format!("{} bytes", buf.len())));
    out
}
