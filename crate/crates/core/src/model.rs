//! Problem vocabulary shared by every solver: user indexing, scenarios,
//! beamformers and exact evaluation of SINR, power and feasibility.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, CVector, C64};
use crate::scenario_gen::ChannelSet;

/// User `member` of multicast group `group` (both zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserIndex {
    pub group: usize,
    pub member: usize,
}

impl fmt::Display for UserIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.group, self.member)
    }
}

/// Group sizes plus the flat (lexicographic) ordering of users.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLayout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl GroupLayout {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidScenario("at least one group is required".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidScenario("every group needs at least one user".into()));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for &k in &sizes {
            offsets.push(acc);
            acc += k;
        }
        Ok(Self { sizes, offsets })
    }

    pub fn uniform(groups: usize, users_per_group: usize) -> Result<Self> {
        Self::new(vec![users_per_group; groups])
    }

    pub fn n_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.sizes[group]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total_users(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0) + self.sizes.last().copied().unwrap_or(0)
    }

    pub fn is_unicast(&self) -> bool {
        self.sizes.iter().all(|&k| k == 1)
    }

    pub fn flat(&self, user: UserIndex) -> usize {
        debug_assert!(user.member < self.sizes[user.group]);
        self.offsets[user.group] + user.member
    }

    pub fn group_range(&self, group: usize) -> std::ops::Range<usize> {
        self.offsets[group]..self.offsets[group] + self.sizes[group]
    }

    pub fn group_of(&self, flat: usize) -> usize {
        // offsets are strictly increasing since every group is non-empty
        match self.offsets.binary_search(&flat) {
            Ok(g) => g,
            Err(g) => g - 1,
        }
    }

    pub fn user(&self, flat: usize) -> UserIndex {
        let group = self.group_of(flat);
        UserIndex { group, member: flat - self.offsets[group] }
    }

    /// Users in lexicographic `(group, member)` order.
    pub fn users(&self) -> impl Iterator<Item = UserIndex> + '_ {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(group, &k)| (0..k).map(move |member| UserIndex { group, member }))
    }
}

/// Everything that defines one problem instance, in linear units (mW).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_antennas: usize,
    pub n_ris: usize,
    pub layout: GroupLayout,
    /// Per-user SINR targets in flat user order (linear ratios).
    pub sinr_targets: Vec<f64>,
    pub noise_power: f64,
    /// BS power budget; only used by the max-min fair problem.
    pub power_budget: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::InvalidScenario("N must be at least 1".into()));
        }
        if self.sinr_targets.len() != self.layout.total_users() {
            return Err(Error::InvalidScenario(format!(
                "{} SINR targets for {} users",
                self.sinr_targets.len(),
                self.layout.total_users()
            )));
        }
        if self.sinr_targets.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidScenario("SINR targets must be positive".into()));
        }
        if !(self.noise_power > 0.0) {
            return Err(Error::InvalidScenario("noise power must be positive".into()));
        }
        if !(self.power_budget > 0.0) {
            return Err(Error::InvalidScenario("power budget must be positive".into()));
        }
        Ok(())
    }

    pub fn n_groups(&self) -> usize {
        self.layout.n_groups()
    }

    pub fn total_users(&self) -> usize {
        self.layout.total_users()
    }

    pub fn is_unicast(&self) -> bool {
        self.layout.is_unicast()
    }
}

/// BS beamformers (one per group) and the RIS reflection vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub w: Vec<CVector>,
    pub e: CVector,
}

impl BeamformerSet {
    pub fn total_power(&self) -> f64 {
        total_power(&self.w)
    }

    /// Largest deviation of `|e_m|` from one.
    pub fn modulus_defect(&self) -> f64 {
        self.e.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn is_hard_feasible_ris(&self) -> bool {
        self.modulus_defect() <= 1e-9
    }
}

/// Equivalent BS-to-user channels `h_d + G e` for a fixed RIS vector.
#[derive(Debug, Clone)]
pub struct EffectiveChannels {
    pub layout: GroupLayout,
    pub h: Vec<CVector>,
}

impl EffectiveChannels {
    pub fn new(channels: &ChannelSet, e: &CVector) -> Self {
        let h = (0..channels.n_users()).map(|u| effective_channel_flat(channels, e, u)).collect();
        Self { layout: channels.layout().clone(), h }
    }

    pub fn n_antennas(&self) -> usize {
        self.h.first().map_or(0, |v| v.len())
    }

    /// Stacked equivalent channels of one group, `N x K_i`.
    pub fn group_matrix(&self, group: usize) -> crate::linalg::CMatrix {
        let cols: Vec<CVector> = self.layout.group_range(group).map(|u| self.h[u].clone()).collect();
        crate::linalg::CMatrix::from_columns(&cols)
    }
}

fn effective_channel_flat(channels: &ChannelSet, e: &CVector, u: usize) -> CVector {
    let direct = &channels.h_direct()[u];
    if e.is_empty() {
        direct.clone()
    } else {
        direct + &channels.cascaded()[u] * e
    }
}

/// `h_d + G e` for one user.
pub fn effective_channel(channels: &ChannelSet, e: &CVector, user: UserIndex) -> CVector {
    effective_channel_flat(channels, e, channels.layout().flat(user))
}

/// SINR of flat user `u` given its equivalent channel.
pub fn sinr_with_channel(h: &CVector, w: &[CVector], group: usize, noise_power: f64) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, wj) in w.iter().enumerate() {
        let p = inner(wj, h).norm_sqr();
        if j == group {
            signal = p;
        } else {
            interference += p;
        }
    }
    signal / (interference + noise_power)
}

pub fn sinr(channels: &ChannelSet, bf: &BeamformerSet, user: UserIndex, noise_power: f64) -> f64 {
    let h = effective_channel(channels, &bf.e, user);
    sinr_with_channel(&h, &bf.w, user.group, noise_power)
}

/// All users' SINRs in flat order.
pub fn sinr_all(eff: &EffectiveChannels, w: &[CVector], noise_power: f64) -> Vec<f64> {
    eff.h
        .iter()
        .enumerate()
        .map(|(u, h)| sinr_with_channel(h, w, eff.layout.group_of(u), noise_power))
        .collect()
}

pub fn total_power(w: &[CVector]) -> f64 {
    w.iter().map(|v| v.norm_squared()).sum()
}

/// Minimum of `SINR_ik / gamma_ik` and the (first, lexicographic) user attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSinr {
    pub value: f64,
    pub user: UserIndex,
}

pub fn min_weighted_sinr_eff(eff: &EffectiveChannels, w: &[CVector], targets: &[f64], noise_power: f64) -> WeightedSinr {
    let s = sinr_all(eff, w, noise_power);
    let mut best = 0;
    for u in 1..s.len() {
        if s[u] / targets[u] < s[best] / targets[best] {
            best = u;
        }
    }
    WeightedSinr { value: s[best] / targets[best], user: eff.layout.user(best) }
}

pub fn min_weighted_sinr(channels: &ChannelSet, bf: &BeamformerSet, targets: &[f64], noise_power: f64) -> WeightedSinr {
    min_weighted_sinr_eff(&EffectiveChannels::new(channels, &bf.e), &bf.w, targets, noise_power)
}

/// Sum of `log2(1 + SINR)` over all users.
pub fn sum_rate(eff: &EffectiveChannels, w: &[CVector], noise_power: f64) -> f64 {
    sinr_all(eff, w, noise_power).iter().map(|s| (1.0 + s).log2()).sum()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub min_weighted_sinr: f64,
    /// Users whose weighted SINR falls below `1 - tol`.
    pub sinr_violations: Vec<UserIndex>,
    /// RIS elements with `| |e_m| - 1 | > tol`.
    pub modulus_violations: Vec<usize>,
}

pub fn check_qos_feasible(
    channels: &ChannelSet,
    bf: &BeamformerSet,
    targets: &[f64],
    noise_power: f64,
    tol: f64,
) -> FeasibilityReport {
    let eff = EffectiveChannels::new(channels, &bf.e);
    let s = sinr_all(&eff, &bf.w, noise_power);
    let mut report = FeasibilityReport { min_weighted_sinr: f64::INFINITY, ..Default::default() };
    for (u, (&si, &gi)) in s.iter().zip(targets).enumerate() {
        let ratio = si / gi;
        report.min_weighted_sinr = report.min_weighted_sinr.min(ratio);
        if !(ratio >= 1.0 - tol) {
            report.sinr_violations.push(eff.layout.user(u));
        }
    }
    for (m, v) in bf.e.iter().enumerate() {
        if !((v.norm() - 1.0).abs() <= tol) {
            report.modulus_violations.push(m);
        }
    }
    report.feasible = report.sinr_violations.is_empty() && report.modulus_violations.is_empty();
    report
}

/// Complex scalar helper used by tests and solvers.
pub fn scale_all(w: &[CVector], c: f64) -> Vec<CVector> {
    w.iter().map(|v| v * C64::new(c, 0.0)).collect()
}
