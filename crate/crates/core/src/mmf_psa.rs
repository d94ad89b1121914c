//! Max-min fair beamforming under a BS power budget.
//!
//! The BS beamformers are restricted to `w_i = C_i a_i` with fixed maps
//! `C_i = R~^{-1} H_i`, where `R~` is the asymptotic covariance built from
//! the equivalent channels at the initial RIS vector. The joint variable
//! `x = (a, e)` is optimized by projected subgradient steps on
//! `varphi_u(x) = -(SINR_u/gamma_u + delta ||e||^2 / M)`, selecting the
//! worst user each iteration. Final processing snaps `e` to unit modulus and
//! refines `a` alone with the same iteration.

use std::io::Write;

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bs_qos::{solve_hpd, solve_qos, QosSolverConfig, WeightSca};
use crate::error::{Error, Result};
use crate::linalg::{add_outer, inner, phase_only, random_phases, CMatrix, CVector, C64};
use crate::model::{min_weighted_sinr, BeamformerSet, EffectiveChannels, GroupLayout};
use crate::ris_psa::{project_unit_disk, PhiEvaluation, StallMonitor};
use crate::scenario_gen::ChannelSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmfConfig {
    /// Penalty weight on `||e||^2 / M`.
    pub delta: f64,
    /// Multiplier on the normalized step lengths: `A_STEP ||a||` for the
    /// weights and `E_STEP sqrt(M)` for the RIS vector.
    pub step_size: f64,
    pub max_iters: usize,
    /// Iteration cap for the `a`-only refinement in final processing.
    pub final_max_iters: usize,
    /// BS power budget in mW.
    pub power_budget: f64,
    pub stall_window: usize,
    pub stall_tol: f64,
    pub seed: u64,
    pub qos: QosSolverConfig,
}

impl Default for MmfConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            step_size: 1.0,
            max_iters: 2000,
            final_max_iters: 2000,
            power_budget: 10.0,
            stall_window: 200,
            stall_tol: 1e-6,
            seed: 0,
            qos: QosSolverConfig::default(),
        }
    }
}

impl MmfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.step_size > 0.0 && self.power_budget > 0.0) {
            return Err(Error::Config("MMF penalty, step size and power budget must be positive".into()));
        }
        if self.stall_window == 0 {
            return Err(Error::Config("MMF stall window must be at least 1".into()));
        }
        self.qos.validate()
    }
}

/// Stacked per-group weights and the RIS vector.
#[derive(Debug, Clone, PartialEq)]
pub struct JointVariable {
    pub a: Vec<CVector>,
    pub e: CVector,
}

/// Asymptotic covariance `R~` and the fixed beamformer maps `C_i = R~^{-1} H_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecomputedMaps {
    pub r_tilde: CMatrix,
    pub c: Vec<CMatrix>,
    /// Per-user `||h~_u||^2 / N`.
    pub beta_tilde: Vec<f64>,
    /// Harmonic mean of `beta_tilde`.
    pub beta_bar: f64,
}

/// `R~ = I + P beta_bar / (sigma^2 K_tot) sum_u g_u g_u^H` with
/// `g_u = h~_u / sqrt(beta~_u)`, evaluated at the RIS vector `e`.
pub fn build_r_tilde(channels: &ChannelSet, e: &CVector, noise_power: f64, power_budget: f64) -> Result<PrecomputedMaps> {
    let eff = EffectiveChannels::new(channels, e);
    let n = channels.n_antennas();
    let k = eff.h.len();
    let mut beta_tilde = Vec::with_capacity(k);
    for (u, h) in eff.h.iter().enumerate() {
        let b = h.norm_squared() / n as f64;
        if !(b > 0.0) {
            return Err(Error::DegenerateChannel(eff.layout.user(u)));
        }
        beta_tilde.push(b);
    }
    let beta_bar = k as f64 / beta_tilde.iter().map(|b| 1.0 / b).sum::<f64>();
    let load = power_budget * beta_bar / (noise_power * k as f64);
    let mut r = CMatrix::identity(n, n);
    for (h, &b) in eff.h.iter().zip(&beta_tilde) {
        add_outer(&mut r, h, load / b);
    }
    let c = (0..eff.layout.n_groups()).map(|g| solve_hpd(&r, &eff.group_matrix(g))).collect();
    Ok(PrecomputedMaps { r_tilde: r, c, beta_tilde, beta_bar })
}

/// Everything needed to evaluate SINRs and gradients for `x = (a, e)` with
/// fixed maps: `C_j^H h~_u = d_ju + B_ju e`.
#[derive(Debug, Clone)]
pub struct MmfProblem {
    layout: GroupLayout,
    targets: Vec<f64>,
    noise_power: f64,
    power_budget: f64,
    n_ris: usize,
    maps: PrecomputedMaps,
    /// `d[u][j] = C_j^H h_d,u`.
    d: Vec<Vec<CVector>>,
    /// `b[u][j] = C_j^H G_u`.
    b: Vec<Vec<CMatrix>>,
    /// `q[j] = C_j^H C_j`.
    q: Vec<CMatrix>,
}

/// Per-user evaluation at one point.
struct UserTerms {
    /// `s_j = a_j^H C_j^H h~_u` for every group.
    s: Vec<C64>,
    /// `C_j^H h~_u` for every group.
    hbar: Vec<CVector>,
    signal: f64,
    interference: f64,
}

impl MmfProblem {
    pub fn new(channels: &ChannelSet, maps: PrecomputedMaps, targets: &[f64], noise_power: f64, power_budget: f64) -> Self {
        let k = channels.n_users();
        let d = (0..k).map(|u| maps.c.iter().map(|c| c.ad_mul(&channels.h_direct()[u])).collect()).collect();
        let b = (0..k).map(|u| maps.c.iter().map(|c| c.ad_mul(&channels.cascaded()[u])).collect()).collect();
        let q: Vec<CMatrix> = maps.c.iter().map(|c| c.ad_mul(c)).collect();
        Self {
            layout: channels.layout().clone(),
            targets: targets.to_vec(),
            noise_power,
            power_budget,
            n_ris: channels.n_ris(),
            maps,
            d,
            b,
            q,
        }
    }

    pub fn maps(&self) -> &PrecomputedMaps {
        &self.maps
    }

    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    /// `sum_i ||C_i a_i||^2`.
    pub fn power(&self, a: &[CVector]) -> f64 {
        a.iter().zip(&self.q).map(|(ai, qi)| inner(ai, &(qi * ai)).re).sum()
    }

    pub fn beamformers(&self, a: &[CVector]) -> Vec<CVector> {
        self.maps.c.iter().zip(a).map(|(c, ai)| c * ai).collect()
    }

    fn penalty(&self, e: &CVector, delta: f64) -> f64 {
        if self.n_ris == 0 {
            0.0
        } else {
            delta * e.norm_squared() / self.n_ris as f64
        }
    }

    fn terms(&self, x: &JointVariable, u: usize) -> UserTerms {
        let g = self.layout.group_of(u);
        let mut hbar = Vec::with_capacity(self.layout.n_groups());
        let mut s = Vec::with_capacity(self.layout.n_groups());
        let mut interference = self.noise_power;
        for (j, aj) in x.a.iter().enumerate() {
            let h = if self.n_ris == 0 { self.d[u][j].clone() } else { &self.d[u][j] + &self.b[u][j] * &x.e };
            let sj = inner(aj, &h);
            if j != g {
                interference += sj.norm_sqr();
            }
            s.push(sj);
            hbar.push(h);
        }
        UserTerms { signal: s[g].norm_sqr(), s, hbar, interference }
    }

    pub fn weighted_sinr(&self, x: &JointVariable, u: usize) -> f64 {
        let t = self.terms(x, u);
        t.signal / (t.interference * self.targets[u])
    }

    pub fn min_weighted_sinr(&self, x: &JointVariable) -> f64 {
        (0..self.layout.total_users()).map(|u| self.weighted_sinr(x, u)).fold(f64::INFINITY, f64::min)
    }

    /// `varphi_u(x) = -(SINR_u/gamma_u + delta ||e||^2 / M)`.
    pub fn varphi(&self, x: &JointVariable, delta: f64, u: usize) -> f64 {
        -(self.weighted_sinr(x, u) + self.penalty(&x.e, delta))
    }

    pub fn evaluate(&self, x: &JointVariable, delta: f64) -> PhiEvaluation {
        let pen = self.penalty(&x.e, delta);
        PhiEvaluation::from_values((0..self.layout.total_users()).map(|u| -(self.weighted_sinr(x, u) + pen)).collect())
    }

    /// Relaxed objective `min_u SINR_u/gamma_u + delta ||e||^2 / M`.
    pub fn objective(&self, x: &JointVariable, delta: f64) -> f64 {
        -self.evaluate(x, delta).best_value
    }

    /// Conjugate gradient of `varphi_u` with respect to each `a_j`: own group
    /// `-(1/gamma) A_g a_g / I`, other groups `+(1/gamma) S A_j a_j / I^2`
    /// with `A_j = C_j^H h~_u h~_u^H C_j`.
    pub fn grad_a(&self, x: &JointVariable, u: usize) -> Vec<CVector> {
        let t = self.terms(x, u);
        let g = self.layout.group_of(u);
        let gamma = self.targets[u];
        t.hbar
            .iter()
            .zip(&t.s)
            .enumerate()
            .map(|(j, (h, s))| {
                let coef = if j == g {
                    -1.0 / (gamma * t.interference)
                } else {
                    t.signal / (gamma * t.interference * t.interference)
                };
                h * (s.conj() * coef)
            })
            .collect()
    }

    /// Conjugate gradient of `varphi_u` with respect to `e`, with
    /// `q_j = (B_ju^H a_j) s_j`.
    pub fn grad_e(&self, x: &JointVariable, delta: f64, u: usize) -> CVector {
        if self.n_ris == 0 {
            return CVector::zeros(0);
        }
        let t = self.terms(x, u);
        let g = self.layout.group_of(u);
        let mut num = CVector::zeros(self.n_ris);
        for (j, aj) in x.a.iter().enumerate() {
            let v = self.b[u][j].ad_mul(aj);
            if j == g {
                num += v * (t.s[j] * t.interference);
            } else {
                num -= v * (t.s[j] * t.signal);
            }
        }
        let mut grad = num * C64::new(-1.0 / (self.targets[u] * t.interference * t.interference), 0.0);
        grad -= &x.e * C64::new(delta / self.n_ris as f64, 0.0);
        grad
    }

    /// Disk projection for `e`; `a` scaled by `sqrt(P / P_tot)` when over budget.
    pub fn project(&self, x: &JointVariable) -> JointVariable {
        let mut a = x.a.clone();
        let mut p = self.power(&a);
        while p > self.power_budget {
            let s = C64::new((self.power_budget / p).sqrt() * (1.0 - f64::EPSILON), 0.0);
            a.iter_mut().for_each(|ai| *ai *= s);
            p = self.power(&a);
        }
        JointVariable { a, e: project_unit_disk(&x.e) }
    }

    /// `a` scaled so that the power equals the budget exactly.
    pub fn scale_to_budget(&self, a: &[CVector]) -> Vec<CVector> {
        let p = self.power(a);
        if !(p > 0.0) {
            return a.to_vec();
        }
        let s = C64::new((self.power_budget / p).sqrt(), 0.0);
        a.iter().map(|ai| ai * s).collect()
    }

    pub fn in_set(&self, x: &JointVariable, tol: f64) -> bool {
        self.power(&x.a) <= self.power_budget * (1.0 + tol) && x.e.iter().all(|v| v.norm() <= 1.0 + tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmfTraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub min_weighted_sinr: f64,
    pub norm_ratio: f64,
    /// Fraction of the power budget in use.
    pub power_usage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmfOutcome {
    pub x: JointVariable,
    pub best_objective: f64,
    pub iterations: usize,
    pub stalled: bool,
    pub trace: Vec<MmfTraceRow>,
}

/// Relative step length of the weight block.
pub const A_STEP: f64 = 0.005;
/// Per-element step length of the RIS block.
pub const E_STEP: f64 = 0.02;

/// Scales `g` to Euclidean length `len` (zero stays zero).
fn normalized(g: f64, len: f64) -> C64 {
    C64::new(if g > 0.0 { len / g } else { 0.0 }, 0.0)
}

/// Projected subgradient iteration from `x0`; with `freeze_e` only `a` moves.
/// Steps follow the normalized subgradient of each block, so the step length
/// does not depend on the SINR scale.
pub fn psa_mmf_solve(problem: &MmfProblem, x0: &JointVariable, config: &MmfConfig, freeze_e: bool, max_iters: usize) -> MmfOutcome {
    psa_mmf_solve_with(problem, x0, config, freeze_e, max_iters, |_| {})
}

/// [`psa_mmf_solve`] with a callback on every iterate, the projected start included.
pub fn psa_mmf_solve_with(
    problem: &MmfProblem,
    x0: &JointVariable,
    config: &MmfConfig,
    freeze_e: bool,
    max_iters: usize,
    mut on_iterate: impl FnMut(&JointVariable),
) -> MmfOutcome {
    let mut x = problem.project(x0);
    on_iterate(&x);
    let mut eval = problem.evaluate(&x, config.delta);
    let mut best_x = x.clone();
    let mut best = -eval.best_value;
    let mut trace = vec![trace_row(problem, 0, &x, &eval, config.delta)];
    let mut monitor = StallMonitor::new(config.stall_window, config.stall_tol);
    let mut iterations = 0;
    let mut stalled = false;
    let e_len = config.step_size * E_STEP * (problem.n_ris as f64).sqrt();
    for it in 1..=max_iters {
        let u = eval.argmax;
        let ga = problem.grad_a(&x, u);
        let a_norm = x.a.iter().map(|ai| ai.norm_squared()).sum::<f64>().sqrt();
        let step_a = normalized(ga.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt(), config.step_size * A_STEP * a_norm);
        let a: Vec<CVector> = x.a.iter().zip(&ga).map(|(ai, gi)| ai - gi * step_a).collect();
        let e = if freeze_e || problem.n_ris == 0 {
            x.e.clone()
        } else {
            let ge = problem.grad_e(&x, config.delta, u);
            let step_e = normalized(ge.norm(), e_len);
            &x.e - ge * step_e
        };
        x = problem.project(&JointVariable { a, e });
        on_iterate(&x);
        eval = problem.evaluate(&x, config.delta);
        let obj = -eval.best_value;
        if obj > best {
            best = obj;
            best_x = x.clone();
        }
        trace.push(trace_row(problem, it, &x, &eval, config.delta));
        iterations = it;
        if monitor.push(best) {
            stalled = true;
            break;
        }
    }
    MmfOutcome { x: best_x, best_objective: best, iterations, stalled, trace }
}

fn trace_row(problem: &MmfProblem, iteration: usize, x: &JointVariable, eval: &PhiEvaluation, delta: f64) -> MmfTraceRow {
    let norm_ratio = if problem.n_ris == 0 { 0.0 } else { x.e.norm_squared() / problem.n_ris as f64 };
    let objective = -eval.best_value;
    MmfTraceRow {
        iteration,
        objective,
        min_weighted_sinr: objective - if problem.n_ris == 0 { 0.0 } else { delta * norm_ratio },
        norm_ratio,
        power_usage: problem.power(&x.a) / problem.power_budget,
    }
}

pub fn write_trace_csv<W: Write>(trace: &[MmfTraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Initial weights for a fixed RIS vector `e`: the better of the all-ones
/// weights and one QoS solve at the midpoint `t = 1.5 t0` of the bracket
/// `[t0, 2 t0]`, where `t0` is the all-ones min weighted SINR. Both
/// candidates are scaled to the full budget.
pub fn init_weights(problem: &MmfProblem, channels: &ChannelSet, e: &CVector, qos: &QosSolverConfig) -> Vec<CVector> {
    let ones: Vec<CVector> = problem.layout.sizes().iter().map(|&k| CVector::from_element(k, C64::new(1.0, 0.0))).collect();
    let fallback = problem.scale_to_budget(&ones);
    let t0 = problem.min_weighted_sinr(&JointVariable { a: fallback.clone(), e: e.clone() });
    if !(t0 > 0.0 && t0.is_finite()) {
        return fallback;
    }
    let eff = EffectiveChannels::new(channels, e);
    let scaled: Vec<f64> = problem.targets.iter().map(|g| g * 1.5 * t0).collect();
    let sca = WeightSca::new(&eff, &problem.maps.c, &scaled, problem.noise_power);
    match sca.solve(qos) {
        Ok(sol) => {
            let cand = problem.scale_to_budget(&sol.a.0);
            let t1 = problem.min_weighted_sinr(&JointVariable { a: cand.clone(), e: e.clone() });
            if t1 > t0 {
                cand
            } else {
                fallback
            }
        }
        Err(err) => {
            debug!("init QoS solve failed ({err}); using all-ones weights");
            fallback
        }
    }
}

/// Random unit-modulus `e` from `seed`, then [`init_weights`].
pub fn init_point(problem: &MmfProblem, channels: &ChannelSet, seed: u64, qos: &QosSolverConfig) -> JointVariable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_phases(&mut rng, channels.n_ris());
    let a = init_weights(problem, channels, &e, qos);
    JointVariable { a, e }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmfResult {
    /// Unit-modulus RIS vector and beamformers within the budget.
    pub bf_final: BeamformerSet,
    pub min_weighted_sinr: f64,
    pub x_star: JointVariable,
    /// Relaxed objective at `x_star`.
    pub relaxed_objective: f64,
    pub relaxed_min_weighted_sinr: f64,
    pub iterations: usize,
    pub final_iterations: usize,
    pub stalled: bool,
    pub trace: Vec<MmfTraceRow>,
}

/// Joint solve: random `e0`, maps at `e0`, initialization, joint PSA, then
/// final processing.
pub fn mmf_solve(channels: &ChannelSet, targets: &[f64], noise_power: f64, config: &MmfConfig) -> Result<MmfResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let e0 = random_phases(&mut rng, channels.n_ris());
    let maps = build_r_tilde(channels, &e0, noise_power, config.power_budget)?;
    let problem = MmfProblem::new(channels, maps, targets, noise_power, config.power_budget);
    let x0 = JointVariable { a: init_weights(&problem, channels, &e0, &config.qos), e: e0 };
    let out = psa_mmf_solve(&problem, &x0, config, false, config.max_iters);
    let relaxed_min = problem.min_weighted_sinr(&out.x);
    let (bf_final, min_sinr, final_out) = final_processing_mmf(&problem, channels, &out.x, config);
    Ok(MmfResult {
        bf_final,
        min_weighted_sinr: min_sinr,
        relaxed_objective: out.best_objective,
        relaxed_min_weighted_sinr: relaxed_min,
        x_star: out.x,
        iterations: out.iterations,
        final_iterations: final_out.iterations,
        stalled: out.stalled,
        trace: out.trace,
    })
}

/// `e_final = exp(j angle(e*))`, then `a`-only PSA warm-started at `a*`.
/// Returns the beamformers, the min weighted SINR on the true channels and
/// the refinement run.
pub fn final_processing_mmf(
    problem: &MmfProblem,
    channels: &ChannelSet,
    x_star: &JointVariable,
    config: &MmfConfig,
) -> (BeamformerSet, f64, MmfOutcome) {
    let x0 = JointVariable { a: x_star.a.clone(), e: phase_only(&x_star.e) };
    let out = psa_mmf_solve(problem, &x0, config, true, config.final_max_iters);
    let bf = BeamformerSet { w: problem.beamformers(&out.x.a), e: out.x.e.clone() };
    let min = min_weighted_sinr(channels, &bf, &problem.targets, problem.noise_power).value;
    (bf, min, out)
}

/// MMF over `a` alone for a fixed RIS vector (maps built at that vector).
pub fn mmf_fixed_ris(channels: &ChannelSet, e: &CVector, targets: &[f64], noise_power: f64, config: &MmfConfig) -> Result<MmfResult> {
    let maps = build_r_tilde(channels, e, noise_power, config.power_budget)?;
    let problem = MmfProblem::new(channels, maps, targets, noise_power, config.power_budget);
    let x0 = JointVariable { a: init_weights(&problem, channels, e, &config.qos), e: e.clone() };
    let out = psa_mmf_solve(&problem, &x0, config, true, config.max_iters);
    let bf = BeamformerSet { w: problem.beamformers(&out.x.a), e: out.x.e.clone() };
    let min = min_weighted_sinr(channels, &bf, targets, noise_power).value;
    Ok(MmfResult {
        bf_final: bf,
        min_weighted_sinr: min,
        relaxed_objective: out.best_objective,
        relaxed_min_weighted_sinr: problem.min_weighted_sinr(&out.x),
        x_star: out.x,
        iterations: out.iterations,
        final_iterations: 0,
        stalled: out.stalled,
        trace: out.trace,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    /// `t = MMF(gamma, P)`.
    pub t: f64,
    /// `QoS(t gamma)`.
    pub qos_power: f64,
    pub power_residual: f64,
    /// `MMF(gamma, QoS(t gamma))`.
    pub roundtrip_t: f64,
    pub roundtrip_residual: f64,
    pub passed: bool,
}

/// Exact unicast MMF value by bisection over `t` on the QoS power `QoS(t gamma)`.
pub fn mmf_by_bisection(eff: &EffectiveChannels, targets: &[f64], noise_power: f64, budget: f64, qos: &QosSolverConfig) -> Result<f64> {
    let power_at = |t: f64| -> f64 {
        let scaled: Vec<f64> = targets.iter().map(|g| g * t).collect();
        solve_qos(eff, &scaled, noise_power, qos).map(|s| s.power).unwrap_or(f64::INFINITY)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while power_at(hi) <= budget {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Infeasible("MMF value is unbounded".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power_at(mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Checks the inverse relation between the QoS and MMF problems on a
/// unicast instance without RIS, where both are solved exactly.
pub fn qos_mmf_inversion_check(
    channels: &ChannelSet,
    targets: &[f64],
    noise_power: f64,
    budget: f64,
    qos: &QosSolverConfig,
) -> Result<InversionReport> {
    if !channels.layout().is_unicast() || channels.n_ris() != 0 {
        return Err(Error::InvalidScenario("inversion check needs a unicast instance without RIS".into()));
    }
    let eff = EffectiveChannels::new(channels, &CVector::zeros(0));
    let t = mmf_by_bisection(&eff, targets, noise_power, budget, qos)?;
    let scaled: Vec<f64> = targets.iter().map(|g| g * t).collect();
    let qos_power = solve_qos(&eff, &scaled, noise_power, qos)?.power;
    let power_residual = (qos_power - budget).abs() / budget;
    let roundtrip_t = mmf_by_bisection(&eff, targets, noise_power, qos_power, qos)?;
    let roundtrip_residual = (roundtrip_t - t).abs() / t;
    let passed = power_residual <= 1e-3 && roundtrip_residual <= 1e-3;
    if !passed {
        warn!("inversion check failed: power residual {power_residual:e}, roundtrip residual {roundtrip_residual:e}");
    }
    Ok(InversionReport { t, qos_power, power_residual, roundtrip_t, roundtrip_residual, passed })
}
