//! Projected subgradient solver for the RIS phase vector with the BS
//! beamformers held fixed.
//!
//! Each user contributes `phi_u(e) = -(SINR_u(e)/gamma_u + zeta ||e||^2 / M)`.
//! An iteration picks the user with the largest `phi_u`, steps along its
//! conjugate gradient and projects every element back into the unit disk.
//!
//! With `w` fixed every user's beam output is affine in `e`:
//! `w_j^H (h_d + G e) = c_ju + v_ju^H e`, so `c_ju` and `v_ju = G_u^H w_j`
//! are computed once and an iteration costs `O(G K M)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, CVector, C64};
use crate::model::GroupLayout;
use crate::scenario_gen::ChannelSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsaConfig {
    /// Penalty weight on `||e||^2 / M`.
    pub zeta: f64,
    pub step_size: f64,
    pub max_iters: usize,
    /// Iterations over which the best objective must improve.
    pub stall_window: usize,
    /// Relative improvement over one window below which the run stops.
    pub stall_tol: f64,
    pub seed: u64,
}

impl Default for PsaConfig {
    fn default() -> Self {
        Self { zeta: 0.1, step_size: 10.0, max_iters: 2000, stall_window: 200, stall_tol: 1e-6, seed: 0 }
    }
}

impl PsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0 && self.step_size > 0.0) {
            return Err(Error::Config("PSA penalty and step size must be positive".into()));
        }
        if self.stall_window == 0 {
            return Err(Error::Config("PSA stall window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-user `phi` values and the lexicographically first maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiEvaluation {
    pub values: Vec<f64>,
    pub argmax: usize,
    pub best_value: f64,
}

impl PhiEvaluation {
    pub fn from_values(values: Vec<f64>) -> Self {
        let mut argmax = 0;
        for u in 1..values.len() {
            if values[u] > values[argmax] {
                argmax = u;
            }
        }
        let best_value = values[argmax];
        Self { values, argmax, best_value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Relaxed objective `min_u SINR_u/gamma_u + zeta ||e||^2 / M`.
    pub objective: f64,
    pub min_weighted_sinr: f64,
    pub norm_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsaOutcome {
    /// Best iterate by relaxed objective.
    pub e: CVector,
    pub best_objective: f64,
    pub iterations: usize,
    pub stalled: bool,
    pub trace: Vec<TraceRow>,
}

/// Beam outputs `c_ju + v_ju^H e` for fixed BS beamformers.
#[derive(Debug, Clone)]
pub struct RisProblem {
    layout: GroupLayout,
    targets: Vec<f64>,
    noise_power: f64,
    n_ris: usize,
    /// `c[u][j] = w_j^H h_d,u`.
    c: Vec<Vec<C64>>,
    /// `v[u][j] = G_u^H w_j`.
    v: Vec<Vec<CVector>>,
}

impl RisProblem {
    pub fn new(channels: &ChannelSet, w: &[CVector], targets: &[f64], noise_power: f64) -> Self {
        let k = channels.n_users();
        let c = (0..k).map(|u| w.iter().map(|wj| inner(wj, &channels.h_direct()[u])).collect()).collect();
        let v = (0..k).map(|u| w.iter().map(|wj| channels.cascaded()[u].ad_mul(wj)).collect()).collect();
        Self {
            layout: channels.layout().clone(),
            targets: targets.to_vec(),
            noise_power,
            n_ris: channels.n_ris(),
            c,
            v,
        }
    }

    pub fn n_ris(&self) -> usize {
        self.n_ris
    }

    fn outputs(&self, e: &CVector, u: usize) -> Vec<C64> {
        self.c[u].iter().zip(&self.v[u]).map(|(c, v)| c + inner(v, e)).collect()
    }

    /// Signal and interference-plus-noise of user `u`.
    fn signal_interference(&self, s: &[C64], u: usize) -> (f64, f64) {
        let g = self.layout.group_of(u);
        let mut interference = self.noise_power;
        for (j, sj) in s.iter().enumerate() {
            if j != g {
                interference += sj.norm_sqr();
            }
        }
        (s[g].norm_sqr(), interference)
    }

    fn penalty(&self, e: &CVector, zeta: f64) -> f64 {
        if self.n_ris == 0 {
            0.0
        } else {
            zeta * e.norm_squared() / self.n_ris as f64
        }
    }

    pub fn weighted_sinr(&self, e: &CVector, u: usize) -> f64 {
        let (s, i) = self.signal_interference(&self.outputs(e, u), u);
        s / (i * self.targets[u])
    }

    pub fn min_weighted_sinr(&self, e: &CVector) -> f64 {
        (0..self.layout.total_users()).map(|u| self.weighted_sinr(e, u)).fold(f64::INFINITY, f64::min)
    }

    /// `phi_u(e) = -(SINR_u / gamma_u + zeta ||e||^2 / M)`.
    pub fn phi(&self, e: &CVector, zeta: f64, u: usize) -> f64 {
        -(self.weighted_sinr(e, u) + self.penalty(e, zeta))
    }

    pub fn evaluate(&self, e: &CVector, zeta: f64) -> PhiEvaluation {
        let pen = self.penalty(e, zeta);
        PhiEvaluation::from_values((0..self.layout.total_users()).map(|u| -(self.weighted_sinr(e, u) + pen)).collect())
    }

    /// Relaxed objective `min_u SINR_u/gamma_u + zeta ||e||^2 / M`.
    pub fn objective(&self, e: &CVector, zeta: f64) -> f64 {
        -self.evaluate(e, zeta).best_value
    }

    /// Conjugate (Wirtinger) gradient `d phi_u / d e*`:
    /// `-(q_g I - S sum_{j != g} q_j) / (gamma I^2) - (zeta/M) e` with `q_j = v_ju s_ju`.
    pub fn grad(&self, e: &CVector, zeta: f64, u: usize) -> CVector {
        let s = self.outputs(e, u);
        let (sig, inter) = self.signal_interference(&s, u);
        let g = self.layout.group_of(u);
        let mut num = &self.v[u][g] * (s[g] * inter);
        for (j, sj) in s.iter().enumerate() {
            if j != g {
                num -= &self.v[u][j] * (sj * sig);
            }
        }
        let mut grad = num * C64::new(-1.0 / (self.targets[u] * inter * inter), 0.0);
        if self.n_ris > 0 {
            grad -= e * C64::new(zeta / self.n_ris as f64, 0.0);
        }
        grad
    }
}

/// Per-element projection onto the unit disk.
pub fn project_unit_disk(e: &CVector) -> CVector {
    e.map(|v| {
        let r = v.norm();
        if r <= 1.0 {
            return v;
        }
        // rounding can leave |v / r| one ulp above 1; nudge inward so a
        // second projection is the identity
        let mut y = v / r;
        while y.norm() > 1.0 {
            y *= 1.0 - f64::EPSILON;
        }
        y
    })
}

/// Best-so-far stall test over a fixed window.
#[derive(Debug, Clone)]
pub(crate) struct StallMonitor {
    history: Vec<f64>,
    window: usize,
    tol: f64,
}

impl StallMonitor {
    pub(crate) fn new(window: usize, tol: f64) -> Self {
        Self { history: Vec::new(), window, tol }
    }

    /// Records the best objective after one iteration; true once stalled.
    pub(crate) fn push(&mut self, best: f64) -> bool {
        self.history.push(best);
        let n = self.history.len();
        if n <= self.window {
            return false;
        }
        let old = self.history[n - 1 - self.window];
        best - old <= self.tol * best.abs().max(f64::MIN_POSITIVE)
    }
}

/// Runs the projected subgradient iteration from `e_init` (projected first).
pub fn psa_solve(problem: &RisProblem, e_init: &CVector, config: &PsaConfig) -> PsaOutcome {
    psa_solve_with(problem, e_init, config, |_| {})
}

/// [`psa_solve`] with a callback on every iterate, the projected start included.
pub fn psa_solve_with(problem: &RisProblem, e_init: &CVector, config: &PsaConfig, mut on_iterate: impl FnMut(&CVector)) -> PsaOutcome {
    let mut e = project_unit_disk(e_init);
    on_iterate(&e);
    let mut eval = problem.evaluate(&e, config.zeta);
    let mut best_e = e.clone();
    let mut best = -eval.best_value;
    let mut trace = vec![trace_row(problem, 0, &e, &eval, config.zeta)];
    let mut monitor = StallMonitor::new(config.stall_window, config.stall_tol);
    let mut iterations = 0;
    let mut stalled = false;
    if problem.n_ris() == 0 {
        return PsaOutcome { e, best_objective: best, iterations, stalled: true, trace };
    }
    let alpha = C64::new(config.step_size, 0.0);
    for it in 1..=config.max_iters {
        let grad = problem.grad(&e, config.zeta, eval.argmax);
        e = project_unit_disk(&(&e - grad * alpha));
        on_iterate(&e);
        eval = problem.evaluate(&e, config.zeta);
        let obj = -eval.best_value;
        if obj > best {
            best = obj;
            best_e.copy_from(&e);
        }
        trace.push(trace_row(problem, it, &e, &eval, config.zeta));
        iterations = it;
        if monitor.push(best) {
            stalled = true;
            break;
        }
    }
    PsaOutcome { e: best_e, best_objective: best, iterations, stalled, trace }
}

fn trace_row(problem: &RisProblem, iteration: usize, e: &CVector, eval: &PhiEvaluation, zeta: f64) -> TraceRow {
    let norm_ratio = if problem.n_ris() == 0 { 0.0 } else { e.norm_squared() / problem.n_ris() as f64 };
    TraceRow {
        iteration,
        objective: -eval.best_value,
        min_weighted_sinr: -eval.best_value - zeta * norm_ratio,
        norm_ratio,
    }
}

/// Writes trace rows as CSV with a header line.
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, complex_gaussian_vector, CMatrix};
    use crate::model::{sinr, BeamformerSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64, n: usize, m: usize, sizes: Vec<usize>) -> (ChannelSet, Vec<CVector>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = GroupLayout::new(sizes).unwrap();
        let k = layout.total_users();
        let g = layout.n_groups();
        let hr = CMatrix::from_fn(m, n, |_, _| complex_gaussian(&mut rng, 1.0));
        let hd = (0..k).map(|_| complex_gaussian_vector(&mut rng, n, 0.1)).collect();
        let hru = (0..k).map(|_| complex_gaussian_vector(&mut rng, m, 1.0)).collect();
        let w = (0..g).map(|_| complex_gaussian_vector(&mut rng, n, 1.0)).collect();
        (ChannelSet::new(layout, hr, hd, hru).unwrap(), w)
    }

    #[test]
    fn phi_trivial_values() {
        let (ch, w) = instance(1, 3, 4, vec![1, 1]);
        let zero_direct = ChannelSet::new(
            ch.layout().clone(),
            ch.h_bs_ris().clone(),
            vec![CVector::zeros(3); 2],
            ch.h_ris_user().to_vec(),
        )
        .unwrap();
        let p = RisProblem::new(&zero_direct, &w, &[1.0, 1.0], 1.0);
        assert_eq!(p.phi(&CVector::zeros(4), 0.1, 0), 0.0);
    }

    #[test]
    fn phi_matches_model_sinr() {
        let (ch, w) = instance(2, 3, 5, vec![2, 1]);
        let t = [2.0, 0.5, 3.0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = project_unit_disk(&complex_gaussian_vector(&mut rng, 5, 1.0));
        let p = RisProblem::new(&ch, &w, &t, 0.3);
        let bf = BeamformerSet { w: w.clone(), e: e.clone() };
        for u in 0..3 {
            let s = sinr(&ch, &bf, ch.layout().user(u), 0.3);
            let expect = -(s / t[u] + 0.2 * e.norm_squared() / 5.0);
            assert!((p.phi(&e, 0.2, u) - expect).abs() <= 1e-12 * expect.abs());
        }
    }

    #[test]
    fn phi_at_unit_modulus_and_target() {
        // one user, no interference: choose noise so that SINR equals gamma
        let (ch, w) = instance(3, 2, 3, vec![1]);
        let e = CVector::from_element(3, C64::new(0.0, 1.0));
        let p0 = RisProblem::new(&ch, &w, &[1.0], 1.0);
        let s = p0.weighted_sinr(&e, 0);
        let p = RisProblem::new(&ch, &w, &[s], 1.0);
        assert!((p.phi(&e, 0.1, 0) + 1.1).abs() < 1e-12);
    }

    #[test]
    fn argmax_tie_break_and_selection() {
        let ev = PhiEvaluation::from_values(vec![-3.0, -1.0, -2.0]);
        assert_eq!((ev.argmax, ev.best_value), (1, -1.0));
        let ev = PhiEvaluation::from_values(vec![-2.0, -2.0, -2.0]);
        assert_eq!(ev.argmax, 0);
    }

    #[test]
    fn gradient_trivial_cases() {
        let (ch, _) = instance(4, 3, 4, vec![1, 1]);
        let e = CVector::from_element(4, C64::new(0.5, 0.25));
        let zero_w = vec![CVector::zeros(3); 2];
        let p = RisProblem::new(&ch, &zero_w, &[1.0, 1.0], 1.0);
        let g = p.grad(&e, 0.4, 1);
        assert!((g + &e * C64::new(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn projection_cases() {
        let inside = C64::from_polar(0.5, std::f64::consts::FRAC_PI_4);
        let outside = C64::from_polar(2.0, std::f64::consts::FRAC_PI_3);
        let e = CVector::from_vec(vec![inside, outside]);
        let p = project_unit_disk(&e);
        assert_eq!(p[0], inside);
        assert!((p[1] - C64::from_polar(1.0, std::f64::consts::FRAC_PI_3)).norm() < 1e-15);
        assert_eq!(project_unit_disk(&p), p);
    }

    #[test]
    fn zero_beamformers_push_to_boundary() {
        let (ch, _) = instance(5, 2, 6, vec![1]);
        let zero_w = vec![CVector::zeros(2)];
        let p = RisProblem::new(&ch, &zero_w, &[1.0], 1.0);
        let e0 = CVector::from_element(6, C64::new(0.1, 0.05));
        let out = psa_solve(&p, &e0, &PsaConfig::default());
        assert!((out.e.norm_squared() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn best_so_far_is_monotone_and_in_set() {
        let (ch, w) = instance(6, 3, 8, vec![2, 1]);
        let p = RisProblem::new(&ch, &w, &[1.0, 2.0, 1.5], 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e0 = crate::linalg::random_phases(&mut rng, 8);
        let cfg = PsaConfig { max_iters: 300, step_size: 1.0, ..Default::default() };
        let out = psa_solve(&p, &e0, &cfg);
        assert!(out.best_objective >= out.trace[0].objective);
        assert!((p.objective(&out.e, cfg.zeta) - out.best_objective).abs() < 1e-12);
        assert!(out.e.iter().all(|v| v.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let rows = vec![TraceRow { iteration: 0, objective: 1.0, min_weighted_sinr: 0.9, norm_ratio: 1.0 }];
        let mut buf = Vec::new();
        write_trace_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "iteration,objective,min_weighted_sinr,norm_ratio");
        assert_eq!(text.lines().count(), 2);
    }
}
