//! BS beamforming for a fixed RIS vector: minimize total transmit power
//! subject to per-user SINR targets.
//!
//! Beamformers follow the weighted-MMSE structure `w_i = R(lambda)^{-1} H_i a_i`
//! with `R(lambda) = I + sum_u lambda_u gamma_u h_u h_u^H`. Unicast instances
//! are solved exactly by the downlink-duality fixed point plus a closed form
//! for the powers. Multicast instances reuse the same multipliers and
//! optimize the per-group weight vectors `a_i` by successive convex
//! approximation; each convex round is solved in the dual by projected
//! gradient ascent, followed by per-group power control.

use log::{debug, warn};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_outer, cholesky, inner, CMatrix, CVector, C64};
use crate::model::{total_power, EffectiveChannels, GroupLayout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QosSolverConfig {
    pub max_fixed_point_iters: usize,
    pub fixed_point_tol: f64,
    pub sca_max_iters: usize,
    /// Relative power decrease below which SCA stops.
    pub sca_tol: f64,
    /// Initial dual ascent step, relative to the current power.
    pub inner_step_size: f64,
    pub inner_max_iters: usize,
}

impl Default for QosSolverConfig {
    fn default() -> Self {
        Self {
            max_fixed_point_iters: 500,
            fixed_point_tol: 1e-10,
            sca_max_iters: 50,
            sca_tol: 1e-5,
            inner_step_size: 1.0,
            inner_max_iters: 200,
        }
    }
}

impl QosSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fixed_point_tol > 0.0 && self.sca_tol > 0.0 && self.inner_step_size > 0.0) {
            return Err(Error::Config("QoS solver tolerances and step size must be positive".into()));
        }
        Ok(())
    }
}

/// Per-user multipliers `lambda_u >= 0` in flat user order.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMultipliers(pub Vec<f64>);

/// Per-group weight vectors `a_i` (length `K_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVectors(pub Vec<CVector>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    /// The fixed point blew up; the last bounded iterate was returned.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOutcome {
    pub lambda: DualMultipliers,
    pub iterations: usize,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QosSolution {
    pub w: Vec<CVector>,
    pub power: f64,
    pub lambda: DualMultipliers,
    pub weights: WeightVectors,
    pub status: SolveStatus,
    /// Power after initialization and after every accepted SCA round.
    pub sca_trace: Vec<f64>,
    pub fixed_point_iters: usize,
}

/// `R(lambda) = I + sum_u lambda_u gamma_u h_u h_u^H`.
pub fn build_covariance(eff: &EffectiveChannels, targets: &[f64], lambda: &DualMultipliers) -> CMatrix {
    let n = eff.n_antennas();
    let mut r = CMatrix::identity(n, n);
    for ((h, &g), &l) in eff.h.iter().zip(targets).zip(&lambda.0) {
        if l != 0.0 {
            add_outer(&mut r, h, l * g);
        }
    }
    r
}

/// `R^{-1} X` for a Hermitian positive definite `R`.
pub(crate) fn solve_hpd(r: &CMatrix, x: &CMatrix) -> CMatrix {
    match cholesky(r) {
        Some(ch) => ch.solve(x),
        None => r.clone().lu().solve(x).expect("covariance is positive definite"),
    }
}

/// Per-group `R^{-1} H_i`.
pub fn group_maps(eff: &EffectiveChannels, r: &CMatrix) -> Vec<CMatrix> {
    (0..eff.layout.n_groups()).map(|g| solve_hpd(r, &eff.group_matrix(g))).collect()
}

/// `w_i = R(lambda)^{-1} H_i a_i`.
pub fn beamformer_from_weights(
    eff: &EffectiveChannels,
    targets: &[f64],
    lambda: &DualMultipliers,
    a: &WeightVectors,
) -> Vec<CVector> {
    let r = build_covariance(eff, targets, lambda);
    group_maps(eff, &r).iter().zip(&a.0).map(|(c, ai)| c * ai).collect()
}

/// Downlink-duality fixed point `lambda_u <- 1 / ((1 + gamma_u) h_u^H R(lambda)^{-1} h_u)`.
///
/// Iteration stops when the largest relative change falls below the
/// tolerance. If the multipliers grow without bound (infeasible targets) the
/// last bounded iterate is returned with [`SolveStatus::Diverged`].
pub fn fixed_point_multipliers(eff: &EffectiveChannels, targets: &[f64], config: &QosSolverConfig) -> FixedPointOutcome {
    let k = eff.h.len();
    let n = eff.n_antennas();
    let norms: Vec<f64> = eff.h.iter().map(|h| h.norm_squared()).collect();
    let mut lambda: Vec<f64> = norms
        .iter()
        .zip(targets)
        .map(|(&nrm, &g)| if nrm > 0.0 { 1.0 / ((1.0 + g) * nrm) } else { 0.0 })
        .collect();
    let hmat = CMatrix::from_columns(&eff.h);
    for it in 1..=config.max_fixed_point_iters {
        let r = build_covariance(eff, targets, &DualMultipliers(lambda.clone()));
        let x = if n == 0 { CMatrix::zeros(0, k) } else { solve_hpd(&r, &hmat) };
        let mut next = vec![0.0; k];
        let mut change: f64 = 0.0;
        let mut blown = false;
        for u in 0..k {
            if norms[u] == 0.0 {
                continue;
            }
            let q = inner(&eff.h[u], &x.column(u).into_owned()).re;
            next[u] = 1.0 / ((1.0 + targets[u]) * q);
            if !next[u].is_finite() || next[u] * targets[u] * norms[u] > 1e8 {
                blown = true;
            }
            change = change.max((next[u] - lambda[u]).abs() / next[u].max(f64::MIN_POSITIVE));
        }
        if blown {
            warn!("fixed-point multipliers diverged after {it} iterations");
            return FixedPointOutcome { lambda: DualMultipliers(lambda), iterations: it, status: SolveStatus::Diverged };
        }
        lambda = next;
        if change <= config.fixed_point_tol {
            return FixedPointOutcome { lambda: DualMultipliers(lambda), iterations: it, status: SolveStatus::Converged };
        }
    }
    debug!("fixed-point multipliers hit the iteration cap");
    FixedPointOutcome {
        lambda: DualMultipliers(lambda),
        iterations: config.max_fixed_point_iters,
        status: SolveStatus::MaxIters,
    }
}

/// Exact unicast powers for the directions `c_i = R(lambda)^{-1} h_i`:
/// solves `V a~ = sigma^2 1` with `V_ii = |c_i^H h_i|^2 / gamma_i` and
/// `V_ij = -|c_j^H h_i|^2`, then `w_i = sqrt(a~_i) c_i`. Every SINR
/// constraint holds with equality.
pub fn solve_unicast_qos(
    eff: &EffectiveChannels,
    targets: &[f64],
    lambda: &DualMultipliers,
    noise_power: f64,
) -> Result<(Vec<CVector>, f64)> {
    if !eff.layout.is_unicast() {
        return Err(Error::InvalidScenario("unicast closed form needs one user per group".into()));
    }
    let g = eff.h.len();
    for (u, h) in eff.h.iter().enumerate() {
        if h.norm_squared() == 0.0 {
            return Err(Error::DegenerateChannel(eff.layout.user(u)));
        }
    }
    let r = build_covariance(eff, targets, lambda);
    let c = solve_hpd(&r, &CMatrix::from_columns(&eff.h));
    let cols: Vec<CVector> = (0..g).map(|i| c.column(i).into_owned()).collect();
    let v = DMatrix::from_fn(g, g, |i, j| {
        let p = inner(&cols[j], &eff.h[i]).norm_sqr();
        if i == j {
            p / targets[i]
        } else {
            -p
        }
    });
    let rhs = nalgebra::DVector::from_element(g, noise_power);
    let sol = v
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Infeasible(format!("singular unicast system for {g} users")))?;
    if sol.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Infeasible(format!("unicast power solution has a non-positive entry ({g} users)")));
    }
    let w: Vec<CVector> = cols.iter().zip(sol.iter()).map(|(ci, &p)| ci * C64::new(p.sqrt(), 0.0)).collect();
    let power = total_power(&w);
    Ok((w, power))
}

/// Per-group weight optimization by successive convex approximation for
/// beamformers `w_j = C_j a_j` with fixed maps `C_j` (N x K_j).
pub struct WeightSca<'a> {
    layout: &'a GroupLayout,
    targets: &'a [f64],
    noise_power: f64,
    /// `b[j][u] = C_j^H h_u`.
    b: Vec<Vec<CVector>>,
    /// `Q_j = C_j^H C_j`.
    q: Vec<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    pub a: WeightVectors,
    pub power: f64,
    pub trace: Vec<f64>,
    pub status: SolveStatus,
}

impl<'a> WeightSca<'a> {
    pub fn new(eff: &'a EffectiveChannels, maps: &[CMatrix], targets: &'a [f64], noise_power: f64) -> Self {
        let b = maps
            .iter()
            .map(|c| eff.h.iter().map(|h| c.ad_mul(h)).collect())
            .collect();
        let q = maps.iter().map(|c| c.ad_mul(c)).collect();
        Self { layout: &eff.layout, targets, noise_power, b, q }
    }

    pub fn power(&self, a: &[CVector]) -> f64 {
        a.iter().zip(&self.q).map(|(ai, qi)| inner(ai, &(qi * ai)).re).sum()
    }

    /// `|w_j^H h_u|^2` for every group `j` and user `u`.
    fn gains(&self, a: &[CVector]) -> Vec<Vec<f64>> {
        self.b.iter().zip(a).map(|(bj, aj)| bj.iter().map(|b| inner(aj, b).norm_sqr()).collect()).collect()
    }

    /// Smallest per-group powers making every SINR constraint hold for the
    /// directions `d_j`; `None` when no finite powers exist.
    pub fn power_control(&self, d: &[CVector]) -> Option<Vec<CVector>> {
        let g = self.layout.n_groups();
        let s = self.gains(d);
        let bump = 1.0 + 1e-9;
        for u in 0..self.layout.total_users() {
            if !(s[self.layout.group_of(u)][u] > 0.0) {
                return None;
            }
        }
        let mut p = vec![0.0; g];
        let mut first = 0.0;
        for it in 0..20_000 {
            let mut next = vec![0.0_f64; g];
            for u in 0..self.layout.total_users() {
                let gu = self.layout.group_of(u);
                let interference: f64 = (0..g).filter(|&j| j != gu).map(|j| p[j] * s[j][u]).sum();
                let need = self.targets[u] * bump * (interference + self.noise_power) / s[gu][u];
                next[gu] = next[gu].max(need);
            }
            let total: f64 = next.iter().sum();
            if it == 0 {
                first = total;
            }
            if !total.is_finite() || total > 1e6 * first {
                return None;
            }
            let change = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            p = next;
            if change <= 1e-13 * p.iter().cloned().fold(0.0, f64::max) {
                return Some(d.iter().zip(&p).map(|(dj, &pj)| dj * C64::new(pj.sqrt(), 0.0)).collect());
            }
        }
        None
    }

    pub fn solve(&self, config: &QosSolverConfig) -> Result<WeightSolution> {
        let ones: Vec<CVector> = self
            .layout
            .sizes()
            .iter()
            .map(|&k| CVector::from_element(k, C64::new(1.0, 0.0)))
            .collect();
        let mut a = self
            .power_control(&ones)
            .ok_or_else(|| Error::Infeasible("SCA initialization cannot meet the SINR targets".into()))?;
        let mut power = self.power(&a);
        let mut trace = vec![power];
        let mut nu = vec![power / self.layout.total_users() as f64; self.layout.total_users()];
        let mut status = SolveStatus::MaxIters;
        for round in 0..config.sca_max_iters {
            let candidate = self.convex_round(&a, &mut nu, power, config);
            let Some(next) = candidate.and_then(|d| self.power_control(&d)) else {
                status = SolveStatus::Converged;
                break;
            };
            let next_power = self.power(&next);
            if !(next_power < power) {
                status = SolveStatus::Converged;
                break;
            }
            let rel = (power - next_power) / power;
            a = next;
            power = next_power;
            trace.push(power);
            if rel <= config.sca_tol {
                debug!("SCA converged after {} rounds", round + 1);
                status = SolveStatus::Converged;
                break;
            }
        }
        Ok(WeightSolution { a: WeightVectors(a), power, trace, status })
    }

    /// Approximately solves the convexified problem around `a_t` by dual
    /// projected gradient ascent; returns the primal minimizer for the final
    /// multipliers.
    fn convex_round(&self, a_t: &[CVector], nu: &mut [f64], power: f64, config: &QosSolverConfig) -> Option<Vec<CVector>> {
        let k = self.layout.total_users();
        // x_u = b_gu^H a_g at the linearization point; each constraint is
        // divided by |x_u|^2 so that the multipliers carry power units.
        let x: Vec<C64> = (0..k)
            .map(|u| {
                let g = self.layout.group_of(u);
                self.b[g][u].dotc(&a_t[g])
            })
            .collect();
        let scale: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
        if scale.iter().any(|&s| !(s > 0.0)) {
            return None;
        }
        let mut cur = self.dual_eval(nu, &x, &scale)?;
        let mut step = config.inner_step_size * power;
        for _ in 0..config.inner_max_iters {
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = nu.iter().zip(&cur.slack).map(|(n, f)| (n + step * f).max(0.0)).collect();
                let moved = trial.iter().zip(nu.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if moved <= 1e-12 * power {
                    return Some(cur.a);
                }
                if let Some(next) = self.dual_eval(&trial, &x, &scale) {
                    if next.value >= cur.value - 1e-14 * cur.value.abs() {
                        nu.copy_from_slice(&trial);
                        cur = next;
                        step *= 1.5;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Some(cur.a)
    }

    fn dual_eval(&self, nu: &[f64], x: &[C64], scale: &[f64]) -> Option<DualPoint> {
        let g = self.layout.n_groups();
        let k = self.layout.total_users();
        let mut a = Vec::with_capacity(g);
        for j in 0..g {
            let mut m = self.q[j].clone();
            let ridge = 1e-12 * (0..m.nrows()).map(|i| m[(i, i)].re).sum::<f64>().max(f64::MIN_POSITIVE);
            for i in 0..m.nrows() {
                m[(i, i)] += ridge;
            }
            let mut r = CVector::zeros(self.layout.group_size(j));
            for u in 0..k {
                let coef = nu[u] / scale[u];
                if coef == 0.0 {
                    continue;
                }
                if self.layout.group_of(u) == j {
                    r += &self.b[j][u] * (x[u] * coef);
                } else {
                    add_outer(&mut m, &self.b[j][u], coef * self.targets[u]);
                }
            }
            let aj = match cholesky(&m) {
                Some(ch) => ch.solve(&r),
                None => m.lu().solve(&r)?,
            };
            a.push(aj);
        }
        let gains = self.gains(&a);
        let mut slack = vec![0.0; k];
        let mut value = self.power(&a);
        for u in 0..k {
            let gu = self.layout.group_of(u);
            let interference: f64 = (0..g).filter(|&j| j != gu).map(|j| gains[j][u]).sum();
            let lin = 2.0 * (x[u].conj() * self.b[gu][u].dotc(&a[gu])).re - scale[u];
            let f = (self.targets[u] * (interference + self.noise_power) - lin) / scale[u];
            slack[u] = f;
            value += nu[u] * f;
        }
        Some(DualPoint { a, value, slack })
    }
}

struct DualPoint {
    a: Vec<CVector>,
    value: f64,
    slack: Vec<f64>,
}

/// Multicast QoS: fixed-point multipliers, maps `C_i = R^{-1} H_i`, then SCA
/// over the weights. The returned beamformers meet every SINR target.
pub fn solve_multicast_qos(
    eff: &EffectiveChannels,
    targets: &[f64],
    noise_power: f64,
    config: &QosSolverConfig,
) -> Result<QosSolution> {
    check_channels(eff)?;
    let fp = fixed_point_multipliers(eff, targets, config);
    let r = build_covariance(eff, targets, &fp.lambda);
    let maps = group_maps(eff, &r);
    let sol = WeightSca::new(eff, &maps, targets, noise_power).solve(config)?;
    let w: Vec<CVector> = maps.iter().zip(&sol.a.0).map(|(c, a)| c * a).collect();
    Ok(QosSolution {
        power: total_power(&w),
        w,
        lambda: fp.lambda,
        weights: sol.a,
        status: sol.status,
        sca_trace: sol.trace,
        fixed_point_iters: fp.iterations,
    })
}

/// Dispatches to the exact unicast solver or the multicast SCA.
pub fn solve_qos(eff: &EffectiveChannels, targets: &[f64], noise_power: f64, config: &QosSolverConfig) -> Result<QosSolution> {
    if !eff.layout.is_unicast() {
        return solve_multicast_qos(eff, targets, noise_power, config);
    }
    check_channels(eff)?;
    let fp = fixed_point_multipliers(eff, targets, config);
    if fp.status == SolveStatus::Diverged {
        return Err(Error::Infeasible("SINR targets are not jointly achievable".into()));
    }
    let (w, power) = solve_unicast_qos(eff, targets, &fp.lambda, noise_power)?;
    let r = build_covariance(eff, targets, &fp.lambda);
    let weights = (0..w.len())
        .map(|i| {
            let c = solve_hpd(&r, &CMatrix::from_columns(&[eff.h[i].clone()]));
            let scale = (w[i].norm_squared() / c.norm_squared()).sqrt();
            CVector::from_element(1, C64::new(scale, 0.0))
        })
        .collect();
    Ok(QosSolution {
        w,
        power,
        lambda: fp.lambda,
        weights: WeightVectors(weights),
        status: fp.status,
        sca_trace: vec![power],
        fixed_point_iters: fp.iterations,
    })
}

fn check_channels(eff: &EffectiveChannels) -> Result<()> {
    for (u, h) in eff.h.iter().enumerate() {
        if h.norm_squared() == 0.0 {
            return Err(Error::DegenerateChannel(eff.layout.user(u)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian_vector, min_eigenvalue_hermitian};
    use crate::model::{sinr_all, GroupLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eff(seed: u64, n: usize, sizes: Vec<usize>) -> EffectiveChannels {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = GroupLayout::new(sizes).unwrap();
        let h = (0..layout.total_users()).map(|_| complex_gaussian_vector(&mut rng, n, 1.0)).collect();
        EffectiveChannels { layout, h }
    }

    #[test]
    fn covariance_cases() {
        let e = eff(1, 3, vec![1, 1]);
        let r = build_covariance(&e, &[1.0, 1.0], &DualMultipliers(vec![0.0, 0.0]));
        assert_eq!(r, CMatrix::identity(3, 3));
        let u = CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)]);
        let single = EffectiveChannels { layout: GroupLayout::new(vec![1]).unwrap(), h: vec![u] };
        let r = build_covariance(&single, &[2.0], &DualMultipliers(vec![0.5]));
        let mut eig: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] - 1.0).abs() < 1e-12 && (eig[1] - 1.0).abs() < 1e-12 && (eig[2] - 2.0).abs() < 1e-12);
        let r = build_covariance(&e, &[3.0, 0.5], &DualMultipliers(vec![0.7, 2.0]));
        assert!(min_eigenvalue_hermitian(&r) >= 1.0 - 1e-10);
    }

    #[test]
    fn beamformer_residual_and_matched_filter() {
        let e = eff(2, 4, vec![2, 1]);
        let t = [1.0, 2.0, 3.0];
        let a = WeightVectors(vec![CVector::from_element(2, C64::new(0.3, -1.0)), CVector::from_element(1, C64::new(1.0, 0.0))]);
        let zero = DualMultipliers(vec![0.0; 3]);
        let w = beamformer_from_weights(&e, &t, &zero, &a);
        assert!((&w[1] - &e.h[2]).norm() < 1e-14);
        let lambda = DualMultipliers(vec![0.2, 1.5, 0.4]);
        let w = beamformer_from_weights(&e, &t, &lambda, &a);
        let r = build_covariance(&e, &t, &lambda);
        for g in 0..2 {
            let resid = &r * &w[g] - e.group_matrix(g) * &a.0[g];
            assert!(resid.norm() <= 1e-10);
        }
    }

    #[test]
    fn unicast_single_user_closed_form() {
        let e = eff(3, 4, vec![1]);
        let fp = fixed_point_multipliers(&e, &[10.0], &QosSolverConfig::default());
        let nrm = e.h[0].norm_squared();
        assert!((fp.lambda.0[0] * nrm - 1.0).abs() < 1e-9);
        let (w, p) = solve_unicast_qos(&e, &[10.0], &fp.lambda, 0.1).unwrap();
        assert!((p - 0.1 * 10.0 / nrm).abs() < 1e-12 * p.max(1.0));
        let s = sinr_all(&e, &w, 0.1);
        assert!((s[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn unicast_orthogonal_channels_decouple() {
        let h0 = CVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        let h1 = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)]);
        let e = EffectiveChannels { layout: GroupLayout::new(vec![1, 1]).unwrap(), h: vec![h0, h1] };
        let (_, p) = solve_unicast_qos(&e, &[3.0, 5.0], &DualMultipliers(vec![0.0, 0.0]), 1.0).unwrap();
        assert!((p - (3.0 / 4.0 + 5.0)).abs() < 1e-12);
    }

    #[test]
    fn unicast_equality_and_noise_homogeneity() {
        let e = eff(4, 4, vec![1, 1, 1]);
        let t = [2.0, 4.0, 1.0];
        let sol = solve_qos(&e, &t, 0.5, &QosSolverConfig::default()).unwrap();
        for (s, g) in sinr_all(&e, &sol.w, 0.5).iter().zip(t) {
            assert!((s / g - 1.0).abs() < 1e-8);
        }
        let doubled = solve_qos(&e, &t, 1.0, &QosSolverConfig::default()).unwrap();
        assert!((doubled.power / sol.power - 2.0).abs() < 1e-8);
    }

    #[test]
    fn infeasible_unicast_is_reported() {
        // two users sharing one antenna cannot both reach SINR 10
        let e = eff(5, 1, vec![1, 1]);
        assert!(matches!(solve_qos(&e, &[10.0, 10.0], 1.0, &QosSolverConfig::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn vanishing_targets_give_vanishing_power() {
        let e = eff(6, 3, vec![1, 1]);
        let t = [1e-9, 1e-9];
        let fp = fixed_point_multipliers(&e, &t, &QosSolverConfig::default());
        let sol = solve_qos(&e, &t, 1.0, &QosSolverConfig::default()).unwrap();
        let scale: f64 = e.h.iter().map(|h| h.norm_squared()).fold(0.0, f64::max);
        assert!(fp.lambda.0.iter().zip(&e.h).all(|(l, h)| l * h.norm_squared() <= 1.0 + 1e-6));
        assert!(sol.power < 1e-7 / scale.min(1.0));
    }

    #[test]
    fn multicast_identical_users_is_matched_filter() {
        let base = eff(7, 3, vec![1]);
        let e = EffectiveChannels { layout: GroupLayout::new(vec![2]).unwrap(), h: vec![base.h[0].clone(), base.h[0].clone()] };
        let sol = solve_qos(&e, &[4.0, 4.0], 0.2, &QosSolverConfig::default()).unwrap();
        let expect = 0.2 * 4.0 / base.h[0].norm_squared();
        assert!((sol.power / expect - 1.0).abs() < 1e-6);
    }

    #[test]
    fn multicast_is_feasible_and_descending() {
        let e = eff(8, 4, vec![2, 2]);
        let t = [3.0, 3.0, 3.0, 3.0];
        let sol = solve_multicast_qos(&e, &t, 0.1, &QosSolverConfig::default()).unwrap();
        for (s, g) in sinr_all(&e, &sol.w, 0.1).iter().zip(t) {
            assert!(s / g >= 1.0 - 1e-6);
        }
        for pair in sol.sca_trace.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-9));
        }
        assert!((sol.power - total_power(&sol.w)).abs() <= 1e-12 * sol.power);
    }

    #[test]
    fn multicast_matches_unicast_when_groups_are_singletons() {
        let e = eff(9, 4, vec![1, 1]);
        let t = [2.0, 5.0];
        let uni = solve_qos(&e, &t, 0.3, &QosSolverConfig::default()).unwrap();
        let multi = solve_multicast_qos(&e, &t, 0.3, &QosSolverConfig::default()).unwrap();
        assert!((multi.power / uni.power - 1.0).abs() < 5e-3);
    }
}
