//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

pub mod props;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risbf::linalg::{complex_gaussian, complex_gaussian_vector, CMatrix, CVector, C64};
use risbf::{ChannelSet, GroupLayout};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// i.i.d. Rayleigh channels with unit-variance RIS links and direct links of
/// variance `direct_var`.
pub fn random_channels<R: Rng>(rng: &mut R, n: usize, m: usize, sizes: Vec<usize>, direct_var: f64) -> ChannelSet {
    let layout = GroupLayout::new(sizes).unwrap();
    let k = layout.total_users();
    let hr = CMatrix::from_fn(m, n, |_, _| complex_gaussian(rng, 1.0));
    let hd = (0..k).map(|_| complex_gaussian_vector(rng, n, direct_var)).collect();
    let hru = (0..k).map(|_| complex_gaussian_vector(rng, m, 1.0 / m.max(1) as f64)).collect();
    ChannelSet::new(layout, hr, hd, hru).unwrap()
}

pub fn random_point_in_disk<R: Rng>(rng: &mut R, m: usize) -> CVector {
    CVector::from_fn(m, |_, _| C64::from_polar(rng.random_range(0.05..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
}

pub fn unit(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Central differences of a real function of a complex vector along the real
/// and imaginary axes, returned as `df/dRe + j df/dIm` (twice the conjugate
/// Wirtinger gradient).
pub fn fd_gradient(f: impl Fn(&CVector) -> f64, x: &CVector, h: f64) -> CVector {
    let mut g = CVector::zeros(x.len());
    for m in 0..x.len() {
        let mut p = x.clone();
        let mut q = x.clone();
        p[m] += C64::new(h, 0.0);
        q[m] -= C64::new(h, 0.0);
        let re = (f(&p) - f(&q)) / (2.0 * h);
        p[m] = x[m] + C64::new(0.0, h);
        q[m] = x[m] - C64::new(0.0, h);
        let im = (f(&p) - f(&q)) / (2.0 * h);
        g[m] = C64::new(re, im);
    }
    g
}

pub fn rel_err(approx: &CVector, exact: &CVector) -> f64 {
    (approx - exact).norm() / exact.norm().max(f64::MIN_POSITIVE)
}

pub fn stack(blocks: &[CVector]) -> CVector {
    CVector::from_iterator(blocks.iter().map(|b| b.len()).sum(), blocks.iter().flat_map(|b| b.iter().copied()))
}

pub fn unstack(x: &CVector, sizes: &[usize]) -> Vec<CVector> {
    let mut out = Vec::new();
    let mut at = 0;
    for &k in sizes {
        out.push(x.rows(at, k).into_owned());
        at += k;
    }
    out
}

/// `h_i^H (noise I + sum_{j != i} q_j h_j h_j^H)^{-1} h_i`.
fn uplink_gain(h: &[CVector], q: &[f64], i: usize, noise: f64) -> f64 {
    let n = h[i].len();
    let mut r = DMatrix::<C64>::identity(n, n) * C64::new(noise, 0.0);
    for (j, hj) in h.iter().enumerate() {
        if j != i {
            r += hj * hj.adjoint() * C64::new(q[j], 0.0);
        }
    }
    let x = r.lu().solve(&h[i]).unwrap();
    h[i].dotc(&x).re
}

fn solve_level(h: &[CVector], targets: &[f64], noise: f64, level: usize, q: &mut [f64]) -> bool {
    let last = h.len() - 1;
    if level == last {
        q[last] = targets[last] / uplink_gain(h, q, last, noise);
        return true;
    }
    let residual = |c: f64, q: &mut [f64]| -> Option<f64> {
        q[level] = c;
        if !solve_level(h, targets, noise, level + 1, q) {
            return None;
        }
        Some(c * uplink_gain(h, q, level, noise) - targets[level])
    };
    let mut lo = 0.0;
    let mut hi = noise * targets[level] / h[level].norm_squared();
    let mut steps = 0;
    while residual(hi, q).is_none_or(|r| r < 0.0) {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 200 {
            return false;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid, q).is_none_or(|r| r < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    residual(hi, q).is_some()
}

/// Minimum downlink power for unicast SINR targets, computed as the total
/// uplink power meeting the same targets. The uplink powers are found by
/// nested bisection: user 0 by bisection, user 1 by bisection given user 0,
/// and so on, the last user in closed form.
pub fn unicast_power_oracle(h: &[CVector], targets: &[f64], noise: f64) -> Option<f64> {
    let mut q = vec![0.0; h.len()];
    solve_level(h, targets, noise, 0, &mut q).then(|| q.iter().sum())
}

/// Single multicast group of two users on a two-antenna BS:
/// `min ||w||^2` s.t. `|h_k^H w|^2 >= c_k` with `c_k = gamma_k noise`.
/// Either one constraint is active (MRT to that user, if it also serves the
/// other) or both are: then `A w = (sqrt c1, sqrt c2 e^{jp})` with
/// `A = [h1^H; h2^H]`, whose power `alpha + 2 Re(beta e^{jp})` is minimized
/// at `alpha - 2 |beta|`.
pub fn multicast_pair_oracle(h: &[CVector; 2], targets: [f64; 2], noise: f64) -> f64 {
    let c = [targets[0] * noise, targets[1] * noise];
    let mut best = f64::INFINITY;
    for k in 0..2 {
        let w = &h[k] * C64::new(c[k].sqrt() / h[k].norm_squared(), 0.0);
        if h[1 - k].dotc(&w).norm_sqr() >= c[1 - k] {
            best = best.min(w.norm_squared());
        }
    }
    let a = DMatrix::from_rows(&[h[0].adjoint(), h[1].adjoint()]);
    let g = (&a * a.adjoint()).try_inverse().unwrap();
    let alpha = g[(0, 0)].re * c[0] + g[(1, 1)].re * c[1];
    let beta = g[(0, 1)] * (c[0] * c[1]).sqrt();
    best.min(alpha - 2.0 * beta.norm())
}

/// Exhaustive search over a `steps x steps` grid of two unit-modulus phases.
pub fn phase_grid_max(steps: usize, f: impl Fn(&CVector) -> f64) -> f64 {
    let d = std::f64::consts::TAU / steps as f64;
    let mut best = f64::NEG_INFINITY;
    for i in 0..steps {
        for j in 0..steps {
            let e = CVector::from_vec(vec![unit(i as f64 * d), unit(j as f64 * d)]);
            best = best.max(f(&e));
        }
    }
    best
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
