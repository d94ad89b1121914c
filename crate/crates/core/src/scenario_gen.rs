//! Synthetic scenario generation: BS/RIS/user geometry, array steering
//! vectors, distance-based path gains and seeded Rician/Rayleigh channel draws.
//!
//! All path gains are power gains in dB. The BS-RIS matrix is scaled in
//! amplitude by the square root of its linear path gain so that every entry
//! of the NLOS part has variance equal to that gain.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, complex_gaussian_vector, from_db, CMatrix, CVector, C64};
use crate::model::{GroupLayout, Scenario};

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub bs_position: Point3,
    pub ris_position: Point3,
    pub user_drop_radius: f64,
    /// `(M_y, M_z)` element counts.
    pub ris_grid: (usize, usize),
    pub element_spacing_wavelengths: f64,
    pub antenna_spacing_wavelengths: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            bs_position: [0.0, 0.0, 0.0],
            ris_position: [70.0, 70.0, 0.0],
            user_drop_radius: 20.0,
            ris_grid: (10, 10),
            element_spacing_wavelengths: 0.5,
            antenna_spacing_wavelengths: 0.5,
        }
    }
}

impl GeometryConfig {
    pub fn n_ris(&self) -> usize {
        self.ris_grid.0 * self.ris_grid.1
    }

    pub fn validate(&self) -> Result<()> {
        if self.ris_grid.0 == 0 || self.ris_grid.1 == 0 {
            return Err(Error::InvalidGeometry("RIS grid dimensions must be >= 1".into()));
        }
        if !(self.user_drop_radius > 0.0) {
            return Err(Error::InvalidGeometry("user drop radius must be positive".into()));
        }
        distance(&self.bs_position, &self.ris_position)?;
        Ok(())
    }

    /// A near-square `(M_y, M_z)` grid holding exactly `m` elements.
    pub fn grid_for(m: usize) -> (usize, usize) {
        if m == 0 {
            return (0, 0);
        }
        let mut mz = (m as f64).sqrt().floor() as usize;
        while mz > 1 && !m.is_multiple_of(mz) {
            mz -= 1;
        }
        (m / mz.max(1), mz.max(1))
    }
}

/// Path-loss law `intercept_db + slope_db * log10(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    pub intercept_db: f64,
    pub slope_db: f64,
}

impl PathLoss {
    pub const fn new(intercept_db: f64, slope_db: f64) -> Self {
        Self { intercept_db, slope_db }
    }

    pub fn gain_db(&self, distance: f64) -> Result<f64> {
        path_gain_db(distance, self.intercept_db, self.slope_db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub rician_factor: f64,
    pub bs_ris_pathloss: PathLoss,
    pub ris_user_pathloss: PathLoss,
    pub bs_user_pathloss: PathLoss,
    /// Receiver noise power in mW.
    pub noise_power: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            rician_factor: 10.0,
            bs_ris_pathloss: PathLoss::new(-30.0, -22.0),
            ris_user_pathloss: PathLoss::new(-30.0, -22.0),
            bs_user_pathloss: PathLoss::new(-32.6, -36.7),
            noise_power: from_db(-100.0),
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power > 0.0) {
            return Err(Error::InvalidScenario("noise power must be positive".into()));
        }
        if !(self.rician_factor >= 0.0) {
            return Err(Error::InvalidScenario("Rician factor must be non-negative".into()));
        }
        Ok(())
    }
}

/// BS-RIS matrix, per-user direct and RIS-side channels, and the derived
/// cascaded channels `G_ik = H_r^H diag(h^r_ik)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    layout: GroupLayout,
    h_bs_ris: CMatrix,
    h_direct: Vec<CVector>,
    h_ris_user: Vec<CVector>,
    cascaded: Vec<CMatrix>,
}

impl ChannelSet {
    /// `h_bs_ris` is `M x N`; user vectors are in flat user order.
    pub fn new(layout: GroupLayout, h_bs_ris: CMatrix, h_direct: Vec<CVector>, h_ris_user: Vec<CVector>) -> Result<Self> {
        let (m, n) = h_bs_ris.shape();
        let k = layout.total_users();
        if h_direct.len() != k || h_ris_user.len() != k {
            return Err(Error::InvalidScenario(format!("expected channels for {k} users")));
        }
        if h_direct.iter().any(|h| h.len() != n) {
            return Err(Error::InvalidScenario(format!("direct channels must have length N = {n}")));
        }
        if h_ris_user.iter().any(|h| h.len() != m) {
            return Err(Error::InvalidScenario(format!("RIS-user channels must have length M = {m}")));
        }
        let cascaded = h_ris_user.iter().map(|hr| cascade(&h_bs_ris, hr)).collect();
        Ok(Self { layout, h_bs_ris, h_direct, h_ris_user, cascaded })
    }

    pub fn layout(&self) -> &GroupLayout {
        &self.layout
    }
    pub fn h_bs_ris(&self) -> &CMatrix {
        &self.h_bs_ris
    }
    pub fn h_direct(&self) -> &[CVector] {
        &self.h_direct
    }
    pub fn h_ris_user(&self) -> &[CVector] {
        &self.h_ris_user
    }
    pub fn cascaded(&self) -> &[CMatrix] {
        &self.cascaded
    }
    pub fn n_antennas(&self) -> usize {
        self.h_bs_ris.ncols()
    }
    pub fn n_ris(&self) -> usize {
        self.h_bs_ris.nrows()
    }
    pub fn n_users(&self) -> usize {
        self.layout.total_users()
    }

    /// Same direct channels with the RIS removed (`M = 0`).
    pub fn without_ris(&self) -> Self {
        let n = self.n_antennas();
        Self::new(
            self.layout.clone(),
            CMatrix::zeros(0, n),
            self.h_direct.clone(),
            vec![CVector::zeros(0); self.n_users()],
        )
        .expect("dimensions are preserved")
    }

    /// Writes the little-endian dump: magic, dims, group sizes, then `H_r`
    /// row-major and each user's `h_d` and `h_r`, all as `(re, im)` f64 pairs.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(CHANNEL_MAGIC)?;
        write_u64(&mut out, self.n_antennas() as u64)?;
        write_u64(&mut out, self.n_ris() as u64)?;
        write_u64(&mut out, self.layout.n_groups() as u64)?;
        for &k in self.layout.sizes() {
            write_u64(&mut out, k as u64)?;
        }
        for r in 0..self.n_ris() {
            for c in 0..self.n_antennas() {
                write_c64(&mut out, self.h_bs_ris[(r, c)])?;
            }
        }
        for (hd, hr) in self.h_direct.iter().zip(&self.h_ris_user) {
            for v in hd.iter().chain(hr.iter()) {
                write_c64(&mut out, *v)?;
            }
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != CHANNEL_MAGIC {
            return Err(Error::Format("bad channel dump magic".into()));
        }
        let n = read_len(&mut input)?;
        let m = read_len(&mut input)?;
        let g = read_len(&mut input)?;
        let sizes = (0..g).map(|_| read_len(&mut input)).collect::<Result<Vec<_>>>()?;
        let layout = GroupLayout::new(sizes)?;
        let mut h = CMatrix::zeros(m, n);
        for r in 0..m {
            for c in 0..n {
                h[(r, c)] = read_c64(&mut input)?;
            }
        }
        let mut hd = Vec::new();
        let mut hr = Vec::new();
        for _ in 0..layout.total_users() {
            hd.push(read_cvector(&mut input, n)?);
            hr.push(read_cvector(&mut input, m)?);
        }
        Self::new(layout, h, hd, hr)
    }
}

const CHANNEL_MAGIC: &[u8; 8] = b"RISCHAN1";

fn cascade(h_bs_ris: &CMatrix, h_ris_user: &CVector) -> CMatrix {
    // H_r^H diag(h_r): column m is conj(row m of H_r) scaled by h_r[m]
    let (m, n) = h_bs_ris.shape();
    CMatrix::from_fn(n, m, |r, c| h_bs_ris[(c, r)].conj() * h_ris_user[c])
}

pub(crate) fn write_u64<W: Write>(out: &mut W, v: u64) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_c64<W: Write>(out: &mut W, v: C64) -> Result<()> {
    out.write_all(&v.re.to_le_bytes())?;
    out.write_all(&v.im.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_len<R: Read>(input: &mut R) -> Result<usize> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    let v = u64::from_le_bytes(b);
    if v > (1 << 24) {
        return Err(Error::Format(format!("implausible dimension {v}")));
    }
    Ok(v as usize)
}

pub(crate) fn read_c64<R: Read>(input: &mut R) -> Result<C64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    let re = f64::from_le_bytes(b);
    input.read_exact(&mut b)?;
    Ok(C64::new(re, f64::from_le_bytes(b)))
}

pub(crate) fn read_cvector<R: Read>(input: &mut R, len: usize) -> Result<CVector> {
    let v = (0..len).map(|_| read_c64(input)).collect::<Result<Vec<_>>>()?;
    Ok(CVector::from_vec(v))
}

/// ULA steering vector along the x-axis:
/// entry `n` is `exp(j 2 pi n spacing cos(psi) cos(theta))`.
pub fn steering_vector_bs(psi1: f64, theta1: f64, n_antennas: usize, spacing: f64) -> CVector {
    let dircos = psi1.cos() * theta1.cos();
    CVector::from_fn(n_antennas, |n, _| C64::from_polar(1.0, 2.0 * PI * n as f64 * spacing * dircos))
}

/// Planar RIS steering vector on the (y, z) plane using the
/// `y_m = (m-1) mod M_y`, `z_m = floor(m / M_y) + 1` element indexing.
pub fn steering_vector_ris(psi2: f64, theta2: f64, grid: (usize, usize), spacing: f64) -> CVector {
    let (my, mz) = grid;
    let sy = psi2.sin() * theta2.cos();
    let sz = theta2.sin();
    CVector::from_fn(my * mz, |idx, _| {
        let m = idx + 1;
        let y = ((m - 1) % my) as f64;
        let z = (m / my + 1) as f64;
        C64::from_polar(1.0, 2.0 * PI * spacing * (y * sy + z * sz))
    })
}

pub fn path_gain_db(distance: f64, intercept_db: f64, slope_db: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(Error::InvalidGeometry(format!("distance must be positive, got {distance}")));
    }
    Ok(intercept_db + slope_db * distance.log10())
}

pub fn distance(a: &Point3, b: &Point3) -> Result<f64> {
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::InvalidGeometry("coincident positions".into()))
    }
}

/// Azimuth and elevation of the direction `from -> to`.
pub fn direction_angles(from: &Point3, to: &Point3) -> Result<(f64, f64)> {
    let d = distance(from, to)?;
    let (dx, dy, dz) = (to[0] - from[0], to[1] - from[1], to[2] - from[2]);
    Ok((dy.atan2(dx), (dz / d).asin()))
}

/// Line-of-sight component `b_RIS b_BS^H` for the configured positions.
pub fn los_matrix(geometry: &GeometryConfig, n_antennas: usize) -> Result<CMatrix> {
    let (psi1, theta1) = direction_angles(&geometry.bs_position, &geometry.ris_position)?;
    let (psi2, theta2) = direction_angles(&geometry.ris_position, &geometry.bs_position)?;
    let b_bs = steering_vector_bs(psi1, theta1, n_antennas, geometry.antenna_spacing_wavelengths);
    let b_ris = steering_vector_ris(psi2, theta2, geometry.ris_grid, geometry.element_spacing_wavelengths);
    Ok(&b_ris * b_bs.adjoint())
}

/// Uniform-area drop inside the disk of `radius` around the RIS projection, at z = 0.
pub fn drop_user<R: Rng + ?Sized>(rng: &mut R, geometry: &GeometryConfig) -> Point3 {
    let r = geometry.user_drop_radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    [geometry.ris_position[0] + r * phi.cos(), geometry.ris_position[1] + r * phi.sin(), 0.0]
}

/// Draws one full channel realization. Identical inputs give bit-identical output.
pub fn generate_channels(
    scenario: &Scenario,
    geometry: &GeometryConfig,
    params: &ChannelParams,
    seed: u64,
) -> Result<ChannelSet> {
    scenario.validate()?;
    geometry.validate()?;
    params.validate()?;
    let n = scenario.n_antennas;
    let m = scenario.n_ris;
    if m != geometry.n_ris() {
        return Err(Error::InvalidGeometry(format!(
            "scenario has M = {m} but the RIS grid holds {}",
            geometry.n_ris()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let d_br = distance(&geometry.bs_position, &geometry.ris_position)?;
    let amp_br = from_db(params.bs_ris_pathloss.gain_db(d_br)?).sqrt();
    let k = params.rician_factor;
    let los_w = (k / (1.0 + k)).sqrt();
    let nlos_w = (1.0 / (1.0 + k)).sqrt();
    let los = los_matrix(geometry, n)?;
    let mut h_bs_ris = CMatrix::zeros(m, n);
    for r in 0..m {
        for c in 0..n {
            let nlos = complex_gaussian(&mut rng, 1.0);
            h_bs_ris[(r, c)] = (los[(r, c)] * los_w + nlos * nlos_w) * amp_br;
        }
    }

    let k_tot = scenario.total_users();
    let mut h_direct = Vec::with_capacity(k_tot);
    let mut h_ris_user = Vec::with_capacity(k_tot);
    for _ in 0..k_tot {
        let pos = drop_user(&mut rng, geometry);
        let beta_r = from_db(params.ris_user_pathloss.gain_db(distance(&pos, &geometry.ris_position)?)?);
        let beta_d = from_db(params.bs_user_pathloss.gain_db(distance(&pos, &geometry.bs_position)?)?);
        h_ris_user.push(complex_gaussian_vector(&mut rng, m, beta_r));
        h_direct.push(complex_gaussian_vector(&mut rng, n, beta_d));
    }
    ChannelSet::new(scenario.layout.clone(), h_bs_ris, h_direct, h_ris_user)
}
