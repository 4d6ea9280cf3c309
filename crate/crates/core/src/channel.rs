//! Rician TX-surface (`H`) and surface-RX (`G`) channels.
//!
//! LOS parts are rank-1 outer products of steering vectors: ULAs at the TX and RX,
//! a planar array (`N = N_h·N_v`) at the surface, with `b = b_v ⊗ b_h`. Pathloss is
//! applied once, in the Rician mixture; steering vectors are not normalized.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::tensor::{kron_vec, ComplexMatrix};
use crate::C64;

/// `[1, e^{jπ sinθ}, …, e^{jπ(M−1) sinθ}]`.
pub fn ula_steering(m: usize, theta: f64) -> Vec<C64> {
    progression(m, PI * libm::sin(theta))
}

/// Planar-array steering vector `b_v ⊗ b_h` for azimuth `psi` and elevation `phi`.
pub fn upa_steering(n_h: usize, n_v: usize, psi: f64, phi: f64) -> Vec<C64> {
    let cos_phi = libm::cos(phi);
    let h = progression(n_h, PI * libm::sin(psi) * cos_phi);
    let v = progression(n_v, PI * cos_phi);
    kron_vec(&v, &h)
}

fn progression(m: usize, step: f64) -> Vec<C64> {
    (0..m).map(|k| C64::from_polar(1.0, step * k as f64)).collect()
}

/// One draw of all angles plus the planar-array split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub theta_tx: f64,
    pub theta_rx: f64,
    pub psi_aoa: f64,
    pub phi_aoa: f64,
    pub psi_aod: f64,
    pub phi_aod: f64,
    pub n_h: usize,
    pub n_v: usize,
}

impl GeometrySample {
    /// Azimuths and ULA angles uniform in `[−π, π]`, elevations uniform in `[0, π/2]`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n_h: usize, n_v: usize) -> Self {
        let mut az = || rng.random_range(-PI..=PI);
        let theta_tx = az();
        let theta_rx = az();
        let psi_aoa = az();
        let psi_aod = az();
        let phi_aoa = rng.random_range(0.0..=FRAC_PI_2);
        let phi_aod = rng.random_range(0.0..=FRAC_PI_2);
        Self {
            theta_tx,
            theta_rx,
            psi_aoa,
            phi_aoa,
            psi_aod,
            phi_aod,
            n_h,
            n_v,
        }
    }

    pub fn n(&self) -> usize {
        self.n_h * self.n_v
    }
}

/// Splits `n` into the most square `(n_h, n_v)` with `n_h ≥ n_v`.
pub fn planar_split(n: usize) -> (usize, usize) {
    let mut n_v = libm::sqrt(n as f64) as usize;
    while n_v > 1 && !n.is_multiple_of(n_v) {
        n_v -= 1;
    }
    let n_v = n_v.max(1);
    (n / n_v, n_v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub m_t: usize,
    pub m_r: usize,
    /// Linear Rician factors; `f64::INFINITY` gives pure LOS.
    pub rician_k_h: f64,
    pub rician_k_g: f64,
    /// Linear pathloss gains.
    pub pathloss_h: f64,
    pub pathloss_g: f64,
    /// Linear gain of the feedback link.
    pub beta_f: f64,
}

impl ChannelParams {
    /// Equal Rician factor on both links, unit pathloss.
    pub fn normalized(m_t: usize, m_r: usize, k: f64) -> Self {
        Self {
            m_t,
            m_r,
            rician_k_h: k,
            rician_k_g: k,
            pathloss_h: 1.0,
            pathloss_g: 1.0,
            beta_f: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m_t == 0 || self.m_r == 0 {
            return Err(invalid("antenna counts must be positive"));
        }
        for (name, v) in [("rician K", self.rician_k_h), ("rician K", self.rician_k_g)] {
            if v.is_nan() || v < 0.0 {
                return Err(invalid(alloc::format!("{name} must be non-negative, got {v}")));
            }
        }
        for v in [self.pathloss_h, self.pathloss_g, self.beta_f] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(alloc::format!(
                    "pathloss must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N × M_T`.
    pub h: ComplexMatrix,
    /// `M_R × N`.
    pub g: ComplexMatrix,
    pub g_f: C64,
    pub rician_k_h: f64,
    pub rician_k_g: f64,
    pub pathloss_h: f64,
    pub pathloss_g: f64,
}

/// Rank-1 LOS parts `(H_LOS, G_LOS) = (b_IRS a_TXᴴ, b_RX a_IRSᴴ)`.
pub fn los_components(m_t: usize, m_r: usize, geo: &GeometrySample) -> (ComplexMatrix, ComplexMatrix) {
    let a_tx = ula_steering(m_t, geo.theta_tx);
    let b_rx = ula_steering(m_r, geo.theta_rx);
    let b_irs = upa_steering(geo.n_h, geo.n_v, geo.psi_aoa, geo.phi_aoa);
    let a_irs = upa_steering(geo.n_h, geo.n_v, geo.psi_aod, geo.phi_aod);
    (outer_conj(&b_irs, &a_tx), outer_conj(&b_rx, &a_irs))
}

fn outer_conj(x: &[C64], y: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
}

/// `(√(K/(K+1)), √(1/(K+1)))`, with the `K = ∞` limit handled exactly.
pub fn rician_weights(k: f64) -> (f64, f64) {
    if k.is_infinite() {
        (1.0, 0.0)
    } else {
        (libm::sqrt(k / (k + 1.0)), libm::sqrt(1.0 / (k + 1.0)))
    }
}

/// Circularly symmetric `CN(0, 1)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

fn mix(los: &ComplexMatrix, nlos: &ComplexMatrix, alpha: f64, k: f64) -> ComplexMatrix {
    let (wl, wn) = rician_weights(k);
    let (wl, wn) = (libm::sqrt(alpha) * wl, libm::sqrt(alpha) * wn);
    let data = los
        .data()
        .iter()
        .zip(nlos.data())
        .map(|(&l, &n)| l * wl + n * wn)
        .collect();
    ComplexMatrix::new(los.rows(), los.cols(), data).expect("same dimensions")
}

/// Draws `H`, `G` and `g_F`. NLOS parts are always drawn so the RNG stream does
/// not depend on the Rician factors.
pub fn sample_channels<R: Rng + ?Sized>(
    params: &ChannelParams,
    geo: &GeometrySample,
    rng: &mut R,
) -> Result<ChannelRealization> {
    params.validate()?;
    if geo.n() == 0 {
        return Err(invalid("surface must have at least one element"));
    }
    let (h_los, g_los) = los_components(params.m_t, params.m_r, geo);
    let h_nlos = gaussian_matrix(geo.n(), params.m_t, rng);
    let g_nlos = gaussian_matrix(params.m_r, geo.n(), rng);
    let g_f = complex_gaussian(rng) * libm::sqrt(params.beta_f);
    Ok(ChannelRealization {
        h: mix(&h_los, &h_nlos, params.pathloss_h, params.rician_k_h),
        g: mix(&g_los, &g_nlos, params.pathloss_g, params.rician_k_g),
        g_f,
        rician_k_h: params.rician_k_h,
        rician_k_g: params.rician_k_g,
        pathloss_h: params.pathloss_h,
        pathloss_g: params.pathloss_g,
    })
}
