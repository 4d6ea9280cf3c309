use crate::error::{invalid, Error, Result};

use super::SystemParams;

/// Frame split: `T = T_PD + T_F`, with `T_E` the pilot share of `T_PD`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTiming {
    pub t_e: f64,
    pub t_f: f64,
    pub t: f64,
}

impl FrameTiming {
    pub fn new(params: &SystemParams, t_f: f64) -> Result<Self> {
        if !(t_f.is_finite() && t_f >= 0.0) {
            return Err(invalid("feedback duration must be finite and non-negative"));
        }
        let t_e = params.estimation_time();
        let t_pd = t_e / params.pilot_fraction;
        Ok(Self {
            t_e,
            t_f,
            t: t_pd + t_f,
        })
    }

    /// Explicit durations, for checking corner cases of the formulas.
    pub fn from_parts(t_e: f64, t_f: f64, t: f64) -> Result<Self> {
        if !(t > 0.0) || t_e < 0.0 || t_f < 0.0 {
            return Err(invalid("durations must be non-negative with a positive frame"));
        }
        if t_e + t_f > t * (1.0 + 1e-12) {
            return Err(Error::Infeasible("overhead exceeds the frame duration"));
        }
        Ok(Self { t_e, t_f, t })
    }

    /// Fraction of the frame left for data.
    pub fn data_fraction(&self) -> f64 {
        (1.0 - (self.t_e + self.t_f) / self.t).max(0.0)
    }
}

/// `(1 − (T_E + T_F)/T)·B·rate`, where `rate` is `log2(1 + SNR)` in bit/s/Hz.
pub fn spectral_efficiency(params: &SystemParams, rate: f64, timing: &FrameTiming) -> f64 {
    timing.data_fraction() * params.data_bandwidth() * rate
}

/// `P_E + ((T − T_E − T_F)/T)·μ·p + μ_F·p_F·T_F/T + P_c`.
pub fn total_power(params: &SystemParams, timing: &FrameTiming) -> f64 {
    params.pilot_power()
        + timing.data_fraction() * params.mu * params.tx_power()
        + params.mu_f * params.p_f * timing.t_f / timing.t
        + params.circuit_power()
}

/// Spectral efficiency per watt, bit/J.
pub fn energy_efficiency(params: &SystemParams, se: f64, timing: &FrameTiming) -> Result<f64> {
    let p = total_power(params, timing);
    if !(p > 0.0) {
        return Err(Error::Infeasible("total consumed power is zero"));
    }
    Ok(se / p)
}
