//! Link-level system model: beamformer design, feedback payload and duration,
//! rate, spectral and energy efficiency, and the feedback message codec.

mod beamforming;
pub mod codec;
mod link;
mod payload;

pub use beamforming::{achievable_rate, beamforming_gain, design_beamformers, Beamformers};
pub use link::{energy_efficiency, spectral_efficiency, total_power, FrameTiming};
pub use payload::{
    baseline_payload, feedback_duration, feedback_duration_baseline, feedback_duration_parafac,
    feedback_duration_tucker, parafac_payload, preamble_bits, tucker_payload, ModelKind, Payload, TuckerBitAccounting,
};

use crate::error::{invalid, Result};

/// `10·log10(x)`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Link-budget constants. Powers in watts, bandwidths in hertz, times in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n: usize,
    pub m_t: usize,
    pub m_r: usize,
    pub b_max: f64,
    /// Feedback bandwidth `B_F`; the data link gets `B = B_max − B_F`.
    pub b_f: f64,
    pub p_max: f64,
    /// Feedback power `p_F`; the transmitter gets `p = P_max − p_F`.
    pub p_f: f64,
    pub p_c0: f64,
    pub p_cn: f64,
    pub n0: f64,
    /// Pathloss of both links and of the feedback channel, linear.
    pub pathloss: f64,
    pub mu: f64,
    pub mu_f: f64,
    pub t0: f64,
    pub p0: f64,
    /// Share of `T_PD` spent on pilots; the rest carries data.
    pub pilot_fraction: f64,
}

impl SystemParams {
    pub const DEFAULT_B_F: f64 = 200e3;
    /// Default feedback power; with the default pathloss and 200 kHz the mean-gain
    /// feedback capacity is about 270 kbit/s.
    pub const DEFAULT_P_F_DBM: f64 = -9.0;

    /// Simulation defaults: 45/45/10 dBm for `P_max`/`P_c0`/`P_cn`, 100 MHz,
    /// −174 dBm/Hz, 110 dB pathloss, unit amplifier efficiencies, 0.8 µs pilots at
    /// 0.8 mW and a 30 % pilot share.
    pub fn table_defaults(n: usize, m_t: usize, m_r: usize) -> Self {
        Self {
            n,
            m_t,
            m_r,
            b_max: 100e6,
            b_f: Self::DEFAULT_B_F,
            p_max: dbm_to_watts(45.0),
            p_f: dbm_to_watts(Self::DEFAULT_P_F_DBM),
            p_c0: dbm_to_watts(45.0),
            p_cn: dbm_to_watts(10.0),
            n0: dbm_to_watts(-174.0),
            pathloss: db_to_linear(-110.0),
            mu: 1.0,
            mu_f: 1.0,
            t0: 0.8e-6,
            p0: 0.8e-3,
            pilot_fraction: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m_t == 0 || self.m_r == 0 {
            return Err(invalid("element and antenna counts must be positive"));
        }
        let positive = [
            self.b_max, self.b_f, self.p_max, self.p_f, self.n0, self.t0, self.mu, self.mu_f,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid(
                "bandwidths, powers, noise density and durations must be positive",
            ));
        }
        let non_negative = [self.p_c0, self.p_cn, self.p0, self.pathloss];
        if non_negative.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("static powers and pathloss must be non-negative"));
        }
        if self.b_f >= self.b_max {
            return Err(invalid("feedback bandwidth must be below the total bandwidth"));
        }
        if self.p_f >= self.p_max {
            return Err(invalid("feedback power must be below the total power"));
        }
        if !(self.pilot_fraction > 0.0 && self.pilot_fraction < 1.0) {
            return Err(invalid("pilot fraction must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Data bandwidth `B`.
    pub fn data_bandwidth(&self) -> f64 {
        self.b_max - self.b_f
    }

    /// Transmit power `p`.
    pub fn tx_power(&self) -> f64 {
        self.p_max - self.p_f
    }

    /// Receiver noise referred to unit transmit power, `B·N0 / p`, so that
    /// `log2(1 + gain / noise)` is the same SNR used in the SE expression.
    pub fn effective_noise(&self) -> f64 {
        self.data_bandwidth() * self.n0 / self.tx_power()
    }

    /// Feedback link capacity `B_F·log2(1 + p_F|g_F|²/(B_F·N0))` in bit/s.
    pub fn feedback_capacity(&self, g_f_gain: f64) -> f64 {
        self.b_f * libm::log2(1.0 + self.p_f * g_f_gain / (self.b_f * self.n0))
    }

    /// Channel-estimation duration `T_E = (M_T·N + 1)·T_0`.
    pub fn estimation_time(&self) -> f64 {
        (self.m_t * self.n + 1) as f64 * self.t0
    }

    /// Pilot energy term `P_0·(1 + N·M_T)·T_0`.
    pub fn pilot_power(&self) -> f64 {
        self.p0 * (1 + self.n * self.m_t) as f64 * self.t0
    }

    /// Static circuit power `P_c0 + N·P_cn`.
    pub fn circuit_power(&self) -> f64 {
        self.p_c0 + self.n as f64 * self.p_cn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_round_trip() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(45.0) - 31.622776601683793).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(-174.0)) + 174.0).abs() < 1e-9);
        assert!((db_to_linear(-110.0) - 1e-11).abs() < 1e-25);
    }

    #[test]
    fn defaults_validate() {
        let p = SystemParams::table_defaults(1024, 2, 2);
        p.validate().unwrap();
        assert!((p.estimation_time() - 2049.0 * 0.8e-6).abs() < 1e-15);
        assert!((p.circuit_power() - (dbm_to_watts(45.0) + 1024.0 * 0.01)).abs() < 1e-12);
        let mut bad = p.clone();
        bad.b_f = bad.b_max;
        assert!(bad.validate().is_err());
    }
}
