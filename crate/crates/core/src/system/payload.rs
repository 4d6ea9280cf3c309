//! Feedback payload sizes and durations.
//!
//! Preamble layout (bits): model id 2, order `P` 4, each factor size 16, each rank 8
//! (one for PARAFAC, `P` for Tucker), each phase resolution 4 and the weight
//! resolution 4. The uncompressed message carries id, `P = 1`, `N` and one
//! resolution.

use crate::error::{invalid, Error, Result};
use crate::quantization::MAX_BITS;

use super::SystemParams;

pub const MODEL_ID_BITS: u64 = 2;
pub const ORDER_BITS: u64 = 4;
pub const SIZE_BITS: u64 = 16;
pub const RANK_BITS: u64 = 8;
pub const RESOLUTION_BITS: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Baseline,
    Parafac,
    Tucker,
}

/// Preamble length for a model of order `order`.
pub fn preamble_bits(kind: ModelKind, order: usize) -> u64 {
    let p = order as u64;
    let head = MODEL_ID_BITS + ORDER_BITS;
    match kind {
        ModelKind::Baseline => head + SIZE_BITS + RESOLUTION_BITS,
        ModelKind::Parafac => head + p * SIZE_BITS + RANK_BITS + (p + 1) * RESOLUTION_BITS,
        ModelKind::Tucker => head + p * (SIZE_BITS + RANK_BITS) + (p + 1) * RESOLUTION_BITS,
    }
}

/// How the Tucker core is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TuckerBitAccounting {
    /// `∏R_p + b_w·∏(R_p − 1)`: one bit per core entry, weights on the product.
    #[default]
    Literal,
    /// `b_1·∏R_p + b_w·∏(R_p − 1)`: core phases at the first factor's resolution.
    CorePhaseResolution,
    /// What the codec actually sends: core phases at `b_1` and magnitudes at `b_w`
    /// per entry, plus `b_w` per non-leading singular value, `Σ(R_p − 1)`.
    Codec,
}

/// Bit breakdown of one feedback message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Payload {
    pub preamble_bits: u64,
    pub phase_bits: u64,
    pub weight_bits: u64,
    pub core_bits: u64,
    /// Number of phase values carried by the factors.
    pub conveyed_phases: u64,
}

impl Payload {
    pub fn body_bits(&self) -> u64 {
        self.phase_bits + self.weight_bits + self.core_bits
    }

    pub fn total_bits(&self, include_preamble: bool) -> u64 {
        self.body_bits() + if include_preamble { self.preamble_bits } else { 0 }
    }
}

fn check_bits(b: u8) -> Result<u64> {
    if b == 0 || b > MAX_BITS {
        return Err(invalid("resolution must lie in 1..=16 bits"));
    }
    Ok(b as u64)
}

fn check_sizes(sizes: &[usize], phase_bits: &[u8]) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(invalid("factor sizes must be non-empty and positive"));
    }
    if phase_bits.len() != sizes.len() {
        return Err(Error::Dimension {
            context: "phase resolutions",
            expected: sizes.len(),
            found: phase_bits.len(),
        });
    }
    Ok(())
}

/// Uncompressed feedback: `N·b` bits.
pub fn baseline_payload(n: usize, bits: u8) -> Result<Payload> {
    let b = check_bits(bits)?;
    Ok(Payload {
        preamble_bits: preamble_bits(ModelKind::Baseline, 1),
        phase_bits: n as u64 * b,
        conveyed_phases: n as u64,
        ..Payload::default()
    })
}

/// `R·Σ_p N_p·b_p + (R − 1)·b_w`.
pub fn parafac_payload(sizes: &[usize], rank: usize, phase_bits: &[u8], weight_bits: u8) -> Result<Payload> {
    check_sizes(sizes, phase_bits)?;
    if rank == 0 {
        return Err(invalid("rank must be at least 1"));
    }
    let bw = check_bits(weight_bits)?;
    let r = rank as u64;
    let mut phase = 0;
    for (&n, &b) in sizes.iter().zip(phase_bits) {
        phase += r * n as u64 * check_bits(b)?;
    }
    Ok(Payload {
        preamble_bits: preamble_bits(ModelKind::Parafac, sizes.len()),
        phase_bits: phase,
        weight_bits: (r - 1) * bw,
        core_bits: 0,
        conveyed_phases: r * sizes.iter().map(|&n| n as u64).sum::<u64>(),
    })
}

/// `Σ_p R_p·N_p·b_p` plus core and weight terms per `accounting`.
pub fn tucker_payload(
    sizes: &[usize],
    ranks: &[usize],
    phase_bits: &[u8],
    weight_bits: u8,
    accounting: TuckerBitAccounting,
) -> Result<Payload> {
    check_sizes(sizes, phase_bits)?;
    if ranks.len() != sizes.len() {
        return Err(Error::Dimension {
            context: "tucker ranks",
            expected: sizes.len(),
            found: ranks.len(),
        });
    }
    if ranks.iter().zip(sizes).any(|(&r, &n)| r == 0 || r > n) {
        return Err(invalid("each rank must lie in 1..=N_p"));
    }
    let bw = check_bits(weight_bits)?;
    let b1 = check_bits(phase_bits[0])?;
    let mut phase = 0;
    for ((&n, &r), &b) in sizes.iter().zip(ranks).zip(phase_bits) {
        phase += r as u64 * n as u64 * check_bits(b)?;
    }
    let core_len: u64 = ranks.iter().map(|&r| r as u64).product();
    let minus_one_product: u64 = ranks.iter().map(|&r| r as u64 - 1).product();
    let minus_one_sum: u64 = ranks.iter().map(|&r| r as u64 - 1).sum();
    let (core, weight) = match accounting {
        TuckerBitAccounting::Literal => (core_len, bw * minus_one_product),
        TuckerBitAccounting::CorePhaseResolution => (b1 * core_len, bw * minus_one_product),
        TuckerBitAccounting::Codec => ((b1 + bw) * core_len, bw * minus_one_sum),
    };
    Ok(Payload {
        preamble_bits: preamble_bits(ModelKind::Tucker, sizes.len()),
        phase_bits: phase,
        weight_bits: weight,
        core_bits: core,
        conveyed_phases: sizes.iter().zip(ranks).map(|(&n, &r)| (n * r) as u64).sum(),
    })
}

/// Seconds to send `bits` over a link of `capacity` bit/s.
pub fn feedback_duration(bits: u64, capacity: f64) -> Result<f64> {
    if !(capacity.is_finite() && capacity > 0.0) {
        return Err(Error::Infeasible("feedback link capacity is zero"));
    }
    Ok(bits as f64 / capacity)
}

/// Uncompressed feedback duration; the preamble is not charged.
pub fn feedback_duration_baseline(params: &SystemParams, g_f_gain: f64, bits: u8) -> Result<(f64, u64)> {
    let bits = baseline_payload(params.n, bits)?.total_bits(false);
    Ok((feedback_duration(bits, params.feedback_capacity(g_f_gain))?, bits))
}

#[allow(clippy::too_many_arguments)]
pub fn feedback_duration_parafac(
    params: &SystemParams,
    g_f_gain: f64,
    sizes: &[usize],
    rank: usize,
    phase_bits: &[u8],
    weight_bits: u8,
    include_preamble: bool,
) -> Result<(f64, u64)> {
    let bits = parafac_payload(sizes, rank, phase_bits, weight_bits)?.total_bits(include_preamble);
    Ok((feedback_duration(bits, params.feedback_capacity(g_f_gain))?, bits))
}

#[allow(clippy::too_many_arguments)]
pub fn feedback_duration_tucker(
    params: &SystemParams,
    g_f_gain: f64,
    sizes: &[usize],
    ranks: &[usize],
    phase_bits: &[u8],
    weight_bits: u8,
    accounting: TuckerBitAccounting,
    include_preamble: bool,
) -> Result<(f64, u64)> {
    let bits = tucker_payload(sizes, ranks, phase_bits, weight_bits, accounting)?.total_bits(include_preamble);
    Ok((feedback_duration(bits, params.feedback_capacity(g_f_gain))?, bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preamble_lengths() {
        assert_eq!(preamble_bits(ModelKind::Baseline, 1), 26);
        assert_eq!(preamble_bits(ModelKind::Parafac, 3), 18 + 60);
        assert_eq!(preamble_bits(ModelKind::Tucker, 3), 10 + 84);
    }

    #[test]
    fn forty_four_phases() {
        let p = parafac_payload(&[32, 8, 4], 1, &[3, 3, 3], 3).unwrap();
        assert_eq!(p.conveyed_phases, 44);
        assert_eq!(p.weight_bits, 0);
        assert_eq!(p.body_bits(), 132);
    }

    #[test]
    fn fifty_fold_reduction() {
        let p = parafac_payload(&[2; 10], 1, &[1; 10], 1).unwrap();
        assert_eq!(p.conveyed_phases, 20);
        assert_eq!(1024.0 / p.conveyed_phases as f64, 51.2);
    }

    #[test]
    fn tucker_formula_hand_expanded() {
        let lit = tucker_payload(&[64, 4, 4], &[4, 4, 4], &[3, 3, 3], 3, TuckerBitAccounting::Literal).unwrap();
        // 3·(4·64 + 4·4 + 4·4) + 64 + 3·27
        assert_eq!(lit.body_bits(), 864 + 64 + 81);
        let cpr = tucker_payload(
            &[64, 4, 4],
            &[4, 4, 4],
            &[3, 3, 3],
            3,
            TuckerBitAccounting::CorePhaseResolution,
        )
        .unwrap();
        assert_eq!(cpr.body_bits(), 864 + 192 + 81);
        let codec = tucker_payload(&[64, 4, 4], &[4, 4, 4], &[3, 3, 3], 3, TuckerBitAccounting::Codec).unwrap();
        assert_eq!(codec.body_bits(), 864 + 384 + 27);
    }

    #[test]
    fn unit_ranks_collapse() {
        let t = tucker_payload(&[8, 4], &[1, 1], &[2, 2], 2, TuckerBitAccounting::Literal).unwrap();
        let p = parafac_payload(&[8, 4], 1, &[2, 2], 2).unwrap();
        assert_eq!(t.weight_bits, 0);
        assert_eq!(t.core_bits, 1);
        assert_eq!(t.phase_bits, p.phase_bits);
    }

    #[test]
    fn baseline_duration() {
        let mut params = SystemParams::table_defaults(1024, 2, 2);
        params.b_f = 1e6;
        // pick |g_F|² so the spectral efficiency of the feedback link is 3 bit/s/Hz
        let gain = 7.0 * params.b_f * params.n0 / params.p_f;
        let (t, bits) = feedback_duration_baseline(&params, gain, 3).unwrap();
        assert_eq!(bits, 3072);
        assert!((t - 1.024e-3).abs() < 1e-15);
        let (t6, _) = feedback_duration_baseline(&params, gain, 6).unwrap();
        assert!((t6 - 2.0 * t).abs() < 1e-15);
        assert!(feedback_duration_baseline(&params, 0.0, 3).is_err());
    }

    #[test]
    fn invalid_configs() {
        assert!(parafac_payload(&[4, 4], 0, &[3, 3], 3).is_err());
        assert!(parafac_payload(&[4, 4], 1, &[3], 3).is_err());
        assert!(parafac_payload(&[4, 4], 1, &[3, 17], 3).is_err());
        assert!(tucker_payload(&[4, 4], &[5, 1], &[3, 3], 3, TuckerBitAccounting::Literal).is_err());
    }
}
