use alloc::vec::Vec;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::dominant_singular_vectors;
use crate::reconstruction::PhaseShiftVector;
use crate::C64;

/// Rank-1 upper-bound design: combiner, precoder and the aligned phase vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformers {
    /// Combiner `w`, dominant left singular vector of `G`.
    pub w: Vec<C64>,
    /// Precoder `q`, dominant right singular vector of `H`.
    pub q: Vec<C64>,
    pub s_opt: PhaseShiftVector,
}

/// `s_n = e^{−j∠(conj(V^G_{n,1})·U^H_{n,1})}` so that every term of
/// `Σ_n conj(V^G_n)·s_n·U^H_n` is real and positive.
pub fn design_beamformers(ch: &ChannelRealization) -> Result<Beamformers> {
    let (w, sigma_g, v_g) = dominant_singular_vectors(&ch.g)?;
    let (u_h, sigma_h, q) = dominant_singular_vectors(&ch.h)?;
    if sigma_g == 0.0 {
        return Err(Error::ZeroNorm("surface-RX channel"));
    }
    if sigma_h == 0.0 {
        return Err(Error::ZeroNorm("TX-surface channel"));
    }
    let angles: Vec<f64> = v_g.iter().zip(&u_h).map(|(vg, uh)| -(vg.conj() * uh).arg()).collect();
    Ok(Beamformers {
        w,
        q,
        s_opt: PhaseShiftVector::from_angles(&angles)?,
    })
}

/// `|wᴴ G diag(s) H q|²`.
pub fn beamforming_gain(ch: &ChannelRealization, w: &[C64], q: &[C64], s: &PhaseShiftVector) -> Result<f64> {
    let hq = ch.h.mul_vec(q)?;
    let shq: Vec<C64> = hq.iter().zip(s.entries()).map(|(a, b)| a * b).collect();
    let gshq = ch.g.mul_vec(&shq)?;
    if gshq.len() != w.len() {
        return Err(Error::Dimension {
            context: "combiner length",
            expected: gshq.len(),
            found: w.len(),
        });
    }
    let y: C64 = w.iter().zip(&gshq).map(|(a, b)| a.conj() * b).sum();
    Ok(y.norm_sqr())
}

/// `log2(1 + |wᴴ G diag(s) H q|² / σ_b²)` in bit/s/Hz.
pub fn achievable_rate(ch: &ChannelRealization, w: &[C64], q: &[C64], s: &PhaseShiftVector, noise: f64) -> Result<f64> {
    if !(noise > 0.0) {
        return Err(crate::error::invalid("noise power must be positive"));
    }
    Ok(libm::log2(1.0 + beamforming_gain(ch, w, q, s)? / noise))
}
