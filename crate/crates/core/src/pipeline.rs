//! One phase-shift vector through the whole feedback chain: fit, quantize,
//! encode, decode, rebuild.
//!
//! Quantized factors are sent as phases only, so the controller sees
//! `e^{j∠S^(p)}`. In continuous mode the full complex model is used.

use alloc::vec::Vec;

use crate::decomposition::{parafac_als, tucker_hosvd, AlsOptions, FitReport};
use crate::error::{invalid, Error, Result};
use crate::quantization::{
    dequantize_phases, dequantize_weights, lattice_rotation, principal_angle, quantize_parafac_weights,
    quantize_phases, quantize_tucker_weights, AmplitudeCodebook, PhaseCodebook, QuantizedWeights,
};
use crate::reconstruction::{reconstruct_from_parafac, reconstruct_from_tucker, PhaseShiftVector};
use crate::system::codec::{self, FeedbackMessage, ParafacMessage, TuckerMessage};
use crate::system::{baseline_payload, parafac_payload, tucker_payload, Payload, TuckerBitAccounting};
use crate::tensor::{tensorize, ComplexMatrix, DenseTensor};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Every element's phase is sent.
    Baseline,
    Parafac {
        sizes: Vec<usize>,
        rank: usize,
    },
    Tucker {
        sizes: Vec<usize>,
        ranks: Vec<usize>,
    },
}

impl Scheme {
    pub fn sizes(&self) -> Option<&[usize]> {
        match self {
            Self::Baseline => None,
            Self::Parafac { sizes, .. } | Self::Tucker { sizes, .. } => Some(sizes),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    Continuous,
    /// Same phase resolution on every factor (and the core).
    Quantized {
        phase_bits: u8,
        weight_bits: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub als: AlsOptions,
    pub accounting: TuckerBitAccounting,
    /// Charge the preamble in the factorized feedback durations.
    pub include_preamble: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            als: AlsOptions::default(),
            accounting: TuckerBitAccounting::default(),
            include_preamble: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// What the surface applies.
    pub phases: PhaseShiftVector,
    /// `‖s − s̃‖² / ‖s‖²` between the input and the rebuilt vector.
    pub nmse: f64,
    pub zero_entries: usize,
    pub fit: Option<FitReport>,
    /// Present when quantized.
    pub payload: Option<Payload>,
    pub message: Option<FeedbackMessage>,
    /// Bits charged to the feedback duration; the uncompressed message is charged
    /// its body only.
    pub feedback_bits: Option<u64>,
}

/// Runs `s` through `scheme` at `resolution`.
pub fn run(s: &PhaseShiftVector, scheme: &Scheme, resolution: Resolution, opts: &PipelineOptions) -> Result<Outcome> {
    let (rebuilt, zero_entries, fit, payload, message) = match (scheme, resolution) {
        (Scheme::Baseline, Resolution::Continuous) => (s.clone(), 0, None, None, None),
        (Scheme::Baseline, Resolution::Quantized { phase_bits, .. }) => {
            let cb = PhaseCodebook::new(phase_bits)?;
            let (indices, _) = quantize_phases(s.entries(), &cb);
            let msg = FeedbackMessage::Uncompressed { phase_bits, indices };
            let FeedbackMessage::Uncompressed { indices, .. } = round_trip(&msg)? else {
                unreachable!("model id preserved by the codec")
            };
            let phases = PhaseShiftVector::new(dequantize_phases(&indices, &cb)?)?;
            (phases, 0, None, Some(baseline_payload(s.len(), phase_bits)?), Some(msg))
        }
        (Scheme::Parafac { sizes, rank }, res) => {
            let t = tensorize(s.entries(), sizes)?;
            let (model, report) = parafac_als(&t, *rank, &opts.als)?;
            let model = model.sorted_by_weight();
            match res {
                Resolution::Continuous => {
                    let rec = reconstruct_from_parafac(&model.factors, &model.weights, sizes)?;
                    (rec.phases, rec.zero_entries, Some(report), None, None)
                }
                Resolution::Quantized {
                    phase_bits,
                    weight_bits,
                } => {
                    let pcb = PhaseCodebook::new(phase_bits)?;
                    let acb = AmplitudeCodebook::new(weight_bits)?;
                    let factor_indices: Vec<Vec<u32>> = align_parafac(&model.factors, &pcb)
                        .iter()
                        .map(|f| quantize_phases(f.data(), &pcb).0)
                        .collect();
                    let weights = quantize_parafac_weights(&model.weights, &acb)?;
                    let msg = ParafacMessage {
                        sizes: sizes.clone(),
                        rank: *rank,
                        phase_bits: alloc::vec![phase_bits; sizes.len()],
                        weight_bits,
                        factor_indices,
                        weight_indices: Vec::new(),
                    }
                    .with_weights(&weights)?;
                    let msg = FeedbackMessage::Parafac(msg);
                    let FeedbackMessage::Parafac(got) = round_trip(&msg)? else {
                        unreachable!("model id preserved by the codec")
                    };
                    let factors = phase_factors(&got.factor_indices, &got.sizes, got.rank, &pcb)?;
                    let q = QuantizedWeights {
                        indices: got.weight_indices,
                        omitted: 0,
                    };
                    let w = dequantize_weights(&q, &acb)?;
                    let rec = reconstruct_from_parafac(&factors, &w, sizes)?;
                    let payload = parafac_payload(sizes, *rank, &alloc::vec![phase_bits; sizes.len()], weight_bits)?;
                    (rec.phases, rec.zero_entries, Some(report), Some(payload), Some(msg))
                }
            }
        }
        (Scheme::Tucker { sizes, ranks }, res) => {
            let t = tensorize(s.entries(), sizes)?;
            let (model, report) = tucker_hosvd(&t, ranks)?;
            match res {
                Resolution::Continuous => {
                    let sig = normalized_sigmas(&model.sigmas)?;
                    let core = deweight_core(&model.core, &sig)?;
                    let rec = reconstruct_from_tucker(&model.factors, &core, &sig, sizes)?;
                    (rec.phases, rec.zero_entries, Some(report), None, None)
                }
                Resolution::Quantized {
                    phase_bits,
                    weight_bits,
                } => {
                    let pcb = PhaseCodebook::new(phase_bits)?;
                    let acb = AmplitudeCodebook::new(weight_bits)?;
                    let qs = quantize_tucker_weights(&model.sigmas, &acb)?;
                    let sig_tilde = qs
                        .iter()
                        .map(|q| dequantize_weights(q, &acb))
                        .collect::<Result<Vec<_>>>()?;
                    let (aligned, core) = align_tucker(&model.factors, &model.core, &pcb)?;
                    let core = deweight_core(&core, &sig_tilde)?;
                    let (core_phase_indices, core_magnitude_indices) = quantize_core(&core, &pcb, &acb);
                    let msg = FeedbackMessage::Tucker(TuckerMessage {
                        sizes: sizes.clone(),
                        ranks: ranks.clone(),
                        phase_bits: alloc::vec![phase_bits; sizes.len()],
                        weight_bits,
                        factor_indices: aligned.iter().map(|f| quantize_phases(f.data(), &pcb).0).collect(),
                        core_phase_indices,
                        core_magnitude_indices,
                        sigma_indices: qs.into_iter().map(|q| q.indices).collect(),
                    });
                    let FeedbackMessage::Tucker(got) = round_trip(&msg)? else {
                        unreachable!("model id preserved by the codec")
                    };
                    let factors = got
                        .factor_indices
                        .iter()
                        .zip(&got.sizes)
                        .zip(&got.ranks)
                        .map(|((idx, &n), &r)| phase_matrix(idx, n, r, &pcb))
                        .collect::<Result<Vec<_>>>()?;
                    let sigmas = got
                        .sigma_indices
                        .iter()
                        .map(|idx| {
                            dequantize_weights(
                                &QuantizedWeights {
                                    indices: idx.clone(),
                                    omitted: 0,
                                },
                                &acb,
                            )
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let core = dequantize_core(&got, &pcb, &acb)?;
                    let rec = reconstruct_from_tucker(&factors, &core, &sigmas, sizes)?;
                    let payload = tucker_payload(
                        sizes,
                        ranks,
                        &alloc::vec![phase_bits; sizes.len()],
                        weight_bits,
                        opts.accounting,
                    )?;
                    (rec.phases, rec.zero_entries, Some(report), Some(payload), Some(msg))
                }
            }
        }
    };
    let feedback_bits = payload.map(|p| match scheme {
        Scheme::Baseline => p.total_bits(false),
        _ => p.total_bits(opts.include_preamble),
    });
    Ok(Outcome {
        nmse: vector_nmse(s.entries(), rebuilt.entries()),
        phases: rebuilt,
        zero_entries,
        fit,
        payload,
        message,
        feedback_bits,
    })
}

fn round_trip(msg: &FeedbackMessage) -> Result<FeedbackMessage> {
    let bytes = codec::encode(msg)?;
    let decoded = codec::decode(&bytes)?;
    if &decoded != msg {
        return Err(Error::Codec(crate::CodecError::Inconsistent));
    }
    Ok(decoded)
}

pub fn vector_nmse(reference: &[C64], estimate: &[C64]) -> f64 {
    let num: f64 = reference.iter().zip(estimate).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = reference.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

fn phase_matrix(indices: &[u32], rows: usize, cols: usize, cb: &PhaseCodebook) -> Result<ComplexMatrix> {
    ComplexMatrix::new(rows, cols, dequantize_phases(indices, cb)?)
}

fn phase_factors(indices: &[Vec<u32>], sizes: &[usize], rank: usize, cb: &PhaseCodebook) -> Result<Vec<ComplexMatrix>> {
    indices
        .iter()
        .zip(sizes)
        .map(|(idx, &n)| phase_matrix(idx, n, rank, cb))
        .collect()
}

fn rotate_columns(m: &ComplexMatrix, phi: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j) * C64::from_polar(1.0, phi[j]))
}

/// Per-column rotation that brings each column closest to the phase lattice.
fn column_rotations(m: &ComplexMatrix, cb: &PhaseCodebook) -> Vec<f64> {
    (0..m.cols())
        .map(|j| {
            let angles: Vec<f64> = m.column(j).iter().map(|&z| principal_angle(z)).collect();
            lattice_rotation(&angles, cb)
        })
        .collect()
}

/// Rotates factor columns toward the codebook before quantization.
///
/// Component `r` picks up `e^{jΣ_p φ_pr}`; the largest factor takes the opposite
/// rotation so every component, and hence `s`, is unchanged.
fn align_parafac(factors: &[ComplexMatrix], cb: &PhaseCodebook) -> Vec<ComplexMatrix> {
    let Some(sink) = (0..factors.len()).max_by_key(|&p| (factors[p].rows(), core::cmp::Reverse(p))) else {
        return Vec::new();
    };
    let rank = factors[sink].cols();
    let mut total = alloc::vec![0.0; rank];
    let mut out: Vec<ComplexMatrix> = factors
        .iter()
        .enumerate()
        .map(|(p, f)| {
            if p == sink {
                return f.clone();
            }
            let phi = column_rotations(f, cb);
            for (t, x) in total.iter_mut().zip(&phi) {
                *t += x;
            }
            rotate_columns(f, &phi)
        })
        .collect();
    let undo: Vec<f64> = total.iter().map(|t| -t).collect();
    out[sink] = rotate_columns(&factors[sink], &undo);
    out
}

/// Same as [`align_parafac`] for Tucker factors; the core absorbs the rotations.
fn align_tucker(
    factors: &[ComplexMatrix],
    core: &DenseTensor,
    cb: &PhaseCodebook,
) -> Result<(Vec<ComplexMatrix>, DenseTensor)> {
    let phis: Vec<Vec<f64>> = factors.iter().map(|f| column_rotations(f, cb)).collect();
    let shape = core.shape().to_vec();
    let mut index = alloc::vec![0usize; shape.len()];
    let data = core
        .data()
        .iter()
        .map(|&g| {
            let total: f64 = index.iter().zip(&phis).map(|(&i, phi)| phi[i]).sum();
            for (k, n) in index.iter_mut().zip(&shape) {
                *k += 1;
                if *k < *n {
                    break;
                }
                *k = 0;
            }
            g * C64::from_polar(1.0, -total)
        })
        .collect();
    let factors = factors
        .iter()
        .zip(&phis)
        .map(|(f, phi)| rotate_columns(f, phi))
        .collect();
    Ok((factors, DenseTensor::new(&shape, data)?))
}

/// Each σ^(p) divided by its leading entry.
fn normalized_sigmas(sigmas: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    sigmas
        .iter()
        .map(|s| match s.first() {
            Some(&lead) if lead > 0.0 => Ok(s.iter().map(|x| x / lead).collect()),
            _ => Err(Error::ZeroNorm("leading singular value")),
        })
        .collect()
}

/// `G_{r_1..r_P} / Π_p σ_{r_p}^(p)`, zero where the product vanishes, so that
/// scaling the factors by the weights restores `G`.
fn deweight_core(core: &DenseTensor, sigmas: &[Vec<f64>]) -> Result<DenseTensor> {
    let shape = core.shape().to_vec();
    if sigmas.len() != shape.len() || sigmas.iter().zip(&shape).any(|(s, &r)| s.len() != r) {
        return Err(invalid("weight vectors do not match the core shape"));
    }
    let mut index = alloc::vec![0usize; shape.len()];
    let data = core
        .data()
        .iter()
        .map(|&g| {
            let d: f64 = index.iter().zip(sigmas).map(|(&i, s)| s[i]).product();
            for (k, n) in index.iter_mut().zip(&shape) {
                *k += 1;
                if *k < *n {
                    break;
                }
                *k = 0;
            }
            if d > 0.0 {
                g / d
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    DenseTensor::new(&shape, data)
}

fn quantize_core(core: &DenseTensor, pcb: &PhaseCodebook, acb: &AmplitudeCodebook) -> (Vec<u32>, Vec<u32>) {
    let (phases, _) = quantize_phases(core.data(), pcb);
    let peak = core.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mags = core
        .data()
        .iter()
        .map(|z| acb.nearest(if peak > 0.0 { z.norm() / peak } else { 0.0 }))
        .collect();
    (phases, mags)
}

fn dequantize_core(msg: &TuckerMessage, pcb: &PhaseCodebook, acb: &AmplitudeCodebook) -> Result<DenseTensor> {
    let phases = dequantize_phases(&msg.core_phase_indices, pcb)?;
    let data = phases
        .iter()
        .zip(&msg.core_magnitude_indices)
        .map(|(&p, &m)| Ok(p * acb.codeword(m)?))
        .collect::<Result<Vec<_>>>()?;
    DenseTensor::new(&msg.ranks, data)
}
