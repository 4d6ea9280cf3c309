//! Phase and amplitude codebooks with nearest-codeword quantizers.
//!
//! All quantizers break ties toward the smaller codeword index, so the mapping
//! from values to indices is reproducible bit for bit.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::C64;

pub const MAX_BITS: u8 = 16;

fn check_bits(bits: u8) -> Result<()> {
    if bits == 0 || bits > MAX_BITS {
        Err(invalid("codebook resolution must be between 1 and 16 bits"))
    } else {
        Ok(())
    }
}

/// Principal angle in `(-π, π]`; zero for a zero input.
pub fn principal_angle(z: C64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        0.0
    } else {
        let a = libm::atan2(z.im, z.re);
        if a <= -PI {
            PI
        } else {
            a
        }
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = libm::fmod((a - b).abs(), 2.0 * PI);
    if d > PI {
        2.0 * PI - d
    } else {
        d
    }
}

/// Uniform phase codebook `{-π + 2πk/2^b : k = 1..2^b}`; index `i` holds `k = i + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseCodebook {
    bits: u8,
}

impl PhaseCodebook {
    pub fn new(bits: u8) -> Result<Self> {
        check_bits(bits)?;
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn len(&self) -> usize {
        1usize << self.bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn codeword(&self, index: u32) -> Result<f64> {
        let len = self.len();
        if index as usize >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        if index as usize == len - 1 {
            return Ok(PI);
        }
        Ok(-PI + self.step() * (index as f64 + 1.0))
    }

    pub fn codewords(&self) -> Vec<f64> {
        (0..self.len() as u32)
            .map(|i| self.codeword(i).expect("in range"))
            .collect()
    }

    /// Index of the codeword nearest to `angle` on the circle.
    pub fn nearest(&self, angle: f64) -> u32 {
        let len = self.len();
        // codeword i sits at -π + step (i + 1)
        let x = (angle + PI) / self.step() - 1.0;
        let lo = libm::floor(x) as i64;
        let wrap = |k: i64| k.rem_euclid(len as i64) as u32;
        let a = wrap(lo);
        let b = wrap(lo + 1);
        let da = wrapped_distance(angle, self.codeword(a).expect("in range"));
        let db = wrapped_distance(angle, self.codeword(b).expect("in range"));
        if da < db || (da == db && a < b) {
            a
        } else {
            b
        }
    }
}

/// Quantizes the phases of `v`, returning codeword indices and the unit-modulus
/// quantized vector.
pub fn quantize_phases(v: &[C64], codebook: &PhaseCodebook) -> (Vec<u32>, Vec<C64>) {
    let indices: Vec<u32> = v.iter().map(|&z| codebook.nearest(principal_angle(z))).collect();
    let values = dequantize_phases(&indices, codebook).expect("indices come from the codebook");
    (indices, values)
}

/// Common rotation `φ ∈ (−step/2, step/2]` that minimizes the summed squared
/// quantization error of `angles + φ`.
///
/// Codewords sit on the lattice `step·ℤ`, so only the residuals modulo `step`
/// matter. After sorting them, each optimum assigns the residuals above some cut
/// to the next lattice point down; every cut is tried.
pub fn lattice_rotation(angles: &[f64], codebook: &PhaseCodebook) -> f64 {
    let step = codebook.step();
    let n = angles.len();
    if n == 0 {
        return 0.0;
    }
    let mut u: Vec<f64> = angles
        .iter()
        .map(|&a| {
            let r = libm::fmod(a, step);
            if r < 0.0 {
                r + step
            } else {
                r
            }
        })
        .collect();
    u.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut sum: f64 = u.iter().sum();
    let mut sq: f64 = u.iter().map(|x| x * x).sum();
    let mut best = (sq - sum * sum / nf, -sum / nf);
    // lower the largest residual by one step at a time
    for &x in u.iter().rev() {
        let y = x - step;
        sum += y - x;
        sq += y * y - x * x;
        let cost = sq - sum * sum / nf;
        if cost < best.0 - 1e-15 {
            best = (cost, -sum / nf);
        }
    }
    let phi = libm::fmod(best.1, step);
    if phi > step / 2.0 {
        phi - step
    } else if phi <= -step / 2.0 {
        phi + step
    } else {
        phi
    }
}

pub fn dequantize_phases(indices: &[u32], codebook: &PhaseCodebook) -> Result<Vec<C64>> {
    indices
        .iter()
        .map(|&i| codebook.codeword(i).map(|a| C64::from_polar(1.0, a)))
        .collect()
}

/// Amplitude codebook `{0.01, 0.01 + l, ..., 1}` with `l = 0.99 / (2^b - 1)`, every
/// codeword rounded to two decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeCodebook {
    bits: u8,
    codewords: Vec<f64>,
}

impl AmplitudeCodebook {
    pub const MIN: f64 = 0.01;
    pub const MAX: f64 = 1.0;

    pub fn new(bits: u8) -> Result<Self> {
        check_bits(bits)?;
        let len = 1usize << bits;
        let step = (Self::MAX - Self::MIN) / (len - 1) as f64;
        let codewords = (0..len)
            .map(|k| libm::round((Self::MIN + step * k as f64) * 100.0) / 100.0)
            .collect();
        Ok(Self { bits, codewords })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn codewords(&self) -> &[f64] {
        &self.codewords
    }

    pub fn codeword(&self, index: u32) -> Result<f64> {
        self.codewords
            .get(index as usize)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.codewords.len(),
            })
    }

    /// Nearest codeword index; ties and duplicate codewords resolve to the smallest index.
    pub fn nearest(&self, value: f64) -> u32 {
        let cw = &self.codewords;
        let hi = cw.partition_point(|&c| c < value);
        let mut best = if hi == cw.len() { hi - 1 } else { hi };
        // first index holding the same value
        best = cw.partition_point(|&c| c < cw[best]);
        if hi > 0 {
            let below = cw.partition_point(|&c| c < cw[hi - 1]);
            if (value - cw[below]).abs() <= (cw[best] - value).abs() {
                best = below;
            }
        }
        best as u32
    }
}

/// Weight vector normalized by one entry that is transmitted implicitly as 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedWeights {
    /// Codeword indices of every entry except the omitted one, in order.
    pub indices: Vec<u32>,
    /// Position of the implicit unit entry.
    pub omitted: usize,
}

impl QuantizedWeights {
    pub fn len(&self) -> usize {
        self.indices.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit_cost(&self, codebook: &AmplitudeCodebook) -> usize {
        self.indices.len() * codebook.bits() as usize
    }
}

fn quantize_normalized(values: &[f64], pivot: usize, codebook: &AmplitudeCodebook) -> QuantizedWeights {
    let scale = values[pivot];
    let indices = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pivot)
        .map(|(_, &x)| codebook.nearest(x / scale))
        .collect();
    QuantizedWeights {
        indices,
        omitted: pivot,
    }
}

/// Normalizes by the largest weight (first maximal index) and quantizes the rest.
pub fn quantize_parafac_weights(weights: &[f64], codebook: &AmplitudeCodebook) -> Result<QuantizedWeights> {
    if weights.is_empty() {
        return Err(invalid("empty weight vector"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(invalid("weights must be finite and non-negative"));
    }
    let mut pivot = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > weights[pivot] {
            pivot = i;
        }
    }
    if weights[pivot] <= 0.0 {
        return Err(Error::ZeroNorm("weight vector"));
    }
    Ok(quantize_normalized(weights, pivot, codebook))
}

/// Per-mode singular-value weights, each normalized by its leading entry.
pub fn quantize_tucker_weights(sigmas: &[Vec<f64>], codebook: &AmplitudeCodebook) -> Result<Vec<QuantizedWeights>> {
    sigmas
        .iter()
        .map(|s| {
            let lead = *s.first().ok_or_else(|| invalid("empty singular-value vector"))?;
            if !(lead > 0.0) {
                return Err(Error::ZeroNorm("leading singular value"));
            }
            if s.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(invalid("singular values must be finite and non-negative"));
            }
            Ok(quantize_normalized(s, 0, codebook))
        })
        .collect()
}

/// Rebuilds the normalized weight vector, with 1 at the omitted position.
pub fn dequantize_weights(q: &QuantizedWeights, codebook: &AmplitudeCodebook) -> Result<Vec<f64>> {
    if q.omitted > q.indices.len() {
        return Err(invalid("omitted position beyond the weight vector"));
    }
    let mut out = Vec::with_capacity(q.len());
    for (i, &idx) in q.indices.iter().enumerate() {
        if i == q.omitted {
            out.push(1.0);
        }
        out.push(codebook.codeword(idx)?);
    }
    if q.omitted == q.indices.len() {
        out.push(1.0);
    }
    Ok(out)
}
