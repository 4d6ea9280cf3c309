//! Bit-exact feedback message codec.
//!
//! Fields are packed MSB-first into bytes, the last byte zero-padded. After the
//! preamble (see [`super::preamble_bits`]) come the factor phase indices, factor by
//! factor and column-major within a factor, then any core phases, then the
//! amplitude indices. Resolutions are stored as `b − 1`, so 1..=16 bits fit in 4.
//!
//! PARAFAC weights are sent without the leading component, which is implicitly 1;
//! the component order must therefore put the largest weight first.

use alloc::vec::Vec;

use crate::error::CodecError;
use crate::quantization::{QuantizedWeights, MAX_BITS};

use super::payload::{MODEL_ID_BITS, ORDER_BITS, RANK_BITS, RESOLUTION_BITS, SIZE_BITS};

const ID_UNCOMPRESSED: u64 = 0b00;
const ID_PARAFAC: u64 = 0b01;
const ID_TUCKER: u64 = 0b10;

/// Quantized PARAFAC feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParafacMessage {
    pub sizes: Vec<usize>,
    pub rank: usize,
    pub phase_bits: Vec<u8>,
    pub weight_bits: u8,
    /// Per factor, `N_p·R` phase indices in column-major order.
    pub factor_indices: Vec<Vec<u32>>,
    /// Weight indices of components `2..=R`.
    pub weight_indices: Vec<u32>,
}

/// Quantized Tucker feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuckerMessage {
    pub sizes: Vec<usize>,
    pub ranks: Vec<usize>,
    pub phase_bits: Vec<u8>,
    pub weight_bits: u8,
    /// Per factor, `N_p·R_p` phase indices in column-major order.
    pub factor_indices: Vec<Vec<u32>>,
    /// Core phases at the first factor's resolution, `∏R_p` entries.
    pub core_phase_indices: Vec<u32>,
    /// Core magnitudes relative to the largest, `∏R_p` entries.
    pub core_magnitude_indices: Vec<u32>,
    /// Per mode, indices of the non-leading normalized singular values.
    pub sigma_indices: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeedbackMessage {
    Uncompressed { phase_bits: u8, indices: Vec<u32> },
    Parafac(ParafacMessage),
    Tucker(TuckerMessage),
}

impl ParafacMessage {
    /// Takes weights quantized by [`crate::quantization::quantize_parafac_weights`];
    /// the implicit unit weight must sit at component 0.
    pub fn with_weights(mut self, q: &QuantizedWeights) -> Result<Self, CodecError> {
        if q.omitted != 0 {
            return Err(CodecError::NonCanonical);
        }
        self.weight_indices = q.indices.clone();
        Ok(self)
    }
}

fn fits(value: u64, width: u64) -> bool {
    width >= 64 || value >> width == 0
}

fn check_field(field: &'static str, value: usize, min: usize, width: u64) -> Result<(), CodecError> {
    if value < min || !fits(value as u64, width) {
        return Err(CodecError::Overflow { field, value });
    }
    Ok(())
}

fn check_bits(field: &'static str, b: u8) -> Result<(), CodecError> {
    if b == 0 || b > MAX_BITS {
        return Err(CodecError::Overflow {
            field,
            value: b as usize,
        });
    }
    Ok(())
}

fn check_indices(field: &'static str, indices: &[u32], len: usize, bits: u8) -> Result<(), CodecError> {
    if indices.len() != len {
        return Err(CodecError::Inconsistent);
    }
    match indices.iter().find(|&&i| !fits(i as u64, bits as u64)) {
        Some(&i) => Err(CodecError::Overflow {
            field,
            value: i as usize,
        }),
        None => Ok(()),
    }
}

fn check_order(p: usize, list_lens: &[usize]) -> Result<(), CodecError> {
    check_field("order", p, 1, ORDER_BITS)?;
    if list_lens.iter().any(|&l| l != p) {
        return Err(CodecError::Inconsistent);
    }
    Ok(())
}

impl FeedbackMessage {
    /// Checks every field against its bit width and the index counts against the
    /// preamble.
    pub fn validate(&self) -> Result<(), CodecError> {
        match self {
            Self::Uncompressed { phase_bits, indices } => {
                check_bits("phase resolution", *phase_bits)?;
                check_field("size", indices.len(), 1, SIZE_BITS)?;
                check_indices("phase index", indices, indices.len(), *phase_bits)
            }
            Self::Parafac(m) => {
                let p = m.sizes.len();
                check_order(p, &[m.phase_bits.len(), m.factor_indices.len()])?;
                check_field("rank", m.rank, 1, RANK_BITS)?;
                check_bits("weight resolution", m.weight_bits)?;
                for ((&n, &b), idx) in m.sizes.iter().zip(&m.phase_bits).zip(&m.factor_indices) {
                    check_field("size", n, 1, SIZE_BITS)?;
                    check_bits("phase resolution", b)?;
                    check_indices("phase index", idx, n * m.rank, b)?;
                }
                check_indices("weight index", &m.weight_indices, m.rank - 1, m.weight_bits)
            }
            Self::Tucker(m) => {
                let p = m.sizes.len();
                check_order(
                    p,
                    &[
                        m.ranks.len(),
                        m.phase_bits.len(),
                        m.factor_indices.len(),
                        m.sigma_indices.len(),
                    ],
                )?;
                check_bits("weight resolution", m.weight_bits)?;
                for (i, &n) in m.sizes.iter().enumerate() {
                    check_field("size", n, 1, SIZE_BITS)?;
                    check_field("rank", m.ranks[i], 1, RANK_BITS)?;
                    check_bits("phase resolution", m.phase_bits[i])?;
                    check_indices("phase index", &m.factor_indices[i], n * m.ranks[i], m.phase_bits[i])?;
                    check_indices("weight index", &m.sigma_indices[i], m.ranks[i] - 1, m.weight_bits)?;
                }
                let core: usize = m.ranks.iter().product();
                check_indices("core phase index", &m.core_phase_indices, core, m.phase_bits[0])?;
                check_indices("core magnitude index", &m.core_magnitude_indices, core, m.weight_bits)
            }
        }
    }

    /// Exact encoded length in bits, before byte padding.
    pub fn bit_len(&self) -> u64 {
        let mut w = BitCounter::default();
        self.write(&mut w);
        w.bits
    }

    fn write<W: BitSink>(&self, w: &mut W) {
        let res = |b: u8| (b - 1) as u64;
        match self {
            Self::Uncompressed { phase_bits, indices } => {
                w.put(ID_UNCOMPRESSED, MODEL_ID_BITS);
                w.put(1, ORDER_BITS);
                w.put(indices.len() as u64, SIZE_BITS);
                w.put(res(*phase_bits), RESOLUTION_BITS);
                w.put_all(indices, *phase_bits);
            }
            Self::Parafac(m) => {
                w.put(ID_PARAFAC, MODEL_ID_BITS);
                w.put(m.sizes.len() as u64, ORDER_BITS);
                for &n in &m.sizes {
                    w.put(n as u64, SIZE_BITS);
                }
                w.put(m.rank as u64, RANK_BITS);
                for &b in &m.phase_bits {
                    w.put(res(b), RESOLUTION_BITS);
                }
                w.put(res(m.weight_bits), RESOLUTION_BITS);
                for (idx, &b) in m.factor_indices.iter().zip(&m.phase_bits) {
                    w.put_all(idx, b);
                }
                w.put_all(&m.weight_indices, m.weight_bits);
            }
            Self::Tucker(m) => {
                w.put(ID_TUCKER, MODEL_ID_BITS);
                w.put(m.sizes.len() as u64, ORDER_BITS);
                for &n in &m.sizes {
                    w.put(n as u64, SIZE_BITS);
                }
                for &r in &m.ranks {
                    w.put(r as u64, RANK_BITS);
                }
                for &b in &m.phase_bits {
                    w.put(res(b), RESOLUTION_BITS);
                }
                w.put(res(m.weight_bits), RESOLUTION_BITS);
                for (idx, &b) in m.factor_indices.iter().zip(&m.phase_bits) {
                    w.put_all(idx, b);
                }
                w.put_all(&m.core_phase_indices, m.phase_bits[0]);
                w.put_all(&m.core_magnitude_indices, m.weight_bits);
                for idx in &m.sigma_indices {
                    w.put_all(idx, m.weight_bits);
                }
            }
        }
    }
}

trait BitSink {
    fn put(&mut self, value: u64, width: u64);

    fn put_all(&mut self, values: &[u32], width: u8) {
        for &v in values {
            self.put(v as u64, width as u64);
        }
    }
}

#[derive(Default)]
struct BitCounter {
    bits: u64,
}

impl BitSink for BitCounter {
    fn put(&mut self, _value: u64, width: u64) {
        self.bits += width;
    }
}

/// MSB-first bit packer.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bits
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

impl BitSink for BitWriter {
    fn put(&mut self, value: u64, width: u64) {
        for k in (0..width).rev() {
            if self.bits.is_multiple_of(8) {
                self.bytes.push(0);
            }
            let bit = ((value >> k) & 1) as u8;
            let last = self.bytes.len() - 1;
            self.bytes[last] |= bit << (7 - self.bits % 8);
            self.bits += 1;
        }
    }
}

impl BitWriter {
    /// Appends the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u64, width: u32) {
        self.put(value, width as u64);
    }
}

/// MSB-first bit reader over a byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() * 8 - self.pos
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn read(&mut self, width: u32) -> Result<u64, CodecError> {
        let width = width as usize;
        if width > self.remaining() {
            return Err(CodecError::Truncated {
                needed: self.pos + width,
                available: self.bytes.len() * 8,
            });
        }
        let mut v = 0u64;
        for _ in 0..width {
            let bit = (self.bytes[self.pos / 8] >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | bit as u64;
            self.pos += 1;
        }
        Ok(v)
    }

    fn read_usize(&mut self, width: u64) -> Result<usize, CodecError> {
        self.read(width as u32).map(|v| v as usize)
    }

    fn read_bits(&mut self) -> Result<u8, CodecError> {
        Ok(self.read(RESOLUTION_BITS as u32)? as u8 + 1)
    }

    fn read_positive(&mut self, width: u64) -> Result<usize, CodecError> {
        match self.read_usize(width)? {
            0 => Err(CodecError::Inconsistent),
            v => Ok(v),
        }
    }

    fn read_indices(&mut self, count: usize, width: u8) -> Result<Vec<u32>, CodecError> {
        let needed = count.saturating_mul(width as usize);
        if needed > self.remaining() {
            return Err(CodecError::Truncated {
                needed: self.pos.saturating_add(needed),
                available: self.bytes.len() * 8,
            });
        }
        (0..count).map(|_| self.read(width as u32).map(|v| v as u32)).collect()
    }
}

/// Packs a validated message.
pub fn encode(msg: &FeedbackMessage) -> Result<Vec<u8>, CodecError> {
    msg.validate()?;
    let mut w = BitWriter::new();
    msg.write(&mut w);
    Ok(w.into_bytes())
}

/// Parses one message; rejects leftover bytes and non-zero padding.
pub fn decode(bytes: &[u8]) -> Result<FeedbackMessage, CodecError> {
    let mut r = BitReader::new(bytes);
    let id = r.read(MODEL_ID_BITS as u32)?;
    let msg = match id {
        ID_UNCOMPRESSED => {
            if r.read_usize(ORDER_BITS)? != 1 {
                return Err(CodecError::Inconsistent);
            }
            let n = r.read_positive(SIZE_BITS)?;
            let phase_bits = r.read_bits()?;
            FeedbackMessage::Uncompressed {
                phase_bits,
                indices: r.read_indices(n, phase_bits)?,
            }
        }
        ID_PARAFAC => {
            let p = r.read_positive(ORDER_BITS)?;
            let sizes = (0..p)
                .map(|_| r.read_positive(SIZE_BITS))
                .collect::<Result<Vec<_>, _>>()?;
            let rank = r.read_positive(RANK_BITS)?;
            let phase_bits = (0..p).map(|_| r.read_bits()).collect::<Result<Vec<_>, _>>()?;
            let weight_bits = r.read_bits()?;
            let factor_indices = sizes
                .iter()
                .zip(&phase_bits)
                .map(|(&n, &b)| r.read_indices(n * rank, b))
                .collect::<Result<Vec<_>, _>>()?;
            let weight_indices = r.read_indices(rank - 1, weight_bits)?;
            FeedbackMessage::Parafac(ParafacMessage {
                sizes,
                rank,
                phase_bits,
                weight_bits,
                factor_indices,
                weight_indices,
            })
        }
        ID_TUCKER => {
            let p = r.read_positive(ORDER_BITS)?;
            let sizes = (0..p)
                .map(|_| r.read_positive(SIZE_BITS))
                .collect::<Result<Vec<_>, _>>()?;
            let ranks = (0..p)
                .map(|_| r.read_positive(RANK_BITS))
                .collect::<Result<Vec<_>, _>>()?;
            let phase_bits = (0..p).map(|_| r.read_bits()).collect::<Result<Vec<_>, _>>()?;
            let weight_bits = r.read_bits()?;
            let factor_indices = sizes
                .iter()
                .zip(&ranks)
                .zip(&phase_bits)
                .map(|((&n, &rk), &b)| r.read_indices(n * rk, b))
                .collect::<Result<Vec<_>, _>>()?;
            let core = ranks
                .iter()
                .try_fold(1usize, |acc, &rk| acc.checked_mul(rk))
                .ok_or(CodecError::Inconsistent)?;
            let core_phase_indices = r.read_indices(core, phase_bits[0])?;
            let core_magnitude_indices = r.read_indices(core, weight_bits)?;
            let sigma_indices = ranks
                .iter()
                .map(|&rk| r.read_indices(rk - 1, weight_bits))
                .collect::<Result<Vec<_>, _>>()?;
            FeedbackMessage::Tucker(TuckerMessage {
                sizes,
                ranks,
                phase_bits,
                weight_bits,
                factor_indices,
                core_phase_indices,
                core_magnitude_indices,
                sigma_indices,
            })
        }
        other => return Err(CodecError::UnknownModel(other as u8)),
    };
    let rest = r.remaining();
    if rest >= 8 {
        return Err(CodecError::TrailingData(rest / 8));
    }
    if r.read(rest as u32)? != 0 {
        return Err(CodecError::Inconsistent);
    }
    Ok(msg)
}
