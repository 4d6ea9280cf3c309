//! Random, structurally valid feedback messages for codec checks.

use rand::Rng;

use irsfac::system::codec::{FeedbackMessage, ParafacMessage, TuckerMessage};
use irsfac::system::ModelKind;

fn bits<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.random_range(1..=16)
}

fn indices<R: Rng + ?Sized>(rng: &mut R, len: usize, b: u8) -> Vec<u32> {
    (0..len).map(|_| rng.random_range(0..1u32 << b)).collect()
}

/// A message of the given kind with random shape, resolutions and contents.
pub fn random_message<R: Rng + ?Sized>(kind: ModelKind, rng: &mut R) -> FeedbackMessage {
    match kind {
        ModelKind::Baseline => {
            let b = bits(rng);
            let n = rng.random_range(1..=512);
            FeedbackMessage::Uncompressed {
                phase_bits: b,
                indices: indices(rng, n, b),
            }
        }
        ModelKind::Parafac => {
            let p = rng.random_range(1..=6);
            let sizes: Vec<usize> = (0..p).map(|_| rng.random_range(1..=24)).collect();
            let rank = rng.random_range(1..=5);
            let phase_bits: Vec<u8> = (0..p).map(|_| bits(rng)).collect();
            let weight_bits = bits(rng);
            let factor_indices = sizes
                .iter()
                .zip(&phase_bits)
                .map(|(&n, &b)| indices(rng, n * rank, b))
                .collect();
            FeedbackMessage::Parafac(ParafacMessage {
                weight_indices: indices(rng, rank - 1, weight_bits),
                sizes,
                rank,
                phase_bits,
                weight_bits,
                factor_indices,
            })
        }
        ModelKind::Tucker => {
            let p = rng.random_range(1..=4);
            let sizes: Vec<usize> = (0..p).map(|_| rng.random_range(1..=8)).collect();
            let ranks: Vec<usize> = sizes.iter().map(|&n| rng.random_range(1..=n)).collect();
            let phase_bits: Vec<u8> = (0..p).map(|_| bits(rng)).collect();
            let weight_bits = bits(rng);
            let core: usize = ranks.iter().product();
            let factor_indices = sizes
                .iter()
                .zip(&ranks)
                .zip(&phase_bits)
                .map(|((&n, &r), &b)| indices(rng, n * r, b))
                .collect();
            FeedbackMessage::Tucker(TuckerMessage {
                core_phase_indices: indices(rng, core, phase_bits[0]),
                core_magnitude_indices: indices(rng, core, weight_bits),
                sigma_indices: ranks.iter().map(|&r| indices(rng, r - 1, weight_bits)).collect(),
                sizes,
                ranks,
                phase_bits,
                weight_bits,
                factor_indices,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn generated_messages_validate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for kind in [ModelKind::Baseline, ModelKind::Parafac, ModelKind::Tucker] {
            for _ in 0..50 {
                random_message(kind, &mut rng).validate().unwrap();
            }
        }
    }
}
