use std::f64::consts::PI;

use irsfac::quantization::{principal_angle, wrapped_distance, AmplitudeCodebook, PhaseCodebook};
use irsfac::reconstruction::{parafac_vector, reconstruct_from_parafac, tucker_vector, PhaseShiftVector};
use irsfac::system::codec::{decode, encode, FeedbackMessage, ParafacMessage, TuckerMessage};
use irsfac::system::{baseline_payload, parafac_payload, tucker_payload, TuckerBitAccounting};
use irsfac::tensor::{ComplexMatrix, DenseTensor};
use irsfac::{CodecError, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Multi-index of linear position `lin`, first mode fastest.
fn multi_index(mut lin: usize, shape: &[usize]) -> Vec<usize> {
    shape
        .iter()
        .map(|&d| {
            let i = lin % d;
            lin /= d;
            i
        })
        .collect()
}

#[test]
fn parafac_vector_matches_nested_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for shape in [vec![3, 4], vec![2, 3, 2], vec![2, 2, 2, 3]] {
        let rank = 3;
        let factors: Vec<_> = shape.iter().map(|&n| random_matrix(&mut rng, n, rank)).collect();
        let weights = [1.0, 0.6, 0.2];
        let got = parafac_vector(&factors, &weights, &shape).unwrap();
        assert_eq!(got.len(), shape.iter().product::<usize>());
        for (lin, g) in got.iter().enumerate() {
            let idx = multi_index(lin, &shape);
            let want: C64 = (0..rank)
                .map(|r| {
                    idx.iter()
                        .enumerate()
                        .fold(C64::new(weights[r], 0.0), |acc, (p, &i)| acc * factors[p].get(i, r))
                })
                .sum();
            assert!((g - want).norm() < 1e-12);
        }
    }
}

#[test]
fn tucker_vector_matches_nested_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shape = [3, 2, 4];
    let ranks = [2, 2, 3];
    let factors: Vec<_> = shape
        .iter()
        .zip(&ranks)
        .map(|(&n, &r)| random_matrix(&mut rng, n, r))
        .collect();
    let sigmas: Vec<Vec<f64>> = ranks
        .iter()
        .map(|&r| (0..r).map(|k| 1.0 / (k + 1) as f64).collect())
        .collect();
    let core_len: usize = ranks.iter().product();
    let core = DenseTensor::new(
        &ranks,
        (0..core_len)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap();
    let got = tucker_vector(&factors, &core, &sigmas, &shape).unwrap();
    assert_eq!(got.len(), shape.iter().product::<usize>());
    for (lin, g) in got.iter().enumerate() {
        let idx = multi_index(lin, &shape);
        let mut want = C64::new(0.0, 0.0);
        for c in 0..core_len {
            let r = multi_index(c, &ranks);
            let mut term = core.data()[c];
            for p in 0..3 {
                term *= factors[p].get(idx[p], r[p]) * sigmas[p][r[p]];
            }
            want += term;
        }
        assert!((g - want).norm() < 1e-12);
    }
}

#[test]
fn projection_keeps_phase_and_counts_zeros() {
    let raw = [C64::new(3.0, 4.0), C64::new(0.0, 0.0), C64::new(-2.0, 0.0)];
    let (s, zeros) = PhaseShiftVector::project(&raw).unwrap();
    assert_eq!(zeros, 1);
    assert!(s.entries().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    assert!((s.entries()[0] - C64::new(0.6, 0.8)).norm() < 1e-15);
    assert!((s.entries()[2] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    assert!(PhaseShiftVector::new(vec![C64::new(2.0, 0.0)]).is_err());
    // reconstruction from a mismatched shape is rejected
    let f = vec![ComplexMatrix::zeros(2, 1), ComplexMatrix::zeros(3, 1)];
    assert!(reconstruct_from_parafac(&f, &[1.0], &[3, 2]).is_err());
}

proptest! {
    #[test]
    fn phase_quantizer_is_nearest(angle in -10.0..10.0f64, bits in 1u8..=10) {
        let cb = PhaseCodebook::new(bits).unwrap();
        let idx = cb.nearest(angle);
        let got = cb.codeword(idx).unwrap();
        let best = cb
            .codewords()
            .iter()
            .map(|&c| wrapped_distance(angle, c))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((wrapped_distance(angle, got) - best).abs() < 1e-12);
        prop_assert!(wrapped_distance(angle, got) <= PI / (1u32 << bits) as f64 + 1e-12);
        let a = principal_angle(C64::from_polar(1.0, angle));
        prop_assert!(a > -PI && a <= PI);
    }

    #[test]
    fn amplitude_quantizer_is_nearest(value in 0.0..1.2f64, bits in 1u8..=8) {
        let cb = AmplitudeCodebook::new(bits).unwrap();
        let got = cb.codeword(cb.nearest(value)).unwrap();
        let best = cb.codewords().iter().map(|&c| (c - value).abs()).fold(f64::INFINITY, f64::min);
        prop_assert!(((got - value).abs() - best).abs() < 1e-12);
    }
}

#[test]
fn codebook_shapes() {
    for bits in 1..=8u8 {
        let cb = PhaseCodebook::new(bits).unwrap();
        let cw = cb.codewords();
        assert_eq!(cw.len(), 1 << bits);
        assert!(cw.windows(2).all(|w| (w[1] - w[0] - cb.step()).abs() < 1e-12));
        let acb = AmplitudeCodebook::new(bits).unwrap();
        let a = acb.codewords();
        assert_eq!((a[0], a[a.len() - 1]), (0.01, 1.0));
        assert!(a.windows(2).all(|w| w[1] >= w[0]));
    }
    assert!(PhaseCodebook::new(0).is_err());
    assert!(PhaseCodebook::new(17).is_err());
    assert!(PhaseCodebook::new(2).unwrap().codeword(4).is_err());
}

#[test]
fn payload_formulas() {
    let b = baseline_payload(1024, 3).unwrap();
    assert_eq!((b.body_bits(), b.conveyed_phases), (3072, 1024));

    let p = parafac_payload(&[16, 8, 8], 2, &[3, 4, 2], 5).unwrap();
    assert_eq!(p.phase_bits, 2 * (16 * 3 + 8 * 4 + 8 * 2));
    assert_eq!(p.weight_bits, 5);
    assert_eq!(p.conveyed_phases, 64);
    assert!(p.total_bits(true) > p.total_bits(false));

    let sizes = [8, 4, 4];
    let ranks = [3, 2, 2];
    let lit = tucker_payload(&sizes, &ranks, &[3, 3, 3], 2, TuckerBitAccounting::Literal).unwrap();
    let res = tucker_payload(&sizes, &ranks, &[3, 3, 3], 2, TuckerBitAccounting::CorePhaseResolution).unwrap();
    let codec = tucker_payload(&sizes, &ranks, &[3, 3, 3], 2, TuckerBitAccounting::Codec).unwrap();
    let factors = 3 * (8 * 3 + 4 * 2 + 4 * 2);
    assert_eq!(lit.phase_bits, factors);
    assert_eq!((lit.core_bits, lit.weight_bits), (12, 2 * 2));
    assert_eq!((res.core_bits, res.weight_bits), (3 * 12, 2 * 2));
    assert_eq!((codec.core_bits, codec.weight_bits), ((3 + 2) * 12, 2 * 4));
    assert_eq!(lit.conveyed_phases, 24 + 8 + 8);

    assert!(parafac_payload(&[4, 4], 0, &[3, 3], 3).is_err());
    assert!(parafac_payload(&[4, 4], 1, &[3], 3).is_err());
    assert!(tucker_payload(&[4, 4], &[5, 1], &[3, 3], 3, TuckerBitAccounting::Literal).is_err());
    assert!(baseline_payload(8, 0).is_err());
}

fn parafac_message() -> FeedbackMessage {
    FeedbackMessage::Parafac(ParafacMessage {
        sizes: vec![3, 2],
        rank: 2,
        phase_bits: vec![3, 2],
        weight_bits: 4,
        factor_indices: vec![vec![0, 1, 2, 3, 4, 5], vec![0, 1, 2, 3]],
        weight_indices: vec![9],
    })
}

fn tucker_message() -> FeedbackMessage {
    FeedbackMessage::Tucker(TuckerMessage {
        sizes: vec![2, 3],
        ranks: vec![2, 1],
        phase_bits: vec![2, 3],
        weight_bits: 3,
        factor_indices: vec![vec![0, 1, 2, 3], vec![7, 6, 5]],
        core_phase_indices: vec![1, 2],
        core_magnitude_indices: vec![7, 3],
        sigma_indices: vec![vec![5], vec![]],
    })
}

#[test]
fn codec_round_trips_fixed_messages() {
    let base = FeedbackMessage::Uncompressed {
        phase_bits: 3,
        indices: vec![0, 7, 3, 5],
    };
    for msg in [base, parafac_message(), tucker_message()] {
        let bytes = encode(&msg).unwrap();
        assert_eq!(bytes.len() as u64, msg.bit_len().div_ceil(8));
        assert_eq!(decode(&bytes).unwrap(), msg);
    }
}

#[test]
fn codec_rejects_malformed_input() {
    let bytes = encode(&parafac_message()).unwrap();
    for cut in 0..bytes.len() {
        assert!(
            matches!(decode(&bytes[..cut]), Err(CodecError::Truncated { .. })),
            "cut at {cut}"
        );
    }
    let mut long = bytes.clone();
    long.push(0);
    assert_eq!(decode(&long), Err(CodecError::TrailingData(1)));

    // model id occupies the two leading bits; 0b11 is unassigned
    let mut unknown = bytes.clone();
    unknown[0] |= 0b1100_0000;
    assert_eq!(decode(&unknown), Err(CodecError::UnknownModel(0b11)));

    let msg = tucker_message();
    let bits = msg.bit_len();
    let mut padded = encode(&msg).unwrap();
    if !bits.is_multiple_of(8) {
        *padded.last_mut().unwrap() |= 1;
        assert!(decode(&padded).is_err());
    }

    let mut bad = parafac_message();
    if let FeedbackMessage::Parafac(m) = &mut bad {
        m.factor_indices[1][0] = 4;
    }
    assert!(matches!(encode(&bad), Err(CodecError::Overflow { .. })));
    let mut short = parafac_message();
    if let FeedbackMessage::Parafac(m) = &mut short {
        m.weight_indices.clear();
    }
    assert!(encode(&short).is_err());
}
