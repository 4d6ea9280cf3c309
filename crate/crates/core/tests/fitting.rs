use irsfac::channel::{sample_channels, ChannelParams, GeometrySample};
use irsfac::decomposition::{nmse, parafac_als, tucker_hosvd, AlsOptions};
use irsfac::linalg::svd;
use irsfac::system::design_beamformers;
use irsfac::tensor::{tensorize, unfold, DenseTensor};
use irsfac::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> DenseTensor {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect::<Vec<_>>();
    DenseTensor::new(shape, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn als_trace_never_rises(
        shape in prop::collection::vec(2usize..5, 2..5),
        rank in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(&mut rng, &shape);
        let opts = AlsOptions { max_iters: 300, epsilon: 1e-9, seed };
        let (model, rep) = parafac_als(&t, rank, &opts).unwrap();
        for w in rep.nmse_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", rep.nmse_trace);
        }
        prop_assert_eq!(rep.iterations, rep.nmse_trace.len());
        prop_assert!((rep.final_nmse - nmse(&t, &model.to_tensor().unwrap()).unwrap()).abs() < 1e-10);
        prop_assert!(model.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn hosvd_error_within_discarded_energy(
        shape in prop::collection::vec(2usize..6, 2..4),
        cut in prop::collection::vec(0usize..3, 3),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tensor(&mut rng, &shape);
        let ranks: Vec<usize> = shape.iter().zip(&cut).map(|(&n, &c)| n.saturating_sub(c).max(1)).collect();
        let (model, rep) = tucker_hosvd(&t, &ranks).unwrap();
        let mut discarded = 0.0;
        for (p, &r) in ranks.iter().enumerate() {
            let s = svd(&unfold(&t, p + 1).unwrap()).unwrap().singular_values;
            let r = r.min(s.len());
            prop_assert!(s[..r].iter().zip(&model.sigmas[p]).all(|(a, b)| (a - b).abs() < 1e-12));
            discarded += s[r..].iter().map(|x| x * x).sum::<f64>();
        }
        let energy = t.frobenius_norm().powi(2);
        prop_assert!(rep.final_nmse <= discarded / energy + 1e-12);
        for f in &model.factors {
            let g = f.conj_transpose().matmul(f).unwrap();
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((g.get(i, j) - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn separated_rank_two_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shape = [4, 5, 3];
    // random starts occasionally swamp, so only most runs must succeed
    let mut recovered = 0;
    for trial in 0..100 {
        let vecs: Vec<Vec<Vec<C64>>> = (0..2)
            .map(|_| {
                shape
                    .iter()
                    .map(|&n| {
                        let v: Vec<C64> = (0..n)
                            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                            .collect();
                        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        v.into_iter().map(|z| z / norm).collect()
                    })
                    .collect()
            })
            .collect();
        let t1 = irsfac::tensor::outer_product(&vecs[0]).unwrap();
        let t2 = irsfac::tensor::outer_product(&vecs[1]).unwrap();
        let data = t1.data().iter().zip(t2.data()).map(|(x, y)| x * 3.0 + y).collect();
        let t = DenseTensor::new(&shape, data).unwrap();
        let opts = AlsOptions {
            max_iters: 200,
            epsilon: 1e-14,
            seed: trial,
        };
        let (_, rep) = parafac_als(&t, 2, &opts).unwrap();
        recovered += usize::from(rep.final_nmse <= 1e-6);
    }
    assert!(recovered >= 90, "{recovered}/100");
}

#[test]
fn los_phase_vector_is_rank_one_on_the_planar_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n_h, n_v) in [(8, 4), (16, 16), (32, 32)] {
        let geo = GeometrySample::sample(&mut rng, n_h, n_v);
        let params = ChannelParams::normalized(2, 3, f64::INFINITY);
        let ch = sample_channels(&params, &geo, &mut rng).unwrap();
        let s = design_beamformers(&ch).unwrap().s_opt;
        let t = tensorize(s.entries(), &[n_h, n_v]).unwrap();
        let (_, rep) = parafac_als(&t, 1, &AlsOptions::default()).unwrap();
        assert!(rep.final_nmse <= 1e-9, "{n_h}x{n_v}: {}", rep.final_nmse);
        let (_, rep) = tucker_hosvd(&t, &[1, 1]).unwrap();
        assert!(rep.final_nmse <= 1e-9);
    }
}

#[test]
fn invalid_fits_are_rejected() {
    let t = DenseTensor::zeros(&[2, 3]).unwrap();
    assert!(parafac_als(&t, 0, &AlsOptions::default()).is_err());
    assert!(tucker_hosvd(&t, &[3, 1]).is_err());
    assert!(tucker_hosvd(&t, &[1]).is_err());
    let nan = DenseTensor::new(&[1, 2], vec![C64::new(f64::NAN, 0.0), C64::new(1.0, 0.0)]).unwrap();
    assert!(parafac_als(&nan, 1, &AlsOptions::default()).is_err());
}
