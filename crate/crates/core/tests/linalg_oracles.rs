use irsfac::linalg::{dominant_singular_vectors, pseudo_inverse, svd};
use irsfac::tensor::ComplexMatrix;
use irsfac::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a real symmetric matrix (row-major `n x n`) by cyclic Jacobi.
fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Singular values from the eigenvalues of the real embedding of `AᴴA`; each
/// eigenvalue appears twice there.
fn oracle_singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let g = m.conj_transpose().matmul(m).unwrap();
    let n = g.rows();
    let mut real = vec![0.0; 4 * n * n];
    for i in 0..n {
        for j in 0..n {
            let z = g.get(i, j);
            real[i * 2 * n + j] = z.re;
            real[i * 2 * n + j + n] = -z.im;
            real[(i + n) * 2 * n + j] = z.im;
            real[(i + n) * 2 * n + j + n] = z.re;
        }
    }
    symmetric_eigenvalues(real, 2 * n)
        .chunks(2)
        .map(|p| p[0].max(0.0).sqrt())
        .collect()
}

#[test]
fn singular_values_match_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (rows, cols) in [(5, 3), (3, 5), (6, 6), (8, 2), (1, 4)] {
        let m = random_matrix(&mut rng, rows, cols);
        let got = svd(&m).unwrap().singular_values;
        let want = oracle_singular_values(&m);
        for (k, g) in got.iter().enumerate() {
            assert!((g - want[k]).abs() < 1e-10, "{rows}x{cols}: {got:?} vs {want:?}");
        }
        // extra oracle values belong to the null space
        assert!(want[got.len()..].iter().all(|&w| w < 1e-6));
    }
}

#[test]
fn factorization_reconstructs_and_is_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (rows, cols) in [(7, 4), (4, 7), (5, 5)] {
        let m = random_matrix(&mut rng, rows, cols);
        let d = svd(&m).unwrap();
        assert!(max_diff(&d.reconstruct(), &m) < 1e-12);
        let k = d.singular_values.len();
        let uu = d.u.conj_transpose().matmul(&d.u).unwrap();
        let vv = d.vh.matmul(&d.vh.conj_transpose()).unwrap();
        assert!(max_diff(&uu, &ComplexMatrix::identity(k)) < 1e-12);
        assert!(max_diff(&vv, &ComplexMatrix::identity(k)) < 1e-12);
        for j in 0..k {
            // phase convention: largest entry of each U column is real and positive
            let col = d.u.column(j);
            let big = col.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(big.im.abs() < 1e-12 && big.re > 0.0);
        }
    }
}

#[test]
fn rank_deficient_input() {
    let a = ComplexMatrix::from_fn(6, 1, |i, _| C64::new(i as f64, 1.0));
    let b = ComplexMatrix::from_fn(1, 4, |_, j| C64::new(1.0, -(j as f64)));
    let m = a.matmul(&b).unwrap();
    let d = svd(&m).unwrap();
    assert!(d.singular_values[1..].iter().all(|&s| s < 1e-12 * d.singular_values[0]));
    assert!(max_diff(&d.reconstruct(), &m) < 1e-12);
}

#[test]
fn pseudo_inverse_penrose_conditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let low_rank = {
        let a = random_matrix(&mut rng, 6, 2);
        let b = random_matrix(&mut rng, 2, 5);
        a.matmul(&b).unwrap()
    };
    for m in [random_matrix(&mut rng, 5, 3), random_matrix(&mut rng, 3, 5), low_rank] {
        let x = pseudo_inverse(&m).unwrap();
        let mxm = m.matmul(&x).unwrap().matmul(&m).unwrap();
        let xmx = x.matmul(&m).unwrap().matmul(&x).unwrap();
        let mx = m.matmul(&x).unwrap();
        let xm = x.matmul(&m).unwrap();
        assert!(max_diff(&mxm, &m) < 1e-10);
        assert!(max_diff(&xmx, &x) < 1e-10);
        assert!(max_diff(&mx, &mx.conj_transpose()) < 1e-10);
        assert!(max_diff(&xm, &xm.conj_transpose()) < 1e-10);
    }
}

#[test]
fn dominant_triplet_matches_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = random_matrix(&mut rng, 6, 4);
    let (u, sigma, v) = dominant_singular_vectors(&m).unwrap();
    let g = m.conj_transpose().matmul(&m).unwrap();
    let mut x = vec![C64::new(1.0, 0.0); 4];
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let y = g.mul_vec(&x).unwrap();
        lambda = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x = y.into_iter().map(|z| z / lambda).collect();
    }
    assert!((sigma - lambda.sqrt()).abs() < 1e-9);
    // v matches the power iterate up to phase
    let overlap: C64 = v.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-9);
    let mv = m.mul_vec(&v).unwrap();
    for (a, b) in mv.iter().zip(&u) {
        assert!((a - b * sigma).norm() < 1e-9);
    }
}
