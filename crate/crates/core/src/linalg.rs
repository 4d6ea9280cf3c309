//! Complex SVD (one-sided Jacobi), pseudo-inverse and dominant singular triplet.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::ComplexMatrix;
use crate::C64;

/// Off-diagonal convergence threshold of the Jacobi sweeps.
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 80;
/// Relative cutoff below which singular values are treated as zero by
/// [`pseudo_inverse`].
pub const PINV_RTOL: f64 = 1e-12;

/// Thin SVD `m = U diag(s) Vh` with `k = min(rows, cols)` components.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// `rows x k`, orthonormal columns.
    pub u: ComplexMatrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `k x cols`, orthonormal rows.
    pub vh: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let us = self
            .u
            .scale_columns(&self.singular_values)
            .expect("svd factors are consistent");
        us.matmul(&self.vh).expect("svd factors are consistent")
    }
}

/// Singular value decomposition.
///
/// Each column of `U` is rotated so that its largest-magnitude entry (first one on
/// ties) is real and positive; the matching row of `Vh` absorbs the conjugate phase.
pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let (mut u, s, mut v) = if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        // m^H = U' S V'^H  =>  m = V' S U'^H
        let (u2, s, v2) = jacobi_tall(&m.conj_transpose());
        (v2, s, u2)
    };
    let k = s.len();
    for j in 0..k {
        let col = &mut u[j];
        let mut best = 0;
        let mut best_mag = -1.0;
        for (i, x) in col.iter().enumerate() {
            let mag = x.norm_sqr();
            if mag > best_mag * (1.0 + 1e-12) {
                best = i;
                best_mag = mag;
            }
        }
        let pivot = col[best];
        if pivot.norm() > 0.0 {
            let rot = pivot.conj() / pivot.norm();
            for x in col.iter_mut() {
                *x *= rot;
            }
            // u v^H invariant: v scaled by the same unit factor
            for x in v[j].iter_mut() {
                *x *= rot;
            }
        }
    }
    let u = ComplexMatrix::from_columns(&u)?;
    let v = ComplexMatrix::from_columns(&v)?;
    Ok(SvdResult {
        u,
        singular_values: s,
        vh: v.conj_transpose(),
    })
}

/// Hestenes one-sided Jacobi for `rows >= cols`. Returns `U` columns, singular
/// values (sorted descending) and `V` columns.
fn jacobi_tall(m: &ComplexMatrix) -> (Vec<Vec<C64>>, Vec<f64>, Vec<Vec<C64>>) {
    let n = m.cols();
    let rows = m.rows();
    let mut a: Vec<Vec<C64>> = (0..n).map(|j| m.column(j).to_vec()).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = a[i].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = a[j].iter().map(|x| x.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = a[i].iter().zip(&a[j]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= JACOBI_TOL * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let phase = gamma.conj() / g; // e^{-j arg(gamma)}
                rotate(&mut a, i, j, c, s, phase);
                rotate(&mut v, i, j, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = a
        .iter()
        .map(|col| libm::sqrt(col.iter().map(|x| x.norm_sqr()).sum()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let smax = order.first().map_or(0.0, |&i| sigma[i]);

    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut s_sorted = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for &idx in &order {
        let s = sigma[idx];
        // columns that collapsed to numerical zero get an orthonormal completion
        if s > 0.0 && s > smax * 1e-14 {
            u_cols.push(a[idx].iter().map(|x| x / s).collect());
        } else {
            sigma[idx] = 0.0;
            pending.push(u_cols.len());
            u_cols.push(Vec::new());
        }
        v_cols.push(core::mem::take(&mut v[idx]));
        s_sorted.push(sigma[idx]);
    }
    for slot in pending {
        u_cols[slot] = orthonormal_completion(&u_cols, rows);
    }
    (u_cols, s_sorted, v_cols)
}

fn rotate(cols: &mut [Vec<C64>], i: usize, j: usize, c: f64, s: f64, phase: C64) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let yp = *y * phase;
        let xi = *x * c - yp * s;
        let yj = *x * s + yp * c;
        *x = xi;
        *y = yj;
    }
}

/// Unit vector orthogonal to every non-empty column in `cols`.
fn orthonormal_completion(cols: &[Vec<C64>], rows: usize) -> Vec<C64> {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for e in 0..rows {
        let mut x = vec![C64::new(0.0, 0.0); rows];
        x[e] = C64::new(1.0, 0.0);
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for q in cols.iter().filter(|q| !q.is_empty()) {
                let proj: C64 = q.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
                for (xi, qi) in x.iter_mut().zip(q) {
                    *xi -= proj * qi;
                }
            }
        }
        let norm = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum());
        if norm > 0.5 {
            return x.into_iter().map(|z| z / norm).collect();
        }
        if best.as_ref().is_none_or(|(b, _)| norm > *b) {
            best = Some((norm, x));
        }
    }
    let (norm, x) = best.expect("rows > 0");
    x.into_iter().map(|z| z / norm).collect()
}

/// Extends a matrix with orthonormal columns to `cols` orthonormal columns.
///
/// The new columns are `Q e_i, i ≥ k`, where `Q = H_1 ⋯ H_k` comes from a
/// Householder QR of the input.
pub fn extend_orthonormal(u: &ComplexMatrix, cols: usize) -> Result<ComplexMatrix> {
    let (rows, k) = (u.rows(), u.cols());
    if cols > rows {
        return Err(crate::error::invalid("cannot extend beyond the row count"));
    }
    let mut a: Vec<Vec<C64>> = (0..k).map(|j| u.column(j).to_vec()).collect();
    let mut reflectors: Vec<(Vec<C64>, f64)> = Vec::with_capacity(k);
    for j in 0..k.min(rows) {
        let norm = libm::sqrt(a[j][j..].iter().map(|z| z.norm_sqr()).sum());
        if norm == 0.0 {
            continue;
        }
        let x0 = a[j][j];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut v = vec![C64::new(0.0, 0.0); rows];
        v[j..].copy_from_slice(&a[j][j..]);
        v[j] += phase * norm;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j) {
            reflect(&v, vv, col);
        }
        reflectors.push((v, vv));
    }
    let mut all: Vec<Vec<C64>> = (0..k).map(|j| u.column(j).to_vec()).collect();
    for i in k..cols {
        let mut e = vec![C64::new(0.0, 0.0); rows];
        e[i] = C64::new(1.0, 0.0);
        for (v, vv) in reflectors.iter().rev() {
            reflect(v, *vv, &mut e);
        }
        all.push(e);
    }
    all.truncate(cols.max(1));
    ComplexMatrix::from_columns(&all)
}

/// `x ← (I − 2vvᴴ/‖v‖²) x`.
fn reflect(v: &[C64], vv: f64, x: &mut [C64]) {
    let dot: C64 = v.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    let f = dot * (2.0 / vv);
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

/// Moore-Penrose pseudo-inverse; singular values at or below
/// `PINV_RTOL * s_max` are dropped.
pub fn pseudo_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let svd = svd(m)?;
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = PINV_RTOL * smax;
    let inv: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 })
        .collect();
    // m^+ = V diag(1/s) U^H
    let v = svd.vh.conj_transpose().scale_columns(&inv)?;
    v.matmul(&svd.u.conj_transpose())
}

/// Leading singular triplet `(u_1, sigma_1, v_1)` with `m ≈ sigma_1 u_1 v_1^H`.
pub fn dominant_singular_vectors(m: &ComplexMatrix) -> Result<(Vec<C64>, f64, Vec<C64>)> {
    let svd = svd(m)?;
    let u = svd.u.column(0).to_vec();
    let v: Vec<C64> = (0..svd.vh.cols()).map(|j| svd.vh.get(0, j).conj()).collect();
    Ok((u, svd.singular_values[0], v))
}
