//! PARAFAC (alternating least squares) and truncated HOSVD fits of a tensorized
//! phase-shift vector.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg::{extend_orthonormal, pseudo_inverse, svd};
use crate::tensor::{fold, khatri_rao_reversed, mode_product, unfold, ComplexMatrix, DenseTensor};
use crate::C64;

/// Default convergence threshold on consecutive NMSE values.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Columns whose norm falls below this are re-drawn at random.
const DEGENERATE_COLUMN_NORM: f64 = 1e-14;

/// Rank-`R` PARAFAC model with unit-norm factor columns and real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ParafacModel {
    pub factors: Vec<ComplexMatrix>,
    pub weights: Vec<f64>,
}

impl ParafacModel {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(ComplexMatrix::rows).collect()
    }

    pub fn to_tensor(&self) -> Result<DenseTensor> {
        fold(&reconstruct_parafac_unfolding(self)?, 1, &self.shape())
    }

    /// Reorders the components by non-increasing weight (stable).
    pub fn sorted_by_weight(&self) -> Self {
        let mut order: Vec<usize> = (0..self.rank()).collect();
        order.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]));
        let factors = self
            .factors
            .iter()
            .map(|f| {
                let cols: Vec<Vec<C64>> = order.iter().map(|&r| f.column(r).to_vec()).collect();
                ComplexMatrix::from_columns(&cols).expect("same shape")
            })
            .collect();
        Self {
            factors,
            weights: order.iter().map(|&r| self.weights[r]).collect(),
        }
    }
}

/// Tucker model from a truncated HOSVD.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    /// `N_p x R_p` factors with orthonormal columns.
    pub factors: Vec<ComplexMatrix>,
    /// Core tensor of shape `(R_1, ..., R_P)`.
    pub core: DenseTensor,
    /// Leading singular values of each unfolding, non-increasing.
    pub sigmas: Vec<Vec<f64>>,
}

impl TuckerModel {
    pub fn ranks(&self) -> Vec<usize> {
        self.factors.iter().map(ComplexMatrix::cols).collect()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(ComplexMatrix::rows).collect()
    }

    pub fn to_tensor(&self) -> Result<DenseTensor> {
        let mut t = self.core.clone();
        for (p, f) in self.factors.iter().enumerate() {
            t = mode_product(&t, f, p + 1)?;
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub iterations: usize,
    /// NMSE after each iteration.
    pub nmse_trace: Vec<f64>,
    /// True when the run stopped on the NMSE threshold rather than the iteration cap.
    pub converged: bool,
    pub final_nmse: f64,
    /// The rank exceeds the row count of some Khatri-Rao design matrix, so the
    /// least-squares updates are under-determined.
    pub over_parameterized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlsOptions {
    pub max_iters: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for AlsOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            epsilon: DEFAULT_EPSILON,
            seed: 0,
        }
    }
}

fn random_unit_column<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum());
        if norm > DEGENERATE_COLUMN_NORM {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Normalizes the columns of `m` in place of a copy and returns their norms.
fn normalize_columns<R: Rng + ?Sized>(m: &ComplexMatrix, rng: &mut R) -> (ComplexMatrix, Vec<f64>) {
    let mut norms = Vec::with_capacity(m.cols());
    let cols: Vec<Vec<C64>> = (0..m.cols())
        .map(|r| {
            let col = m.column(r);
            let norm = libm::sqrt(col.iter().map(|x| x.norm_sqr()).sum());
            if norm < DEGENERATE_COLUMN_NORM {
                norms.push(0.0);
                random_unit_column(rng, m.rows())
            } else {
                norms.push(norm);
                col.iter().map(|x| x / norm).collect()
            }
        })
        .collect();
    (ComplexMatrix::from_columns(&cols).expect("non-empty"), norms)
}

/// PARAFAC fit by alternating least squares.
///
/// Factors `2..P` start as column-normalized complex Gaussian draws from `opts.seed`.
/// Each iteration solves the `P` least-squares problems in order `p = 1..P`, every
/// solve using the freshest (normalized) estimates of the other factors, and
/// normalizes the new factor's columns. The component weights are the column norms
/// of the last solve, which is where the model's scale ends up. The run stops once
/// `|e_i - e_{i-1}| <= epsilon` or after `max_iters` iterations.
pub fn parafac_als(t: &DenseTensor, rank: usize, opts: &AlsOptions) -> Result<(ParafacModel, FitReport)> {
    if rank == 0 {
        return Err(invalid("rank must be at least 1"));
    }
    if opts.max_iters == 0 {
        return Err(invalid("max_iters must be at least 1"));
    }
    if !(opts.epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let reference_norm = t.frobenius_norm();
    if reference_norm == 0.0 {
        return Err(Error::ZeroNorm("tensor"));
    }

    let shape = t.shape().to_vec();
    let order = shape.len();
    let total: usize = shape.iter().product();
    let over_parameterized = shape.iter().any(|&n| rank > total / n);
    let unfoldings: Vec<ComplexMatrix> = (1..=order).map(|p| unfold(t, p)).collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut factors: Vec<ComplexMatrix> = shape
        .iter()
        .map(|&n| {
            let cols: Vec<Vec<C64>> = (0..rank).map(|_| random_unit_column(&mut rng, n)).collect();
            ComplexMatrix::from_columns(&cols).expect("non-empty")
        })
        .collect();
    let mut weights = alloc::vec![1.0; rank];
    let mut trace = Vec::new();
    let mut converged = false;

    for iter in 1..=opts.max_iters {
        for p in 0..order {
            let design = khatri_rao_reversed(&factors, Some(p))?;
            let update = unfoldings[p].matmul(&pseudo_inverse(&design.transpose())?)?;
            let (normalized, norms) = normalize_columns(&update, &mut rng);
            factors[p] = normalized;
            weights = norms;
        }
        let model = ParafacModel {
            factors: factors.clone(),
            weights: weights.clone(),
        };
        let residual = reconstruct_parafac_unfolding(&model)?.sub(&unfoldings[0])?;
        let r = residual.frobenius_norm();
        let e = (r * r) / (reference_norm * reference_norm);
        trace.push(e);
        if iter >= 2 && (e - trace[iter - 2]).abs() <= opts.epsilon {
            converged = true;
            break;
        }
    }

    let final_nmse = *trace.last().expect("at least one iteration");
    Ok((
        ParafacModel { factors, weights },
        FitReport {
            iterations: trace.len(),
            nmse_trace: trace,
            converged,
            final_nmse,
            over_parameterized,
        },
    ))
}

/// Mode-1 unfolding of a PARAFAC model: `S1 diag(λ) (S_P ⋄ ... ⋄ S_2)^T`.
pub fn reconstruct_parafac_unfolding(model: &ParafacModel) -> Result<ComplexMatrix> {
    let first = model.factors.first().ok_or_else(|| invalid("model has no factors"))?;
    if model.factors.iter().any(|f| f.cols() != model.rank()) {
        return Err(invalid("factor column count differs from the number of weights"));
    }
    let design = khatri_rao_reversed(&model.factors, Some(0))?;
    first.scale_columns(&model.weights)?.matmul(&design.transpose())
}

/// Truncated higher-order SVD with ranks `(R_1, ..., R_P)`.
pub fn tucker_hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<(TuckerModel, FitReport)> {
    if ranks.len() != t.order() {
        return Err(Error::Dimension {
            context: "tucker ranks",
            expected: t.order(),
            found: ranks.len(),
        });
    }
    for (&r, &n) in ranks.iter().zip(t.shape()) {
        if r == 0 || r > n {
            return Err(invalid("tucker rank must satisfy 1 <= R_p <= N_p"));
        }
    }
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut factors = Vec::with_capacity(ranks.len());
    let mut sigmas = Vec::with_capacity(ranks.len());
    for (p, &r) in ranks.iter().enumerate() {
        let decomposition = svd(&unfold(t, p + 1)?)?;
        let k = decomposition.singular_values.len();
        let u = if r <= k {
            decomposition.u.leading_columns(r)?
        } else {
            extend_orthonormal(&decomposition.u, r)?
        };
        let mut sigma: Vec<f64> = decomposition.singular_values.iter().copied().take(r).collect();
        sigma.resize(r, 0.0);
        factors.push(u);
        sigmas.push(sigma);
    }
    let mut core = t.clone();
    for (p, f) in factors.iter().enumerate() {
        core = mode_product(&core, &f.conj_transpose(), p + 1)?;
    }
    let model = TuckerModel { factors, core, sigmas };
    let e = if t.frobenius_norm() == 0.0 {
        0.0
    } else {
        nmse(t, &model.to_tensor()?)?
    };
    Ok((
        model,
        FitReport {
            iterations: 1,
            nmse_trace: alloc::vec![e],
            converged: true,
            final_nmse: e,
            over_parameterized: false,
        },
    ))
}

/// `‖reference - estimate‖²_F / ‖reference‖²_F`.
pub fn nmse(reference: &DenseTensor, estimate: &DenseTensor) -> Result<f64> {
    if reference.shape() != estimate.shape() {
        return Err(Error::Dimension {
            context: "nmse shapes",
            expected: reference.len(),
            found: estimate.len(),
        });
    }
    let denom: f64 = reference.data().iter().map(|x| x.norm_sqr()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroNorm("reference tensor"));
    }
    let num: f64 = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(num / denom)
}
