//! Controller-side rebuild of the phase-shift vector from (dequantized) factors.
//!
//! The factor models produce a complex vector `ŝ`; the surface can only apply
//! phases, so the result is projected to `e^{j∠ŝ}` elementwise. Entries where `ŝ`
//! vanishes take phase 0 and are counted in [`Reconstruction::zero_entries`].

use alloc::vec::Vec;

use crate::decomposition::{reconstruct_parafac_unfolding, ParafacModel};
use crate::error::{invalid, Error, Result};
use crate::quantization::principal_angle;
use crate::tensor::{mode_product, ComplexMatrix, DenseTensor};
use crate::C64;

/// Unit-modulus phase-shift configuration of the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftVector {
    entries: Vec<C64>,
}

impl PhaseShiftVector {
    pub const MODULUS_TOL: f64 = 1e-12;

    /// Wraps entries that are already unit modulus.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("phase-shift vector must be non-empty"));
        }
        if entries.iter().any(|z| !((z.norm() - 1.0).abs() <= Self::MODULUS_TOL)) {
            return Err(invalid("phase-shift entries must have unit modulus"));
        }
        Ok(Self { entries })
    }

    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(angles.iter().map(|&a| C64::from_polar(1.0, a)).collect())
    }

    /// Projects an arbitrary complex vector onto unit modulus; returns the vector
    /// and the number of zero entries that defaulted to phase 0.
    pub fn project(raw: &[C64]) -> Result<(Self, usize)> {
        if raw.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        let zeros = raw.iter().filter(|z| z.norm_sqr() == 0.0).count();
        let entries = raw.iter().map(|&z| C64::from_polar(1.0, principal_angle(z))).collect();
        Ok((Self::new(entries)?, zeros))
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.entries.iter().map(|&z| principal_angle(z)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub phases: PhaseShiftVector,
    pub zero_entries: usize,
}

fn check_shape(factors: &[ComplexMatrix], shape: &[usize]) -> Result<()> {
    if factors.len() != shape.len() {
        return Err(Error::Dimension {
            context: "factor count",
            expected: shape.len(),
            found: factors.len(),
        });
    }
    for (f, &n) in factors.iter().zip(shape) {
        if f.rows() != n {
            return Err(Error::Dimension {
                context: "factor rows",
                expected: n,
                found: f.rows(),
            });
        }
    }
    Ok(())
}

/// `Σ_r λ_r (s_r^(P) ⊗ ... ⊗ s_r^(1))` before projection.
pub fn parafac_vector(factors: &[ComplexMatrix], weights: &[f64], shape: &[usize]) -> Result<Vec<C64>> {
    check_shape(factors, shape)?;
    let model = ParafacModel {
        factors: factors.to_vec(),
        weights: weights.to_vec(),
    };
    // vec of the mode-1 unfolding is the tensor vectorization
    Ok(reconstruct_parafac_unfolding(&model)?.into_data())
}

pub fn reconstruct_from_parafac(factors: &[ComplexMatrix], weights: &[f64], shape: &[usize]) -> Result<Reconstruction> {
    let raw = parafac_vector(factors, weights, shape)?;
    let (phases, zero_entries) = PhaseShiftVector::project(&raw)?;
    Ok(Reconstruction { phases, zero_entries })
}

/// `Σ_{r_1..r_P} G_{r_1..r_P} (σ^(P)_{r_P} s^(P)_{r_P}) ⊗ ... ⊗ (σ^(1)_{r_1} s^(1)_{r_1})`
/// before projection.
pub fn tucker_vector(
    factors: &[ComplexMatrix],
    core: &DenseTensor,
    sigmas: &[Vec<f64>],
    shape: &[usize],
) -> Result<Vec<C64>> {
    check_shape(factors, shape)?;
    if sigmas.len() != factors.len() || core.order() != factors.len() {
        return Err(invalid("core order and weight count must match the factor count"));
    }
    let mut t = core.clone();
    for (p, (f, s)) in factors.iter().zip(sigmas).enumerate() {
        if core.shape()[p] != f.cols() {
            return Err(Error::Dimension {
                context: "core rank",
                expected: f.cols(),
                found: core.shape()[p],
            });
        }
        t = mode_product(&t, &f.scale_columns(s)?, p + 1)?;
    }
    Ok(t.data().to_vec())
}

pub fn reconstruct_from_tucker(
    factors: &[ComplexMatrix],
    core: &DenseTensor,
    sigmas: &[Vec<f64>],
    shape: &[usize],
) -> Result<Reconstruction> {
    let raw = tucker_vector(factors, core, sigmas, shape)?;
    let (phases, zero_entries) = PhaseShiftVector::project(&raw)?;
    Ok(Reconstruction { phases, zero_entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kron_vec;
    use alloc::vec;

    fn polar(angles: &[f64]) -> Vec<C64> {
        angles.iter().map(|&a| C64::from_polar(1.0, a)).collect()
    }

    #[test]
    fn kronecker_vector_recovered_exactly() {
        let s1 = polar(&[0.1, -0.7, 2.0]);
        let s2 = polar(&[1.3, 0.4]);
        let s = kron_vec(&s2, &s1);
        let f1 = ComplexMatrix::column_vector(&s1).unwrap();
        let f2 = ComplexMatrix::column_vector(&s2).unwrap();
        let rec = reconstruct_from_parafac(&[f1, f2], &[1.0], &[3, 2]).unwrap();
        for (a, b) in rec.phases.entries().iter().zip(&s) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(rec.zero_entries, 0);
    }

    #[test]
    fn all_ones_factors() {
        let f = ComplexMatrix::from_fn(4, 1, |_, _| C64::new(1.0, 0.0));
        let rec = reconstruct_from_parafac(&[f.clone(), f], &[1.0], &[4, 4]).unwrap();
        assert!(rec
            .phases
            .entries()
            .iter()
            .all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn zero_entries_are_counted() {
        // two components cancelling on the first element
        let f1 = ComplexMatrix::new(
            2,
            2,
            vec![
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(-1.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let f2 = ComplexMatrix::from_fn(1, 2, |_, _| C64::new(1.0, 0.0));
        let rec = reconstruct_from_parafac(&[f1, f2], &[1.0, 1.0], &[2, 1]).unwrap();
        assert_eq!(rec.zero_entries, 1);
        assert_eq!(rec.phases.entries()[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn tucker_unit_ranks_collapse_to_parafac() {
        let s1 = polar(&[0.3, 1.1]);
        let s2 = polar(&[-2.0, 0.5, 0.9]);
        let f1 = ComplexMatrix::column_vector(&s1).unwrap();
        let f2 = ComplexMatrix::column_vector(&s2).unwrap();
        let core = DenseTensor::new(&[1, 1], vec![C64::new(1.0, 0.0)]).unwrap();
        let t = reconstruct_from_tucker(&[f1.clone(), f2.clone()], &core, &[vec![1.0], vec![1.0]], &[2, 3]).unwrap();
        let p = reconstruct_from_parafac(&[f1, f2], &[1.0], &[2, 3]).unwrap();
        for (a, b) in t.phases.entries().iter().zip(p.phases.entries()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let f = ComplexMatrix::zeros(3, 1);
        assert!(reconstruct_from_parafac(&[f.clone(), f], &[1.0], &[3, 2]).is_err());
        assert!(PhaseShiftVector::new(vec![C64::new(0.5, 0.0)]).is_err());
    }
}
