//! Dense complex tensors and the product kernels used by the fits.
//!
//! Storage is column-major with the first index fastest, so a vector of length
//! `N_1 * ... * N_P` reinterpreted as a tensor follows the usual tensorization map
//! `y[n_1 + n_2 N_1 + ... + n_P N_1 ... N_{P-1}]` (0-based).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Highest tensor order supported by the kernels.
pub const MAX_ORDER: usize = 12;

/// Column-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            },
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally sized columns.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let first = columns
            .first()
            .ok_or_else(|| invalid("at least one column is required"))?;
        let rows = first.len();
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::Dimension {
                    context: "column length",
                    expected: rows,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::new(rows, columns.len(), data)
    }

    /// Single-column matrix.
    pub fn column_vector(v: &[C64]) -> Result<Self> {
        Self::new(v.len(), 1, v.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension {
                context: "matrix product",
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut data = vec![C64::new(0.0, 0.0); self.rows * rhs.cols];
        for j in 0..rhs.cols {
            let out = &mut data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = rhs.get(k, j);
                if b == C64::new(0.0, 0.0) {
                    continue;
                }
                for (o, a) in out.iter_mut().zip(self.column(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: rhs.cols,
            data,
        })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (k, &b) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.column(k)) {
                *o += a * b;
            }
        }
        Ok(out)
    }

    /// `self * diag(d)`.
    pub fn scale_columns(&self, d: &[f64]) -> Result<Self> {
        if d.len() != self.cols {
            return Err(Error::Dimension {
                context: "column scaling",
                expected: self.cols,
                found: d.len(),
            });
        }
        let mut data = self.data.clone();
        for (j, &s) in d.iter().enumerate() {
            for x in &mut data[j * self.rows..(j + 1) * self.rows] {
                *x *= s;
            }
        }
        Ok(Self { data, ..*self })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            data: self.data.iter().map(|x| x * s).collect(),
            ..*self
        }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension {
                context: "matrix difference",
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        Ok(Self {
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
            ..*self
        })
    }

    /// Leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.cols {
            return Err(invalid("column truncation out of range"));
        }
        Ok(Self {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x.norm_sqr()).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

/// Dense complex tensor of order `1..=MAX_ORDER`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl DenseTensor {
    pub fn new(shape: &[usize], data: Vec<C64>) -> Result<Self> {
        let n = checked_volume(shape)?;
        if data.len() != n {
            return Err(Error::Dimension {
                context: "tensor data",
                expected: n,
                found: data.len(),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let n = checked_volume(shape)?;
        Self::new(shape, vec![C64::new(0.0, 0.0); n])
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Element at a 0-based multi-index.
    pub fn get(&self, index: &[usize]) -> C64 {
        self.data[linear_index(&self.shape, index)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x.norm_sqr()).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

fn checked_volume(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.len() > MAX_ORDER {
        return Err(invalid("tensor order must be between 1 and 12"));
    }
    if shape.contains(&0) {
        return Err(invalid("tensor dimensions must be positive"));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| invalid("tensor volume overflows"))
}

/// Column-major linear offset of a 0-based multi-index.
pub fn linear_index(shape: &[usize], index: &[usize]) -> usize {
    debug_assert_eq!(shape.len(), index.len());
    let mut offset = 0;
    let mut stride = 1;
    for (&n, &i) in shape.iter().zip(index) {
        debug_assert!(i < n);
        offset += i * stride;
        stride *= n;
    }
    offset
}

/// Reshapes a vector into a tensor of the given shape.
pub fn tensorize(v: &[C64], shape: &[usize]) -> Result<DenseTensor> {
    let n = checked_volume(shape)?;
    if n != v.len() {
        return Err(Error::Dimension {
            context: "tensorize",
            expected: n,
            found: v.len(),
        });
    }
    DenseTensor::new(shape, v.to_vec())
}

pub fn untensorize(t: &DenseTensor) -> Vec<C64> {
    t.data.clone()
}

fn check_mode(order: usize, mode: usize) -> Result<()> {
    if mode == 0 || mode > order {
        Err(Error::ModeOutOfRange { mode, order })
    } else {
        Ok(())
    }
}

/// Mode-`mode` unfolding (1-based mode). Columns enumerate the remaining indices
/// with the lowest remaining mode varying fastest.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<ComplexMatrix> {
    check_mode(t.order(), mode)?;
    let p = mode - 1;
    let rows = t.shape[p];
    let inner: usize = t.shape[..p].iter().product();
    let outer: usize = t.shape[p + 1..].iter().product();
    let cols = inner * outer;
    let mut data = vec![C64::new(0.0, 0.0); rows * cols];
    // source offset = a + inner * (i + rows * b); column = a + inner * b
    for b in 0..outer {
        for i in 0..rows {
            let src = inner * (i + rows * b);
            for a in 0..inner {
                data[i + rows * (a + inner * b)] = t.data[src + a];
            }
        }
    }
    ComplexMatrix::new(rows, cols, data)
}

/// Inverse of [`unfold`].
pub fn fold(m: &ComplexMatrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
    let n = checked_volume(shape)?;
    check_mode(shape.len(), mode)?;
    let p = mode - 1;
    if m.rows() != shape[p] || m.rows() * m.cols() != n {
        return Err(Error::Dimension {
            context: "fold",
            expected: n,
            found: m.rows() * m.cols(),
        });
    }
    let rows = shape[p];
    let inner: usize = shape[..p].iter().product();
    let outer: usize = shape[p + 1..].iter().product();
    let mut data = vec![C64::new(0.0, 0.0); n];
    for b in 0..outer {
        for i in 0..rows {
            let dst = inner * (i + rows * b);
            for a in 0..inner {
                data[dst + a] = m.get(i, a + inner * b);
            }
        }
    }
    DenseTensor::new(shape, data)
}

/// Kronecker product `a ⊗ b`: block `(i, j)` is `a[i, j] * b`.
pub fn kronecker(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |r, c| {
        a.get(r / b.rows, c / b.cols) * b.get(r % b.rows, c % b.cols)
    })
}

/// Kronecker product of two vectors (`b` index fastest).
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Column-wise Kronecker product.
pub fn khatri_rao(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.cols {
        return Err(Error::Dimension {
            context: "khatri-rao column count",
            expected: a.cols,
            found: b.cols,
        });
    }
    let mut data = Vec::with_capacity(a.rows * b.rows * a.cols);
    for r in 0..a.cols {
        data.extend(kron_vec(a.column(r), b.column(r)));
    }
    ComplexMatrix::new(a.rows * b.rows, a.cols, data)
}

/// `m[P-1] ⋄ ... ⋄ m[0]` skipping index `skip` (if any). Every matrix must have the
/// same number of columns.
pub fn khatri_rao_reversed(mats: &[ComplexMatrix], skip: Option<usize>) -> Result<ComplexMatrix> {
    let mut acc: Option<ComplexMatrix> = None;
    for (p, m) in mats.iter().enumerate().rev() {
        if Some(p) == skip {
            continue;
        }
        acc = Some(match acc {
            None => m.clone(),
            Some(prev) => khatri_rao(&prev, m)?,
        });
    }
    match acc {
        Some(m) => Ok(m),
        None => {
            let cols = mats
                .first()
                .map(ComplexMatrix::cols)
                .ok_or_else(|| invalid("at least one matrix is required"))?;
            Ok(ComplexMatrix::from_fn(1, cols, |_, _| C64::new(1.0, 0.0)))
        }
    }
}

/// Elementwise product of equally shaped matrices.
pub fn hadamard(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Dimension {
            context: "hadamard",
            expected: a.rows * a.cols,
            found: b.rows * b.cols,
        });
    }
    ComplexMatrix::new(a.rows, a.cols, a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect())
}

/// Outer product `v[0] ∘ v[1] ∘ ... ∘ v[P-1]`.
pub fn outer_product(vectors: &[Vec<C64>]) -> Result<DenseTensor> {
    if vectors.is_empty() {
        return Err(invalid("outer product of an empty list"));
    }
    let shape: Vec<usize> = vectors.iter().map(Vec::len).collect();
    checked_volume(&shape)?;
    // vec(v1 ∘ ... ∘ vP) = vP ⊗ ... ⊗ v1
    let mut data = vectors[vectors.len() - 1].clone();
    for v in vectors[..vectors.len() - 1].iter().rev() {
        data = kron_vec(&data, v);
    }
    DenseTensor::new(&shape, data)
}

/// Mode-`mode` product `t ×_mode m` (1-based): the mode-`mode` unfolding of the
/// result is `m * unfold(t, mode)`.
pub fn mode_product(t: &DenseTensor, m: &ComplexMatrix, mode: usize) -> Result<DenseTensor> {
    check_mode(t.order(), mode)?;
    let p = mode - 1;
    if m.cols() != t.shape[p] {
        return Err(Error::Dimension {
            context: "mode product",
            expected: t.shape[p],
            found: m.cols(),
        });
    }
    let unfolded = unfold(t, mode)?;
    let product = m.matmul(&unfolded)?;
    let mut shape = t.shape.clone();
    shape[p] = m.rows();
    fold(&product, mode, &shape)
}
