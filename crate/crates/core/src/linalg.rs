//! Dense complex linear algebra for the small spaces this crate works in:
//! the qubit (2), the qutrit ancilla (3) and their product (6).
//!
//! Everything is row-major `Vec<Complex64>`; no attempt is made to be a
//! general-purpose library.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension any vector or matrix may have.
pub const MAX_DIM: usize = 6;

/// Default tolerance for Hermiticity, orthonormality and positivity checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

/// A ket with at most [`MAX_DIM`] complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        check_dim(entries.len())?;
        Ok(Self { entries })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![ZERO; dim])
    }

    /// Canonical basis vector `|k⟩` of a `dim`-dimensional space.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::invalid("k", format!("basis index {k} >= dim {dim}")));
        }
        let mut v = Self::zeros(dim)?;
        v.entries[k] = ONE;
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.entries[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Returns the unit vector along `self`; zero vectors are rejected.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < DEFAULT_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    /// Tensor product `|self⟩ ⊗ |other⟩`, index `i * other.dim() + j`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                out.push(a * b);
            }
        }
        Self::new(out)
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        same_dim(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `⟨a|b⟩`, conjugating the first argument.
pub fn inner_product(a: &ComplexVector, b: &ComplexVector) -> Result<Complex64> {
    same_dim(a.dim(), b.dim())?;
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `|⟨a|b⟩|²` for unit vectors.
pub fn fidelity(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// Row-major dense complex matrix with both sides at most [`MAX_DIM`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_dim(rows)?;
        check_dim(cols)?;
        same_dim(rows * cols, entries.len())?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.entries[i * n + i] = ONE;
        }
        Ok(m)
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let cols = columns.len();
        check_dim(cols)?;
        let rows = columns[0].dim();
        let mut m = Self::zeros(rows, cols)?;
        for (c, v) in columns.iter().enumerate() {
            same_dim(rows, v.dim())?;
            for r in 0..rows {
                m.entries[r * cols + c] = v.get(r);
            }
        }
        Ok(m)
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &ComplexVector, b: &ComplexVector) -> Self {
        let (rows, cols) = (a.dim(), b.dim());
        let mut entries = Vec::with_capacity(rows * cols);
        for x in a.entries() {
            for y in b.entries() {
                entries.push(x * y.conj());
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        ComplexVector {
            entries: (0..self.rows).map(|r| self.get(r, c)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        same_dim(self.cols, other.rows)?;
        let mut out = vec![ZERO; self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                for c in 0..other.cols {
                    out[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            entries: out,
        })
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        same_dim(self.cols, v.dim())?;
        let entries = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v.get(c)).sum())
            .collect();
        Ok(ComplexVector { entries })
    }

    /// `⟨v|M|v⟩`
    pub fn expectation(&self, v: &ComplexVector) -> Result<Complex64> {
        inner_product(v, &self.apply(v)?)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.rows, other.rows)?;
        same_dim(self.cols, other.cols)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Result<Complex64> {
        self.require_square()?;
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// Determinant of a 2×2 matrix.
    pub fn det2(&self) -> Result<Complex64> {
        if self.rows != 2 || self.cols != 2 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: self.rows * self.cols,
            });
        }
        Ok(self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0))
    }

    /// Largest `|m_ij − conj(m_ji)|`.
    pub fn hermitian_defect(&self) -> Result<f64> {
        self.require_square()?;
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        Ok(worst)
    }

    /// `‖M†M − I‖_F`
    pub fn unitarity_residual(&self) -> Result<f64> {
        self.require_square()?;
        let gram = self.adjoint().matmul(self)?;
        Ok(gram.sub(&Self::identity(self.rows)?)?.frobenius_norm())
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

fn require_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    let defect = m.hermitian_defect()?;
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    require_hermitian(m, tol)?;
    let n = m.rows();
    let dm = DMatrix::from_fn(n, n, |r, c| m.get(r, c));
    let mut values: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Positivity via the eigenvalue floor: every eigenvalue `≥ −tol`.
pub fn is_psd_by_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(hermitian_eigenvalues(m, tol)?
        .first()
        .is_none_or(|&lo| lo >= -tol))
}

/// Positivity of a 2×2 Hermitian matrix from its trace and determinant.
///
/// Both eigenvalues are non-negative iff `Tr ≥ 0` and `det ≥ 0`; the
/// determinant bound is scaled by `max(1, |Tr|)` since `det = λ₁λ₂`.
pub fn is_psd_2x2(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    require_hermitian(m, tol)?;
    let tr = m.trace()?.re;
    let det = m.det2()?.re;
    Ok(tr >= -tol && det >= -tol * tr.abs().max(1.0))
}

/// True iff all eigenvalues of the Hermitian matrix `m` are `≥ −tol`.
///
/// 2×2 inputs go through the trace/determinant test, larger ones through a
/// Hermitian eigenvalue decomposition.
pub fn is_positive_semidefinite(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    if m.rows() == 2 && m.cols() == 2 {
        is_psd_2x2(m, tol)
    } else {
        is_psd_by_eigenvalues(m, tol)
    }
}

/// Largest deviation of the Gram matrix of `columns` from the identity.
pub fn orthonormality_defect(columns: &[ComplexVector]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, a) in columns.iter().enumerate() {
        for (j, b) in columns.iter().enumerate().skip(i) {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((inner_product(a, b)? - target).norm());
        }
    }
    Ok(worst)
}

/// [`complete_to_unitary_with_tol`] at [`DEFAULT_TOL`].
pub fn complete_to_unitary(partial_columns: &[ComplexVector]) -> Result<ComplexMatrix> {
    complete_to_unitary_with_tol(partial_columns, DEFAULT_TOL)
}

/// Extends orthonormal columns to a square unitary.
///
/// The first `k` columns of the result are the inputs. The rest come from
/// Gram–Schmidt over the canonical basis in ascending order; a candidate
/// whose residual norm falls below `tol` is skipped.
pub fn complete_to_unitary_with_tol(
    partial_columns: &[ComplexVector],
    tol: f64,
) -> Result<ComplexMatrix> {
    let first = partial_columns
        .first()
        .ok_or_else(|| Error::invalid("partial_columns", "at least one column required"))?;
    let n = first.dim();
    for c in partial_columns {
        same_dim(n, c.dim())?;
    }
    if partial_columns.len() > n {
        return Err(Error::invalid(
            "partial_columns",
            format!("{} columns exceed dimension {n}", partial_columns.len()),
        ));
    }
    let defect = orthonormality_defect(partial_columns)?;
    if defect > tol {
        return Err(Error::NotOrthonormal(defect));
    }

    let mut basis: Vec<ComplexVector> = partial_columns.to_vec();
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut residual = ComplexVector::basis(n, k)?;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let proj = inner_product(q, &residual)?;
                residual = residual.sub(&q.scale(proj))?;
            }
        }
        let norm = residual.norm();
        if norm < tol {
            continue;
        }
        basis.push(residual.scale(Complex64::new(1.0 / norm, 0.0)));
    }
    if basis.len() != n {
        return Err(Error::NotOrthonormal(defect));
    }
    ComplexMatrix::from_columns(&basis)
}
