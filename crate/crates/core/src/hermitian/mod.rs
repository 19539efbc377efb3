//! Validated complex matrices and the spectral calculus built on them.
//!
//! [`ComplexMatrix`] is any finite dense matrix, [`HermitianMatrix`] is
//! stored exactly symmetrized, and [`PsdMatrix`] additionally records the
//! minimal eigenvalue found when it was validated. All three are immutable
//! once built.

mod calculus;
pub mod cmat;
mod eigen;
pub mod json;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::tol;

pub use calculus::{
    apply_spectral_function, matrix_abs_power, psd_gap, psd_power, schatten_norm,
    singular_values, trace_abs_power,
};
pub use eigen::{eigenvalues, spectral_decomposition, SpectralDecomposition};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("expected {expected} entries, got {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("dimension {dim} is below the minimum {min}")]
    TooSmall { dim: usize, min: usize },
    #[error("dimension {dim} is not even")]
    OddDimension { dim: usize },
    #[error("not Hermitian: deviation {deviation:e} exceeds {allowed:e}")]
    NotHermitian { deviation: f64, allowed: f64 },
    #[error("not positive semidefinite: min eigenvalue {min_eig:e} below {allowed:e}")]
    NotPsd { min_eig: f64, allowed: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("spectral function is not finite at eigenvalue {eigenvalue:e} (value {value})")]
    Domain { eigenvalue: f64, value: f64 },
    #[error("invalid exponent {exponent}: {reason}")]
    Exponent { exponent: f64, reason: &'static str },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self, MatrixError> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(MatrixError::Empty);
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(MatrixError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self, MatrixError> {
        if entries.len() != rows * cols {
            return Err(MatrixError::EntryCount {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let entries: Vec<C64> = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::from_row_major(r, c, &entries)
    }

    pub(crate) fn from_dmatrix(m: DMatrix<C64>) -> Self {
        debug_assert!(m.nrows() > 0 && m.ncols() > 0);
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values)))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        same_shape(self.shape(), other.shape())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        same_shape(self.shape(), other.shape())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols() != other.rows() {
            return Err(MatrixError::DimensionMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self(&self.0 * &other.0))
    }

    /// `A* A`, built without any eigendecomposition.
    pub fn gram(&self) -> HermitianMatrix {
        HermitianMatrix::from_dmatrix_symmetrized(self.0.adjoint() * &self.0)
    }

    /// `T H T*` for a Hermitian `H` whose dimension matches `T`'s columns.
    pub fn conjugate(&self, h: &HermitianMatrix) -> Result<HermitianMatrix, MatrixError> {
        if self.cols() != h.dim() {
            return Err(MatrixError::DimensionMismatch {
                left: self.shape(),
                right: (h.dim(), h.dim()),
            });
        }
        Ok(HermitianMatrix::from_dmatrix_symmetrized(
            &self.0 * h.as_dmatrix() * self.0.adjoint(),
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        singular_values(self).first().copied().unwrap_or(0.0)
    }

    /// `max |(T* T - I)_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.0.adjoint() * &self.0;
        let n = g.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.orthonormality_defect() <= tol
    }

    pub fn is_isometry(&self, tol: f64) -> bool {
        self.rows() > self.cols() && self.orthonormality_defect() <= tol
    }

    /// The `2n x 2n` block diagonal matrix `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (r1, c1) = self.shape();
        let (r2, c2) = other.shape();
        let mut m = DMatrix::zeros(r1 + r2, c1 + c2);
        m.view_mut((0, 0), (r1, c1)).copy_from(&self.0);
        m.view_mut((r1, c1), (r2, c2)).copy_from(&other.0);
        Self(m)
    }

    /// Columns `start..start + count`.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        Self(self.0.columns(start, count).into_owned())
    }

    pub fn commutator_norm(&self, other: &Self) -> Result<f64, MatrixError> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        Ok(ab.sub(&ba)?.max_abs())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

/// Hermitian matrix, stored exactly symmetrized.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Validates `|h_ij - conj(h_ji)| <= HERMITIAN_TOL * (1 + max |h_ij|)`
    /// and stores the symmetrized matrix.
    pub fn new(m: ComplexMatrix) -> Result<Self, MatrixError> {
        if !m.is_square() {
            return Err(MatrixError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let mut deviation = 0.0f64;
        for i in 0..n {
            for j in i..n {
                deviation = deviation.max((m.get(i, j) - m.get(j, i).conj()).norm());
            }
        }
        let allowed = tol::HERMITIAN_TOL * (1.0 + m.max_abs());
        if deviation > allowed {
            return Err(MatrixError::NotHermitian { deviation, allowed });
        }
        Ok(Self::from_dmatrix_symmetrized(m.into_dmatrix()))
    }

    pub(crate) fn from_dmatrix_symmetrized(m: DMatrix<C64>) -> Self {
        let half = C64::new(0.5, 0.0);
        let sym = (&m + m.adjoint()) * half;
        Self(sym)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let d: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self(ComplexMatrix::diagonal(&d).into_dmatrix())
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix(self.0.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MatrixError> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::from_dmatrix_symmetrized(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        same_dim(self.dim(), other.dim())?;
        Ok(Self::from_dmatrix_symmetrized(&self.0 - &other.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * C64::new(s, 0.0))
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self(self.to_complex().direct_sum(&other.to_complex()).into_dmatrix())
    }

    /// `H ⊕ 0_k`.
    pub fn pad_zeros(&self, k: usize) -> Self {
        self.direct_sum(&Self::zeros(k))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest eigenvalue in absolute value.
    pub fn spectral_norm(&self) -> f64 {
        match eigenvalues(self) {
            Ok(ev) => ev.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Err(_) => self.0.norm(),
        }
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.0)
    }
}

/// Positive semidefinite matrix with the minimal eigenvalue seen at
/// validation time.
#[derive(Clone, PartialEq, Debug)]
pub struct PsdMatrix {
    matrix: HermitianMatrix,
    min_eig: f64,
}

impl PsdMatrix {
    /// Accepts `H` when `lambda_min(H) >= -PSD_TOL * (1 + ||H||_2)`.
    pub fn new(h: HermitianMatrix) -> Result<Self, MatrixError> {
        let ev = eigenvalues(&h)?;
        let min_eig = *ev.last().expect("non-empty spectrum");
        let norm = ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let allowed = -tol::PSD_TOL * (1.0 + norm);
        if min_eig < allowed {
            return Err(MatrixError::NotPsd { min_eig, allowed });
        }
        Ok(Self { matrix: h, min_eig })
    }

    pub(crate) fn from_parts(matrix: HermitianMatrix, min_eig: f64) -> Self {
        Self { matrix, min_eig }
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.matrix
    }

    pub fn min_eig(&self) -> f64 {
        self.min_eig
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

impl AsRef<HermitianMatrix> for PsdMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        &self.matrix
    }
}

fn same_shape(a: (usize, usize), b: (usize, usize)) -> Result<(), MatrixError> {
    if a != b {
        return Err(MatrixError::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

fn same_dim(a: usize, b: usize) -> Result<(), MatrixError> {
    same_shape((a, a), (b, b))
}

pub(crate) fn require_square(a: &ComplexMatrix) -> Result<usize, MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(a.rows())
}

/// Both square with a common dimension.
pub(crate) fn require_square_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize, MatrixError> {
    let n = require_square(a)?;
    require_square(b)?;
    same_shape(a.shape(), b.shape())?;
    Ok(n)
}
