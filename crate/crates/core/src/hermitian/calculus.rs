//! Matrix functions, Schatten norms and PSD gaps.

use super::eigen::{eigenvalues, spectral_decomposition};
use super::{require_square, ComplexMatrix, HermitianMatrix, MatrixError, PsdMatrix};

/// `g(P) = frame * diag(g(lambda)) * frame*`.
///
/// Eigenvalues are clamped at zero before `g` is applied, since `g` is only
/// required to be defined on `[0, inf)`.
pub fn apply_spectral_function(
    p: &PsdMatrix,
    g: &dyn Fn(f64) -> f64,
) -> Result<HermitianMatrix, MatrixError> {
    let d = spectral_decomposition(p.hermitian())?;
    let mut values = Vec::with_capacity(d.dim());
    for &lambda in d.eigenvalues() {
        let x = lambda.max(0.0);
        let y = g(x);
        if !y.is_finite() {
            return Err(MatrixError::Domain { eigenvalue: x, value: y });
        }
        values.push(y);
    }
    Ok(d.synthesize(&values))
}

/// `P^e` for a PSD `P` and `e > 0`, returned as a PSD matrix.
pub fn psd_power(p: &PsdMatrix, e: f64) -> Result<PsdMatrix, MatrixError> {
    check_positive(e)?;
    let d = spectral_decomposition(p.hermitian())?;
    let values: Vec<f64> = d.eigenvalues().iter().map(|&l| l.max(0.0).powf(e)).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PsdMatrix::from_parts(d.synthesize(&values), min))
}

/// `|A|^p = (A* A)^{p/2}`. For `p == 2` this is exactly `A* A`.
pub fn matrix_abs_power(a: &ComplexMatrix, p: f64) -> Result<PsdMatrix, MatrixError> {
    require_square(a)?;
    check_positive(p)?;
    let gram = a.gram();
    if p == 2.0 {
        let min = eigenvalues(&gram)?.last().copied().unwrap_or(0.0);
        return Ok(PsdMatrix::from_parts(gram, min));
    }
    psd_power(&PsdMatrix::from_parts(gram, 0.0), p / 2.0)
}

/// Singular values, nonincreasing, as square roots of the eigenvalues of
/// `A* A` (clamped at zero).
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let gram = a.gram();
    eigenvalues(&gram)
        .map(|ev| ev.into_iter().map(|l| l.max(0.0).sqrt()).collect())
        .unwrap_or_else(|_| vec![f64::NAN; a.cols()])
}

/// `Tr |A|^p = sum_j sigma_j^p`, defined for every `p > 0`.
pub fn trace_abs_power(a: &ComplexMatrix, p: f64) -> Result<f64, MatrixError> {
    check_positive(p)?;
    Ok(singular_values(a).iter().map(|s| s.powf(p)).sum())
}

/// Schatten p-norm `(sum_j sigma_j^p)^{1/p}` for `p >= 1`.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64, MatrixError> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(MatrixError::Exponent {
            exponent: p,
            reason: "Schatten norm requires p >= 1",
        });
    }
    Ok(trace_abs_power(a, p)?.powf(1.0 / p))
}

/// `lambda_min(R - L)`; `L <= R` holds iff this is nonnegative.
pub fn psd_gap(l: &HermitianMatrix, r: &HermitianMatrix) -> Result<f64, MatrixError> {
    let d = r.sub(l)?;
    Ok(*eigenvalues(&d)?.last().expect("non-empty"))
}

fn check_positive(p: f64) -> Result<(), MatrixError> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(MatrixError::Exponent {
            exponent: p,
            reason: "exponent must be positive and finite",
        });
    }
    Ok(())
}
