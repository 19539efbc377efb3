//! Cyclic complex Jacobi eigensolver for Hermitian matrices.

use nalgebra::DMatrix;

use super::{ComplexMatrix, HermitianMatrix, MatrixError, C64};
use crate::tol;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues sorted nonincreasing with a matching orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    frame: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `lambda_1 >= lambda_2 >= ...`
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Index reversal of [`Self::eigenvalues`].
    pub fn ascending(&self) -> Vec<f64> {
        self.eigenvalues.iter().rev().copied().collect()
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty")
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `frame * diag(values) * frame*` for arbitrary real values.
    pub fn synthesize(&self, values: &[f64]) -> HermitianMatrix {
        debug_assert_eq!(values.len(), self.dim());
        let f = self.frame.as_dmatrix();
        let mut scaled = f.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::from_dmatrix_symmetrized(scaled * f.adjoint())
    }

    /// `frame * diag(phases) * frame*` with complex diagonal entries.
    pub(crate) fn synthesize_complex(&self, values: &[C64]) -> ComplexMatrix {
        let f = self.frame.as_dmatrix();
        let mut scaled = f.clone();
        for (j, &v) in values.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= v;
            }
        }
        ComplexMatrix::from_dmatrix(scaled * f.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.synthesize(&self.eigenvalues)
    }
}

/// Full eigendecomposition of `h`.
///
/// Eigenvalues within `TIE_TOL` of each other are ordered by the index of
/// the largest-modulus component of their eigenvector; every eigenvector is
/// rescaled so that component is real positive.
pub fn spectral_decomposition(h: &HermitianMatrix) -> Result<SpectralDecomposition, MatrixError> {
    let (values, vectors) = jacobi(h.as_dmatrix(), true)?;
    let vectors = vectors.expect("vectors requested");
    let n = values.len();

    let mut cols: Vec<(f64, usize, usize)> = (0..n)
        .map(|j| (values[j], j, pivot_index(&vectors, j)))
        .collect();
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));

    let spread = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tie = tol::TIE_TOL * (1.0 + spread);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cols[end - 1].0 - cols[end].0 <= tie {
            end += 1;
        }
        cols[start..end].sort_by_key(|c| c.2);
        start = end;
    }

    let mut frame = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (dst, &(value, src, pivot)) in cols.iter().enumerate() {
        let p = vectors[(pivot, src)];
        let phase = if p.norm() > 0.0 { p.conj() / p.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            frame[(i, dst)] = vectors[(i, src)] * phase;
        }
        eigenvalues.push(value);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        frame: ComplexMatrix::from_dmatrix(frame),
    })
}

/// Eigenvalues only, nonincreasing.
pub fn eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>, MatrixError> {
    let (mut values, _) = jacobi(h.as_dmatrix(), false)?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn pivot_index(v: &DMatrix<C64>, col: usize) -> usize {
    let n = v.nrows();
    let max = (0..n).fold(0.0f64, |m, i| m.max(v[(i, col)].norm()));
    (0..n)
        .find(|&i| v[(i, col)].norm() >= max - 1e-12)
        .unwrap_or(0)
}

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(
    h: &DMatrix<C64>,
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<DMatrix<C64>>), MatrixError> {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = want_vectors.then(|| DMatrix::<C64>::identity(n, n));
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let norm = a.norm();
    let threshold = f64::EPSILON * 0.5 * norm;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold || norm == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(MatrixError::NoConvergence { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                rotate(&mut a, v.as_mut(), p, q);
            }
        }
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((values, v))
}

/// Annihilates `a[p][q]` with the unitary `G = [[c, s e], [-s conj(e), c]]`
/// acting on coordinates `(p, q)`: `a <- G* a G`, `v <- v G`.
fn rotate(a: &mut DMatrix<C64>, v: Option<&mut DMatrix<C64>>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let e = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let se = e * s;
    let sec = se.conj();

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * sec;
        a[(k, q)] = akp * se + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * se;
        a[(q, k)] = apk * sec + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    if let Some(v) = v {
        for k in 0..n {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)];
            v[(k, p)] = vkp * c - vkq * sec;
            v[(k, q)] = vkp * se + vkq * c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn herm(rows: &[&[f64]]) -> HermitianMatrix {
        HermitianMatrix::new(ComplexMatrix::from_real_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_input_is_its_own_decomposition() {
        let d = spectral_decomposition(&HermitianMatrix::from_real_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(d.eigenvalues(), &[3.0, 1.0]);
        assert_eq!(d.frame(), &ComplexMatrix::identity(2));
    }

    #[test]
    fn swap_matrix() {
        let d = spectral_decomposition(&herm(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.eigenvalues()[0] - 1.0).abs() < 1e-15);
        assert!((d.eigenvalues()[1] + 1.0).abs() < 1e-15);
        let f = d.frame();
        let expect = [[r, r], [r, -r]];
        for (i, row) in expect.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert!((f.get(i, j) - C64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn complex_entries_reconstruct() {
        let m = ComplexMatrix::from_row_major(
            3,
            3,
            &[
                C64::new(2.0, 0.0),
                C64::new(1.0, 2.0),
                C64::new(0.0, -1.0),
                C64::new(1.0, -2.0),
                C64::new(-1.0, 0.0),
                C64::new(0.5, 0.5),
                C64::new(0.0, 1.0),
                C64::new(0.5, -0.5),
                C64::new(4.0, 0.0),
            ],
        )
        .unwrap();
        let h = HermitianMatrix::new(m).unwrap();
        let d = spectral_decomposition(&h).unwrap();
        assert!(d.frame().orthonormality_defect() < 1e-14);
        let r = d.reconstruct().sub(&h).unwrap().max_abs();
        assert!(r < 1e-13, "residual {r}");
        assert!(d.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn repeated_eigenvalues_are_deterministic() {
        let h = HermitianMatrix::identity(3);
        let a = spectral_decomposition(&h).unwrap();
        let b = spectral_decomposition(&h).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.frame(), &ComplexMatrix::identity(3));

        // Tied pair ordered by pivot index, phase-normalized.
        let h = HermitianMatrix::from_real_diagonal(&[1.0, 5.0, 1.0]);
        let d = spectral_decomposition(&h).unwrap();
        assert_eq!(d.eigenvalues(), &[5.0, 1.0, 1.0]);
        assert_eq!(d.frame().get(1, 0), C64::new(1.0, 0.0));
        assert_eq!(d.frame().get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(d.frame().get(2, 2), C64::new(1.0, 0.0));
    }

    #[test]
    fn eigenvalues_only_agrees_with_full() {
        let h = herm(&[&[1.0, 2.0, 3.0], &[2.0, -4.0, 0.5], &[3.0, 0.5, 0.0]]);
        let full = spectral_decomposition(&h).unwrap();
        let only = eigenvalues(&h).unwrap();
        for (x, y) in full.eigenvalues().iter().zip(&only) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_matrix() {
        let d = spectral_decomposition(&HermitianMatrix::zeros(2)).unwrap();
        assert_eq!(d.eigenvalues(), &[0.0, 0.0]);
    }
}
