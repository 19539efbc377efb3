//! Exact certificate constructions: eigen-alignment unitaries, the positive
//! block decomposition, the isometry parallelogram law, and the compositions
//! built from them.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checks::{cartesian_parts, CheckError};
use crate::hermitian::json::MatrixJson;
use crate::hermitian::{
    apply_spectral_function, eigenvalues, matrix_abs_power, psd_power, require_square_pair,
    spectral_decomposition, ComplexMatrix, HermitianMatrix, MatrixError, PsdMatrix, C64,
};
use crate::search::SearchTrace;
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("eigenvalue dominance violated at ranks {violations:?} (rank, lambda_S, lambda_T)")]
    Dominance { violations: Vec<(usize, f64, f64)> },
    #[error("exponent {exponent} outside the admissible regime {regime}")]
    Regime { exponent: f64, regime: &'static str },
    #[error("construction residual {residual:e} exceeds {allowed:e}")]
    Residual { residual: f64, allowed: f64 },
    #[error("inputs do not commute (commutator {commutator:e}); a search-backed provider is required")]
    NotCommuting { commutator: f64 },
    #[error("certificate search did not converge: best gap {}", trace.final_gap)]
    NotConverged { trace: Box<SearchTrace> },
    #[error("invalid search configuration: {0}")]
    Config(String),
}

impl From<CheckError> for CertError {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Matrix(m) => CertError::Matrix(m),
            CheckError::Regime { exponent, regime } => CertError::Regime { exponent, regime },
            other => CertError::Matrix(MatrixError::Io(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Unitary,
    Isometry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub kind: TransformKind,
    pub matrix: ComplexMatrix,
}

impl Transform {
    pub fn new(matrix: ComplexMatrix) -> Self {
        let kind = if matrix.is_square() {
            TransformKind::Unitary
        } else {
            TransformKind::Isometry
        };
        Self { kind, matrix }
    }

    /// Shape matches the kind and `||T* T - I||_max <= ORTHO_TOL`.
    pub fn is_valid(&self) -> bool {
        match self.kind {
            TransformKind::Unitary => self.matrix.is_unitary(tol::ORTHO_TOL),
            TransformKind::Isometry => self.matrix.is_isometry(tol::ORTHO_TOL),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LhsLeRhs,
    LhsGeRhs,
    Equality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lhs,
    Rhs,
}

/// A witnessed operator inequality. The transformed side equals
/// `sum_i T_i S_i T_i*` over `transforms` and `terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub statement: String,
    pub transforms: Vec<Transform>,
    pub terms: Vec<HermitianMatrix>,
    pub transformed_side: Side,
    pub direction: Direction,
    pub lhs: HermitianMatrix,
    pub rhs: HermitianMatrix,
    /// `lambda_min` of (larger side - smaller side); for equalities, minus
    /// the largest entry-wise deviation.
    pub gap_min_eig: f64,
    pub tol_used: f64,
}

/// Outcome of independently re-verifying a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub transforms_valid: bool,
    pub worst_orthonormality: f64,
    pub reconstruction_residual: f64,
    pub recomputed_gap: f64,
    pub scale: f64,
    pub gap_ok: bool,
    pub valid: bool,
}

pub fn transformed_sum(
    transforms: &[Transform],
    terms: &[HermitianMatrix],
) -> Result<HermitianMatrix, MatrixError> {
    let mut acc: Option<HermitianMatrix> = None;
    for (t, s) in transforms.iter().zip(terms) {
        let x = t.matrix.conjugate(s)?;
        acc = Some(match acc {
            None => x,
            Some(a) => a.add(&x)?,
        });
    }
    acc.ok_or(MatrixError::Empty)
}

fn gap_of(direction: Direction, lhs: &HermitianMatrix, rhs: &HermitianMatrix) -> Result<f64, MatrixError> {
    let d = match direction {
        Direction::LhsLeRhs => rhs.sub(lhs)?,
        Direction::LhsGeRhs => lhs.sub(rhs)?,
        Direction::Equality => return Ok(-rhs.sub(lhs)?.max_abs()),
    };
    Ok(*eigenvalues(&d)?.last().expect("non-empty"))
}

impl Certificate {
    /// Builds the transformed side and measures the gap.
    pub fn assemble(
        statement: &str,
        direction: Direction,
        transforms: Vec<Transform>,
        terms: Vec<HermitianMatrix>,
        transformed_side: Side,
        fixed: HermitianMatrix,
        tol_used: f64,
    ) -> Result<Self, MatrixError> {
        let moving = transformed_sum(&transforms, &terms)?;
        let (lhs, rhs) = match transformed_side {
            Side::Lhs => (moving, fixed),
            Side::Rhs => (fixed, moving),
        };
        let gap_min_eig = gap_of(direction, &lhs, &rhs)?;
        Ok(Self {
            statement: statement.to_string(),
            transforms,
            terms,
            transformed_side,
            direction,
            lhs,
            rhs,
            gap_min_eig,
            tol_used,
        })
    }

    pub fn dim(&self) -> usize {
        self.lhs.dim()
    }

    /// `1 + max(||lhs||_2, ||rhs||_2)`.
    pub fn scale(&self) -> f64 {
        1.0 + self.lhs.spectral_norm().max(self.rhs.spectral_norm())
    }

    pub fn holds(&self) -> bool {
        self.gap_min_eig >= -self.tol_used * self.scale()
    }

    /// Recomputes every quantity from the transforms and terms alone.
    pub fn verify(&self) -> Verification {
        let worst_orthonormality = self
            .transforms
            .iter()
            .map(|t| t.matrix.orthonormality_defect())
            .fold(0.0f64, f64::max);
        let transforms_valid =
            !self.transforms.is_empty() && self.transforms.iter().all(Transform::is_valid);
        let stored = match self.transformed_side {
            Side::Lhs => &self.lhs,
            Side::Rhs => &self.rhs,
        };
        let reconstruction_residual = transformed_sum(&self.transforms, &self.terms)
            .and_then(|m| Ok(m.sub(stored)?.max_abs()))
            .unwrap_or(f64::INFINITY);
        let recomputed_gap = gap_of(self.direction, &self.lhs, &self.rhs).unwrap_or(f64::NEG_INFINITY);
        let scale = self.scale();
        let gap_ok = recomputed_gap >= -self.tol_used * scale
            && (recomputed_gap - self.gap_min_eig).abs() <= tol::IDENTITY_TOL * scale;
        let valid = transforms_valid
            && self.terms.len() == self.transforms.len()
            && reconstruction_residual <= tol::RECON_TOL * scale
            && gap_ok;
        Verification {
            transforms_valid,
            worst_orthonormality,
            reconstruction_residual,
            recomputed_gap,
            scale,
            gap_ok,
            valid,
        }
    }

    /// The same inequality read from the other side: `lhs` and `rhs` swap
    /// and the direction flips; the gap is unchanged.
    pub(crate) fn flipped(mut self, statement: &str) -> Self {
        std::mem::swap(&mut self.lhs, &mut self.rhs);
        self.transformed_side = match self.transformed_side {
            Side::Lhs => Side::Rhs,
            Side::Rhs => Side::Lhs,
        };
        self.direction = match self.direction {
            Direction::LhsLeRhs => Direction::LhsGeRhs,
            Direction::LhsGeRhs => Direction::LhsLeRhs,
            Direction::Equality => Direction::Equality,
        };
        self.statement = statement.to_string();
        self
    }

    /// Unitarily conjugates every transform from the left by `j`, i.e.
    /// replaces `T_i` with `j T_i`; the fixed side is replaced by `fixed`.
    fn rotated(&self, j: &ComplexMatrix, fixed: HermitianMatrix, statement: &str) -> Result<Self, MatrixError> {
        let transforms = self
            .transforms
            .iter()
            .map(|t| Ok(Transform::new(j.mul(&t.matrix)?)))
            .collect::<Result<Vec<_>, MatrixError>>()?;
        Self::assemble(
            statement,
            self.direction,
            transforms,
            self.terms.clone(),
            self.transformed_side,
            fixed,
            self.tol_used,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TransformJson {
    kind: TransformKind,
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    statement: String,
    direction: Direction,
    gap_min_eig: f64,
    tol_used: f64,
    transforms: Vec<TransformJson>,
    transformed_side: Side,
    terms: Vec<MatrixJson>,
    lhs: MatrixJson,
    rhs: MatrixJson,
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CertificateJson {
            statement: self.statement.clone(),
            direction: self.direction,
            gap_min_eig: self.gap_min_eig,
            tol_used: self.tol_used,
            transforms: self
                .transforms
                .iter()
                .map(|t| {
                    let m = MatrixJson::from(&t.matrix);
                    TransformJson {
                        kind: t.kind,
                        rows: m.rows,
                        cols: m.cols,
                        entries: m.entries,
                    }
                })
                .collect(),
            transformed_side: self.transformed_side,
            terms: self.terms.iter().map(MatrixJson::from).collect(),
            lhs: MatrixJson::from(&self.lhs),
            rhs: MatrixJson::from(&self.rhs),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = CertificateJson::deserialize(d)?;
        let herm = |m: &MatrixJson| HermitianMatrix::try_from(m).map_err(D::Error::custom);
        let transforms = j
            .transforms
            .iter()
            .map(|t| {
                let m = MatrixJson {
                    rows: t.rows,
                    cols: t.cols,
                    entries: t.entries.clone(),
                };
                ComplexMatrix::try_from(&m)
                    .map(|matrix| Transform { kind: t.kind, matrix })
                    .map_err(D::Error::custom)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Certificate {
            statement: j.statement,
            transforms,
            terms: j.terms.iter().map(herm).collect::<Result<_, _>>()?,
            transformed_side: j.transformed_side,
            direction: j.direction,
            lhs: herm(&j.lhs)?,
            rhs: herm(&j.rhs)?,
            gap_min_eig: j.gap_min_eig,
            tol_used: j.tol_used,
        })
    }
}

/// A unitary `W = frame(T) frame(S)*` with `W S W* <= T`.
///
/// Requires `lambda_j(S) <= lambda_j(T) + ALIGN_SLACK * scale` for every rank
/// `j` (nonincreasing order); then `T - W S W*` shares the frame of `T` with
/// eigenvalues `lambda_j(T) - lambda_j(S)`.
pub fn align_unitary(s: &HermitianMatrix, t: &HermitianMatrix) -> Result<ComplexMatrix, CertError> {
    let ds = spectral_decomposition(s)?;
    let dt = spectral_decomposition(t)?;
    if ds.dim() != dt.dim() {
        return Err(MatrixError::DimensionMismatch {
            left: (ds.dim(), ds.dim()),
            right: (dt.dim(), dt.dim()),
        }
        .into());
    }
    let scale = 1.0
        + ds.eigenvalues()
            .iter()
            .chain(dt.eigenvalues())
            .fold(0.0f64, |m, x| m.max(x.abs()));
    let violations: Vec<(usize, f64, f64)> = ds
        .eigenvalues()
        .iter()
        .zip(dt.eigenvalues())
        .enumerate()
        .filter(|(_, (ls, lt))| **ls > **lt + tol::ALIGN_SLACK * scale)
        .map(|(j, (&ls, &lt))| (j + 1, ls, lt))
        .collect();
    if !violations.is_empty() {
        return Err(CertError::Dominance { violations });
    }
    Ok(frame_map(&ds, &dt))
}

/// `frame(T) frame(S)*` with no dominance requirement.
pub(crate) fn frame_map(
    from: &crate::hermitian::SpectralDecomposition,
    to: &crate::hermitian::SpectralDecomposition,
) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(to.frame().as_dmatrix() * from.frame().as_dmatrix().adjoint())
}

pub(crate) fn herm_fn(h: &HermitianMatrix, g: &dyn Fn(f64) -> f64) -> Result<HermitianMatrix, MatrixError> {
    apply_spectral_function(&PsdMatrix::from_parts(h.clone(), 0.0), g)
}

/// Certificate for `(g(X) + g(Y))/2 >= W g((X+Y)/2) W*` (convex `g`) or the
/// reversed inequality (concave `g`).
pub fn key2_certificate(
    x: &PsdMatrix,
    y: &PsdMatrix,
    g: &dyn Fn(f64) -> f64,
    convex: bool,
) -> Result<Certificate, CertError> {
    let mean_of_g = apply_spectral_function(x, g)?
        .add(&apply_spectral_function(y, g)?)?
        .scale(0.5);
    let g_of_mean = herm_fn(&x.hermitian().add(y.hermitian())?.scale(0.5), g)?;
    let w = key2_unitary(&g_of_mean, &mean_of_g, convex)?;
    let direction = if convex { Direction::LhsGeRhs } else { Direction::LhsLeRhs };
    Ok(Certificate::assemble(
        "key2",
        direction,
        vec![Transform::new(w)],
        vec![g_of_mean],
        Side::Rhs,
        mean_of_g,
        tol::PSD_TOL,
    )?)
}

/// `W` with `W g_mean W* <= mean_g` (convex) or `mean_g <= W g_mean W*`
/// (concave).
fn key2_unitary(
    g_of_mean: &HermitianMatrix,
    mean_of_g: &HermitianMatrix,
    convex: bool,
) -> Result<ComplexMatrix, CertError> {
    if convex {
        align_unitary(g_of_mean, mean_of_g)
    } else {
        Ok(align_unitary(mean_of_g, g_of_mean)?.adjoint())
    }
}

/// Unitaries `U, V` (both `2n x 2n`) with
/// `H = U (X ⊕ 0) U* + V (0 ⊕ Z) V*` for a PSD `H = [[X, Y], [Y*, Z]]`.
pub fn block_decomposition(h: &PsdMatrix) -> Result<(ComplexMatrix, ComplexMatrix), CertError> {
    let dim = h.dim();
    if !dim.is_multiple_of(2) {
        return Err(MatrixError::OddDimension { dim }.into());
    }
    let n = dim / 2;
    let root = psd_power(h, 0.5)?.into_hermitian().to_complex();
    let e = root.columns(0, n);
    let f = root.columns(n, n);
    let ee = e.adjoint().gram();
    let ff = f.adjoint().gram();

    let full = h.hermitian().to_complex();
    let x = block(&full, 0, n);
    let z = block(&full, n, n);
    let x_pad = x.pad_zeros(n);
    let z_pad = HermitianMatrix::zeros(n).direct_sum(&z);

    let u = frame_map(&spectral_decomposition(&x_pad)?, &spectral_decomposition(&ee)?);
    let v = frame_map(&spectral_decomposition(&z_pad)?, &spectral_decomposition(&ff)?);

    let rebuilt = u.conjugate(&x_pad)?.add(&v.conjugate(&z_pad)?)?;
    let residual = rebuilt.sub(h.hermitian())?.max_abs();
    let allowed = tol::RECON_TOL * (1.0 + h.hermitian().spectral_norm());
    if residual > allowed {
        return Err(CertError::Residual { residual, allowed });
    }
    Ok((u, v))
}

fn block(m: &ComplexMatrix, start: usize, n: usize) -> HermitianMatrix {
    HermitianMatrix::from_dmatrix_symmetrized(m.as_dmatrix().view((start, start), (n, n)).into_owned())
}

/// `W = (1/sqrt 2) [[I, I], [I, -I]]`.
fn hadamard_block(n: usize) -> ComplexMatrix {
    let mut m = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    for i in 0..n {
        m[(i, i)] = r;
        m[(i, n + i)] = r;
        m[(n + i, i)] = r;
        m[(n + i, n + i)] = -r;
    }
    ComplexMatrix::from_dmatrix(m)
}

/// Canonical embedding of the `which`-th `n`-dimensional coordinate block
/// into `C^{2n}`.
pub fn block_embedding(n: usize, which: usize) -> ComplexMatrix {
    ComplexMatrix::identity(2 * n).columns(which * n, n)
}

/// Equality certificate for
/// `|A+B|^2 ⊕ |A-B|^2 = U (|A|^2+|B|^2) U* + V (|A|^2+|B|^2) V*`
/// with `U, V` isometries `2n x n`.
pub fn parallelogram_isometries(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Certificate, CertError> {
    let n = require_square_pair(a, b)?;
    let stacked = a.direct_sum(a).add(&b_swap(b))?;
    let h = PsdMatrix::new(stacked.gram())?;
    let (u_full, v_full) = block_decomposition(&h)?;
    let w = hadamard_block(n);
    let u = w.mul(&u_full)?.mul(&block_embedding(n, 0))?;
    let v = w.mul(&v_full)?.mul(&block_embedding(n, 1))?;
    let p = a.gram().add(&b.gram())?;
    let lhs = a.add(b)?.gram().direct_sum(&a.sub(b)?.gram());
    let cert = Certificate::assemble(
        "theorem3",
        Direction::Equality,
        vec![Transform::new(u), Transform::new(v)],
        vec![p.clone(), p],
        Side::Rhs,
        lhs,
        tol::IDENTITY_TOL,
    )?;
    if !cert.holds() {
        return Err(CertError::Residual {
            residual: -cert.gap_min_eig,
            allowed: cert.tol_used * cert.scale(),
        });
    }
    Ok(cert)
}

/// `[[0, B], [B, 0]]`.
fn b_swap(b: &ComplexMatrix) -> ComplexMatrix {
    let n = b.rows();
    let mut m = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, n), (n, n)).copy_from(b.as_dmatrix());
    m.view_mut((n, 0), (n, n)).copy_from(b.as_dmatrix());
    ComplexMatrix::from_dmatrix(m)
}

/// Unitaries witnessing `g(X+Y) >= U0 g(X) U0* + V0 g(Y) V0*` (convex, `g(0) <= 0`)
/// or the reversed inequality (concave, `g(0) >= 0`).
#[derive(Debug, Clone)]
pub struct Key1Witness {
    pub u0: ComplexMatrix,
    pub v0: ComplexMatrix,
    /// `lambda_min` of (larger side - smaller side).
    pub gap: f64,
    pub trace: Option<SearchTrace>,
}

/// Supplies the superadditivity step. Implementations must be stateless or
/// internally synchronized.
pub trait Key1Provider: Sync {
    fn provide(
        &self,
        x: &PsdMatrix,
        y: &PsdMatrix,
        g: &(dyn Fn(f64) -> f64 + Sync),
        convex: bool,
    ) -> Result<Key1Witness, CertError>;
}

/// Exact provider for simultaneously diagonalizable inputs only.
#[derive(Debug, Clone, Copy, Default)]
pub struct CommutingKey1;

impl Key1Provider for CommutingKey1 {
    fn provide(
        &self,
        x: &PsdMatrix,
        y: &PsdMatrix,
        g: &(dyn Fn(f64) -> f64 + Sync),
        convex: bool,
    ) -> Result<Key1Witness, CertError> {
        match commuting_key1(x, y, g, convex)? {
            Ok(w) => Ok(w),
            Err(commutator) => Err(CertError::NotCommuting { commutator }),
        }
    }
}

/// Fast path: if `||XY - YX||_max <= COMMUTE_TOL * (1 + max ||.||)^2`, the
/// common eigenframe already diagonalizes all three of `g(X+Y)`, `g(X)`,
/// `g(Y)`, so `U0 = V0 = I` and the gap follows from scalar
/// super/sub-additivity. Returns `Err(commutator)` otherwise.
pub fn commuting_key1(
    x: &PsdMatrix,
    y: &PsdMatrix,
    g: &dyn Fn(f64) -> f64,
    convex: bool,
) -> Result<Result<Key1Witness, f64>, CertError> {
    let xm = x.hermitian().to_complex();
    let ym = y.hermitian().to_complex();
    let commutator = xm.commutator_norm(&ym)?;
    let scale = 1.0 + x.hermitian().spectral_norm().max(y.hermitian().spectral_norm());
    if commutator > tol::COMMUTE_TOL * scale * scale {
        return Ok(Err(commutator));
    }
    let bound = herm_fn(&x.hermitian().add(y.hermitian())?, g)?;
    let sum = apply_spectral_function(x, g)?.add(&apply_spectral_function(y, g)?)?;
    let gap = if convex {
        crate::hermitian::psd_gap(&sum, &bound)?
    } else {
        crate::hermitian::psd_gap(&bound, &sum)?
    };
    let n = x.dim();
    Ok(Ok(Key1Witness {
        u0: ComplexMatrix::identity(n),
        v0: ComplexMatrix::identity(n),
        gap,
        trace: None,
    }))
}

/// Composite orbit certificate with `g(t) = t^{e/2}`:
/// convex `U P U* + V Q V* <= M` or concave `U P U* + V Q V* >= M`,
/// with `U = W U0`, `V = W V0`.
pub(crate) fn orbit_composite(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    exponent: f64,
    provider: &dyn Key1Provider,
    convex: bool,
    statement: &str,
) -> Result<(Certificate, Option<SearchTrace>), CertError> {
    require_square_pair(a, b)?;
    let half = exponent / 2.0;
    let g = move |t: f64| t.powf(half);

    let abs_a2 = PsdMatrix::new(a.gram())?;
    let abs_b2 = PsdMatrix::new(b.gram())?;
    let m = matrix_abs_power(a, exponent)?
        .hermitian()
        .add(matrix_abs_power(b, exponent)?.hermitian())?
        .scale(0.5);
    let n_mid = abs_a2.hermitian().add(abs_b2.hermitian())?.scale(0.5);
    let w = key2_unitary(&herm_fn(&n_mid, &g)?, &m, convex)?;

    let sum = a.add(b)?.scale_real(0.5);
    let diff = a.sub(b)?.scale_real(0.5);
    let x = PsdMatrix::new(sum.gram())?;
    let y = PsdMatrix::new(diff.gram())?;
    let witness = provider.provide(&x, &y, &g, convex)?;

    let p = matrix_abs_power(&sum, exponent)?.into_hermitian();
    let q = matrix_abs_power(&diff, exponent)?.into_hermitian();
    let u = w.mul(&witness.u0)?;
    let v = w.mul(&witness.v0)?;
    let direction = if convex { Direction::LhsLeRhs } else { Direction::LhsGeRhs };
    let tol_used = witness
        .trace
        .as_ref()
        .map_or(tol::PSD_TOL, |t| t.tolerance().max(tol::PSD_TOL));
    let cert = Certificate::assemble(
        statement,
        direction,
        vec![Transform::new(u), Transform::new(v)],
        vec![p, q],
        Side::Lhs,
        m,
        tol_used,
    )?;
    Ok((cert, witness.trace))
}

/// `U |(A+B)/2|^p U* + V |(A-B)/2|^p V* <= (|A|^p + |B|^p)/2` for `p > 2`.
pub fn theorem1_certificate(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    p: f64,
    key1_provider: &dyn Key1Provider,
) -> Result<(Certificate, Option<SearchTrace>), CertError> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(CertError::Regime { exponent: p, regime: "p > 2" });
    }
    orbit_composite(a, b, p, key1_provider, true, "theorem1")
}

/// The squared Cartesian identity `|Z|^2 ⊕ |Z*|^2 = U S U* + V S V*`,
/// `S = X^2 + Y^2`, and the square-root inequality
/// `|Z| ⊕ |Z| <= U' sqrt(S) U'* + V' sqrt(S) V'*`.
pub fn cartesian_certificates(
    z: &ComplexMatrix,
    key1_provider: &dyn Key1Provider,
) -> Result<(Certificate, Certificate, Option<SearchTrace>), CertError> {
    let (x, y) = cartesian_parts(z)?;
    let n = x.dim();
    let xs = x.to_complex();
    let iy = y.to_complex().scale(C64::new(0.0, 1.0));
    let mut squared = parallelogram_isometries(&xs, &iy)?;
    squared.statement = "cartesian_squared".into();

    let s = squared.terms[0].clone();
    let t1 = PsdMatrix::new(squared.transforms[0].matrix.conjugate(&s)?)?;
    let t2 = PsdMatrix::new(squared.transforms[1].matrix.conjugate(&s)?)?;
    let sqrt = |t: f64| t.sqrt();
    let witness = key1_provider.provide(&t1, &t2, &sqrt, false)?;

    let abs_z = matrix_abs_power(z, 1.0)?.into_hermitian();
    // |Z| and |Z*| have the eigenframes of Z*Z and ZZ*; aligning the squares
    // avoids the square root amplifying rounding in null directions.
    let omega = align_unitary(&z.gram(), &z.adjoint().gram())?;
    let j = ComplexMatrix::identity(n).direct_sum(&omega.adjoint());

    let root = psd_power(&PsdMatrix::new(s)?, 0.5)?.into_hermitian();
    let u = j.mul(&witness.u0)?.mul(&squared.transforms[0].matrix)?;
    let v = j.mul(&witness.v0)?.mul(&squared.transforms[1].matrix)?;
    let tol_used = witness
        .trace
        .as_ref()
        .map_or(tol::PSD_TOL, |t| t.tolerance().max(tol::PSD_TOL));
    let rooted = Certificate::assemble(
        "cartesian_root",
        Direction::LhsLeRhs,
        vec![Transform::new(u), Transform::new(v)],
        vec![root.clone(), root],
        Side::Rhs,
        abs_z.direct_sum(&abs_z),
        tol_used,
    )?;
    Ok((squared, rooted, witness.trace))
}

/// `|(A+B)/2|^p ⊕ |(A-B)/2|^p <= (U M U* + V M V*)/2`, `M = (|A|^p+|B|^p)/2`,
/// from the scaled parallelogram law and two eigen-alignment steps. At
/// `p = 2` the scaled parallelogram equality itself is returned.
pub fn direct_sum_cm_certificate(a: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<Certificate, CertError> {
    let n = require_square_pair(a, b)?;
    if !(p >= 2.0) || !p.is_finite() {
        return Err(CertError::Regime { exponent: p, regime: "p > 2" });
    }
    let base = parallelogram_isometries(a, b)?;
    let (u, v) = (&base.transforms[0].matrix, &base.transforms[1].matrix);
    let n_mid = base.terms[0].scale(0.5);
    let sum = a.add(b)?.scale_real(0.5);
    let diff = a.sub(b)?.scale_real(0.5);

    if p == 2.0 {
        let lhs = sum.gram().direct_sum(&diff.gram());
        let half = n_mid.scale(0.5);
        return Ok(Certificate::assemble(
            "direct_sum_cm",
            Direction::Equality,
            vec![Transform::new(u.clone()), Transform::new(v.clone())],
            vec![half.clone(), half],
            Side::Rhs,
            lhs,
            tol::IDENTITY_TOL,
        )?);
    }

    let e = p / 2.0;
    let g = move |t: f64| t.powf(e);
    let r1 = u.conjugate(&n_mid)?;
    let r2 = v.conjugate(&n_mid)?;
    let g_mid = herm_fn(&r1.add(&r2)?.scale(0.5), &g)?;
    let mean_g = herm_fn(&r1, &g)?.add(&herm_fn(&r2, &g)?)?.scale(0.5);
    let w1 = align_unitary(&g_mid, &mean_g)?;

    let m = matrix_abs_power(a, p)?
        .hermitian()
        .add(matrix_abs_power(b, p)?.hermitian())?
        .scale(0.5);
    let w2 = align_unitary(&herm_fn(&n_mid, &g)?, &m)?;

    let u2 = w1.adjoint().mul(u)?.mul(&w2.adjoint())?;
    let v2 = w1.adjoint().mul(v)?.mul(&w2.adjoint())?;
    let lhs = matrix_abs_power(&sum, p)?
        .hermitian()
        .direct_sum(matrix_abs_power(&diff, p)?.hermitian());
    debug_assert_eq!(lhs.dim(), 2 * n);
    let half_m = m.scale(0.5);
    Ok(Certificate::assemble(
        "direct_sum_cm",
        Direction::LhsLeRhs,
        vec![Transform::new(u2), Transform::new(v2)],
        vec![half_m.clone(), half_m],
        Side::Rhs,
        lhs,
        tol::PSD_TOL,
    )?)
}

impl Certificate {
    /// Replaces the second block of a `|Z|^2 ⊕ |Z*|^2` certificate by
    /// `|Z|^2`, conjugating the transforms with `I ⊕ Omega*`.
    pub fn cartesian_abs_abs(&self, z: &ComplexMatrix) -> Result<Self, CertError> {
        let n = z.rows();
        let omega = align_unitary(&z.gram(), &z.adjoint().gram())?;
        let j = ComplexMatrix::identity(n).direct_sum(&omega.adjoint());
        let fixed = z.gram().direct_sum(&z.gram());
        Ok(self.rotated(&j, fixed, "cartesian_squared_abs_abs")?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn diag(v: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(v)
    }

    #[test]
    fn align_permutation() {
        let w = align_unitary(&diag(&[1.0, 2.0]), &diag(&[3.0, 2.0])).unwrap();
        assert_eq!(w, cm(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let moved = w.conjugate(&diag(&[1.0, 2.0])).unwrap();
        assert_eq!(moved, diag(&[2.0, 1.0]));
    }

    #[test]
    fn align_rejects_dominance_violation() {
        let err = align_unitary(&diag(&[3.0, 0.0]), &diag(&[2.0, 2.0])).unwrap_err();
        assert_eq!(err, CertError::Dominance { violations: vec![(1, 3.0, 2.0)] });
    }

    #[test]
    fn key2_commuting_example() {
        let x = PsdMatrix::new(diag(&[4.0, 0.0])).unwrap();
        let y = PsdMatrix::new(diag(&[0.0, 4.0])).unwrap();
        let c = key2_certificate(&x, &y, &|t| t * t, true).unwrap();
        assert_eq!(c.direction, Direction::LhsGeRhs);
        assert!((c.gap_min_eig - 4.0).abs() < 1e-12);
        assert!(c.verify().valid);
    }

    #[test]
    fn key2_linear_is_tight() {
        let x = PsdMatrix::new(HermitianMatrix::new(cm(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap()).unwrap();
        let y = PsdMatrix::new(diag(&[0.5, 3.0])).unwrap();
        let c = key2_certificate(&x, &y, &|t| t, true).unwrap();
        assert!(c.gap_min_eig.abs() < 1e-12);
    }

    #[test]
    fn block_decomposition_rank_one() {
        let h = PsdMatrix::new(HermitianMatrix::new(cm(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap()).unwrap();
        let (u, _v) = block_decomposition(&h).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!((u.get(0, 0).re - r).abs() < 1e-14 && (u.get(1, 0).re - r).abs() < 1e-14);
    }

    #[test]
    fn block_decomposition_requires_even_dimension() {
        let h = PsdMatrix::new(HermitianMatrix::identity(3)).unwrap();
        assert!(matches!(
            block_decomposition(&h),
            Err(CertError::Matrix(MatrixError::OddDimension { dim: 3 }))
        ));
    }

    #[test]
    fn block_diagonal_input() {
        let h = PsdMatrix::new(diag(&[2.0, 1.0, 3.0, 0.5])).unwrap();
        let (u, v) = block_decomposition(&h).unwrap();
        let x = diag(&[2.0, 1.0, 0.0, 0.0]);
        let z = diag(&[0.0, 0.0, 3.0, 0.5]);
        let rebuilt = u.conjugate(&x).unwrap().add(&v.conjugate(&z).unwrap()).unwrap();
        assert!(rebuilt.sub(h.hermitian()).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn parallelogram_scalar() {
        let one = cm(&[&[1.0]]);
        let c = parallelogram_isometries(&one, &one).unwrap();
        assert_eq!(c.lhs, diag(&[4.0, 0.0]));
        assert_eq!(c.terms[0], diag(&[2.0]));
        assert!(c.verify().valid);
        assert!(c.transforms.iter().all(|t| t.kind == TransformKind::Isometry));
    }

    #[test]
    fn theorem1_commuting_fast_path() {
        let a = cm(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let b = cm(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let (c, trace) = theorem1_certificate(&a, &b, 4.0, &CommutingKey1).unwrap();
        assert!(trace.is_none());
        assert!((c.gap_min_eig - 0.375).abs() < 1e-12, "{}", c.gap_min_eig);
        assert!(c.lhs.sub(&HermitianMatrix::identity(2).scale(0.125)).unwrap().max_abs() < 1e-12);
        assert!(c.verify().valid);
    }

    #[test]
    fn theorem1_equal_inputs() {
        let a = cm(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let (c, _) = theorem1_certificate(&a, &a, 3.0, &CommutingKey1).unwrap();
        assert!(c.gap_min_eig.abs() < 1e-10);
        assert!(c.holds());
        assert!(matches!(
            theorem1_certificate(&a, &a, 2.0, &CommutingKey1),
            Err(CertError::Regime { .. })
        ));
    }

    #[test]
    fn commuting_provider_refuses_general_pairs() {
        let x = PsdMatrix::new(diag(&[1.0, 2.0])).unwrap();
        let y = PsdMatrix::new(HermitianMatrix::new(cm(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap()).unwrap();
        let err = CommutingKey1.provide(&x, &y, &|t| t * t, true).unwrap_err();
        assert!(matches!(err, CertError::NotCommuting { .. }));
    }

    #[test]
    fn key1_fast_path_example() {
        let x = PsdMatrix::new(diag(&[1.0, 3.0])).unwrap();
        let y = PsdMatrix::new(diag(&[2.0, 1.0])).unwrap();
        let w = CommutingKey1.provide(&x, &y, &|t| t * t, true).unwrap();
        assert!((w.gap - 4.0).abs() < 1e-12);
    }

    #[test]
    fn direct_sum_cm_scalar_equal() {
        let one = cm(&[&[1.0]]);
        let c = direct_sum_cm_certificate(&one, &one, 4.0).unwrap();
        assert_eq!(c.lhs, diag(&[1.0, 0.0]));
        assert!(c.gap_min_eig.abs() < 1e-12);
        assert!(c.verify().valid);
        let c2 = direct_sum_cm_certificate(&one, &one, 2.0).unwrap();
        assert_eq!(c2.direction, Direction::Equality);
        assert!(c2.verify().valid);
    }

    #[test]
    fn certificate_json_round_trip() {
        let one = cm(&[&[1.0]]);
        let c = parallelogram_isometries(&one, &cm(&[&[0.5]])).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["statement", "direction", "gap_min_eig", "tol_used", "transforms", "lhs", "rhs"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["transforms"][0]["kind"], "isometry");
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
