//! Direct numerical verifiers for the trace, eigenvalue and majorization
//! inequalities, each returning a [`CheckResult`] with signed margins.
//!
//! Throughout, `P = |(A+B)/2|^p`, `Q = |(A-B)/2|^p` and
//! `M = (|A|^p + |B|^p)/2`. Every detail is stored oriented so that the
//! inequality reads `lhs <= rhs`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermitian::{
    eigenvalues, matrix_abs_power, psd_power, require_square_pair, schatten_norm, trace_abs_power,
    ComplexMatrix, HermitianMatrix, MatrixError, PsdMatrix, C64,
};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("exponent {exponent} outside the admissible regime {regime}")]
    Regime { exponent: f64, regime: &'static str },
    #[error("index out of range: j={j}, k={k}, n={n} ({rule})")]
    Index {
        j: usize,
        k: usize,
        n: usize,
        rule: &'static str,
    },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
}

/// One sub-inequality `lhs <= rhs`, tagged by its index tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "(Vec<usize>, f64, f64)", from = "(Vec<usize>, f64, f64)")]
pub struct Detail {
    pub indices: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl Detail {
    pub fn new(indices: Vec<usize>, lhs: f64, rhs: f64) -> Self {
        Self { indices, lhs, rhs }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

impl From<Detail> for (Vec<usize>, f64, f64) {
    fn from(d: Detail) -> Self {
        (d.indices, d.lhs, d.rhs)
    }
}

impl From<(Vec<usize>, f64, f64)> for Detail {
    fn from((indices, lhs, rhs): (Vec<usize>, f64, f64)) -> Self {
        Self { indices, lhs, rhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub holds: bool,
    /// Smallest `rhs - lhs` over all details.
    pub margin: f64,
    pub tol: f64,
    pub scale: f64,
    pub details: Vec<Detail>,
}

impl CheckResult {
    /// Scale defaults to `1 + max(|lhs|, |rhs|)` over the details.
    pub fn from_details(name: &str, details: Vec<Detail>, tol: f64) -> Self {
        let scale = 1.0
            + details
                .iter()
                .fold(0.0f64, |m, d| m.max(d.lhs.abs()).max(d.rhs.abs()));
        Self::with_scale(name, details, tol, scale)
    }

    pub fn with_scale(name: &str, details: Vec<Detail>, tol: f64, scale: f64) -> Self {
        let margin = details
            .iter()
            .map(Detail::slack)
            .fold(f64::INFINITY, f64::min);
        let holds = margin >= -tol * scale;
        Self {
            name: name.to_string(),
            holds,
            margin,
            tol,
            scale,
            details,
        }
    }

    /// Re-reads the details; true when every one satisfies
    /// `lhs <= rhs + tol * scale`.
    pub fn details_consistent(&self) -> bool {
        self.details
            .iter()
            .all(|d| d.lhs <= d.rhs + self.tol * self.scale)
            == self.holds
    }

    pub fn detail(&self, indices: &[usize]) -> Option<&Detail> {
        self.details.iter().find(|d| d.indices == indices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntinormVariant {
    Sum,
    Geomean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylForm {
    Cor3,
    Cor4,
    Cor5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectSumForm {
    /// `|(A+B)/2|^p ⊕ |(A-B)/2|^p` against `(U M U* + V M V*)/2`.
    ScaledCm,
    /// `|A+B|^p ⊕ |A-B|^p` against four isometric copies of `|A|^p`, `|B|^p`.
    FourTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CartesianReading {
    /// `|Z|^2 ⊕ |Z|^2`, as displayed.
    AbsAbs,
    /// `|Z|^2 ⊕ |Z*|^2`, as produced by the parallelogram construction.
    AbsAdjoint,
}

pub(crate) struct PairPowers {
    pub half_sum: PsdMatrix,
    pub half_diff: PsdMatrix,
    pub mean: HermitianMatrix,
    pub abs_a: PsdMatrix,
    pub abs_b: PsdMatrix,
}

impl PairPowers {
    pub fn new(a: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<Self, MatrixError> {
        require_square_pair(a, b)?;
        let half_sum = matrix_abs_power(&a.add(b)?.scale_real(0.5), p)?;
        let half_diff = matrix_abs_power(&a.sub(b)?.scale_real(0.5), p)?;
        let abs_a = matrix_abs_power(a, p)?;
        let abs_b = matrix_abs_power(b, p)?;
        let mean = abs_a.hermitian().add(abs_b.hermitian())?.scale(0.5);
        Ok(Self {
            half_sum,
            half_diff,
            mean,
            abs_a,
            abs_b,
        })
    }
}

fn down(h: &HermitianMatrix) -> Result<Vec<f64>, MatrixError> {
    eigenvalues(h)
}

fn up(h: &HermitianMatrix) -> Result<Vec<f64>, MatrixError> {
    let mut v = eigenvalues(h)?;
    v.reverse();
    Ok(v)
}

fn prefix(v: &[f64], k: usize) -> f64 {
    v.iter().take(k).sum()
}

/// Clarkson–McCarthy trace inequalities for a pair.
///
/// For `p >= 2` the details are
/// `[0]: 2(|A|_p^p + |B|_p^p) <= |A+B|_p^p + |A-B|_p^p`,
/// `[1]: |A+B|_p^p + |A-B|_p^p <= 2^{p-1}(|A|_p^p + |B|_p^p)` and
/// `[2]: Tr P + Tr Q <= Tr M`; for `0 < p < 2` each is reversed.
pub fn check_clarkson_trace(a: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<CheckResult, CheckError> {
    require_square_pair(a, b)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(CheckError::Regime { exponent: p, regime: "p > 0" });
    }
    let na = trace_abs_power(a, p)?;
    let nb = trace_abs_power(b, p)?;
    let sum = a.add(b)?;
    let diff = a.sub(b)?;
    let ns = trace_abs_power(&sum, p)?;
    let nd = trace_abs_power(&diff, p)?;
    let hs = trace_abs_power(&sum.scale_real(0.5), p)?;
    let hd = trace_abs_power(&diff.scale_real(0.5), p)?;

    let outer = ns + nd;
    let low = 2.0 * (na + nb);
    let high = 2f64.powf(p - 1.0) * (na + nb);
    let inner = hs + hd;
    let mean = 0.5 * (na + nb);

    let details = if p >= 2.0 {
        vec![
            Detail::new(vec![0], low, outer),
            Detail::new(vec![1], outer, high),
            Detail::new(vec![2], inner, mean),
        ]
    } else {
        vec![
            Detail::new(vec![0], outer, low),
            Detail::new(vec![1], high, outer),
            Detail::new(vec![2], mean, inner),
        ]
    };
    Ok(CheckResult::from_details("clarkson_trace", details, tol::CHECK_TOL))
}

/// Prefix sums of nonincreasing eigenvalues of `P + Q` against those of `M`,
/// for every `k = 1..n`.
pub fn check_weak_majorization(a: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<CheckResult, CheckError> {
    require_square_pair(a, b)?;
    if !(p >= 2.0) || !p.is_finite() {
        return Err(CheckError::Regime { exponent: p, regime: "p >= 2" });
    }
    let pw = PairPowers::new(a, b, p)?;
    let left = down(&pw.half_sum.hermitian().add(pw.half_diff.hermitian())?)?;
    let right = down(&pw.mean)?;
    let details = (1..=left.len())
        .map(|k| Detail::new(vec![k], prefix(&left, k), prefix(&right, k)))
        .collect();
    Ok(CheckResult::from_details("weak_majorization", details, tol::CHECK_TOL))
}

/// Superadditivity of the two symmetric anti-norms built from the `k`
/// smallest eigenvalues: their sum, or the `k`-th root of their product.
pub fn check_antinorm_superadditivity(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    p: f64,
    variant: AntinormVariant,
) -> Result<CheckResult, CheckError> {
    require_square_pair(a, b)?;
    if !(p > 2.0) || !p.is_finite() {
        return Err(CheckError::Regime { exponent: p, regime: "p > 2" });
    }
    let pw = PairPowers::new(a, b, p)?;
    let m = up(&pw.mean)?;
    let s = up(pw.half_sum.hermitian())?;
    let d = up(pw.half_diff.hermitian())?;
    let n = m.len();
    let functional = |v: &[f64], k: usize| match variant {
        AntinormVariant::Sum => prefix(v, k),
        AntinormVariant::Geomean => v
            .iter()
            .take(k)
            .map(|x| x.max(0.0))
            .product::<f64>()
            .powf(1.0 / k as f64),
    };
    let details = (1..=n)
        .map(|k| Detail::new(vec![k], functional(&s, k) + functional(&d, k), functional(&m, k)))
        .collect();
    let name = match variant {
        AntinormVariant::Sum => "antinorm_sum",
        AntinormVariant::Geomean => "antinorm_geomean",
    };
    Ok(CheckResult::from_details(name, details, tol::CHECK_TOL))
}

/// Single-eigenvalue estimates obtained from Weyl's inequality.
///
/// Indices are 0-based as displayed:
/// - `Cor3` (`p > 2`, `j + k + 1 <= n`):
///   `lambda_{j+k+1}(P) + lambda^up_{k+1}(Q) <= lambda_{j+1}(M)`
/// - `Cor4` (`0 < q < 2`, `j + k + 1 <= n`):
///   `lambda_{j+k+1}(M) <= lambda_{j+1}(P) + lambda_{k+1}(Q)`
/// - `Cor5` (`p > 2`, `j <= n - 1`, `k` ignored):
///   `lambda_{2j+1}(P ⊕ Q) <= lambda_{j+1}(M)`
pub fn check_weyl_split(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    exponent: f64,
    j: usize,
    k: usize,
    which: WeylForm,
) -> Result<CheckResult, CheckError> {
    let n = require_square_pair(a, b)?;
    match which {
        WeylForm::Cor3 | WeylForm::Cor5 if !(exponent > 2.0) || !exponent.is_finite() => {
            return Err(CheckError::Regime { exponent, regime: "p > 2" })
        }
        WeylForm::Cor4 if !(exponent > 0.0 && exponent < 2.0) => {
            return Err(CheckError::Regime { exponent, regime: "0 < q < 2" })
        }
        _ => {}
    }
    match which {
        WeylForm::Cor3 | WeylForm::Cor4 if j + k + 1 > n => {
            return Err(CheckError::Index { j, k, n, rule: "j + k + 1 <= n" })
        }
        WeylForm::Cor5 if j >= n => return Err(CheckError::Index { j, k, n, rule: "j <= n - 1" }),
        _ => {}
    }
    let pw = PairPowers::new(a, b, exponent)?;
    let m = down(&pw.mean)?;
    let s = down(pw.half_sum.hermitian())?;
    let d = down(pw.half_diff.hermitian())?;
    let (name, detail) = match which {
        WeylForm::Cor3 => {
            let d_up = up(pw.half_diff.hermitian())?;
            ("weyl_cor3", Detail::new(vec![j, k], s[j + k] + d_up[k], m[j]))
        }
        WeylForm::Cor4 => ("weyl_cor4", Detail::new(vec![j, k], m[j + k], s[j] + d[k])),
        WeylForm::Cor5 => {
            let mut both = s.clone();
            both.extend_from_slice(&d);
            both.sort_by(|x, y| y.total_cmp(x));
            ("weyl_cor5", Detail::new(vec![j], both[2 * j], m[j]))
        }
    };
    Ok(CheckResult::from_details(name, vec![detail], tol::CHECK_TOL))
}

/// `|A+B|^2 + |A-B|^2 = 2(|A|^2 + |B|^2)` entry-wise.
///
/// The single detail is `[i, j]` of the worst entry with `lhs` the deviation
/// and `rhs = 0`; the scale is `1 + max` entry of either side.
pub fn check_parallelogram_identity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<CheckResult, CheckError> {
    let n = require_square_pair(a, b)?;
    let left = a.add(b)?.gram().add(&a.sub(b)?.gram())?;
    let right = a.gram().add(&b.gram())?.scale(2.0);
    let mut worst = (0, 0, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let dev = (left.get(i, j) - right.get(i, j)).norm();
            if dev > worst.2 {
                worst = (i, j, dev);
            }
        }
    }
    let scale = 1.0 + left.max_abs().max(right.max_abs());
    Ok(CheckResult::with_scale(
        "parallelogram_identity",
        vec![Detail::new(vec![worst.0, worst.1], worst.2, 0.0)],
        tol::IDENTITY_TOL,
        scale,
    ))
}

/// Uniform convexity estimate: for `|A|_p = |B|_p = 1` and
/// `|A - B|_p = eps`, `|(A+B)/2|_p <= (1 - (eps/2)^p)^{1/p}`. Inputs are
/// normalized first. The detail is the equivalent power form
/// `|(A+B)/2|_p^p + (eps/2)^p <= 1`, which stays well conditioned when
/// `eps` approaches 2.
pub fn check_uniform_convexity(a: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<CheckResult, CheckError> {
    require_square_pair(a, b)?;
    if !(p >= 2.0) || !p.is_finite() {
        return Err(CheckError::Regime { exponent: p, regime: "p >= 2" });
    }
    let na = schatten_norm(a, p)?;
    let nb = schatten_norm(b, p)?;
    if na == 0.0 || nb == 0.0 {
        return Err(CheckError::Degenerate("uniform convexity needs nonzero matrices"));
    }
    let a = a.scale_real(1.0 / na);
    let b = b.scale_real(1.0 / nb);
    let eps = schatten_norm(&a.sub(&b)?, p)?;
    let mid = schatten_norm(&a.add(&b)?.scale_real(0.5), p)?;
    Ok(CheckResult::from_details(
        "uniform_convexity",
        vec![Detail::new(vec![0], mid.powf(p) + (eps / 2.0).powf(p), 1.0)],
        tol::CHECK_TOL,
    ))
}

/// Spectral consequences of the direct-sum statements, which need no
/// certificate: for `k = 1..2n`, with `L` the direct sum,
///
/// - `ScaledCm`, `p >= 2`: `sum_{i<=k} lambda_i(L) <= sum_{i<=min(k,n)} lambda_i(M)`
/// - `ScaledCm`, `p < 2`: `sum_{i<=(k-n)+} lambda^up_i(M) <= sum_{i<=k} lambda^up_i(L)`
/// - `FourTerm`, `p >= 2`: `2 sum_{i<=(k-n)+} (lambda^up_i(|A|^p) + lambda^up_i(|B|^p)) <= sum_{i<=k} lambda^up_i(L)`
/// - `FourTerm`, `p < 2`: `sum_{i<=k} lambda_i(L) <= 2 sum_{i<=min(k,n)} (lambda_i(|A|^p) + lambda_i(|B|^p))`
pub fn check_direct_sum(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    exponent: f64,
    form: DirectSumForm,
) -> Result<CheckResult, CheckError> {
    let n = require_square_pair(a, b)?;
    if !(exponent > 0.0) || !exponent.is_finite() {
        return Err(CheckError::Regime { exponent, regime: "p > 0" });
    }
    let convex = exponent >= 2.0;
    let pw = PairPowers::new(a, b, exponent)?;
    let mut details = Vec::with_capacity(2 * n);
    let name = match form {
        DirectSumForm::ScaledCm => {
            let l = pw.half_sum.hermitian().direct_sum(pw.half_diff.hermitian());
            if convex {
                let (ld, md) = (down(&l)?, down(&pw.mean)?);
                for k in 1..=2 * n {
                    details.push(Detail::new(vec![k], prefix(&ld, k), prefix(&md, k.min(n))));
                }
                "direct_sum_cm"
            } else {
                let (lu, mu) = (up(&l)?, up(&pw.mean)?);
                for k in 1..=2 * n {
                    details.push(Detail::new(vec![k], prefix(&mu, k.saturating_sub(n)), prefix(&lu, k)));
                }
                "direct_sum_cm_reversed"
            }
        }
        DirectSumForm::FourTerm => {
            let s = matrix_abs_power(&a.add(b)?, exponent)?;
            let d = matrix_abs_power(&a.sub(b)?, exponent)?;
            let l = s.hermitian().direct_sum(d.hermitian());
            if convex {
                let lu = up(&l)?;
                let (au, bu) = (up(pw.abs_a.hermitian())?, up(pw.abs_b.hermitian())?);
                for k in 1..=2 * n {
                    let m = k.saturating_sub(n);
                    details.push(Detail::new(vec![k], 2.0 * (prefix(&au, m) + prefix(&bu, m)), prefix(&lu, k)));
                }
                "direct_sum_power"
            } else {
                let ld = down(&l)?;
                let (ad, bd) = (down(pw.abs_a.hermitian())?, down(pw.abs_b.hermitian())?);
                for k in 1..=2 * n {
                    let m = k.min(n);
                    details.push(Detail::new(vec![k], prefix(&ld, k), 2.0 * (prefix(&ad, m) + prefix(&bd, m))));
                }
                "direct_sum_power_reversed"
            }
        }
    };
    Ok(CheckResult::from_details(name, details, tol::CHECK_TOL))
}

/// Cartesian decomposition `Z = X + iY`, `X = (Z+Z*)/2`, `Y = (Z-Z*)/(2i)`.
pub fn cartesian_parts(z: &ComplexMatrix) -> Result<(HermitianMatrix, HermitianMatrix), MatrixError> {
    crate::hermitian::require_square(z)?;
    let zs = z.adjoint();
    let x = HermitianMatrix::new(z.add(&zs)?.scale_real(0.5))?;
    let y = HermitianMatrix::new(z.sub(&zs)?.scale(C64::new(0.0, -0.5)))?;
    Ok((x, y))
}

/// Certificate-free consequences of the Cartesian-decomposition identity and
/// its square-root companion, under one reading of the left-hand side.
///
/// With `S = X^2 + Y^2` and `L2`, `L1` the squared and unsquared direct sums:
/// `[0, 0]`/`[0, 1]`: `Tr L2 = 2 Tr S` (both directions);
/// `[1, k]`: `sum_{i<=k} lambda_i(L2) <= 2 sum_{i<=min(k,n)} lambda_i(S)`;
/// `[2, k]`: `sum_{i<=k} lambda_i(L1) <= 2 sum_{i<=min(k,n)} lambda_i(sqrt S)`.
pub fn check_cartesian(z: &ComplexMatrix, reading: CartesianReading) -> Result<CheckResult, CheckError> {
    let (x, y) = cartesian_parts(z)?;
    let n = x.dim();
    let s = x.to_complex().gram().add(&y.to_complex().gram())?;
    let s_psd = PsdMatrix::new(s.clone())?;
    let root = psd_power(&s_psd, 0.5)?;

    let abs2 = z.gram();
    let other2 = match reading {
        CartesianReading::AbsAbs => abs2.clone(),
        CartesianReading::AbsAdjoint => z.adjoint().gram(),
    };
    let l2 = abs2.direct_sum(&other2);
    let l1 = psd_power(&PsdMatrix::new(l2.clone())?, 0.5)?;

    let (l2d, l1d) = (down(&l2)?, down(l1.hermitian())?);
    let (sd, rd) = (down(&s)?, down(root.hermitian())?);
    let mut details = vec![
        Detail::new(vec![0, 0], l2.trace(), 2.0 * s.trace()),
        Detail::new(vec![0, 1], 2.0 * s.trace(), l2.trace()),
    ];
    for k in 1..=2 * n {
        details.push(Detail::new(vec![1, k], prefix(&l2d, k), 2.0 * prefix(&sd, k.min(n))));
    }
    for k in 1..=2 * n {
        details.push(Detail::new(vec![2, k], prefix(&l1d, k), 2.0 * prefix(&rd, k.min(n))));
    }
    let name = match reading {
        CartesianReading::AbsAbs => "cartesian_abs_abs",
        CartesianReading::AbsAdjoint => "cartesian_abs_adjoint",
    };
    Ok(CheckResult::from_details(name, details, tol::CHECK_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn e1() -> ComplexMatrix {
        cm(&[&[1.0, 0.0], &[0.0, 0.0]])
    }

    fn e2() -> ComplexMatrix {
        cm(&[&[0.0, 0.0], &[0.0, 1.0]])
    }

    fn close(x: f64, y: f64) -> bool {
        (x - y).abs() < 1e-13
    }

    #[test]
    fn clarkson_scalar_equality() {
        let one = cm(&[&[1.0]]);
        let r = check_clarkson_trace(&one, &one, 4.0).unwrap();
        assert!(r.holds);
        assert!(close(r.margin, 0.0));
        assert!(close(r.detail(&[2]).unwrap().slack(), 0.0));
    }

    #[test]
    fn clarkson_commuting_diagonals() {
        let r = check_clarkson_trace(&e1(), &e2(), 4.0).unwrap();
        assert!(r.holds);
        let eq3 = r.detail(&[2]).unwrap();
        assert!(close(eq3.lhs, 0.25) && close(eq3.rhs, 1.0));
        assert!(close(eq3.slack(), 0.75));
        // 2(1 + 1) <= 2 + 2 is tight.
        assert!(close(r.margin, 0.0));
        assert!(r.details_consistent());
    }

    #[test]
    fn clarkson_reversed_regime_orientation() {
        let r = check_clarkson_trace(&e1(), &e2(), 1.0).unwrap();
        assert!(r.holds);
        let eq3 = r.detail(&[2]).unwrap();
        // Tr|(A+B)/2| + Tr|(A-B)/2| = 2 >= (1 + 1)/2.
        assert!(close(eq3.lhs, 1.0) && close(eq3.rhs, 2.0));
        assert!(check_clarkson_trace(&e1(), &e2(), 0.0).is_err());
    }

    #[test]
    fn weak_majorization_examples() {
        let id = ComplexMatrix::identity(2);
        let r = check_weak_majorization(&id, &id, 3.0).unwrap();
        assert!(r.holds && close(r.margin, 0.0));
        assert!(close(r.details[0].lhs, 1.0) && close(r.details[1].lhs, 2.0));

        let r = check_weak_majorization(&e1(), &e2(), 4.0).unwrap();
        let lhs: Vec<f64> = r.details.iter().map(|d| d.lhs).collect();
        let rhs: Vec<f64> = r.details.iter().map(|d| d.rhs).collect();
        assert!(close(lhs[0], 0.125) && close(lhs[1], 0.25));
        assert!(close(rhs[0], 0.5) && close(rhs[1], 1.0));
        assert!(r.holds);

        assert!(matches!(
            check_weak_majorization(&id, &id, 1.5),
            Err(CheckError::Regime { .. })
        ));
    }

    #[test]
    fn antinorm_examples() {
        let a = cm(&[&[2.0, 1.0], &[0.0, 1.0]]);
        let r = check_antinorm_superadditivity(&a, &a, 3.0, AntinormVariant::Sum).unwrap();
        assert!(r.holds);
        assert!(r.margin.abs() < 1e-12);

        let r = check_antinorm_superadditivity(&e1(), &e2(), 4.0, AntinormVariant::Sum).unwrap();
        let k2 = r.detail(&[2]).unwrap();
        assert!(close(k2.rhs, 1.0) && close(k2.lhs, 0.25));
        assert!(check_antinorm_superadditivity(&a, &a, 2.0, AntinormVariant::Geomean).is_err());
    }

    #[test]
    fn weyl_examples() {
        let one = cm(&[&[1.0]]);
        let r = check_weyl_split(&one, &one, 4.0, 0, 0, WeylForm::Cor5).unwrap();
        assert!(r.holds && close(r.margin, 0.0));
        assert!(close(r.details[0].lhs, 1.0));

        let r = check_weyl_split(&e1(), &e2(), 4.0, 0, 0, WeylForm::Cor3).unwrap();
        assert!(close(r.details[0].rhs, 0.5) && close(r.details[0].lhs, 0.125));
        assert!(r.holds);

        assert!(matches!(
            check_weyl_split(&e1(), &e2(), 4.0, 1, 1, WeylForm::Cor3),
            Err(CheckError::Index { .. })
        ));
        assert!(matches!(
            check_weyl_split(&e1(), &e2(), 2.5, 0, 0, WeylForm::Cor4),
            Err(CheckError::Regime { .. })
        ));
        assert!(check_weyl_split(&e1(), &e2(), 4.0, 2, 0, WeylForm::Cor5).is_err());
    }

    #[test]
    fn parallelogram_examples() {
        let id = ComplexMatrix::identity(3);
        let r = check_parallelogram_identity(&id, &id).unwrap();
        assert!(r.holds && r.margin == 0.0);
        let n = cm(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = check_parallelogram_identity(&n, &n.adjoint()).unwrap();
        assert!(r.holds && r.margin >= -1e-14);
        assert!(check_parallelogram_identity(&id, &n).is_err());
    }

    #[test]
    fn uniform_convexity_commuting() {
        let r = check_uniform_convexity(&e1(), &e2(), 3.0).unwrap();
        assert!(r.holds);
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(check_uniform_convexity(&z, &e1(), 3.0), Err(CheckError::Degenerate(_))));
    }

    #[test]
    fn direct_sum_forms_hold_on_diagonals() {
        for p in [0.5, 1.0, 3.0, 4.0] {
            for form in [DirectSumForm::ScaledCm, DirectSumForm::FourTerm] {
                let r = check_direct_sum(&e1(), &e2(), p, form).unwrap();
                assert!(r.holds, "{form:?} p={p}: {r:?}");
                assert_eq!(r.details.len(), 4);
            }
        }
    }

    #[test]
    fn cartesian_readings_agree_for_normal_input() {
        let z = ComplexMatrix::from_row_major(
            2,
            2,
            &[C64::new(1.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, -1.0)],
        )
        .unwrap();
        let a = check_cartesian(&z, CartesianReading::AbsAbs).unwrap();
        let b = check_cartesian(&z, CartesianReading::AbsAdjoint).unwrap();
        assert!(a.holds && b.holds);
        assert!((a.margin - b.margin).abs() < 1e-12);
    }

    #[test]
    fn detail_serializes_as_triple() {
        let r = CheckResult::from_details("x", vec![Detail::new(vec![1, 2], 0.5, 1.0)], 1e-8);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["details"][0], serde_json::json!([[1, 2], 0.5, 1.0]));
        assert_eq!(v["holds"], serde_json::json!(true));
        let back: CheckResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
