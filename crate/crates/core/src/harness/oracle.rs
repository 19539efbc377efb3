//! Scalar closure: for `1 x 1` inputs every quantity reduces to real
//! arithmetic on the moduli `|a|`, `|b|`, `|a+b|`, `|a-b|`. These formulas
//! never touch the eigensolver, so agreement is an independent check.

use crate::checks::{AntinormVariant, CartesianReading, CheckResult, Detail, DirectSumForm, WeylForm};
use crate::hermitian::C64;

/// The checks the harness runs, with their parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckOp {
    Clarkson { p: f64 },
    WeakMajorization { p: f64 },
    Antinorm { p: f64, variant: AntinormVariant },
    Weyl { exponent: f64, j: usize, k: usize, form: WeylForm },
    Parallelogram,
    UniformConvexity { p: f64 },
    DirectSum { exponent: f64, form: DirectSumForm },
    Cartesian { reading: CartesianReading },
}

struct Moduli {
    a: f64,
    b: f64,
    sum: f64,
    diff: f64,
}

impl Moduli {
    fn new(a: C64, b: C64) -> Self {
        Self {
            a: a.norm(),
            b: b.norm(),
            sum: (a + b).norm(),
            diff: (a - b).norm(),
        }
    }
}

fn d(indices: &[usize], lhs: f64, rhs: f64) -> Detail {
    Detail::new(indices.to_vec(), lhs, rhs)
}

/// Expected details of `op` on the scalar pair `(a, b)`; `Cartesian` reads
/// only `a`.
pub fn expected_details(op: CheckOp, a: C64, b: C64) -> Vec<Detail> {
    let m = Moduli::new(a, b);
    let half = |x: f64, e: f64| (x / 2.0).powf(e);
    let mean = |e: f64| (m.a.powf(e) + m.b.powf(e)) / 2.0;
    match op {
        CheckOp::Clarkson { p } => {
            let (na, nb) = (m.a.powf(p), m.b.powf(p));
            let outer = m.sum.powf(p) + m.diff.powf(p);
            let low = 2.0 * (na + nb);
            let high = 2f64.powf(p - 1.0) * (na + nb);
            let inner = half(m.sum, p) + half(m.diff, p);
            let mid = (na + nb) / 2.0;
            if p >= 2.0 {
                vec![d(&[0], low, outer), d(&[1], outer, high), d(&[2], inner, mid)]
            } else {
                vec![d(&[0], outer, low), d(&[1], high, outer), d(&[2], mid, inner)]
            }
        }
        CheckOp::WeakMajorization { p } | CheckOp::Antinorm { p, .. } => {
            vec![d(&[1], half(m.sum, p) + half(m.diff, p), mean(p))]
        }
        CheckOp::Weyl { exponent: e, form, .. } => match form {
            WeylForm::Cor3 => vec![d(&[0, 0], half(m.sum, e) + half(m.diff, e), mean(e))],
            WeylForm::Cor4 => vec![d(&[0, 0], mean(e), half(m.sum, e) + half(m.diff, e))],
            WeylForm::Cor5 => vec![d(&[0], half(m.sum, e).max(half(m.diff, e)), mean(e))],
        },
        CheckOp::Parallelogram => {
            let left = m.sum * m.sum + m.diff * m.diff;
            let right = 2.0 * (m.a * m.a + m.b * m.b);
            vec![d(&[0, 0], (left - right).abs(), 0.0)]
        }
        CheckOp::UniformConvexity { p } => {
            let (ua, ub) = (a / m.a, b / m.b);
            let eps = (ua - ub).norm();
            let mid = (ua + ub).norm() / 2.0;
            vec![d(&[0], mid.powf(p) + (eps / 2.0).powf(p), 1.0)]
        }
        CheckOp::DirectSum { exponent: e, form } => {
            let convex = e >= 2.0;
            match form {
                DirectSumForm::ScaledCm => {
                    let (hi, lo) = max_min(half(m.sum, e), half(m.diff, e));
                    let mm = mean(e);
                    if convex {
                        vec![d(&[1], hi, mm), d(&[2], hi + lo, mm)]
                    } else {
                        vec![d(&[1], 0.0, lo), d(&[2], mm, lo + hi)]
                    }
                }
                DirectSumForm::FourTerm => {
                    let (hi, lo) = max_min(m.sum.powf(e), m.diff.powf(e));
                    let both = 2.0 * (m.a.powf(e) + m.b.powf(e));
                    if convex {
                        vec![d(&[1], 0.0, lo), d(&[2], both, lo + hi)]
                    } else {
                        vec![d(&[1], hi, both), d(&[2], hi + lo, both)]
                    }
                }
            }
        }
        CheckOp::Cartesian { .. } => {
            let z2 = a.norm_sqr();
            let s = a.re * a.re + a.im * a.im;
            vec![
                d(&[0, 0], 2.0 * z2, 2.0 * s),
                d(&[0, 1], 2.0 * s, 2.0 * z2),
                d(&[1, 1], z2, 2.0 * s),
                d(&[1, 2], 2.0 * z2, 2.0 * s),
                d(&[2, 1], z2.sqrt(), 2.0 * s.sqrt()),
                d(&[2, 2], 2.0 * z2.sqrt(), 2.0 * s.sqrt()),
            ]
        }
    }
}

fn max_min(x: f64, y: f64) -> (f64, f64) {
    (x.max(y), x.min(y))
}

/// Relative agreement used by every scalar comparison.
pub const ORACLE_TOL: f64 = 1e-9;

pub fn close(x: f64, y: f64, scale: f64) -> bool {
    (x - y).abs() <= ORACLE_TOL * scale.max(1.0 + x.abs().max(y.abs()))
}

/// The check agrees with the scalar evaluation: same details (to
/// [`ORACLE_TOL`] relative) and the same verdict.
pub fn check_agrees(result: &CheckResult, op: CheckOp, a: C64, b: C64) -> bool {
    let expected = expected_details(op, a, b);
    if expected.len() != result.details.len() {
        return false;
    }
    let values_agree = expected.iter().zip(&result.details).all(|(e, r)| {
        e.indices == r.indices && close(e.lhs, r.lhs, result.scale) && close(e.rhs, r.rhs, result.scale)
    });
    let margin = expected.iter().map(Detail::slack).fold(f64::INFINITY, f64::min);
    let verdict = margin >= -result.tol * result.scale;
    values_agree && verdict == result.holds
}

/// Scalar gap of the orbit inequality `U P U* + V Q V* <= M` (`convex`) or
/// its reverse, with `g(t) = t^{e/2}` on the squared moduli.
pub fn composite_gap(a: C64, b: C64, exponent: f64, convex: bool) -> f64 {
    let m = Moduli::new(a, b);
    let mean = (m.a.powf(exponent) + m.b.powf(exponent)) / 2.0;
    let sides = (m.sum / 2.0).powf(exponent) + (m.diff / 2.0).powf(exponent);
    if convex {
        mean - sides
    } else {
        sides - mean
    }
}

/// Scalar gap of the key2 step for `X = |a|^2`, `Y = |b|^2`.
pub fn key2_gap(a: C64, b: C64, exponent: f64, convex: bool) -> f64 {
    let g = |t: f64| t.powf(exponent / 2.0);
    let (x, y) = (a.norm_sqr(), b.norm_sqr());
    let diff = (g(x) + g(y)) / 2.0 - g((x + y) / 2.0);
    if convex {
        diff
    } else {
        -diff
    }
}

/// Scalar gap of the key1 step for `X = |a|^2`, `Y = |b|^2`.
pub fn key1_gap(a: C64, b: C64, exponent: f64, convex: bool) -> f64 {
    let g = |t: f64| t.powf(exponent / 2.0);
    let (x, y) = (a.norm_sqr(), b.norm_sqr());
    let diff = g(x + y) - g(x) - g(y);
    if convex {
        diff
    } else {
        -diff
    }
}

/// Diagonal of the fixed side of the direct-sum statements.
pub fn direct_sum_fixed(a: C64, b: C64, exponent: f64, form: DirectSumForm) -> [f64; 2] {
    let m = Moduli::new(a, b);
    match form {
        DirectSumForm::ScaledCm => [(m.sum / 2.0).powf(exponent), (m.diff / 2.0).powf(exponent)],
        DirectSumForm::FourTerm => [m.sum.powf(exponent), m.diff.powf(exponent)],
    }
}
