//! Library results against independently computed reference values:
//! nalgebra's own eigen/SVD routines, characteristic polynomials, and
//! explicit matrix arithmetic.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use orbitcert::certificates::{
    align_unitary, block_decomposition, cartesian_certificates, direct_sum_cm_certificate, key2_certificate,
    parallelogram_isometries, Certificate, Direction, Side,
};
use orbitcert::checks::{
    check_antinorm_superadditivity, check_clarkson_trace, check_parallelogram_identity, check_weak_majorization,
    check_weyl_split, AntinormVariant, DirectSumForm, WeylForm,
};
use orbitcert::harness::{generate, generate_pair, Generated, GeneratorKind, GeneratorSpec};
use orbitcert::hermitian::{
    apply_spectral_function, eigenvalues, matrix_abs_power, psd_power, singular_values, trace_abs_power,
    ComplexMatrix, HermitianMatrix, PsdMatrix,
};
use orbitcert::search::{
    direct_sum_power_certificates, key1_certificate, orbit_optimize, theorem1_search_certificate,
    theorem2_certificate, SearchConfig, SearchKey1, SumDirection,
};

fn single(kind: GeneratorKind, dim: usize, seed: u64) -> ComplexMatrix {
    match generate(&GeneratorSpec::new(kind, dim, seed)).unwrap() {
        Generated::Single(m) => m,
        Generated::Pair(..) => unreachable!(),
    }
}

fn hermitian(dim: usize, seed: u64) -> HermitianMatrix {
    HermitianMatrix::new(single(GeneratorKind::Hermitian, dim, seed)).unwrap()
}

fn psd(dim: usize, seed: u64) -> PsdMatrix {
    PsdMatrix::new(HermitianMatrix::new(single(GeneratorKind::Psd, dim, seed)).unwrap()).unwrap()
}

fn ginibre_pair(dim: usize, seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    generate_pair(&GeneratorSpec::new(GeneratorKind::Ginibre, dim, seed)).unwrap()
}

/// Eigenvalues (nonincreasing) from nalgebra's Hermitian eigensolver.
fn ref_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `H^e` for PSD `H` via nalgebra's eigensolver.
fn ref_power(h: &DMatrix<C64>, e: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.max(0.0).powf(e), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `|A|^p` via nalgebra: `(A* A)^{p/2}`.
fn ref_abs_power(a: &ComplexMatrix, p: f64) -> DMatrix<C64> {
    let m = a.as_dmatrix();
    ref_power(&(m.adjoint() * m), p / 2.0)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn ref_trace(m: &DMatrix<C64>) -> f64 {
    m.trace().re
}

/// Rebuilds the transformed side from the certificate's own transforms and
/// terms, then recomputes the gap with nalgebra.
fn independent_gap(cert: &Certificate) -> f64 {
    let n = cert.lhs.dim();
    let mut sum = DMatrix::<C64>::zeros(n, n);
    for (t, s) in cert.transforms.iter().zip(&cert.terms) {
        let t = t.matrix.as_dmatrix();
        sum += t * s.as_dmatrix() * t.adjoint();
    }
    let side = match cert.transformed_side {
        Side::Lhs => cert.lhs.as_dmatrix(),
        Side::Rhs => cert.rhs.as_dmatrix(),
    };
    let scale = 1.0 + max_abs(side);
    assert!(max_abs(&(&sum - side)) <= 1e-9 * scale, "transformed side does not rebuild");
    let (l, r) = (cert.lhs.as_dmatrix(), cert.rhs.as_dmatrix());
    match cert.direction {
        Direction::LhsLeRhs => *ref_eigenvalues(&(r - l)).last().unwrap(),
        Direction::LhsGeRhs => *ref_eigenvalues(&(l - r)).last().unwrap(),
        Direction::Equality => -max_abs(&(l - r)),
    }
}

fn assert_isometries(cert: &Certificate) {
    for t in &cert.transforms {
        let m = t.matrix.as_dmatrix();
        let defect = max_abs(&(m.adjoint() * m - DMatrix::identity(m.ncols(), m.ncols())));
        assert!(defect <= 1e-10, "orthonormality defect {defect:e}");
    }
}

/// Coefficients `c_0..c_n` (ascending) of `det(lambda I - A)` by the
/// Faddeev-LeVerrier recursion.
fn characteristic_polynomial(a: &DMatrix<C64>) -> Vec<f64> {
    let n = a.nrows();
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    c[n] = C64::new(1.0, 0.0);
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * c[n - k + 1];
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    c.iter().map(|z| z.re).collect()
}

fn horner(c: &[f64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &x| acc * z + x)
}

/// All roots by Durand-Kerner, then Newton-polished on the real axis.
fn real_roots(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let radius = 1.0 + c[..n].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(C64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            let step = horner(c, z[i]) / denom;
            z[i] -= step;
        }
    }
    let deriv: Vec<f64> = (1..=n).map(|k| k as f64 * c[k]).collect();
    let mut roots: Vec<f64> = z
        .iter()
        .map(|r| {
            let mut x = r.re;
            for _ in 0..5 {
                let d = horner(&deriv, C64::new(x, 0.0)).re;
                if d.abs() > 1e-300 {
                    x -= horner(c, C64::new(x, 0.0)).re / d;
                }
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    let h = hermitian(5, 11);
    let roots = real_roots(&characteristic_polynomial(h.as_dmatrix()));
    let ours = eigenvalues(&h).unwrap();
    for (r, l) in roots.iter().zip(&ours) {
        assert!((r - l).abs() <= 1e-9, "root {r} vs eigenvalue {l}");
    }
}

#[test]
fn spectral_function_matches_independent_diagonalization() {
    let p = psd(4, 21);
    let ours = apply_spectral_function(&p, &|t: f64| t.powf(1.5)).unwrap();
    let reference = ref_power(p.hermitian().as_dmatrix(), 1.5);
    assert!(max_abs(&(ours.as_dmatrix() - &reference)) <= 1e-9);
    // Squaring the 3/2 power gives the cube by plain multiplication.
    let m = p.hermitian().as_dmatrix();
    let cube = m * m * m;
    let sq = ours.as_dmatrix() * ours.as_dmatrix();
    assert!(max_abs(&(sq - cube)) <= 1e-9 * (1.0 + max_abs(&(m * m * m))));
}

#[test]
fn psd_power_matches_repeated_multiplication() {
    let p = psd(4, 22);
    let m = p.hermitian().as_dmatrix();
    let ours = psd_power(&p, 3.0).unwrap();
    assert!(max_abs(&(ours.hermitian().as_dmatrix() - m * m * m)) <= 1e-9 * (1.0 + max_abs(&(m * m * m))));
}

#[test]
fn abs_power_of_a_jordan_block() {
    let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
    let ours = matrix_abs_power(&a, 4.0).unwrap();
    // A*A = [[1,1],[1,2]], whose square is [[2,3],[3,5]].
    let expected = ComplexMatrix::from_real_rows(&[&[2.0, 3.0], &[3.0, 5.0]]).unwrap();
    assert!(max_abs(&(ours.hermitian().as_dmatrix() - expected.as_dmatrix())) <= 1e-12);
}

#[test]
fn singular_values_match_nalgebra_svd() {
    let a = single(GeneratorKind::Ginibre, 3, 31);
    let mut reference: Vec<f64> = a.as_dmatrix().clone().svd(false, false).singular_values.iter().copied().collect();
    reference.sort_by(|x, y| y.total_cmp(x));
    let ours = singular_values(&a);
    for (r, s) in reference.iter().zip(&ours) {
        assert!((r - s).abs() <= 1e-10, "{r} vs {s}");
    }
    let tr = trace_abs_power(&a, 4.0).unwrap();
    let expected: f64 = reference.iter().map(|s| s.powi(4)).sum();
    assert!((tr - expected).abs() <= 1e-10 * (1.0 + expected));
    assert!(max_abs(&(matrix_abs_power(&a, 4.0).unwrap().hermitian().as_dmatrix() - ref_abs_power(&a, 4.0))) <= 1e-10);
}

#[test]
fn clarkson_margin_matches_direct_traces() {
    let (a, b) = ginibre_pair(4, 41);
    let p = 2.5;
    let r = check_clarkson_trace(&a, &b, p).unwrap();
    assert!(r.holds);
    let tr = |m: &ComplexMatrix| ref_trace(&ref_abs_power(m, p));
    let (na, nb) = (tr(&a), tr(&b));
    let (s, d) = (tr(&a.add(&b).unwrap()), tr(&a.sub(&b).unwrap()));
    let expected = [
        s + d - 2.0 * (na + nb),
        2f64.powf(p - 1.0) * (na + nb) - (s + d),
        (na + nb) / 2.0 - (s + d) / 2f64.powf(p),
    ];
    let margin = expected.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(expected.iter().all(|&m| m >= 0.0));
    assert!((r.margin - margin).abs() <= 1e-9 * r.scale, "{} vs {margin}", r.margin);
}

/// `|(A+B)/2|^e`, `|(A-B)/2|^e` and `(|A|^e + |B|^e)/2` via nalgebra.
fn ref_sides(a: &ComplexMatrix, b: &ComplexMatrix, e: f64) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let half = C64::new(0.5, 0.0);
    let s = ComplexMatrix::new((a.as_dmatrix() + b.as_dmatrix()) * half).unwrap();
    let d = ComplexMatrix::new((a.as_dmatrix() - b.as_dmatrix()) * half).unwrap();
    let m = (ref_abs_power(a, e) + ref_abs_power(b, e)) * half;
    (ref_abs_power(&s, e), ref_abs_power(&d, e), m)
}

#[test]
fn weak_majorization_matches_sorted_prefix_sums() {
    let (a, b) = ginibre_pair(5, 51);
    let (s, d, m) = ref_sides(&a, &b, 6.0);
    let left = ref_eigenvalues(&(s + d));
    let right = ref_eigenvalues(&m);
    let r = check_weak_majorization(&a, &b, 6.0).unwrap();
    assert!(r.holds);
    for k in 1..=5 {
        let (l, rr): (f64, f64) = (left[..k].iter().sum(), right[..k].iter().sum());
        assert!(l <= rr + 1e-8 * r.scale);
        let det = r.detail(&[k]).unwrap();
        assert!((det.lhs - l).abs() <= 1e-9 * r.scale && (det.rhs - rr).abs() <= 1e-9 * r.scale);
    }
}

#[test]
fn geomean_antinorm_matches_ascending_prefix_products() {
    let (a, b) = ginibre_pair(4, 61);
    let (s, d, m) = ref_sides(&a, &b, 3.0);
    let up = |h: &DMatrix<C64>| {
        let mut v = ref_eigenvalues(h);
        v.reverse();
        v
    };
    let (s, d, m) = (up(&s), up(&d), up(&m));
    let geo = |v: &[f64], k: usize| v[..k].iter().map(|x| x.max(0.0)).product::<f64>().powf(1.0 / k as f64);
    let r = check_antinorm_superadditivity(&a, &b, 3.0, AntinormVariant::Geomean).unwrap();
    assert!(r.holds);
    for k in 1..=4 {
        let det = r.detail(&[k]).unwrap();
        assert!((det.lhs - (geo(&s, k) + geo(&d, k))).abs() <= 1e-9 * r.scale);
        assert!((det.rhs - geo(&m, k)).abs() <= 1e-9 * r.scale);
        assert!(det.lhs <= det.rhs + 1e-8 * r.scale);
    }
}

#[test]
fn weyl_cor4_matches_sorted_eigenvalue_lookup() {
    let (a, b) = ginibre_pair(3, 71);
    let (s, d, m) = ref_sides(&a, &b, 1.0);
    let (s, d, m) = (ref_eigenvalues(&s), ref_eigenvalues(&d), ref_eigenvalues(&m));
    for j in 0..3 {
        for k in 0..3 - j {
            let r = check_weyl_split(&a, &b, 1.0, j, k, WeylForm::Cor4).unwrap();
            assert!(r.holds, "j={j} k={k}");
            let det = &r.details[0];
            assert!((det.lhs - m[j + k]).abs() <= 1e-9 && (det.rhs - (s[j] + d[k])).abs() <= 1e-9);
        }
    }
}

#[test]
fn parallelogram_identity_by_direct_evaluation() {
    let (a, b) = ginibre_pair(6, 81);
    let (am, bm) = (a.as_dmatrix(), b.as_dmatrix());
    let gram = |m: DMatrix<C64>| m.adjoint() * m;
    let left = gram(am + bm) + gram(am - bm);
    let right = (gram(am.clone()) + gram(bm.clone())) * C64::new(2.0, 0.0);
    let scale = 1.0 + max_abs(&left).max(max_abs(&right));
    assert!(max_abs(&(&left - &right)) <= 1e-10 * scale);
    let r = check_parallelogram_identity(&a, &b).unwrap();
    assert!(r.holds && r.details[0].lhs <= 1e-10 * r.scale);
}

#[test]
fn alignment_with_enforced_dominance() {
    let s = psd(4, 91);
    let t0 = psd(4, 92);
    // Shift T until every ranked eigenvalue dominates S's.
    let (ls, lt) = (ref_eigenvalues(s.hermitian().as_dmatrix()), ref_eigenvalues(t0.hermitian().as_dmatrix()));
    let shift = ls.iter().zip(&lt).map(|(a, b)| a - b).fold(0.0, f64::max);
    let t = t0.hermitian().add(&HermitianMatrix::identity(4).scale(shift)).unwrap();
    let w = align_unitary(s.hermitian(), &t).unwrap();
    let w = w.as_dmatrix();
    let rotated = w * s.hermitian().as_dmatrix() * w.adjoint();
    let gap = *ref_eigenvalues(&(t.as_dmatrix() - rotated)).last().unwrap();
    assert!(gap >= -1e-9, "gap {gap:e}");
}

#[test]
fn key2_certificate_gap_by_independent_eigensolver() {
    let (x, y) = (psd(4, 101), psd(4, 102));
    let cert = key2_certificate(&x, &y, &|t: f64| t.powf(1.5), true).unwrap();
    assert_isometries(&cert);
    let gap = independent_gap(&cert);
    assert!(gap >= -1e-9 * cert.scale(), "gap {gap:e}");
    assert!((gap - cert.gap_min_eig).abs() <= 1e-9 * cert.scale());
}

#[test]
fn block_decomposition_three_term_identity() {
    let h = psd(6, 111);
    let (u, v) = block_decomposition(&h).unwrap();
    let m = h.hermitian().as_dmatrix();
    let mut x = DMatrix::<C64>::zeros(6, 6);
    x.view_mut((0, 0), (3, 3)).copy_from(&m.view((0, 0), (3, 3)));
    let mut z = DMatrix::<C64>::zeros(6, 6);
    z.view_mut((3, 3), (3, 3)).copy_from(&m.view((3, 3), (3, 3)));
    let (u, v) = (u.as_dmatrix(), v.as_dmatrix());
    let rebuilt = u * x * u.adjoint() + v * z * v.adjoint();
    assert!(max_abs(&(rebuilt - m)) <= 1e-9 * (1.0 + max_abs(m)));
}

#[test]
fn parallelogram_isometries_by_direct_reconstruction() {
    let (a, b) = ginibre_pair(3, 121);
    let cert = parallelogram_isometries(&a, &b).unwrap();
    assert_isometries(&cert);
    let (am, bm) = (a.as_dmatrix(), b.as_dmatrix());
    let gram = |m: DMatrix<C64>| m.adjoint() * m;
    let mut fixed = DMatrix::<C64>::zeros(6, 6);
    fixed.view_mut((0, 0), (3, 3)).copy_from(&gram(am + bm));
    fixed.view_mut((3, 3), (3, 3)).copy_from(&gram(am - bm));
    let scale = 1.0 + max_abs(&fixed);
    assert!(max_abs(&(cert.lhs.as_dmatrix() - &fixed)) <= 1e-9 * scale);
    assert!(independent_gap(&cert) >= -1e-9 * scale);
}

#[test]
fn cartesian_certificates_verify_independently() {
    let z = single(GeneratorKind::Ginibre, 4, 131);
    let (squared, rooted, _) = cartesian_certificates(&z, &SearchKey1::new(SearchConfig::with_seed(131))).unwrap();
    for cert in [&squared, &rooted] {
        assert_isometries(cert);
        let gap = independent_gap(cert);
        assert!(gap >= -1e-8 * cert.scale(), "{}: gap {gap:e}", cert.statement);
    }
}

#[test]
fn theorem1_search_certificate_gap() {
    let (a, b) = ginibre_pair(3, 141);
    let (cert, trace) = theorem1_search_certificate(&a, &b, 3.0, &SearchConfig::with_seed(141)).unwrap();
    assert!(trace.converged);
    assert_isometries(&cert);
    assert!(independent_gap(&cert) >= -1e-7 * cert.scale());
}

#[test]
fn direct_sum_cm_certificate_gap() {
    let (a, b) = ginibre_pair(3, 151);
    let cert = direct_sum_cm_certificate(&a, &b, 4.0).unwrap();
    assert_isometries(&cert);
    assert!(independent_gap(&cert) >= -1e-7 * cert.scale());
}

#[test]
fn orbit_optimize_on_a_composite_instance() {
    let (a, b) = ginibre_pair(3, 161);
    let (s, d, m) = ref_sides(&a, &b, 3.0);
    let as_psd = |h: DMatrix<C64>| PsdMatrix::new(HermitianMatrix::new(ComplexMatrix::new(h).unwrap()).unwrap()).unwrap();
    let bound = HermitianMatrix::new(ComplexMatrix::new(m).unwrap()).unwrap();
    let terms = [(as_psd(s), None), (as_psd(d), None)];
    let (cert, trace) = orbit_optimize(&terms, &bound, SumDirection::SumLeBound, &SearchConfig::with_seed(161)).unwrap();
    assert!(trace.converged && trace.final_gap >= -1e-7 * cert.scale());
    assert!(independent_gap(&cert) >= -1e-7 * cert.scale());
}

#[test]
fn key1_search_on_noncommuting_pair() {
    let (x, y) = (psd(3, 171), psd(3, 172));
    let commutator = {
        let (x, y) = (x.hermitian().as_dmatrix(), y.hermitian().as_dmatrix());
        max_abs(&(x * y - y * x))
    };
    assert!(commutator > 1e-3);
    let (cert, trace) = key1_certificate(&x, &y, &|t: f64| t.powf(1.5), true, &SearchConfig::with_seed(171)).unwrap();
    assert!(trace.converged);
    assert!(independent_gap(&cert) >= -1e-7 * cert.scale());
}

#[test]
fn theorem2_search_certificate_gap() {
    let (a, b) = ginibre_pair(3, 181);
    let (cert, trace) = theorem2_certificate(&a, &b, 1.5, &SearchConfig::with_seed(181)).unwrap();
    assert!(trace.converged);
    assert!(independent_gap(&cert) >= -1e-7 * cert.scale());
}

#[test]
fn reversed_direct_sum_search_certificate_gap() {
    let (a, b) = ginibre_pair(2, 191);
    for form in [DirectSumForm::FourTerm, DirectSumForm::ScaledCm] {
        let (cert, trace) = direct_sum_power_certificates(&a, &b, 1.0, form, &SearchConfig::with_seed(191)).unwrap();
        assert!(trace.converged, "{form:?}");
        assert_isometries(&cert);
        assert!(independent_gap(&cert) >= -1e-7 * cert.scale(), "{form:?}");
    }
}

#[test]
fn commuting_pair_generator_commutes() {
    let (a, b) = generate_pair(&GeneratorSpec::new(GeneratorKind::CommutingPair, 4, 2)).unwrap();
    let (a, b) = (a.as_dmatrix(), b.as_dmatrix());
    let scale = 1.0 + max_abs(a).max(max_abs(b));
    assert!(max_abs(&(a * b - b * a)) <= 1e-12 * scale * scale);
}
