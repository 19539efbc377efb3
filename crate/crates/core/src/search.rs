//! Certificate search over products of unitary groups for the existence
//! statements that have no explicit construction.
//!
//! The objective is `f(U_1..U_m) = lambda_max(sum_i U_i S_i U_i* - B)` (or
//! `lambda_max(B - sum_i U_i S_i U_i*)` for the reversed direction), so a
//! certificate is valid exactly when `f <= 0`. Each iteration takes a
//! backtracking descent step along a central-difference gradient in the
//! skew-Hermitian coordinates, retracts through the matrix exponential, and
//! then runs one exact block-coordinate sweep: for fixed `j != i`, the
//! eigen-alignment of `S_i` against `B - sum_{j != i}` minimizes `f` over
//! `U_i` (a consequence of Weyl's inequality), so the sweep never increases
//! the objective.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::certificates::{
    commuting_key1, frame_map, herm_fn, orbit_composite, block_embedding, CertError, Certificate,
    Direction, Key1Provider, Key1Witness, Side, Transform,
};
use crate::checks::DirectSumForm;
use crate::hermitian::{
    apply_spectral_function, matrix_abs_power, require_square_pair, spectral_decomposition,
    ComplexMatrix, HermitianMatrix, MatrixError, PsdMatrix, C64,
};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub max_iterations: usize,
    pub restarts: usize,
    pub step_init: f64,
    pub grad_eps: f64,
    pub seed: u64,
    /// Acceptance threshold on the gap, relative to the certificate scale.
    pub target_gap: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            restarts: 8,
            step_init: 0.1,
            grad_eps: 1e-5,
            seed: 0,
            target_gap: -1e-7,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), CertError> {
        let bad = |m: &str| Err(CertError::Config(m.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return bad("step_init must be a positive finite number");
        }
        if !(self.grad_eps > 0.0 && self.grad_eps.is_finite()) {
            return bad("grad_eps must be a positive finite number");
        }
        if !(self.target_gap <= 0.0 && self.target_gap.is_finite()) {
            return bad("target_gap must be finite and <= 0");
        }
        Ok(())
    }

    /// Certificate tolerance implied by the acceptance threshold.
    pub fn tolerance(&self) -> f64 {
        tol::PSD_TOL.max(self.target_gap.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub iterations_used: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub final_gap: f64,
    /// Objective values (`-gap`) at accepted iterates; nonincreasing within
    /// each restart, and each restart opens a new segment.
    pub objective_history: Vec<f64>,
    #[serde(skip)]
    tol_used: f64,
}

impl SearchTrace {
    pub fn tolerance(&self) -> f64 {
        self.tol_used
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumDirection {
    SumLeBound,
    SumGeBound,
}

/// `n^2` basis of the skew-Hermitian `n x n` matrices: `i e_kk`, then
/// `e_kl - e_lk` and `i (e_kl + e_lk)` for `k < l`.
pub fn skew_hermitian_basis(n: usize) -> Vec<DMatrix<C64>> {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut m = DMatrix::zeros(n, n);
        m[(k, k)] = i;
        out.push(m);
    }
    for k in 0..n {
        for l in k + 1..n {
            let mut re = DMatrix::zeros(n, n);
            re[(k, l)] = one;
            re[(l, k)] = -one;
            out.push(re);
            let mut im = DMatrix::zeros(n, n);
            im[(k, l)] = i;
            im[(l, k)] = i;
            out.push(im);
        }
    }
    out
}

/// `exp(K)` for skew-Hermitian `K`, via the spectral decomposition of the
/// Hermitian matrix `-iK`.
pub fn expm_skew(k: &DMatrix<C64>) -> Result<DMatrix<C64>, MatrixError> {
    let h = HermitianMatrix::from_dmatrix_symmetrized(k * C64::new(0.0, -1.0));
    let d = spectral_decomposition(&h)?;
    let phases: Vec<C64> = d.eigenvalues().iter().map(|&t| C64::new(0.0, t).exp()).collect();
    Ok(d.synthesize_complex(&phases).into_dmatrix())
}

/// Haar-distributed `n x n` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(q)
}

fn sym(m: DMatrix<C64>) -> HermitianMatrix {
    HermitianMatrix::from_dmatrix_symmetrized(m)
}

/// Evaluation state of the objective for fixed terms, bound and direction.
struct Objective<'a> {
    terms: &'a [DMatrix<C64>],
    bound: &'a DMatrix<C64>,
    sign: f64,
    scale: f64,
}

impl Objective<'_> {
    fn conj(u: &DMatrix<C64>, s: &DMatrix<C64>) -> DMatrix<C64> {
        u * s * u.adjoint()
    }

    fn parts(&self, us: &[DMatrix<C64>]) -> Vec<DMatrix<C64>> {
        us.iter().zip(self.terms).map(|(u, s)| Self::conj(u, s)).collect()
    }

    fn gap_matrix(&self, parts: &[DMatrix<C64>]) -> DMatrix<C64> {
        let mut d = -self.bound.clone();
        for p in parts {
            d += p;
        }
        d * C64::new(self.sign, 0.0)
    }

    /// `(lambda_1, lambda_1 - lambda_2)` of the gap matrix.
    fn top(&self, d: DMatrix<C64>) -> Result<(f64, f64), MatrixError> {
        let ev = crate::hermitian::eigenvalues(&sym(d))?;
        let second = ev.get(1).copied().unwrap_or(f64::NEG_INFINITY);
        Ok((ev[0], ev[0] - second))
    }

    fn value(&self, us: &[DMatrix<C64>]) -> Result<(f64, f64), MatrixError> {
        self.top(self.gap_matrix(&self.parts(us)))
    }

    /// One exact alignment pass over the terms, in index order.
    fn sweep(&self, us: &mut [DMatrix<C64>]) -> Result<(), MatrixError> {
        let mut parts = self.parts(us);
        for i in 0..us.len() {
            let mut rest = self.bound.clone();
            for (j, p) in parts.iter().enumerate() {
                if j != i {
                    rest -= p;
                }
            }
            let target = spectral_decomposition(&sym(rest))?;
            let source = spectral_decomposition(&sym(self.terms[i].clone()))?;
            us[i] = frame_map(&source, &target).into_dmatrix();
            parts[i] = Self::conj(&us[i], &self.terms[i]);
        }
        Ok(())
    }
}

/// Result of one restart.
struct RestartOutcome {
    unitaries: Vec<DMatrix<C64>>,
    objective: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn run_restart(
    obj: &Objective<'_>,
    mut us: Vec<DMatrix<C64>>,
    cfg: &SearchConfig,
    basis: &[DMatrix<C64>],
    probes: &[(DMatrix<C64>, DMatrix<C64>)],
) -> Result<Option<RestartOutcome>, MatrixError> {
    let mut f = obj.value(&us)?.0;
    let mut candidate = us.clone();
    obj.sweep(&mut candidate)?;
    let (fc, _) = obj.value(&candidate)?;
    if fc <= f {
        us = candidate;
        f = fc;
    }
    if !f.is_finite() {
        return Ok(None);
    }
    let mut history = vec![f];
    let mut step = cfg.step_init;
    let mut iterations = 0;
    let min_step = 1e-14;

    while iterations < cfg.max_iterations && f > 0.0 {
        iterations += 1;
        let parts = obj.parts(&us);
        let base = obj.gap_matrix(&parts);
        let (_, top_gap) = obj.top(base.clone())?;

        let mut grad = Vec::with_capacity(us.len() * basis.len());
        for (i, u) in us.iter().enumerate() {
            let without = &base - &parts[i] * C64::new(obj.sign, 0.0);
            for (plus, minus) in probes {
                let sp = Objective::conj(&(u * plus), &obj.terms[i]) * C64::new(obj.sign, 0.0);
                let sm = Objective::conj(&(u * minus), &obj.terms[i]) * C64::new(obj.sign, 0.0);
                let fp = obj.top(&without + sp)?.0;
                let fm = obj.top(&without + sm)?.0;
                grad.push((fp - fm) / (2.0 * cfg.grad_eps));
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Ok(None);
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }

        let damped = top_gap < 1e-6 * obj.scale;
        let mut trial_step = if damped { step * 0.25 } else { step };
        let mut accepted = None;
        while trial_step >= min_step {
            let mut trial = us.clone();
            for (i, t) in trial.iter_mut().enumerate() {
                let coords = &grad[i * basis.len()..(i + 1) * basis.len()];
                let mut k = DMatrix::zeros(t.nrows(), t.ncols());
                for (b, c) in basis.iter().zip(coords) {
                    k += b * C64::new(-trial_step * c / norm, 0.0);
                }
                *t = &*t * expm_skew(&k)?;
            }
            let (ft, _) = obj.value(&trial)?;
            if ft.is_nan() {
                return Ok(None);
            }
            if ft < f {
                accepted = Some((trial, ft));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((mut trial, mut ft)) = accepted else {
            break;
        };
        step = (trial_step * 2.0).min(1.0);

        let mut swept = trial.clone();
        obj.sweep(&mut swept)?;
        let (fs, _) = obj.value(&swept)?;
        if fs <= ft {
            trial = swept;
            ft = fs;
        }
        us = trial;
        f = ft;
        history.push(f);
    }
    Ok(Some(RestartOutcome {
        unitaries: us,
        objective: f,
        iterations,
        history,
    }))
}

/// Minimizes `lambda_max` of the certificate gap over the unitary orbits of
/// the terms. `terms[i].1` is the starting unitary for restart 0; `None`
/// starts from the eigen-alignment of `S_i` against the bound. The returned
/// certificate has the transformed sum on the left.
pub fn orbit_optimize(
    terms: &[(PsdMatrix, Option<ComplexMatrix>)],
    bound: &HermitianMatrix,
    direction: SumDirection,
    cfg: &SearchConfig,
) -> Result<(Certificate, SearchTrace), CertError> {
    cfg.validate()?;
    if terms.is_empty() {
        return Err(MatrixError::Empty.into());
    }
    let n = bound.dim();
    for (s, u) in terms {
        if s.dim() != n {
            return Err(MatrixError::DimensionMismatch { left: (s.dim(), s.dim()), right: (n, n) }.into());
        }
        if let Some(u) = u {
            if u.shape() != (n, n) || !u.is_unitary(tol::ORTHO_TOL) {
                return Err(CertError::Config("initial transform must be an n x n unitary".into()));
            }
        }
    }

    let term_mats: Vec<DMatrix<C64>> = terms.iter().map(|(s, _)| s.hermitian().as_dmatrix().clone()).collect();
    let bound_mat = bound.as_dmatrix().clone();
    let term_norm: f64 = terms.iter().map(|(s, _)| s.hermitian().spectral_norm()).sum();
    let obj = Objective {
        terms: &term_mats,
        bound: &bound_mat,
        sign: match direction {
            SumDirection::SumLeBound => 1.0,
            SumDirection::SumGeBound => -1.0,
        },
        scale: 1.0 + term_norm.max(bound.spectral_norm()),
    };

    let basis = skew_hermitian_basis(n);
    let probes = basis
        .iter()
        .map(|b| Ok((expm_skew(&(b * C64::new(cfg.grad_eps, 0.0)))?, expm_skew(&(b * C64::new(-cfg.grad_eps, 0.0)))?)))
        .collect::<Result<Vec<_>, MatrixError>>()?;

    let mut history = Vec::new();
    let mut iterations_used = 0;
    let mut restarts_used = 0;
    let mut best: Option<(f64, Vec<DMatrix<C64>>)> = None;

    for restart in 0..=cfg.restarts {
        restarts_used = restart + 1;
        let start: Vec<DMatrix<C64>> = if restart == 0 {
            let target = spectral_decomposition(bound)?;
            terms
                .iter()
                .map(|(s, u)| match u {
                    Some(u) => Ok(u.as_dmatrix().clone()),
                    None => Ok(frame_map(&spectral_decomposition(s.hermitian())?, &target).into_dmatrix()),
                })
                .collect::<Result<_, MatrixError>>()?
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(restart as u64);
            (0..terms.len()).map(|_| haar_unitary(&mut rng, n).into_dmatrix()).collect()
        };
        let Some(outcome) = run_restart(&obj, start, cfg, &basis, &probes)? else {
            continue;
        };
        iterations_used += outcome.iterations;
        history.extend(outcome.history);
        // Strict comparison keeps the lowest restart index on ties.
        if best.as_ref().is_none_or(|(f, _)| outcome.objective < *f) {
            best = Some((outcome.objective, outcome.unitaries));
        }
        let (f, _) = best.as_ref().expect("just set");
        if -f >= cfg.target_gap * obj.scale {
            break;
        }
    }

    let unitaries = match best {
        Some((_, us)) => us,
        None => vec![DMatrix::identity(n, n); terms.len()],
    };
    let tol_used = cfg.tolerance();
    let cert = Certificate::assemble(
        "orbit",
        match direction {
            SumDirection::SumLeBound => Direction::LhsLeRhs,
            SumDirection::SumGeBound => Direction::LhsGeRhs,
        },
        unitaries.into_iter().map(|u| Transform::new(ComplexMatrix::from_dmatrix(u))).collect(),
        terms.iter().map(|(s, _)| s.hermitian().clone()).collect(),
        Side::Lhs,
        bound.clone(),
        tol_used,
    )?;
    let trace = SearchTrace {
        iterations_used,
        restarts_used,
        converged: cert.gap_min_eig >= cfg.target_gap * cert.scale(),
        final_gap: cert.gap_min_eig,
        objective_history: history,
        tol_used,
    };
    Ok((cert, trace))
}

/// `f(U)` as defined for [`orbit_optimize`].
pub fn orbit_objective(
    terms: &[HermitianMatrix],
    unitaries: &[ComplexMatrix],
    bound: &HermitianMatrix,
    direction: SumDirection,
) -> Result<f64, MatrixError> {
    let term_mats: Vec<_> = terms.iter().map(|t| t.as_dmatrix().clone()).collect();
    let obj = Objective {
        terms: &term_mats,
        bound: bound.as_dmatrix(),
        sign: if direction == SumDirection::SumLeBound { 1.0 } else { -1.0 },
        scale: 1.0,
    };
    let us: Vec<_> = unitaries.iter().map(|u| u.as_dmatrix().clone()).collect();
    Ok(obj.value(&us)?.0)
}

/// Analytic derivative of `t -> f(U_i exp(t K_i))` at `t = 0`, valid where
/// the top eigenvalue of the gap is simple: `v* (sum_i U_i [K_i, S_i] U_i*) v`
/// with `v` the top eigenvector (negated for the reversed direction).
pub fn orbit_directional_derivative(
    terms: &[HermitianMatrix],
    unitaries: &[ComplexMatrix],
    directions: &[ComplexMatrix],
    bound: &HermitianMatrix,
    direction: SumDirection,
) -> Result<f64, MatrixError> {
    let sign = if direction == SumDirection::SumLeBound { 1.0 } else { -1.0 };
    let n = bound.dim();
    let mut d = -bound.as_dmatrix().clone();
    let mut dot = DMatrix::<C64>::zeros(n, n);
    for ((s, u), k) in terms.iter().zip(unitaries).zip(directions) {
        let (s, u, k) = (s.as_dmatrix(), u.as_dmatrix(), k.as_dmatrix());
        d += u * s * u.adjoint();
        dot += u * (k * s - s * k) * u.adjoint();
    }
    let dec = spectral_decomposition(&sym(d * C64::new(sign, 0.0)))?;
    let v = dec.frame().as_dmatrix().column(0).into_owned();
    Ok(sign * (v.adjoint() * dot * v)[(0, 0)].re)
}

/// One sampled point of the gradient sanity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub analytic: f64,
    pub central_difference: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub samples: Vec<GradientSample>,
    /// Points discarded because the top eigenvalue was nearly degenerate.
    pub resampled: usize,
    pub max_relative_error: f64,
}

/// Compares the analytic directional derivative with a central difference at
/// `count` random points (two `n x n` PSD terms, random Hermitian bound,
/// Haar unitaries, Gaussian skew-Hermitian directions). Points whose top
/// eigenvalue gap is below `1e-6 * scale` are resampled.
///
/// Requires `n >= 2`: a `1 x 1` orbit is a single point, so every
/// directional derivative vanishes and the ratio would compare rounding
/// against rounding.
pub fn gradient_check(seed: u64, count: usize, n: usize) -> Result<GradientCheck, MatrixError> {
    if n < 2 {
        return Err(MatrixError::TooSmall { dim: n, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = skew_hermitian_basis(n);
    let mut samples = Vec::with_capacity(count);
    let mut resampled = 0;
    let h = 1e-6;
    while samples.len() < count {
        let terms: Vec<HermitianMatrix> = (0..2).map(|_| gaussian(&mut rng, n).gram()).collect();
        let g = gaussian(&mut rng, n);
        let bound = HermitianMatrix::from_dmatrix_symmetrized(
            (g.as_dmatrix() + g.as_dmatrix().adjoint()) * C64::new(0.5, 0.0),
        );
        let us: Vec<ComplexMatrix> = (0..2).map(|_| haar_unitary(&mut rng, n)).collect();
        let ks: Vec<DMatrix<C64>> = (0..2)
            .map(|_| {
                basis.iter().fold(DMatrix::zeros(n, n), |acc, b| {
                    let c: f64 = rng.sample(StandardNormal);
                    acc + b * C64::new(c, 0.0)
                })
            })
            .collect();
        let direction = if rng.random::<bool>() { SumDirection::SumLeBound } else { SumDirection::SumGeBound };

        let sign = if direction == SumDirection::SumLeBound { 1.0 } else { -1.0 };
        let mut d = -bound.as_dmatrix().clone();
        for (s, u) in terms.iter().zip(&us) {
            d += u.as_dmatrix() * s.as_dmatrix() * u.as_dmatrix().adjoint();
        }
        let ev = crate::hermitian::eigenvalues(&sym(d * C64::new(sign, 0.0)))?;
        let scale = 1.0 + ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if ev[0] - ev[1] < 1e-6 * scale {
            resampled += 1;
            continue;
        }

        let kd: Vec<ComplexMatrix> = ks.iter().map(|k| ComplexMatrix::from_dmatrix(k.clone())).collect();
        let analytic = orbit_directional_derivative(&terms, &us, &kd, &bound, direction)?;
        let moved = |t: f64| -> Result<Vec<ComplexMatrix>, MatrixError> {
            us.iter()
                .zip(&ks)
                .map(|(u, k)| Ok(ComplexMatrix::from_dmatrix(u.as_dmatrix() * expm_skew(&(k * C64::new(t, 0.0)))?)))
                .collect()
        };
        let fp = orbit_objective(&terms, &moved(h)?, &bound, direction)?;
        let fm = orbit_objective(&terms, &moved(-h)?, &bound, direction)?;
        let central_difference = (fp - fm) / (2.0 * h);
        let relative_error = (analytic - central_difference).abs() / analytic.abs().max(central_difference.abs()).max(1e-8);
        samples.push(GradientSample { analytic, central_difference, relative_error });
    }
    let max_relative_error = samples.iter().map(|s| s.relative_error).fold(0.0, f64::max);
    Ok(GradientCheck { samples, resampled, max_relative_error })
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }))
}

/// Certificate for `g(X+Y) >= U0 g(X) U0* + V0 g(Y) V0*` (convex `g` with
/// `g(0) <= 0`) or the reversed inequality (concave `g` with `g(0) >= 0`).
/// Commuting inputs take the exact fast path with no iterations.
pub fn key1_certificate(
    x: &PsdMatrix,
    y: &PsdMatrix,
    g: &dyn Fn(f64) -> f64,
    convex: bool,
    cfg: &SearchConfig,
) -> Result<(Certificate, SearchTrace), CertError> {
    cfg.validate()?;
    let gx = apply_spectral_function(x, g)?;
    let gy = apply_spectral_function(y, g)?;
    let bound = herm_fn(&x.hermitian().add(y.hermitian())?, g)?;
    let direction = if convex { SumDirection::SumLeBound } else { SumDirection::SumGeBound };

    if let Ok(witness) = commuting_key1(x, y, g, convex)? {
        let cert = Certificate::assemble(
            "key1",
            if convex { Direction::LhsLeRhs } else { Direction::LhsGeRhs },
            vec![Transform::new(witness.u0), Transform::new(witness.v0)],
            vec![gx, gy],
            Side::Lhs,
            bound,
            tol::PSD_TOL,
        )?;
        let trace = SearchTrace {
            iterations_used: 0,
            restarts_used: 0,
            converged: cert.gap_min_eig >= cfg.target_gap * cert.scale(),
            final_gap: cert.gap_min_eig,
            objective_history: vec![-cert.gap_min_eig],
            tol_used: tol::PSD_TOL,
        };
        return Ok((cert.flipped("key1"), trace));
    }

    let terms = [
        (PsdMatrix::from_parts(gx, 0.0), None),
        (PsdMatrix::from_parts(gy, 0.0), None),
    ];
    let (cert, trace) = orbit_optimize(&terms, &bound, direction, cfg)?;
    Ok((cert.flipped("key1"), trace))
}

/// Search-backed superadditivity provider for the composite certificates.
#[derive(Debug, Clone, Default)]
pub struct SearchKey1 {
    pub cfg: SearchConfig,
}

impl SearchKey1 {
    pub fn new(cfg: SearchConfig) -> Self {
        Self { cfg }
    }
}

impl Key1Provider for SearchKey1 {
    fn provide(
        &self,
        x: &PsdMatrix,
        y: &PsdMatrix,
        g: &(dyn Fn(f64) -> f64 + Sync),
        convex: bool,
    ) -> Result<Key1Witness, CertError> {
        let (cert, trace) = key1_certificate(x, y, g, convex, &self.cfg)?;
        let mut transforms = cert.transforms.into_iter();
        Ok(Key1Witness {
            u0: transforms.next().expect("two transforms").matrix,
            v0: transforms.next().expect("two transforms").matrix,
            gap: cert.gap_min_eig,
            trace: Some(trace),
        })
    }
}

/// Re-judges a key1 trace against the composite certificate it fed.
fn composite_trace(cert: &Certificate, trace: Option<SearchTrace>, cfg: &SearchConfig) -> SearchTrace {
    let mut trace = trace.unwrap_or(SearchTrace {
        iterations_used: 0,
        restarts_used: 0,
        converged: false,
        final_gap: 0.0,
        objective_history: vec![-cert.gap_min_eig],
        tol_used: cert.tol_used,
    });
    trace.final_gap = cert.gap_min_eig;
    trace.converged = cert.gap_min_eig >= cfg.target_gap * cert.scale();
    trace
}

/// `U |(A+B)/2|^q U* + V |(A-B)/2|^q V* >= (|A|^q + |B|^q)/2` for `0 < q < 2`.
pub fn theorem2_certificate(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    q: f64,
    cfg: &SearchConfig,
) -> Result<(Certificate, SearchTrace), CertError> {
    if !(q > 0.0 && q < 2.0) {
        return Err(CertError::Regime { exponent: q, regime: "0 < q < 2" });
    }
    let (cert, trace) = orbit_composite(a, b, q, &SearchKey1::new(cfg.clone()), false, "theorem2")?;
    let trace = composite_trace(&cert, trace, cfg);
    Ok((cert, trace))
}

/// Theorem 1 with the search-backed provider; the trace is re-judged
/// against the composite certificate.
pub fn theorem1_search_certificate(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    p: f64,
    cfg: &SearchConfig,
) -> Result<(Certificate, SearchTrace), CertError> {
    let (cert, trace) = crate::certificates::theorem1_certificate(a, b, p, &SearchKey1::new(cfg.clone()))?;
    let trace = composite_trace(&cert, trace, cfg);
    Ok((cert, trace))
}

/// Direct-sum power certificates with `2n x n` isometries.
///
/// * `FourTerm`, `p > 2`: `|A+B|^p ⊕ |A-B|^p >= sum of four placed copies of
///   |A|^p, |B|^p, |A|^p, |B|^p`; reversed for `0 < q < 2`.
/// * `ScaledCm`: `|(A+B)/2|^e ⊕ |(A-B)/2|^e` against
///   `(U M U* + V M V*)/2`, `M = (|A|^e + |B|^e)/2`: `<=` for `e > 2`, `>=`
///   for `0 < e < 2`.
///
/// Isometries are searched as `2n x 2n` unitaries acting on `S ⊕ 0`, then
/// compressed by the first coordinate embedding.
pub fn direct_sum_power_certificates(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    exponent: f64,
    form: DirectSumForm,
    cfg: &SearchConfig,
) -> Result<(Certificate, SearchTrace), CertError> {
    let n = require_square_pair(a, b)?;
    if !(exponent > 0.0 && exponent.is_finite()) || exponent == 2.0 {
        return Err(CertError::Regime { exponent, regime: "p > 2 or 0 < q < 2" });
    }
    let convex = exponent > 2.0;
    let pow = |m: &ComplexMatrix| -> Result<HermitianMatrix, MatrixError> {
        Ok(matrix_abs_power(m, exponent)?.into_hermitian())
    };
    let (terms, lhs, sum_direction, statement) = match form {
        DirectSumForm::FourTerm => {
            let (pa, pb) = (pow(a)?, pow(b)?);
            let lhs = pow(&a.add(b)?)?.direct_sum(&pow(&a.sub(b)?)?);
            let dir = if convex { SumDirection::SumLeBound } else { SumDirection::SumGeBound };
            let name = if convex { "direct_sum_power" } else { "direct_sum_power_reversed" };
            (vec![pa.clone(), pb.clone(), pa, pb], lhs, dir, name)
        }
        DirectSumForm::ScaledCm => {
            let m = pow(a)?.add(&pow(b)?)?.scale(0.25);
            let lhs = pow(&a.add(b)?.scale_real(0.5))?.direct_sum(&pow(&a.sub(b)?.scale_real(0.5))?);
            let dir = if convex { SumDirection::SumGeBound } else { SumDirection::SumLeBound };
            let name = if convex { "direct_sum_cm" } else { "direct_sum_cm_reversed" };
            (vec![m.clone(), m], lhs, dir, name)
        }
    };
    let padded: Vec<(PsdMatrix, Option<ComplexMatrix>)> = terms
        .iter()
        .map(|t| (PsdMatrix::from_parts(t.pad_zeros(n), 0.0), None))
        .collect();
    let (full, trace) = orbit_optimize(&padded, &lhs, sum_direction, cfg)?;
    let embed = block_embedding(n, 0);
    let transforms = full
        .transforms
        .iter()
        .map(|t| Ok(Transform::new(t.matrix.mul(&embed)?)))
        .collect::<Result<Vec<_>, MatrixError>>()?;
    let cert = Certificate::assemble(
        statement,
        full.direction,
        transforms,
        terms,
        Side::Lhs,
        lhs,
        full.tol_used,
    )?
    .flipped(statement);
    Ok((cert, trace))
}
