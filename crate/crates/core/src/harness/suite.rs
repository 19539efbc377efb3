//! Suite cells: each cell draws one generator instance and runs every
//! operation of its suite over the exponent grids.

use std::time::Instant;

use rayon::prelude::*;

use super::oracle::{self, CheckOp};
use super::{
    derive_seed, generate_pair, CaseRecord, GeneratorKind, GeneratorSpec, HarnessError, Outcome, SuiteConfig,
    SuiteName, SuiteReport,
};
use crate::certificates::{
    align_unitary, block_decomposition, cartesian_certificates, direct_sum_cm_certificate, key2_certificate,
    parallelogram_isometries, theorem1_certificate, CertError, Certificate, CommutingKey1,
};
use crate::checks::{
    check_antinorm_superadditivity, check_cartesian, check_clarkson_trace, check_direct_sum,
    check_parallelogram_identity, check_uniform_convexity, check_weak_majorization, check_weyl_split,
    AntinormVariant, CartesianReading, CheckError, CheckResult, DirectSumForm, WeylForm,
};
use crate::hermitian::{
    apply_spectral_function, matrix_abs_power, psd_gap, ComplexMatrix, HermitianMatrix, PsdMatrix, C64,
};
use crate::search::{
    direct_sum_power_certificates, gradient_check, key1_certificate, orbit_optimize, theorem1_search_certificate,
    theorem2_certificate, SearchConfig, SearchKey1, SearchTrace, SumDirection,
};
use crate::tol;

/// Every operation the `all` suite must invoke at least once.
pub const REQUIRED_OPERATIONS: [&str; 20] = [
    "check_clarkson_trace",
    "check_weak_majorization",
    "check_antinorm_superadditivity",
    "check_weyl_split",
    "check_parallelogram_identity",
    "check_uniform_convexity",
    "check_direct_sum",
    "check_cartesian",
    "align_unitary",
    "key2_certificate",
    "block_decomposition",
    "parallelogram_isometries",
    "cartesian_certificates",
    "theorem1_certificate",
    "direct_sum_cm_certificate",
    "orbit_optimize",
    "key1_certificate",
    "theorem2_certificate",
    "direct_sum_power_certificates",
    "gradient_check",
];

struct Cell {
    index: usize,
    suite: SuiteName,
    spec: GeneratorSpec,
}

fn cells(suite: SuiteName, cfg: &SuiteConfig) -> Vec<Cell> {
    let components: Vec<SuiteName> = if suite == SuiteName::All {
        SuiteName::COMPONENTS.to_vec()
    } else {
        vec![suite]
    };
    let mut out = Vec::new();
    for component in components {
        let dims = match component {
            SuiteName::Search => &cfg.search_dims,
            _ => &cfg.dims,
        };
        for &kind in &cfg.generators {
            for &dim in dims {
                if kind == GeneratorKind::Scalar && dim != 1 {
                    continue;
                }
                for _ in 0..cfg.trials {
                    let index = out.len();
                    out.push(Cell {
                        index,
                        suite: component,
                        spec: GeneratorSpec {
                            kind,
                            dim,
                            seed: derive_seed(cfg.seed, index as u64),
                            scale: cfg.scale,
                        },
                    });
                }
            }
        }
    }
    out
}

/// Runs a suite. Cells execute on the rayon pool and are collected in cell
/// order, so the report does not depend on scheduling.
pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> Result<SuiteReport, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let cells = cells(name, cfg);
    let per_cell: Vec<Vec<CaseRecord>> = cells
        .par_iter()
        .map(|cell| run_cell(cell, cfg))
        .collect::<Result<_, _>>()?;
    let mut cases: Vec<CaseRecord> = per_cell.into_iter().flatten().collect();

    let gradient = if matches!(name, SuiteName::Search | SuiteName::All) {
        let seed = derive_seed(cfg.seed, u64::MAX);
        let check = gradient_check(seed, cfg.gradient_points, 3)?;
        cases.push(CaseRecord {
            cell: cells.len(),
            suite: SuiteName::Search,
            generator: GeneratorSpec::new(GeneratorKind::Ginibre, 3, seed),
            operation: "gradient_check".into(),
            label: "directional_derivative".into(),
            exponent: None,
            outcome: if check.max_relative_error <= 1e-4 { Outcome::Pass } else { Outcome::Fail },
            margin: Some(1e-4 - check.max_relative_error),
            gap: None,
            scalar_oracle: None,
            trace: None,
            error: None,
        });
        Some(check)
    } else {
        None
    };

    let mut report = SuiteReport::from_cases(name, cfg.clone(), cases, gradient);
    report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

struct Ctx<'a> {
    cell: &'a Cell,
    cfg: &'a SuiteConfig,
    a: ComplexMatrix,
    b: ComplexMatrix,
    scalars: Option<(C64, C64)>,
    out: Vec<CaseRecord>,
}

fn run_cell(cell: &Cell, cfg: &SuiteConfig) -> Result<Vec<CaseRecord>, HarnessError> {
    let (a, b) = generate_pair(&cell.spec)?;
    let scalars = (cell.spec.dim == 1).then(|| (a.get(0, 0), b.get(0, 0)));
    let mut ctx = Ctx { cell, cfg, a, b, scalars, out: Vec::new() };
    match cell.suite {
        SuiteName::Identities => ctx.identities(),
        SuiteName::Trace => ctx.trace(),
        SuiteName::Majorization => ctx.majorization(),
        SuiteName::Eigenvalue => ctx.eigenvalue(),
        SuiteName::Certificates => ctx.certificates(),
        SuiteName::Search => ctx.search(),
        SuiteName::All => unreachable!("expanded into components"),
    }
    Ok(ctx.out)
}

fn run_check(op: CheckOp, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<CheckResult, CheckError> {
    match op {
        CheckOp::Clarkson { p } => check_clarkson_trace(a, b, p),
        CheckOp::WeakMajorization { p } => check_weak_majorization(a, b, p),
        CheckOp::Antinorm { p, variant } => check_antinorm_superadditivity(a, b, p, variant),
        CheckOp::Weyl { exponent, j, k, form } => check_weyl_split(a, b, exponent, j, k, form),
        CheckOp::Parallelogram => check_parallelogram_identity(a, b),
        CheckOp::UniformConvexity { p } => check_uniform_convexity(a, b, p),
        CheckOp::DirectSum { exponent, form } => check_direct_sum(a, b, exponent, form),
        CheckOp::Cartesian { reading } => check_cartesian(a, reading),
    }
}

fn operation_of(op: CheckOp) -> &'static str {
    match op {
        CheckOp::Clarkson { .. } => "check_clarkson_trace",
        CheckOp::WeakMajorization { .. } => "check_weak_majorization",
        CheckOp::Antinorm { .. } => "check_antinorm_superadditivity",
        CheckOp::Weyl { .. } => "check_weyl_split",
        CheckOp::Parallelogram => "check_parallelogram_identity",
        CheckOp::UniformConvexity { .. } => "check_uniform_convexity",
        CheckOp::DirectSum { .. } => "check_direct_sum",
        CheckOp::Cartesian { .. } => "check_cartesian",
    }
}

/// A serialized copy re-verifies on its own.
pub(crate) fn round_trip_ok(cert: &Certificate) -> bool {
    serde_json::to_string(cert)
        .ok()
        .and_then(|s| serde_json::from_str::<Certificate>(&s).ok())
        .is_some_and(|back| back.verify().valid)
}

fn search_outcome(cert: &Certificate, trace: &SearchTrace) -> Outcome {
    if !trace.converged {
        Outcome::NotConverged
    } else if cert.verify().valid && round_trip_ok(cert) {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn pass_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn diag_matches(h: &HermitianMatrix, expected: &[f64]) -> bool {
    expected.iter().enumerate().all(|(i, &e)| oracle::close(h.get(i, i).re, e, 1.0))
        && h.max_abs() <= expected.iter().fold(0.0f64, |m, x| m.max(x.abs())) * (1.0 + 1e-9) + 1e-12
}

impl Ctx<'_> {
    fn record(&self, operation: &str, label: &str, exponent: Option<f64>) -> CaseRecord {
        CaseRecord {
            cell: self.cell.index,
            suite: self.cell.suite,
            generator: self.cell.spec,
            operation: operation.to_string(),
            label: label.to_string(),
            exponent,
            outcome: Outcome::Pass,
            margin: None,
            gap: None,
            scalar_oracle: None,
            trace: None,
            error: None,
        }
    }

    fn error(&mut self, operation: &str, label: &str, exponent: Option<f64>, err: impl std::fmt::Display) {
        let mut r = self.record(operation, label, exponent);
        r.outcome = Outcome::Fail;
        r.error = Some(err.to_string());
        self.out.push(r);
    }

    fn is_commuting(&self) -> bool {
        self.cell.spec.kind == GeneratorKind::CommutingPair
    }

    fn searchable(&self) -> bool {
        self.cfg.search_dims.contains(&self.cell.spec.dim)
    }

    fn search_cfg(&self, salt: u64) -> SearchConfig {
        SearchConfig {
            seed: derive_seed(self.cell.spec.seed, salt),
            ..self.cfg.search.clone()
        }
    }

    /// Runs a check; `extra` can veto a holding result.
    fn check_with(&mut self, op: CheckOp, exponent: Option<f64>, extra: impl Fn(&CheckResult) -> bool) {
        let operation = operation_of(op);
        match run_check(op, &self.a, &self.b) {
            Ok(r) => {
                let mut rec = self.record(operation, &r.name, exponent);
                rec.outcome = pass_if(r.holds && r.details_consistent() && extra(&r));
                rec.margin = Some(r.margin);
                rec.scalar_oracle = self.scalars.map(|(a, b)| oracle::check_agrees(&r, op, a, b));
                self.out.push(rec);
            }
            Err(e) => self.error(operation, operation, exponent, e),
        }
    }

    fn check(&mut self, op: CheckOp, exponent: Option<f64>) {
        self.check_with(op, exponent, |_| true);
    }

    fn all_exponents(&self) -> Vec<f64> {
        self.cfg.p_grid.iter().chain(&self.cfg.q_grid).copied().collect()
    }

    fn identities(&mut self) {
        self.check(CheckOp::Parallelogram, None);
        self.parallelogram_isometries();
        self.block_decomposition();
    }

    fn parallelogram_isometries(&mut self) {
        match parallelogram_isometries(&self.a, &self.b) {
            Ok(cert) => {
                let v = cert.verify();
                let scale = cert.scale();
                let trace_ok = (cert.lhs.trace() - cert.rhs.trace()).abs() <= tol::IDENTITY_TOL * scale;
                let mut rec = self.record("parallelogram_isometries", &cert.statement, Some(2.0));
                rec.outcome = pass_if(v.valid && trace_ok && round_trip_ok(&cert));
                rec.gap = Some(cert.gap_min_eig);
                rec.margin = Some(-v.reconstruction_residual);
                rec.scalar_oracle = self.scalars.map(|(a, b)| {
                    diag_matches(&cert.lhs, &[(a + b).norm_sqr(), (a - b).norm_sqr()])
                        && oracle::close(cert.gap_min_eig, 0.0, scale)
                });
                self.out.push(rec);
            }
            Err(e) => self.error("parallelogram_isometries", "theorem3", Some(2.0), e),
        }
    }

    fn block_decomposition(&mut self) {
        // A PSD matrix of dimension 2n built from both inputs.
        let n = self.a.rows();
        let mut m = nalgebra::DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(self.a.as_dmatrix());
        m.view_mut((0, n), (n, n)).copy_from(self.b.as_dmatrix());
        m.view_mut((n, n), (n, n)).copy_from(&self.a.as_dmatrix().adjoint());
        let h = ComplexMatrix::new(m).map(|m| m.gram()).and_then(PsdMatrix::new);
        match h.map_err(CertError::from).and_then(|h| block_decomposition(&h).map(|uv| (h, uv))) {
            Ok((h, (u, v))) => {
                let full = h.hermitian().to_complex();
                let x = HermitianMatrix::new(full.columns(0, n).adjoint().columns(0, n)).expect("principal block");
                let z = HermitianMatrix::new(full.columns(n, n).adjoint().columns(n, n)).expect("principal block");
                let rebuilt = u
                    .conjugate(&x.pad_zeros(n))
                    .and_then(|l| l.add(&v.conjugate(&HermitianMatrix::zeros(n).direct_sum(&z))?))
                    .and_then(|s| s.sub(h.hermitian()));
                let residual = rebuilt.map(|d| d.max_abs()).unwrap_or(f64::INFINITY);
                let scale = 1.0 + h.hermitian().spectral_norm();
                let mut rec = self.record("block_decomposition", "block_decomposition", None);
                rec.outcome = pass_if(
                    residual <= tol::RECON_TOL * scale
                        && u.is_unitary(tol::ORTHO_TOL)
                        && v.is_unitary(tol::ORTHO_TOL),
                );
                rec.margin = Some(-residual);
                self.out.push(rec);
            }
            Err(e) => self.error("block_decomposition", "block_decomposition", None, e),
        }
    }

    fn trace(&mut self) {
        self.check_with(CheckOp::Clarkson { p: 2.0 }, Some(2.0), |r| {
            r.details.iter().all(|d| d.slack().abs() <= tol::IDENTITY_TOL * r.scale)
        });
        for p in self.all_exponents() {
            self.check(CheckOp::Clarkson { p }, Some(p));
        }
        // Uniform convexity compares normalized inputs; the zero matrix
        // (rank-deficient at dimension 1) has no normalization.
        if self.a.max_abs() > 0.0 && self.b.max_abs() > 0.0 {
            for p in std::iter::once(2.0).chain(self.cfg.p_grid.clone()) {
                self.check(CheckOp::UniformConvexity { p }, Some(p));
            }
        }
    }

    fn majorization(&mut self) {
        for p in self.cfg.p_grid.clone() {
            self.check(CheckOp::WeakMajorization { p }, Some(p));
            for variant in [AntinormVariant::Sum, AntinormVariant::Geomean] {
                self.check(CheckOp::Antinorm { p, variant }, Some(p));
            }
        }
        for e in self.all_exponents() {
            for form in [DirectSumForm::ScaledCm, DirectSumForm::FourTerm] {
                self.check(CheckOp::DirectSum { exponent: e, form }, Some(e));
            }
        }
    }

    /// One record per (form, exponent), aggregated over the whole index grid.
    fn weyl_grid(&mut self, form: WeylForm, exponent: f64) {
        let n = self.a.rows();
        let pairs: Vec<(usize, usize)> = match form {
            WeylForm::Cor5 => (0..n).map(|j| (j, 0)).collect(),
            _ => (0..n).flat_map(|j| (0..n - j).map(move |k| (j, k))).collect(),
        };
        let mut rec = self.record("check_weyl_split", "", Some(exponent));
        let mut margin = f64::INFINITY;
        let mut agrees = true;
        for (j, k) in pairs {
            let op = CheckOp::Weyl { exponent, j, k, form };
            match run_check(op, &self.a, &self.b) {
                Ok(r) => {
                    rec.label = r.name.clone();
                    margin = margin.min(r.margin);
                    if !(r.holds && r.details_consistent()) {
                        rec.outcome = Outcome::Fail;
                    }
                    if let Some((a, b)) = self.scalars {
                        agrees &= oracle::check_agrees(&r, op, a, b);
                    }
                }
                Err(e) => {
                    rec.outcome = Outcome::Fail;
                    rec.error = Some(e.to_string());
                }
            }
        }
        rec.margin = Some(margin);
        rec.scalar_oracle = self.scalars.map(|_| agrees);
        self.out.push(rec);
    }

    fn eigenvalue(&mut self) {
        for p in self.cfg.p_grid.clone() {
            self.weyl_grid(WeylForm::Cor3, p);
            self.weyl_grid(WeylForm::Cor5, p);
        }
        for q in self.cfg.q_grid.clone() {
            self.weyl_grid(WeylForm::Cor4, q);
        }
        for reading in [CartesianReading::AbsAbs, CartesianReading::AbsAdjoint] {
            self.check(CheckOp::Cartesian { reading }, None);
        }
    }

    fn certificates(&mut self) {
        self.parallelogram_isometries();
        let x = PsdMatrix::new(self.a.gram());
        let y = PsdMatrix::new(self.b.gram());
        let (Ok(x), Ok(y)) = (x, y) else {
            self.error("key2_certificate", "key2", None, "Gram matrices failed validation");
            return;
        };
        for p in self.cfg.p_grid.clone() {
            self.key2_pair(&x, &y, p);
            self.theorem1(p);
            self.direct_sum_cm(p);
        }
        self.direct_sum_cm(2.0);
        if self.searchable() {
            self.cartesian();
        }
    }

    fn key2_pair(&mut self, x: &PsdMatrix, y: &PsdMatrix, p: f64) {
        let e = p / 2.0;
        let g = move |t: f64| t.powf(e);
        let oracle_gap = self.scalars.map(|(a, b)| oracle::key2_gap(a, b, p, true));

        let aligned = (|| -> Result<(f64, f64), CertError> {
            let s = crate::certificates::herm_fn(&x.hermitian().add(y.hermitian())?.scale(0.5), &g)?;
            let t = apply_spectral_function(x, &g)?.add(&apply_spectral_function(y, &g)?)?.scale(0.5);
            let w = align_unitary(&s, &t)?;
            let gap = psd_gap(&w.conjugate(&s)?, &t)?;
            Ok((gap, 1.0 + s.spectral_norm().max(t.spectral_norm())))
        })();
        match aligned {
            Ok((gap, scale)) => {
                let mut rec = self.record("align_unitary", "key2_alignment", Some(p));
                rec.outcome = pass_if(gap >= -tol::ALIGN_SLACK * scale);
                rec.gap = Some(gap);
                rec.scalar_oracle = oracle_gap.map(|o| oracle::close(gap, o, scale));
                self.out.push(rec);
            }
            Err(e) => self.error("align_unitary", "key2_alignment", Some(p), e),
        }

        match key2_certificate(x, y, &g, true) {
            Ok(cert) => {
                let mut rec = self.record("key2_certificate", &cert.statement, Some(p));
                rec.outcome = pass_if(
                    cert.verify().valid
                        && cert.gap_min_eig >= -tol::ALIGN_SLACK * cert.scale()
                        && round_trip_ok(&cert),
                );
                rec.gap = Some(cert.gap_min_eig);
                rec.scalar_oracle = oracle_gap.map(|o| oracle::close(cert.gap_min_eig, o, cert.scale()));
                self.out.push(rec);
            }
            Err(e) => self.error("key2_certificate", "key2", Some(p), e),
        }
    }

    fn theorem1(&mut self, p: f64) {
        let result = if self.is_commuting() {
            theorem1_certificate(&self.a, &self.b, p, &CommutingKey1)
        } else if self.searchable() {
            theorem1_search_certificate(&self.a, &self.b, p, &self.search_cfg(1)).map(|(c, t)| (c, Some(t)))
        } else {
            return;
        };
        let (cert, trace) = match result {
            Ok(ct) => ct,
            Err(e) => return self.error("theorem1_certificate", "theorem1", Some(p), e),
        };
        let n = self.a.rows() as f64;
        // Tracing the certificate inequality reproduces the trace inequality:
        // its slack is at least n times the certificate gap.
        let traced = check_clarkson_trace(&self.a, &self.b, p).ok().and_then(|r| r.detail(&[2]).map(|d| (d.slack(), r.scale)));
        let trace_consistent = traced.is_some_and(|(slack, scale)| slack >= n * cert.gap_min_eig - tol::CHECK_TOL * scale);
        let mut rec = self.record("theorem1_certificate", &cert.statement, Some(p));
        rec.outcome = match &trace {
            Some(t) => search_outcome(&cert, t),
            None => pass_if(
                cert.verify().valid && cert.gap_min_eig >= -1e-12 * cert.scale() && round_trip_ok(&cert),
            ),
        };
        if rec.outcome == Outcome::Pass && !trace_consistent {
            rec.outcome = Outcome::Fail;
            rec.error = Some("traced certificate disagrees with the trace inequality".into());
        }
        rec.gap = Some(cert.gap_min_eig);
        rec.margin = traced.map(|(slack, _)| slack);
        rec.scalar_oracle = self
            .scalars
            .map(|(a, b)| oracle::close(cert.gap_min_eig, oracle::composite_gap(a, b, p, true), cert.scale()));
        rec.trace = trace;
        self.out.push(rec);
    }

    fn direct_sum_cm(&mut self, p: f64) {
        match direct_sum_cm_certificate(&self.a, &self.b, p) {
            Ok(cert) => {
                let mut rec = self.record("direct_sum_cm_certificate", &cert.statement, Some(p));
                rec.outcome = pass_if(cert.verify().valid && round_trip_ok(&cert));
                rec.gap = Some(cert.gap_min_eig);
                rec.scalar_oracle = self
                    .scalars
                    .map(|(a, b)| diag_matches(&cert.lhs, &oracle::direct_sum_fixed(a, b, p, DirectSumForm::ScaledCm)));
                self.out.push(rec);
            }
            Err(e) => self.error("direct_sum_cm_certificate", "direct_sum_cm", Some(p), e),
        }
    }

    fn cartesian(&mut self) {
        let provider = SearchKey1::new(self.search_cfg(2));
        match cartesian_certificates(&self.a, &provider) {
            Ok((squared, root, trace)) => {
                let abs2 = self.a.gram();
                let expected = abs2.direct_sum(&self.a.adjoint().gram());
                let shape_ok = squared.lhs.sub(&expected).is_ok_and(|d| d.max_abs() <= tol::IDENTITY_TOL * squared.scale());
                let rotated_ok = squared.cartesian_abs_abs(&self.a).is_ok_and(|c| c.verify().valid);
                let exact_ok = squared.verify().valid && shape_ok && rotated_ok && round_trip_ok(&squared);
                let mut rec = self.record("cartesian_certificates", "cartesian", None);
                rec.outcome = match &trace {
                    Some(t) if !t.converged => Outcome::NotConverged,
                    _ => pass_if(exact_ok && root.verify().valid && round_trip_ok(&root)),
                };
                rec.gap = Some(root.gap_min_eig);
                rec.scalar_oracle = self.scalars.map(|(z, _)| {
                    diag_matches(&squared.lhs, &[z.norm_sqr(), z.norm_sqr()])
                        && diag_matches(&root.lhs, &[z.norm(), z.norm()])
                });
                rec.trace = trace;
                self.out.push(rec);
            }
            Err(e) => self.error("cartesian_certificates", "cartesian", None, e),
        }
    }

    fn search(&mut self) {
        let (Ok(x), Ok(y)) = (PsdMatrix::new(self.a.gram()), PsdMatrix::new(self.b.gram())) else {
            self.error("key1_certificate", "key1", None, "Gram matrices failed validation");
            return;
        };
        let grid: Vec<(f64, bool)> = self
            .cfg
            .p_grid
            .iter()
            .map(|&p| (p, true))
            .chain(self.cfg.q_grid.iter().map(|&q| (q, false)))
            .collect();
        for (salt, &(e, convex)) in grid.iter().enumerate() {
            let half = e / 2.0;
            let g = move |t: f64| t.powf(half);
            match key1_certificate(&x, &y, &g, convex, &self.search_cfg(10 + salt as u64)) {
                Ok((cert, trace)) => {
                    let mut rec = self.record("key1_certificate", &cert.statement, Some(e));
                    rec.outcome = search_outcome(&cert, &trace);
                    rec.gap = Some(cert.gap_min_eig);
                    rec.scalar_oracle = self
                        .scalars
                        .map(|(a, b)| oracle::close(cert.gap_min_eig, oracle::key1_gap(a, b, e, convex), cert.scale()));
                    rec.trace = Some(trace);
                    self.out.push(rec);
                }
                Err(err) => self.error("key1_certificate", "key1", Some(e), err),
            }
        }

        for (salt, q) in self.cfg.q_grid.clone().into_iter().enumerate() {
            match theorem2_certificate(&self.a, &self.b, q, &self.search_cfg(20 + salt as u64)) {
                Ok((cert, trace)) => {
                    let mut rec = self.record("theorem2_certificate", &cert.statement, Some(q));
                    rec.outcome = search_outcome(&cert, &trace);
                    rec.gap = Some(cert.gap_min_eig);
                    rec.scalar_oracle = self.scalars.map(|(a, b)| {
                        oracle::close(cert.gap_min_eig, oracle::composite_gap(a, b, q, false), cert.scale())
                    });
                    rec.trace = Some(trace);
                    self.out.push(rec);
                }
                Err(err) => self.error("theorem2_certificate", "theorem2", Some(q), err),
            }
        }

        if let Some(&p) = self.cfg.p_grid.first() {
            self.orbit(p);
        }

        if self.cfg.direct_sum_dims.contains(&self.cell.spec.dim) {
            let mut jobs: Vec<(f64, DirectSumForm)> =
                self.all_exponents().into_iter().map(|e| (e, DirectSumForm::FourTerm)).collect();
            jobs.extend(self.cfg.q_grid.iter().map(|&q| (q, DirectSumForm::ScaledCm)));
            for (salt, (e, form)) in jobs.into_iter().enumerate() {
                match direct_sum_power_certificates(&self.a, &self.b, e, form, &self.search_cfg(30 + salt as u64)) {
                    Ok((cert, trace)) => {
                        let mut rec = self.record("direct_sum_power_certificates", &cert.statement, Some(e));
                        rec.outcome = search_outcome(&cert, &trace);
                        rec.gap = Some(cert.gap_min_eig);
                        rec.scalar_oracle =
                            self.scalars.map(|(a, b)| diag_matches(&cert.lhs, &oracle::direct_sum_fixed(a, b, e, form)));
                        rec.trace = Some(trace);
                        self.out.push(rec);
                    }
                    Err(err) => self.error("direct_sum_power_certificates", "direct_sum_power", Some(e), err),
                }
            }
        }
    }

    /// The orbit inequality searched directly, without the key2 step.
    fn orbit(&mut self, p: f64) {
        let run = || -> Result<(Certificate, SearchTrace), CertError> {
            let half_sum = matrix_abs_power(&self.a.add(&self.b)?.scale_real(0.5), p)?;
            let half_diff = matrix_abs_power(&self.a.sub(&self.b)?.scale_real(0.5), p)?;
            let bound = matrix_abs_power(&self.a, p)?
                .hermitian()
                .add(matrix_abs_power(&self.b, p)?.hermitian())?
                .scale(0.5);
            orbit_optimize(
                &[(half_sum, None), (half_diff, None)],
                &bound,
                SumDirection::SumLeBound,
                &self.search_cfg(3),
            )
        };
        match run() {
            Ok((cert, trace)) => {
                let mut rec = self.record("orbit_optimize", "orbit", Some(p));
                rec.outcome = search_outcome(&cert, &trace);
                rec.gap = Some(cert.gap_min_eig);
                rec.scalar_oracle = self
                    .scalars
                    .map(|(a, b)| oracle::close(cert.gap_min_eig, oracle::composite_gap(a, b, p, true), cert.scale()));
                rec.trace = Some(trace);
                self.out.push(rec);
            }
            Err(e) => self.error("orbit_optimize", "orbit", Some(p), e),
        }
    }
}
