//! Command-line front end: direct checks, certificate construction and
//! search, property suites, and independent certificate re-verification.
//!
//! Exit codes: 0 all pass, 1 check failed, 2 usage error, 3 search did not
//! converge.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use orbitcert::certificates::{
    cartesian_certificates, direct_sum_cm_certificate, key2_certificate, parallelogram_isometries,
    theorem1_certificate, CertError, Certificate,
};
use orbitcert::checks::{
    check_antinorm_superadditivity, check_cartesian, check_clarkson_trace, check_direct_sum,
    check_parallelogram_identity, check_uniform_convexity, check_weak_majorization, check_weyl_split,
    AntinormVariant, CartesianReading, CheckResult, DirectSumForm, WeylForm,
};
use orbitcert::harness::{parse_dims, run_suite, SuiteConfig, SuiteName, DEFAULT_SEED};
use orbitcert::hermitian::{cmat, ComplexMatrix, HermitianMatrix, PsdMatrix};
use orbitcert::search::{
    direct_sum_power_certificates, key1_certificate, theorem2_certificate, SearchConfig, SearchKey1, SearchTrace,
};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "orbitcert", version, about = "Clarkson–McCarthy matrix inequalities: checks and orbit certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one inequality check on a pair of matrices.
    Verify {
        #[arg(long, value_enum)]
        check: CheckName,
        #[arg(long)]
        a: PathBuf,
        /// Second matrix (not used by the Cartesian checks).
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long, conflicts_with = "q")]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Write the full result here instead of standard output.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build an exact certificate.
    Construct {
        #[arg(long, value_enum)]
        statement: ConstructStatement,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        /// Seed for the superadditivity search when inputs do not commute.
        #[arg(long, env = "ORBITCERT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for a certificate over unitary orbits.
    Search {
        #[arg(long, value_enum)]
        statement: SearchStatement,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Convex exponent (`g(t) = t^{p/2}`) for key1.
        #[arg(long, conflicts_with = "q")]
        p: Option<f64>,
        /// Concave exponent (`g(t) = t^{q/2}`, `0 < q < 2`).
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, value_enum, default_value_t = FormArg::FourTerm)]
        form: FormArg,
        #[arg(long, env = "ORBITCERT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a property suite over seeded random instances.
    Stress {
        #[arg(long, value_parser = parse_suite)]
        suite: SuiteName,
        /// `a..b` (inclusive) or a comma-separated list.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, env = "ORBITCERT_SEED")]
        seed: Option<u64>,
        /// TOML file with suite settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Omit wall time so identical configurations give identical bytes.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Re-verify a serialized certificate (or array of certificates).
    CheckCert {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckName {
    ClarksonTrace,
    WeakMajorization,
    AntinormSum,
    AntinormGeomean,
    WeylCor3,
    WeylCor4,
    WeylCor5,
    Parallelogram,
    UniformConvexity,
    DirectSumCm,
    DirectSumPower,
    CartesianAbsAbs,
    CartesianAbsAdjoint,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructStatement {
    Theorem1,
    Theorem3,
    Key2,
    Cartesian,
    DirectSumCm,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchStatement {
    Key1,
    Theorem2,
    DirectSumQ,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    FourTerm,
    ScaledCm,
}

fn parse_suite(s: &str) -> Result<SuiteName, String> {
    s.parse().map_err(|e: orbitcert::harness::HarnessError| e.to_string())
}

/// An error carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<CertError> for Failure {
    fn from(e: CertError) -> Self {
        let code = match e {
            CertError::Config(_) => EXIT_USAGE,
            CertError::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_FAIL,
        };
        Self { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<ComplexMatrix, Failure> {
    cmat::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_b(path: &Option<PathBuf>) -> Result<ComplexMatrix, Failure> {
    match path {
        Some(p) => read(p),
        None => Err(Failure::usage("--b is required for this statement")),
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exponent(p: Option<f64>, q: Option<f64>) -> Result<f64, Failure> {
    p.or(q).ok_or_else(|| Failure::usage("an exponent is required (--p or --q)"))
}

fn verify(
    check: CheckName,
    a: &ComplexMatrix,
    b: Option<&ComplexMatrix>,
    e: Option<f64>,
    j: usize,
    k: usize,
) -> Result<CheckResult, Failure> {
    let need_b = || b.ok_or_else(|| Failure::usage("--b is required for this check"));
    let need_e = || e.ok_or_else(|| Failure::usage("an exponent is required (--p or --q)"));
    let r = match check {
        CheckName::ClarksonTrace => check_clarkson_trace(a, need_b()?, need_e()?),
        CheckName::WeakMajorization => check_weak_majorization(a, need_b()?, need_e()?),
        CheckName::AntinormSum => check_antinorm_superadditivity(a, need_b()?, need_e()?, AntinormVariant::Sum),
        CheckName::AntinormGeomean => {
            check_antinorm_superadditivity(a, need_b()?, need_e()?, AntinormVariant::Geomean)
        }
        CheckName::WeylCor3 => check_weyl_split(a, need_b()?, need_e()?, j, k, WeylForm::Cor3),
        CheckName::WeylCor4 => check_weyl_split(a, need_b()?, need_e()?, j, k, WeylForm::Cor4),
        CheckName::WeylCor5 => check_weyl_split(a, need_b()?, need_e()?, j, k, WeylForm::Cor5),
        CheckName::Parallelogram => check_parallelogram_identity(a, need_b()?),
        CheckName::UniformConvexity => check_uniform_convexity(a, need_b()?, need_e()?),
        CheckName::DirectSumCm => check_direct_sum(a, need_b()?, need_e()?, DirectSumForm::ScaledCm),
        CheckName::DirectSumPower => check_direct_sum(a, need_b()?, need_e()?, DirectSumForm::FourTerm),
        CheckName::CartesianAbsAbs => check_cartesian(a, CartesianReading::AbsAbs),
        CheckName::CartesianAbsAdjoint => check_cartesian(a, CartesianReading::AbsAdjoint),
    };
    r.map_err(|e| Failure::usage(e.to_string()))
}

fn cert_status(certs: &[Certificate]) -> u8 {
    if certs.iter().all(|c| c.verify().valid) {
        0
    } else {
        EXIT_FAIL
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Verify { check, a, b, p, q, j, k, json } => {
            let a = read(&a)?;
            let b = b.as_deref().map(read).transpose()?;
            let result = verify(check, &a, b.as_ref(), p.or(q), j, k)?;
            eprintln!(
                "{}: {} (margin {:e})",
                result.name,
                if result.holds { "holds" } else { "FAILS" },
                result.margin
            );
            write_json(json.as_deref(), &result)?;
            Ok(if result.holds { 0 } else { EXIT_FAIL })
        }
        Command::Construct { statement, a, b, p, seed, out } => {
            let a = read(&a)?;
            let provider = SearchKey1::new(SearchConfig::with_seed(seed));
            let certs: Vec<Certificate> = match statement {
                ConstructStatement::Theorem1 => {
                    vec![theorem1_certificate(&a, &read_b(&b)?, exponent(p, None)?, &provider)?.0]
                }
                ConstructStatement::Theorem3 => vec![parallelogram_isometries(&a, &read_b(&b)?)?],
                ConstructStatement::Key2 => {
                    let half = exponent(p, None)? / 2.0;
                    let x = PsdMatrix::new(a.gram()).map_err(CertError::from)?;
                    let y = PsdMatrix::new(read_b(&b)?.gram()).map_err(CertError::from)?;
                    vec![key2_certificate(&x, &y, &move |t: f64| t.powf(half), true)?]
                }
                ConstructStatement::Cartesian => {
                    let (squared, root, _) = cartesian_certificates(&a, &provider)?;
                    vec![squared, root]
                }
                ConstructStatement::DirectSumCm => {
                    vec![direct_sum_cm_certificate(&a, &read_b(&b)?, exponent(p, None)?)?]
                }
            };
            for c in &certs {
                eprintln!("{}: gap {:e} ({:?})", c.statement, c.gap_min_eig, c.direction);
            }
            if let [single] = certs.as_slice() {
                write_json(Some(&out), single)?;
            } else {
                write_json(Some(&out), &certs)?;
            }
            Ok(cert_status(&certs))
        }
        Command::Search { statement, a, b, p, q, form, seed, restarts, max_iterations, out } => {
            let a = read(&a)?;
            let b = read(&b)?;
            let mut cfg = SearchConfig::with_seed(seed);
            if let Some(r) = restarts {
                cfg.restarts = r;
            }
            if let Some(m) = max_iterations {
                cfg.max_iterations = m;
            }
            let (cert, trace): (Certificate, SearchTrace) = match statement {
                SearchStatement::Key1 => {
                    let (e, convex) = match (p, q) {
                        (Some(p), _) => (p, true),
                        (None, Some(q)) => (q, false),
                        (None, None) => return Err(Failure::usage("key1 needs --p (convex) or --q (concave)")),
                    };
                    let x = PsdMatrix::new(HermitianMatrix::new(a).map_err(CertError::from)?).map_err(CertError::from)?;
                    let y = PsdMatrix::new(HermitianMatrix::new(b).map_err(CertError::from)?).map_err(CertError::from)?;
                    let half = e / 2.0;
                    key1_certificate(&x, &y, &move |t: f64| t.powf(half), convex, &cfg)?
                }
                SearchStatement::Theorem2 => theorem2_certificate(&a, &b, exponent(q, p)?, &cfg)?,
                SearchStatement::DirectSumQ => {
                    let form = match form {
                        FormArg::FourTerm => DirectSumForm::FourTerm,
                        FormArg::ScaledCm => DirectSumForm::ScaledCm,
                    };
                    direct_sum_power_certificates(&a, &b, exponent(q, p)?, form, &cfg)?
                }
            };
            eprintln!(
                "{}: gap {:e}, converged {}, {} iterations over {} restarts",
                cert.statement, cert.gap_min_eig, trace.converged, trace.iterations_used, trace.restarts_used
            );
            write_json(Some(&out), &cert)?;
            write_json(None, &trace)?;
            Ok(if !trace.converged {
                EXIT_NOT_CONVERGED
            } else {
                cert_status(std::slice::from_ref(&cert))
            })
        }
        Command::Stress { suite, dims, trials, seed, config, json, no_timestamp } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                    SuiteConfig::from_toml(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
                }
                None => SuiteConfig::default(),
            };
            if let Some(d) = dims {
                cfg.dims = parse_dims(&d).map_err(|e| Failure::usage(e.to_string()))?;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let mut report = run_suite(suite, &cfg).map_err(|e| match e {
                orbitcert::harness::HarnessError::Usage(m) => Failure::usage(m),
                other => Failure { code: EXIT_FAIL, message: other.to_string() },
            })?;
            if no_timestamp {
                report.wall_time_seconds = None;
            }
            let agg = &report.aggregate;
            eprintln!(
                "suite {}: {} cases, {} passed, {} failed, {} not converged; scalar oracle {}/{} disagreements",
                report.suite,
                agg.cases,
                agg.passed,
                agg.failed,
                agg.not_converged,
                report.scalar_oracle.disagreements,
                report.scalar_oracle.cases
            );
            write_json(json.as_deref(), &report)?;
            Ok(report.exit_code() as u8)
        }
        Command::CheckCert { input } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| Failure::usage(format!("{}: {e}", input.display())))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", input.display())))?;
            let items = match value {
                serde_json::Value::Array(items) => items,
                single => vec![single],
            };
            let certs = items
                .into_iter()
                .map(serde_json::from_value::<Certificate>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::usage(format!("{}: {e}", input.display())))?;
            let verifications: Vec<_> = certs.iter().map(Certificate::verify).collect();
            for (c, v) in certs.iter().zip(&verifications) {
                eprintln!(
                    "{}: {} (gap {:e}, reconstruction {:e}, orthonormality {:e})",
                    c.statement,
                    if v.valid { "valid" } else { "INVALID" },
                    v.recomputed_gap,
                    v.reconstruction_residual,
                    v.worst_orthonormality
                );
            }
            write_json(None, &verifications)?;
            Ok(cert_status(&certs))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
