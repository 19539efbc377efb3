//! Seeded instance generation and property-suite orchestration.

mod generate;
pub mod oracle;
mod suite;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificates::CertError;
use crate::hermitian::MatrixError;
use crate::search::{GradientCheck, SearchConfig, SearchTrace};
use crate::tol;

pub use generate::{derive_seed, generate, generate_pair, GeneratorKind, GeneratorSpec, Generated};
pub use suite::{run_suite, REQUIRED_OPERATIONS};

/// Master seed used when neither the CLI nor `ORBITCERT_SEED` provides one.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Certificate(#[from] CertError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Identities,
    Trace,
    Majorization,
    Eigenvalue,
    Certificates,
    Search,
    All,
}

impl SuiteName {
    pub const COMPONENTS: [SuiteName; 6] = [
        SuiteName::Identities,
        SuiteName::Trace,
        SuiteName::Majorization,
        SuiteName::Eigenvalue,
        SuiteName::Certificates,
        SuiteName::Search,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Identities => "identities",
            SuiteName::Trace => "trace",
            SuiteName::Majorization => "majorization",
            SuiteName::Eigenvalue => "eigenvalue",
            SuiteName::Certificates => "certificates",
            SuiteName::Search => "search",
            SuiteName::All => "all",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Self::COMPONENTS
            .into_iter()
            .chain([SuiteName::All])
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown suite {s:?}")))
    }
}

/// Parses `a..b` (inclusive) or a comma-separated list.
pub fn parse_dims(text: &str) -> Result<Vec<usize>, HarnessError> {
    let bad = || HarnessError::Usage(format!("invalid dims {text:?}; expected `a..b` or `a,b,c`"));
    let dims: Vec<usize> = if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if dims.is_empty() {
        return Err(bad());
    }
    Ok(dims)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    /// Dimensions at which search-backed certificates run.
    pub search_dims: Vec<usize>,
    /// Dimensions at which the `2n x n` isometry searches run.
    pub direct_sum_dims: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub trials: usize,
    pub generators: Vec<GeneratorKind>,
    pub scale: f64,
    pub gradient_points: usize,
    pub search: SearchConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            dims: (1..=6).collect(),
            search_dims: vec![1, 2, 3],
            direct_sum_dims: vec![1, 2],
            p_grid: vec![2.5, 3.0, 4.0, 10.0],
            q_grid: vec![0.5, 1.0, 1.5],
            trials: 10,
            generators: GeneratorKind::ALL.to_vec(),
            scale: 1.0,
            gradient_points: 10,
            search: SearchConfig::default(),
        }
    }
}

impl SuiteConfig {
    /// Parses a TOML configuration; unspecified fields keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let usage = |m: String| Err(HarnessError::Usage(m));
        for (field, dims) in [("dims", &self.dims), ("search_dims", &self.search_dims), ("direct_sum_dims", &self.direct_sum_dims)] {
            if let Some(d) = dims.iter().find(|d| !(1..=8).contains(*d)) {
                return usage(format!("{field}: dimension {d} outside 1..=8"));
            }
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(**p > 2.0 && p.is_finite())) {
            return usage(format!("p_grid: {p} is not > 2"));
        }
        if let Some(q) = self.q_grid.iter().find(|q| !(**q > 0.0 && **q < 2.0)) {
            return usage(format!("q_grid: {q} is not in (0, 2)"));
        }
        if self.trials == 0 {
            return usage("trials must be positive".into());
        }
        if self.generators.is_empty() {
            return usage("generators must not be empty".into());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return usage(format!("scale: {} is not a positive finite number", self.scale));
        }
        self.search.validate().map_err(|e| HarnessError::Usage(format!("search: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub cell: usize,
    pub suite: SuiteName,
    pub generator: GeneratorSpec,
    pub operation: String,
    pub label: String,
    pub exponent: Option<f64>,
    pub outcome: Outcome,
    pub margin: Option<f64>,
    pub gap: Option<f64>,
    /// `Some(agrees)` when the case was re-verified by scalar arithmetic.
    pub scalar_oracle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<SearchTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub not_converged: usize,
}

impl Counts {
    fn add(&mut self, outcome: Outcome) {
        self.cases += 1;
        match outcome {
            Outcome::Pass => self.passed += 1,
            Outcome::Fail => self.failed += 1,
            Outcome::NotConverged => self.not_converged += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounts {
    pub cases: usize,
    pub disagreements: usize,
}

/// Tolerances in force, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub psd: f64,
    pub ortho: f64,
    pub recon: f64,
    pub check: f64,
    pub identity: f64,
    pub align_slack: f64,
    pub commute: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: tol::HERMITIAN_TOL,
            psd: tol::PSD_TOL,
            ortho: tol::ORTHO_TOL,
            recon: tol::RECON_TOL,
            check: tol::CHECK_TOL,
            identity: tol::IDENTITY_TOL,
            align_slack: tol::ALIGN_SLACK,
            commute: tol::COMMUTE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: SuiteName,
    pub config: SuiteConfig,
    pub tolerances: Tolerances,
    pub cases: Vec<CaseRecord>,
    pub aggregate: Counts,
    pub operations: BTreeMap<String, Counts>,
    pub scalar_oracle: OracleCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_check: Option<GradientCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

impl SuiteReport {
    pub(crate) fn from_cases(
        suite: SuiteName,
        config: SuiteConfig,
        cases: Vec<CaseRecord>,
        gradient_check: Option<GradientCheck>,
    ) -> Self {
        let (aggregate, operations, scalar_oracle) = tally(&cases);
        Self {
            schema: 1,
            suite,
            config,
            tolerances: Tolerances::default(),
            cases,
            aggregate,
            operations,
            scalar_oracle,
            gradient_check,
            wall_time_seconds: None,
        }
    }

    /// Aggregate, per-operation and oracle counts equal the sums over the
    /// per-case records.
    pub fn counts_consistent(&self) -> bool {
        let (aggregate, operations, oracle) = tally(&self.cases);
        aggregate == self.aggregate && operations == self.operations && oracle == self.scalar_oracle
    }

    pub fn all_passed(&self) -> bool {
        self.aggregate.failed == 0 && self.aggregate.not_converged == 0
    }

    /// Process exit status: 1 if any check failed, else 3 if any search did
    /// not converge, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.aggregate.failed > 0 {
            1
        } else if self.aggregate.not_converged > 0 {
            3
        } else {
            0
        }
    }
}

fn tally(cases: &[CaseRecord]) -> (Counts, BTreeMap<String, Counts>, OracleCounts) {
    let mut aggregate = Counts::default();
    let mut operations: BTreeMap<String, Counts> = BTreeMap::new();
    let mut oracle = OracleCounts::default();
    for c in cases {
        aggregate.add(c.outcome);
        operations.entry(c.operation.clone()).or_default().add(c.outcome);
        if let Some(agrees) = c.scalar_oracle {
            oracle.cases += 1;
            oracle.disagreements += usize::from(!agrees);
        }
    }
    (aggregate, operations, oracle)
}
