//! Numerical tolerances shared by every module.
//!
//! All values are relative: a comparison against `TOL` is made as
//! `|residual| <= TOL * scale`, with `scale` documented at each call site
//! (usually `1 + ||matrix||`).

/// Entry-wise Hermitian symmetry check, relative to `1 + max |h_ij|`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Lower bound on the minimal eigenvalue of a PSD matrix, relative to
/// `1 + ||H||_2`. Also the slack for certified operator inequalities.
pub const PSD_TOL: f64 = 1e-8;

/// `||F* F - I||_max` for eigenvector frames and certificate transforms.
pub const ORTHO_TOL: f64 = 1e-10;

/// Spectral reconstruction residual, relative to `1 + ||H||`.
pub const RECON_TOL: f64 = 1e-9;

/// Inequality checks: a slack above `-CHECK_TOL * scale` counts as holding.
pub const CHECK_TOL: f64 = 1e-8;

/// Identity checks (equalities that hold for every input).
pub const IDENTITY_TOL: f64 = 1e-10;

/// Eigenvalue dominance slack accepted by eigen-alignment.
pub const ALIGN_SLACK: f64 = 1e-9;

/// Commutator threshold for the simultaneous-diagonalization fast path,
/// relative to `(1 + max(||X||, ||Y||))^2`.
pub const COMMUTE_TOL: f64 = 1e-10;

/// Eigenvalues closer than this (relative to `1 + max |lambda|`) are ties.
pub const TIE_TOL: f64 = 1e-12;
