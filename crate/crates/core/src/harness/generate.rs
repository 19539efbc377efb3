//! Seeded random instances.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::hermitian::{ComplexMatrix, C64};
use crate::search::haar_unitary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Ginibre,
    Hermitian,
    Psd,
    CommutingPair,
    RankDeficient,
    Normal,
    Scalar,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 7] = [
        GeneratorKind::Ginibre,
        GeneratorKind::Hermitian,
        GeneratorKind::Psd,
        GeneratorKind::CommutingPair,
        GeneratorKind::RankDeficient,
        GeneratorKind::Normal,
        GeneratorKind::Scalar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Ginibre => "ginibre",
            GeneratorKind::Hermitian => "hermitian",
            GeneratorKind::Psd => "psd",
            GeneratorKind::CommutingPair => "commuting_pair",
            GeneratorKind::RankDeficient => "rank_deficient",
            GeneratorKind::Normal => "normal",
            GeneratorKind::Scalar => "scalar",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown generator kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub dim: usize,
    pub seed: u64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Single(ComplexMatrix),
    Pair(ComplexMatrix, ComplexMatrix),
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, dim: usize, seed: u64) -> Self {
        Self { kind, dim, seed, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.dim == 0 {
            return Err(HarnessError::Usage("generator dim must be positive".into()));
        }
        if self.kind == GeneratorKind::Scalar && self.dim != 1 {
            return Err(HarnessError::Usage("the scalar generator requires dim = 1".into()));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(HarnessError::Usage("generator scale must be a positive finite number".into()));
        }
        Ok(())
    }
}

/// Mixes a master seed with a cell index (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex standard normal entries with `E|z|^2 = 1`.
fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn complex_diagonal(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    ginibre(rng, n, 1).iter().copied().collect()
}

fn unitary_similarity(q: &DMatrix<C64>, d: &[C64]) -> DMatrix<C64> {
    q * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)) * q.adjoint()
}

fn single(kind: GeneratorKind, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    match kind {
        GeneratorKind::Ginibre | GeneratorKind::Scalar => ginibre(rng, n, n),
        GeneratorKind::Hermitian => {
            let g = ginibre(rng, n, n);
            (&g + g.adjoint()) * C64::new(0.5, 0.0)
        }
        GeneratorKind::Psd => {
            let g = ginibre(rng, n, n);
            g.adjoint() * g * C64::new(1.0 / n as f64, 0.0)
        }
        GeneratorKind::RankDeficient => {
            let g = ginibre(rng, n, n);
            let v = ginibre(rng, n, 1);
            let v = &v / C64::new(v.norm(), 0.0);
            g * (DMatrix::identity(n, n) - &v * v.adjoint())
        }
        GeneratorKind::Normal => {
            let q = haar_unitary(rng, n).into_dmatrix();
            unitary_similarity(&q, &complex_diagonal(rng, n))
        }
        GeneratorKind::CommutingPair => unreachable!("pairs are generated jointly"),
    }
}

/// Deterministic in `spec`. `commuting_pair` yields a pair sharing a Haar
/// eigenframe; every other kind yields a single matrix.
pub fn generate(spec: &GeneratorSpec) -> Result<Generated, HarnessError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.dim;
    let s = C64::new(spec.scale, 0.0);
    let wrap = |m: DMatrix<C64>| ComplexMatrix::new(m * s).map_err(HarnessError::from);
    if spec.kind == GeneratorKind::CommutingPair {
        let q = haar_unitary(&mut rng, n).into_dmatrix();
        let a = unitary_similarity(&q, &complex_diagonal(&mut rng, n));
        let b = unitary_similarity(&q, &complex_diagonal(&mut rng, n));
        return Ok(Generated::Pair(wrap(a)?, wrap(b)?));
    }
    Ok(Generated::Single(wrap(single(spec.kind, n, &mut rng))?))
}

/// A pair from any kind: single-matrix kinds draw `B` from a derived seed.
pub fn generate_pair(spec: &GeneratorSpec) -> Result<(ComplexMatrix, ComplexMatrix), HarnessError> {
    match generate(spec)? {
        Generated::Pair(a, b) => Ok((a, b)),
        Generated::Single(a) => {
            let other = GeneratorSpec { seed: derive_seed(spec.seed, 1), ..*spec };
            match generate(&other)? {
                Generated::Single(b) => Ok((a, b)),
                Generated::Pair(..) => unreachable!("same kind"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{psd_gap, HermitianMatrix};

    #[test]
    fn scalar_is_reproducible() {
        let spec = GeneratorSpec::new(GeneratorKind::Scalar, 1, 7);
        let a = generate(&spec).unwrap();
        assert_eq!(a, generate(&spec).unwrap());
        let Generated::Single(m) = a else { panic!() };
        assert_eq!(m.shape(), (1, 1));
        assert!(generate(&GeneratorSpec::new(GeneratorKind::Scalar, 2, 7)).is_err());
    }

    #[test]
    fn psd_kind_is_psd() {
        let Generated::Single(m) = generate(&GeneratorSpec::new(GeneratorKind::Psd, 3, 1)).unwrap() else {
            panic!()
        };
        let h = HermitianMatrix::new(m).unwrap();
        assert!(psd_gap(&HermitianMatrix::zeros(3), &h).unwrap() >= -1e-12);
    }

    #[test]
    fn commuting_pair_commutes() {
        let spec = GeneratorSpec { scale: 3.0, ..GeneratorSpec::new(GeneratorKind::CommutingPair, 4, 2) };
        let Generated::Pair(a, b) = generate(&spec).unwrap() else { panic!() };
        assert!(a.commutator_norm(&b).unwrap() <= 1e-12 * 9.0);
    }

    #[test]
    fn rank_deficient_has_small_singular_value() {
        for seed in 0..20 {
            let Generated::Single(m) = generate(&GeneratorSpec::new(GeneratorKind::RankDeficient, 4, seed)).unwrap() else {
                panic!()
            };
            // Direct SVD: the route through eig(A*A) bottoms out near sqrt(eps).
            let sv = m.as_dmatrix().clone().singular_values();
            assert!(sv.min() <= 1e-12, "{sv}");
        }
    }

    #[test]
    fn unknown_kind_is_a_usage_error() {
        assert!(matches!("wishart".parse::<GeneratorKind>(), Err(HarnessError::Usage(_))));
        assert_eq!("commuting_pair".parse::<GeneratorKind>().unwrap(), GeneratorKind::CommutingPair);
    }
}
