//! JSON form of a matrix: `{"rows", "cols", "entries": [[re, im], ...]}`
//! with entries in row-major order, as in the `.cmat` text format.

use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, HermitianMatrix, MatrixError, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl From<&HermitianMatrix> for MatrixJson {
    fn from(h: &HermitianMatrix) -> Self {
        Self::from(&h.to_complex())
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = MatrixError;

    fn try_from(j: &MatrixJson) -> Result<Self, MatrixError> {
        let entries: Vec<C64> = j.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_row_major(j.rows, j.cols, &entries)
    }
}

impl TryFrom<&MatrixJson> for HermitianMatrix {
    type Error = MatrixError;

    fn try_from(j: &MatrixJson) -> Result<Self, MatrixError> {
        HermitianMatrix::new(ComplexMatrix::try_from(j)?)
    }
}
