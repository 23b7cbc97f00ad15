use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tol;

/// Symmetric positive semidefinite matrix, validated on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdMatrix(DMatrix<f64>);

impl PsdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_field(m, "diffusion")
    }

    pub(crate) fn with_field(m: DMatrix<f64>, field: &str) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(
                field,
                format!("matrix is {}x{}, expected square", m.nrows(), m.ncols()),
            ));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(field, "non-finite entry"));
        }
        let trace = m.trace();
        let asym = (&m - m.transpose()).amax();
        if asym > tol::sym(trace) {
            return Err(Error::invalid(field, format!("not symmetric (max asymmetry {asym:e})")));
        }
        let sym = linalg::symmetrize(&m);
        if sym.nrows() > 0 {
            let min = linalg::min_eigenvalue(&sym)?;
            if min < -tol::psd(trace) {
                return Err(Error::invalid(
                    field,
                    format!("not positive semidefinite (min eigenvalue {min:e})"),
                ));
            }
        }
        Ok(PsdMatrix(sym))
    }

    /// Wraps a matrix that is PSD by construction (Gram matrices and the like).
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        PsdMatrix(linalg::symmetrize(&m))
    }

    pub fn zeros(dim: usize) -> Self {
        PsdMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        PsdMatrix(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::invalid(
                    format!("diffusion[{i}]"),
                    format!("row has {} entries, expected {n}", r.len()),
                ));
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn scaled(&self, t: f64) -> PsdMatrix {
        assert!(t >= 0.0, "PSD cone is closed under nonnegative scaling only");
        PsdMatrix(&self.0 * t)
    }
}

impl Deref for PsdMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert!(PsdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(PsdMatrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]).is_err());
        assert!(PsdMatrix::from_rows(&[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn accepts_singular_psd() {
        let m = PsdMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(m.dim(), 2);
    }
}
