use nalgebra::DMatrix;

use crate::error::{check_dim, Result};
use crate::tol;
use crate::types::{DiscreteLevyMeasure, Point, PsdMatrix};

/// Lévy triplet `(κ, α, μ)` in global (fully compensated) form.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyTriplet {
    drift: Point,
    diffusion: PsdMatrix,
    jumps: DiscreteLevyMeasure,
}

impl LevyTriplet {
    pub fn new(drift: Point, diffusion: PsdMatrix, jumps: DiscreteLevyMeasure) -> Result<Self> {
        check_dim(drift.dim(), diffusion.dim())?;
        check_dim(drift.dim(), jumps.dim())?;
        Ok(LevyTriplet { drift, diffusion, jumps })
    }

    /// Pure-jump triplet `(0, 0, μ)`.
    pub fn pure_jump(jumps: DiscreteLevyMeasure) -> Self {
        let d = jumps.dim();
        LevyTriplet {
            drift: Point::origin(d),
            diffusion: PsdMatrix::zeros(d),
            jumps,
        }
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn drift(&self) -> &Point {
        &self.drift
    }

    pub fn diffusion(&self) -> &PsdMatrix {
        &self.diffusion
    }

    pub fn jumps(&self) -> &DiscreteLevyMeasure {
        &self.jumps
    }

    /// Mean vector `m_A`; in global form this is the drift itself.
    pub fn mean_vector(&self) -> Point {
        self.drift.clone()
    }

    /// `Q_A = α + Σ wᵢ xᵢ xᵢᵀ`.
    pub fn covariance_matrix(&self) -> PsdMatrix {
        let d = self.dim();
        let mut q: DMatrix<f64> = self.diffusion.matrix().clone();
        for a in self.jumps.atoms() {
            for i in 0..d {
                for j in 0..d {
                    q[(i, j)] += a.w * a.x[i] * a.x[j];
                }
            }
        }
        PsdMatrix::from_trusted(q)
    }

    /// Component-wise canonical-form equality within [`tol::CANONICAL`].
    pub fn canonical_eq(&self, other: &Self) -> bool {
        let t = tol::CANONICAL;
        self.dim() == other.dim()
            && self.drift.iter().zip(other.drift.iter()).all(|(a, b)| (a - b).abs() <= t)
            && (self.diffusion.matrix() - other.diffusion.matrix()).amax() <= t
            && self.jumps.approx_eq(&other.jumps, t)
    }
}
