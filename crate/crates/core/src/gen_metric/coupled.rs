use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::tol;
use crate::types::{validate_coupling, LevyCoupling, LevyTriplet, Point, PsdMatrix};

/// Triplet `(η, σ, γ)` of a Markovian coupling on `R^d × R^d`.
///
/// `η` and `σ` live on `R^{2d}`; `γ` is a Lévy coupling of the two jump measures.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledTriplet {
    drift: Point,
    diffusion: PsdMatrix,
    jumps: LevyCoupling,
}

impl CoupledTriplet {
    pub fn new(drift: Point, diffusion: PsdMatrix, jumps: LevyCoupling) -> Result<Self> {
        let d = jumps.dim();
        check_dim(2 * d, drift.dim())?;
        check_dim(2 * d, diffusion.dim())?;
        Ok(CoupledTriplet { drift, diffusion, jumps })
    }

    /// `(κ ⊕ ζ, [α K; Kᵀ β], γ)`; fails if the joint diffusion is not PSD.
    pub fn assemble(a: &LevyTriplet, b: &LevyTriplet, cross: &DMatrix<f64>, jumps: LevyCoupling) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        check_dim(a.dim(), jumps.dim())?;
        if cross.nrows() != a.dim() || cross.ncols() != a.dim() {
            return Err(Error::invalid("cross block", format!("expected {0}x{0}", a.dim())));
        }
        let joint = linalg::block2(a.diffusion(), cross, &cross.transpose(), b.diffusion());
        let diffusion = PsdMatrix::with_field(joint, "coupled diffusion")?;
        Ok(CoupledTriplet {
            drift: a.drift().concat(b.drift()),
            diffusion,
            jumps,
        })
    }

    /// Dimension `d` of each component.
    pub fn dim(&self) -> usize {
        self.jumps.dim()
    }

    pub fn drift(&self) -> &Point {
        &self.drift
    }

    pub fn diffusion(&self) -> &PsdMatrix {
        &self.diffusion
    }

    pub fn jumps(&self) -> &LevyCoupling {
        &self.jumps
    }

    pub fn cross_block(&self) -> DMatrix<f64> {
        let d = self.dim();
        self.diffusion.view((0, d), (d, d)).into_owned()
    }

    /// Marginal triplet of the first (`source = true`) or second component.
    pub fn marginal(&self, source: bool) -> LevyTriplet {
        let d = self.dim();
        let off = if source { 0 } else { d };
        let drift = Point::from_finite(self.drift[off..off + d].to_vec());
        let diffusion = PsdMatrix::from_trusted(self.diffusion.view((off, off), (d, d)).into_owned());
        LevyTriplet::new(drift, diffusion, self.jumps.marginal(source)).expect("blocks share dimension d")
    }

    /// The coupling as a triplet on `R^{2d}`.
    pub fn as_triplet(&self) -> LevyTriplet {
        LevyTriplet::new(self.drift.clone(), self.diffusion.clone(), self.jumps.as_measure())
            .expect("dimensions checked on construction")
    }

    /// `E ½|X_t − Y_t|²` started from `(x, y)`, from this triplet's own parameters.
    ///
    /// With `D = X − Y`: `½|x − y + tΔη|² + ½t·tr(σ_xx + σ_yy − σ_xy − σ_yx) + t·∫½|x′ − y′|² dγ`.
    pub fn predicted_growth(&self, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
        let d = self.dim();
        check_dim(d, x.len())?;
        check_dim(d, y.len())?;
        let s = &self.diffusion;
        let mean_sq: f64 = (0..d)
            .map(|i| {
                let v = x[i] - y[i] + t * (self.drift[i] - self.drift[d + i]);
                v * v
            })
            .sum();
        let diff_trace: f64 = (0..d)
            .map(|i| s[(i, i)] + s[(d + i, d + i)] - s[(i, d + i)] - s[(d + i, i)])
            .sum();
        Ok(0.5 * mean_sq + 0.5 * t * diff_trace + t * self.jumps.cost())
    }

    /// Checks that the marginals are `A` and `B`: drift and diffusion blocks
    /// within [`tol::CANONICAL`], jump marginals via [`validate_coupling`].
    pub fn check_marginals(&self, a: &LevyTriplet, b: &LevyTriplet) -> Result<bool> {
        check_dim(self.dim(), a.dim())?;
        check_dim(self.dim(), b.dim())?;
        let blocks_match = |m: &LevyTriplet, source: bool| {
            let own = self.marginal(source);
            own.drift().iter().zip(m.drift().iter()).all(|(p, q)| (p - q).abs() <= tol::CANONICAL)
                && (own.diffusion().matrix() - m.diffusion().matrix()).amax() <= tol::CANONICAL
        };
        let jumps = validate_coupling(&self.jumps, a.jumps(), b.jumps())?;
        Ok(blocks_match(a, true) && blocks_match(b, false) && jumps.passed)
    }
}
