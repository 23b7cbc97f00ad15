//! Optimal coupling of the diffusion parts.
//!
//! Between `N(0, α)` and `N(0, β)` the quadratic transport cost (with the ½
//! prefactor) is
//!
//! ```text
//! W_S(α, β)² = ½ tr[α + β − 2 (α^{1/2} β α^{1/2})^{1/2}]
//!            = min { ½ tr(α + β − 2K) : [α K; Kᵀ β] ⪰ 0 }.
//! ```
//!
//! The optimal cross block is `K* = α^{1/2} Q β^{1/2}` where `Q = U Vᵀ` is the
//! orthogonal polar factor of `α^{1/2} β^{1/2} = U S Vᵀ`. The joint matrix is
//! then a Gram matrix, PSD by construction even when `α` or `β` is singular.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::tol;
use crate::types::PsdMatrix;

/// Optimal diffusion coupling `σ* = [α K*; K*ᵀ β]` and its cost.
#[derive(Clone, Debug)]
pub struct DiffusionCouplingResult {
    /// `W_S(α, β)²` evaluated as `½ tr(α + β − 2K*)`.
    pub cost: f64,
    pub cross_block: DMatrix<f64>,
    pub joint: PsdMatrix,
}

/// Quadratic Kantorovich potentials `φ(x) = xᵀAx`, `ψ(y) = yᵀBy`.
///
/// `A` and `B` are symmetric but in general indefinite: the optimal pair for
/// `α ≠ β` has one of them negative along some direction.
#[derive(Clone, Debug)]
pub struct DualMatrixPair {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// `tr(αA + βB)`, a lower bound on `W_S(α, β)²`.
    pub value: f64,
    /// Largest eigenvalue of `[A 0; 0 B] − ½[I −I; −I I]`.
    pub max_violation: f64,
    /// Shrink factor applied to reach feasibility (1 when none was needed).
    pub shrink: f64,
}

/// `½ tr[α + β − 2(α^{1/2}βα^{1/2})^{1/2}]`, clamped at zero.
///
/// The trace of the root equals the nuclear norm of `P = α^{1/2}β^{1/2}`, read off
/// as `tr(QᵀP)` with `Q` the polar factor of `P`. Taking eigenvalue square roots
/// instead loses about half the digits when `α` or `β` is singular.
/// The arguments are ordered canonically first, so the value is bitwise symmetric.
pub fn bures_wasserstein_sq(alpha: &PsdMatrix, beta: &PsdMatrix) -> Result<f64> {
    check_dim(alpha.dim(), beta.dim())?;
    let (alpha, beta) = if matrix_cmp(alpha, beta) == Ordering::Greater {
        (beta, alpha)
    } else {
        (alpha, beta)
    };
    let p = linalg::psd_sqrt(alpha)? * linalg::psd_sqrt(beta)?;
    let q = linalg::polar_factor(&p)?;
    let nuclear = q.component_mul(&p).sum();
    let value = 0.5 * (alpha.trace() + beta.trace()) - nuclear;
    if value < -tol::NUM * (1.0 + alpha.trace() + beta.trace()) {
        return Err(Error::Solver(format!("negative Bures-Wasserstein cost {value:e}")));
    }
    Ok(value.max(0.0))
}

fn matrix_cmp(a: &PsdMatrix, b: &PsdMatrix) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Maximizer `K*` of `tr K` subject to `[α K; Kᵀ β] ⪰ 0`.
pub fn optimal_cross_block(alpha: &PsdMatrix, beta: &PsdMatrix) -> Result<DiffusionCouplingResult> {
    check_dim(alpha.dim(), beta.dim())?;
    let ra = linalg::psd_sqrt(alpha)?;
    let rb = linalg::psd_sqrt(beta)?;
    let q = linalg::polar_factor(&(&ra * &rb))?;
    let k = &ra * q * &rb;
    let joint = PsdMatrix::from_trusted(linalg::block2(alpha, &k, &k.transpose(), beta));
    let cost = (0.5 * (alpha.trace() + beta.trace() - 2.0 * k.trace())).max(0.0);
    Ok(DiffusionCouplingResult {
        cost,
        cross_block: k,
        joint,
    })
}

/// Largest eigenvalue of `[A 0; 0 B] − ½[I −I; −I I]`; feasible iff `≤ 0`.
pub fn dual_constraint_violation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let d = a.nrows();
    if d == 0 {
        return Ok(0.0);
    }
    let half = DMatrix::<f64>::identity(d, d) * 0.5;
    let m = linalg::block2(&(a - &half), &half, &half, &(b - &half));
    linalg::max_eigenvalue(&m)
}

/// Builds quadratic potentials from the regularized optimal map
/// `T = α_ε^{−1/2}(α_ε^{1/2}β_εα_ε^{1/2})^{1/2}α_ε^{−1/2}` with `α_ε = α + εI`,
/// `β_ε = β + εI`: `A = ½(I − T)`, `B = ½(I − T⁻¹)`.
///
/// The pair sits on the boundary of the feasible cone; if round-off pushes it
/// outside by more than [`tol::PSD`] it is shrunk toward zero until feasible.
pub fn dual_matrix_certificate(alpha: &PsdMatrix, beta: &PsdMatrix, eps: f64) -> Result<DualMatrixPair> {
    check_dim(alpha.dim(), beta.dim())?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("epsilon", format!("must be positive, got {eps}")));
    }
    let d = alpha.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let alpha_e = alpha.matrix() + &id * eps;
    let beta_e = beta.matrix() + &id * eps;
    let ra = linalg::psd_sqrt(&alpha_e)?;
    let ra_inv = linalg::pd_inv_sqrt(&alpha_e)?;
    let m = linalg::psd_sqrt(&linalg::symmetrize(&(&ra * &beta_e * &ra)))?;
    let t = linalg::symmetrize(&(&ra_inv * &m * &ra_inv));
    let t_inv = linalg::spectral_map(&t, |v| 1.0 / v)?;

    let a = (&id - &t) * 0.5;
    let b = (&id - &t_inv) * 0.5;

    let mut shrink = 1.0;
    let mut violation = dual_constraint_violation(&a, &b)?;
    if violation > tol::PSD {
        // Violation is convex in the scale and zero at the origin, so the
        // feasible scales form an interval [0, s*].
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if dual_constraint_violation(&(&a * mid), &(&b * mid))? <= 0.5 * tol::PSD {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        shrink = lo;
        violation = dual_constraint_violation(&(&a * lo), &(&b * lo))?;
    }
    let a = a * shrink;
    let b = b * shrink;
    let value = (alpha.matrix() * &a).trace() + (beta.matrix() * &b).trace();
    Ok(DualMatrixPair {
        a,
        b,
        value,
        max_violation: violation,
        shrink,
    })
}
