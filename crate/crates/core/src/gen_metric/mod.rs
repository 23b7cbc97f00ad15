//! The Wasserstein generator metric and the optimal coupled triplet.
//!
//! For triplets `A = (κ, α, μ)` and `B = (ζ, β, ν)`
//!
//! ```text
//! W_G(A, B)² = ½|κ − ζ|² + W_S(α, β)² + W_Λ(μ, ν)²
//! θ₂(x, y)  = W_S(α, β)² + W_Λ(μ, ν)² + (κ − ζ)ᵀ(x − y)
//! ```
//!
//! and the coupled triplet `(κ ⊕ ζ, [α K*; K*ᵀ β], γ*)` grows the expected
//! quadratic cost as `c₂(x, y) + tθ₂(x, y) + ½t²|κ − ζ|²`.

mod convergence;
mod coupled;

use nalgebra::DMatrix;

pub use convergence::{lambda_convergence_report, ConvergenceEntry, ConvergenceReport, BATTERY_SIZE};
pub use coupled::CoupledTriplet;

use crate::error::{check_dim, Error, Result};
use crate::levy_ot::levy_ot_solve;
use crate::psd_transport::{bures_wasserstein_sq, optimal_cross_block};
use crate::types::{dist_sq, dot, DiscreteLevyMeasure, LevyCoupling, LevyTriplet};

/// `W_G²` and its drift, diffusion and jump parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorDistance {
    pub total_sq: f64,
    pub drift_sq: f64,
    pub diffusion_sq: f64,
    pub jump_sq: f64,
}

impl GeneratorDistance {
    pub fn total(&self) -> f64 {
        self.total_sq.sqrt()
    }

    /// `θ₂(0, 0)`: the diffusion and jump parts.
    pub fn theta0(&self) -> f64 {
        self.diffusion_sq + self.jump_sq
    }
}

pub fn generator_distance(a: &LevyTriplet, b: &LevyTriplet) -> Result<GeneratorDistance> {
    check_dim(a.dim(), b.dim())?;
    let drift_sq = 0.5 * dist_sq(a.drift(), b.drift());
    let diffusion_sq = bures_wasserstein_sq(a.diffusion(), b.diffusion())?;
    let jump_sq = levy_ot_solve(a.jumps(), b.jumps())?.cost;
    Ok(GeneratorDistance {
        total_sq: drift_sq + diffusion_sq + jump_sq,
        drift_sq,
        diffusion_sq,
        jump_sq,
    })
}

/// `W_Λ(μ, ν)²`.
pub fn lambda_distance_sq(mu: &DiscreteLevyMeasure, nu: &DiscreteLevyMeasure) -> Result<f64> {
    Ok(levy_ot_solve(mu, nu)?.cost)
}

/// Markovian transport derivative `θ₂(x, y; A, B)`.
pub fn theta2(a: &LevyTriplet, b: &LevyTriplet, x: &[f64], y: &[f64]) -> Result<f64> {
    let dist = generator_distance(a, b)?;
    theta2_from(&dist, a, b, x, y)
}

/// `θ₂(x, y)` reusing an already computed distance of the same pair.
pub fn theta2_from(dist: &GeneratorDistance, a: &LevyTriplet, b: &LevyTriplet, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    check_dim(a.dim(), x.len())?;
    check_dim(a.dim(), y.len())?;
    let dm: Vec<f64> = a.drift().iter().zip(b.drift().iter()).map(|(k, z)| k - z).collect();
    let dxy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
    Ok(dist.theta0() + dot(&dm, &dxy))
}

/// `c₂(x, y) + tθ₂(x, y) + ½t²|m_A − m_B|²`.
pub fn optimal_growth(dist: &GeneratorDistance, a: &LevyTriplet, b: &LevyTriplet, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    let theta = theta2_from(dist, a, b, x, y)?;
    Ok(0.5 * dist_sq(x, y) + t * theta + t * t * dist.drift_sq)
}

/// The optimal coupled triplet `(κ ⊕ ζ, [α K*; K*ᵀ β], γ*)`.
pub fn build_optimal_coupling(a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet> {
    check_dim(a.dim(), b.dim())?;
    let cross = optimal_cross_block(a.diffusion(), b.diffusion())?.cross_block;
    let plan = levy_ot_solve(a.jumps(), b.jumps())?.plan;
    CoupledTriplet::assemble(a, b, &cross, plan)
}

/// Independent coupling: `K = 0` and the trivial jump coupling `μ⊗δ₀ + δ₀⊗ν`.
pub fn build_independent_coupling(a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet> {
    check_dim(a.dim(), b.dim())?;
    let d = a.dim();
    CoupledTriplet::assemble(a, b, &DMatrix::zeros(d, d), LevyCoupling::trivial(a.jumps(), b.jumps())?)
}

/// Drops atoms with `|x| < δ` and scales the rest by `1 − δ′`.
///
/// Returns the truncated measure and the bound
/// `½(∫_{|x|<δ} |x|² dμ + δ′ ∫_{|x|≥δ} |x|² dμ)` on `W_Λ(μ, μ_{δ,δ′})²`.
pub fn truncate_measure(mu: &DiscreteLevyMeasure, delta: f64, delta_prime: f64) -> Result<(DiscreteLevyMeasure, f64)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
    }
    if !(0.0..1.0).contains(&delta_prime) {
        return Err(Error::invalid("delta_prime", format!("must lie in [0, 1), got {delta_prime}")));
    }
    let d2 = delta * delta;
    let (mut dropped, mut kept) = (0.0, 0.0);
    for a in mu.atoms() {
        let r = a.w * a.x.norm_sq();
        if a.x.norm_sq() < d2 {
            dropped += r;
        } else {
            kept += r;
        }
    }
    let truncated = mu.filter_scale(|a| a.x.norm_sq() >= d2, 1.0 - delta_prime);
    Ok((truncated, 0.5 * (dropped + delta_prime * kept)))
}
