//! Monte Carlo simulation of coupled Lévy processes.

mod path;

use rayon::prelude::*;

pub use path::{simulate_path, simulate_path_on_grid, PathSample};

use crate::error::{check_dim, Error, Result};
use crate::gen_metric::CoupledTriplet;
use path::{check_horizon, grid_levels, Sampler};

pub const MIN_PATHS: usize = 100;
pub const MIN_GRID: usize = 64;

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// Mean and `s/√n` of at least two samples, summed pairwise.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 2, "need at least two samples");
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        McEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
            n_paths: n,
        }
    }

    /// Whether `value` lies within `k` standard errors, with an absolute floor
    /// for deterministic (zero-variance) estimates.
    pub fn brackets(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-9 * (1.0 + value.abs())
    }
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths < MIN_PATHS {
        return Err(Error::invalid("paths", format!("need at least {MIN_PATHS}, got {n_paths}")));
    }
    Ok(())
}

fn half_gap_sq(z: &[f64], d: usize) -> f64 {
    0.5 * (0..d).map(|i| (z[i] - z[d + i]).powi(2)).sum::<f64>()
}

/// `E ½|X_t − Y_t|²` from `(x, y)` for each `t`, one estimate per time.
pub fn estimate_cost_growth(
    j: &CoupledTriplet,
    x: &[f64],
    y: &[f64],
    times: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check_paths(n_paths)?;
    let d = j.dim();
    check_dim(d, x.len())?;
    check_dim(d, y.len())?;
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::invalid("t", format!("times must be finite and nonnegative, got {t}")));
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let sampler = Sampler::new(j)?;
    let start: Vec<f64> = x.iter().chain(y).copied().collect();

    let per_path: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let sk = sampler.skeleton(times, horizon, seed, p);
            let states = sampler.states(&start, &sk.times, &sk.brownian, &sk.jumps);
            times
                .iter()
                .map(|t| {
                    let i = sk.times.partition_point(|s| s < t);
                    half_gap_sq(&states[i], d)
                })
                .collect()
        })
        .collect();

    Ok((0..times.len())
        .map(|c| {
            let col: Vec<f64> = per_path.iter().map(|row| row[c]).collect();
            McEstimate::from_samples(&col)
        })
        .collect())
}

/// `E sup_{t ≤ T} |X_t − Y_t|²` from `(0, 0)` over the jump epochs and a grid of
/// at least `n_grid` intervals. A skeleton sup underestimates the true one.
pub fn estimate_sup_distance(
    j: &CoupledTriplet,
    horizon: f64,
    n_paths: usize,
    n_grid: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_horizon(horizon)?;
    check_paths(n_paths)?;
    if n_grid < MIN_GRID {
        return Err(Error::invalid("grid", format!("need at least {MIN_GRID} points, got {n_grid}")));
    }
    let d = j.dim();
    let sampler = Sampler::new(j)?;
    let start = vec![0.0; 2 * d];
    let levels = grid_levels(n_grid);
    let sups: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| {
            let sk = sampler.skeleton(&[horizon], horizon, seed, p);
            let (times, brownian) = sampler.refine(&sk, levels, seed, p);
            sampler
                .states(&start, &times, &brownian, &sk.jumps)
                .iter()
                .map(|z| 2.0 * half_gap_sq(z, d))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(McEstimate::from_samples(&sups))
}
