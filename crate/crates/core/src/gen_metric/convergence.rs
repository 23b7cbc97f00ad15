//! Diagnostics for `W_Λ` convergence of a sequence of measures.
//!
//! Three quantities are tracked against a target: `W_Λ` itself, the gap in
//! second moments, and the largest integral defect over a fixed battery of
//! test functions `φ_k(x) = min{1, |x|²} / (1 + |x − c_k|²/ℓ²)`. The centers
//! `c_k` follow a Halton sequence in the bounding box of all atoms.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::levy_ot::levy_ot_solve;
use crate::types::DiscreteLevyMeasure;

pub const BATTERY_SIZE: usize = 32;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceEntry {
    pub w_lambda: f64,
    pub moment_gap: f64,
    pub battery_defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    /// The moment gap and battery defect rank-correlate nonnegatively with `W_Λ`.
    pub co_trending: bool,
}

struct Battery {
    centers: Vec<Vec<f64>>,
    inv_scale_sq: f64,
}

impl Battery {
    fn new(measures: &[&DiscreteLevyMeasure], dim: usize) -> Self {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for a in measures.iter().flat_map(|m| m.atoms()) {
            for i in 0..dim {
                lo[i] = lo[i].min(a.x[i]);
                hi[i] = hi[i].max(a.x[i]);
            }
        }
        if lo[0] > hi[0] {
            lo.fill(-1.0);
            hi.fill(1.0);
        }
        let diam = lo.iter().zip(&hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt();
        let scale = if diam > 0.0 { diam / 4.0 } else { 1.0 };
        let centers = (1..=BATTERY_SIZE as u64)
            .map(|k| {
                (0..dim)
                    .map(|i| lo[i] + (hi[i] - lo[i]) * halton(k, PRIMES[i % PRIMES.len()]))
                    .collect()
            })
            .collect();
        Battery {
            centers,
            inv_scale_sq: 1.0 / (scale * scale),
        }
    }

    fn integrals(&self, m: &DiscreteLevyMeasure) -> Vec<f64> {
        self.centers
            .iter()
            .map(|c| {
                m.atoms()
                    .iter()
                    .map(|a| {
                        let r = a.x.norm_sq().min(1.0);
                        a.w * r / (1.0 + a.x.dist_sq(c) * self.inv_scale_sq)
                    })
                    .sum()
            })
            .collect()
    }
}

fn halton(mut index: u64, base: u32) -> f64 {
    let b = base as f64;
    let (mut f, mut r) = (1.0, 0.0);
    while index > 0 {
        f /= b;
        r += f * (index % base as u64) as f64;
        index /= base as u64;
    }
    r
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sign of Kendall's tau numerator between two equally long series.
fn concordance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            s += sign(a[i] - a[j]) * sign(b[i] - b[j]);
        }
    }
    s
}

pub fn lambda_convergence_report(seq: &[DiscreteLevyMeasure], target: &DiscreteLevyMeasure) -> Result<ConvergenceReport> {
    if seq.is_empty() {
        return Err(Error::invalid("sequence", "must contain at least one measure"));
    }
    for m in seq {
        check_dim(target.dim(), m.dim())?;
    }
    let all: Vec<&DiscreteLevyMeasure> = seq.iter().chain([target]).collect();
    let battery = Battery::new(&all, target.dim());
    let reference = battery.integrals(target);
    let target_moment = target.second_moment();

    let entries = seq
        .par_iter()
        .map(|m| {
            let w_lambda = levy_ot_solve(m, target)?.cost.sqrt();
            let battery_defect = battery
                .integrals(m)
                .iter()
                .zip(&reference)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            Ok(ConvergenceEntry {
                w_lambda,
                moment_gap: (m.second_moment() - target_moment).abs(),
                battery_defect,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let w: Vec<f64> = entries.iter().map(|e| e.w_lambda).collect();
    let g: Vec<f64> = entries.iter().map(|e| e.moment_gap).collect();
    let b: Vec<f64> = entries.iter().map(|e| e.battery_defect).collect();
    let co_trending = concordance(&w, &g) >= 0.0 && concordance(&w, &b) >= 0.0;
    Ok(ConvergenceReport { entries, co_trending })
}
