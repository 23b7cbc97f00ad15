//! Exact skeleton sampling of a coupled Lévy process.
//!
//! Jumps form a compound Poisson process with intensity `Σ w` and the drift is
//! compensated by the jump mean, so `Z_t = z + (η − Σ w z′)t + σ^{1/2}B_t + J_t`.
//! The Brownian motion is sampled at the jump epochs and checkpoints
//! (sequentially) and then on a dyadic grid by Brownian bridges. Each grid
//! node draws from its own position in a counter-based stream, so a finer grid
//! reproduces every value of a coarser one.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::gen_metric::CoupledTriplet;
use crate::linalg;

const GRID_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const WORDS_PER_NODE: u128 = 256;

/// Recorded epochs of one path of `Z = (X, Y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    /// States in `R^{2d}`, right-continuous at jump epochs.
    pub states: Vec<Vec<f64>>,
}

impl PathSample {
    /// One row per epoch: `t,z_1,...,z_{2d}`.
    pub fn to_csv(&self) -> String {
        let k = self.states.first().map_or(0, Vec::len);
        let d = k / 2;
        let mut out = String::from("t");
        for i in 1..=d {
            out.push_str(&format!(",x{i}"));
        }
        for i in 1..=d {
            out.push_str(&format!(",y{i}"));
        }
        out.push('\n');
        for (t, z) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:.16e}"));
            for v in z {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Precomputed simulation data of a coupled triplet.
pub(crate) struct Sampler {
    k: usize,
    root: DMatrix<f64>,
    drift: Vec<f64>,
    jumps: Vec<Vec<f64>>,
    rate: f64,
    pick: Option<WeightedIndex<f64>>,
}

/// Brownian skeleton and jumps of one path.
pub(crate) struct Skeleton {
    /// Sorted distinct times, including 0.
    pub times: Vec<f64>,
    /// Brownian values, `k` per time.
    pub brownian: Vec<f64>,
    /// Jump epochs and atom indices, in time order.
    pub jumps: Vec<(f64, usize)>,
}

impl Sampler {
    pub fn new(j: &CoupledTriplet) -> Result<Self> {
        let k = 2 * j.dim();
        let root = linalg::psd_sqrt(j.diffusion())?;
        let jumps: Vec<Vec<f64>> = j.jumps().atoms().iter().map(|a| a.x.concat(&a.y).into_vec()).collect();
        let weights: Vec<f64> = j.jumps().atoms().iter().map(|a| a.w).collect();
        let rate: f64 = weights.iter().sum();
        let mut drift = j.drift().to_vec();
        for (z, w) in jumps.iter().zip(&weights) {
            for (c, v) in drift.iter_mut().zip(z) {
                *c -= w * v;
            }
        }
        let pick = if weights.is_empty() {
            None
        } else {
            Some(WeightedIndex::new(&weights).map_err(|e| Error::invalid("jumps", e.to_string()))?)
        };
        Ok(Sampler {
            k,
            root,
            drift,
            jumps,
            rate,
            pick,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    /// Samples jumps up to `horizon` and the Brownian motion at `checkpoints ∪ jump epochs`.
    pub fn skeleton(&self, checkpoints: &[f64], horizon: f64, seed: u64, path: u64) -> Skeleton {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);

        let mut jumps = Vec::new();
        if let Some(pick) = &self.pick {
            let exp = Exp::new(self.rate).expect("positive total intensity");
            let mut t = 0.0;
            loop {
                t += exp.sample(&mut rng);
                if t > horizon {
                    break;
                }
                jumps.push((t, pick.sample(&mut rng)));
            }
        }

        let mut times: Vec<f64> = std::iter::once(0.0)
            .chain(jumps.iter().map(|&(t, _)| t))
            .chain(checkpoints.iter().copied())
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();

        let k = self.k;
        let mut brownian = vec![0.0; times.len() * k];
        for i in 1..times.len() {
            let sd = (times[i] - times[i - 1]).sqrt();
            for c in 0..k {
                let z: f64 = rng.sample(StandardNormal);
                brownian[i * k + c] = brownian[(i - 1) * k + c] + sd * z;
            }
        }
        Skeleton { times, brownian, jumps }
    }

    /// Adds the dyadic grid `T·j/2^levels` to a skeleton whose last time is `T`.
    pub fn refine(&self, sk: &Skeleton, levels: u32, seed: u64, path: u64) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let horizon = *sk.times.last().expect("skeleton contains 0");
        let n = 1usize << levels;
        let mut grid_b = vec![0.0; (n + 1) * k];
        let last = sk.times.len() - 1;
        grid_b[n * k..].copy_from_slice(&sk.brownian[last * k..]);

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ GRID_SALT);
        rng.set_stream(path);
        let mut z = vec![0.0; k];

        for l in 1..=levels {
            let step = n >> l;
            let denom = (1u64 << l) as f64;
            for j in (1..1usize << l).step_by(2) {
                let s = horizon * (j as f64 / denom);
                let idx = j * step;
                let pos = sk.times.partition_point(|&t| t < s);
                if pos < sk.times.len() && sk.times[pos] == s {
                    grid_b[idx * k..(idx + 1) * k].copy_from_slice(&sk.brownian[pos * k..(pos + 1) * k]);
                    continue;
                }
                // Nearest known neighbors: coarser grid nodes or skeleton times.
                let (mut t0, mut b0) = (horizon * ((j - 1) as f64 / denom), (idx - step) * k);
                let mut left_in_grid = true;
                if pos > 0 && sk.times[pos - 1] > t0 {
                    t0 = sk.times[pos - 1];
                    b0 = (pos - 1) * k;
                    left_in_grid = false;
                }
                let (mut t1, mut b1) = (horizon * ((j + 1) as f64 / denom), (idx + step) * k);
                let mut right_in_grid = true;
                if pos < sk.times.len() && sk.times[pos] < t1 {
                    t1 = sk.times[pos];
                    b1 = pos * k;
                    right_in_grid = false;
                }

                rng.set_word_pos(((1u128 << l) + j as u128) * WORDS_PER_NODE);
                for v in z.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let frac = (s - t0) / (t1 - t0);
                let sd = ((s - t0) * (t1 - s) / (t1 - t0)).sqrt();
                for c in 0..k {
                    let left = if left_in_grid { grid_b[b0 + c] } else { sk.brownian[b0 + c] };
                    let right = if right_in_grid { grid_b[b1 + c] } else { sk.brownian[b1 + c] };
                    grid_b[idx * k + c] = left + frac * (right - left) + sd * z[c];
                }
            }
        }

        // Merge skeleton and grid interior into one timeline.
        let mut times = Vec::with_capacity(sk.times.len() + n);
        let mut values = Vec::with_capacity((sk.times.len() + n) * k);
        let (mut i, mut g) = (0usize, 1usize);
        while i < sk.times.len() || g < n {
            let tg = if g < n { horizon * (g as f64 / n as f64) } else { f64::INFINITY };
            let ts = sk.times.get(i).copied().unwrap_or(f64::INFINITY);
            if ts <= tg {
                times.push(ts);
                values.extend_from_slice(&sk.brownian[i * k..(i + 1) * k]);
                i += 1;
                if ts == tg {
                    g += 1;
                }
            } else {
                times.push(tg);
                values.extend_from_slice(&grid_b[g * k..(g + 1) * k]);
                g += 1;
            }
        }
        (times, values)
    }

    /// States `z + c·t + σ^{1/2}B_t + J_t` along a timeline.
    pub fn states(&self, start: &[f64], times: &[f64], brownian: &[f64], jumps: &[(f64, usize)]) -> Vec<Vec<f64>> {
        let k = self.k;
        let mut acc = start.to_vec();
        let mut next = 0;
        times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                while next < jumps.len() && jumps[next].0 <= t {
                    for (a, v) in acc.iter_mut().zip(&self.jumps[jumps[next].1]) {
                        *a += v;
                    }
                    next += 1;
                }
                let b = DVector::from_column_slice(&brownian[i * k..(i + 1) * k]);
                let diffusive = &self.root * b;
                (0..k).map(|c| acc[c] + self.drift[c] * t + diffusive[c]).collect()
            })
            .collect()
    }
}

pub(crate) fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("T", format!("horizon must be positive and finite, got {t}")))
    }
}

/// Grid levels for at least `n_grid` intervals.
pub(crate) fn grid_levels(n_grid: usize) -> u32 {
    n_grid.max(1).next_power_of_two().trailing_zeros()
}

/// One path on `[0, T]` with a 64-interval grid.
pub fn simulate_path(j: &CoupledTriplet, start: &[f64], horizon: f64, seed: u64) -> Result<PathSample> {
    simulate_path_on_grid(j, start, horizon, 64, seed, 0)
}

/// One path with at least `n_grid` grid intervals (rounded up to a power of two).
///
/// `path` selects the random stream, so distinct indices give independent paths.
pub fn simulate_path_on_grid(
    j: &CoupledTriplet,
    start: &[f64],
    horizon: f64,
    n_grid: usize,
    seed: u64,
    path: u64,
) -> Result<PathSample> {
    check_horizon(horizon)?;
    let sampler = Sampler::new(j)?;
    check_dim(sampler.dim(), start.len())?;
    let sk = sampler.skeleton(&[horizon], horizon, seed, path);
    let (times, brownian) = sampler.refine(&sk, grid_levels(n_grid), seed, path);
    let states = sampler.states(start, &times, &brownian, &sk.jumps);
    Ok(PathSample { times, states })
}
