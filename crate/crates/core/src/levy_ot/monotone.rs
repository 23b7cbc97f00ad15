//! 2-cyclical monotonicity of a finite support set.
//!
//! A set `{(x_k, y_k)}` is 2-cyclically monotone if no cyclic reassignment
//! `y_k → y_{k+1}` lowers `Σ ½|x_k − y_k|²`. Expanding the squares, the
//! saving of the cycle `a_1 → a_2 → … → a_L → a_1` is
//!
//! ```text
//! Σ_k ⟨x_{a_k}, y_{a_{k+1}} − y_{a_k}⟩
//! ```
//!
//! so a violation is a positive-weight cycle in the complete digraph with arc
//! weights `W[a][b] = ⟨x_a, y_b − y_a⟩`. Every closed walk splits into simple
//! cycles no longer than itself, so the best closed walk of each length
//! (max-plus matrix powers) decides all cycles up to that length exactly.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::{dot, Point};

/// Cycle lengths checked exhaustively are capped here.
pub const MAX_EXHAUSTIVE_CYCLE: usize = 6;

/// Random cycles drawn after the exhaustive pass.
pub const DEFAULT_RANDOM_CYCLES: usize = 10_000;

#[derive(Clone, Debug)]
pub struct CycleCheck {
    /// Cycles of length `2..=min(max_cycle, 6)` are enumerated exhaustively.
    pub max_cycle: usize,
    /// Random cycles of uniformly drawn length in `2..=N` (N = point count).
    pub random_cycles: usize,
    pub seed: u64,
}

impl CycleCheck {
    pub fn new(max_cycle: usize) -> Self {
        CycleCheck {
            max_cycle,
            random_cycles: DEFAULT_RANDOM_CYCLES,
            seed: 0x5eed,
        }
    }
}

impl Default for CycleCheck {
    fn default() -> Self {
        Self::new(4)
    }
}

#[derive(Clone, Debug)]
pub struct MonotonicityReport {
    pub passed: bool,
    /// Exhaustive cycle length actually covered.
    pub exhaustive_len: usize,
    pub random_cycles: usize,
    /// Largest cost saving found over all checked cycles (≤ tolerance when passed).
    pub worst_saving: f64,
    pub tolerance: f64,
    /// A simple violating cycle `(x_k, y_k)`; the cheaper assignment sends `x_k` to `y_{k+1}`.
    pub violation: Option<Vec<(Point, Point)>>,
}

/// Checks `points ∪ {(0,0)}` for 2-cyclical monotonicity.
///
/// The origin pair is always adjoined: optimal Lévy couplings may route mass
/// through the origin on either side.
pub fn check_cyclical_monotonicity(points: &[(Point, Point)], config: &CycleCheck) -> MonotonicityReport {
    check_support(points, config, true)
}

pub(crate) fn check_support(points: &[(Point, Point)], config: &CycleCheck, adjoin_origin: bool) -> MonotonicityReport {
    let mut pts: Vec<(Point, Point)> = Vec::with_capacity(points.len() + 1);
    if adjoin_origin {
        if let Some((x, _)) = points.first() {
            pts.push((Point::origin(x.dim()), Point::origin(x.dim())));
        }
    }
    for p in points {
        if !pts.contains(p) {
            pts.push(p.clone());
        }
    }
    let n = pts.len();
    let scale = pts.iter().map(|(x, y)| x.norm_sq() + y.norm_sq()).fold(0.0, f64::max);
    let tolerance = 1e-9 * (1.0 + scale);

    let w: Vec<f64> = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            dot(&pts[a].0, &pts[b].1) - dot(&pts[a].0, &pts[a].1)
        })
        .collect();

    let exhaustive_len = config.max_cycle.min(MAX_EXHAUSTIVE_CYCLE).min(n);
    let mut best = Best::default();
    if n >= 2 && exhaustive_len >= 2 {
        exhaustive(&w, n, exhaustive_len, &mut best);
    }

    let mut drawn = 0;
    if n >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.random_cycles {
            let len = rng.random_range(2..=n);
            let cycle = index::sample(&mut rng, n, len).into_vec();
            best.offer(cycle_weight(&w, n, &cycle), || cycle.clone());
            drawn += 1;
        }
    }

    let passed = best.saving <= tolerance;
    let violation = (!passed).then(|| {
        let walk = best.walk.clone();
        simple_positive_cycle(&w, n, walk, tolerance)
            .into_iter()
            .map(|k| pts[k].clone())
            .collect()
    });
    MonotonicityReport {
        passed,
        exhaustive_len: if n >= 2 { exhaustive_len } else { 0 },
        random_cycles: drawn,
        worst_saving: best.saving.max(0.0),
        tolerance,
        violation,
    }
}

#[derive(Default)]
struct Best {
    saving: f64,
    walk: Vec<usize>,
}

impl Best {
    fn offer(&mut self, saving: f64, walk: impl FnOnce() -> Vec<usize>) {
        if saving > self.saving {
            self.saving = saving;
            self.walk = walk();
        }
    }
}

fn cycle_weight(w: &[f64], n: usize, cycle: &[usize]) -> f64 {
    (0..cycle.len())
        .map(|k| w[cycle[k] * n + cycle[(k + 1) % cycle.len()]])
        .sum()
}

/// Max-plus product `(P ⊗ W)[a][b] = max_c P[a][c] + W[c][b]` with argmax.
fn maxplus(p: &[f64], q: &[f64], n: usize) -> (Vec<f64>, Vec<usize>) {
    let mut out = vec![f64::NEG_INFINITY; n * n];
    let mut arg = vec![0usize; n * n];
    for a in 0..n {
        for c in 0..n {
            let pac = p[a * n + c];
            let row = &q[c * n..(c + 1) * n];
            for (b, &qcb) in row.iter().enumerate() {
                let v = pac + qcb;
                if v > out[a * n + b] {
                    out[a * n + b] = v;
                    arg[a * n + b] = c;
                }
            }
        }
    }
    (out, arg)
}

/// Best closed walks of every length `2..=len` (len ≤ 6).
fn exhaustive(w: &[f64], n: usize, len: usize, best: &mut Best) {
    // Length 2: W[a][b] + W[b][a].
    for a in 0..n {
        for b in 0..n {
            if a != b {
                best.offer(w[a * n + b] + w[b * n + a], || vec![a, b]);
            }
        }
    }
    if len < 3 {
        return;
    }
    let (p2, arg2) = maxplus(w, w, n);
    let walk2 = |a: usize, b: usize| vec![a, arg2[a * n + b]];
    // Length 3: P2[a][b] + W[b][a]; length 4: P2[a][b] + P2[b][a].
    for a in 0..n {
        for b in 0..n {
            best.offer(p2[a * n + b] + w[b * n + a], || {
                let mut v = walk2(a, b);
                v.push(b);
                v
            });
            if len >= 4 {
                best.offer(p2[a * n + b] + p2[b * n + a], || {
                    let mut v = walk2(a, b);
                    v.extend(walk2(b, a));
                    v
                });
            }
        }
    }
    if len < 5 {
        return;
    }
    let (p3, arg3) = maxplus(&p2, w, n);
    let walk3 = |a: usize, b: usize| {
        let c = arg3[a * n + b];
        let mut v = walk2(a, c);
        v.push(c);
        v
    };
    for a in 0..n {
        for b in 0..n {
            best.offer(p3[a * n + b] + p2[b * n + a], || {
                let mut v = walk3(a, b);
                v.extend(walk2(b, a));
                v
            });
            if len >= 6 {
                best.offer(p3[a * n + b] + p3[b * n + a], || {
                    let mut v = walk3(a, b);
                    v.extend(walk3(b, a));
                    v
                });
            }
        }
    }
}

/// Splits a positive closed walk at repeated vertices until a simple cycle
/// with positive saving remains.
fn simple_positive_cycle(w: &[f64], n: usize, mut walk: Vec<usize>, tol: f64) -> Vec<usize> {
    loop {
        let split = (0..walk.len()).find_map(|i| (i + 1..walk.len()).find(|&j| walk[j] == walk[i]).map(|j| (i, j)));
        let Some((i, j)) = split else {
            return walk;
        };
        let inner: Vec<usize> = walk[i..j].to_vec();
        let mut outer: Vec<usize> = walk[..i].to_vec();
        outer.extend_from_slice(&walk[j..]);
        walk = if cycle_weight(w, n, &inner) > tol || outer.len() < 2 {
            inner
        } else {
            outer
        };
        if walk.len() < 2 {
            return walk;
        }
    }
}
