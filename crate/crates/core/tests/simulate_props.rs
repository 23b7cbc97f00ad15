mod common;

use common::*;
use levyot::simulate::{estimate_cost_growth, estimate_sup_distance, simulate_path, simulate_path_on_grid};
use levyot::{build_optimal_coupling, McEstimate};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PATHS: u64 = 4000;

/// Mean and standard error of a sample variance, via the fourth central moment.
fn variance_estimate(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (m2, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn same_seed_same_output(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 5, false);
        let b = random_triplet(&mut rng, d, 5, false);
        let j = build_optimal_coupling(&a, &b).unwrap();
        let start = random_point(&mut rng, 2 * d);
        prop_assert_eq!(simulate_path(&j, &start, 1.5, seed).unwrap(), simulate_path(&j, &start, 1.5, seed).unwrap());
        let x = &start[..d];
        let y = &start[d..];
        let e1 = estimate_cost_growth(&j, x, y, &[0.5, 1.0], 200, seed).unwrap();
        let e2 = estimate_cost_growth(&j, x, y, &[0.5, 1.0], 200, seed).unwrap();
        prop_assert_eq!(e1, e2);
    }

    #[test]
    fn finer_grid_refines_path(seed in any::<u64>(), d in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 5, false);
        let b = random_triplet(&mut rng, d, 5, false);
        let j = build_optimal_coupling(&a, &b).unwrap();
        let start = vec![0.0; 2 * d];
        let coarse = simulate_path_on_grid(&j, &start, 2.0, 64, seed, 3).unwrap();
        let fine = simulate_path_on_grid(&j, &start, 2.0, 256, seed, 3).unwrap();
        for (t, z) in coarse.times.iter().zip(&coarse.states) {
            let k = fine.times.iter().position(|s| s == t);
            prop_assert!(k.is_some(), "time {} missing from the finer grid", t);
            let w = &fine.states[k.unwrap()];
            prop_assert!(z.iter().zip(w).all(|(p, q)| (p - q).abs() <= 1e-12 * (1.0 + p.abs())));
        }
        let s64 = estimate_sup_distance(&j, 1.0, 200, 64, seed).unwrap().mean;
        let s256 = estimate_sup_distance(&j, 1.0, 200, 256, seed).unwrap().mean;
        prop_assert!(s64 <= s256 * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn source_marginal_moments(seed in any::<u64>(), d in 1usize..=3, horizon in 0.2f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 5, false);
        let b = random_triplet(&mut rng, d, 5, false);
        let j = build_optimal_coupling(&a, &b).unwrap();
        let x = random_point(&mut rng, d);
        let mut start = x.clone();
        start.extend(random_point(&mut rng, d));
        let u = random_point(&mut rng, d);
        let ends: Vec<Vec<f64>> = (0..PATHS)
            .map(|p| simulate_path_on_grid(&j, &start, horizon, 64, seed, p).unwrap().states.pop().unwrap())
            .collect();
        let m = a.mean_vector();
        let q = a.covariance_matrix();
        for i in 0..d {
            let xs: Vec<f64> = ends.iter().map(|z| z[i]).collect();
            let e = McEstimate::from_samples(&xs);
            prop_assert!(e.brackets(x[i] + horizon * m[i], 5.0), "mean {} off: {:?}", i, e);
        }
        let proj: Vec<f64> = ends.iter().map(|z| z.iter().zip(&u).map(|(p, q)| p * q).sum()).collect();
        let want: f64 = (0..d).map(|r| (0..d).map(|c| u[r] * q.matrix()[(r, c)] * u[c]).sum::<f64>()).sum::<f64>() * horizon;
        let (var, se) = variance_estimate(&proj);
        prop_assert!((var - want).abs() <= 5.0 * se + 1e-9 * (1.0 + want), "variance {} vs {} (se {})", var, want, se);
    }

    #[test]
    fn zero_mean_increments_uncorrelated_with_past(seed in any::<u64>(), d in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 5, true);
        let b = random_triplet(&mut rng, d, 5, true);
        let j = build_optimal_coupling(&a, &b).unwrap();
        let start = vec![0.0; 2 * d];
        let products: Vec<f64> = (0..PATHS)
            .map(|p| {
                let path = simulate_path_on_grid(&j, &start, 1.0, 64, seed, p).unwrap();
                let mid = &path.states[32];
                let end = path.states.last().unwrap();
                (0..2 * d).map(|i| (end[i] - mid[i]) * mid[i]).sum()
            })
            .collect();
        let e = McEstimate::from_samples(&products);
        prop_assert!(e.brackets(0.0, 5.0), "{:?}", e);
        let ends: Vec<f64> = (0..PATHS)
            .map(|p| simulate_path_on_grid(&j, &start, 1.0, 64, seed, p).unwrap().states.last().unwrap()[0])
            .collect();
        prop_assert!(McEstimate::from_samples(&ends).brackets(0.0, 5.0));
    }
}
