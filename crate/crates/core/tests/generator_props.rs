mod common;

use common::*;
use levyot::{build_optimal_coupling, generator_distance, optimal_growth, theta2, LevyTriplet, Point, StrategyRegistry};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn theta2_depends_on_difference_only(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 6, false);
        let b = random_triplet(&mut rng, d, 6, false);
        let (x, y, h) = (random_point(&mut rng, d), random_point(&mut rng, d), random_point(&mut rng, d));
        let shift = |p: &[f64]| p.iter().zip(&h).map(|(u, v)| u + v).collect::<Vec<f64>>();
        let base = theta2(&a, &b, &x, &y).unwrap();
        let moved = theta2(&a, &b, &shift(&x), &shift(&y)).unwrap();
        prop_assert!((base - moved).abs() <= 1e-10 * (1.0 + base.abs()));
        let dist = generator_distance(&a, &b).unwrap();
        prop_assert!((theta2(&a, &b, &x, &x).unwrap() - dist.theta0()).abs() <= 1e-12 * (1.0 + dist.theta0()));
    }

    #[test]
    fn distance_vanishes_only_on_identity(seed in any::<u64>(), d in 1usize..=3, eps in 1e-3f64..1.0, k in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 6, false);
        prop_assert!(generator_distance(&a, &a).unwrap().total_sq <= 1e-12 * (1.0 + a.covariance_matrix().trace()));
        let mut drift = a.drift().to_vec();
        drift[k % d] += eps;
        let b = LevyTriplet::new(Point::new(drift).unwrap(), a.diffusion().clone(), a.jumps().clone()).unwrap();
        prop_assert!(!a.canonical_eq(&b));
        let g = generator_distance(&a, &b).unwrap().total_sq;
        prop_assert!((g - 0.5 * eps * eps).abs() <= 1e-9);
    }

    #[test]
    fn zero_gap_growth_bounded_by_distance(seed in any::<u64>(), d in 1usize..=3, t in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 6, false);
        let b = random_triplet(&mut rng, d, 6, false);
        let x = random_point(&mut rng, d);
        let dist = generator_distance(&a, &b).unwrap();
        let growth = optimal_growth(&dist, &a, &b, &x, &x, t).unwrap();
        prop_assert!(growth <= t.max(t * t) * dist.total_sq * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn optimal_coupling_grows_slowest(seed in any::<u64>(), d in 1usize..=3, t in 0.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_triplet(&mut rng, d, 6, false);
        let b = random_triplet(&mut rng, d, 6, false);
        let (x, y) = (random_point(&mut rng, d), random_point(&mut rng, d));
        let opt = build_optimal_coupling(&a, &b).unwrap();
        prop_assert!(opt.check_marginals(&a, &b).unwrap());
        let g = opt.predicted_growth(&x, &y, t).unwrap();
        let dist = generator_distance(&a, &b).unwrap();
        prop_assert!((g - optimal_growth(&dist, &a, &b, &x, &y, t).unwrap()).abs() <= 1e-9 * (1.0 + g));
        for s in StrategyRegistry::with_defaults().iter() {
            let j = s.couple(&a, &b).unwrap();
            prop_assert!(j.check_marginals(&a, &b).unwrap(), "{} breaks marginals", s.name());
            prop_assert!(g <= j.predicted_growth(&x, &y, t).unwrap() + 1e-10 * (1.0 + g), "{} beats optimal", s.name());
        }
    }
}
