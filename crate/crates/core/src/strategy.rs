//! Coupling constructions selectable by name.
//!
//! Each strategy turns a pair of triplets into a [`CoupledTriplet`]. The
//! optimal one is the reference; the others are admissible but suboptimal
//! couplings used for comparison.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::gen_metric::{build_independent_coupling, build_optimal_coupling, CoupledTriplet};
use crate::levy_ot::levy_ot_solve;
use crate::psd_transport::optimal_cross_block;
use crate::types::{LevyCoupling, LevyTriplet};

pub trait CouplingStrategy: Send + Sync {
    fn name(&self) -> &str;
    fn couple(&self, a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet>;
}

/// `K*` and `γ*`.
pub struct Optimal;

/// `K = 0` and `μ⊗δ₀ + δ₀⊗ν`.
pub struct Independent;

/// `K*` with the trivial jump coupling.
pub struct OptimalDiffusion;

/// `K = 0` with the optimal jump coupling.
pub struct OptimalJumps;

/// `λ` times the optimal coupling plus `1 − λ` times the independent one,
/// in both the cross block and the jump coupling.
pub struct Mixture {
    pub lambda: f64,
}

impl CouplingStrategy for Optimal {
    fn name(&self) -> &str {
        "optimal"
    }

    fn couple(&self, a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet> {
        build_optimal_coupling(a, b)
    }
}

impl CouplingStrategy for Independent {
    fn name(&self) -> &str {
        "independent"
    }

    fn couple(&self, a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet> {
        build_independent_coupling(a, b)
    }
}

impl CouplingStrategy for OptimalDiffusion {
    fn name(&self) -> &str {
        "optimal-diffusion"
    }

    fn couple(&self, a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet> {
        check_dim(a.dim(), b.dim())?;
        let cross = optimal_cross_block(a.diffusion(), b.diffusion())?.cross_block;
        CoupledTriplet::assemble(a, b, &cross, LevyCoupling::trivial(a.jumps(), b.jumps())?)
    }
}

impl CouplingStrategy for OptimalJumps {
    fn name(&self) -> &str {
        "optimal-jumps"
    }

    fn couple(&self, a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet> {
        check_dim(a.dim(), b.dim())?;
        let d = a.dim();
        let plan = levy_ot_solve(a.jumps(), b.jumps())?.plan;
        CoupledTriplet::assemble(a, b, &DMatrix::zeros(d, d), plan)
    }
}

impl CouplingStrategy for Mixture {
    fn name(&self) -> &str {
        "mixture"
    }

    fn couple(&self, a: &LevyTriplet, b: &LevyTriplet) -> Result<CoupledTriplet> {
        let opt = build_optimal_coupling(a, b)?;
        let trivial = LevyCoupling::trivial(a.jumps(), b.jumps())?;
        let jumps = opt.jumps().mixture(&trivial, self.lambda)?;
        CoupledTriplet::assemble(a, b, &(opt.cross_block() * self.lambda), jumps)
    }
}

/// Strategies keyed by name.
pub struct StrategyRegistry {
    entries: BTreeMap<String, Box<dyn CouplingStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry { entries: BTreeMap::new() }
    }

    /// The five built-in strategies; `mixture` uses `λ = ½`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Optimal));
        r.register(Box::new(Independent));
        r.register(Box::new(OptimalDiffusion));
        r.register(Box::new(OptimalJumps));
        r.register(Box::new(Mixture { lambda: 0.5 }));
        r
    }

    /// Adds or replaces a strategy under its own name.
    pub fn register(&mut self, s: Box<dyn CouplingStrategy>) {
        self.entries.insert(s.name().to_string(), s);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CouplingStrategy> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn CouplingStrategy> {
        self.entries.values().map(|b| b.as_ref())
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DiscreteLevyMeasure, Point, PsdMatrix};

    fn pair() -> (LevyTriplet, LevyTriplet) {
        let a = LevyTriplet::new(
            Point::new(vec![0.5, -1.0]).unwrap(),
            PsdMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
            DiscreteLevyMeasure::new(2, [(vec![1.0, 0.0], 1.0), (vec![0.0, -2.0], 0.5)]).unwrap(),
        )
        .unwrap();
        let b = LevyTriplet::new(
            Point::new(vec![0.0, 0.0]).unwrap(),
            PsdMatrix::from_diagonal(&[1.0, 3.0]).unwrap(),
            DiscreteLevyMeasure::new(2, [(vec![-1.0, 0.5], 2.0)]).unwrap(),
        )
        .unwrap();
        (a, b)
    }

    #[test]
    fn every_default_strategy_has_the_right_marginals() {
        let (a, b) = pair();
        let reg = StrategyRegistry::with_defaults();
        assert_eq!(
            reg.names().collect::<Vec<_>>(),
            ["independent", "mixture", "optimal", "optimal-diffusion", "optimal-jumps"]
        );
        for s in reg.iter() {
            let j = s.couple(&a, &b).unwrap();
            assert!(j.check_marginals(&a, &b).unwrap(), "{}", s.name());
        }
    }

    #[test]
    fn optimal_grows_slowest() {
        let (a, b) = pair();
        let reg = StrategyRegistry::with_defaults();
        let opt = reg.get("optimal").unwrap().couple(&a, &b).unwrap();
        let o = [0.0, 0.0];
        for s in reg.iter() {
            let j = s.couple(&a, &b).unwrap();
            for t in [0.1, 1.0, 10.0] {
                assert!(opt.predicted_growth(&o, &o, t).unwrap() <= j.predicted_growth(&o, &o, t).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            StrategyRegistry::with_defaults().get("greedy"),
            Err(Error::UnknownStrategy(_))
        ));
    }
}
