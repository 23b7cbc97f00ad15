//! Optimal transport between discrete Lévy measures.
//!
//! A Lévy coupling may create or absorb mass at the origin on either side, so
//! the problem is balanced by adding one origin node to each side of the
//! bipartite network: the origin source supplies `|ν|`, the origin sink
//! demands `|μ|`, and arc costs are `½|x − y|²` with `0` standing in for the
//! origin. The origin–origin arc is free; the mass it carries is the part of
//! each measure that is matched with the other side rather than created or
//! absorbed at the origin.

mod monotone;
mod network;

use std::cmp::Ordering;

pub use monotone::{
    check_cyclical_monotonicity, CycleCheck, MonotonicityReport, DEFAULT_RANDOM_CYCLES, MAX_EXHAUSTIVE_CYCLE,
};

use crate::error::{check_dim, Error, Result};
use crate::tol;
use crate::types::lex_cmp;
use crate::types::{CouplingAtom, DiscreteLevyMeasure, LevyCoupling, Point};
use network::{TransportProblem, TransportOutcome};

/// Point clouds above this size are only checked exhaustively on 2-cycles.
const FULL_CHECK_LIMIT: usize = 300;

/// Kantorovich potential on the atoms of a measure; implicitly zero at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    entries: Vec<(Point, f64)>,
}

impl Potential {
    fn new(measure: &DiscreteLevyMeasure, values: Vec<f64>) -> Self {
        let entries = measure.atoms().iter().map(|a| a.x.clone()).zip(values).collect();
        Potential { entries }
    }

    /// Value at `x`; `Some(0.0)` at the origin, `None` off the support.
    pub fn get(&self, x: &[f64]) -> Option<f64> {
        if x.iter().all(|&c| c == 0.0) {
            return Some(0.0);
        }
        self.entries
            .binary_search_by(|(p, _)| lex_cmp(p, x))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn entries(&self) -> &[(Point, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `⟨μ, φ⟩` for the measure this potential lives on.
    pub fn integrate(&self, measure: &DiscreteLevyMeasure) -> f64 {
        measure
            .atoms()
            .iter()
            .map(|a| a.w * self.get(&a.x).unwrap_or(0.0))
            .sum()
    }
}

/// Optimal plan, cost and dual certificate for a transport problem.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub cost: f64,
    pub plan: LevyCoupling,
    pub phi: Potential,
    pub psi: Potential,
    /// Primal cost minus dual value `⟨μ, φ⟩ + ⟨ν, ψ⟩`.
    pub duality_gap: f64,
    pub monotone_certified: bool,
    pub pivots: usize,
}

/// `W_Λ(μ, ν)²`: optimal Lévy coupling of two discrete Lévy measures.
///
/// The arguments are put in a canonical order before solving, so the result is
/// bitwise symmetric in `(μ, ν)`.
pub fn levy_ot_solve(mu: &DiscreteLevyMeasure, nu: &DiscreteLevyMeasure) -> Result<TransportSolution> {
    check_dim(mu.dim(), nu.dim())?;
    if measure_cmp(mu, nu) == Ordering::Greater {
        let sol = solve_levy(nu, mu)?;
        return Ok(TransportSolution {
            plan: sol.plan.swapped(),
            phi: sol.psi,
            psi: sol.phi,
            ..sol
        });
    }
    solve_levy(mu, nu)
}

fn solve_levy(mu: &DiscreteLevyMeasure, nu: &DiscreteLevyMeasure) -> Result<TransportSolution> {
    let d = mu.dim();
    let (m, n) = (mu.len(), nu.len());
    let origin = Point::origin(d);
    let src: Vec<&Point> = mu.atoms().iter().map(|a| &a.x).chain([&origin]).collect();
    let dst: Vec<&Point> = nu.atoms().iter().map(|a| &a.x).chain([&origin]).collect();

    let mut supply: Vec<f64> = mu.atoms().iter().map(|a| a.w).collect();
    supply.push(nu.total_mass());
    let mut demand: Vec<f64> = nu.atoms().iter().map(|a| a.w).collect();
    demand.push(mu.total_mass());
    let cost = cost_matrix(&src, &dst);

    let problem = TransportProblem { supply, demand, cost };
    let out = network::solve(&problem)?;

    // LP potentials are unique up to u + s, v − s. Moving each origin
    // potential onto the other side, φ_i = u_i + v_o and ψ_j = v_j + u_o,
    // zeroes both origin values and keeps feasibility because u_o + v_o ≤ 0
    // (reduced cost of the free origin–origin arc). The dual value is unchanged.
    let (u_o, v_o) = (out.u[m], out.v[n]);
    let phi: Vec<f64> = out.u[..m].iter().map(|u| u + v_o).collect();
    let psi: Vec<f64> = out.v[..n].iter().map(|v| v + u_o).collect();

    let plan = extract_plan(d, &src, &dst, &out, mu.total_mass() + nu.total_mass());
    let cost = plan.cost();
    let dual = dot_weights(mu, &phi) + dot_weights(nu, &psi);

    let support = plan.support();
    let mut check = CycleCheck::default();
    if support.len() > FULL_CHECK_LIMIT {
        check.max_cycle = 2;
    }
    let monotone_certified = check_cyclical_monotonicity(&support, &check).passed;

    Ok(TransportSolution {
        cost,
        plan,
        phi: Potential::new(mu, phi),
        psi: Potential::new(nu, psi),
        duality_gap: cost - dual,
        monotone_certified,
        pivots: out.pivots,
    })
}

fn cost_matrix(src: &[&Point], dst: &[&Point]) -> Vec<f64> {
    src.iter()
        .flat_map(|x| dst.iter().map(move |y| 0.5 * x.dist_sq(y)))
        .collect()
}

fn dot_weights(measure: &DiscreteLevyMeasure, values: &[f64]) -> f64 {
    measure.atoms().iter().zip(values).map(|(a, v)| a.w * v).sum()
}

fn extract_plan(d: usize, src: &[&Point], dst: &[&Point], out: &TransportOutcome, mass: f64) -> LevyCoupling {
    let n = dst.len();
    let cutoff = 1e-13 * (1.0 + mass);
    let atoms = out
        .flow
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > cutoff)
        .map(|(arc, &f)| CouplingAtom {
            x: src[arc / n].clone(),
            y: dst[arc % n].clone(),
            w: f,
        })
        .collect();
    LevyCoupling::canonical(d, atoms)
}

fn measure_cmp(a: &DiscreteLevyMeasure, b: &DiscreteLevyMeasure) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.atoms()
            .iter()
            .zip(b.atoms())
            .map(|(p, q)| p.x.lex_cmp(&q.x).then(p.w.total_cmp(&q.w)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Verifies and returns the normalized Kantorovich potentials of a solution.
///
/// Checks, on every pair of locations in `supp μ ∪ {0}` × `supp ν ∪ {0}`:
/// feasibility `φ(x) + ψ(y) ≤ ½|x − y|²`, equality on plan atoms, and that
/// `⟨μ, φ⟩ + ⟨ν, ψ⟩` reproduces the cost within [`tol::gap`].
pub fn extract_duals(
    sol: &TransportSolution,
    mu: &DiscreteLevyMeasure,
    nu: &DiscreteLevyMeasure,
) -> Result<(Potential, Potential)> {
    extract_duals_with_gap(sol, mu, nu, tol::GAP)
}

/// [`extract_duals`] with a caller-chosen relative gap tolerance.
pub fn extract_duals_with_gap(
    sol: &TransportSolution,
    mu: &DiscreteLevyMeasure,
    nu: &DiscreteLevyMeasure,
    rel_gap: f64,
) -> Result<(Potential, Potential)> {
    check_dim(mu.dim(), nu.dim())?;
    let d = mu.dim();
    let origin = Point::origin(d);
    let xs: Vec<&Point> = mu.atoms().iter().map(|a| &a.x).chain([&origin]).collect();
    let ys: Vec<&Point> = nu.atoms().iter().map(|a| &a.x).chain([&origin]).collect();
    let lookup = |pot: &Potential, p: &Point, side: &str| {
        pot.get(p)
            .ok_or_else(|| Error::InfeasibleDuals(format!("no {side} potential at {p}")))
    };

    let max_cost = xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| 0.5 * x.dist_sq(y)))
        .fold(0.0, f64::max);
    let slack = tol::NUM * max_cost.max(1.0);

    for x in &xs {
        let fx = lookup(&sol.phi, x, "source")?;
        for y in &ys {
            let gy = lookup(&sol.psi, y, "target")?;
            let excess = fx + gy - 0.5 * x.dist_sq(y);
            if excess > slack {
                return Err(Error::InfeasibleDuals(format!(
                    "φ({x}) + ψ({y}) exceeds the cost by {excess:e}"
                )));
            }
        }
    }
    for a in sol.plan.atoms() {
        let fx = lookup(&sol.phi, &a.x, "source")?;
        let gy = lookup(&sol.psi, &a.y, "target")?;
        let defect = (fx + gy - a.cost()).abs();
        if defect > slack {
            return Err(Error::InfeasibleDuals(format!(
                "complementary slackness fails on plan atom ({}, {}) by {defect:e}",
                a.x, a.y
            )));
        }
    }
    let dual = sol.phi.integrate(mu) + sol.psi.integrate(nu);
    let gap = sol.cost - dual;
    if gap.abs() > rel_gap * (1.0 + sol.cost.abs()) {
        return Err(Error::InfeasibleDuals(format!("duality gap {gap:e} at cost {}", sol.cost)));
    }
    Ok((sol.phi.clone(), sol.psi.clone()))
}

/// Optimal plan between two weighted point clouds of equal mass.
///
/// Points may sit anywhere, including the origin. Flows are reported as
/// `(source index, target index, mass)`.
#[derive(Clone, Debug)]
pub struct PointTransport {
    pub cost: f64,
    pub flows: Vec<(usize, usize, f64)>,
    pub source_potential: Vec<f64>,
    pub target_potential: Vec<f64>,
    pub duality_gap: f64,
}

pub fn classical_ot_points(source: &[(Vec<f64>, f64)], target: &[(Vec<f64>, f64)]) -> Result<PointTransport> {
    let ms: f64 = source.iter().map(|(_, w)| w).sum();
    let mt: f64 = target.iter().map(|(_, w)| w).sum();
    if (ms - mt).abs() > tol::marginal(ms.max(mt)) {
        return Err(Error::Unbalanced(ms, mt));
    }
    if let Some((x, _)) = source.first().or(target.first()) {
        for (p, _) in source.iter().chain(target) {
            check_dim(x.len(), p.len())?;
        }
    }
    if source.is_empty() || target.is_empty() {
        return Ok(PointTransport {
            cost: 0.0,
            flows: Vec::new(),
            source_potential: vec![0.0; source.len()],
            target_potential: vec![0.0; target.len()],
            duality_gap: 0.0,
        });
    }
    let supply: Vec<f64> = source.iter().map(|(_, w)| *w).collect();
    // Absorb sub-tolerance imbalance so the network is exactly balanced.
    let demand: Vec<f64> = target.iter().map(|(_, w)| w * ms / mt).collect();
    let n = target.len();
    let cost: Vec<f64> = source
        .iter()
        .flat_map(|(x, _)| target.iter().map(move |(y, _)| 0.5 * crate::types::dist_sq(x, y)))
        .collect();
    let problem = TransportProblem { supply, demand, cost };
    let out = network::solve(&problem)?;
    let cutoff = 1e-13 * (1.0 + ms);
    let flows: Vec<(usize, usize, f64)> = out
        .flow
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > cutoff)
        .map(|(arc, &f)| (arc / n, arc % n, f))
        .collect();
    let total: f64 = flows.iter().map(|&(i, j, f)| f * problem.cost[i * n + j]).sum();
    let dual: f64 = out.u.iter().zip(&problem.supply).map(|(u, s)| u * s).sum::<f64>()
        + out.v.iter().zip(&problem.demand).map(|(v, s)| v * s).sum::<f64>();
    Ok(PointTransport {
        cost: total,
        flows,
        source_potential: out.u,
        target_potential: out.v,
        duality_gap: total - dual,
    })
}

/// Classical quadratic optimal transport `C₂(μ, ν)` between equal-mass measures.
///
/// Same network as [`levy_ot_solve`] without the origin nodes. Potentials are
/// the solver's, normalized so the first source atom carries `φ = 0`.
pub fn classical_ot_solve(mu: &DiscreteLevyMeasure, nu: &DiscreteLevyMeasure) -> Result<TransportSolution> {
    check_dim(mu.dim(), nu.dim())?;
    let to_points = |m: &DiscreteLevyMeasure| -> Vec<(Vec<f64>, f64)> {
        m.atoms().iter().map(|a| (a.x.to_vec(), a.w)).collect()
    };
    let out = classical_ot_points(&to_points(mu), &to_points(nu))?;
    let plan = LevyCoupling::canonical(
        mu.dim(),
        out.flows
            .iter()
            .map(|&(i, j, f)| CouplingAtom {
                x: mu.atoms()[i].x.clone(),
                y: nu.atoms()[j].x.clone(),
                w: f,
            })
            .collect(),
    );
    let support = plan.support();
    let monotone_certified = monotone::check_support(&support, &CycleCheck::default(), false).passed;
    Ok(TransportSolution {
        cost: out.cost,
        plan,
        phi: Potential::new(mu, out.source_potential),
        psi: Potential::new(nu, out.target_potential),
        duality_gap: out.duality_gap,
        monotone_certified,
        pivots: 0,
    })
}
