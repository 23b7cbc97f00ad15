//! Primal network simplex for balanced transportation problems.
//!
//! The basis is a spanning tree of the complete bipartite graph on
//! `m` sources and `n` sinks (`m + n − 1` arcs). Pricing is Dantzig's rule
//! (most negative reduced cost); after a run of degenerate pivots the solver
//! switches to Bland's rule (lowest arc index entering, lowest arc index
//! leaving among ties) until the next nondegenerate pivot, which rules out
//! cycling.

use crate::error::{Error, Result};

/// Balanced transportation problem with row-major `cost[i * n + j]`.
#[derive(Clone, Debug)]
pub(crate) struct TransportProblem {
    pub supply: Vec<f64>,
    pub demand: Vec<f64>,
    pub cost: Vec<f64>,
}

/// Optimal flows with node potentials satisfying `u[i] + v[j] = cost[i,j]` on
/// every basic arc and `≤` elsewhere (up to the pricing tolerance).
#[derive(Clone, Debug)]
pub(crate) struct TransportOutcome {
    pub flow: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

impl TransportProblem {
    fn m(&self) -> usize {
        self.supply.len()
    }

    fn n(&self) -> usize {
        self.demand.len()
    }
}

struct Tree {
    m: usize,
    n: usize,
    /// Adjacency over nodes `0..m` (sources) and `m..m+n` (sinks): `(neighbor, arc)`.
    adj: Vec<Vec<(usize, usize)>>,
}

impl Tree {
    fn build(m: usize, n: usize, basis: &[usize]) -> Self {
        let mut adj = vec![Vec::new(); m + n];
        for &arc in basis {
            let (i, j) = (arc / n, arc % n);
            adj[i].push((m + j, arc));
            adj[m + j].push((i, arc));
        }
        Tree { m, n, adj }
    }

    fn potentials(&self, cost: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (m, n) = (self.m, self.n);
        let mut pot = vec![f64::NAN; m + n];
        let mut stack = vec![0usize];
        pot[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &(next, arc) in &self.adj[node] {
                if pot[next].is_nan() {
                    // u_i + v_j = c_ij
                    pot[next] = cost[arc] - pot[node];
                    stack.push(next);
                }
            }
        }
        if pot.iter().any(|p| p.is_nan()) {
            return Err(Error::Solver("basis is not a spanning tree".into()));
        }
        let v = pot.split_off(m);
        debug_assert_eq!(v.len(), n);
        Ok((pot, v))
    }

    /// Arcs on the tree path from `from` to `to`, in walking order.
    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(node) = stack.pop() {
            if node == to {
                break;
            }
            for &(next, arc) in &self.adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, arc));
                    stack.push(next);
                }
            }
        }
        let mut arcs = Vec::new();
        let mut node = to;
        while node != from {
            let (prev, arc) = parent[node].expect("tree is connected");
            arcs.push(arc);
            node = prev;
        }
        arcs.reverse();
        arcs
    }

    /// Flows induced by the tree and the node balances (leaf elimination).
    fn flows(&self, supply: &[f64], demand: &[f64]) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        let mut residual: Vec<f64> = supply.iter().chain(demand).copied().collect();
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut removed = vec![false; m + n];
        let mut flow = vec![0.0; m * n];
        let mut leaves: Vec<usize> = (0..m + n).filter(|&k| degree[k] == 1).collect();
        while let Some(leaf) = leaves.pop() {
            if removed[leaf] || degree[leaf] != 1 {
                continue;
            }
            let &(other, arc) = self.adj[leaf]
                .iter()
                .find(|(o, _)| !removed[*o])
                .expect("leaf has one live neighbor");
            let f = residual[leaf];
            flow[arc] = f;
            residual[other] -= f;
            removed[leaf] = true;
            degree[other] -= 1;
            if degree[other] == 1 {
                leaves.push(other);
            }
        }
        flow
    }
}

/// Northwest-corner initial basis: a staircase spanning tree.
fn northwest_corner(p: &TransportProblem) -> Vec<usize> {
    let (m, n) = (p.m(), p.n());
    let mut s = p.supply.clone();
    let mut d = p.demand.clone();
    let (mut i, mut j) = (0, 0);
    let mut basis = Vec::with_capacity(m + n - 1);
    loop {
        basis.push(i * n + j);
        let x = s[i].min(d[j]);
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}

pub(crate) fn solve(p: &TransportProblem) -> Result<TransportOutcome> {
    let (m, n) = (p.m(), p.n());
    if m == 0 || n == 0 {
        return Err(Error::Solver("transport problem needs at least one source and one sink".into()));
    }
    debug_assert_eq!(p.cost.len(), m * n);

    let total: f64 = p.supply.iter().sum();
    let cost_scale = 1.0 + p.cost.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    let price_tol = 1e-12 * cost_scale;
    let flow_tol = 1e-14 * (1.0 + total);
    let degenerate_limit = m + n;
    let max_pivots = 50 * (m + n) * (m * n).max(16);

    let mut basis = northwest_corner(p);
    let mut in_basis = vec![false; m * n];
    for &a in &basis {
        in_basis[a] = true;
    }
    let mut flow = Tree::build(m, n, &basis).flows(&p.supply, &p.demand);

    let mut pivots = 0;
    let mut degenerate_run = 0;
    loop {
        let tree = Tree::build(m, n, &basis);
        let (u, v) = tree.potentials(&p.cost)?;

        let bland = degenerate_run >= degenerate_limit;
        let mut entering: Option<(usize, f64)> = None;
        for arc in 0..m * n {
            if in_basis[arc] {
                continue;
            }
            let r = p.cost[arc] - u[arc / n] - v[arc % n];
            if r < -price_tol {
                if bland {
                    entering = Some((arc, r));
                    break;
                }
                if entering.is_none_or(|(_, best)| r < best) {
                    entering = Some((arc, r));
                }
            }
        }
        let Some((enter, _)) = entering else {
            let flow = tree.flows(&p.supply, &p.demand);
            return Ok(TransportOutcome {
                flow,
                u,
                v,
                pivots,
            });
        };

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver(format!("no convergence after {max_pivots} pivots")));
        }

        // Cycle: enter (i, j) with +θ, then walk the tree from sink j back to
        // source i; arcs alternate −, +, −, ... along that path.
        let (ei, ej) = (enter / n, enter % n);
        let path = tree.path(m + ej, ei);
        let decreasing = || path.iter().step_by(2).copied();
        let theta = decreasing().map(|arc| flow[arc].max(0.0)).fold(f64::INFINITY, f64::min);
        let leave = decreasing()
            .filter(|&arc| flow[arc].max(0.0) <= theta + flow_tol)
            .min()
            .expect("cycle has a decreasing arc");
        for (k, &arc) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[arc] -= theta;
            } else {
                flow[arc] += theta;
            }
        }
        flow[enter] = theta;
        flow[leave] = 0.0;

        if theta <= flow_tol {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }

        in_basis[leave] = false;
        in_basis[enter] = true;
        let slot = basis.iter().position(|&a| a == leave).expect("leaving arc is basic");
        basis[slot] = enter;
    }
}
