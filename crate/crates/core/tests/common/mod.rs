//! Independent oracles and random instance generators for the integration tests.
#![allow(dead_code)]

use levyot::{DiscreteLevyMeasure, LevyTriplet, Point, PsdMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Atoms = Vec<(Vec<f64>, f64)>;

fn half_sq(x: &[f64], y: &[f64]) -> f64 {
    0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// Supplies, demands and row-major costs of the origin-augmented problem.
pub fn augmented(mu: &Atoms, nu: &Atoms, d: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let origin = vec![0.0; d];
    let mass = |a: &Atoms| a.iter().map(|(_, w)| w).sum::<f64>();
    let src: Vec<&Vec<f64>> = mu.iter().map(|(x, _)| x).chain([&origin]).collect();
    let dst: Vec<&Vec<f64>> = nu.iter().map(|(x, _)| x).chain([&origin]).collect();
    let mut supply: Vec<f64> = mu.iter().map(|(_, w)| *w).collect();
    supply.push(mass(nu));
    let mut demand: Vec<f64> = nu.iter().map(|(_, w)| *w).collect();
    demand.push(mass(mu));
    let cost = src.iter().flat_map(|x| dst.iter().map(move |y| half_sq(x, y))).collect();
    (supply, demand, cost)
}

/// Minimum over all vertices of the transportation polytope.
///
/// Every vertex is the unique flow supported on some spanning tree of the
/// bipartite graph; trees are enumerated as `(m + n − 1)`-subsets of cells.
pub fn vertex_enumeration_min(supply: &[f64], demand: &[f64], cost: &[f64]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(k);
    enumerate(0, m * n, k, &mut chosen, &mut |cells| {
        if let Some(flow) = tree_flow(m, n, cells, supply, demand) {
            if flow.iter().all(|&f| f >= -1e-12) {
                let c: f64 = cells.iter().zip(&flow).map(|(&cell, f)| f * cost[cell]).sum();
                best = best.min(c);
            }
        }
    });
    best
}

fn enumerate(start: usize, total: usize, k: usize, chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    let need = k - chosen.len();
    for c in start..=total - need {
        chosen.push(c);
        enumerate(c + 1, total, k, chosen, visit);
        chosen.pop();
    }
}

/// Flows on a spanning tree by repeatedly peeling leaves; `None` if the cells
/// do not form a spanning tree.
fn tree_flow(m: usize, n: usize, cells: &[usize], supply: &[f64], demand: &[f64]) -> Option<Vec<f64>> {
    let nodes = m + n;
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &c in cells {
        let (a, b) = (find(&mut parent, c / n), find(&mut parent, m + c % n));
        if a == b {
            return None;
        }
        parent[a] = b;
    }
    let mut residual: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let mut alive = vec![true; cells.len()];
    let mut flow = vec![0.0; cells.len()];
    let ends = |c: usize| (c / n, m + c % n);
    for _ in 0..cells.len() {
        let mut degree = vec![0usize; nodes];
        for (e, &c) in cells.iter().enumerate() {
            if alive[e] {
                let (a, b) = ends(c);
                degree[a] += 1;
                degree[b] += 1;
            }
        }
        let (e, leaf) = cells
            .iter()
            .enumerate()
            .filter(|(e, _)| alive[*e])
            .find_map(|(e, &c)| {
                let (a, b) = ends(c);
                if degree[a] == 1 {
                    Some((e, a))
                } else if degree[b] == 1 {
                    Some((e, b))
                } else {
                    None
                }
            })?;
        let (a, b) = ends(cells[e]);
        let other = if leaf == a { b } else { a };
        flow[e] = residual[leaf];
        residual[other] -= residual[leaf];
        residual[leaf] = 0.0;
        alive[e] = false;
    }
    Some(flow)
}

/// Brute-force `W_Λ²` through the augmented polytope.
pub fn brute_force_levy_cost(mu: &Atoms, nu: &Atoms, d: usize) -> f64 {
    let (s, t, c) = augmented(mu, nu, d);
    vertex_enumeration_min(&s, &t, &c)
}

/// Successive shortest paths (Bellman-Ford on the residual graph) for a
/// balanced transportation problem. Returns the optimal cost.
pub fn min_cost_flow(supply: &[f64], demand: &[f64], cost: &[f64]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    // Nodes: 0 source, 1..=m rows, m+1..=m+n columns, m+n+1 sink.
    let sink = m + n + 1;
    let nodes = sink + 1;
    struct Edge {
        to: usize,
        cap: f64,
        cost: f64,
    }
    let mut edges: Vec<Edge> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let add = |edges: &mut Vec<Edge>, adj: &mut Vec<Vec<usize>>, a: usize, b: usize, cap: f64, c: f64| {
        adj[a].push(edges.len());
        edges.push(Edge { to: b, cap, cost: c });
        adj[b].push(edges.len());
        edges.push(Edge { to: a, cap: 0.0, cost: -c });
    };
    let total: f64 = supply.iter().sum();
    for i in 0..m {
        add(&mut edges, &mut adj, 0, 1 + i, supply[i], 0.0);
        for j in 0..n {
            add(&mut edges, &mut adj, 1 + i, 1 + m + j, total, cost[i * n + j]);
        }
    }
    for (j, &v) in demand.iter().enumerate() {
        add(&mut edges, &mut adj, 1 + m + j, sink, v, 0.0);
    }
    let eps = 1e-12 * (1.0 + total);
    let mut sent = 0.0;
    let mut value = 0.0;
    while sent < total - eps {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[0] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for &e in &adj[u] {
                    let ed = &edges[e];
                    if ed.cap > eps && dist[u] + ed.cost < dist[ed.to] - 1e-15 {
                        dist[ed.to] = dist[u] + ed.cost;
                        via[ed.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink].is_infinite() {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while let Some(e) = via[v] {
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while let Some(e) = via[v] {
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            value += push * edges[e].cost;
            v = edges[e ^ 1].to;
        }
        sent += push;
    }
    value
}

pub fn atoms_of(m: &DiscreteLevyMeasure) -> Atoms {
    m.atoms().iter().map(|a| (a.x.to_vec(), a.w)).collect()
}

pub fn measure(d: usize, atoms: &Atoms) -> DiscreteLevyMeasure {
    DiscreteLevyMeasure::new(d, atoms.iter().cloned()).unwrap()
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Up to `max_atoms` atoms with Gaussian locations of the given scale and
/// weights in `[0.1, 2)`.
pub fn random_measure(rng: &mut ChaCha8Rng, d: usize, max_atoms: usize, scale: f64) -> DiscreteLevyMeasure {
    let k = rng.random_range(0..=max_atoms);
    let atoms: Atoms = (0..k)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| scale * normal(rng)).collect();
            (x, rng.random_range(0.1..2.0))
        })
        .collect();
    DiscreteLevyMeasure::new(d, atoms).unwrap()
}

/// `G Gᵀ / d + floor·I` with Gaussian `G`.
pub fn random_psd(rng: &mut ChaCha8Rng, d: usize, floor: f64) -> PsdMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| normal(rng));
    let m = &g * g.transpose() / d as f64 + DMatrix::identity(d, d) * floor;
    PsdMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

/// PSD matrix of random rank `0..=d`.
pub fn random_low_rank_psd(rng: &mut ChaCha8Rng, d: usize) -> PsdMatrix {
    let r = rng.random_range(0..=d);
    let g = DMatrix::from_fn(d, r, |_, _| normal(rng));
    let m = &g * g.transpose();
    PsdMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

pub fn random_triplet(rng: &mut ChaCha8Rng, d: usize, max_atoms: usize, zero_mean: bool) -> LevyTriplet {
    let drift: Vec<f64> = (0..d).map(|_| if zero_mean { 0.0 } else { 0.5 * normal(rng) }).collect();
    let diffusion = if rng.random_bool(0.3) {
        random_low_rank_psd(rng, d)
    } else {
        random_psd(rng, d, 0.0)
    };
    LevyTriplet::new(Point::new(drift).unwrap(), diffusion, random_measure(rng, d, max_atoms, 1.0)).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| normal(rng)).collect()
}
