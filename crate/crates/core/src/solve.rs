//! Dirichlet problems on finite networks.
//!
//! Small systems are solved by star-mesh elimination: interior vertices are
//! removed one at a time in minimum-degree order, each removal replacing the
//! star at `v` by a complete graph on its neighbours with conductances
//! `c_u c_w / C`. The reduction only ever adds positive quantities, so it stays
//! accurate when conductances span hundreds of binary orders of magnitude.
//! Potentials and per-edge drops are then recovered by back-substitution;
//! computing drops directly (instead of differencing potentials) keeps edge
//! currents relatively accurate on edges with tiny resistance.
//!
//! Above `direct_limit` vertices elimination is still attempted, but given up
//! once the fill exceeds a budget proportional to the edge count (trees and
//! ladders stay within it, grids do not); conjugate gradients with a Jacobi
//! preconditioner take over in that case.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Error, Result};
use crate::network::{Network, Potential, VertexId};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Networks with at most this many vertices are always solved by elimination.
    pub direct_limit: usize,
    /// Above `direct_limit`, elimination is abandoned once the sum of squared
    /// degrees at elimination time exceeds `fill_factor · 2|E|`. Zero disables it.
    pub fill_factor: usize,
    /// Relative residual target for conjugate gradients.
    pub cg_tolerance: f64,
    /// Iteration cap for conjugate gradients (default `20·n + 1000`).
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            direct_limit: 2000,
            fill_factor: 8,
            cg_tolerance: 1e-13,
            max_iterations: None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Method {
    Elimination,
    ConjugateGradient,
}

#[derive(Clone, Debug)]
pub struct DirichletSolution {
    pub potential: Potential,
    /// `h(tail) - h(head)` for every edge.
    pub drops: Vec<f64>,
    /// Largest absolute node-law residual over interior vertices.
    pub residual: f64,
    pub method: Method,
}

/// Harmonic extension of `boundary` with default options.
pub fn dirichlet_solve(net: &Network, boundary: &[(VertexId, f64)]) -> Result<Potential> {
    Ok(dirichlet_solve_with(net, boundary, &SolverOptions::default())?.potential)
}

pub fn dirichlet_solve_with(
    net: &Network,
    boundary: &[(VertexId, f64)],
    opts: &SolverOptions,
) -> Result<DirichletSolution> {
    if boundary.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    if !net.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = net.vertex_count();
    let mut fixed = vec![false; n];
    let mut values = vec![0.0; n];
    for &(v, x) in boundary {
        if !net.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        if !x.is_finite() {
            return Err(Error::InvalidSpec(format!("boundary value {x} at {}", net.name(v))));
        }
        if fixed[v.0] && values[v.0] != x {
            return Err(Error::InvalidSpec(format!(
                "conflicting boundary values at {}",
                net.name(v)
            )));
        }
        fixed[v.0] = true;
        values[v.0] = x;
    }
    let interior = fixed.iter().filter(|&&b| !b).count();
    let (h, drops, method) = if interior == 0 {
        let drops = net
            .edges()
            .iter()
            .map(|e| values[e.tail.0] - values[e.head.0])
            .collect();
        (values, drops, Method::Elimination)
    } else if let Some((h, d)) = eliminate(net, &fixed, &values, fill_budget(net, opts)) {
        (h, d, Method::Elimination)
    } else {
        let h = conjugate_gradient(net, &fixed, values, opts)?;
        let drops = net
            .edges()
            .iter()
            .map(|e| h[e.tail.0] - h[e.head.0])
            .collect();
        (h, drops, Method::ConjugateGradient)
    };
    let residual = interior_residual(net, &fixed, &drops);
    Ok(DirichletSolution {
        potential: Potential(h),
        drops,
        residual,
        method,
    })
}

fn fill_budget(net: &Network, opts: &SolverOptions) -> Option<usize> {
    if net.vertex_count() <= opts.direct_limit {
        None
    } else {
        Some(opts.fill_factor * 2 * net.edge_count())
    }
}

fn interior_residual(net: &Network, fixed: &[bool], drops: &[f64]) -> f64 {
    let mut acc = vec![0.0; net.vertex_count()];
    for (e, d) in net.edges().iter().zip(drops) {
        let f = d / e.resistance;
        acc[e.tail.0] -= f;
        acc[e.head.0] += f;
    }
    acc.iter()
        .zip(fixed)
        .filter(|(_, &b)| !b)
        .fold(0.0, |m, (a, _)| m.max(a.abs()))
}

struct Star {
    v: usize,
    /// Neighbours at elimination time, sorted by vertex index, with conductances.
    nbrs: Vec<(usize, f64)>,
    total: f64,
}

/// Returns `None` once the work `Σ deg²` over eliminated vertices exceeds `budget`.
fn eliminate(
    net: &Network,
    fixed: &[bool],
    values: &[f64],
    budget: Option<usize>,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = net.vertex_count();
    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for e in net.edges() {
        let c = e.conductance();
        *adj[e.tail.0].entry(e.head.0).or_insert(0.0) += c;
        *adj[e.head.0].entry(e.tail.0).or_insert(0.0) += c;
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n)
        .filter(|&v| !fixed[v])
        .map(|v| Reverse((adj[v].len(), v)))
        .collect();
    let mut work = 0usize;
    let mut order = vec![usize::MAX; n];
    let mut stars: Vec<Star> = Vec::new();
    while let Some(Reverse((deg, v))) = heap.pop() {
        if order[v] != usize::MAX || deg != adj[v].len() {
            continue;
        }
        order[v] = stars.len();
        let nbrs: Vec<(usize, f64)> = std::mem::take(&mut adj[v]).into_iter().collect();
        let total: f64 = nbrs.iter().map(|&(_, c)| c).sum();
        for &(u, _) in &nbrs {
            adj[u].remove(&v);
        }
        work += nbrs.len() * nbrs.len();
        for i in 0..nbrs.len() {
            let (u, cu) = nbrs[i];
            for &(w, cw) in &nbrs[i + 1..] {
                let c = cu * cw / total;
                *adj[u].entry(w).or_insert(0.0) += c;
                *adj[w].entry(u).or_insert(0.0) += c;
            }
        }
        if budget.is_some_and(|b| work > b) {
            return None;
        }
        for &(u, _) in &nbrs {
            if !fixed[u] {
                heap.push(Reverse((adj[u].len(), u)));
            }
        }
        stars.push(Star { v, nbrs, total });
    }

    let mut h = values.to_vec();
    for s in stars.iter().rev() {
        h[s.v] = s.nbrs.iter().map(|&(u, c)| c * h[u]).sum::<f64>() / s.total;
    }

    // star_drops[k][j] = h(stars[k].v) - h(stars[k].nbrs[j].0)
    let mut star_drops: Vec<Vec<f64>> = vec![Vec::new(); stars.len()];
    for k in (0..stars.len()).rev() {
        let s = &stars[k];
        let row: Vec<f64> = s
            .nbrs
            .iter()
            .map(|&(w, _)| {
                s.nbrs
                    .iter()
                    .filter(|&&(u, _)| u != w)
                    .map(|&(u, c)| c * drop_between(u, w, &order, &stars, &star_drops, &h))
                    .sum::<f64>()
                    / s.total
            })
            .collect();
        star_drops[k] = row;
    }
    let drops = net
        .edges()
        .iter()
        .map(|e| drop_between(e.tail.0, e.head.0, &order, &stars, &star_drops, &h))
        .collect();
    Some((h, drops))
}

/// `h(a) - h(b)` for vertices adjacent in the reduced graph at the moment the
/// earlier of the two was eliminated (or both boundary).
fn drop_between(
    a: usize,
    b: usize,
    order: &[usize],
    stars: &[Star],
    star_drops: &[Vec<f64>],
    h: &[f64],
) -> f64 {
    let (oa, ob) = (order[a], order[b]);
    if oa == usize::MAX && ob == usize::MAX {
        return h[a] - h[b];
    }
    let (first, other, sign) = if oa < ob { (oa, b, 1.0) } else { (ob, a, -1.0) };
    let j = stars[first]
        .nbrs
        .binary_search_by_key(&other, |&(u, _)| u)
        .expect("fill edges are never removed");
    sign * star_drops[first][j]
}

fn conjugate_gradient(
    net: &Network,
    fixed: &[bool],
    values: Vec<f64>,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let n = net.vertex_count();
    // interior index
    let mut idx = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for v in 0..n {
        if !fixed[v] {
            idx[v] = interior.len();
            interior.push(v);
        }
    }
    let m = interior.len();
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    // CSR of the interior-interior couplings
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for e in net.edges() {
        let c = e.conductance();
        let (t, hd) = (e.tail.0, e.head.0);
        match (idx[t], idx[hd]) {
            (usize::MAX, usize::MAX) => {}
            (i, usize::MAX) => {
                diag[i] += c;
                rhs[i] += c * values[hd];
            }
            (usize::MAX, j) => {
                diag[j] += c;
                rhs[j] += c * values[t];
            }
            (i, j) => {
                diag[i] += c;
                diag[j] += c;
                rows[i].push((j, c));
                rows[j].push((i, c));
            }
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for i in 0..m {
            let mut s = diag[i] * x[i];
            for &(j, c) in &rows[i] {
                s -= c * x[j];
            }
            out[i] = s;
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    // start from the mean boundary value
    let fixed_count = n - m;
    let mean = values
        .iter()
        .zip(fixed)
        .filter(|(_, &b)| b)
        .map(|(x, _)| x)
        .sum::<f64>()
        / fixed_count as f64;
    let mut x = vec![mean; m];
    let mut ax = vec![0.0; m];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let norm_b = dot(&rhs, &rhs).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let cap = opts.max_iterations.unwrap_or(20 * m + 1000);
    let mut ap = vec![0.0; m];
    let mut iterations = 0;
    loop {
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= opts.cg_tolerance * norm_b {
            break;
        }
        if iterations >= cap {
            return Err(Error::NonConvergence {
                iterations,
                change: rnorm / norm_b,
            });
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        // refresh the true residual now and then to avoid drift
        if iterations % 50 == 49 {
            apply(&x, &mut ax);
            for i in 0..m {
                r[i] = rhs[i] - ax[i];
            }
        }
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
    }
    log::debug!("conjugate gradients converged in {iterations} iterations on {m} unknowns");
    let mut h = values;
    for (k, &v) in interior.iter().enumerate() {
        h[v] = x[k];
    }
    Ok(h)
}
