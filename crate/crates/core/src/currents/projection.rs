//! Minimum-energy point of the convex set of functions dominated by a given
//! edge function and accumulating at least `I` at a sink.
//!
//! The set is
//!
//! ```text
//! 0 ≤ g(e) ≤ upper(e)   (in the direction where upper(e) ≥ 0)
//! acc_g(a) ≥ I,  acc_g(v) ≥ 0 for every other non-exempt vertex v
//! ```
//!
//! Exempt vertices are unconstrained; in a truncation they stand in for the
//! part of the network beyond the frontier, which is where the current enters.
//!
//! The primal problem separates over edges once the node constraints are
//! priced, so we run accelerated projected gradient ascent on the dual:
//! with multipliers `λ ≥ 0` the minimiser is
//! `g(e) = clamp((λ(head) - λ(tail)) / 2r(e))`, and the dual gradient is the
//! constraint violation. The gradient is Lipschitz with constant at most the
//! largest conductance-weighted degree.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{EdgeFunction, Network, VertexId};

#[derive(Clone, Debug)]
pub struct ProjectionOptions {
    pub exempt: Vec<VertexId>,
    /// Feasibility tolerance, relative to `max(I, 1)`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            exempt: Vec::new(),
            tol: 1e-9,
            max_iterations: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Projection {
    pub flow: EdgeFunction,
    pub energy: f64,
    pub iterations: usize,
    /// Accumulation at the sink.
    pub intensity: f64,
    /// Largest |accumulation| over non-exempt vertices other than the sink.
    pub residual: f64,
}

struct Problem<'a> {
    net: &'a Network,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Demand per vertex; `None` for exempt vertices.
    demand: Vec<Option<f64>>,
}

impl Problem<'_> {
    fn primal(&self, lambda: &[f64], x: &mut [f64]) {
        for (i, e) in self.net.edges().iter().enumerate() {
            let raw = (lambda[e.head.0] - lambda[e.tail.0]) / (2.0 * e.resistance);
            x[i] = raw.clamp(self.lo[i], self.hi[i]);
        }
    }

    fn accumulations(&self, x: &[f64], acc: &mut [f64]) {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (e, &v) in self.net.edges().iter().zip(x) {
            acc[e.tail.0] -= v;
            acc[e.head.0] += v;
        }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        self.net
            .edges()
            .iter()
            .zip(x)
            .map(|(e, v)| e.resistance * v * v)
            .sum()
    }

    /// Largest shortfall `demand - acc` over constrained vertices.
    fn violation(&self, acc: &[f64]) -> f64 {
        self.demand
            .iter()
            .zip(acc)
            .filter_map(|(d, a)| d.map(|d| (d - a).max(0.0)))
            .fold(0.0, f64::max)
    }

    fn dual_value(&self, lambda: &[f64], x: &[f64], acc: &[f64]) -> f64 {
        let slack: f64 = self
            .demand
            .iter()
            .zip(acc)
            .zip(lambda)
            .filter_map(|((d, a), l)| d.map(|d| l * (a - d)))
            .sum();
        self.energy(x) - slack
    }
}

/// Largest accumulation at `a` over the feasible box. Only exempt vertices
/// can emit current, so this is a maximum flow from them to `a`
/// (Edmonds-Karp on the residual capacities).
fn max_intensity(prob: &Problem<'_>, a: VertexId) -> f64 {
    let net = prob.net;
    let n = net.vertex_count();
    let source = n;
    // arcs are stored in pairs: arc ^ 1 is the reverse of arc
    let mut head: Vec<usize> = Vec::new();
    let mut cap: Vec<f64> = Vec::new();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut arc = |x: usize, y: usize, c: f64, head: &mut Vec<usize>, cap: &mut Vec<f64>| {
        out[x].push(head.len());
        head.push(y);
        cap.push(c);
        out[y].push(head.len());
        head.push(x);
        cap.push(0.0);
    };
    for (i, e) in net.edges().iter().enumerate() {
        if prob.hi[i] > 0.0 {
            arc(e.tail.0, e.head.0, prob.hi[i], &mut head, &mut cap);
        }
        if prob.lo[i] < 0.0 {
            arc(e.head.0, e.tail.0, -prob.lo[i], &mut head, &mut cap);
        }
    }
    for v in 0..n {
        if prob.demand[v].is_none() {
            arc(source, v, f64::INFINITY, &mut head, &mut cap);
        }
    }
    let mut total = 0.0;
    loop {
        let mut via = vec![usize::MAX; n + 1];
        let mut queue = VecDeque::from([source]);
        let mut seen = vec![false; n + 1];
        seen[source] = true;
        while let Some(x) = queue.pop_front() {
            if x == a.0 {
                break;
            }
            for &k in &out[x] {
                let y = head[k];
                if !seen[y] && cap[k] > 0.0 {
                    seen[y] = true;
                    via[y] = k;
                    queue.push_back(y);
                }
            }
        }
        if !seen[a.0] {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut y = a.0;
        while y != source {
            let k = via[y];
            push = push.min(cap[k]);
            y = head[k ^ 1];
        }
        let mut y = a.0;
        while y != source {
            let k = via[y];
            cap[k] -= push;
            cap[k ^ 1] += push;
            y = head[k ^ 1];
        }
        if !push.is_finite() {
            return f64::INFINITY;
        }
        total += push;
    }
}

/// Minimum-energy element of the feasible set described in the module docs.
pub fn min_energy_projection(
    net: &Network,
    upper: &EdgeFunction,
    a: VertexId,
    intensity: f64,
    opts: &ProjectionOptions,
) -> Result<Projection> {
    if upper.0.len() != net.edge_count() {
        return Err(Error::InvalidSpec("upper bound has the wrong length".into()));
    }
    if !net.contains(a) {
        return Err(Error::UnknownVertex(a.to_string()));
    }
    let n = net.vertex_count();
    let mut demand = vec![Some(0.0); n];
    for &v in &opts.exempt {
        if !net.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        demand[v.0] = None;
    }
    if demand[a.0].is_none() {
        return Err(Error::InvalidSpec("the sink cannot be exempt".into()));
    }
    demand[a.0] = Some(intensity);
    let (lo, hi): (Vec<f64>, Vec<f64>) = upper
        .0
        .iter()
        .map(|&u| if u >= 0.0 { (0.0, u) } else { (u, 0.0) })
        .unzip();
    let prob = Problem { net, lo, hi, demand };
    let scale = intensity.abs().max(1.0);
    let feas_tol = opts.tol * scale;

    let reachable = max_intensity(&prob, a);
    if reachable < intensity - feas_tol.max(1e-9 * scale) {
        return Err(Error::Infeasible(format!(
            "at most {reachable:e} can reach the sink within the upper bound"
        )));
    }
    let mut acc = vec![0.0; n];

    let lipschitz = net
        .vertices()
        .map(|v| net.weighted_degree(v))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let step = 1.0 / lipschitz;

    let mut lambda = vec![0.0; n];
    let mut y = lambda.clone();
    let mut x = vec![0.0; net.edge_count()];
    let mut momentum = 1.0_f64;
    let mut history: Vec<f64> = Vec::new();
    let mut best_dual = f64::NEG_INFINITY;
    for it in 0..opts.max_iterations {
        prob.primal(&y, &mut x);
        prob.accumulations(&x, &mut acc);
        let mut next = vec![0.0; n];
        for v in 0..n {
            if let Some(d) = prob.demand[v] {
                next[v] = (y[v] + step * (d - acc[v])).max(0.0);
            }
        }
        let t_next = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / t_next;
        // evaluate the new iterate
        prob.primal(&next, &mut x);
        prob.accumulations(&x, &mut acc);
        let dual = prob.dual_value(&next, &x, &acc);
        if dual < best_dual - 1e-15 * best_dual.abs() {
            // restart momentum when the dual objective drops
            momentum = 1.0;
            y.clone_from(&next);
        } else {
            for v in 0..n {
                y[v] = next[v] + beta * (next[v] - lambda[v]);
            }
            momentum = t_next;
        }
        best_dual = best_dual.max(dual);
        lambda = next;

        let energy = prob.energy(&x);
        history.push(energy);
        let feasible = prob.violation(&acc) <= feas_tol;
        let flat = history.len() > 50 && {
            let old = history[history.len() - 51];
            (old - energy).abs() <= 1e-10 * energy.abs().max(f64::MIN_POSITIVE)
        };
        if feasible && flat {
            let residual = prob
                .demand
                .iter()
                .enumerate()
                .filter(|&(v, d)| d.is_some() && v != a.0)
                .map(|(v, _)| acc[v].abs())
                .fold(0.0, f64::max);
            return Ok(Projection {
                flow: EdgeFunction(x),
                energy,
                iterations: it + 1,
                intensity: acc[a.0],
                residual,
            });
        }
    }
    prob.primal(&lambda, &mut x);
    prob.accumulations(&x, &mut acc);
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        change: prob.violation(&acc),
    })
}
