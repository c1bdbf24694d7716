//! Node and cycle laws, energy, and the positive-cycle search for circulations.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{induced_edge_function, DirectedEdge, EdgeFunction, Network, Potential, VertexId};

/// Default absolute tolerance for node and cycle law checks.
pub const DEFAULT_TOL: f64 = 1e-8;

fn check_len(net: &Network, f: &EdgeFunction) -> Result<()> {
    if f.0.len() != net.edge_count() {
        return Err(Error::InvalidSpec(format!(
            "edge function has {} values for {} edges",
            f.0.len(),
            net.edge_count()
        )));
    }
    Ok(())
}

/// Net inflow `Σ_{ter(e) = v} f(e)`.
pub fn accumulation(net: &Network, f: &EdgeFunction, v: VertexId) -> Result<f64> {
    check_len(net, f)?;
    if !net.contains(v) {
        return Err(Error::UnknownVertex(v.to_string()));
    }
    Ok(net.out_edges(v).map(|d| -f.at(net, &d)).sum())
}

/// Accumulation at every vertex.
pub fn accumulations(net: &Network, f: &EdgeFunction) -> Result<Vec<f64>> {
    check_len(net, f)?;
    let mut acc = vec![0.0; net.vertex_count()];
    for (e, &x) in net.edges().iter().zip(&f.0) {
        acc[e.tail.0] -= x;
        acc[e.head.0] += x;
    }
    Ok(acc)
}

/// Flow from `x` to its complement, `Σ_{init ∈ X, ter ∉ X} f(e)`.
pub fn cut_accumulation(net: &Network, f: &EdgeFunction, x: &[VertexId]) -> Result<f64> {
    check_len(net, f)?;
    let mut inside = vec![false; net.vertex_count()];
    for &v in x {
        if !net.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        inside[v.0] = true;
    }
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 || count == net.vertex_count() {
        return Err(Error::TrivialCut);
    }
    Ok(net
        .edges()
        .iter()
        .zip(&f.0)
        .map(|(e, &val)| match (inside[e.tail.0], inside[e.head.0]) {
            (true, false) => val,
            (false, true) => -val,
            _ => 0.0,
        })
        .sum())
}

/// `Σ r(e) f(e)` along a closed directed walk.
pub fn cycle_voltage(net: &Network, f: &EdgeFunction, cycle: &[DirectedEdge]) -> Result<f64> {
    check_len(net, f)?;
    check_closed_walk(net, cycle)?;
    Ok(cycle
        .iter()
        .map(|d| net.edge(d.edge).resistance * f.at(net, d))
        .sum())
}

fn check_closed_walk(net: &Network, cycle: &[DirectedEdge]) -> Result<()> {
    if cycle.is_empty() {
        return Err(Error::NotClosedWalk("empty walk".into()));
    }
    for (i, d) in cycle.iter().enumerate() {
        if d.edge.0 >= net.edge_count() {
            return Err(Error::NotClosedWalk(format!("{} is not an edge", d.edge)));
        }
        let e = net.edge(d.edge);
        let matches = (e.tail == d.tail && e.head == d.head) || (e.tail == d.head && e.head == d.tail);
        if !matches {
            return Err(Error::NotClosedWalk(format!(
                "step {i} does not match the endpoints of {}",
                d.edge
            )));
        }
        let next = &cycle[(i + 1) % cycle.len()];
        if d.head != next.tail {
            return Err(Error::NotClosedWalk(format!("break after step {i}")));
        }
    }
    Ok(())
}

/// `⟨f, g⟩ = Σ r(e) f(e) g(e)`.
pub fn inner_product(net: &Network, f: &EdgeFunction, g: &EdgeFunction) -> Result<f64> {
    check_len(net, f)?;
    check_len(net, g)?;
    Ok(net
        .edges()
        .iter()
        .zip(f.0.iter().zip(&g.0))
        .map(|(e, (a, b))| e.resistance * a * b)
        .sum())
}

pub fn energy(net: &Network, f: &EdgeFunction) -> Result<f64> {
    inner_product(net, f, f)
}

/// `Σ (ρ(v) - ρ(w))² / r(vw)`.
pub fn potential_energy(net: &Network, rho: &Potential) -> Result<f64> {
    let f = induced_edge_function(net, rho)?;
    energy(net, &f)
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    /// Largest absolute accumulation away from the terminals.
    pub worst_residual: f64,
    pub accumulations: Vec<f64>,
    /// Accumulation at the sink (0 for circulations).
    pub intensity: f64,
    pub is_flow: bool,
}

/// Classifies `f` as a `p`-`q`-flow (or a circulation when `terminals` is `None`).
pub fn flow_report(
    net: &Network,
    f: &EdgeFunction,
    terminals: Option<(VertexId, VertexId)>,
    tol: f64,
) -> Result<FlowReport> {
    let acc = accumulations(net, f)?;
    let is_terminal = |v: usize| terminals.is_some_and(|(p, q)| v == p.0 || v == q.0);
    let worst_residual = acc
        .iter()
        .enumerate()
        .filter(|(v, _)| !is_terminal(*v))
        .fold(0.0_f64, |m, (_, a)| m.max(a.abs()));
    let (intensity, balanced) = match terminals {
        Some((p, q)) => {
            let scale = acc[q.0].abs().max(1.0);
            (acc[q.0], (acc[p.0] + acc[q.0]).abs() <= tol * scale)
        }
        None => (0.0, true),
    };
    Ok(FlowReport {
        worst_residual,
        accumulations: acc,
        intensity,
        is_flow: worst_residual <= tol && balanced,
    })
}

/// A directed cycle through `e` on which the circulation `f` is strictly positive.
///
/// Breadth-first search from `ter(e)` along edges carrying positive current
/// must reach `init(e)`: otherwise the reached set would have positive net
/// outflow, contradicting the node law.
pub fn find_positive_cycle(
    net: &Network,
    f: &EdgeFunction,
    e: DirectedEdge,
    tol: f64,
) -> Result<Vec<DirectedEdge>> {
    let acc = accumulations(net, f)?;
    if let Some((v, &a)) = acc
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
    {
        if a.abs() > tol {
            return Err(Error::NotAFlow {
                vertex: net.name(VertexId(v)).to_string(),
                accumulation: a,
            });
        }
    }
    check_closed_walk(net, &[e, e.reversed()])?;
    let value = f.at(net, &e);
    if value <= 0.0 {
        return Err(Error::NonPositiveEdge(value));
    }
    let start = e.head;
    let goal = e.tail;
    let mut prev: Vec<Option<DirectedEdge>> = vec![None; net.vertex_count()];
    let mut seen = vec![false; net.vertex_count()];
    seen[start.0] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if v == goal {
            break;
        }
        for d in net.out_edges(v) {
            if d.edge != e.edge && !seen[d.head.0] && f.at(net, &d) > 0.0 {
                seen[d.head.0] = true;
                prev[d.head.0] = Some(d);
                queue.push_back(d.head);
            }
        }
    }
    if !seen[goal.0] {
        return Err(Error::Internal(format!(
            "no positive path from {} back to {}",
            net.name(start),
            net.name(goal)
        )));
    }
    let mut path = Vec::new();
    let mut v = goal;
    while v != start {
        let d = prev[v.0].expect("reached vertices have a predecessor");
        path.push(d);
        v = d.tail;
    }
    path.reverse();
    let mut cycle = vec![e];
    cycle.extend(path);
    Ok(cycle)
}

#[derive(Clone, Debug, Serialize)]
pub struct CutViolation {
    pub label: String,
    pub accumulation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonElusiveReport {
    pub cuts_checked: usize,
    pub violations: Vec<CutViolation>,
    pub passed: bool,
}

/// Checks that no cut leaving `p` and `q` on the same side carries net flow.
///
/// Every cut in `layer_cuts` is checked, followed by `samples` random
/// bipartitions drawn with `seed`. Cuts that separate the terminals, or are
/// trivial, are skipped.
pub fn is_non_elusive(
    net: &Network,
    f: &EdgeFunction,
    p: VertexId,
    q: VertexId,
    tol: f64,
    layer_cuts: &[Vec<VertexId>],
    samples: usize,
    seed: u64,
) -> Result<NonElusiveReport> {
    check_len(net, f)?;
    let n = net.vertex_count();
    let mut cuts_checked = 0;
    let mut violations = Vec::new();
    let mut check = |label: String, x: &[VertexId]| -> Result<()> {
        let mut inside = vec![false; n];
        for &v in x {
            inside[v.0] = true;
        }
        let size = inside.iter().filter(|&&b| b).count();
        if size == 0 || size == n || inside[p.0] != inside[q.0] {
            return Ok(());
        }
        cuts_checked += 1;
        let value = cut_accumulation(net, f, x)?;
        if value.abs() > tol {
            violations.push(CutViolation {
                label,
                accumulation: value,
            });
        }
        Ok(())
    };
    for (i, cut) in layer_cuts.iter().enumerate() {
        check(format!("layer {}", i + 1), cut)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<VertexId> = net.vertices().collect();
    for s in 0..samples {
        all.shuffle(&mut rng);
        let k = rng.gen_range(1..n.max(2));
        check(format!("sample {s}"), &all[..k.min(n)])?;
    }
    Ok(NonElusiveReport {
        cuts_checked,
        passed: violations.is_empty(),
        violations,
    })
}
