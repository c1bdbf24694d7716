//! Barricades around an edge and their weak effective resistance diameters.
//!
//! A subgraph `S` is a barricade around `e ∉ E(S)` when
//!
//! 1. the component `A(S, e)` of `G - S` containing `e` is finite, and
//! 2. `S ∩ K` is connected for every component `K` of `G - A(S, e)`.
//!
//! Everything here works inside a free truncation `G[V_n]`; a component that
//! reaches a frontier vertex of the truncation counts as infinite.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::currents::effective_resistance;
use crate::error::{Error, Result};
use crate::exhaustion::{truncate_free, Exhaustion, Truncation};
use crate::families::WrdBound;
use crate::network::{EdgeId, Network, NetworkBuilder, Potential, VertexId};
use crate::solve::SolverOptions;

/// Components up to this size use a dense grounded inverse for `wRD`.
const DENSE_LIMIT: usize = 400;

/// Vertices by name and edges by key.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Subgraph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarricadeComponent {
    pub vertices: Vec<String>,
    pub edges: Vec<u64>,
    /// `∂C`: the vertices of this component adjacent to the barricaded area.
    pub boundary: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Barricade {
    pub anchor: u64,
    pub subgraph: Subgraph,
    /// `A(S, e)`.
    pub area: Vec<String>,
    /// `∂S`, the neighbourhood of the area.
    pub boundary: Vec<String>,
    pub components: Vec<BarricadeComponent>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarricadeCheck {
    /// Present when both requirements hold.
    pub barricade: Option<Barricade>,
    pub violations: Vec<String>,
}

impl BarricadeCheck {
    pub fn passed(&self) -> bool {
        self.barricade.is_some()
    }
}

struct Resolved {
    in_s: Vec<bool>,
    edge_in_s: Vec<bool>,
}

fn resolve(net: &Network, s: &Subgraph) -> Result<Resolved> {
    let mut in_s = vec![false; net.vertex_count()];
    for name in &s.vertices {
        in_s[net.require(name)?.0] = true;
    }
    let mut edge_in_s = vec![false; net.edge_count()];
    for &key in &s.edges {
        let id = net.edge_by_key(key).ok_or(Error::UnknownEdge(key as usize))?;
        let e = net.edge(id);
        if !in_s[e.tail.0] || !in_s[e.head.0] {
            return Err(Error::InvalidSpec(format!("edge {key} of S has an endpoint outside S")));
        }
        edge_in_s[id.0] = true;
    }
    Ok(Resolved { in_s, edge_in_s })
}

/// Vertices reachable from `start` without entering `blocked` vertices or
/// using `blocked_edge` edges.
fn flood<F, G>(net: &Network, start: VertexId, blocked: F, blocked_edge: G) -> Vec<bool>
where
    F: Fn(VertexId) -> bool,
    G: Fn(EdgeId) -> bool,
{
    let mut seen = vec![false; net.vertex_count()];
    seen[start.0] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &id in net.incident(v) {
            if blocked_edge(id) {
                continue;
            }
            let w = net.edge(id).other(v);
            if !seen[w.0] && !blocked(w) {
                seen[w.0] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Components of the graph on `keep` vertices using edges accepted by `edge_ok`.
fn components_of<F>(net: &Network, keep: &[bool], edge_ok: F) -> Vec<Vec<VertexId>>
where
    F: Fn(EdgeId) -> bool,
{
    let mut label = vec![usize::MAX; net.vertex_count()];
    let mut out: Vec<Vec<VertexId>> = Vec::new();
    for v in net.vertices() {
        if !keep[v.0] || label[v.0] != usize::MAX {
            continue;
        }
        let c = out.len();
        label[v.0] = c;
        let mut members = vec![v];
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            for &id in net.incident(x) {
                if !edge_ok(id) {
                    continue;
                }
                let y = net.edge(id).other(x);
                if keep[y.0] && label[y.0] == usize::MAX {
                    label[y.0] = c;
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        members.sort();
        out.push(members);
    }
    out
}

fn names(net: &Network, vs: impl IntoIterator<Item = VertexId>) -> Vec<String> {
    let mut out: Vec<String> = vs.into_iter().map(|v| net.name(v).to_string()).collect();
    out.sort();
    out
}

/// Checks both barricade requirements for `s` around the edge with key `e`
/// inside the truncation.
pub fn is_barricade(t: &Truncation, s: &Subgraph, e: u64) -> Result<BarricadeCheck> {
    if s.edges.contains(&e) {
        return Err(Error::AnchorInBarricade);
    }
    let net = &t.network;
    let anchor = net.edge_by_key(e).ok_or(Error::UnknownEdge(e as usize))?;
    let r = resolve(net, s)?;
    let mut violations = Vec::new();
    let ae = net.edge(anchor);
    if r.in_s[ae.tail.0] || r.in_s[ae.head.0] {
        violations.push("the anchor edge has an endpoint in S".to_string());
        return Ok(BarricadeCheck {
            barricade: None,
            violations,
        });
    }
    let in_area = flood(net, ae.tail, |v| r.in_s[v.0], |id| r.edge_in_s[id.0]);
    if let Some(v) = net.vertices().find(|&v| in_area[v.0] && t.is_frontier(v)) {
        violations.push(format!(
            "requirement 1: the component of G - S containing the anchor reaches `{}` on the truncation frontier",
            net.name(v)
        ));
    }
    let mut boundary = vec![false; net.vertex_count()];
    for v in net.vertices().filter(|&v| in_area[v.0]) {
        for &id in net.incident(v) {
            let w = net.edge(id).other(v);
            if !in_area[w.0] {
                boundary[w.0] = true;
            }
        }
    }
    let outside: Vec<bool> = in_area.iter().map(|a| !a).collect();
    for k in components_of(net, &outside, |_| true) {
        let mut keep = vec![false; net.vertex_count()];
        for &v in &k {
            keep[v.0] = r.in_s[v.0];
        }
        let pieces = components_of(net, &keep, |id| r.edge_in_s[id.0]);
        if pieces.len() > 1 {
            violations.push(format!(
                "requirement 2: S meets the component of G - A containing `{}` in {} pieces",
                net.name(k[0]),
                pieces.len()
            ));
        }
    }
    if !violations.is_empty() {
        return Ok(BarricadeCheck {
            barricade: None,
            violations,
        });
    }
    let components = components_of(net, &r.in_s, |id| r.edge_in_s[id.0])
        .into_iter()
        .map(|c| {
            let members: HashSet<VertexId> = c.iter().copied().collect();
            let mut edges: Vec<u64> = s
                .edges
                .iter()
                .copied()
                .filter(|&k| {
                    let edge = net.edge(net.edge_by_key(k).expect("resolved above"));
                    members.contains(&edge.tail)
                })
                .collect();
            edges.sort();
            BarricadeComponent {
                boundary: names(net, c.iter().copied().filter(|v| boundary[v.0])),
                vertices: names(net, c),
                edges,
            }
        })
        .collect();
    Ok(BarricadeCheck {
        barricade: Some(Barricade {
            anchor: e,
            subgraph: s.clone(),
            area: names(net, net.vertices().filter(|v| in_area[v.0])),
            boundary: names(net, net.vertices().filter(|v| boundary[v.0])),
            components,
        }),
        violations,
    })
}

/// BFS parents inside `allowed`, from `root`.
fn bfs_tree(net: &Network, root: VertexId, allowed: &[bool]) -> Vec<Option<VertexId>> {
    let mut parent = vec![None; net.vertex_count()];
    let mut seen = vec![false; net.vertex_count()];
    seen[root.0] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &id in net.incident(v) {
            let w = net.edge(id).other(v);
            if allowed[w.0] && !seen[w.0] {
                seen[w.0] = true;
                parent[w.0] = Some(v);
                queue.push_back(w);
            }
        }
    }
    parent
}

#[derive(Clone, Debug, Serialize)]
pub struct BarricadeSearch {
    pub level: usize,
    pub barricades: Vec<Barricade>,
    /// True when the truncation ran out before `count` barricades were found.
    pub truncated: bool,
}

/// Edge-disjoint barricades around the edge with key `e`, grown outward in
/// the truncation at level `n`.
///
/// Each round absorbs the finite components of `G - A` into the area `A`,
/// then takes as the next barricade, inside each remaining component `K`, the
/// subgraph induced by `N(A) ∩ K` and shortest paths joining those vertices.
pub fn find_barricades(ex: &dyn Exhaustion, e: u64, count: usize, n: usize) -> Result<BarricadeSearch> {
    let t = truncate_free(ex, n)?;
    let net = &t.network;
    let anchor = net.edge_by_key(e).ok_or(Error::UnknownEdge(e as usize))?;
    let mut area = vec![false; net.vertex_count()];
    let ae = net.edge(anchor);
    area[ae.tail.0] = true;
    area[ae.head.0] = true;
    let mut barricades = Vec::new();
    let mut truncated = false;
    while barricades.len() < count {
        // absorb finite components of G - A
        let outside: Vec<bool> = area.iter().map(|a| !a).collect();
        let mut infinite = Vec::new();
        for k in components_of(net, &outside, |_| true) {
            if k.iter().any(|&v| t.is_frontier(v)) {
                infinite.push(k);
            } else {
                for v in k {
                    area[v.0] = true;
                }
            }
        }
        if infinite.is_empty() || net.vertices().any(|v| area[v.0] && t.is_frontier(v)) {
            truncated = true;
            break;
        }
        let mut chosen = vec![false; net.vertex_count()];
        for k in &infinite {
            let mut allowed = vec![false; net.vertex_count()];
            for &v in k {
                allowed[v.0] = true;
            }
            let ring: Vec<VertexId> = k
                .iter()
                .copied()
                .filter(|&v| net.incident(v).iter().any(|&id| area[net.edge(id).other(v).0]))
                .collect();
            let parent = bfs_tree(net, ring[0], &allowed);
            for &v in &ring {
                let mut x = Some(v);
                while let Some(y) = x {
                    if chosen[y.0] {
                        break;
                    }
                    chosen[y.0] = true;
                    x = parent[y.0];
                }
            }
        }
        let mut s = Subgraph::default();
        for v in net.vertices().filter(|v| chosen[v.0]) {
            s.vertices.insert(net.name(v).to_string());
        }
        for edge in net.edges() {
            if chosen[edge.tail.0] && chosen[edge.head.0] {
                s.edges.insert(edge.key);
            }
        }
        let check = is_barricade(&t, &s, e)?;
        match check.barricade {
            Some(b) => barricades.push(b),
            None => {
                log::debug!("candidate barricade rejected: {:?}", check.violations);
                truncated = true;
                break;
            }
        }
        for v in net.vertices() {
            area[v.0] |= chosen[v.0];
        }
    }
    Ok(BarricadeSearch {
        level: n,
        barricades,
        truncated,
    })
}

/// The subnetwork of `net` formed by one barricade component.
fn component_network(net: &Network, c: &BarricadeComponent) -> Result<Network> {
    let mut b = NetworkBuilder::new();
    for name in &c.vertices {
        b.vertex(name);
    }
    for &key in &c.edges {
        let e = net.edge(net.edge_by_key(key).ok_or(Error::UnknownEdge(key as usize))?);
        let (u, w) = (b.vertex(net.name(e.tail)), b.vertex(net.name(e.head)));
        b.keyed_edge(u, w, e.resistance, key)?;
    }
    Ok(b.build())
}

/// Effective resistances between all pairs of `terminals` via the inverse of
/// the Laplacian grounded at vertex 0.
fn dense_pairwise(net: &Network, terminals: &[VertexId]) -> Option<Vec<f64>> {
    let m = net.vertex_count() - 1;
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for e in net.edges() {
        let c = e.conductance();
        let (i, j) = (e.tail.0, e.head.0);
        for (x, y) in [(i, j), (j, i)] {
            if x > 0 {
                lap[(x - 1, x - 1)] += c;
                if y > 0 {
                    lap[(x - 1, y - 1)] -= c;
                }
            }
        }
    }
    let inv = lap.cholesky()?.inverse();
    let g = |x: VertexId, y: VertexId| {
        if x.0 == 0 || y.0 == 0 {
            0.0
        } else {
            inv[(x.0 - 1, y.0 - 1)]
        }
    };
    let mut out = Vec::new();
    for (i, &x) in terminals.iter().enumerate() {
        for &y in &terminals[i + 1..] {
            out.push(g(x, x) + g(y, y) - 2.0 * g(x, y));
        }
    }
    Some(out)
}

/// `wRD(C)`: the largest effective resistance inside `C` between two of its
/// boundary vertices; 0 when `C` has fewer than two.
pub fn wrd(net: &Network, c: &BarricadeComponent) -> Result<f64> {
    if c.boundary.len() < 2 {
        return Ok(0.0);
    }
    let local = component_network(net, c)?;
    if !local.is_connected() {
        return Err(Error::Disconnected);
    }
    let terminals: Vec<VertexId> = c.boundary.iter().map(|n| local.require(n)).collect::<Result<_>>()?;
    if local.vertex_count() <= DENSE_LIMIT {
        if let Some(values) = dense_pairwise(&local, &terminals) {
            return Ok(values.into_iter().fold(0.0, f64::max));
        }
    }
    let pairs: Vec<(VertexId, VertexId)> = terminals
        .iter()
        .enumerate()
        .flat_map(|(i, &x)| terminals[i + 1..].iter().map(move |&y| (x, y)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(x, y)| effective_resistance(&local, x, y, &SolverOptions::default()))
        .collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Hop diameter of a barricade component.
pub fn component_diameter(net: &Network, c: &BarricadeComponent) -> Result<usize> {
    let local = component_network(net, c)?;
    let all = vec![true; local.vertex_count()];
    let mut best = 0;
    for v in local.vertices() {
        let mut dist = vec![usize::MAX; local.vertex_count()];
        dist[v.0] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            for &id in local.incident(x) {
                let y = local.edge(id).other(x);
                if all[y.0] && dist[y.0] == usize::MAX {
                    dist[y.0] = dist[x.0] + 1;
                    queue.push_back(y);
                }
            }
        }
        if dist.contains(&usize::MAX) {
            return Err(Error::Disconnected);
        }
        best = best.max(dist.into_iter().max().unwrap_or(0));
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct WrdReport {
    /// Sum over components with at least two boundary vertices.
    pub wrd: f64,
    /// Sum of component hop diameters.
    pub diameter: usize,
    /// Components skipped for having fewer than two boundary vertices.
    pub degenerate_components: usize,
}

pub fn barricade_wrd(net: &Network, b: &Barricade) -> Result<WrdReport> {
    let mut report = WrdReport {
        wrd: 0.0,
        diameter: 0,
        degenerate_components: 0,
    };
    for c in &b.components {
        if c.boundary.len() < 2 {
            report.degenerate_components += 1;
        } else {
            report.wrd += wrd(net, c)?;
        }
        report.diameter += component_diameter(net, c)?;
    }
    Ok(report)
}

fn lookup(net: &Network, name: &str) -> Result<VertexId> {
    net.require(name)
}

/// `U(h|S)`: the sum over components of the spread of `h` on `∂C`.
pub fn barricade_voltage(net: &Network, h: &Potential, b: &Barricade) -> Result<f64> {
    let mut total = 0.0;
    for c in &b.components {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for name in &c.boundary {
            let x = h.get(lookup(net, name)?);
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if hi > lo {
            total += hi - lo;
        }
    }
    Ok(total)
}

/// `E(h|_S)`: energy of `h` on the edges of the barricade.
pub fn barricade_energy(net: &Network, h: &Potential, b: &Barricade) -> Result<f64> {
    b.subgraph
        .edges
        .iter()
        .map(|&key| {
            let e = net.edge(net.edge_by_key(key).ok_or(Error::UnknownEdge(key as usize))?);
            let d = h.get(e.tail) - h.get(e.head);
            Ok(d * d / e.resistance)
        })
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct BarricadeRow {
    pub index: usize,
    pub wrd: f64,
    pub diameter: usize,
    pub voltage: Option<f64>,
    pub energy: Option<f64>,
    /// `Σ_{j ≤ index} 1/wRD(S_j)` over barricades with positive `wRD`.
    pub partial_sum: f64,
    pub degenerate_components: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SatzReport {
    pub rows: Vec<BarricadeRow>,
    /// Set when a closed-form bound certifies `Σ 1/wRD = ∞`; every non-elusive
    /// harmonic function of finite energy is then constant.
    pub certified: bool,
    pub reason: Option<String>,
}

impl SatzReport {
    pub fn partial_sum(&self) -> f64 {
        self.rows.last().map(|r| r.partial_sum).unwrap_or(0.0)
    }
}

/// Re-certifies the barricades, checks edge-disjointness and accumulates
/// `Σ 1/wRD(S_n)`. A closed-form `wRD` bound consistent with every computed
/// value certifies divergence.
pub fn satz_check(
    t: &Truncation,
    e: u64,
    barricades: &[Barricade],
    bound: Option<&WrdBound>,
    h: Option<&Potential>,
) -> Result<SatzReport> {
    let mut owner: BTreeMap<u64, usize> = BTreeMap::new();
    for (i, b) in barricades.iter().enumerate() {
        let check = is_barricade(t, &b.subgraph, e)?;
        if !check.passed() {
            return Err(Error::NotBarricade(format!("barricade {i}: {}", check.violations.join("; "))));
        }
        for &key in &b.subgraph.edges {
            if let Some(j) = owner.insert(key, i) {
                return Err(Error::NotBarricade(format!("barricades {j} and {i} share edge {key}")));
            }
        }
    }
    let net = &t.network;
    let reports: Vec<WrdReport> = barricades
        .par_iter()
        .map(|b| barricade_wrd(net, b))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(barricades.len());
    let mut sum = 0.0;
    for (i, (b, rep)) in barricades.iter().zip(&reports).enumerate() {
        if rep.wrd > 0.0 {
            sum += 1.0 / rep.wrd;
        }
        let (voltage, energy) = match h {
            Some(h) => (Some(barricade_voltage(net, h, b)?), Some(barricade_energy(net, h, b)?)),
            None => (None, None),
        };
        rows.push(BarricadeRow {
            index: i + 1,
            wrd: rep.wrd,
            diameter: rep.diameter,
            voltage,
            energy,
            partial_sum: sum,
            degenerate_components: rep.degenerate_components,
        });
    }
    let (certified, reason) = match bound {
        Some(b) => {
            let within = reports.iter().all(|r| r.wrd <= b.bound * (1.0 + 1e-9));
            if within {
                (true, Some(format!("wRD(S_n) ≤ {} for all n ({}), so Σ 1/wRD = ∞", b.bound, b.reason)))
            } else {
                (false, Some(format!("computed wRD exceeds the closed-form bound {}", b.bound)))
            }
        }
        None => (false, None),
    };
    Ok(SatzReport {
        rows,
        certified,
        reason,
    })
}

/// Convenience wrapper for an exhaustion: searches at level `n` and runs
/// [`satz_check`] on the result.
pub fn barricade_sweep(
    ex: &dyn Exhaustion,
    e: u64,
    count: usize,
    n: usize,
    bound: Option<&WrdBound>,
    h: Option<&Potential>,
) -> Result<(BarricadeSearch, SatzReport)> {
    let search = find_barricades(ex, e, count, n)?;
    let t = truncate_free(ex, n)?;
    let report = satz_check(&t, e, &search.barricades, bound, h)?;
    Ok((search, report))
}
