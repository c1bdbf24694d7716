//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::VecDeque;

use ohd::exhaustion::ExplicitExhaustion;
use ohd::network::{DirectedEdge, EdgeFunction, Network, NetworkBuilder, VertexId};
use rand::Rng;

/// Connected network on `n` vertices `v0..`: vertex `i > 0` hangs off
/// `parents[i - 1] % i`, then `extras` adds chords (loops are skipped).
/// Resistances are taken cyclically from `resistances`.
pub fn build_network(n: usize, parents: &[usize], extras: &[(usize, usize)], resistances: &[f64]) -> Network {
    let mut b = NetworkBuilder::new();
    let ids: Vec<VertexId> = (0..n).map(|i| b.vertex(&format!("v{i}"))).collect();
    let mut r = resistances.iter().copied().cycle();
    for i in 1..n {
        b.edge(ids[i], ids[parents[i - 1] % i], r.next().unwrap()).unwrap();
    }
    for &(x, y) in extras {
        let (x, y) = (x % n, y % n);
        if x != y {
            b.edge(ids[x], ids[y], r.next().unwrap()).unwrap();
        }
    }
    b.build()
}

pub fn random_network<R: Rng>(rng: &mut R, n: usize, extra: usize, r_lo: f64, r_hi: f64) -> Network {
    let parents: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
    let extras: Vec<(usize, usize)> = (0..extra).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
    let rs: Vec<f64> = (0..n + extra).map(|_| rng.gen_range(r_lo..=r_hi)).collect();
    build_network(n, &parents, &extras, &rs)
}

pub fn bfs_distances(net: &Network, root: VertexId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; net.vertex_count()];
    dist[root.0] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for d in net.out_edges(v) {
            if dist[d.head.0] == usize::MAX {
                dist[d.head.0] = dist[v.0] + 1;
                queue.push_back(d.head);
            }
        }
    }
    dist
}

/// Exhaustion whose `n`-th layer is the sphere of radius `n - 1` around `root`.
pub fn ball_exhaustion(net: Network, root: VertexId) -> ExplicitExhaustion {
    let dist = bfs_distances(&net, root);
    let depth = dist.iter().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth + 1];
    for v in net.vertices() {
        layers[dist[v.0]].push(v);
    }
    ExplicitExhaustion::new(net, layers).unwrap()
}

/// Splits an acyclic `s`-`t` flow into weighted directed paths.
pub fn path_decomposition(net: &Network, f: &EdgeFunction, s: VertexId, t: VertexId) -> Vec<(f64, Vec<DirectedEdge>)> {
    let mut rest = f.clone();
    let total: f64 = net.out_edges(s).map(|d| f.at(net, &d).max(0.0)).sum();
    let floor = 1e-12 * total;
    let mut paths = Vec::new();
    loop {
        let mut path = Vec::new();
        let mut v = s;
        while v != t {
            let Some(d) = net
                .out_edges(v)
                .filter(|d| rest.at(net, d) > floor)
                .max_by(|x, y| rest.at(net, x).total_cmp(&rest.at(net, y)))
            else {
                break;
            };
            path.push(d);
            v = d.head;
            if path.len() > net.edge_count() {
                return paths;
            }
        }
        if v != t || path.is_empty() {
            return paths;
        }
        let w = path.iter().map(|d| rest.at(net, d)).fold(f64::INFINITY, f64::min);
        for d in &path {
            rest.push(net, d, -w);
        }
        paths.push((w, path));
    }
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
