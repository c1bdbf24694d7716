//! Finite resistive multigraphs and the structural surgery used throughout the
//! crate: contraction of vertex sets, edge deletion and induced subnetworks.
//!
//! Vertices and edges are addressed by dense local ids ([`VertexId`],
//! [`EdgeId`]). Each edge additionally carries a stable `key` inherited from the
//! ambient graph it was cut out of, so values on the same physical edge can be
//! compared across truncations of one exhaustion.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VertexId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// An undirected edge stored with a reference orientation `tail -> head`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub resistance: f64,
    pub key: u64,
}

impl Edge {
    pub fn conductance(&self) -> f64 {
        1.0 / self.resistance
    }

    /// The endpoint opposite to `v`. `v` must be an endpoint.
    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.tail == v || self.head == v
    }
}

/// An edge together with a direction of traversal.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DirectedEdge {
    pub edge: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
}

impl DirectedEdge {
    pub fn reversed(self) -> Self {
        DirectedEdge {
            edge: self.edge,
            tail: self.head,
            head: self.tail,
        }
    }
}

/// A finite network: a multigraph without self-loops whose edges carry
/// strictly positive finite resistances.
#[derive(Clone, Debug, Default)]
pub struct Network {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    keys: HashMap<u64, EdgeId>,
}

#[derive(Debug, Default)]
pub struct NetworkBuilder {
    net: Network,
    next_key: u64,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, adding the vertex if it is new.
    pub fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&v) = self.net.index.get(name) {
            return v;
        }
        let v = VertexId(self.net.names.len());
        self.net.names.push(name.to_string());
        self.net.index.insert(name.to_string(), v);
        self.net.incident.push(Vec::new());
        v
    }

    /// Adds an edge with an automatically assigned key. Self-loops are
    /// dropped and reported as `Ok(None)`.
    pub fn edge(&mut self, u: VertexId, v: VertexId, resistance: f64) -> Result<Option<EdgeId>> {
        while self.net.keys.contains_key(&self.next_key) {
            self.next_key += 1;
        }
        let key = self.next_key;
        self.keyed_edge(u, v, resistance, key)
    }

    pub fn keyed_edge(
        &mut self,
        u: VertexId,
        v: VertexId,
        resistance: f64,
        key: u64,
    ) -> Result<Option<EdgeId>> {
        if !(resistance > 0.0 && resistance.is_finite()) {
            return Err(Error::InvalidResistance(resistance));
        }
        let n = self.net.names.len();
        if u.0 >= n {
            return Err(Error::UnknownVertex(u.to_string()));
        }
        if v.0 >= n {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        if u == v {
            return Ok(None);
        }
        if self.net.keys.contains_key(&key) {
            return Err(Error::InvalidSpec(format!("duplicate edge key {key}")));
        }
        let id = EdgeId(self.net.edges.len());
        self.net.edges.push(Edge {
            tail: u,
            head: v,
            resistance,
            key,
        });
        self.net.incident[u.0].push(id);
        self.net.incident[v.0].push(id);
        self.net.keys.insert(key, id);
        Ok(Some(id))
    }

    /// Convenience: adds both endpoints by name and the edge between them.
    pub fn named_edge(&mut self, u: &str, v: &str, resistance: f64) -> Result<Option<EdgeId>> {
        let u = self.vertex(u);
        let v = self.vertex(v);
        self.edge(u, v, resistance)
    }

    pub fn build(self) -> Network {
        self.net
    }
}

impl Network {
    /// Builds a network from `(u, v, r)` triples; vertices appear in first-use order.
    pub fn from_edges(edges: &[(&str, &str, f64)]) -> Result<Network> {
        let mut b = NetworkBuilder::new();
        for &(u, v, r) in edges {
            b.named_edge(u, v, r)?;
        }
        Ok(b.build())
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.names.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<VertexId> {
        self.vertex(name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.0 < self.names.len()
    }

    pub fn edge_by_key(&self, key: u64) -> Option<EdgeId> {
        self.keys.get(&key).copied()
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident[v.0].len()
    }

    /// Sum of the conductances of the edges at `v`.
    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.incident[v.0]
            .iter()
            .map(|&e| self.edges[e.0].conductance())
            .sum()
    }

    /// The directed edge traversing `e` starting at `from`.
    pub fn directed(&self, e: EdgeId, from: VertexId) -> Result<DirectedEdge> {
        let edge = self.edges.get(e.0).ok_or(Error::UnknownEdge(e.0))?;
        if !edge.touches(from) {
            return Err(Error::UnknownVertex(format!(
                "{} is not an endpoint of {}",
                from, e
            )));
        }
        Ok(DirectedEdge {
            edge: e,
            tail: from,
            head: edge.other(from),
        })
    }

    /// The directed edge in its reference orientation.
    pub fn forward(&self, e: EdgeId) -> DirectedEdge {
        let edge = &self.edges[e.0];
        DirectedEdge {
            edge: e,
            tail: edge.tail,
            head: edge.head,
        }
    }

    /// All directed edges leaving `v`.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = DirectedEdge> + '_ {
        self.incident[v.0].iter().map(move |&e| DirectedEdge {
            edge: e,
            tail: v,
            head: self.edges[e.0].other(v),
        })
    }

    /// Component label per vertex and the number of components.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        self.component_labels_filtered(|_| true)
    }

    /// Components of the graph restricted to the edges accepted by `keep`.
    pub fn component_labels_filtered<F: Fn(EdgeId) -> bool>(&self, keep: F) -> (Vec<usize>, usize) {
        let n = self.names.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &e in &self.incident[v] {
                    if !keep(e) {
                        continue;
                    }
                    let w = self.edges[e.0].other(VertexId(v)).0;
                    if label[w] == usize::MAX {
                        label[w] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let (label, count) = self.component_labels();
        let mut out = vec![Vec::new(); count];
        for (v, &l) in label.iter().enumerate() {
            out[l].push(VertexId(v));
        }
        out
    }

    /// True for nonempty connected networks.
    pub fn is_connected(&self) -> bool {
        !self.is_empty() && self.component_labels().1 == 1
    }

    /// Copy of the network with resistances replaced by `f(edge id, edge)`.
    pub fn with_resistances<F: Fn(EdgeId, &Edge) -> f64>(&self, f: F) -> Result<Network> {
        let mut out = self.clone();
        for (i, e) in out.edges.iter_mut().enumerate() {
            let r = f(EdgeId(i), &self.edges[i]);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidResistance(r));
            }
            e.resistance = r;
        }
        Ok(out)
    }

    /// The subnetwork induced on `vertices` (order preserved) and the map from
    /// old to new vertex ids.
    pub fn induced(&self, vertices: &[VertexId]) -> (Network, Vec<Option<VertexId>>) {
        let mut map = vec![None; self.names.len()];
        let mut b = NetworkBuilder::new();
        for &v in vertices {
            if map[v.0].is_none() {
                map[v.0] = Some(b.vertex(&self.names[v.0]));
            }
        }
        for e in &self.edges {
            if let (Some(u), Some(w)) = (map[e.tail.0], map[e.head.0]) {
                b.keyed_edge(u, w, e.resistance, e.key)
                    .expect("edges of a valid network stay valid");
            }
        }
        (b.build(), map)
    }
}

/// A real function on the vertices of a network (volts).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Potential(pub Vec<f64>);

impl Potential {
    pub fn constant(net: &Network, c: f64) -> Self {
        Potential(vec![c; net.vertex_count()])
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.0[v.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// max − min of the values.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .0
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        if self.0.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    fn check(&self, net: &Network) -> Result<()> {
        if self.0.len() != net.vertex_count() {
            return Err(Error::InvalidSpec(format!(
                "potential has {} values for {} vertices",
                self.0.len(),
                net.vertex_count()
            )));
        }
        Ok(())
    }
}

/// An antisymmetric function on directed edges, stored as one value per edge
/// in its reference orientation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeFunction(pub Vec<f64>);

impl EdgeFunction {
    pub fn zero(net: &Network) -> Self {
        EdgeFunction(vec![0.0; net.edge_count()])
    }

    /// Value on a directed edge; negated when `d` opposes the reference orientation.
    pub fn at(&self, net: &Network, d: &DirectedEdge) -> f64 {
        let v = self.0[d.edge.0];
        if net.edge(d.edge).tail == d.tail {
            v
        } else {
            -v
        }
    }

    /// Adds `amount` along the directed edge `d`.
    pub fn push(&mut self, net: &Network, d: &DirectedEdge, amount: f64) {
        if net.edge(d.edge).tail == d.tail {
            self.0[d.edge.0] += amount;
        } else {
            self.0[d.edge.0] -= amount;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EdgeFunction(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn add(&self, other: &EdgeFunction) -> Self {
        EdgeFunction(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &EdgeFunction) -> Self {
        EdgeFunction(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Result of contracting two disjoint vertex sets.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub network: Network,
    /// Old vertex id -> new vertex id.
    pub map: Vec<VertexId>,
    pub a: VertexId,
    pub b: VertexId,
}

/// Contracts `a` and `b` to one vertex each (`G/A/B`). Edges inside either set
/// become loops and are dropped; all other edges are kept, so parallel edges
/// may appear.
pub fn contract(net: &Network, a: &[VertexId], b: &[VertexId]) -> Result<Contraction> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = net.vertex_count();
    let mut side = vec![0u8; n];
    for &v in a {
        if !net.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        side[v.0] = 1;
    }
    for &v in b {
        if !net.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        if side[v.0] == 1 {
            return Err(Error::Overlap(net.name(v).to_string()));
        }
        side[v.0] = 2;
    }
    let label = |set: &[VertexId], fallback: &str| -> String {
        if set.len() == 1 {
            return net.name(set[0]).to_string();
        }
        let mut name = fallback.to_string();
        while net.vertex(&name).is_some() {
            name.push('\'');
        }
        name
    };
    let a_name = label(a, "[A]");
    let b_name = label(b, "[B]");

    let mut builder = NetworkBuilder::new();
    let mut map = Vec::with_capacity(n);
    for v in net.vertices() {
        let id = match side[v.0] {
            1 => builder.vertex(&a_name),
            2 => builder.vertex(&b_name),
            _ => builder.vertex(net.name(v)),
        };
        map.push(id);
    }
    for e in net.edges() {
        builder.keyed_edge(map[e.tail.0], map[e.head.0], e.resistance, e.key)?;
    }
    let network = builder.build();
    let a_id = network.require(&a_name)?;
    let b_id = network.require(&b_name)?;
    Ok(Contraction {
        network,
        map,
        a: a_id,
        b: b_id,
    })
}

/// Result of deleting a set of edges and then all isolated vertices.
#[derive(Clone, Debug)]
pub struct Deletion {
    pub network: Network,
    /// Old vertex id -> new vertex id, `None` for removed isolated vertices.
    pub map: Vec<Option<VertexId>>,
    pub connected: bool,
    pub empty: bool,
}

/// `G - S`: removes the edges in `s`, then every vertex left without edges.
///
/// Vertices that were already isolated in `net` are kept, so deleting nothing
/// returns an identical network.
pub fn delete_edges(net: &Network, s: &[EdgeId]) -> Deletion {
    let mut removed = vec![false; net.edge_count()];
    for &e in s {
        if e.0 < removed.len() {
            removed[e.0] = true;
        }
    }
    let keep_vertex: Vec<bool> = net
        .vertices()
        .map(|v| {
            let incident = net.incident(v);
            incident.is_empty() || incident.iter().any(|e| !removed[e.0])
        })
        .collect();
    let mut builder = NetworkBuilder::new();
    let mut map = vec![None; net.vertex_count()];
    for v in net.vertices() {
        if keep_vertex[v.0] {
            map[v.0] = Some(builder.vertex(net.name(v)));
        }
    }
    for (i, e) in net.edges().iter().enumerate() {
        if removed[i] {
            continue;
        }
        if let (Some(u), Some(w)) = (map[e.tail.0], map[e.head.0]) {
            builder
                .keyed_edge(u, w, e.resistance, e.key)
                .expect("edges of a valid network stay valid");
        }
    }
    let network = builder.build();
    let empty = network.is_empty();
    let connected = network.is_connected();
    Deletion {
        network,
        map,
        connected,
        empty,
    }
}

/// The edge function `(h(tail) - h(head)) / r` induced by a potential.
pub fn induced_edge_function(net: &Network, h: &Potential) -> Result<EdgeFunction> {
    h.check(net)?;
    Ok(EdgeFunction(
        net.edges()
            .iter()
            .map(|e| (h.get(e.tail) - h.get(e.head)) / e.resistance)
            .collect(),
    ))
}

/// Edges of a spanning forest (BFS order) and the fundamental cycle of every
/// non-tree edge, each cycle starting with that edge in reference orientation.
pub fn fundamental_cycles(net: &Network) -> Vec<Vec<DirectedEdge>> {
    let n = net.vertex_count();
    let mut parent: Vec<Option<DirectedEdge>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree_edge = vec![false; net.edge_count()];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([VertexId(root)]);
        while let Some(v) = queue.pop_front() {
            for d in net.out_edges(v) {
                if depth[d.head.0] == usize::MAX {
                    depth[d.head.0] = depth[v.0] + 1;
                    parent[d.head.0] = Some(d);
                    tree_edge[d.edge.0] = true;
                    queue.push_back(d.head);
                }
            }
        }
    }
    let mut cycles = Vec::new();
    for e in net.edge_ids() {
        if tree_edge[e.0] {
            continue;
        }
        let first = net.forward(e);
        // walk head -> tail through the tree: climb from both ends to the LCA
        let (mut x, mut y) = (first.head, first.tail);
        let mut up_from_head = Vec::new();
        let mut up_from_tail = Vec::new();
        while x != y {
            if depth[x.0] >= depth[y.0] {
                let d = parent[x.0].expect("non-root has a parent");
                up_from_head.push(d.reversed());
                x = d.tail;
            } else {
                let d = parent[y.0].expect("non-root has a parent");
                up_from_tail.push(d);
                y = d.tail;
            }
        }
        let mut cycle = vec![first];
        cycle.extend(up_from_head);
        cycle.extend(up_from_tail.into_iter().rev());
        cycles.push(cycle);
    }
    cycles
}
