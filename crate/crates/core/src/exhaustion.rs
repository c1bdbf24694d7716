//! Exhaustions of (conceptually infinite) locally finite networks by nested
//! finite vertex sets `V_1 ⊂ V_2 ⊂ …`, and the two finite networks cut out at
//! each level: the free truncation `G[V_n]` and the wired truncation in which
//! everything outside `V_n` is collapsed to one vertex `∞_n`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use regex::Regex;

use crate::error::{Error, Result};
use crate::network::{Network, NetworkBuilder, VertexId};

/// Name given to the collapsed exterior of a wired truncation.
pub const INFINITY: &str = "∞";

#[derive(Clone, Debug, PartialEq)]
pub struct ShellVertex {
    pub key: u64,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShellEdge {
    pub key: u64,
    pub ends: (u64, u64),
    pub resistance: f64,
}

/// Level `n` of an exhaustion: the vertices of `V_n`, their neighbours outside
/// `V_n`, and every ambient edge with at least one endpoint in `V_n`.
#[derive(Clone, Debug, Default)]
pub struct Shell {
    pub inner: Vec<ShellVertex>,
    pub outer: Vec<ShellVertex>,
    pub edges: Vec<ShellEdge>,
}

impl Shell {
    fn name_map(&self) -> HashMap<u64, &str> {
        self.inner
            .iter()
            .chain(&self.outer)
            .map(|v| (v.key, v.name.as_str()))
            .collect()
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.inner.iter().any(|v| v.name == name)
    }
}

/// A generator of nested finite vertex sets exhausting an ambient network.
pub trait Exhaustion: Send + Sync {
    /// Level `n ≥ 1`.
    fn shell(&self, n: usize) -> Result<Shell>;

    /// Short human-readable description.
    fn label(&self) -> String {
        "exhaustion".to_string()
    }
}

impl<E: Exhaustion + ?Sized> Exhaustion for Arc<E> {
    fn shell(&self, n: usize) -> Result<Shell> {
        (**self).shell(n)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

impl<E: Exhaustion + ?Sized> Exhaustion for &E {
    fn shell(&self, n: usize) -> Result<Shell> {
        (**self).shell(n)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// The free truncation `G[V_n]` together with which of its vertices have
/// ambient neighbours outside `V_n`.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub n: usize,
    pub network: Network,
    pub frontier: Vec<bool>,
}

impl Truncation {
    pub fn is_frontier(&self, v: VertexId) -> bool {
        self.frontier[v.0]
    }
}

/// The wired truncation: `V_n ∪ {∞_n}` with every edge leaving `V_n`
/// re-attached to `∞_n`. `infinity` is `None` when no edge leaves `V_n`.
#[derive(Clone, Debug)]
pub struct WiredTruncation {
    pub n: usize,
    pub network: Network,
    pub infinity: Option<VertexId>,
    pub frontier: Vec<bool>,
}

fn generator_error(n: usize, reason: impl Into<String>) -> Error {
    Error::Generator {
        n,
        reason: reason.into(),
    }
}

fn check_level(n: usize) -> Result<()> {
    if n == 0 {
        return Err(generator_error(0, "levels start at n = 1"));
    }
    Ok(())
}

pub fn truncate_free(ex: &dyn Exhaustion, n: usize) -> Result<Truncation> {
    check_level(n)?;
    let shell = ex.shell(n)?;
    if shell.inner.is_empty() {
        return Err(generator_error(n, "V_n is empty"));
    }
    let mut b = NetworkBuilder::new();
    let mut local = HashMap::with_capacity(shell.inner.len());
    for v in &shell.inner {
        local.insert(v.key, b.vertex(&v.name));
    }
    let mut frontier = vec![false; shell.inner.len()];
    for e in &shell.edges {
        match (local.get(&e.ends.0), local.get(&e.ends.1)) {
            (Some(&u), Some(&w)) => {
                b.keyed_edge(u, w, e.resistance, e.key)?;
            }
            (Some(&u), None) | (None, Some(&u)) => frontier[u.0] = true,
            (None, None) => {
                return Err(generator_error(n, format!("edge {} misses V_n", e.key)));
            }
        }
    }
    let network = b.build();
    if !network.is_connected() {
        return Err(generator_error(n, "G[V_n] is disconnected"));
    }
    Ok(Truncation {
        n,
        network,
        frontier,
    })
}

pub fn truncate_wired(ex: &dyn Exhaustion, n: usize) -> Result<WiredTruncation> {
    check_level(n)?;
    let shell = ex.shell(n)?;
    if shell.inner.is_empty() {
        return Err(generator_error(n, "V_n is empty"));
    }
    let mut b = NetworkBuilder::new();
    let mut local = HashMap::with_capacity(shell.inner.len());
    for v in &shell.inner {
        local.insert(v.key, b.vertex(&v.name));
    }
    let mut frontier = vec![false; shell.inner.len()];
    let mut infinity = None;
    for e in &shell.edges {
        match (local.get(&e.ends.0), local.get(&e.ends.1)) {
            (Some(&u), Some(&w)) => {
                b.keyed_edge(u, w, e.resistance, e.key)?;
            }
            (Some(&u), None) | (None, Some(&u)) => {
                frontier[u.0] = true;
                let inf = *infinity.get_or_insert_with(|| {
                    let mut name = INFINITY.to_string();
                    while local_name_taken(&shell, &name) {
                        name.push('\'');
                    }
                    b.vertex(&name)
                });
                // keep the reference orientation pointing outward
                b.keyed_edge(u, inf, e.resistance, e.key)?;
            }
            (None, None) => {
                return Err(generator_error(n, format!("edge {} misses V_n", e.key)));
            }
        }
    }
    let network = b.build();
    if !network.is_connected() {
        return Err(generator_error(n, "wired truncation is disconnected"));
    }
    Ok(WiredTruncation {
        n,
        network,
        infinity,
        frontier,
    })
}

fn local_name_taken(shell: &Shell, name: &str) -> bool {
    shell.inner.iter().any(|v| v.name == name)
}

/// Smallest `n ≤ n_max` with every name in `V_n`.
pub fn first_containing(ex: &dyn Exhaustion, names: &[&str], n_max: usize) -> Result<Option<usize>> {
    for n in 1..=n_max {
        let shell = ex.shell(n)?;
        if names.iter().all(|name| shell.contains_name(name)) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Selects ambient vertices by name.
#[derive(Clone, Debug)]
pub enum VertexSelector {
    Names(BTreeSet<String>),
    Pattern(Regex),
}

impl VertexSelector {
    pub fn names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        VertexSelector::Names(names.into_iter().map(Into::into).collect())
    }

    pub fn pattern(re: &str) -> Result<Self> {
        Regex::new(re)
            .map(VertexSelector::Pattern)
            .map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn matches(&self, name: &str) -> bool {
        match self {
            VertexSelector::Names(set) => set.contains(name),
            VertexSelector::Pattern(re) => re.is_match(name),
        }
    }

    /// Size of an explicit name set; `None` for patterns.
    pub fn finite_len(&self) -> Option<usize> {
        match self {
            VertexSelector::Names(set) => Some(set.len()),
            VertexSelector::Pattern(_) => None,
        }
    }
}

impl fmt::Display for VertexSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexSelector::Names(set) => write!(f, "{} named vertices", set.len()),
            VertexSelector::Pattern(re) => write!(f, "/{}/", re.as_str()),
        }
    }
}

/// Closed-form knowledge about `Σ 1/r(e)` over an edge set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConductanceSum {
    Finite(f64),
    Divergent,
    Unknown,
}

/// An edge set of the ambient graph, possibly infinite.
#[derive(Clone)]
pub struct EdgeSelection {
    pub name: String,
    matcher: Arc<dyn Fn(u64) -> bool + Send + Sync>,
    finite: Option<BTreeSet<u64>>,
    pub conductance_sum: ConductanceSum,
}

impl fmt::Debug for EdgeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EdgeSelection")
            .field("name", &self.name)
            .field("finite", &self.finite)
            .field("conductance_sum", &self.conductance_sum)
            .finish()
    }
}

impl EdgeSelection {
    /// A finite set of edge keys; its conductance sum is read off the shells.
    pub fn keys<I: IntoIterator<Item = u64>>(name: &str, keys: I) -> Self {
        let set: BTreeSet<u64> = keys.into_iter().collect();
        let lookup = set.clone();
        EdgeSelection {
            name: name.to_string(),
            matcher: Arc::new(move |k| lookup.contains(&k)),
            finite: Some(set),
            conductance_sum: ConductanceSum::Unknown,
        }
    }

    /// An infinite set given by a key predicate and closed-form conductance sum.
    pub fn predicate<F>(name: &str, matcher: F, conductance_sum: ConductanceSum) -> Self
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        EdgeSelection {
            name: name.to_string(),
            matcher: Arc::new(matcher),
            finite: None,
            conductance_sum,
        }
    }

    pub fn contains(&self, key: u64) -> bool {
        (self.matcher)(key)
    }

    pub fn finite_keys(&self) -> Option<&BTreeSet<u64>> {
        self.finite.as_ref()
    }

    /// Resolves `Σ 1/r(e)`: closed form for infinite sets, summed from shells
    /// (up to `n_max`) for finite ones.
    pub fn resolve_conductance(&self, ex: &dyn Exhaustion, n_max: usize) -> Result<ConductanceSum> {
        let Some(keys) = &self.finite else {
            return Ok(self.conductance_sum);
        };
        let mut found: BTreeMap<u64, f64> = BTreeMap::new();
        for n in 1..=n_max {
            let shell = ex.shell(n)?;
            for e in &shell.edges {
                if keys.contains(&e.key) {
                    found.insert(e.key, e.resistance);
                }
            }
            if found.len() == keys.len() {
                return Ok(ConductanceSum::Finite(found.values().map(|r| 1.0 / r).sum()));
            }
        }
        Err(Error::UnknownEdge(
            keys.iter()
                .find(|k| !found.contains_key(k))
                .map(|&k| k as usize)
                .unwrap_or(0),
        ))
    }
}

/// The subnetwork induced on the selected vertices, exhausted by `V_n ∩ A`.
pub struct Restricted {
    pub base: Arc<dyn Exhaustion>,
    pub keep: VertexSelector,
}

impl Exhaustion for Restricted {
    fn shell(&self, n: usize) -> Result<Shell> {
        let shell = self.base.shell(n)?;
        let names = shell.name_map();
        let kept = |k: u64| names.get(&k).is_some_and(|name| self.keep.matches(name));
        let inner: Vec<ShellVertex> = shell
            .inner
            .iter()
            .filter(|v| self.keep.matches(&v.name))
            .cloned()
            .collect();
        let inner_keys: HashSet<u64> = inner.iter().map(|v| v.key).collect();
        let edges: Vec<ShellEdge> = shell
            .edges
            .iter()
            .filter(|e| kept(e.ends.0) && kept(e.ends.1))
            .filter(|e| inner_keys.contains(&e.ends.0) || inner_keys.contains(&e.ends.1))
            .cloned()
            .collect();
        let outer = outer_of(&inner_keys, &edges, &shell.outer);
        Ok(Shell {
            inner,
            outer,
            edges,
        })
    }

    fn label(&self) -> String {
        format!("{} restricted to {}", self.base.label(), self.keep)
    }
}

fn outer_of(inner: &HashSet<u64>, edges: &[ShellEdge], candidates: &[ShellVertex]) -> Vec<ShellVertex> {
    let touched: HashSet<u64> = edges
        .iter()
        .flat_map(|e| [e.ends.0, e.ends.1])
        .filter(|k| !inner.contains(k))
        .collect();
    candidates
        .iter()
        .filter(|v| touched.contains(&v.key))
        .cloned()
        .collect()
}

/// `G - S`: the selected edges are removed, then vertices left without edges.
pub struct WithoutEdges {
    pub base: Arc<dyn Exhaustion>,
    pub removed: EdgeSelection,
}

impl Exhaustion for WithoutEdges {
    fn shell(&self, n: usize) -> Result<Shell> {
        let shell = self.base.shell(n)?;
        let edges: Vec<ShellEdge> = shell
            .edges
            .into_iter()
            .filter(|e| !self.removed.contains(e.key))
            .collect();
        let mut has_edge: HashSet<u64> = HashSet::new();
        for e in &edges {
            has_edge.insert(e.ends.0);
            has_edge.insert(e.ends.1);
        }
        let inner: Vec<ShellVertex> = shell
            .inner
            .into_iter()
            .filter(|v| has_edge.contains(&v.key))
            .collect();
        let inner_keys: HashSet<u64> = inner.iter().map(|v| v.key).collect();
        let outer = outer_of(&inner_keys, &edges, &shell.outer);
        Ok(Shell {
            inner,
            outer,
            edges,
        })
    }

    fn label(&self) -> String {
        format!("{} minus {}", self.base.label(), self.removed.name)
    }
}

/// The component of `G[V_n] - F` containing `anchor`, for each `n`.
pub struct ComponentOf {
    pub base: Arc<dyn Exhaustion>,
    pub anchor: String,
    pub removed: EdgeSelection,
}

impl Exhaustion for ComponentOf {
    fn shell(&self, n: usize) -> Result<Shell> {
        let shell = self.base.shell(n)?;
        let inner_keys: HashSet<u64> = shell.inner.iter().map(|v| v.key).collect();
        let Some(start) = shell.inner.iter().find(|v| v.name == self.anchor) else {
            return Ok(Shell::default());
        };
        let mut adjacency: HashMap<u64, Vec<u64>> = HashMap::new();
        for e in &shell.edges {
            if self.removed.contains(e.key) {
                continue;
            }
            if inner_keys.contains(&e.ends.0) && inner_keys.contains(&e.ends.1) {
                adjacency.entry(e.ends.0).or_default().push(e.ends.1);
                adjacency.entry(e.ends.1).or_default().push(e.ends.0);
            }
        }
        let mut seen: HashSet<u64> = HashSet::from([start.key]);
        let mut queue = VecDeque::from([start.key]);
        while let Some(v) = queue.pop_front() {
            for &w in adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        let inner: Vec<ShellVertex> = shell
            .inner
            .iter()
            .filter(|v| seen.contains(&v.key))
            .cloned()
            .collect();
        let edges: Vec<ShellEdge> = shell
            .edges
            .into_iter()
            .filter(|e| !self.removed.contains(e.key))
            .filter(|e| seen.contains(&e.ends.0) || seen.contains(&e.ends.1))
            .collect();
        let outer = outer_of(&seen, &edges, &shell.outer);
        Ok(Shell {
            inner,
            outer,
            edges,
        })
    }

    fn label(&self) -> String {
        format!(
            "component of `{}` in {} minus {}",
            self.anchor,
            self.base.label(),
            self.removed.name
        )
    }
}

/// Resistances replaced on finitely many edges.
pub struct Patched {
    pub base: Arc<dyn Exhaustion>,
    pub patch: BTreeMap<u64, f64>,
}

impl Patched {
    pub fn new(base: Arc<dyn Exhaustion>, patch: BTreeMap<u64, f64>) -> Result<Self> {
        if let Some((_, &r)) = patch.iter().find(|(_, &r)| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidResistance(r));
        }
        Ok(Patched { base, patch })
    }
}

impl Exhaustion for Patched {
    fn shell(&self, n: usize) -> Result<Shell> {
        let mut shell = self.base.shell(n)?;
        for e in &mut shell.edges {
            if let Some(&r) = self.patch.get(&e.key) {
                e.resistance = r;
            }
        }
        Ok(shell)
    }

    fn label(&self) -> String {
        format!("{} with {} patched resistances", self.base.label(), self.patch.len())
    }
}

/// An exhaustion of a finite network given by explicit layers
/// (`layers[k]` = `V_{k+1} \ V_k`). Beyond the last layer every remaining
/// vertex is included and the sequence is stationary.
#[derive(Clone, Debug)]
pub struct ExplicitExhaustion {
    net: Network,
    levels: Vec<Vec<VertexId>>,
}

impl ExplicitExhaustion {
    /// Builds the cumulative levels. A level whose induced subgraph is
    /// disconnected is grown by shortest ambient paths joining every stray
    /// component to the component of the first vertex; each repair is logged.
    pub fn new(net: Network, layers: Vec<Vec<VertexId>>) -> Result<Self> {
        if net.is_empty() {
            return Err(Error::EmptySet);
        }
        if !net.is_connected() {
            return Err(Error::Disconnected);
        }
        let mut included = vec![false; net.vertex_count()];
        let mut current: Vec<VertexId> = Vec::new();
        let mut levels = Vec::new();
        let mut layers = layers;
        let remaining: Vec<VertexId> = {
            let mut listed = vec![false; net.vertex_count()];
            for layer in &layers {
                for v in layer {
                    if !net.contains(*v) {
                        return Err(Error::UnknownVertex(v.to_string()));
                    }
                    listed[v.0] = true;
                }
            }
            net.vertices().filter(|v| !listed[v.0]).collect()
        };
        if !remaining.is_empty() {
            layers.push(remaining);
        }
        for (k, layer) in layers.into_iter().enumerate() {
            for v in layer {
                if !included[v.0] {
                    included[v.0] = true;
                    current.push(v);
                }
            }
            if current.is_empty() {
                return Err(generator_error(k + 1, "empty level"));
            }
            let added = connect_closure(&net, &mut included, &mut current);
            if added > 0 {
                log::warn!(
                    "level {}: induced subgraph was disconnected; added {} connecting vertices",
                    k + 1,
                    added
                );
            }
            levels.push(current.clone());
        }
        Ok(ExplicitExhaustion { net, levels })
    }

    /// Single-level exhaustion of a finite network.
    pub fn whole(net: Network) -> Result<Self> {
        let all: Vec<VertexId> = net.vertices().collect();
        Self::new(net, vec![all])
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }
}

/// Grows `current` until `G[current]` is connected; returns how many vertices were added.
fn connect_closure(net: &Network, included: &mut [bool], current: &mut Vec<VertexId>) -> usize {
    let mut added = 0;
    loop {
        let (sub, map) = net.induced(current);
        if sub.is_connected() {
            return added;
        }
        let (labels, _) = sub.component_labels();
        let root_label = labels[0];
        let in_root: Vec<bool> = net
            .vertices()
            .map(|v| map[v.0].is_some_and(|l| labels[l.0] == root_label))
            .collect();
        // BFS from the root component through the ambient graph to the nearest stray vertex
        let mut prev: Vec<Option<VertexId>> = vec![None; net.vertex_count()];
        let mut seen = in_root.clone();
        let mut queue: VecDeque<VertexId> = net.vertices().filter(|v| in_root[v.0]).collect();
        let mut target = None;
        while let Some(v) = queue.pop_front() {
            if included[v.0] && !in_root[v.0] {
                target = Some(v);
                break;
            }
            for d in net.out_edges(v) {
                if !seen[d.head.0] {
                    seen[d.head.0] = true;
                    prev[d.head.0] = Some(v);
                    queue.push_back(d.head);
                }
            }
        }
        let Some(mut v) = target else {
            return added;
        };
        while let Some(p) = prev[v.0] {
            if in_root[p.0] {
                break;
            }
            if !included[p.0] {
                included[p.0] = true;
                current.push(p);
                added += 1;
            }
            v = p;
        }
    }
}

impl Exhaustion for ExplicitExhaustion {
    fn shell(&self, n: usize) -> Result<Shell> {
        check_level(n)?;
        let level = &self.levels[(n - 1).min(self.levels.len() - 1)];
        let mut inside = vec![false; self.net.vertex_count()];
        for v in level {
            inside[v.0] = true;
        }
        let vertex = |v: VertexId| ShellVertex {
            key: v.0 as u64,
            name: self.net.name(v).to_string(),
        };
        let inner = level.iter().map(|&v| vertex(v)).collect();
        let mut outer_set = BTreeSet::new();
        let mut edges = Vec::new();
        for e in self.net.edges() {
            let (a, b) = (inside[e.tail.0], inside[e.head.0]);
            if !(a || b) {
                continue;
            }
            if !a {
                outer_set.insert(e.tail);
            }
            if !b {
                outer_set.insert(e.head);
            }
            edges.push(ShellEdge {
                key: e.key,
                ends: (e.tail.0 as u64, e.head.0 as u64),
                resistance: e.resistance,
            });
        }
        Ok(Shell {
            inner,
            outer: outer_set.into_iter().map(vertex).collect(),
            edges,
        })
    }

    fn label(&self) -> String {
        format!(
            "explicit exhaustion ({} vertices, {} levels)",
            self.net.vertex_count(),
            self.levels.len()
        )
    }
}
