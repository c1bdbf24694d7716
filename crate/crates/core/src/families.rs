//! Parametric infinite networks presented by exhaustions: ladders, double
//! rays, binary trees, integer grids, and ladders with extra parallel edges.
//!
//! All resistance sequences are indexed from 0 at the innermost
//! column/edge/level.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exhaustion::{
    ConductanceSum, EdgeSelection, Exhaustion, Shell, ShellEdge, ShellVertex, VertexSelector,
};

/// Opaque user-supplied sequence; convergence of its sums cannot be decided.
#[derive(Clone)]
pub struct OpaqueFn(pub Arc<dyn Fn(usize) -> f64 + Send + Sync>);

impl fmt::Debug for OpaqueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OpaqueFn")
    }
}

/// A positive sequence `x_0, x_1, …` with a symbolic tail.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesRule {
    /// `c`
    Constant(f64),
    /// `a · q^i`
    Geometric { a: f64, q: f64 },
    /// `a · (i+1)^(-s)`
    Power { a: f64, s: f64 },
    /// `a + b·i`
    Linear { a: f64, b: f64 },
    /// Explicit values for `i < values.len()`, then `tail(i)`.
    Prefix { values: Vec<f64>, tail: Box<SeriesRule> },
    #[serde(skip)]
    Opaque(OpaqueFn),
}

impl SeriesRule {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            SeriesRule::Constant(c) => *c,
            SeriesRule::Geometric { a, q } => a * q.powi(i as i32),
            SeriesRule::Power { a, s } => a * ((i + 1) as f64).powf(-s),
            SeriesRule::Linear { a, b } => a + b * i as f64,
            SeriesRule::Prefix { values, tail } => values.get(i).copied().unwrap_or_else(|| tail.at(i)),
            SeriesRule::Opaque(f) => (f.0)(i),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |x: f64| !(x > 0.0 && x.is_finite());
        match self {
            SeriesRule::Constant(c) if bad(*c) => Err(Error::InvalidSpec(format!("constant {c}"))),
            SeriesRule::Geometric { a, q } if bad(*a) || bad(*q) => {
                Err(Error::InvalidSpec(format!("geometric a={a} q={q}")))
            }
            SeriesRule::Power { a, s } if bad(*a) || !s.is_finite() => {
                Err(Error::InvalidSpec(format!("power a={a} s={s}")))
            }
            SeriesRule::Linear { a, b } if bad(*a) || !(*b >= 0.0 && b.is_finite()) => {
                Err(Error::InvalidSpec(format!("linear a={a} b={b}")))
            }
            SeriesRule::Prefix { values, tail } => {
                if let Some(x) = values.iter().find(|&&x| bad(x)) {
                    return Err(Error::InvalidSpec(format!("prefix value {x}")));
                }
                tail.validate()
            }
            _ => Ok(()),
        }
    }

    /// Whether `Σ x_i = ∞`.
    pub fn sum_diverges(&self) -> Result<bool> {
        match self {
            SeriesRule::Constant(_) | SeriesRule::Linear { .. } => Ok(true),
            SeriesRule::Geometric { q, .. } => Ok(*q >= 1.0),
            SeriesRule::Power { s, .. } => Ok(*s <= 1.0),
            SeriesRule::Prefix { tail, .. } => tail.sum_diverges(),
            SeriesRule::Opaque(_) => Err(Error::UndecidableTail),
        }
    }

    /// Whether `Σ 1/x_i = ∞`.
    pub fn reciprocal_sum_diverges(&self) -> Result<bool> {
        match self {
            SeriesRule::Constant(_) | SeriesRule::Linear { .. } => Ok(true),
            SeriesRule::Geometric { q, .. } => Ok(*q <= 1.0),
            SeriesRule::Power { s, .. } => Ok(*s >= -1.0),
            SeriesRule::Prefix { tail, .. } => tail.reciprocal_sum_diverges(),
            SeriesRule::Opaque(_) => Err(Error::UndecidableTail),
        }
    }

    /// `Σ x_i` when it is finite and known in closed form.
    pub fn sum(&self) -> Option<f64> {
        match self {
            SeriesRule::Geometric { a, q } if *q < 1.0 => Some(a / (1.0 - q)),
            SeriesRule::Prefix { values, tail } => {
                let tail_sum = tail.sum()?;
                let replaced: f64 = (0..values.len()).map(|i| tail.at(i)).sum();
                Some(values.iter().sum::<f64>() + tail_sum - replaced)
            }
            _ => None,
        }
    }

    /// `Σ 1/x_i` when it is finite and known in closed form.
    pub fn reciprocal_sum(&self) -> Option<f64> {
        match self {
            SeriesRule::Geometric { a, q } if *q > 1.0 => Some((1.0 / a) / (1.0 - 1.0 / q)),
            SeriesRule::Prefix { values, tail } => {
                let tail_sum = tail.reciprocal_sum()?;
                let replaced: f64 = (0..values.len()).map(|i| 1.0 / tail.at(i)).sum();
                Some(values.iter().map(|x| 1.0 / x).sum::<f64>() + tail_sum - replaced)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct LadderSpec {
    pub rungs: SeriesRule,
    pub side1: SeriesRule,
    pub side2: SeriesRule,
}

impl LadderSpec {
    pub fn uniform(r: f64) -> Self {
        LadderSpec {
            rungs: SeriesRule::Constant(r),
            side1: SeriesRule::Constant(r),
            side2: SeriesRule::Constant(r),
        }
    }

    /// Rungs `2^i`, sides `2^-i`.
    pub fn geometric() -> Self {
        LadderSpec {
            rungs: SeriesRule::Geometric { a: 1.0, q: 2.0 },
            side1: SeriesRule::Geometric { a: 1.0, q: 0.5 },
            side2: SeriesRule::Geometric { a: 1.0, q: 0.5 },
        }
    }

    /// Rungs `2^i`, first side unit, second side `2^-i`.
    pub fn one_unit_side() -> Self {
        LadderSpec {
            side1: SeriesRule::Constant(1.0),
            ..Self::geometric()
        }
    }

    /// Total resistance 1: rungs `2^-(i+2)`, sides `2^-(i+3)`.
    pub fn summable() -> Self {
        LadderSpec {
            rungs: SeriesRule::Geometric { a: 0.25, q: 0.5 },
            side1: SeriesRule::Geometric { a: 0.125, q: 0.5 },
            side2: SeriesRule::Geometric { a: 0.125, q: 0.5 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rungs.validate()?;
        self.side1.validate()?;
        self.side2.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ClosedForm {
    pub in_ohd: bool,
    pub reason: String,
}

/// The ladder is in the class iff the rung conductances sum to infinity or
/// some side has infinite total resistance.
pub fn ladder_ohd_closed_form(spec: &LadderSpec) -> Result<ClosedForm> {
    let checks = [
        ("rung conductances", spec.rungs.reciprocal_sum_diverges()),
        ("side 1 resistances", spec.side1.sum_diverges()),
        ("side 2 resistances", spec.side2.sum_diverges()),
    ];
    let mut undecided = false;
    for (what, res) in &checks {
        match res {
            Ok(true) => {
                return Ok(ClosedForm {
                    in_ohd: true,
                    reason: format!("sum of {what} diverges"),
                })
            }
            Ok(false) => {}
            Err(_) => undecided = true,
        }
    }
    if undecided {
        return Err(Error::UndecidableTail);
    }
    Ok(ClosedForm {
        in_ohd: false,
        reason: "rung conductances and both side resistances are summable".into(),
    })
}

pub fn ladder_vertex_key(side: usize, column: usize) -> u64 {
    2 * (column as u64 - 1) + side as u64
}

/// Edge keys: rung at column `j` is `3(j-1)`, side edges leaving column `j`
/// are `3(j-1)+1` (side 1) and `3(j-1)+2` (side 2).
pub fn ladder_rung_key(column: usize) -> u64 {
    3 * (column as u64 - 1)
}

pub fn ladder_side_key(side: usize, column: usize) -> u64 {
    3 * (column as u64 - 1) + 1 + side as u64
}

/// Infinite ladder with columns `a_j`, `b_j` (`j ≥ 1`); `V_n` = first `n` columns.
#[derive(Clone, Debug)]
pub struct Ladder {
    pub spec: LadderSpec,
}

impl Ladder {
    pub fn new(spec: LadderSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Ladder { spec })
    }
}

fn ladder_vertex(side: usize, column: usize) -> ShellVertex {
    let prefix = if side == 0 { 'a' } else { 'b' };
    ShellVertex {
        key: ladder_vertex_key(side, column),
        name: format!("{prefix}{column}"),
    }
}

impl Exhaustion for Ladder {
    fn shell(&self, n: usize) -> Result<Shell> {
        if n == 0 {
            return Err(Error::Generator {
                n,
                reason: "levels start at 1".into(),
            });
        }
        let mut shell = Shell::default();
        for j in 1..=n {
            shell.inner.push(ladder_vertex(0, j));
            shell.inner.push(ladder_vertex(1, j));
            shell.edges.push(ShellEdge {
                key: ladder_rung_key(j),
                ends: (ladder_vertex_key(0, j), ladder_vertex_key(1, j)),
                resistance: self.spec.rungs.at(j - 1),
            });
            for (side, rule) in [(0, &self.spec.side1), (1, &self.spec.side2)] {
                shell.edges.push(ShellEdge {
                    key: ladder_side_key(side, j),
                    ends: (ladder_vertex_key(side, j), ladder_vertex_key(side, j + 1)),
                    resistance: rule.at(j - 1),
                });
            }
        }
        shell.outer.push(ladder_vertex(0, n + 1));
        shell.outer.push(ladder_vertex(1, n + 1));
        Ok(shell)
    }

    fn label(&self) -> String {
        "ladder".into()
    }
}

/// Key offset of the parallel edges attached in [`LadderWithParallels`].
pub const PARALLEL_KEY_BASE: u64 = 1 << 40;

/// A ladder whose horizontal edges `e_0, e_1, …` (alternating side 1 and side
/// 2, moving outward) receive extra parallel edges: the edges with
/// conductances `s_0, s_1, …` are split greedily into consecutive groups
/// `H_k` with `Σ_{H_k} s ≥ 2^k`, and each edge of `H_k` is attached between
/// the ends of `e_k`.
#[derive(Clone, Debug)]
pub struct LadderWithParallels {
    pub ladder: Ladder,
    pub conductances: SeriesRule,
    /// Hard limit on the number of parallel edges generated.
    pub max_edges: usize,
}

impl LadderWithParallels {
    pub fn new(ladder: Ladder, conductances: SeriesRule) -> Result<Self> {
        conductances.validate()?;
        if !conductances.sum_diverges()? {
            return Err(Error::InvalidSpec(
                "parallel-edge conductances must have an infinite sum".into(),
            ));
        }
        Ok(LadderWithParallels {
            ladder,
            conductances,
            max_edges: 1_000_000,
        })
    }

    /// Index ranges of `H_0 … H_{k_max}`.
    pub fn groups(&self, k_max: usize) -> Result<Vec<std::ops::Range<usize>>> {
        let mut out = Vec::with_capacity(k_max + 1);
        let mut m = 0;
        for k in 0..=k_max {
            let start = m;
            let mut total = 0.0;
            let goal = 2f64.powi(k as i32);
            while total < goal {
                if m >= self.max_edges {
                    return Err(Error::Generator {
                        n: k,
                        reason: format!("more than {} parallel edges needed", self.max_edges),
                    });
                }
                total += self.conductances.at(m);
                m += 1;
            }
            out.push(start..m);
        }
        Ok(out)
    }
}

impl Exhaustion for LadderWithParallels {
    fn shell(&self, n: usize) -> Result<Shell> {
        let mut shell = self.ladder.shell(n)?;
        let groups = self.groups(2 * n - 1)?;
        for j in 1..=n {
            for side in 0..2 {
                let k = 2 * (j - 1) + side;
                let ends = (ladder_vertex_key(side, j), ladder_vertex_key(side, j + 1));
                for m in groups[k].clone() {
                    shell.edges.push(ShellEdge {
                        key: PARALLEL_KEY_BASE + m as u64,
                        ends,
                        resistance: 1.0 / self.conductances.at(m),
                    });
                }
            }
        }
        Ok(shell)
    }

    fn label(&self) -> String {
        "ladder with parallel edges".into()
    }
}

/// Double ray `… v-1 – v0 – v1 …`; `V_n` = vertices within distance `n-1` of `v0`.
/// Edge `k` steps out on the right (`v_k – v_{k+1}`) has resistance
/// `right(k)`, on the left `left(k)`.
#[derive(Clone, Debug)]
pub struct DoubleRay {
    pub right: SeriesRule,
    pub left: SeriesRule,
}

impl DoubleRay {
    pub fn symmetric(rule: SeriesRule) -> Result<Self> {
        rule.validate()?;
        Ok(DoubleRay {
            right: rule.clone(),
            left: rule,
        })
    }
}

fn ray_vertex(k: i64) -> ShellVertex {
    let key = if k >= 0 { 2 * k as u64 } else { 2 * (-k) as u64 - 1 };
    ShellVertex {
        key,
        name: format!("v{k}"),
    }
}

impl Exhaustion for DoubleRay {
    fn shell(&self, n: usize) -> Result<Shell> {
        if n == 0 {
            return Err(Error::Generator {
                n,
                reason: "levels start at 1".into(),
            });
        }
        let m = n as i64 - 1;
        let mut shell = Shell::default();
        for k in -m..=m {
            shell.inner.push(ray_vertex(k));
        }
        shell.outer.push(ray_vertex(-m - 1));
        shell.outer.push(ray_vertex(m + 1));
        for k in 0..n {
            shell.edges.push(ShellEdge {
                key: 2 * k as u64,
                ends: (ray_vertex(k as i64).key, ray_vertex(k as i64 + 1).key),
                resistance: self.right.at(k),
            });
            shell.edges.push(ShellEdge {
                key: 2 * k as u64 + 1,
                ends: (ray_vertex(-(k as i64)).key, ray_vertex(-(k as i64) - 1).key),
                resistance: self.left.at(k),
            });
        }
        Ok(shell)
    }

    fn label(&self) -> String {
        "double ray".into()
    }
}

/// Rooted binary tree in heap numbering (`root` = 1, children `2h`, `2h+1`,
/// named `t{h}`); `V_n` = depth `≤ n-1`. Edges from depth `k` to `k+1` have
/// resistance `levels(k)`.
#[derive(Clone, Debug)]
pub struct BinaryTree {
    pub levels: SeriesRule,
}

pub fn tree_name(heap: u64) -> String {
    if heap == 1 {
        "root".into()
    } else {
        format!("t{heap}")
    }
}

impl Exhaustion for BinaryTree {
    fn shell(&self, n: usize) -> Result<Shell> {
        if n == 0 || n > 40 {
            return Err(Error::Generator {
                n,
                reason: "tree depth must be between 1 and 40".into(),
            });
        }
        let inner_end = 1u64 << n;
        let mut shell = Shell::default();
        for h in 1..inner_end {
            shell.inner.push(ShellVertex {
                key: h,
                name: tree_name(h),
            });
        }
        for h in inner_end..2 * inner_end {
            shell.outer.push(ShellVertex {
                key: h,
                name: tree_name(h),
            });
        }
        for h in 2..2 * inner_end {
            let depth = 63 - h.leading_zeros() as usize;
            shell.edges.push(ShellEdge {
                key: h,
                ends: (h / 2, h),
                resistance: self.levels.at(depth - 1),
            });
        }
        Ok(shell)
    }

    fn label(&self) -> String {
        "binary tree".into()
    }
}

/// `Z^d` (`1 ≤ d ≤ 3`) with constant resistance; `V_n` = L1 ball of radius `n-1`.
/// Vertices are named by comma-separated coordinates.
#[derive(Clone, Debug)]
pub struct Grid {
    pub dim: usize,
    pub resistance: f64,
}

const GRID_BITS: u32 = 20;

impl Grid {
    pub fn new(dim: usize, resistance: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidSpec(format!("grid dimension {dim}")));
        }
        if !(resistance > 0.0 && resistance.is_finite()) {
            return Err(Error::InvalidResistance(resistance));
        }
        Ok(Grid { dim, resistance })
    }

    fn key(p: &[i64]) -> u64 {
        p.iter().fold(0u64, |acc, &c| {
            let z = if c >= 0 { 2 * c as u64 } else { 2 * (-c) as u64 - 1 };
            (acc << GRID_BITS) | z
        })
    }

    pub fn name(p: &[i64]) -> String {
        p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    fn ball(&self, radius: i64) -> Vec<Vec<i64>> {
        fn rec(dim: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if prefix.len() == dim {
                out.push(prefix.clone());
                return;
            }
            for c in -budget..=budget {
                prefix.push(c);
                rec(dim, budget - c.abs(), prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(self.dim, radius, &mut Vec::new(), &mut out);
        out
    }
}

impl Exhaustion for Grid {
    fn shell(&self, n: usize) -> Result<Shell> {
        if n == 0 || n as u64 >= 1 << (GRID_BITS - 2) {
            return Err(Error::Generator {
                n,
                reason: "grid radius out of range".into(),
            });
        }
        let radius = n as i64 - 1;
        let mut shell = Shell::default();
        for p in self.ball(radius) {
            shell.inner.push(ShellVertex {
                key: Self::key(&p),
                name: Self::name(&p),
            });
        }
        let inside = |p: &[i64]| p.iter().map(|c| c.abs()).sum::<i64>() <= radius;
        let mut outer = BTreeMap::new();
        for p in self.ball(radius) {
            for axis in 0..self.dim {
                for step in [-1i64, 1] {
                    let mut w = p.clone();
                    w[axis] += step;
                    let w_inside = inside(&w);
                    // each inner edge once: from its lower endpoint
                    if w_inside && step < 0 {
                        continue;
                    }
                    let lo = if step > 0 { &p } else { &w };
                    shell.edges.push(ShellEdge {
                        key: (Self::key(lo) << 2) | axis as u64,
                        ends: (Self::key(&p), Self::key(&w)),
                        resistance: self.resistance,
                    });
                    if !w_inside {
                        outer.entry(Self::key(&w)).or_insert_with(|| Self::name(&w));
                    }
                }
            }
        }
        shell.outer = outer
            .into_iter()
            .map(|(key, name)| ShellVertex { key, name })
            .collect();
        Ok(shell)
    }

    fn label(&self) -> String {
        format!("Z^{}", self.dim)
    }
}

/// Key of the bridge edge of a [`Joined`] pair.
pub const BRIDGE_KEY: u64 = u64::MAX;

/// Two exhaustions side by side (names prefixed `L:` and `R:`) joined by one
/// bridge edge between two named vertices of their first levels.
pub struct Joined {
    pub left: Arc<dyn Exhaustion>,
    pub right: Arc<dyn Exhaustion>,
    pub bridge: (String, String, f64),
}

impl Joined {
    pub fn left_name(name: &str) -> String {
        format!("L:{name}")
    }

    pub fn right_name(name: &str) -> String {
        format!("R:{name}")
    }
}

impl Exhaustion for Joined {
    fn shell(&self, n: usize) -> Result<Shell> {
        let mut out = Shell::default();
        let mut bridge_ends = [None, None];
        for (side, ex) in [(0u64, &self.left), (1u64, &self.right)] {
            let shell = ex.shell(n)?;
            let rename = |name: &str| {
                if side == 0 {
                    Self::left_name(name)
                } else {
                    Self::right_name(name)
                }
            };
            let anchor = if side == 0 { &self.bridge.0 } else { &self.bridge.1 };
            for v in &shell.inner {
                if &v.name == anchor {
                    bridge_ends[side as usize] = Some(2 * v.key + side);
                }
                out.inner.push(ShellVertex {
                    key: 2 * v.key + side,
                    name: rename(&v.name),
                });
            }
            for v in &shell.outer {
                out.outer.push(ShellVertex {
                    key: 2 * v.key + side,
                    name: rename(&v.name),
                });
            }
            for e in &shell.edges {
                if e.key >= u64::MAX / 2 {
                    return Err(Error::Generator {
                        n,
                        reason: "edge key too large to join".into(),
                    });
                }
                out.edges.push(ShellEdge {
                    key: 2 * e.key + side,
                    ends: (2 * e.ends.0 + side, 2 * e.ends.1 + side),
                    resistance: e.resistance,
                });
            }
        }
        match bridge_ends {
            [Some(a), Some(b)] => out.edges.push(ShellEdge {
                key: BRIDGE_KEY,
                ends: (a, b),
                resistance: self.bridge.2,
            }),
            _ => {
                return Err(Error::Generator {
                    n,
                    reason: "bridge endpoints must lie in every level".into(),
                })
            }
        }
        Ok(out)
    }

    fn label(&self) -> String {
        format!("{} joined to {}", self.left.label(), self.right.label())
    }
}

/// Closed-form bound on the weak resistance diameters of the default
/// barricade sequence: every `wRD(S_n) ≤ bound`, so `Σ 1/wRD = ∞`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct WrdBound {
    pub bound: f64,
    pub reason: String,
}

/// A ready-to-use network with its default terminals and closed-form facts.
#[derive(Clone)]
pub struct Family {
    pub name: String,
    pub exhaustion: Arc<dyn Exhaustion>,
    pub pair: (String, String),
    pub vertex: String,
    pub parts: Vec<(String, VertexSelector)>,
    /// The distinguished edge set `S` of the deletion counterexamples.
    pub removable: Option<EdgeSelection>,
    pub ladder: Option<LadderSpec>,
    pub ohd: Option<ClosedForm>,
    /// Reason the Nash-Williams sum over the exhaustion layers diverges, if known.
    pub recurrence: Option<String>,
    pub wrd_bound: Option<WrdBound>,
    /// Default anchor edge key for barricade searches.
    pub anchor_edge: u64,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Family").field("name", &self.name).finish()
    }
}

impl Family {
    pub fn part(&self, name: &str) -> Option<&VertexSelector> {
        self.parts.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Closed-form reason why the named part is recurrent, if known.
    pub fn part_recurrence(&self, name: &str) -> Option<String> {
        let spec = self.ladder.as_ref()?;
        let side = match name {
            "side1" => &spec.side1,
            "side2" => &spec.side2,
            _ => return None,
        };
        matches!(side.sum_diverges(), Ok(true)).then(|| format!("{name} is a ray with divergent resistance sum"))
    }

    pub fn ladder(name: &str, spec: LadderSpec) -> Result<Family> {
        let ohd = ladder_ohd_closed_form(&spec).ok();
        // Σ 1/(c1 + c2) over layers; for the monotone rules used here it
        // diverges exactly when both side resistance sums diverge
        let recurrence = match (spec.side1.sum_diverges(), spec.side2.sum_diverges()) {
            (Ok(true), Ok(true)) => Some("both side resistance sums diverge".to_string()),
            _ => None,
        };
        let wrd_bound = rung_bound(&spec);
        Ok(Family {
            name: name.to_string(),
            exhaustion: Arc::new(Ladder::new(spec.clone())?),
            pair: ("a1".into(), "b1".into()),
            vertex: "a1".into(),
            parts: ladder_parts(),
            removable: None,
            ladder: Some(spec),
            ohd,
            recurrence,
            wrd_bound,
            anchor_edge: ladder_rung_key(1),
        })
    }

    /// Built-in shorthands accepted by the command line.
    pub fn named(name: &str) -> Result<Family> {
        match name {
            "ladder:unit" => Family::ladder(name, LadderSpec::uniform(1.0)),
            "ladder:geometric" => Family::ladder(name, LadderSpec::geometric()),
            "ladder:one-unit-side" => Family::ladder(name, LadderSpec::one_unit_side()),
            "ladder:summable" => {
                let mut f = Family::ladder(name, LadderSpec::summable())?;
                f.wrd_bound = Some(WrdBound {
                    bound: 1.0,
                    reason: "total resistance is 1".into(),
                });
                Ok(f)
            }
            "ray:unit" => Family::double_ray(name, SeriesRule::Constant(1.0)),
            "btree:unit" => Family::binary_tree(name, SeriesRule::Constant(1.0)),
            "grid2:unit" => Family::grid(name, 2, 1.0),
            "n1" => n1(),
            "n2" => n2(SeriesRule::Geometric { a: 1.0, q: 2.0 }),
            "twin-trees" => Family::joined(
                name,
                Family::binary_tree("btree:unit", SeriesRule::Constant(1.0))?,
                Family::binary_tree("btree:unit", SeriesRule::Constant(1.0))?,
            ),
            "twin-rays" => Family::joined(
                name,
                Family::double_ray("ray:unit", SeriesRule::Constant(1.0))?,
                Family::double_ray("ray:unit", SeriesRule::Constant(1.0))?,
            ),
            _ => Err(Error::InvalidSpec(format!("unknown family `{name}`"))),
        }
    }

    pub fn double_ray(name: &str, rule: SeriesRule) -> Result<Family> {
        let recurrence = match rule.sum_diverges() {
            Ok(true) => Some("each layer has two boundary edges and the resistances are not summable".into()),
            _ => None,
        };
        Ok(Family {
            name: name.to_string(),
            exhaustion: Arc::new(DoubleRay::symmetric(rule)?),
            pair: ("v0".into(), "v1".into()),
            vertex: "v0".into(),
            parts: vec![
                ("right".into(), VertexSelector::pattern(r"^v[1-9]\d*$")?),
                ("left".into(), VertexSelector::pattern(r"^v-\d+$")?),
            ],
            removable: None,
            ladder: None,
            ohd: None,
            recurrence,
            wrd_bound: None,
            anchor_edge: 0,
        })
    }

    pub fn binary_tree(name: &str, rule: SeriesRule) -> Result<Family> {
        rule.validate()?;
        Ok(Family {
            name: name.to_string(),
            exhaustion: Arc::new(BinaryTree { levels: rule }),
            pair: ("root".into(), "t2".into()),
            vertex: "root".into(),
            parts: vec![
                ("left".into(), VertexSelector::pattern(r"^t(2|4|5|8|9|10|11)$")?),
                ("right".into(), VertexSelector::pattern(r"^t(3|6|7|12|13|14|15)$")?),
            ],
            removable: None,
            ladder: None,
            ohd: None,
            recurrence: None,
            wrd_bound: None,
            anchor_edge: 2,
        })
    }

    pub fn grid(name: &str, dim: usize, resistance: f64) -> Result<Family> {
        let grid = Grid::new(dim, resistance)?;
        let origin = Grid::name(&vec![0; dim]);
        let mut east = vec![0; dim];
        east[0] = 1;
        Ok(Family {
            name: name.to_string(),
            exhaustion: Arc::new(grid),
            pair: (origin.clone(), Grid::name(&east)),
            vertex: origin,
            parts: Vec::new(),
            removable: None,
            ladder: None,
            ohd: None,
            recurrence: (dim <= 2).then(|| "layer boundaries have 8i+4 edges (d = 2) or 2 (d = 1)".into()),
            wrd_bound: None,
            anchor_edge: 0,
        })
    }

    pub fn joined(name: &str, left: Family, right: Family) -> Result<Family> {
        let exhaustion = Joined {
            left: left.exhaustion.clone(),
            right: right.exhaustion.clone(),
            bridge: (left.vertex.clone(), right.vertex.clone(), 1.0),
        };
        Ok(Family {
            name: name.to_string(),
            exhaustion: Arc::new(exhaustion),
            pair: (Joined::left_name(&left.vertex), Joined::right_name(&right.vertex)),
            vertex: Joined::left_name(&left.vertex),
            parts: vec![
                ("left".into(), VertexSelector::pattern("^L:")?),
                ("right".into(), VertexSelector::pattern("^R:")?),
            ],
            removable: Some(EdgeSelection::keys("bridge", [BRIDGE_KEY])),
            ladder: None,
            ohd: None,
            recurrence: None,
            wrd_bound: None,
            anchor_edge: BRIDGE_KEY,
        })
    }
}

fn ladder_parts() -> Vec<(String, VertexSelector)> {
    vec![
        ("side1".into(), VertexSelector::pattern(r"^a\d+$").expect("valid pattern")),
        ("side2".into(), VertexSelector::pattern(r"^b\d+$").expect("valid pattern")),
    ]
}

/// The column barricades of a ladder are single rungs, so `wRD(S_n)` is the
/// resistance of rung `n+1`; bounded rungs give a bound.
fn rung_bound(spec: &LadderSpec) -> Option<WrdBound> {
    let bound = match &spec.rungs {
        SeriesRule::Constant(c) => *c,
        SeriesRule::Geometric { a, q } if *q <= 1.0 => *a,
        SeriesRule::Power { a, s } if *s >= 0.0 => *a,
        SeriesRule::Prefix { values, tail } => {
            let tail_bound = match tail.as_ref() {
                SeriesRule::Constant(c) => *c,
                SeriesRule::Geometric { a, q } if *q <= 1.0 => *a,
                _ => return None,
            };
            values.iter().copied().fold(tail_bound, f64::max)
        }
        _ => return None,
    };
    Some(WrdBound {
        bound,
        reason: "column barricades are single rungs of bounded resistance".into(),
    })
}

/// Ladder whose rungs after the first form `S`: the rest is a double ray
/// through the first rung with total resistance 1 (`1/3` for the first rung,
/// `2^-(i+1)/3` on each side).
pub fn n1() -> Result<Family> {
    let spec = LadderSpec {
        rungs: SeriesRule::Prefix {
            values: vec![1.0 / 3.0],
            tail: Box::new(SeriesRule::Constant(1.0)),
        },
        side1: SeriesRule::Geometric { a: 1.0 / 6.0, q: 0.5 },
        side2: SeriesRule::Geometric { a: 1.0 / 6.0, q: 0.5 },
    };
    let mut family = Family::ladder("n1", spec)?;
    family.removable = Some(n1_rungs());
    family.ohd = None;
    Ok(family)
}

/// The rungs of columns `j ≥ 2`.
pub fn n1_rungs() -> EdgeSelection {
    EdgeSelection::predicate(
        "rungs after the first",
        |k| k % 3 == 0 && (3..PARALLEL_KEY_BASE).contains(&k),
        ConductanceSum::Divergent,
    )
}

/// Ladder with `Σ 1/r = 1` (rungs `4·2^i`, sides `8·2^i`) plus parallel
/// edges of conductances `s_m` grouped onto the horizontal edges.
pub fn n2(conductances: SeriesRule) -> Result<Family> {
    let spec = LadderSpec {
        rungs: SeriesRule::Geometric { a: 4.0, q: 2.0 },
        side1: SeriesRule::Geometric { a: 8.0, q: 2.0 },
        side2: SeriesRule::Geometric { a: 8.0, q: 2.0 },
    };
    let base = Family::ladder("n2", spec.clone())?;
    let ex = LadderWithParallels::new(Ladder::new(spec)?, conductances)?;
    Ok(Family {
        name: "n2".into(),
        exhaustion: Arc::new(ex),
        removable: Some(n2_parallels()),
        ladder: None,
        ohd: Some(ClosedForm {
            in_ohd: false,
            reason: "horizontal edges carry parallel conductance ≥ 2^k, so sides and rungs are summable".into(),
        }),
        recurrence: None,
        wrd_bound: None,
        ..base
    })
}

pub fn n2_parallels() -> EdgeSelection {
    EdgeSelection::predicate("parallel edges", |k| k >= PARALLEL_KEY_BASE, ConductanceSum::Divergent)
}

/// Family description read from JSON.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Ladder(LadderSpec),
    DoubleRay { resistances: SeriesRule },
    BinaryTree { levels: SeriesRule },
    Grid { dim: usize, resistance: f64 },
    N1,
    N2 { conductances: Option<SeriesRule> },
}

impl FamilySpec {
    pub fn build(self) -> Result<Family> {
        match self {
            FamilySpec::Ladder(spec) => Family::ladder("ladder", spec),
            FamilySpec::DoubleRay { resistances } => Family::double_ray("ray", resistances),
            FamilySpec::BinaryTree { levels } => Family::binary_tree("btree", levels),
            FamilySpec::Grid { dim, resistance } => Family::grid("grid", dim, resistance),
            FamilySpec::N1 => n1(),
            FamilySpec::N2 { conductances } => {
                n2(conductances.unwrap_or(SeriesRule::Geometric { a: 1.0, q: 2.0 }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaustion::{truncate_free, truncate_wired, WithoutEdges};

    #[test]
    fn ladder_levels() {
        let ex = Ladder::new(LadderSpec::uniform(1.0)).unwrap();
        let t1 = truncate_free(&ex, 1).unwrap();
        assert_eq!((t1.network.vertex_count(), t1.network.edge_count()), (2, 1));
        let t2 = truncate_free(&ex, 2).unwrap();
        assert_eq!((t2.network.vertex_count(), t2.network.edge_count()), (4, 4));
        let w2 = truncate_wired(&ex, 2).unwrap();
        assert_eq!(w2.network.edge_count(), 6);
    }

    #[test]
    fn ladder_minus_rungs_splits() {
        let base: Arc<dyn Exhaustion> = Arc::new(Ladder::new(LadderSpec::uniform(1.0)).unwrap());
        let net = truncate_free(&base, 5).unwrap().network;
        let rungs: Vec<_> = net
            .edge_ids()
            .filter(|&e| net.edge(e).key % 3 == 0)
            .collect();
        let d = crate::network::delete_edges(&net, &rungs);
        assert!(!d.connected);
        assert_eq!(d.network.components().len(), 2);
        let no_rungs = WithoutEdges {
            base,
            removed: EdgeSelection::predicate("rungs", |k| k % 3 == 0, ConductanceSum::Divergent),
        };
        assert!(truncate_free(&no_rungs, 5).is_err());
    }

    #[test]
    fn ray_tree_grid_sizes() {
        let ray = DoubleRay::symmetric(SeriesRule::Constant(1.0)).unwrap();
        assert_eq!(truncate_free(&ray, 3).unwrap().network.edge_count(), 4);
        let w = truncate_wired(&ray, 1).unwrap();
        assert_eq!((w.network.vertex_count(), w.network.edge_count()), (2, 2));
        let tree = BinaryTree {
            levels: SeriesRule::Constant(1.0),
        };
        assert_eq!(truncate_free(&tree, 1).unwrap().network.vertex_count(), 1);
        let w = truncate_wired(&tree, 1).unwrap();
        assert_eq!((w.network.vertex_count(), w.network.edge_count()), (2, 2));
        let grid = Grid::new(2, 1.0).unwrap();
        let t = truncate_free(&grid, 2).unwrap();
        assert_eq!((t.network.vertex_count(), t.network.edge_count()), (5, 4));
        let t = truncate_free(&grid, 3).unwrap();
        assert_eq!((t.network.vertex_count(), t.network.edge_count()), (13, 16));
        let w = truncate_wired(&grid, 3).unwrap();
        assert_eq!(w.network.degree(w.infinity.unwrap()), 8 * 2 + 4);
    }

    #[test]
    fn closed_form_trichotomy() {
        assert!(ladder_ohd_closed_form(&LadderSpec::uniform(1.0)).unwrap().in_ohd);
        assert!(!ladder_ohd_closed_form(&LadderSpec::geometric()).unwrap().in_ohd);
        let one = ladder_ohd_closed_form(&LadderSpec::one_unit_side()).unwrap();
        assert!(one.in_ohd);
        assert!(one.reason.contains("side 1"));
        let opaque = LadderSpec {
            rungs: SeriesRule::Opaque(OpaqueFn(Arc::new(|i| (i + 1) as f64))),
            ..LadderSpec::geometric()
        };
        assert_eq!(ladder_ohd_closed_form(&opaque).unwrap_err(), Error::UndecidableTail);
    }

    #[test]
    fn series_rules() {
        let g = SeriesRule::Geometric { a: 1.0, q: 0.5 };
        assert_eq!(g.sum(), Some(2.0));
        assert!(g.reciprocal_sum_diverges().unwrap());
        let p = SeriesRule::Power { a: 1.0, s: 2.0 };
        assert!(!p.sum_diverges().unwrap());
        assert!(p.reciprocal_sum_diverges().unwrap());
        assert!(SeriesRule::Power { a: 1.0, s: 1.0 }.sum_diverges().unwrap());
        let pre = SeriesRule::Prefix {
            values: vec![5.0],
            tail: Box::new(g),
        };
        assert_eq!(pre.at(0), 5.0);
        assert_eq!(pre.at(2), 0.25);
        assert_eq!(pre.sum(), Some(6.0));
        let spec: FamilySpec =
            serde_json_like(r#"{"kind":"ladder","rungs":{"constant":1.0},"side1":{"geometric":{"a":1.0,"q":0.5}},"side2":{"power":{"a":1.0,"s":2.0}}}"#);
        assert!(matches!(spec, FamilySpec::Ladder(_)));
    }

    fn serde_json_like(s: &str) -> FamilySpec {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn counterexample_sums() {
        let f = n1().unwrap();
        let spec = f.ladder.unwrap();
        let total = spec.side1.sum().unwrap() + spec.side2.sum().unwrap() + spec.rungs.at(0);
        assert!((total - 1.0).abs() < 1e-15);
        let f2 = n2(SeriesRule::Geometric { a: 1.0, q: 2.0 }).unwrap();
        let t = truncate_free(&f2.exhaustion, 2).unwrap();
        // 4 ladder vertices, ladder edges 4, plus one parallel edge on each of e_0, e_1
        assert_eq!(t.network.edge_count(), 6);
        assert!(matches!(
            n2(SeriesRule::Geometric { a: 1.0, q: 0.5 }),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn joined_trees() {
        let f = Family::named("twin-trees").unwrap();
        let t = truncate_free(&f.exhaustion, 2).unwrap();
        assert_eq!(t.network.vertex_count(), 6);
        assert_eq!(t.network.edge_count(), 5);
        assert!(t.network.vertex("L:root").is_some());
    }
}
