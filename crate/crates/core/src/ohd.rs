//! Deciding membership in `O_HD` numerically.
//!
//! A network is in `O_HD` (every harmonic function of finite energy is
//! constant) exactly when the free and wired currents agree for every pair of
//! terminals, i.e. `R_F(p, q) = R_W(p, q)`. Both resistances are monotone
//! limits over an exhaustion, so `R_F^{(n)} - R_W^{(n)}` brackets the gap from
//! above and is what we report.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::currents::{
    current_with_intensity, effective_resistance, levels_from_first, wired_current, Boundary, Direction, LimitConfig,
    LimitEstimate, LimitVerdict,
};
use crate::error::{Error, Result};
use crate::exhaustion::{
    truncate_free, truncate_wired, ComponentOf, ConductanceSum, EdgeSelection, Exhaustion, Patched, Restricted,
    VertexSelector, WithoutEdges,
};
use crate::kirchhoff::accumulations;
use crate::network::{contract, induced_edge_function, DirectedEdge, EdgeFunction, Network, Potential, VertexId};
use crate::transience::{resistance_to_infinity, Transience, TransienceVerdict};

/// Evidence threshold multiplier: a positive gap must extrapolate above `10·tol`.
pub const GAP_FACTOR: f64 = 10.0;

/// Contracted free resistance above which a finite-energy `ρ` separating the
/// parts is taken to exist.
pub const RHO_THRESHOLD: f64 = 1e-3;

/// Relative flatness required of the contracted free resistance.
pub const RHO_FLATNESS: f64 = 1e-4;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OhdEvidence {
    #[serde(rename = "in-ohd-evidence")]
    InOhd,
    #[serde(rename = "not-in-ohd-evidence")]
    NotInOhd,
    #[serde(rename = "undecided")]
    Undecided,
}

impl OhdEvidence {
    pub fn is_decided(self) -> bool {
        self != OhdEvidence::Undecided
    }
}

/// `h = pot(F_n) - pot(W_n)` at unit intensity, restricted to `V_n`.
#[derive(Clone, Debug, Serialize)]
pub struct HarmonicWitness {
    pub n: usize,
    pub names: Vec<String>,
    pub potential: Potential,
    /// Energy of `h` on `G[V_n]`.
    pub energy: f64,
    /// `max h - min h`.
    pub spread: f64,
    /// Largest |accumulation| of the induced current over vertices of
    /// `V_n` without edges leaving `V_n`.
    pub interior_residual: f64,
    pub interior_vertices: usize,
    /// Largest |accumulation| over all of `V_n`.
    pub max_residual: f64,
    /// Current of `h` on `G[V_n]`, taken from the two solves.
    #[serde(skip)]
    pub current: EdgeFunction,
    #[serde(skip)]
    pub network: Network,
    #[serde(skip)]
    pub frontier: Vec<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OhdVerdict {
    pub p: String,
    pub q: String,
    pub free: LimitEstimate,
    pub wired: LimitEstimate,
    pub gap: LimitEstimate,
    #[serde(skip)]
    pub rows: Vec<GapRow>,
    pub verdict: OhdEvidence,
    pub witness: HarmonicWitness,
}

/// One level of a gap sweep, at unit intensity.
#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub r_free: f64,
    pub r_wired: f64,
    pub gap: f64,
    /// Energy of the free current.
    pub energy: f64,
    /// Larger of the two solver residuals.
    pub residual: f64,
}

fn gap_row(ex: &dyn Exhaustion, p: &str, q: &str, n: usize, cfg: &LimitConfig) -> Result<GapRow> {
    let free = truncate_free(ex, n)?;
    let locate = |net: &Network, name: &str| {
        net.vertex(name).ok_or_else(|| Error::TerminalOutside {
            name: name.to_string(),
            n,
        })
    };
    let f = current_with_intensity(
        &free.network,
        locate(&free.network, p)?,
        locate(&free.network, q)?,
        1.0,
        &cfg.solver,
    )?;
    let (_, w) = wired_current(ex, n, p, q, 1.0, &cfg.solver)?;
    Ok(GapRow {
        n,
        r_free: f.resistance,
        r_wired: w.resistance,
        gap: f.resistance - w.resistance,
        energy: f.energy,
        residual: f.residual.max(w.residual),
    })
}

/// Free and wired resistances at the given levels, computed in parallel.
pub fn gap_rows(ex: &dyn Exhaustion, p: &str, q: &str, levels: &[usize], cfg: &LimitConfig) -> Result<Vec<GapRow>> {
    levels.par_iter().map(|&n| gap_row(ex, p, q, n, cfg)).collect()
}

/// Free and wired resistance sequences from the first level containing
/// `p` and `q` up to `n_max`, their difference and a harmonic witness at
/// `n_max`.
pub fn gap_test(ex: &dyn Exhaustion, p: &str, q: &str, n_max: usize, cfg: &LimitConfig) -> Result<OhdVerdict> {
    if p == q {
        return Err(Error::SameTerminal);
    }
    let levels = levels_from_first(ex, &[p, q], n_max)?;
    let rows = gap_rows(ex, p, q, &levels, cfg)?;
    let sequence = |pick: fn(&GapRow) -> f64, direction: Direction| {
        LimitEstimate::from_sequence(
            rows.iter().map(|r| (r.n, pick(r))).collect(),
            direction,
            cfg.tol,
            cfg.cap,
        )
    };
    let free = sequence(|r| r.r_free, Boundary::Free.direction())?;
    let wired = sequence(|r| r.r_wired, Boundary::Wired.direction())?;
    let gap = sequence(|r| r.gap, Direction::Unconstrained)?;
    let both = free.verdict == LimitVerdict::Converged && wired.verdict == LimitVerdict::Converged;
    let last = gap.last().unwrap_or(f64::NAN);
    let verdict = if both && gap.extrapolated > GAP_FACTOR * cfg.tol {
        OhdEvidence::NotInOhd
    } else if gap.verdict == LimitVerdict::Converged && last < cfg.tol {
        OhdEvidence::InOhd
    } else {
        OhdEvidence::Undecided
    };
    let witness = harmonic_witness(ex, p, q, n_max, cfg)?;
    Ok(OhdVerdict {
        p: p.to_string(),
        q: q.to_string(),
        free,
        wired,
        gap,
        rows,
        verdict,
        witness,
    })
}

/// The difference of the free and wired unit-intensity potentials at level `n`.
pub fn harmonic_witness(ex: &dyn Exhaustion, p: &str, q: &str, n: usize, cfg: &LimitConfig) -> Result<HarmonicWitness> {
    let free = truncate_free(ex, n)?;
    let wired = truncate_wired(ex, n)?;
    let locate = |net: &Network, name: &str| {
        net.vertex(name).ok_or_else(|| Error::TerminalOutside {
            name: name.to_string(),
            n,
        })
    };
    let (fp, fq) = (locate(&free.network, p)?, locate(&free.network, q)?);
    let (wp, wq) = (locate(&wired.network, p)?, locate(&wired.network, q)?);
    let (f, w) = rayon::join(
        || current_with_intensity(&free.network, fp, fq, 1.0, &cfg.solver),
        || current_with_intensity(&wired.network, wp, wq, 1.0, &cfg.solver),
    );
    let (f, w) = (f?, w?);
    // both truncations list the vertices of V_n first and in the same order
    let h: Vec<f64> = free
        .network
        .vertices()
        .map(|v| {
            debug_assert_eq!(free.network.name(v), wired.network.name(v));
            f.potential.get(v) - w.potential.get(v)
        })
        .collect();
    let potential = Potential(h);
    // difference of the solver flows; recomputing from `h` loses all
    // precision on edges of tiny resistance
    let current = EdgeFunction(
        free.network
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let j = wired
                    .network
                    .edge_by_key(e.key)
                    .expect("edges of G[V_n] survive in the wired truncation");
                f.flow.0[i] - w.flow.0[j.0]
            })
            .collect(),
    );
    let acc = accumulations(&free.network, &current)?;
    let mut interior_residual: f64 = 0.0;
    let mut interior_vertices = 0;
    let mut max_residual: f64 = 0.0;
    for v in free.network.vertices() {
        max_residual = max_residual.max(acc[v.0].abs());
        if !free.is_frontier(v) {
            interior_vertices += 1;
            interior_residual = interior_residual.max(acc[v.0].abs());
        }
    }
    let energy = free
        .network
        .edges()
        .iter()
        .zip(&current.0)
        .map(|(e, i)| e.resistance * i * i)
        .sum();
    Ok(HarmonicWitness {
        n,
        names: free.network.names().to_vec(),
        spread: potential.spread(),
        potential,
        energy,
        interior_residual,
        interior_vertices,
        max_residual,
        current,
        network: free.network,
        frontier: free.frontier,
    })
}

/// Gap tests for several pairs, in input order.
pub fn gap_sweep(
    ex: &dyn Exhaustion,
    pairs: &[(String, String)],
    n_max: usize,
    cfg: &LimitConfig,
) -> Result<Vec<OhdVerdict>> {
    pairs
        .par_iter()
        .map(|(p, q)| gap_test(ex, p, q, n_max, cfg))
        .collect()
}

/// All unordered pairs of distinct vertices in `V_n`, by name.
pub fn pairs_in_level(ex: &dyn Exhaustion, n: usize) -> Result<Vec<(String, String)>> {
    let shell = ex.shell(n)?;
    let names: Vec<&str> = shell.inner.iter().map(|v| v.name.as_str()).collect();
    let mut out = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            out.push((a.to_string(), b.to_string()));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransientParts {
    pub a: Vec<VertexId>,
    pub b: Vec<VertexId>,
    pub d: DirectedEdge,
}

/// Edges with current above a relative threshold, oriented along the current.
fn positive_edges(net: &Network, current: &EdgeFunction) -> Result<Vec<(DirectedEdge, f64)>> {
    let peak = current.max_abs();
    if !(peak > 0.0) {
        return Err(Error::ConstantPotential);
    }
    let threshold = 1e-9 * peak;
    Ok(net
        .edge_ids()
        .filter_map(|id| {
            let i = current.0[id.0];
            let fwd = net.forward(id);
            if i > threshold {
                Some((fwd, i))
            } else if -i > threshold {
                Some((fwd.reversed(), -i))
            } else {
                None
            }
        })
        .collect())
}

fn reach(start: VertexId, adjacency: &[Vec<VertexId>]) -> Vec<VertexId> {
    let mut seen = vec![false; adjacency.len()];
    seen[start.0] = true;
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v.0] {
            if !seen[w.0] {
                seen[w.0] = true;
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    order.sort();
    order
}

/// Splits a truncation along the current of `h`: for an edge `d` with
/// positive current, `A` is everything with a positive-current path into the
/// tail of `d` and `B` everything reachable from its head.
///
/// Among the positive edges we take the one whose two sides are most
/// balanced, breaking ties by larger current.
pub fn extract_transient_parts(net: &Network, h: &Potential) -> Result<TransientParts> {
    extract_along_current(net, &induced_edge_function(net, h)?)
}

/// As [`extract_transient_parts`], given the current `h_E` directly.
pub fn extract_along_current(net: &Network, current: &EdgeFunction) -> Result<TransientParts> {
    if current.0.len() != net.edge_count() {
        return Err(Error::InvalidSpec("edge function has the wrong length".into()));
    }
    let positive = positive_edges(net, current)?;
    let mut forward = vec![Vec::new(); net.vertex_count()];
    let mut backward = vec![Vec::new(); net.vertex_count()];
    for (d, _) in &positive {
        forward[d.tail.0].push(d.head);
        backward[d.head.0].push(d.tail);
    }
    let mut candidates = positive.clone();
    candidates.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.edge.cmp(&y.0.edge)));
    if net.edge_count() > 5000 {
        candidates.truncate(256);
    }
    let mut best: Option<(usize, f64, TransientParts)> = None;
    for (d, current) in candidates {
        let a = reach(d.tail, &backward);
        let b = reach(d.head, &forward);
        let a_set: HashSet<VertexId> = a.iter().copied().collect();
        if let Some(v) = b.iter().find(|v| a_set.contains(v)) {
            return Err(Error::CycleLawViolated(net.name(*v).to_string()));
        }
        let balance = a.len().min(b.len());
        let better = match &best {
            None => true,
            Some((bal, cur, _)) => balance > *bal || (balance == *bal && current > *cur),
        };
        if better {
            best = Some((balance, current, TransientParts { a, b, d }));
        }
    }
    best.map(|(_, _, parts)| parts).ok_or(Error::ConstantPotential)
}

/// Clamps `h` into `[h(b), h(a)]`.
pub fn clip_potential(h: &Potential, a: VertexId, b: VertexId) -> Result<Potential> {
    for v in [a, b] {
        if v.0 >= h.len() {
            return Err(Error::UnknownVertex(v.to_string()));
        }
    }
    let (upper, lower) = (h.get(a), h.get(b));
    if upper < lower {
        return Err(Error::ClipOrder { upper, lower });
    }
    Ok(Potential(h.0.iter().map(|x| x.clamp(lower, upper)).collect()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateVerdict {
    NotInOhdCertified,
    /// One of the parts was not shown transient.
    FailedTransience,
    /// The contracted free resistance tends to zero.
    FailedRho,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterizationCertificate {
    pub a: String,
    pub b: String,
    pub a_anchor: String,
    pub b_anchor: String,
    pub transience_a: TransienceVerdict,
    pub transience_b: TransienceVerdict,
    /// Free resistance between the two contracted vertices of `G[V_n]/A/B`.
    pub contracted: LimitEstimate,
    pub rho_exists: bool,
    pub verdict: CertificateVerdict,
    /// Gap test between the anchors, when requested.
    pub cross_check: Option<OhdEvidence>,
}

/// First vertex (in shell order) of the smallest level meeting `sel`.
fn anchor_of(ex: &dyn Exhaustion, sel: &VertexSelector, n_max: usize) -> Result<(usize, String)> {
    for n in 1..=n_max {
        let shell = ex.shell(n)?;
        if let Some(v) = shell.inner.iter().find(|v| sel.matches(&v.name)) {
            return Ok((n, v.name.clone()));
        }
    }
    Err(Error::EmptySet)
}

fn disconnected_piece(err: Error) -> Error {
    match err {
        Error::Generator { reason, .. } if reason.contains("disconnected") => Error::Disconnected,
        other => other,
    }
}

/// Free resistance between the contractions of `A ∩ V_n` and `B ∩ V_n`.
pub fn contracted_resistance(
    ex: &dyn Exhaustion,
    a: &VertexSelector,
    b: &VertexSelector,
    n: usize,
    cfg: &LimitConfig,
) -> Result<f64> {
    let t = truncate_free(ex, n)?;
    let pick = |sel: &VertexSelector| -> Vec<VertexId> {
        t.network.vertices().filter(|&v| sel.matches(t.network.name(v))).collect()
    };
    let (av, bv) = (pick(a), pick(b));
    let c = contract(&t.network, &av, &bv)?;
    effective_resistance(&c.network, c.a, c.b, &cfg.solver)
}

/// Checks the two transient parts `A`, `B` and the separating potential of
/// finite energy on `G/A/B`.
///
/// `recurrence` carries known reasons why `A` or `B` is recurrent; they turn a
/// non-transient verdict into certified recurrence.
pub fn characterization_check(
    ex: Arc<dyn Exhaustion>,
    a: &VertexSelector,
    b: &VertexSelector,
    n_max: usize,
    cfg: &LimitConfig,
    recurrence: [Option<&str>; 2],
    cross_check: bool,
) -> Result<CharacterizationCertificate> {
    let top = ex.shell(n_max)?;
    if let Some(v) = top.inner.iter().find(|v| a.matches(&v.name) && b.matches(&v.name)) {
        return Err(Error::Overlap(v.name.clone()));
    }
    let (na, a_anchor) = anchor_of(&*ex, a, n_max)?;
    let (nb, b_anchor) = anchor_of(&*ex, b, n_max)?;
    let part = |sel: &VertexSelector, anchor: &str, hint: Option<&str>| -> Result<TransienceVerdict> {
        let restricted = Restricted {
            base: ex.clone(),
            keep: sel.clone(),
        };
        resistance_to_infinity(&restricted, anchor, n_max, cfg, hint).map_err(disconnected_piece)
    };
    let transience_a = part(a, &a_anchor, recurrence[0])?;
    let transience_b = part(b, &b_anchor, recurrence[1])?;

    let start = na.max(nb);
    let levels: Vec<usize> = (start..=n_max).collect();
    let values: Vec<(usize, f64)> = levels
        .par_iter()
        .map(|&n| contracted_resistance(&*ex, a, b, n, cfg).map(|r| (n, r)))
        .collect::<Result<_>>()?;
    let contracted = LimitEstimate::from_sequence(values, Direction::NonIncreasing, cfg.tol, cfg.cap)?;
    let flat = contracted
        .recent_relative_change(3)
        .is_some_and(|c| c < RHO_FLATNESS);
    let rho_exists = flat && contracted.extrapolated > RHO_THRESHOLD;

    let transient = |t: &TransienceVerdict| t.verdict == Transience::Transient;
    let recurrent = |t: &TransienceVerdict| {
        matches!(
            t.verdict,
            Transience::RecurrentUpToCap | Transience::RecurrentCertified
        )
    };
    let verdict = if recurrent(&transience_a) || recurrent(&transience_b) {
        CertificateVerdict::FailedTransience
    } else if !(transient(&transience_a) && transient(&transience_b)) {
        CertificateVerdict::Undecided
    } else if rho_exists {
        CertificateVerdict::NotInOhdCertified
    } else if contracted.last().is_some_and(|r| r < RHO_THRESHOLD) {
        // R_F^{(n)} bounds its limit from above
        CertificateVerdict::FailedRho
    } else {
        CertificateVerdict::Undecided
    };
    let cross_check = if cross_check {
        Some(gap_test(&*ex, &a_anchor, &b_anchor, n_max, cfg)?.verdict)
    } else {
        None
    };
    Ok(CharacterizationCertificate {
        a: a.to_string(),
        b: b.to_string(),
        a_anchor,
        b_anchor,
        transience_a,
        transience_b,
        contracted,
        rho_exists,
        verdict,
        cross_check,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict", content = "reason")]
pub enum CutVerdict {
    NotInOhd,
    Inapplicable(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct CutReport {
    pub cut: String,
    pub conductance_sum: Option<f64>,
    pub component1: Option<TransienceVerdict>,
    pub component2: Option<TransienceVerdict>,
    /// Energy of the potential that is 1 on the component of the first
    /// anchor in `G - F` and 0 elsewhere, evaluated at `n_max`.
    pub rho_energy: Option<f64>,
    pub verdict: CutVerdict,
}

/// A finite-conductance cut `F` with transient components on both sides.
pub fn cut_criterion(
    ex: Arc<dyn Exhaustion>,
    f: &EdgeSelection,
    comp1: &str,
    comp2: &str,
    n_max: usize,
    cfg: &LimitConfig,
) -> Result<CutReport> {
    let side = ComponentOf {
        base: ex.clone(),
        anchor: comp1.to_string(),
        removed: f.clone(),
    };
    let shell = side.shell(n_max)?;
    if shell.inner.is_empty() {
        return Err(Error::TerminalOutside {
            name: comp1.to_string(),
            n: n_max,
        });
    }
    if shell.contains_name(comp2) {
        return Err(Error::NotSeparated);
    }
    let mut report = CutReport {
        cut: f.name.clone(),
        conductance_sum: None,
        component1: None,
        component2: None,
        rho_energy: None,
        verdict: CutVerdict::Inapplicable(String::new()),
    };
    let sum = match f.resolve_conductance(&*ex, n_max)? {
        ConductanceSum::Finite(s) => s,
        ConductanceSum::Divergent => {
            report.verdict = CutVerdict::Inapplicable("conductance sum over F diverges".into());
            return Ok(report);
        }
        ConductanceSum::Unknown => {
            report.verdict = CutVerdict::Inapplicable("conductance sum over F is not known to be finite".into());
            return Ok(report);
        }
    };
    report.conductance_sum = Some(sum);
    let inside: HashSet<u64> = shell.inner.iter().map(|v| v.key).collect();
    let full = ex.shell(n_max)?;
    report.rho_energy = Some(
        full.edges
            .iter()
            .filter(|e| f.contains(e.key) && inside.contains(&e.ends.0) != inside.contains(&e.ends.1))
            .map(|e| 1.0 / e.resistance)
            .sum(),
    );
    let transience = |anchor: &str| {
        let component = ComponentOf {
            base: ex.clone(),
            anchor: anchor.to_string(),
            removed: f.clone(),
        };
        resistance_to_infinity(&component, anchor, n_max, cfg, None)
    };
    let (t1, t2) = (transience(comp1)?, transience(comp2)?);
    let both = t1.verdict == Transience::Transient && t2.verdict == Transience::Transient;
    report.verdict = if both {
        CutVerdict::NotInOhd
    } else {
        CutVerdict::Inapplicable("a component of G - F was not shown transient".into())
    };
    report.component1 = Some(t1);
    report.component2 = Some(t2);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairComparison {
    pub p: String,
    pub q: String,
    pub original: OhdEvidence,
    pub modified: OhdEvidence,
    pub original_gap: f64,
    pub modified_gap: f64,
    /// False only when both verdicts are decided and differ.
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    pub modification: String,
    pub pairs: Vec<PairComparison>,
    pub consistent: bool,
}

fn compare(
    label: String,
    original: &dyn Exhaustion,
    modified: &dyn Exhaustion,
    pairs: &[(String, String)],
    n_max: usize,
    cfg: &LimitConfig,
) -> Result<TransferReport> {
    let rows: Vec<PairComparison> = pairs
        .par_iter()
        .map(|(p, q)| {
            let (x, y) = rayon::join(
                || gap_test(original, p, q, n_max, cfg),
                || gap_test(modified, p, q, n_max, cfg),
            );
            let (x, y) = (x?, y?);
            let agree = !(x.verdict.is_decided() && y.verdict.is_decided() && x.verdict != y.verdict);
            Ok(PairComparison {
                p: p.clone(),
                q: q.clone(),
                original: x.verdict,
                modified: y.verdict,
                original_gap: x.gap.extrapolated,
                modified_gap: y.gap.extrapolated,
                agree,
            })
        })
        .collect::<Result<_>>()?;
    let consistent = rows.iter().all(|r| r.agree);
    if !consistent {
        log::warn!("{label}: gap verdicts disagree; this indicates numerical inconsistency");
    }
    Ok(TransferReport {
        modification: label,
        pairs: rows,
        consistent,
    })
}

/// Compares `G` and `G - S` for an edge set with finite conductance sum.
pub fn deletion_transfer_check(
    ex: Arc<dyn Exhaustion>,
    s: &EdgeSelection,
    pairs: &[(String, String)],
    n_max: usize,
    cfg: &LimitConfig,
) -> Result<TransferReport> {
    match s.resolve_conductance(&*ex, n_max)? {
        ConductanceSum::Finite(_) => {}
        ConductanceSum::Divergent => return Err(Error::DivergentConductance),
        ConductanceSum::Unknown => return Err(Error::UnknownConductance),
    }
    let reduced = WithoutEdges {
        base: ex.clone(),
        removed: s.clone(),
    };
    truncate_free(&reduced, n_max).map_err(disconnected_piece)?;
    compare(format!("deleting {}", s.name), &*ex, &reduced, pairs, n_max, cfg)
}

/// Compares `G` with a copy whose resistances differ on finitely many edges.
pub fn finite_modification_check(
    ex: Arc<dyn Exhaustion>,
    patch: BTreeMap<u64, f64>,
    pairs: &[(String, String)],
    n_max: usize,
    cfg: &LimitConfig,
) -> Result<TransferReport> {
    let count = patch.len();
    let patched = Patched::new(ex.clone(), patch)?;
    compare(format!("patching {count} resistances"), &*ex, &patched, pairs, n_max, cfg)
}
