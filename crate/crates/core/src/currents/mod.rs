//! Free and wired currents on finite truncations and their limits along an
//! exhaustion.

mod inflate;
mod limit;
mod projection;

pub use inflate::{raise_free_energy, Inflation};
pub use limit::{Direction, LimitEstimate, LimitVerdict, FLAT_STEPS, MONOTONE_SLACK};
pub use projection::{min_energy_projection, Projection, ProjectionOptions};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exhaustion::{first_containing, truncate_free, truncate_wired, Exhaustion, WiredTruncation};
use crate::network::{EdgeFunction, Network, Potential, VertexId};
use crate::solve::{dirichlet_solve_with, SolverOptions};

/// Default cap above which a resistance sequence is declared divergent.
pub const DEFAULT_CAP: f64 = 1e6;

/// A current between two terminals `p` (source) and `q` (sink).
#[derive(Clone, Debug, Serialize)]
pub struct CurrentSolution {
    pub p: VertexId,
    pub q: VertexId,
    pub potential: Potential,
    pub flow: EdgeFunction,
    /// Accumulation at `q`.
    pub intensity: f64,
    /// `h(p) - h(q)`.
    pub voltage: f64,
    /// `U / I`; well defined even when `U = 0` (taken from the unit solve).
    pub resistance: f64,
    pub energy: f64,
    pub residual: f64,
}

struct UnitSolve {
    potential: Vec<f64>,
    flow: Vec<f64>,
    intensity: f64,
    residual: f64,
}

fn unit_solve(net: &Network, p: VertexId, q: VertexId, opts: &SolverOptions) -> Result<UnitSolve> {
    if p == q {
        return Err(Error::SameTerminal);
    }
    for v in [p, q] {
        if !net.contains(v) {
            return Err(Error::UnknownVertex(v.to_string()));
        }
    }
    let sol = dirichlet_solve_with(net, &[(p, 1.0), (q, 0.0)], opts)?;
    let flow: Vec<f64> = net
        .edges()
        .iter()
        .zip(&sol.drops)
        .map(|(e, d)| d / e.resistance)
        .collect();
    let intensity: f64 = net
        .incident(q)
        .iter()
        .map(|&e| {
            let edge = net.edge(e);
            if edge.head == q {
                flow[e.0]
            } else {
                -flow[e.0]
            }
        })
        .sum();
    if !(intensity > 0.0) {
        return Err(Error::Internal(format!("unit solve produced intensity {intensity}")));
    }
    Ok(UnitSolve {
        potential: sol.potential.0,
        flow,
        intensity,
        residual: sol.residual,
    })
}

fn scaled(net: &Network, p: VertexId, q: VertexId, unit: UnitSolve, factor: f64) -> CurrentSolution {
    let flow = EdgeFunction(unit.flow.iter().map(|f| f * factor).collect());
    let energy = net
        .edges()
        .iter()
        .zip(&flow.0)
        .map(|(e, f)| e.resistance * f * f)
        .sum();
    CurrentSolution {
        p,
        q,
        potential: Potential(unit.potential.iter().map(|h| h * factor).collect()),
        flow,
        intensity: unit.intensity * factor,
        voltage: factor,
        resistance: 1.0 / unit.intensity,
        energy,
        residual: unit.residual * factor.abs(),
    }
}

/// The potential-induced current with potential difference `u` between `p`
/// and `q` (`h(q) = 0`).
pub fn free_current(net: &Network, p: VertexId, q: VertexId, u: f64) -> Result<CurrentSolution> {
    free_current_with(net, p, q, u, &SolverOptions::default())
}

pub fn free_current_with(
    net: &Network,
    p: VertexId,
    q: VertexId,
    u: f64,
    opts: &SolverOptions,
) -> Result<CurrentSolution> {
    let unit = unit_solve(net, p, q, opts)?;
    Ok(scaled(net, p, q, unit, u))
}

/// The same current, scaled to intensity `i` instead of voltage.
pub fn current_with_intensity(
    net: &Network,
    p: VertexId,
    q: VertexId,
    i: f64,
    opts: &SolverOptions,
) -> Result<CurrentSolution> {
    let unit = unit_solve(net, p, q, opts)?;
    let factor = i / unit.intensity;
    Ok(scaled(net, p, q, unit, factor))
}

pub fn effective_resistance(net: &Network, p: VertexId, q: VertexId, opts: &SolverOptions) -> Result<f64> {
    Ok(1.0 / unit_solve(net, p, q, opts)?.intensity)
}

fn locate(net: &Network, name: &str, n: usize) -> Result<VertexId> {
    net.vertex(name).ok_or_else(|| Error::TerminalOutside {
        name: name.to_string(),
        n,
    })
}

/// The `p`-`q` current of intensity `i` on the wired truncation at level `n`.
pub fn wired_current(
    ex: &dyn Exhaustion,
    n: usize,
    p: &str,
    q: &str,
    i: f64,
    opts: &SolverOptions,
) -> Result<(WiredTruncation, CurrentSolution)> {
    let w = truncate_wired(ex, n)?;
    let pv = locate(&w.network, p, n)?;
    let qv = locate(&w.network, q, n)?;
    if w.infinity.is_some_and(|inf| inf == pv || inf == qv) {
        return Err(Error::TerminalOutside {
            name: if w.infinity == Some(pv) { p } else { q }.to_string(),
            n,
        });
    }
    let sol = current_with_intensity(&w.network, pv, qv, i, opts)?;
    Ok((w, sol))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Free,
    Wired,
}

impl Boundary {
    pub fn direction(self) -> Direction {
        match self {
            Boundary::Free => Direction::NonIncreasing,
            Boundary::Wired => Direction::NonDecreasing,
        }
    }
}

/// Effective resistance between `p` and `q` in the free or wired truncation.
pub fn truncation_resistance(
    ex: &dyn Exhaustion,
    boundary: Boundary,
    n: usize,
    p: &str,
    q: &str,
    opts: &SolverOptions,
) -> Result<f64> {
    let net = match boundary {
        Boundary::Free => truncate_free(ex, n)?.network,
        Boundary::Wired => truncate_wired(ex, n)?.network,
    };
    let pv = locate(&net, p, n)?;
    let qv = locate(&net, q, n)?;
    effective_resistance(&net, pv, qv, opts)
}

#[derive(Clone, Debug)]
pub struct LimitConfig {
    pub tol: f64,
    pub cap: f64,
    pub solver: SolverOptions,
}

impl Default for LimitConfig {
    fn default() -> Self {
        LimitConfig {
            tol: 1e-4,
            cap: DEFAULT_CAP,
            solver: SolverOptions::default(),
        }
    }
}

/// Levels `n0..=n_max` where `n0` is the first level containing both terminals.
pub fn levels_from_first(ex: &dyn Exhaustion, names: &[&str], n_max: usize) -> Result<Vec<usize>> {
    let n0 = first_containing(ex, names, n_max)?.ok_or_else(|| Error::TerminalOutside {
        name: names.join(","),
        n: n_max,
    })?;
    Ok((n0..=n_max).collect())
}

/// Effective resistances at the given levels, computed in parallel and
/// returned in the order of `levels`.
pub fn resistance_sequence(
    ex: &dyn Exhaustion,
    boundary: Boundary,
    p: &str,
    q: &str,
    levels: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<(usize, f64)>> {
    levels
        .par_iter()
        .map(|&n| truncation_resistance(ex, boundary, n, p, q, opts).map(|r| (n, r)))
        .collect()
}

/// `R_F^{(n)}` (non-increasing) from the first level containing both terminals to `n_max`.
pub fn free_limit(ex: &dyn Exhaustion, p: &str, q: &str, n_max: usize, cfg: &LimitConfig) -> Result<LimitEstimate> {
    let levels = levels_from_first(ex, &[p, q], n_max)?;
    limit_over(ex, Boundary::Free, p, q, &levels, cfg)
}

/// `R_W^{(n)}` (non-decreasing) from the first level containing both terminals to `n_max`.
pub fn wired_limit(ex: &dyn Exhaustion, p: &str, q: &str, n_max: usize, cfg: &LimitConfig) -> Result<LimitEstimate> {
    let levels = levels_from_first(ex, &[p, q], n_max)?;
    limit_over(ex, Boundary::Wired, p, q, &levels, cfg)
}

pub fn limit_over(
    ex: &dyn Exhaustion,
    boundary: Boundary,
    p: &str,
    q: &str,
    levels: &[usize],
    cfg: &LimitConfig,
) -> Result<LimitEstimate> {
    let values = resistance_sequence(ex, boundary, p, q, levels, &cfg.solver)?;
    LimitEstimate::from_sequence(values, boundary.direction(), cfg.tol, cfg.cap)
}
