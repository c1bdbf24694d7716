//! Transience through wired resistance to infinity, escape flows, and
//! Nash-Williams lower bounds.

use rayon::prelude::*;
use serde::Serialize;

use crate::currents::{
    current_with_intensity, levels_from_first, CurrentSolution, Direction, LimitConfig, LimitEstimate,
    LimitVerdict,
};
use crate::error::{Error, Result};
use crate::exhaustion::{truncate_wired, Exhaustion, WiredTruncation};
use crate::solve::SolverOptions;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transience {
    Transient,
    RecurrentUpToCap,
    /// Recurrent by a closed-form divergent Nash-Williams sum.
    RecurrentCertified,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct EscapeWitness {
    pub n: usize,
    pub intensity: f64,
    pub energy: f64,
    /// `extrapolated R · I²`.
    pub energy_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransienceVerdict {
    pub vertex: String,
    pub sequence: LimitEstimate,
    pub verdict: Transience,
    pub witness: Option<EscapeWitness>,
    pub certificate: Option<String>,
}

/// `R^{(n)}(v ↔ ∞_n)`; infinite when no edge leaves `V_n`.
pub fn resistance_at(ex: &dyn Exhaustion, v: &str, n: usize, opts: &SolverOptions) -> Result<f64> {
    match escape_flow(ex, v, n, opts) {
        Ok((_, sol)) => Ok(sol.resistance),
        Err(Error::Internal(msg)) if msg == NO_EXTERIOR => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

const NO_EXTERIOR: &str = "no edge leaves V_n";

/// Unit-intensity current from `v` to `∞_n` in the wired truncation.
pub fn escape_flow(
    ex: &dyn Exhaustion,
    v: &str,
    n: usize,
    opts: &SolverOptions,
) -> Result<(WiredTruncation, CurrentSolution)> {
    let w = truncate_wired(ex, n)?;
    let p = w.network.vertex(v).ok_or_else(|| Error::TerminalOutside {
        name: v.to_string(),
        n,
    })?;
    let inf = w.infinity.ok_or_else(|| Error::Internal(NO_EXTERIOR.into()))?;
    let sol = current_with_intensity(&w.network, p, inf, 1.0, opts)?;
    Ok((w, sol))
}

/// Resistance to infinity from the first level containing `v` up to `n_max`.
///
/// Transient when the sequence converges below the cap; recurrent up to the
/// cap when it exceeds it. A closed-form divergence reason upgrades a
/// non-transient verdict to certified recurrence.
pub fn resistance_to_infinity(
    ex: &dyn Exhaustion,
    v: &str,
    n_max: usize,
    cfg: &LimitConfig,
    nash_williams_divergence: Option<&str>,
) -> Result<TransienceVerdict> {
    let levels = levels_from_first(ex, &[v], n_max)?;
    resistance_to_infinity_over(ex, v, &levels, cfg, nash_williams_divergence)
}

pub fn resistance_to_infinity_over(
    ex: &dyn Exhaustion,
    v: &str,
    levels: &[usize],
    cfg: &LimitConfig,
    nash_williams_divergence: Option<&str>,
) -> Result<TransienceVerdict> {
    let values: Vec<(usize, f64)> = levels
        .par_iter()
        .map(|&n| resistance_at(ex, v, n, &cfg.solver).map(|r| (n, r)))
        .collect::<Result<_>>()?;
    let sequence = LimitEstimate::from_sequence(values, Direction::NonDecreasing, cfg.tol, cfg.cap)?;
    let mut verdict = match sequence.verdict {
        LimitVerdict::Converged => Transience::Transient,
        LimitVerdict::Diverged => Transience::RecurrentUpToCap,
        LimitVerdict::Undecided => Transience::Undecided,
    };
    let mut certificate = None;
    if verdict != Transience::Transient {
        if let Some(reason) = nash_williams_divergence {
            verdict = Transience::RecurrentCertified;
            certificate = Some(reason.to_string());
        }
    }
    let witness = if verdict == Transience::Transient {
        let n = sequence.last_n().expect("converged sequences are nonempty");
        let (_, sol) = escape_flow(ex, v, n, &cfg.solver)?;
        Some(EscapeWitness {
            n,
            intensity: sol.intensity,
            energy: sol.energy,
            energy_bound: sequence.extrapolated * sol.intensity * sol.intensity,
        })
    } else {
        None
    };
    Ok(TransienceVerdict {
        vertex: v.to_string(),
        sequence,
        verdict,
        witness,
        certificate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NashWilliams {
    pub levels: Vec<usize>,
    /// `RN(C_i) = Σ 1/r(e)` over edges leaving `C_i`.
    pub rn: Vec<f64>,
    /// `Σ_{j ≤ i} 1/RN(C_j)`.
    pub partial_sums: Vec<f64>,
}

impl NashWilliams {
    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

/// Nash-Williams sum over the cutsets `∂V_n` for `n` in `levels`.
///
/// The edge boundaries of consecutive levels must be disjoint, i.e. every
/// neighbour of `V_{levels[i]}` lies in `V_{levels[i+1]}`; `v` must lie in the
/// first level.
pub fn nash_williams_bound(ex: &dyn Exhaustion, v: &str, levels: &[usize]) -> Result<NashWilliams> {
    let shells: Vec<_> = levels.iter().map(|&n| ex.shell(n)).collect::<Result<_>>()?;
    if let Some(first) = shells.first() {
        if !first.contains_name(v) {
            return Err(Error::TerminalOutside {
                name: v.to_string(),
                n: levels[0],
            });
        }
    }
    for (i, pair) in shells.windows(2).enumerate() {
        let next: std::collections::HashSet<u64> = pair[1].inner.iter().map(|x| x.key).collect();
        if !pair[0].outer.iter().all(|x| next.contains(&x.key)) {
            return Err(Error::LayersNotNested(i + 1));
        }
    }
    let mut rn = Vec::with_capacity(shells.len());
    let mut partial_sums = Vec::with_capacity(shells.len());
    let mut sum = 0.0;
    for shell in &shells {
        let inner: std::collections::HashSet<u64> = shell.inner.iter().map(|x| x.key).collect();
        let c: f64 = shell
            .edges
            .iter()
            .filter(|e| inner.contains(&e.ends.0) != inner.contains(&e.ends.1))
            .map(|e| 1.0 / e.resistance)
            .sum();
        sum += 1.0 / c;
        rn.push(c);
        partial_sums.push(sum);
    }
    Ok(NashWilliams {
        levels: levels.to_vec(),
        rn,
        partial_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{BinaryTree, DoubleRay, SeriesRule};

    #[test]
    fn double_ray_resistance_is_half_the_level() {
        let ray = DoubleRay::symmetric(SeriesRule::Constant(1.0)).unwrap();
        for n in 1..8 {
            let r = resistance_at(&ray, "v0", n, &SolverOptions::default()).unwrap();
            assert!((r - n as f64 / 2.0).abs() < 1e-12);
        }
        let nw = nash_williams_bound(&ray, "v0", &[1, 2, 3, 4]).unwrap();
        assert_eq!(nw.partial_sums, vec![0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn tree_escape_flow_halves() {
        let tree = BinaryTree {
            levels: SeriesRule::Constant(1.0),
        };
        let (w, sol) = escape_flow(&tree, "root", 3, &SolverOptions::default()).unwrap();
        assert!((sol.energy - (0.5 + 0.25 + 0.125)).abs() < 1e-12);
        let root = w.network.require("root").unwrap();
        for &e in w.network.incident(root) {
            assert!((sol.flow.0[e.0].abs() - 0.5).abs() < 1e-12);
        }
        let est = resistance_to_infinity(&tree, "root", 18, &LimitConfig::default(), None).unwrap();
        assert_eq!(est.verdict, Transience::Transient);
        assert!((est.sequence.extrapolated - 1.0).abs() < 1e-6);
        let witness = est.witness.unwrap();
        assert!(witness.energy <= witness.energy_bound + 1e-12);
    }

    #[test]
    fn ray_recurrence_certified() {
        let ray = DoubleRay::symmetric(SeriesRule::Constant(1.0)).unwrap();
        let est = resistance_to_infinity(&ray, "v0", 30, &LimitConfig::default(), Some("Σ 1/2 = ∞")).unwrap();
        assert_eq!(est.verdict, Transience::RecurrentCertified);
        assert!(est.witness.is_none());
    }

    #[test]
    fn layers_must_be_separated() {
        let ray = DoubleRay::symmetric(SeriesRule::Constant(1.0)).unwrap();
        nash_williams_bound(&ray, "v0", &[1, 3]).unwrap();
        assert_eq!(
            nash_williams_bound(&ray, "v0", &[2, 2]).unwrap_err(),
            Error::LayersNotNested(1)
        );
    }
}
