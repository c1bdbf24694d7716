//! Raising the free-current energy by inflating finitely many resistances.
//!
//! A potential `ρ` with `ρ(p) ≠ ρ(q)` bounds the free resistance from below:
//! `R_F ≥ U² / E(ρ)` with `U = ρ(p) - ρ(q)`. Choose `ε = U² I² / target`,
//! let `D` be the edges carrying most of the energy of `ρ` so that the rest
//! holds less than `ε/2`, and multiply the resistances on `D` by a factor
//! `λ` large enough that `D` holds less than `ε/2` as well. Then `E(ρ) < ε`
//! under the new resistances and the free current of intensity `I` has
//! energy `I² R_F > target`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{EdgeId, Network, Potential, VertexId};
use crate::solve::SolverOptions;

use super::current_with_intensity;

#[derive(Clone, Debug, Serialize)]
pub struct Inflation {
    /// Edges whose resistance was raised, in decreasing order of their share of `E(ρ)`.
    pub edges: Vec<EdgeId>,
    /// New resistance for every edge in `edges`.
    pub resistances: Vec<f64>,
    pub factor: f64,
    /// Free-current energy at intensity `I` before and after inflation.
    pub energy_before: f64,
    pub energy_after: f64,
    #[serde(skip)]
    pub network: Network,
}

pub fn raise_free_energy(
    net: &Network,
    rho: &Potential,
    p: VertexId,
    q: VertexId,
    intensity: f64,
    target: f64,
    opts: &SolverOptions,
) -> Result<Inflation> {
    if rho.len() != net.vertex_count() {
        return Err(Error::InvalidSpec("potential has the wrong length".into()));
    }
    let u = rho.get(p) - rho.get(q);
    if u == 0.0 {
        return Err(Error::LevelTerminals);
    }
    let before = current_with_intensity(net, p, q, intensity, opts)?.energy;
    if before >= target {
        return Ok(Inflation {
            edges: Vec::new(),
            resistances: Vec::new(),
            factor: 1.0,
            energy_before: before,
            energy_after: before,
            network: net.clone(),
        });
    }
    let eps = u * u * intensity * intensity / target;
    let shares: Vec<f64> = net
        .edges()
        .iter()
        .map(|e| {
            let d = rho.get(e.tail) - rho.get(e.head);
            d * d / e.resistance
        })
        .collect();
    let mut order: Vec<usize> = (0..shares.len()).filter(|&i| shares[i] > 0.0).collect();
    order.sort_by(|&i, &j| shares[j].total_cmp(&shares[i]).then(i.cmp(&j)));
    let mut off: f64 = order.iter().map(|&i| shares[i]).sum();
    let mut chosen = Vec::new();
    let mut on = 0.0;
    for &i in &order {
        if off < eps / 2.0 {
            break;
        }
        chosen.push(i);
        on += shares[i];
        off -= shares[i];
    }
    // twice the minimal factor 2E_D/ε, so the on-D energy is ε/4
    let factor = (4.0 * on / eps).max(1.0);
    let mut inflated = vec![false; net.edge_count()];
    for &i in &chosen {
        inflated[i] = true;
    }
    let network = net.with_resistances(|id, e| {
        if inflated[id.0] {
            e.resistance * factor
        } else {
            e.resistance
        }
    })?;
    let after = current_with_intensity(&network, p, q, intensity, opts)?.energy;
    if after < target * (1.0 - 1e-12) {
        return Err(Error::Internal(format!(
            "inflated energy {after} stays below target {target}"
        )));
    }
    Ok(Inflation {
        resistances: chosen.iter().map(|&i| network.edge(EdgeId(i)).resistance).collect(),
        edges: chosen.into_iter().map(EdgeId).collect(),
        factor,
        energy_before: before,
        energy_after: after,
        network,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_path_needs_both_edges() {
        let net = Network::from_edges(&[("p", "m", 1.0), ("m", "q", 1.0)]).unwrap();
        let rho = Potential(vec![1.0, 0.5, 0.0]);
        let out = raise_free_energy(&net, &rho, VertexId(0), VertexId(2), 1.0, 100.0, &SolverOptions::default())
            .unwrap();
        assert_eq!(out.edges.len(), 2);
        assert!(out.factor >= 200.0);
        assert!(out.energy_after >= 100.0);
    }

    #[test]
    fn level_edges_are_never_inflated() {
        let net = Network::from_edges(&[("p", "m", 1.0), ("m", "w", 1.0), ("w", "q", 1.0)]).unwrap();
        let rho = Potential(vec![1.0, 0.5, 0.5, 0.0]);
        let out = raise_free_energy(&net, &rho, VertexId(0), VertexId(3), 1.0, 50.0, &SolverOptions::default())
            .unwrap();
        assert!(!out.edges.contains(&EdgeId(1)));
        assert!(out.energy_after >= 50.0);
    }

    #[test]
    fn low_target_needs_nothing() {
        let net = Network::from_edges(&[("p", "q", 1.0)]).unwrap();
        let rho = Potential(vec![1.0, 0.0]);
        let out = raise_free_energy(&net, &rho, VertexId(0), VertexId(1), 1.0, 0.5, &SolverOptions::default())
            .unwrap();
        assert!(out.edges.is_empty());
        let flat = Potential(vec![1.0, 1.0]);
        assert_eq!(
            raise_free_energy(&net, &flat, VertexId(0), VertexId(1), 1.0, 5.0, &SolverOptions::default())
                .unwrap_err(),
            Error::LevelTerminals
        );
    }
}
