//! Free and wired currents on exhaustions of locally finite electrical
//! networks, and the analyses built on them: transience, the harmonic
//! Dirichlet gap test, the two-sided characterisation by transient
//! subnetworks, and barricade criteria.

pub mod barricades;
pub mod currents;
pub mod error;
pub mod exhaustion;
pub mod families;
pub mod io;
pub mod kirchhoff;
pub mod network;
pub mod ohd;
pub mod solve;
pub mod transience;

pub use error::{Error, Result};
pub use network::{DirectedEdge, EdgeFunction, EdgeId, Network, NetworkBuilder, Potential, VertexId};
