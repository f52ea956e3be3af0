//! Countable digraphs with lazily enumerated neighbourhoods.
//!
//! Edges follow the network convention `v →• w` iff `v` is an input of `w`,
//! so `in_neighbors(w)` is the input neighbourhood of `w` and balls
//! `B(U, r)` grow against the arrows.

mod analysis;
mod ball;
mod families;
mod spec;
mod subisometry;
mod vertex;

use std::sync::Arc;

use thiserror::Error;

pub use crate::counterexample::{counterexample_graph, CexGraph};
pub(crate) use analysis::ols_slope;
pub use analysis::{
    biconnected_probe, dim_estimate, is_estuary, speed_estimate, superlinear_check, undirected_distance, upstream,
    BiconnectedProbe, DimensionEstimate, Distance, Reach, SpeedEstimate, SuperlinearReport,
};
pub use ball::{in_ball, Ball, BallGrower};
pub use families::{
    cayley_with_generators, cayley_zd, cayley_zdne, explicit_graph, odometer_graph, shortcut_graph, unit_shift_graph,
    CayleyGraph, ExplicitGraph, OdometerGraph, ShortcutGraph,
};
pub use spec::{FamilySpec, GraphSpec};
pub use subisometry::{Subisometry, SubisometryReport};
pub use vertex::VertexId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} is outside the universe of {graph}")]
    UniverseExhausted { graph: String, vertex: VertexId },
    #[error("{0} does not supply out-neighbours; undirected adjacency is unavailable")]
    MissingOutNeighbors(String),
    #[error("coordinate overflow while expanding {vertex} in {graph}")]
    CoordinateOverflow { graph: String, vertex: VertexId },
    #[error("ball centre set must be nonempty")]
    EmptyCenter,
    #[error("invalid radius window: {0}")]
    InvalidWindow(String),
}

/// A digraph on a countable vertex universe, explored one vertex at a time.
///
/// Implementations are pure functions of the vertex, so analyses can share a
/// graph across threads.
pub trait Digraph: Send + Sync {
    /// Finite list of `u` with `u →• v`, sorted and without duplicates.
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError>;

    /// Finite list of `w` with `v →• w`. Families whose out-neighbourhoods are
    /// infinite (the odometer network) do not supply them.
    fn out_neighbors(&self, _v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        Err(GraphError::MissingOutNeighbors(self.describe()))
    }

    fn has_out_neighbors(&self) -> bool {
        false
    }

    fn contains(&self, v: &VertexId) -> bool;

    fn describe(&self) -> String;
}

pub type SharedGraph = Arc<dyn Digraph>;

impl<G: Digraph + ?Sized> Digraph for Arc<G> {
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        (**self).in_neighbors(v)
    }
    fn out_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        (**self).out_neighbors(v)
    }
    fn has_out_neighbors(&self) -> bool {
        (**self).has_out_neighbors()
    }
    fn contains(&self, v: &VertexId) -> bool {
        (**self).contains(v)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

/// Checks that supplied out-neighbours mirror the in-neighbours on `probe`.
/// Returns the offending `(v, w)` pairs.
pub fn out_in_consistency(g: &dyn Digraph, probe: &[VertexId]) -> Result<Vec<(VertexId, VertexId)>, GraphError> {
    let mut bad = Vec::new();
    for v in probe {
        for w in g.out_neighbors(v)? {
            if !g.in_neighbors(&w)?.contains(v) {
                bad.push((v.clone(), w));
            }
        }
        for u in g.in_neighbors(v)? {
            if !g.out_neighbors(&u)?.contains(v) {
                bad.push((u, v.clone()));
            }
        }
    }
    Ok(bad)
}
