use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    cayley_zd, cayley_zdne, explicit_graph, odometer_graph, shortcut_graph, unit_shift_graph, SharedGraph, VertexId,
};
use crate::counterexample::counterexample_graph;

/// JSON graph descriptor: a named family or an explicit edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Family(FamilySpec),
    Explicit {
        #[serde(default)]
        vertices: Vec<VertexId>,
        /// `[v, w]` means `v →• w`.
        edges: Vec<(VertexId, VertexId)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    CayleyZd {
        #[serde(rename = "D")]
        d: usize,
    },
    CayleyZdne {
        #[serde(rename = "D")]
        d: usize,
        #[serde(rename = "E")]
        e: usize,
    },
    UnitShift {
        #[serde(default)]
        two_sided: bool,
    },
    Odometer,
    Shortcut,
    Counterexample,
}

impl GraphSpec {
    pub fn build(&self) -> SharedGraph {
        match self {
            GraphSpec::Family(f) => match *f {
                FamilySpec::CayleyZd { d } => Arc::new(cayley_zd(d)),
                FamilySpec::CayleyZdne { d, e } => Arc::new(cayley_zdne(d, e)),
                FamilySpec::UnitShift { two_sided } => Arc::new(unit_shift_graph(two_sided)),
                FamilySpec::Odometer => Arc::new(odometer_graph()),
                FamilySpec::Shortcut => Arc::new(shortcut_graph()),
                FamilySpec::Counterexample => Arc::new(counterexample_graph()),
            },
            GraphSpec::Explicit { vertices, edges } => {
                Arc::new(explicit_graph(vertices.iter().cloned(), edges.iter().cloned()))
            }
        }
    }
}
