use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{Digraph, GraphError, VertexId};

type VertexMap = dyn Fn(&VertexId) -> VertexId + Send + Sync;

/// A labelled vertex map, expected to be injective and edge-preserving.
/// [`Subisometry::check`] verifies both on a finite probe.
#[derive(Clone)]
pub struct Subisometry {
    label: String,
    map: Arc<VertexMap>,
}

impl fmt::Debug for Subisometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subisometry").field("label", &self.label).finish()
    }
}

/// Violations found on a probe set.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SubisometryReport {
    /// Pairs of distinct probe vertices with the same image.
    pub collisions: Vec<(VertexId, VertexId)>,
    /// `(u, v)` with `u →• v` but not `τ(u) →• τ(v)`, or the converse.
    pub edge_violations: Vec<(VertexId, VertexId)>,
    /// Probe vertices whose image lies outside the graph.
    pub escaped: Vec<VertexId>,
}

impl SubisometryReport {
    pub fn passed(&self) -> bool {
        self.collisions.is_empty() && self.edge_violations.is_empty() && self.escaped.is_empty()
    }
}

impl Subisometry {
    pub fn new(label: impl Into<String>, map: impl Fn(&VertexId) -> VertexId + Send + Sync + 'static) -> Self {
        Subisometry {
            label: label.into(),
            map: Arc::new(map),
        }
    }

    pub fn identity() -> Self {
        Subisometry::new("identity", |v| v.clone())
    }

    /// Coordinate translation `v ↦ v + delta`. Panics on coordinate overflow.
    pub fn translation(label: impl Into<String>, delta: &[i64]) -> Self {
        let delta = delta.to_vec();
        Subisometry::new(label, move |v| {
            v.offset(&delta).expect("translation overflow or dimension mismatch")
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, v: &VertexId) -> VertexId {
        (self.map)(v)
    }

    /// `τⁿ(v)`.
    pub fn iterate(&self, v: &VertexId, n: usize) -> VertexId {
        let mut x = v.clone();
        for _ in 0..n {
            x = self.apply(&x);
        }
        x
    }

    /// Injectivity and edge preservation on `probe`. Edges are checked in
    /// both directions for every `u →• v` with `v` in the probe and for every
    /// input of `τ(v)` that is the image of a probe vertex.
    pub fn check(&self, g: &dyn Digraph, probe: &[VertexId]) -> Result<SubisometryReport, GraphError> {
        let mut report = SubisometryReport::default();
        let mut preimage: HashMap<VertexId, VertexId> = HashMap::new();
        let mut probe = probe.to_vec();
        probe.sort();
        probe.dedup();
        for v in &probe {
            let image = self.apply(v);
            if let Some(prev) = preimage.insert(image, v.clone()) {
                report.collisions.push((prev, v.clone()));
            }
        }
        for v in &probe {
            let tv = self.apply(v);
            if !g.contains(&tv) {
                report.escaped.push(v.clone());
                continue;
            }
            let image_inputs = g.in_neighbors(&tv)?;
            let inputs = g.in_neighbors(v)?;
            for u in &inputs {
                let tu = self.apply(u);
                if image_inputs.binary_search(&tu).is_err() {
                    report.edge_violations.push((u.clone(), v.clone()));
                }
            }
            for tu in &image_inputs {
                if let Some(u) = preimage.get(tu) {
                    if inputs.binary_search(u).is_err() {
                        report.edge_violations.push((u.clone(), v.clone()));
                    }
                }
            }
        }
        Ok(report)
    }
}
