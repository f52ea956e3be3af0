use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{Digraph, GraphError, VertexId};

/// Cayley digraph of `Z^D × N^E` for a finite generator set: `z + g →• z`
/// for every generator `g`, whenever `z + g` lies in the monoid.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    d: usize,
    e: usize,
    generators: Vec<Vec<i64>>,
}

impl CayleyGraph {
    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.d + self.e
    }

    pub fn origin(&self) -> VertexId {
        VertexId::new(&vec![0; self.rank()])
    }

    fn valid(&self, v: &VertexId) -> bool {
        v.dim() == self.rank() && v.coords()[self.d..].iter().all(|&c| c >= 0)
    }

    fn shifted(&self, v: &VertexId, sign: i64) -> Result<Vec<VertexId>, GraphError> {
        if !self.valid(v) {
            return Err(GraphError::UniverseExhausted {
                graph: self.describe(),
                vertex: v.clone(),
            });
        }
        let mut out = BTreeSet::new();
        for g in &self.generators {
            let delta: Vec<i64> = g.iter().map(|c| sign * c).collect();
            let w = v.offset(&delta).ok_or_else(|| GraphError::CoordinateOverflow {
                graph: self.describe(),
                vertex: v.clone(),
            })?;
            if self.valid(&w) {
                out.insert(w);
            }
        }
        Ok(out.into_iter().collect())
    }
}

impl Digraph for CayleyGraph {
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        self.shifted(v, 1)
    }

    fn out_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        self.shifted(v, -1)
    }

    fn has_out_neighbors(&self) -> bool {
        true
    }

    fn contains(&self, v: &VertexId) -> bool {
        self.valid(v)
    }

    fn describe(&self) -> String {
        format!(
            "cayley(Z^{} x N^{}, {} generators)",
            self.d,
            self.e,
            self.generators.len()
        )
    }
}

/// Standard Cayley digraph of `Z^D` with generators `±e_i`.
pub fn cayley_zd(d: usize) -> CayleyGraph {
    cayley_zdne(d, 0)
}

/// Cayley digraph of `Z^D × N^E`: generators `±e_i` on the group axes and
/// `+e_j` on the monoid axes.
pub fn cayley_zdne(d: usize, e: usize) -> CayleyGraph {
    let n = d + e;
    let mut generators = Vec::new();
    for i in 0..n {
        let mut g = vec![0; n];
        g[i] = 1;
        generators.push(g.clone());
        if i < d {
            g[i] = -1;
            generators.push(g);
        }
    }
    CayleyGraph { d, e, generators }
}

/// Cayley digraph with an arbitrary finite generator set (a CA neighbourhood).
pub fn cayley_with_generators(d: usize, e: usize, generators: Vec<Vec<i64>>) -> CayleyGraph {
    let mut generators = generators;
    generators.sort();
    generators.dedup();
    CayleyGraph { d, e, generators }
}

/// Network of the unit shift: `n + 1 →• n`, on `N` (one-sided) or `Z`.
pub fn unit_shift_graph(two_sided: bool) -> CayleyGraph {
    if two_sided {
        cayley_with_generators(1, 0, vec![vec![1]])
    } else {
        cayley_zdne(0, 1)
    }
}

/// Network of the odometer on `N`: `Φ_in(n) = [0..n]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OdometerGraph;

pub fn odometer_graph() -> OdometerGraph {
    OdometerGraph
}

impl Digraph for OdometerGraph {
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        match v.as_index() {
            Some(n) if n >= 0 => Ok((0..=n).map(VertexId::index).collect()),
            _ => Err(GraphError::UniverseExhausted {
                graph: self.describe(),
                vertex: v.clone(),
            }),
        }
    }

    fn contains(&self, v: &VertexId) -> bool {
        matches!(v.as_index(), Some(n) if n >= 0)
    }

    fn describe(&self) -> String {
        "odometer network".into()
    }
}

/// The graph on `Z × N` with vertical edges `(z,n) →• (z,n±1)` and
/// shortcuts `(z,n) →• (z + 2^n, n)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShortcutGraph;

pub fn shortcut_graph() -> ShortcutGraph {
    ShortcutGraph
}

impl ShortcutGraph {
    fn parts(&self, v: &VertexId) -> Result<(i64, i64, i64), GraphError> {
        match v.coords() {
            [z, n] if *n >= 0 => {
                let step =
                    1i64.checked_shl(*n as u32)
                        .filter(|_| *n < 62)
                        .ok_or_else(|| GraphError::CoordinateOverflow {
                            graph: self.describe(),
                            vertex: v.clone(),
                        })?;
                Ok((*z, *n, step))
            }
            _ => Err(GraphError::UniverseExhausted {
                graph: self.describe(),
                vertex: v.clone(),
            }),
        }
    }

    fn around(&self, v: &VertexId, sign: i64) -> Result<Vec<VertexId>, GraphError> {
        let (z, n, step) = self.parts(v)?;
        let overflow = || GraphError::CoordinateOverflow {
            graph: self.describe(),
            vertex: v.clone(),
        };
        let mut out = vec![
            VertexId::from([z, n + 1]),
            VertexId::from([z.checked_add(sign * step).ok_or_else(overflow)?, n]),
        ];
        if n >= 1 {
            out.push(VertexId::from([z, n - 1]));
        }
        out.sort();
        Ok(out)
    }
}

impl Digraph for ShortcutGraph {
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        self.around(v, -1)
    }

    fn out_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        self.around(v, 1)
    }

    fn has_out_neighbors(&self) -> bool {
        true
    }

    fn contains(&self, v: &VertexId) -> bool {
        matches!(v.coords(), [_, n] if *n >= 0)
    }

    fn describe(&self) -> String {
        "shortcut graph on Z x N".into()
    }
}

/// Finite digraph from an explicit edge list `(v, w)` meaning `v →• w`.
#[derive(Debug, Clone, Default)]
pub struct ExplicitGraph {
    ins: BTreeMap<VertexId, Vec<VertexId>>,
    outs: BTreeMap<VertexId, Vec<VertexId>>,
}

pub fn explicit_graph(
    vertices: impl IntoIterator<Item = VertexId>,
    edges: impl IntoIterator<Item = (VertexId, VertexId)>,
) -> ExplicitGraph {
    let mut ins: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    let mut outs: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for v in vertices {
        ins.entry(v.clone()).or_default();
        outs.entry(v).or_default();
    }
    for (v, w) in edges {
        ins.entry(v.clone()).or_default();
        outs.entry(w.clone()).or_default();
        ins.entry(w.clone()).or_default().insert(v.clone());
        outs.entry(v).or_default().insert(w);
    }
    let flatten =
        |m: BTreeMap<VertexId, BTreeSet<VertexId>>| m.into_iter().map(|(k, s)| (k, s.into_iter().collect())).collect();
    ExplicitGraph {
        ins: flatten(ins),
        outs: flatten(outs),
    }
}

impl ExplicitGraph {
    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.ins.keys()
    }

    pub fn into_shared(self) -> Arc<dyn Digraph> {
        Arc::new(self)
    }

    fn lookup<'a>(
        &self,
        m: &'a BTreeMap<VertexId, Vec<VertexId>>,
        v: &VertexId,
    ) -> Result<&'a Vec<VertexId>, GraphError> {
        m.get(v).ok_or_else(|| GraphError::UniverseExhausted {
            graph: self.describe(),
            vertex: v.clone(),
        })
    }
}

impl Digraph for ExplicitGraph {
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        self.lookup(&self.ins, v).cloned()
    }

    fn out_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        self.lookup(&self.outs, v).cloned()
    }

    fn has_out_neighbors(&self) -> bool {
        true
    }

    fn contains(&self, v: &VertexId) -> bool {
        self.ins.contains_key(v)
    }

    fn describe(&self) -> String {
        format!("explicit graph ({} vertices)", self.ins.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::out_in_consistency;

    #[test]
    fn cayley_zd_neighbours() {
        let g = cayley_zd(2);
        let n = g.in_neighbors(&VertexId::from([0, 0])).unwrap();
        assert_eq!(n.len(), 4);
        assert!(n.contains(&VertexId::from([-1, 0])));
        assert!(!n.contains(&VertexId::from([0, 0])));
    }

    #[test]
    fn one_sided_shift_has_single_input() {
        let g = unit_shift_graph(false);
        assert_eq!(g.in_neighbors(&VertexId::index(3)).unwrap(), vec![VertexId::index(4)]);
        assert_eq!(g.out_neighbors(&VertexId::index(0)).unwrap(), vec![]);
        assert!(g.in_neighbors(&VertexId::index(-1)).is_err());
    }

    #[test]
    fn odometer_inputs_are_initial_segments() {
        let g = odometer_graph();
        assert_eq!(g.in_neighbors(&VertexId::index(0)).unwrap(), vec![VertexId::index(0)]);
        assert_eq!(g.in_neighbors(&VertexId::index(3)).unwrap().len(), 4);
        assert!(g.out_neighbors(&VertexId::index(3)).is_err());
    }

    #[test]
    fn families_mirror_in_and_out() {
        let probe: Vec<VertexId> = (-3..=3)
            .flat_map(|z| (0..4).map(move |n| VertexId::from([z, n])))
            .collect();
        assert!(out_in_consistency(&shortcut_graph(), &probe).unwrap().is_empty());
        let probe: Vec<VertexId> = (-3..=3)
            .flat_map(|a| (0..3).map(move |b| VertexId::from([a, b])))
            .collect();
        assert!(out_in_consistency(&cayley_zdne(1, 1), &probe).unwrap().is_empty());
    }

    #[test]
    fn explicit_graph_rejects_unknown_vertices() {
        let g = explicit_graph([], [(VertexId::index(0), VertexId::index(1))]);
        assert_eq!(g.in_neighbors(&VertexId::index(1)).unwrap(), vec![VertexId::index(0)]);
        assert!(matches!(
            g.in_neighbors(&VertexId::index(5)),
            Err(GraphError::UniverseExhausted { .. })
        ));
    }
}
