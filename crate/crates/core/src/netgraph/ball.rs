use std::collections::HashMap;

use serde::Serialize;

use super::{Digraph, GraphError, VertexId};

/// A finished ball `B(U, r)` with members in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ball {
    pub center: Vec<VertexId>,
    pub radius: usize,
    pub members: Vec<VertexId>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.members.binary_search(v).is_ok()
    }
}

/// Layered in-neighbour BFS that can be grown one radius at a time.
///
/// Nested balls share one search, so a sweep over radii costs a single
/// expansion to the largest radius.
pub struct BallGrower<'g, G: Digraph + ?Sized> {
    graph: &'g G,
    center: Vec<VertexId>,
    depth: HashMap<VertexId, u32>,
    frontier: Vec<VertexId>,
    radius: usize,
}

impl<'g, G: Digraph + ?Sized> BallGrower<'g, G> {
    pub fn new(graph: &'g G, center: &[VertexId]) -> Result<Self, GraphError> {
        if center.is_empty() {
            return Err(GraphError::EmptyCenter);
        }
        let mut center = center.to_vec();
        center.sort();
        center.dedup();
        for v in &center {
            if !graph.contains(v) {
                return Err(GraphError::UniverseExhausted {
                    graph: graph.describe(),
                    vertex: v.clone(),
                });
            }
        }
        let depth = center.iter().map(|v| (v.clone(), 0)).collect();
        Ok(BallGrower {
            graph,
            frontier: center.clone(),
            center,
            depth,
            radius: 0,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn size(&self) -> usize {
        self.depth.len()
    }

    /// True once a round added nothing: the ball equals the whole in-closure.
    pub fn closed(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.depth.contains_key(v)
    }

    /// Radius at which `v` joined the ball.
    pub fn depth_of(&self, v: &VertexId) -> Option<usize> {
        self.depth.get(v).map(|&d| d as usize)
    }

    /// Vertices added in the last round.
    pub fn frontier(&self) -> &[VertexId] {
        &self.frontier
    }

    /// One round of in-neighbour expansion.
    pub fn step(&mut self) -> Result<(), GraphError> {
        let next_depth = self.radius as u32 + 1;
        let mut next = Vec::new();
        for v in &self.frontier {
            for u in self.graph.in_neighbors(v)? {
                if !self.depth.contains_key(&u) {
                    self.depth.insert(u.clone(), next_depth);
                    next.push(u);
                }
            }
        }
        self.frontier = next;
        self.radius += 1;
        Ok(())
    }

    pub fn grow_to(&mut self, r: usize) -> Result<(), GraphError> {
        while self.radius < r {
            if self.closed() {
                self.radius = r;
                break;
            }
            self.step()?;
        }
        Ok(())
    }

    pub fn members(&self) -> Vec<VertexId> {
        let mut m: Vec<VertexId> = self.depth.keys().cloned().collect();
        m.sort();
        m
    }

    /// Snapshot at the current radius.
    pub fn ball(&self) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius,
            members: self.members(),
        }
    }
}

/// `B(U, r)`: every vertex with a directed path of length at most `r` into `U`.
pub fn in_ball<G: Digraph + ?Sized>(g: &G, center: &[VertexId], r: usize) -> Result<Ball, GraphError> {
    let mut grower = BallGrower::new(g, center)?;
    grower.grow_to(r)?;
    Ok(grower.ball())
}
