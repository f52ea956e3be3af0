use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

/// Opaque vertex identifier: a short tuple of integers.
///
/// Lattice families use one coordinate per axis, the odometer and the
/// counterexample network use a single index, the shortcut graph uses
/// `(z, level)`. Ordering is lexicographic on the coordinates, which gives
/// every analysis a canonical member order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(SmallVec<[i64; 4]>);

impl VertexId {
    pub fn new(coords: &[i64]) -> Self {
        VertexId(SmallVec::from_slice(coords))
    }

    pub fn index(n: i64) -> Self {
        VertexId(smallvec::smallvec![n])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The single coordinate of an index-style vertex.
    pub fn as_index(&self) -> Option<i64> {
        match self.0.as_slice() {
            [n] => Some(*n),
            _ => None,
        }
    }

    /// Coordinate-wise sum; `None` on overflow or dimension mismatch.
    pub fn offset(&self, delta: &[i64]) -> Option<VertexId> {
        if delta.len() != self.0.len() {
            return None;
        }
        let mut out = SmallVec::with_capacity(delta.len());
        for (a, b) in self.0.iter().zip(delta) {
            out.push(a.checked_add(*b)?);
        }
        Some(VertexId(out))
    }

    /// Appends one coordinate (used by product constructions such as `V × Z`).
    pub fn extended(&self, last: i64) -> VertexId {
        let mut out = self.0.clone();
        out.push(last);
        VertexId(out)
    }

    /// Splits off the last coordinate.
    pub fn split_last(&self) -> Option<(VertexId, i64)> {
        let (last, rest) = self.0.split_last()?;
        Some((VertexId(SmallVec::from_slice(rest)), *last))
    }
}

impl From<i64> for VertexId {
    fn from(n: i64) -> Self {
        VertexId::index(n)
    }
}

impl<const N: usize> From<[i64; N]> for VertexId {
    fn from(c: [i64; N]) -> Self {
        VertexId::new(&c)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for VertexId {
    type Err = String;

    /// Parses the display form: `3`, `(1,-2)` or `1,-2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords: Result<Vec<i64>, _> = body.split(',').map(|c| c.trim().parse::<i64>()).collect();
        match coords {
            Ok(c) if !c.is_empty() => Ok(VertexId::new(&c)),
            _ => Err(format!("not a vertex: {s:?}")),
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_index() {
            return write!(f, "{n}");
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

// JSON encoding: a bare integer for index vertices, an array otherwise.
impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_index() {
            Some(n) => s.serialize_i64(n),
            None => self.0.as_slice().serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Index(i64),
            Tuple(Vec<i64>),
        }
        Ok(match Repr::deserialize(d)? {
            Repr::Index(n) => VertexId::index(n),
            Repr::Tuple(v) => VertexId::new(&v),
        })
    }
}
