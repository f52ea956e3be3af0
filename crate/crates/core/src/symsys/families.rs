use std::sync::Arc;

use super::{Alphabet, LocalRule, PatternSpace, Symbol, SymbolicSystem, SysError};
use crate::netgraph::{
    cayley_with_generators, odometer_graph, unit_shift_graph, Digraph, GraphError, SharedGraph, VertexId,
};

fn index_of(v: &VertexId) -> Result<i64, SysError> {
    v.as_index()
        .ok_or_else(|| SysError::Invalid(format!("expected an index vertex, got {v}")))
}

/// The `m`-ary odometer on `N`. The digit bases `m` are extended by repeating
/// the last entry; cell `n` carries symbols `0..m_n`.
pub fn odometer_system(m: &[usize]) -> Result<(SymbolicSystem, PatternSpace), SysError> {
    if m.is_empty() || m.iter().any(|&b| b < 2) {
        return Err(SysError::Invalid(
            "odometer bases must be nonempty and at least 2".into(),
        ));
    }
    let alphabet = Alphabet::new(*m.iter().max().unwrap())?;
    let bases: Arc<[usize]> = m.into();
    let base_at = {
        let bases = bases.clone();
        move |n: usize| bases[n.min(bases.len() - 1)]
    };
    let rule_alphabet = alphabet.clone();
    let b = base_at.clone();
    let sys = SymbolicSystem::new(
        format!("odometer m={m:?}"),
        alphabet,
        Arc::new(odometer_graph()),
        move |v| {
            let n = index_of(v)?;
            if n < 0 {
                return Err(GraphError::UniverseExhausted {
                    graph: "odometer network".into(),
                    vertex: v.clone(),
                }
                .into());
            }
            let n = n as usize;
            let inputs = (0..=n as i64).map(VertexId::index).collect();
            let b = b.clone();
            LocalRule::from_fn(inputs, &rule_alphabet, move |a| {
                let carry = (0..n).all(|i| a[i] as usize == b(i) - 1);
                if carry {
                    ((a[n] as usize + 1) % b(n)) as Symbol
                } else {
                    a[n]
                }
            })
        },
    );
    let space = PatternSpace::new(format!("odometer digits m={m:?}"), move |v| {
        let n = v.as_index().unwrap_or(0).max(0) as usize;
        (0..base_at(n) as Symbol).collect()
    });
    Ok((sys, space))
}

/// Full shift over `k` symbols: cell `n` copies cell `n + 1`, on `N` or `Z`.
pub fn full_shift(k: usize, two_sided: bool) -> Result<SymbolicSystem, SysError> {
    let alphabet = Alphabet::new(k)?;
    let a = alphabet.clone();
    let graph = unit_shift_graph(two_sided);
    let shared: SharedGraph = Arc::new(graph);
    let g = shared.clone();
    let side = if two_sided { "Z" } else { "N" };
    Ok(SymbolicSystem::new(
        format!("shift on {k} symbols over {side}"),
        alphabet,
        shared,
        move |v| {
            let inputs = g.in_neighbors(v)?;
            LocalRule::from_fn(inputs, &a, |x| x[0])
        },
    ))
}

/// Cellular automaton on `Z^d`: `Φ(x)_z = f(x_{z+g_1}, ..., x_{z+g_k})` with
/// the table listed row-major over the neighbourhood in the order given.
pub fn ca_on_zd(
    k: usize,
    d: usize,
    neighborhood: Vec<Vec<i64>>,
    table: Vec<Symbol>,
) -> Result<SymbolicSystem, SysError> {
    let alphabet = Alphabet::new(k)?;
    if neighborhood.is_empty() || neighborhood.iter().any(|g| g.len() != d) {
        return Err(SysError::Invalid(format!(
            "neighbourhood offsets must be nonempty and have {d} coordinates"
        )));
    }
    let mut sorted = neighborhood.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != neighborhood.len() {
        return Err(SysError::Invalid("neighbourhood offsets must be distinct".into()));
    }
    let offsets: Vec<VertexId> = neighborhood.iter().map(|g| VertexId::new(g)).collect();
    let (_, permuted) = super::rule::sort_rule_inputs(&offsets, &table, k)?;
    if let Some(&s) = permuted.iter().find(|&&s| s as usize >= k) {
        return Err(SysError::InvalidSymbol(s));
    }
    let arity = sorted.len();
    let permuted: Arc<[Symbol]> = permuted.into();
    let graph = cayley_with_generators(d, 0, sorted.clone());
    let a = alphabet.clone();
    Ok(SymbolicSystem::new(
        format!("CA on Z^{d} with {arity}-cell neighbourhood"),
        alphabet,
        Arc::new(graph),
        move |v| {
            if v.dim() != d {
                return Err(SysError::Invalid(format!("{v} is not a point of Z^{d}")));
            }
            let inputs = sorted
                .iter()
                .map(|g| {
                    v.offset(g).ok_or_else(|| {
                        SysError::Graph(GraphError::CoordinateOverflow {
                            graph: format!("Z^{d}"),
                            vertex: v.clone(),
                        })
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            LocalRule::from_shared_table(inputs, &a, permuted.clone())
        },
    ))
}

/// Network of the shift extension on `V × Z`: the base edges in each layer
/// plus `(v, n+1) →• (v, n)`.
#[derive(Clone)]
pub struct ShiftExtensionGraph {
    base: SharedGraph,
}

impl ShiftExtensionGraph {
    pub fn new(base: SharedGraph) -> Self {
        ShiftExtensionGraph { base }
    }

    fn split(&self, v: &VertexId) -> Result<(VertexId, i64), GraphError> {
        v.split_last()
            .filter(|(b, _)| b.dim() > 0 && self.base.contains(b))
            .ok_or_else(|| GraphError::UniverseExhausted {
                graph: self.describe(),
                vertex: v.clone(),
            })
    }

    fn overflow(&self, v: &VertexId) -> GraphError {
        GraphError::CoordinateOverflow {
            graph: self.describe(),
            vertex: v.clone(),
        }
    }
}

impl Digraph for ShiftExtensionGraph {
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        let (b, n) = self.split(v)?;
        let mut out: Vec<VertexId> = self.base.in_neighbors(&b)?.iter().map(|u| u.extended(n)).collect();
        out.push(b.extended(n.checked_add(1).ok_or_else(|| self.overflow(v))?));
        out.sort();
        Ok(out)
    }

    fn out_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        let (b, n) = self.split(v)?;
        let mut out: Vec<VertexId> = self.base.out_neighbors(&b)?.iter().map(|w| w.extended(n)).collect();
        out.push(b.extended(n.checked_sub(1).ok_or_else(|| self.overflow(v))?));
        out.sort();
        Ok(out)
    }

    fn has_out_neighbors(&self) -> bool {
        self.base.has_out_neighbors()
    }

    fn contains(&self, v: &VertexId) -> bool {
        self.split(v).is_ok()
    }

    fn describe(&self) -> String {
        format!("({}) x Z", self.base.describe())
    }
}

/// Extension of `base` to `V × Z` with rule
/// `Φ(x)_{(v,n)} = ψ(φ_v(x_{·,n}), x_{(v,n+1)})`; `ψ` is a row-major
/// `|A| × |A|` table, first argument most significant.
pub fn shift_extension(base: &SymbolicSystem, psi: Vec<Symbol>) -> Result<SymbolicSystem, SysError> {
    let alphabet = base.alphabet().clone();
    let k = alphabet.size;
    if psi.len() != k * k {
        return Err(SysError::TableSize {
            expected: k * k,
            found: psi.len(),
        });
    }
    if let Some(&s) = psi.iter().find(|&&s| s as usize >= k) {
        return Err(SysError::InvalidSymbol(s));
    }
    let graph = ShiftExtensionGraph::new(base.graph().clone());
    let g = graph.clone();
    let base = base.clone();
    let psi: Arc<[Symbol]> = psi.into();
    let a = alphabet.clone();
    Ok(SymbolicSystem::new(
        format!("shift extension of {}", base.name()),
        alphabet,
        Arc::new(graph),
        move |v| {
            let inputs = g.in_neighbors(v)?;
            let (b, n) = v.split_last().expect("contained vertices have a layer coordinate");
            let above = b.extended(n + 1);
            let p = inputs.binary_search(&above).expect("vertical input present");
            let rule = base.rule_at(&b)?;
            let psi = psi.clone();
            LocalRule::from_fn(inputs, &a, move |x| {
                let mut args: Vec<Symbol> = Vec::with_capacity(x.len() - 1);
                args.extend_from_slice(&x[..p]);
                args.extend_from_slice(&x[p + 1..]);
                psi[rule.apply(&args) as usize * k + x[p] as usize]
            })
        },
    ))
}
