//! The two-dimensional positively expansive system on the box/circle chain.
//!
//! Cells are indexed by `n ≥ 0`. Cell `n` is a box when `n = k(k+1)` for
//! some `k` and a circle otherwise. Every cell reads its successor `n + 1`;
//! box `m_k` also reads box `m_{k+1}`. A state is a pair `(a, b)` of bits,
//! encoded as the symbol `a + 2b`, with `b = 0` forced at circles.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgraph::{Digraph, GraphError, VertexId};
use crate::symsys::{
    light_cone, propagation, Alphabet, ConeProgram, Configuration, LocalRule, PatternSpace, Symbol, SymbolicSystem,
    SysError,
};

/// `m_k = k(k+1)`.
pub fn m(k: u32) -> i64 {
    let k = k as i64;
    k * (k + 1)
}

/// `Some(k)` when `n = m_k`.
pub fn box_index(n: i64) -> Option<u32> {
    if n < 0 {
        return None;
    }
    // k ≈ sqrt(n); correct the float guess by at most one either way.
    let guess = ((n as f64).sqrt() as i64).max(0);
    ((guess - 1).max(0)..=guess + 1)
        .find(|&k| k * (k + 1) == n)
        .map(|k| k as u32)
}

pub fn is_box(n: i64) -> bool {
    box_index(n).is_some()
}

#[derive(Debug, Error)]
pub enum CexError {
    #[error("trace horizon {found} is shorter than m_J = {needed}")]
    HorizonTooShort { needed: usize, found: usize },
    #[error("trace rows have lengths {a} and {b}, expected {expected}")]
    Malformed { a: usize, b: usize, expected: usize },
    #[error("J must be at least 1")]
    BadDepth,
    #[error(transparent)]
    Sys(#[from] SysError),
}

/// Network of the chain.
#[derive(Debug, Clone, Copy, Default)]
pub struct CexGraph;

pub fn counterexample_graph() -> CexGraph {
    CexGraph
}

impl CexGraph {
    fn cell(&self, v: &VertexId) -> Result<i64, GraphError> {
        match v.as_index() {
            Some(n) if n >= 0 => Ok(n),
            _ => Err(GraphError::UniverseExhausted {
                graph: self.describe(),
                vertex: v.clone(),
            }),
        }
    }
}

impl Digraph for CexGraph {
    fn in_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        let n = self.cell(v)?;
        let mut out = vec![VertexId::index(n + 1)];
        if let Some(k) = box_index(n) {
            let next = m(k + 1);
            if next != n + 1 {
                out.push(VertexId::index(next));
            }
        }
        Ok(out)
    }

    fn out_neighbors(&self, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
        let n = self.cell(v)?;
        let mut out = Vec::new();
        if n >= 1 {
            out.push(VertexId::index(n - 1));
        }
        if let Some(k) = box_index(n).filter(|&k| k >= 1) {
            let prev = m(k - 1);
            if prev != n - 1 {
                out.push(VertexId::index(prev));
            }
        }
        out.sort();
        Ok(out)
    }

    fn has_out_neighbors(&self) -> bool {
        true
    }

    fn contains(&self, v: &VertexId) -> bool {
        matches!(v.as_index(), Some(n) if n >= 0)
    }

    fn describe(&self) -> String {
        "box/circle chain".into()
    }
}

/// State `(a, b)` of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CexState {
    pub a: u8,
    pub b: u8,
}

impl CexState {
    pub fn symbol(self) -> Symbol {
        self.a + 2 * self.b
    }

    pub fn from_symbol(s: Symbol) -> Self {
        CexState {
            a: s & 1,
            b: (s >> 1) & 1,
        }
    }
}

fn circle_rule(s: &[Symbol]) -> Symbol {
    s[0] & 1
}

/// Inputs are `[m_k + 1, m_{k+1}]`: the new `a` is the circle's `a`, the new
/// `b` is `a + b` of the next box.
fn box_rule(s: &[Symbol]) -> Symbol {
    let next = CexState::from_symbol(s[1]);
    (s[0] & 1) + 2 * (next.a ^ next.b)
}

/// The system and its pattern space (`b = 0` at circles).
pub fn cex_system() -> (SymbolicSystem, PatternSpace) {
    let alphabet = Alphabet::with_labels(
        ["(0,0)", "(1,0)", "(0,1)", "(1,1)"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    )
    .expect("four labels");
    let graph = Arc::new(CexGraph);
    let rule_alphabet = alphabet.clone();
    let sys = SymbolicSystem::new("box/circle chain", alphabet, graph.clone(), move |v| {
        let inputs = graph.in_neighbors(v)?;
        let n = v.as_index().unwrap_or(-1);
        if is_box(n) {
            LocalRule::from_fn(inputs, &rule_alphabet, box_rule)
        } else {
            LocalRule::from_fn(inputs, &rule_alphabet, circle_rule)
        }
    });
    let space = PatternSpace::new("b = 0 at circles", |v| match v.as_index() {
        Some(n) if is_box(n) => vec![0, 1, 2, 3],
        _ => vec![0, 1],
    });
    (sys, space)
}

/// Observed states of cell 0 for `t ∈ [0, horizon]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub horizon: usize,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

impl Trace {
    pub fn zeros(horizon: usize) -> Self {
        Trace {
            horizon,
            a: vec![0; horizon + 1],
            b: vec![0; horizon + 1],
        }
    }

    /// Pointwise sum over `Z₂` of two traces of equal horizon.
    pub fn xor(&self, other: &Trace) -> Trace {
        assert_eq!(self.horizon, other.horizon, "trace horizons differ");
        let add = |x: &[u8], y: &[u8]| x.iter().zip(y).map(|(p, q)| p ^ q).collect();
        Trace {
            horizon: self.horizon,
            a: add(&self.a, &other.a),
            b: add(&self.b, &other.b),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,a,b\n");
        for t in 0..=self.horizon {
            s.push_str(&format!("{},{},{}\n", t, self.a[t], self.b[t]));
        }
        s
    }
}

/// Initial data recovered from a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// `a` at cells `0..=m_J`.
    pub a0: Vec<u8>,
    /// `b` at boxes `m_0..=m_J`.
    pub b0_boxes: Vec<u8>,
}

impl DecodeResult {
    /// The part of `x0` that a depth-`J` decode should recover.
    pub fn project(x0: &Configuration, depth: u32) -> Option<Self> {
        let top = m(depth);
        let mut a0 = Vec::with_capacity(top as usize + 1);
        for n in 0..=top {
            a0.push(CexState::from_symbol(x0.get(&VertexId::index(n))?).a);
        }
        let mut b0_boxes = Vec::with_capacity(depth as usize + 1);
        for k in 0..=depth {
            b0_boxes.push(CexState::from_symbol(x0.get(&VertexId::index(m(k)))?).b);
        }
        Some(DecodeResult { a0, b0_boxes })
    }
}

/// Position where a decode disagrees with the expected initial data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Mismatch {
    A { cell: i64 },
    B { cell: i64 },
}

pub fn compare(decoded: &DecodeResult, expected: &DecodeResult) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for (n, (x, y)) in decoded.a0.iter().zip(&expected.a0).enumerate() {
        if x != y {
            out.push(Mismatch::A { cell: n as i64 });
        }
    }
    for (k, (x, y)) in decoded.b0_boxes.iter().zip(&expected.b0_boxes).enumerate() {
        if x != y {
            out.push(Mismatch::B { cell: m(k as u32) });
        }
    }
    out
}

/// Light cone of cell 0 at horizon `m_J`.
pub fn trace_cone(depth: u32) -> Result<Vec<VertexId>, CexError> {
    let (sys, _) = cex_system();
    Ok(light_cone(&sys, &[VertexId::index(0)], m(depth) as usize)?
        .cone()
        .to_vec())
}

/// Compiled forward simulator for depth `J`.
pub struct TraceSimulator {
    depth: u32,
    program: ConeProgram,
    space: PatternSpace,
}

impl TraceSimulator {
    pub fn new(depth: u32) -> Result<Self, CexError> {
        if depth == 0 {
            return Err(CexError::BadDepth);
        }
        let (sys, space) = cex_system();
        let program = ConeProgram::compile(&sys, &[VertexId::index(0)], m(depth) as usize)?;
        Ok(TraceSimulator { depth, program, space })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn cone(&self) -> &[VertexId] {
        self.program.leaves()
    }

    /// Random point of the pattern space restricted to the cone.
    pub fn random_configuration<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        self.space.sample(self.program.leaves(), rng)
    }

    pub fn simulate(&self, x0: &Configuration) -> Result<Trace, CexError> {
        let tr = self.program.evaluate(x0)?;
        let mut trace = Trace::zeros(tr.horizon());
        for (t, row) in tr.steps.iter().enumerate() {
            let s = CexState::from_symbol(row[0]);
            trace.a[t] = s.a;
            trace.b[t] = s.b;
        }
        Ok(trace)
    }
}

/// Trace of cell 0 for `t ∈ [0, m_J]`.
pub fn simulate_trace(x0: &Configuration, depth: u32) -> Result<Trace, CexError> {
    TraceSimulator::new(depth)?.simulate(x0)
}

/// Recovers `a` on cells `0..=m_J` and `b` on boxes `m_0..=m_J` from a trace.
///
/// The `a` row travels down the chain one cell per step, so `a⁰_n = aⁿ_0`.
/// Each box adds the next box's `a + b` into its own `b`, which gives
/// `bᵗ_{m_{j+1}} = b^{t+1}_{m_j} − a^{t+m_{j+1}}_0` and peels one box per
/// round. Round `j` is valid for `t ≤ m_J − m_j`.
pub fn decode_trace(tr: &Trace, depth: u32) -> Result<DecodeResult, CexError> {
    if depth == 0 {
        return Err(CexError::BadDepth);
    }
    let top = m(depth) as usize;
    if tr.a.len() != tr.horizon + 1 || tr.b.len() != tr.horizon + 1 {
        return Err(CexError::Malformed {
            a: tr.a.len(),
            b: tr.b.len(),
            expected: tr.horizon + 1,
        });
    }
    if tr.horizon < top {
        return Err(CexError::HorizonTooShort {
            needed: top,
            found: tr.horizon,
        });
    }
    let a0 = tr.a[..=top].to_vec();
    let mut row = tr.b[..=top].to_vec();
    let mut b0_boxes = vec![row[0]];
    for j in 1..=depth {
        let mj = m(j) as usize;
        row = (0..=top - mj).map(|t| row[t + 1] ^ tr.a[t + mj]).collect();
        b0_boxes.push(row[0]);
    }
    Ok(DecodeResult { a0, b0_boxes })
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundTripReport {
    pub depth: u32,
    pub horizon: usize,
    pub cone_size: usize,
    pub trials: usize,
    pub passed: bool,
    /// Per-trial seeds whose decode disagreed with the initial data.
    pub failing_seeds: Vec<u64>,
}

/// Seed of trial `i` under master seed `seed`.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng.gen()
}

/// Simulate, decode and compare on `trials` random configurations.
pub fn cex_roundtrip(depth: u32, trials: usize, seed: u64) -> Result<RoundTripReport, CexError> {
    let sim = TraceSimulator::new(depth)?;
    let results: Result<Vec<Option<u64>>, CexError> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let x0 = sim.random_configuration(&mut ChaCha8Rng::seed_from_u64(s));
            let decoded = decode_trace(&sim.simulate(&x0)?, depth)?;
            let expected = DecodeResult::project(&x0, depth).expect("cone covers cells 0..=m_J");
            Ok((decoded != expected).then_some(s))
        })
        .collect();
    let failing_seeds: Vec<u64> = results?.into_iter().flatten().collect();
    Ok(RoundTripReport {
        depth,
        horizon: m(depth) as usize,
        cone_size: sim.cone().len(),
        trials,
        passed: failing_seeds.is_empty(),
        failing_seeds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PropagationProfile {
    /// `ρ(t)` for `t ∈ [0, T]`.
    pub rho: Vec<usize>,
    /// `(t + 1) + t(t − 1)/2`.
    pub lower_bound: Vec<usize>,
    pub lower_bound_ok: bool,
    pub first_violation: Option<usize>,
}

/// Exact light-cone sizes of cell 0 against the box-plus-circle count.
pub fn cex_propagation_profile(horizon: usize) -> Result<PropagationProfile, CexError> {
    let (sys, _) = cex_system();
    let rho = propagation(&sys, &VertexId::index(0), horizon)?;
    let lower_bound: Vec<usize> = (0..=horizon).map(|t| t + 1 + t * t.saturating_sub(1) / 2).collect();
    let first_violation = rho.iter().zip(&lower_bound).position(|(r, b)| r < b);
    Ok(PropagationProfile {
        rho,
        lower_bound,
        lower_bound_ok: first_violation.is_none(),
        first_violation,
    })
}
