//! Symbolic dynamical systems `(A^V, X, Φ)` on countable digraphs.
//!
//! A system pairs a network with a local rule per vertex; the pattern space
//! `X` is always a product `∏ A_v` given by per-vertex allowed symbols.

mod cone;
mod dynamics;
mod families;
mod json;
mod panorama;
mod rule;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgraph::{Digraph, GraphError, SharedGraph, VertexId};

pub use cone::{evaluate, light_cone, propagation, ConeProgram, LightCone};
pub use dynamics::{
    equicontinuity_envelope, odometer_factor_chain, sensitivity_certificate, subsymmetry_check, Envelope, FactorLevel,
    SensitivityCertificate, SubsymmetryReport,
};
pub use families::{ca_on_zd, full_shift, odometer_system, shift_extension, ShiftExtensionGraph};
pub use json::{load_system, AllowedEntry, ExplicitSystem, NamedSystem, RuleEntry, SystemFile};
pub use panorama::{panorama, posexpansive_window_check, PanoramaResult, WindowCheck, DEFAULT_PATTERN_CAP};
pub use rule::{check_proper, Alphabet, LocalRule, ProperReport, Symbol};

#[derive(Debug, Error)]
pub enum SysError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("alphabet size {0} is outside 2..=256")]
    InvalidAlphabet(usize),
    #[error("symbol {0} is outside the alphabet")]
    InvalidSymbol(Symbol),
    #[error("rule table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("rule inputs must be strictly increasing: {0:?}")]
    UnsortedInputs(Vec<VertexId>),
    #[error("no rule for vertex {0}")]
    MissingRule(VertexId),
    #[error("rule inputs at {vertex} are {rule:?} but the network gives {network:?}")]
    NetworkMismatch {
        vertex: VertexId,
        rule: Vec<VertexId>,
        network: Vec<VertexId>,
    },
    #[error("configuration does not cover the light cone; missing {missing:?}")]
    InsufficientDomain { missing: Vec<VertexId> },
    #[error("enumeration needs {required} patterns, cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },
    #[error("{0} bits do not fit a packed word")]
    TooWide(u32),
    #[error("window {0:?} has no stable envelope within the probe horizon")]
    NotEquicontinuous(Vec<VertexId>),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("system file: {0}")]
    Format(String),
}

type RuleSource = dyn Fn(&VertexId) -> Result<LocalRule, SysError> + Send + Sync;

/// Network plus local rules. Rules are produced on demand per vertex.
#[derive(Clone)]
pub struct SymbolicSystem {
    name: String,
    alphabet: Alphabet,
    graph: SharedGraph,
    rules: Arc<RuleSource>,
}

impl std::fmt::Debug for SymbolicSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolicSystem")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet.size)
            .field("graph", &self.graph.describe())
            .finish()
    }
}

impl SymbolicSystem {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        graph: SharedGraph,
        rules: impl Fn(&VertexId) -> Result<LocalRule, SysError> + Send + Sync + 'static,
    ) -> Self {
        SymbolicSystem {
            name: name.into(),
            alphabet,
            graph,
            rules: Arc::new(rules),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn graph(&self) -> &SharedGraph {
        &self.graph
    }

    pub fn rule_at(&self, v: &VertexId) -> Result<LocalRule, SysError> {
        (self.rules)(v)
    }

    /// Checks that rule inputs coincide with network in-neighbours on `probe`.
    pub fn check_network(&self, probe: &[VertexId]) -> Result<(), SysError> {
        for v in probe {
            let rule = self.rule_at(v)?;
            let network = self.graph.in_neighbors(v)?;
            if rule.inputs() != network.as_slice() {
                return Err(SysError::NetworkMismatch {
                    vertex: v.clone(),
                    rule: rule.inputs().to_vec(),
                    network,
                });
            }
        }
        Ok(())
    }

    /// `Φ(x)` on `region`; `x` must cover the inputs of every region vertex.
    pub fn step_on(&self, x: &Configuration, region: &[VertexId]) -> Result<Configuration, SysError> {
        let mut out = Configuration::new();
        let mut missing = Vec::new();
        let mut args = Vec::new();
        for v in region {
            let rule = self.rule_at(v)?;
            args.clear();
            for u in rule.inputs() {
                match x.get(u) {
                    Some(s) => args.push(s),
                    None => missing.push(u.clone()),
                }
            }
            if args.len() == rule.arity() {
                out.insert(v.clone(), rule.apply(&args));
            }
        }
        if !missing.is_empty() {
            missing.sort();
            missing.dedup();
            return Err(SysError::InsufficientDomain { missing });
        }
        Ok(out)
    }
}

type AllowedFn = dyn Fn(&VertexId) -> Vec<Symbol> + Send + Sync;

/// Product pattern space `X = ∏ A_v`.
#[derive(Clone)]
pub struct PatternSpace {
    name: String,
    allowed: Arc<AllowedFn>,
}

impl std::fmt::Debug for PatternSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PatternSpace").field("name", &self.name).finish()
    }
}

impl PatternSpace {
    /// `allowed(v)` must be nonempty, sorted and within the alphabet.
    pub fn new(name: impl Into<String>, allowed: impl Fn(&VertexId) -> Vec<Symbol> + Send + Sync + 'static) -> Self {
        PatternSpace {
            name: name.into(),
            allowed: Arc::new(allowed),
        }
    }

    pub fn full(alphabet: &Alphabet) -> Self {
        let all: Vec<Symbol> = (0..alphabet.size).map(|s| s as Symbol).collect();
        PatternSpace::new(format!("full shift over {} symbols", alphabet.size), move |_| {
            all.clone()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn allowed(&self, v: &VertexId) -> Vec<Symbol> {
        (self.allowed)(v)
    }

    /// `|X_U| = ∏ |allowed(u)|`, saturating.
    pub fn pattern_count(&self, region: &[VertexId]) -> u128 {
        region
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(self.allowed(v).len() as u128))
    }

    pub fn contains(&self, x: &Configuration) -> bool {
        x.iter().all(|(v, s)| self.allowed(v).contains(&s))
    }

    /// Uniform random pattern on `domain`.
    pub fn sample<R: Rng + ?Sized>(&self, domain: &[VertexId], rng: &mut R) -> Configuration {
        domain
            .iter()
            .map(|v| {
                let a = self.allowed(v);
                (v.clone(), a[rng.gen_range(0..a.len())])
            })
            .collect()
    }
}

/// Finite partial assignment `vertex → symbol`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration(BTreeMap<VertexId, Symbol>);

impl Configuration {
    pub fn new() -> Self {
        Configuration(BTreeMap::new())
    }

    pub fn uniform(domain: &[VertexId], s: Symbol) -> Self {
        domain.iter().map(|v| (v.clone(), s)).collect()
    }

    pub fn get(&self, v: &VertexId) -> Option<Symbol> {
        self.0.get(v).copied()
    }

    pub fn insert(&mut self, v: VertexId, s: Symbol) -> Option<Symbol> {
        self.0.insert(v, s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn domain(&self) -> Vec<VertexId> {
        self.0.keys().cloned().collect()
    }

    pub fn covers(&self, region: &[VertexId]) -> bool {
        region.iter().all(|v| self.0.contains_key(v))
    }

    pub fn missing(&self, region: &[VertexId]) -> Vec<VertexId> {
        region.iter().filter(|v| !self.0.contains_key(*v)).cloned().collect()
    }

    pub fn restrict(&self, region: &[VertexId]) -> Configuration {
        region
            .iter()
            .filter_map(|v| self.get(v).map(|s| (v.clone(), s)))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, Symbol)> {
        self.0.iter().map(|(v, &s)| (v, s))
    }
}

impl FromIterator<(VertexId, Symbol)> for Configuration {
    fn from_iter<I: IntoIterator<Item = (VertexId, Symbol)>>(iter: I) -> Self {
        Configuration(iter.into_iter().collect())
    }
}

/// Observations `[x_W, Φ(x)_W, ..., Φ^T(x)_W]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub window: Vec<VertexId>,
    pub steps: Vec<Vec<Symbol>>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.steps.len() - 1
    }

    /// Rows `t,vertex,symbol`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,vertex,symbol\n");
        for (t, row) in self.steps.iter().enumerate() {
            for (v, s) in self.window.iter().zip(row) {
                let _ = writeln!(out, "{t},\"{v}\",{s}");
            }
        }
        out
    }
}

pub(crate) fn sorted_set(vs: &[VertexId]) -> Vec<VertexId> {
    let mut v = vs.to_vec();
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{cayley_zd, in_ball};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_space_counts_products() {
        let a = Alphabet::new(3).unwrap();
        let space = PatternSpace::full(&a);
        let region: Vec<VertexId> = (0..4).map(VertexId::index).collect();
        assert_eq!(space.pattern_count(&region), 81);
    }

    #[test]
    fn samples_respect_allowed_sets() {
        let space = PatternSpace::new("parity", |v| {
            if v.as_index().unwrap() % 2 == 0 {
                vec![0]
            } else {
                vec![1, 2]
            }
        });
        let domain: Vec<VertexId> = (0..20).map(VertexId::index).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = space.sample(&domain, &mut rng);
        assert!(space.contains(&x));
        assert_eq!(x.len(), 20);
    }

    #[test]
    fn step_reports_missing_inputs() {
        let sys = ca_on_zd(2, 1, vec![vec![-1], vec![1]], vec![0, 1, 1, 0]).unwrap();
        let x = Configuration::uniform(&[VertexId::index(0), VertexId::index(1)], 1);
        let err = sys.step_on(&x, &[VertexId::index(0)]).unwrap_err();
        assert!(matches!(err, SysError::InsufficientDomain { missing } if missing == vec![VertexId::index(-1)]));
    }

    #[test]
    fn network_consistency_on_a_ball() {
        let sys = ca_on_zd(
            2,
            2,
            vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
            (0..16).map(|i: u32| (i.count_ones() % 2) as u8).collect(),
        )
        .unwrap();
        let probe = in_ball(&cayley_zd(2), &[VertexId::from([0, 0])], 3).unwrap().members;
        sys.check_network(&probe).unwrap();
    }

    #[test]
    fn trajectory_csv() {
        let tr = Trajectory {
            window: vec![VertexId::index(0)],
            steps: vec![vec![1], vec![0]],
        };
        assert_eq!(tr.to_csv(), "t,vertex,symbol\n0,\"0\",1\n1,\"0\",0\n");
    }
}
