use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::rule::sort_rule_inputs;
use super::{
    ca_on_zd, full_shift, odometer_system, Alphabet, LocalRule, PatternSpace, Symbol, SymbolicSystem, SysError,
};
use crate::netgraph::{GraphSpec, VertexId};

/// System definition file: either a named family or explicit rules.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemFile {
    Named(NamedSystem),
    Explicit(ExplicitSystem),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum NamedSystem {
    Odometer {
        m: Vec<usize>,
    },
    FullShift {
        k: usize,
        #[serde(default)]
        two_sided: bool,
    },
    Ca {
        k: usize,
        d: usize,
        neighborhood: Vec<Vec<i64>>,
        table: Vec<Symbol>,
    },
    Counterexample,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplicitSystem {
    pub alphabet: usize,
    pub graph: GraphSpec,
    pub rules: Vec<RuleEntry>,
    /// Per-vertex allowed symbols; vertices not listed allow the whole alphabet.
    #[serde(default)]
    pub allowed: Vec<AllowedEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleEntry {
    pub vertex: VertexId,
    pub inputs: Vec<VertexId>,
    /// Row-major over `inputs` in the listed order, symbols `0..k`.
    pub table: Vec<Symbol>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllowedEntry {
    pub vertex: VertexId,
    pub symbols: Vec<Symbol>,
}

impl SystemFile {
    pub fn build(&self) -> Result<(SymbolicSystem, PatternSpace), SysError> {
        match self {
            SystemFile::Named(n) => match n {
                NamedSystem::Odometer { m } => odometer_system(m),
                NamedSystem::FullShift { k, two_sided } => {
                    let sys = full_shift(*k, *two_sided)?;
                    let space = PatternSpace::full(sys.alphabet());
                    Ok((sys, space))
                }
                NamedSystem::Ca {
                    k,
                    d,
                    neighborhood,
                    table,
                } => {
                    let sys = ca_on_zd(*k, *d, neighborhood.clone(), table.clone())?;
                    let space = PatternSpace::full(sys.alphabet());
                    Ok((sys, space))
                }
                NamedSystem::Counterexample => Ok(crate::counterexample::cex_system()),
            },
            SystemFile::Explicit(e) => e.build(),
        }
    }
}

impl ExplicitSystem {
    fn build(&self) -> Result<(SymbolicSystem, PatternSpace), SysError> {
        let alphabet = Alphabet::new(self.alphabet)?;
        let graph = self.graph.build();
        let mut rules: HashMap<VertexId, LocalRule> = HashMap::new();
        for r in &self.rules {
            let (inputs, table) = sort_rule_inputs(&r.inputs, &r.table, alphabet.size)?;
            let rule = LocalRule::from_table(inputs, &alphabet, table)?;
            if rules.insert(r.vertex.clone(), rule).is_some() {
                return Err(SysError::Format(format!("two rules for vertex {}", r.vertex)));
            }
        }
        let mut allowed: HashMap<VertexId, Vec<Symbol>> = HashMap::new();
        for a in &self.allowed {
            let mut s = a.symbols.clone();
            s.sort();
            s.dedup();
            if s.is_empty() || s.iter().any(|&x| x as usize >= alphabet.size) {
                return Err(SysError::Format(format!("bad allowed set at {}", a.vertex)));
            }
            allowed.insert(a.vertex.clone(), s);
        }
        let rules = Arc::new(rules);
        let all: Vec<Symbol> = (0..alphabet.size as u16).map(|s| s as Symbol).collect();
        let sys = SymbolicSystem::new("explicit system", alphabet, graph, move |v| {
            rules.get(v).cloned().ok_or_else(|| SysError::MissingRule(v.clone()))
        });
        let space = PatternSpace::new("explicit space", move |v| {
            allowed.get(v).cloned().unwrap_or_else(|| all.clone())
        });
        Ok((sys, space))
    }
}

/// Parses a system file and checks each explicit rule against the network.
pub fn load_system(text: &str) -> Result<(SymbolicSystem, PatternSpace), SysError> {
    let file: SystemFile = serde_json::from_str(text).map_err(|e| SysError::Format(e.to_string()))?;
    let built = file.build()?;
    if let SystemFile::Explicit(e) = &file {
        let vertices: Vec<VertexId> = e.rules.iter().map(|r| r.vertex.clone()).collect();
        built.0.check_network(&vertices)?;
    }
    Ok(built)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symsys::evaluate;

    #[test]
    fn explicit_xor_ring() {
        let text = r#"{
            "alphabet": 2,
            "graph": {"edges": [[1, 0], [2, 0], [2, 1], [0, 1], [0, 2], [1, 2]]},
            "rules": [
                {"vertex": 0, "inputs": [2, 1], "table": [0, 1, 1, 0]},
                {"vertex": 1, "inputs": [0, 2], "table": [0, 1, 1, 0]},
                {"vertex": 2, "inputs": [0, 1], "table": [0, 1, 1, 1]}
            ],
            "allowed": [{"vertex": 2, "symbols": [1]}]
        }"#;
        let (sys, space) = load_system(text).unwrap();
        assert_eq!(space.allowed(&VertexId::index(2)), vec![1]);
        let x: crate::symsys::Configuration = [(0, 1), (1, 0), (2, 1)]
            .into_iter()
            .map(|(v, s)| (VertexId::index(v), s))
            .collect();
        let tr = evaluate(&sys, &x, &[VertexId::index(0)], 1).unwrap();
        assert_eq!(tr.steps, vec![vec![1], vec![1]]);
    }

    #[test]
    fn named_systems() {
        let (sys, _) = load_system(r#"{"system": "odometer", "m": [2]}"#).unwrap();
        assert_eq!(sys.alphabet().size, 2);
        let (sys, _) = load_system(r#"{"system": "counterexample"}"#).unwrap();
        assert_eq!(sys.alphabet().size, 4);
    }

    #[test]
    fn network_mismatch_is_rejected() {
        let text = r#"{
            "alphabet": 2,
            "graph": {"edges": [[1, 0]]},
            "rules": [{"vertex": 0, "inputs": [0], "table": [1, 0]}]
        }"#;
        assert!(matches!(load_system(text), Err(SysError::NetworkMismatch { .. })));
        assert!(matches!(load_system("{"), Err(SysError::Format(_))));
    }
}
