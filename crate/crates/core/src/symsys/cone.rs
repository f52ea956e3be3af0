use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::{sorted_set, Configuration, LocalRule, Symbol, SymbolicSystem, SysError, Trajectory};
use crate::netgraph::VertexId;

/// Light cone of a window: `layers[t] = Φ^t_in(W)` by backward composition of
/// rule inputs and `cumulative[t] = Φ^{[0..t]}_in(W)`.
#[derive(Debug, Clone, Serialize)]
pub struct LightCone {
    pub window: Vec<VertexId>,
    pub layers: Vec<Vec<VertexId>>,
    pub cumulative: Vec<Vec<VertexId>>,
}

impl LightCone {
    pub fn horizon(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn cone(&self) -> &[VertexId] {
        self.cumulative.last().expect("cone has at least one layer")
    }
}

/// Memoised rule inputs, so repeated cone walks touch each rule once.
pub(crate) struct InputCache<'a> {
    sys: &'a SymbolicSystem,
    inputs: HashMap<VertexId, Arc<LocalRule>>,
}

impl<'a> InputCache<'a> {
    pub(crate) fn new(sys: &'a SymbolicSystem) -> Self {
        InputCache {
            sys,
            inputs: HashMap::new(),
        }
    }

    pub(crate) fn rule(&mut self, v: &VertexId) -> Result<Arc<LocalRule>, SysError> {
        if let Some(r) = self.inputs.get(v) {
            return Ok(r.clone());
        }
        let r = Arc::new(self.sys.rule_at(v)?);
        self.inputs.insert(v.clone(), r.clone());
        Ok(r)
    }
}

pub fn light_cone(sys: &SymbolicSystem, window: &[VertexId], horizon: usize) -> Result<LightCone, SysError> {
    let window = sorted_set(window);
    if window.is_empty() {
        return Err(SysError::Invalid("window must be nonempty".into()));
    }
    let mut cache = InputCache::new(sys);
    let mut layers = vec![window.clone()];
    let mut cumulative = vec![window.clone()];
    let mut acc: BTreeSet<VertexId> = window.iter().cloned().collect();
    for _ in 0..horizon {
        let mut next = BTreeSet::new();
        for v in layers.last().unwrap() {
            next.extend(cache.rule(v)?.inputs().iter().cloned());
        }
        acc.extend(next.iter().cloned());
        layers.push(next.into_iter().collect());
        cumulative.push(acc.iter().cloned().collect());
    }
    Ok(LightCone {
        window,
        layers,
        cumulative,
    })
}

/// `ρ_v(t) = |Φ^{[0..t]}_in(v)|` for `t = 0..=horizon`.
pub fn propagation(sys: &SymbolicSystem, v: &VertexId, horizon: usize) -> Result<Vec<usize>, SysError> {
    let cone = light_cone(sys, std::slice::from_ref(v), horizon)?;
    Ok(cone.cumulative.iter().map(Vec::len).collect())
}

/// A rule lowered for the evaluation loop: a flat table when small enough.
#[derive(Clone)]
pub(crate) struct CompiledRule {
    table: Option<Arc<[Symbol]>>,
    rule: Arc<LocalRule>,
    base: usize,
}

const INLINE_TABLE_MAX: usize = 1 << 16;

impl CompiledRule {
    fn new(rule: Arc<LocalRule>, base: usize) -> Self {
        let table = rule.table(INLINE_TABLE_MAX).ok().map(Arc::from);
        CompiledRule { table, rule, base }
    }
}

/// Straight-line evaluation plan for `Φ^{[0..T]}_W` on the cone `C_T`.
///
/// Slots `0..leaves.len()` hold the initial pattern on the cone; each later
/// slot holds `Φ^s(x)_v` for `v ∈ C_{T-s}`, in level order.
#[derive(Clone)]
pub struct ConeProgram {
    window: Vec<VertexId>,
    horizon: usize,
    leaves: Vec<VertexId>,
    rules: Vec<CompiledRule>,
    node_rule: Vec<u32>,
    node_inputs: Vec<(u32, u32)>,
    input_slots: Vec<u32>,
    outputs: Vec<Vec<u32>>,
    /// Concatenated inline tables; `node_table[j]` is an offset into it, or
    /// `u32::MAX` when node `j` must call its rule closure.
    tables: Vec<Symbol>,
    node_table: Vec<u32>,
    /// `log2(base)` when the alphabet size is a power of two.
    base_shift: Option<u32>,
}

impl ConeProgram {
    pub fn compile(sys: &SymbolicSystem, window: &[VertexId], horizon: usize) -> Result<Self, SysError> {
        let cone = light_cone(sys, window, horizon)?;
        let mut cache = InputCache::new(sys);
        let base = sys.alphabet().size;
        let leaves = cone.cone().to_vec();
        let mut rule_index: HashMap<VertexId, u32> = HashMap::new();
        let mut rules = Vec::new();
        let mut node_rule = Vec::new();
        let mut node_inputs = Vec::new();
        let mut input_slots = Vec::new();
        let mut prev: HashMap<&VertexId, u32> = leaves.iter().enumerate().map(|(i, v)| (v, i as u32)).collect();
        let mut outputs = vec![cone.window.iter().map(|w| prev[w]).collect::<Vec<u32>>()];
        let mut slot = leaves.len() as u32;
        for s in 1..=horizon {
            let mut here = HashMap::new();
            for v in &cone.cumulative[horizon - s] {
                let ri = match rule_index.get(v) {
                    Some(&i) => i,
                    None => {
                        let i = rules.len() as u32;
                        rules.push(CompiledRule::new(cache.rule(v)?, base));
                        rule_index.insert(v.clone(), i);
                        i
                    }
                };
                let start = input_slots.len() as u32;
                for u in rules[ri as usize].rule.inputs() {
                    input_slots.push(prev[u]);
                }
                node_inputs.push((start, input_slots.len() as u32));
                node_rule.push(ri);
                here.insert(v, slot);
                slot += 1;
            }
            outputs.push(cone.window.iter().map(|w| here[w]).collect());
            prev = here;
        }
        let mut tables = Vec::new();
        let mut rule_offset = Vec::with_capacity(rules.len());
        for r in &rules {
            match &r.table {
                Some(t) => {
                    rule_offset.push(tables.len() as u32);
                    tables.extend_from_slice(t);
                }
                None => rule_offset.push(u32::MAX),
            }
        }
        let node_table = node_rule.iter().map(|&r| rule_offset[r as usize]).collect();
        Ok(ConeProgram {
            window: cone.window.clone(),
            horizon,
            leaves,
            rules,
            node_rule,
            node_inputs,
            input_slots,
            outputs,
            tables,
            node_table,
            base_shift: base.is_power_of_two().then(|| base.trailing_zeros()),
        })
    }

    pub fn window(&self) -> &[VertexId] {
        &self.window
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The cone `C_T`, which is also the order of the leaf slots.
    pub fn leaves(&self) -> &[VertexId] {
        &self.leaves
    }

    pub fn node_count(&self) -> usize {
        self.node_rule.len()
    }

    pub fn slot_count(&self) -> usize {
        self.leaves.len() + self.node_count()
    }

    /// Slots read by node `j`.
    pub(crate) fn node_input_slots(&self, j: usize) -> &[u32] {
        let (a, b) = self.node_inputs[j];
        &self.input_slots[a as usize..b as usize]
    }

    /// Output slots per time step, window order.
    pub(crate) fn output_slots(&self) -> &[Vec<u32>] {
        &self.outputs
    }

    #[inline]
    pub(crate) fn eval_node(&self, j: usize, buf: &mut [Symbol]) {
        let inputs = self.node_input_slots(j);
        let offset = self.node_table[j];
        let value = if offset != u32::MAX {
            let mut row = 0usize;
            match self.base_shift {
                Some(sh) => {
                    for &i in inputs {
                        row = (row << sh) | buf[i as usize] as usize;
                    }
                }
                None => {
                    let base = self.rules[self.node_rule[j] as usize].base;
                    for &i in inputs {
                        row = row * base + buf[i as usize] as usize;
                    }
                }
            }
            self.tables[offset as usize + row]
        } else {
            let args: Vec<Symbol> = inputs.iter().map(|&i| buf[i as usize]).collect();
            self.rules[self.node_rule[j] as usize].rule.apply(&args)
        };
        buf[self.leaves.len() + j] = value;
    }

    /// Fills every node slot from the leaf slots already in `buf`.
    pub(crate) fn run(&self, buf: &mut [Symbol]) {
        for j in 0..self.node_count() {
            self.eval_node(j, buf);
        }
    }

    pub(crate) fn read(&self, buf: &[Symbol]) -> Vec<Vec<Symbol>> {
        self.outputs
            .iter()
            .map(|row| row.iter().map(|&i| buf[i as usize]).collect())
            .collect()
    }

    pub fn evaluate(&self, x: &Configuration) -> Result<Trajectory, SysError> {
        let missing = x.missing(&self.leaves);
        if !missing.is_empty() {
            return Err(SysError::InsufficientDomain { missing });
        }
        let mut buf = vec![0; self.slot_count()];
        for (i, v) in self.leaves.iter().enumerate() {
            buf[i] = x.get(v).expect("coverage checked");
        }
        self.run(&mut buf);
        Ok(Trajectory {
            window: self.window.clone(),
            steps: self.read(&buf),
        })
    }
}

/// Exact trajectory of `W` for `T` steps from a configuration covering the cone.
pub fn evaluate(
    sys: &SymbolicSystem,
    x: &Configuration,
    window: &[VertexId],
    horizon: usize,
) -> Result<Trajectory, SysError> {
    ConeProgram::compile(sys, window, horizon)?.evaluate(x)
}
