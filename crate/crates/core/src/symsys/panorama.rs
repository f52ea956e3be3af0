use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{sorted_set, ConeProgram, PatternSpace, Symbol, SymbolicSystem, SysError};
use crate::netgraph::VertexId;

/// Default enumeration budget, counted in patterns on the cone.
pub const DEFAULT_PATTERN_CAP: u128 = 1 << 24;

/// Largest trajectory-key width kept in a dense table.
const DENSE_KEY_BITS: u32 = 20;

#[derive(Debug, Clone, Serialize)]
pub struct PanoramaResult {
    pub window: Vec<VertexId>,
    pub horizon: usize,
    /// `layers[t] = W^t`: cone cells whose initial value is forced by the
    /// observations of `W` at times `0..=t`.
    pub layers: Vec<Vec<VertexId>>,
    pub cone: Vec<VertexId>,
    pub patterns: u128,
    pub distinct_trajectories: usize,
}

/// Grouping of enumerated patterns by trajectory: one representative per
/// key and the OR of `pattern ^ representative` over the group.
enum Groups {
    Dense { seen: Vec<bool>, entries: Vec<(u64, u64)> },
    Sparse(HashMap<u128, (u64, u64)>),
}

impl Groups {
    fn new(key_bits: u32) -> Self {
        if key_bits <= DENSE_KEY_BITS {
            let n = 1usize << key_bits;
            Groups::Dense {
                seen: vec![false; n],
                entries: vec![(0, 0); n],
            }
        } else {
            Groups::Sparse(HashMap::new())
        }
    }

    fn into_entries(self) -> Vec<(u128, u64, u64)> {
        match self {
            Groups::Dense { seen, entries } => seen
                .into_iter()
                .zip(entries)
                .enumerate()
                .filter(|(_, (s, _))| *s)
                .map(|(k, (_, (r, m)))| (k as u128, r, m))
                .collect(),
            Groups::Sparse(map) => {
                let mut v: Vec<(u128, u64, u64)> = map.into_iter().map(|(k, (r, m))| (k, r, m)).collect();
                v.sort_unstable_by_key(|e| e.0);
                v
            }
        }
    }
}

/// Merges groups keyed by `key & prefix_mask`; exact because
/// `x ^ rep_p = (x ^ rep_k) ^ (rep_k ^ rep_p)` for `x` in group `k`.
fn merge_groups(entries: &[(u128, u64, u64)], prefix_mask: u128) -> u64 {
    let mut groups: HashMap<u128, (u64, u64)> = HashMap::new();
    for &(k, rep, mask) in entries {
        groups
            .entry(k & prefix_mask)
            .and_modify(|g| g.1 |= mask | (rep ^ g.0))
            .or_insert((rep, mask));
    }
    groups.values().fold(0, |acc, g| acc | g.1)
}

struct Plan<'p> {
    prog: &'p ConeProgram,
    /// Free leaves in enumeration order (position 0 changes fastest).
    free: Vec<usize>,
    choices: Vec<Vec<Symbol>>,
    offsets: Vec<u32>,
    /// `dirty[p]`: nodes to recompute after digits `0..=p` changed.
    dirty: Vec<Vec<u32>>,
    fixed: Vec<(usize, Symbol)>,
    /// Output slots, time-major, lowest key bits first.
    outputs: Vec<u32>,
    symbol_bits: u32,
    key_bits: u32,
}

impl Plan<'_> {
    #[inline]
    fn key(&self, buf: &[Symbol]) -> u128 {
        if self.key_bits <= 64 {
            let mut key = 0u64;
            for &s in self.outputs.iter().rev() {
                key = (key << self.symbol_bits) | buf[s as usize] as u64;
            }
            key as u128
        } else {
            let mut key = 0u128;
            for &s in self.outputs.iter().rev() {
                key = (key << self.symbol_bits) | buf[s as usize] as u128;
            }
            key
        }
    }

    /// Enumerates every pattern whose top digit equals `top`.
    fn enumerate_chunk(&self, top: Option<usize>) -> Groups {
        let mut groups = Groups::new(self.key_bits);
        match &mut groups {
            Groups::Dense { seen, entries } => self.walk(top, |key, pattern| {
                let i = key as usize;
                if seen[i] {
                    let e = &mut entries[i];
                    e.1 |= pattern ^ e.0;
                } else {
                    seen[i] = true;
                    entries[i] = (pattern, 0);
                }
            }),
            Groups::Sparse(map) => self.walk(top, |key, pattern| {
                map.entry(key)
                    .and_modify(|e| e.1 |= pattern ^ e.0)
                    .or_insert((pattern, 0));
            }),
        }
        groups
    }

    fn walk(&self, top: Option<usize>, mut record: impl FnMut(u128, u64)) {
        let mut buf = vec![0 as Symbol; self.prog.slot_count()];
        for &(leaf, s) in &self.fixed {
            buf[leaf] = s;
        }
        let inner = match top {
            Some(_) => self.free.len() - 1,
            None => self.free.len(),
        };
        let mut digits = vec![0usize; self.free.len()];
        let mut pattern = 0u64;
        for (p, &leaf) in self.free.iter().enumerate() {
            buf[leaf] = self.choices[p][0];
        }
        if let Some(d) = top {
            let p = self.free.len() - 1;
            digits[p] = d;
            buf[self.free[p]] = self.choices[p][d];
            pattern |= (d as u64) << self.offsets[p];
        }
        self.prog.run(&mut buf);
        loop {
            record(self.key(&buf), pattern);
            let mut p = 0;
            loop {
                if p == inner {
                    return;
                }
                digits[p] += 1;
                let leaf = self.free[p];
                if digits[p] < self.choices[p].len() {
                    buf[leaf] = self.choices[p][digits[p]];
                    pattern += 1u64 << self.offsets[p];
                    break;
                }
                pattern &= !(((1u64 << bits_for(self.choices[p].len())) - 1) << self.offsets[p]);
                digits[p] = 0;
                buf[leaf] = self.choices[p][0];
                p += 1;
            }
            for &j in &self.dirty[p] {
                self.prog.eval_node(j as usize, &mut buf);
            }
        }
    }
}

fn bits_for(n: usize) -> u32 {
    usize::BITS - (n - 1).leading_zeros()
}

/// Exhaustive panorama of `W` up to horizon `T` over all patterns on the cone.
pub fn panorama(
    sys: &SymbolicSystem,
    space: &PatternSpace,
    window: &[VertexId],
    horizon: usize,
    cap: u128,
) -> Result<PanoramaResult, SysError> {
    let prog = ConeProgram::compile(sys, window, horizon)?;
    let leaves = prog.leaves();
    let required = space.pattern_count(leaves);
    if required > cap {
        return Err(SysError::CapExceeded { required, cap });
    }
    let allowed: Vec<Vec<Symbol>> = leaves.iter().map(|v| space.allowed(v)).collect();
    if let Some(i) = allowed.iter().position(Vec::is_empty) {
        return Err(SysError::Invalid(format!("no allowed symbols at {}", leaves[i])));
    }

    // Transitive leaf dependencies of every node, over free leaves.
    let free_leaves: Vec<usize> = (0..leaves.len()).filter(|&i| allowed[i].len() > 1).collect();
    if free_leaves.len() > 64 {
        return Err(SysError::TooWide(free_leaves.len() as u32));
    }
    let mut leaf_bit = vec![0u64; leaves.len()];
    for (b, &i) in free_leaves.iter().enumerate() {
        leaf_bit[i] = 1 << b;
    }
    let n_leaves = leaves.len();
    let mut deps = vec![0u64; prog.node_count()];
    for j in 0..prog.node_count() {
        deps[j] = prog.node_input_slots(j).iter().fold(0, |acc, &s| {
            let s = s as usize;
            acc | if s < n_leaves { leaf_bit[s] } else { deps[s - n_leaves] }
        });
    }
    let mut order: Vec<usize> = (0..free_leaves.len()).collect();
    order.sort_by_key(|&b| (deps.iter().filter(|d| *d & (1 << b) != 0).count(), b));
    let free: Vec<usize> = order.iter().map(|&b| free_leaves[b]).collect();
    let choices: Vec<Vec<Symbol>> = free.iter().map(|&i| allowed[i].clone()).collect();
    let mut offsets = Vec::with_capacity(free.len());
    let mut width = 0u32;
    for c in &choices {
        offsets.push(width);
        width += bits_for(c.len());
    }
    if width > 64 {
        return Err(SysError::TooWide(width));
    }
    let mut position = vec![usize::MAX; 64];
    for (p, &b) in order.iter().enumerate() {
        position[b] = p;
    }
    let min_pos: Vec<usize> = deps
        .iter()
        .map(|&d| {
            (0..free_leaves.len())
                .filter(|b| d & (1 << b) != 0)
                .map(|b| position[b])
                .min()
                .unwrap_or(usize::MAX)
        })
        .collect();
    let dirty: Vec<Vec<u32>> = (0..free.len())
        .map(|p| {
            (0..prog.node_count() as u32)
                .filter(|&j| min_pos[j as usize] <= p)
                .collect()
        })
        .collect();

    let symbol_bits = sys.alphabet().bits();
    let per_step = symbol_bits * prog.window().len() as u32;
    let key_bits = per_step * (horizon as u32 + 1);
    if key_bits > 128 {
        return Err(SysError::TooWide(key_bits));
    }
    let fixed = (0..leaves.len())
        .filter(|&i| allowed[i].len() == 1)
        .map(|i| (i, allowed[i][0]))
        .collect();
    let plan = Plan {
        prog: &prog,
        free,
        choices,
        offsets,
        dirty,
        fixed,
        outputs: prog.output_slots().iter().flatten().copied().collect(),
        symbol_bits,
        key_bits,
    };

    let chunks: Vec<Groups> = match plan.free.last() {
        None => vec![plan.enumerate_chunk(None)],
        Some(_) => {
            let top = plan.choices.last().unwrap().len();
            (0..top)
                .into_par_iter()
                .map(|d| plan.enumerate_chunk(Some(d)))
                .collect()
        }
    };
    let mut merged: HashMap<u128, (u64, u64)> = HashMap::new();
    for chunk in chunks {
        for (k, rep, mask) in chunk.into_entries() {
            merged
                .entry(k)
                .and_modify(|e| e.1 |= mask | (rep ^ e.0))
                .or_insert((rep, mask));
        }
    }
    let entries: Vec<(u128, u64, u64)> = merged.into_iter().map(|(k, (r, m))| (k, r, m)).collect();

    let cone = light_cone_sets(&prog, sys, horizon)?;
    let mut layers = Vec::with_capacity(horizon + 1);
    for (t, layer_cells) in cone.iter().enumerate().take(horizon + 1) {
        let bits = per_step * (t as u32 + 1);
        let prefix_mask = if bits >= 128 { u128::MAX } else { (1u128 << bits) - 1 };
        let undetermined = merge_groups(&entries, prefix_mask);
        let mut layer = Vec::new();
        for v in layer_cells {
            let i = leaves.binary_search(v).expect("cone layers lie in the final cone");
            let free_pos = plan.free.iter().position(|&l| l == i);
            let determined = match free_pos {
                None => true,
                Some(p) => {
                    let field = ((1u64 << bits_for(plan.choices[p].len())) - 1) << plan.offsets[p];
                    undetermined & field == 0
                }
            };
            if determined {
                layer.push(v.clone());
            }
        }
        layers.push(layer);
    }
    Ok(PanoramaResult {
        window: prog.window().to_vec(),
        horizon,
        layers,
        cone: leaves.to_vec(),
        patterns: required,
        distinct_trajectories: entries.len(),
    })
}

fn light_cone_sets(prog: &ConeProgram, sys: &SymbolicSystem, horizon: usize) -> Result<Vec<Vec<VertexId>>, SysError> {
    Ok(super::light_cone(sys, prog.window(), horizon)?.cumulative)
}

/// Least horizon at which the panorama of `W` covers `target`.
#[derive(Debug, Clone, Serialize)]
pub struct WindowCheck {
    pub covered: bool,
    pub first_t: Option<usize>,
    /// `target ∖ W^T` at the last horizon examined.
    pub missing: Vec<VertexId>,
    pub layers: Vec<Vec<VertexId>>,
}

pub fn posexpansive_window_check(
    sys: &SymbolicSystem,
    space: &PatternSpace,
    window: &[VertexId],
    t_max: usize,
    target: &[VertexId],
    cap: u128,
) -> Result<WindowCheck, SysError> {
    let target = sorted_set(target);
    let mut last = Vec::new();
    for t in 0..=t_max {
        let p = panorama(sys, space, window, t, cap)?;
        let top = p.layers.last().unwrap();
        let missing: Vec<VertexId> = target
            .iter()
            .filter(|v| top.binary_search(v).is_err())
            .cloned()
            .collect();
        if missing.is_empty() {
            return Ok(WindowCheck {
                covered: true,
                first_t: Some(t),
                missing,
                layers: p.layers,
            });
        }
        last = p.layers;
        if t == t_max {
            return Ok(WindowCheck {
                covered: false,
                first_t: None,
                missing,
                layers: last,
            });
        }
    }
    unreachable!("loop returns at t_max; layers {last:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symsys::{ca_on_zd, full_shift, odometer_system, Configuration};
    use proptest::prelude::*;

    fn idx(v: std::ops::RangeInclusive<i64>) -> Vec<VertexId> {
        v.map(VertexId::index).collect()
    }

    #[test]
    fn one_sided_shift_reveals_one_cell_per_step() {
        let sys = full_shift(2, false).unwrap();
        let space = PatternSpace::full(sys.alphabet());
        let p = panorama(&sys, &space, &idx(0..=0), 3, DEFAULT_PATTERN_CAP).unwrap();
        for t in 0..=3 {
            assert_eq!(p.layers[t], idx(0..=t as i64));
        }
    }

    #[test]
    fn odometer_panorama_is_stuck() {
        let (sys, space) = odometer_system(&[2]).unwrap();
        let p = panorama(&sys, &space, &idx(0..=0), 10, DEFAULT_PATTERN_CAP).unwrap();
        assert!(p.layers.iter().all(|l| l == &idx(0..=0)));
        let check = posexpansive_window_check(&sys, &space, &idx(0..=0), 5, &idx(1..=1), DEFAULT_PATTERN_CAP).unwrap();
        assert!(!check.covered);
        assert_eq!(check.missing, idx(1..=1));
    }

    #[test]
    fn window_inside_target_is_covered_at_zero() {
        let sys = full_shift(3, true).unwrap();
        let space = PatternSpace::full(sys.alphabet());
        let check = posexpansive_window_check(&sys, &space, &idx(0..=2), 0, &idx(1..=2), DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(check.first_t, Some(0));
    }

    #[test]
    fn cap_is_enforced() {
        let sys = full_shift(2, false).unwrap();
        let space = PatternSpace::full(sys.alphabet());
        match panorama(&sys, &space, &idx(0..=0), 5, 16) {
            Err(SysError::CapExceeded { required, cap }) => assert_eq!((required, cap), (64, 16)),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Pairwise oracle: `v ∈ W^t` iff no two patterns with equal prefix
    /// trajectories differ at `v`.
    fn brute_force_layers(
        sys: &SymbolicSystem,
        space: &PatternSpace,
        window: &[VertexId],
        horizon: usize,
    ) -> Vec<Vec<VertexId>> {
        let prog = ConeProgram::compile(sys, window, horizon).unwrap();
        let leaves = prog.leaves().to_vec();
        let allowed: Vec<Vec<u8>> = leaves.iter().map(|v| space.allowed(v)).collect();
        let total: usize = allowed.iter().map(Vec::len).product();
        let mut runs = Vec::new();
        for mut code in 0..total {
            let mut x = Configuration::new();
            for (v, a) in leaves.iter().zip(&allowed) {
                x.insert(v.clone(), a[code % a.len()]);
                code /= a.len();
            }
            let tr = prog.evaluate(&x).unwrap();
            runs.push((x, tr.steps));
        }
        let cones = crate::symsys::light_cone(sys, window, horizon).unwrap().cumulative;
        (0..=horizon)
            .map(|t| {
                cones[t]
                    .iter()
                    .filter(|v| {
                        runs.iter()
                            .all(|(x, a)| runs.iter().all(|(y, b)| a[..=t] != b[..=t] || x.get(v) == y.get(v)))
                    })
                    .cloned()
                    .collect()
            })
            .collect()
    }

    #[test]
    fn agrees_with_pairwise_oracle_on_rule_90() {
        // x_{-1} xor x_{1} on Z with window {0}
        let sys = ca_on_zd(2, 1, vec![vec![-1], vec![1]], vec![0, 1, 1, 0]).unwrap();
        let space = PatternSpace::full(sys.alphabet());
        let w = idx(0..=1);
        let p = panorama(&sys, &space, &w, 2, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(p.layers, brute_force_layers(&sys, &space, &w, 2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_ca_panoramas_match_oracle(table in proptest::collection::vec(0u8..2, 8), t in 0usize..3) {
            let sys = ca_on_zd(2, 1, vec![vec![-1], vec![0], vec![1]], table).unwrap();
            let space = PatternSpace::full(sys.alphabet());
            let w = idx(0..=0);
            let p = panorama(&sys, &space, &w, t, DEFAULT_PATTERN_CAP).unwrap();
            prop_assert_eq!(&p.layers, &brute_force_layers(&sys, &space, &w, t));
            prop_assert_eq!(&p.layers[0], &w);
            for pair in p.layers.windows(2) {
                prop_assert!(pair[0].iter().all(|v| pair[1].contains(v)));
            }
        }
    }
}
