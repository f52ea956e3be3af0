use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SysError;
use crate::netgraph::VertexId;

pub type Symbol = u8;

/// Finite alphabet `{0, .., size-1}` with optional display labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, SysError> {
        if !(2..=256).contains(&size) {
            return Err(SysError::InvalidAlphabet(size));
        }
        Ok(Alphabet { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self, SysError> {
        let mut a = Alphabet::new(labels.len())?;
        a.labels = Some(labels);
        Ok(a)
    }

    /// Bits needed to store one symbol.
    pub fn bits(&self) -> u32 {
        usize::BITS - (self.size - 1).leading_zeros()
    }
}

type RuleFn = dyn Fn(&[Symbol]) -> Symbol + Send + Sync;

#[derive(Clone)]
enum RuleBody {
    /// Row-major over input tuples, first input most significant.
    Table(Arc<[Symbol]>),
    Func(Arc<RuleFn>),
}

/// Local rule `φ_v: A^{inputs} → A`. Inputs are kept in canonical vertex
/// order; tables and closures receive symbols in that order.
#[derive(Clone)]
pub struct LocalRule {
    inputs: Vec<VertexId>,
    base: usize,
    body: RuleBody,
}

impl fmt::Debug for LocalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.body {
            RuleBody::Table(_) => "table",
            RuleBody::Func(_) => "closure",
        };
        f.debug_struct("LocalRule")
            .field("inputs", &self.inputs)
            .field("kind", &kind)
            .finish()
    }
}

fn check_sorted(inputs: &[VertexId]) -> Result<(), SysError> {
    if inputs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SysError::UnsortedInputs(inputs.to_vec()));
    }
    Ok(())
}

impl LocalRule {
    pub fn from_table(inputs: Vec<VertexId>, alphabet: &Alphabet, table: Vec<Symbol>) -> Result<Self, SysError> {
        check_sorted(&inputs)?;
        let expected = table_len(alphabet.size, inputs.len())?;
        if table.len() != expected {
            return Err(SysError::TableSize {
                expected,
                found: table.len(),
            });
        }
        if let Some(&s) = table.iter().find(|&&s| s as usize >= alphabet.size) {
            return Err(SysError::InvalidSymbol(s));
        }
        Ok(LocalRule {
            inputs,
            base: alphabet.size,
            body: RuleBody::Table(table.into()),
        })
    }

    pub(crate) fn from_shared_table(
        inputs: Vec<VertexId>,
        alphabet: &Alphabet,
        table: Arc<[Symbol]>,
    ) -> Result<Self, SysError> {
        check_sorted(&inputs)?;
        let expected = table_len(alphabet.size, inputs.len())?;
        if table.len() != expected {
            return Err(SysError::TableSize {
                expected,
                found: table.len(),
            });
        }
        Ok(LocalRule {
            inputs,
            base: alphabet.size,
            body: RuleBody::Table(table),
        })
    }

    pub fn from_fn(
        inputs: Vec<VertexId>,
        alphabet: &Alphabet,
        f: impl Fn(&[Symbol]) -> Symbol + Send + Sync + 'static,
    ) -> Result<Self, SysError> {
        check_sorted(&inputs)?;
        Ok(LocalRule {
            inputs,
            base: alphabet.size,
            body: RuleBody::Func(Arc::new(f)),
        })
    }

    pub fn inputs(&self) -> &[VertexId] {
        &self.inputs
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    pub fn apply(&self, args: &[Symbol]) -> Symbol {
        debug_assert_eq!(args.len(), self.inputs.len());
        match &self.body {
            RuleBody::Table(t) => t[self.row(args)],
            RuleBody::Func(f) => f(args),
        }
    }

    fn row(&self, args: &[Symbol]) -> usize {
        args.iter().fold(0, |acc, &s| acc * self.base + s as usize)
    }

    /// Full table, materialising closures. Fails above `max_len` entries.
    pub fn table(&self, max_len: usize) -> Result<Vec<Symbol>, SysError> {
        if let RuleBody::Table(t) = &self.body {
            return Ok(t.to_vec());
        }
        let len = table_len(self.base, self.arity())?;
        if len > max_len {
            return Err(SysError::TableSize {
                expected: max_len,
                found: len,
            });
        }
        let mut args = vec![0; self.arity()];
        let mut out = Vec::with_capacity(len);
        for row in 0..len {
            let mut r = row;
            for a in args.iter_mut().rev() {
                *a = (r % self.base) as Symbol;
                r /= self.base;
            }
            out.push(self.apply(&args));
        }
        Ok(out)
    }
}

/// Reorders a table listed over `inputs` in the given order into canonical
/// (sorted) input order. Inputs must be distinct.
pub(crate) fn sort_rule_inputs(
    inputs: &[VertexId],
    table: &[Symbol],
    base: usize,
) -> Result<(Vec<VertexId>, Vec<Symbol>), SysError> {
    let arity = inputs.len();
    let expected = table_len(base, arity)?;
    if table.len() != expected {
        return Err(SysError::TableSize {
            expected,
            found: table.len(),
        });
    }
    let mut order: Vec<usize> = (0..arity).collect();
    order.sort_by(|&a, &b| inputs[a].cmp(&inputs[b]));
    let sorted: Vec<VertexId> = order.iter().map(|&i| inputs[i].clone()).collect();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(SysError::Invalid(format!("repeated rule input in {inputs:?}")));
    }
    // position of each given input within the sorted order
    let mut rank = vec![0; arity];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }
    let mut args = vec![0usize; arity];
    let mut out = vec![0; expected];
    for (row, slot) in out.iter_mut().enumerate() {
        let mut r = row;
        for a in args.iter_mut().rev() {
            *a = r % base;
            r /= base;
        }
        let given_row = (0..arity).fold(0, |acc, i| acc * base + args[rank[i]]);
        *slot = table[given_row];
    }
    Ok((sorted, out))
}

pub(crate) fn table_len(base: usize, arity: usize) -> Result<usize, SysError> {
    u32::try_from(arity)
        .ok()
        .and_then(|k| base.checked_pow(k))
        .ok_or(SysError::TableSize {
            expected: usize::MAX,
            found: usize::MAX,
        })
}

/// Per-coordinate properness: a witness pair of argument tuples differing
/// only at that coordinate with different outputs, or `None`.
#[derive(Debug, Clone, Serialize)]
pub struct ProperReport {
    pub proper: bool,
    pub witnesses: Vec<Option<(Vec<Symbol>, Vec<Symbol>)>>,
}

/// Exhaustive scan for essential coordinates over the whole alphabet.
pub fn check_proper(rule: &LocalRule, alphabet: &Alphabet) -> Result<ProperReport, SysError> {
    let k = rule.arity();
    let base = alphabet.size;
    let len = table_len(base, k)?;
    let mut witnesses: Vec<Option<(Vec<Symbol>, Vec<Symbol>)>> = vec![None; k];
    let mut args = vec![0 as Symbol; k];
    for row in 0..len {
        let mut r = row;
        for a in args.iter_mut().rev() {
            *a = (r % base) as Symbol;
            r /= base;
        }
        let out = rule.apply(&args);
        for i in 0..k {
            if witnesses[i].is_some() || args[i] != 0 {
                continue;
            }
            let mut other = args.clone();
            for s in 1..base {
                other[i] = s as Symbol;
                if rule.apply(&other) != out {
                    witnesses[i] = Some((args.clone(), other.clone()));
                    break;
                }
            }
        }
        if witnesses.iter().all(Option::is_some) {
            break;
        }
    }
    Ok(ProperReport {
        proper: witnesses.iter().all(Option::is_some),
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_inputs() -> Vec<VertexId> {
        vec![VertexId::index(0), VertexId::index(1)]
    }

    #[test]
    fn xor_is_proper() {
        let a = Alphabet::new(2).unwrap();
        let rule = LocalRule::from_table(two_inputs(), &a, vec![0, 1, 1, 0]).unwrap();
        let rep = check_proper(&rule, &a).unwrap();
        assert!(rep.proper);
        let (x, y) = rep.witnesses[1].clone().unwrap();
        assert_eq!(x[0], y[0]);
        assert_ne!(rule.apply(&x), rule.apply(&y));
    }

    #[test]
    fn projection_is_not_proper() {
        let a = Alphabet::new(2).unwrap();
        let rule = LocalRule::from_fn(two_inputs(), &a, |x| x[0]).unwrap();
        let rep = check_proper(&rule, &a).unwrap();
        assert!(!rep.proper);
        assert!(rep.witnesses[0].is_some());
        assert!(rep.witnesses[1].is_none());
    }

    #[test]
    fn table_is_row_major_first_input_most_significant() {
        let a = Alphabet::new(3).unwrap();
        let rule = LocalRule::from_fn(two_inputs(), &a, |x| x[0]).unwrap();
        assert_eq!(rule.table(100).unwrap(), vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
        let t = LocalRule::from_table(two_inputs(), &a, rule.table(100).unwrap()).unwrap();
        assert_eq!(t.apply(&[2, 0]), 2);
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let a = Alphabet::new(2).unwrap();
        assert!(LocalRule::from_table(two_inputs(), &a, vec![0, 1, 1]).is_err());
        assert!(LocalRule::from_table(two_inputs(), &a, vec![0, 1, 1, 2]).is_err());
        let unsorted = vec![VertexId::index(1), VertexId::index(0)];
        assert!(LocalRule::from_table(unsorted, &a, vec![0, 1, 1, 0]).is_err());
        assert!(Alphabet::new(1).is_err());
    }

    #[test]
    fn reordering_matches_direct_lookup() {
        let inputs = vec![VertexId::index(5), VertexId::index(1), VertexId::index(3)];
        // f(x5, x1, x3) = (x5 + 2 x1) mod 3
        let mut table = Vec::new();
        for a in 0..3u8 {
            for b in 0..3u8 {
                for _c in 0..3u8 {
                    table.push((a + 2 * b) % 3);
                }
            }
        }
        let (sorted, t) = sort_rule_inputs(&inputs, &table, 3).unwrap();
        assert_eq!(sorted, vec![VertexId::index(1), VertexId::index(3), VertexId::index(5)]);
        let a = Alphabet::new(3).unwrap();
        let rule = LocalRule::from_table(sorted, &a, t).unwrap();
        // sorted args: (x1, x3, x5)
        assert_eq!(rule.apply(&[1, 0, 2]), (2 + 2) % 3);
        assert_eq!(rule.apply(&[2, 1, 1]), (1 + 4) % 3);
    }

    #[test]
    fn symbol_bits() {
        assert_eq!(Alphabet::new(2).unwrap().bits(), 1);
        assert_eq!(Alphabet::new(4).unwrap().bits(), 2);
        assert_eq!(Alphabet::new(5).unwrap().bits(), 3);
    }
}
