//! Pattern counts over balls and along subisometry orbits.
//!
//! Pattern spaces here are products, so `|X_U|` is the product of the
//! per-vertex alphabet sizes and every count below is exact.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::netgraph::{BallGrower, Digraph, GraphError, Subisometry, VertexId};
use crate::symsys::PatternSpace;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("radius window needs 2 <= r_min < r_max, got [{0}, {1}]")]
    InvalidWindow(usize, usize),
    #[error("balls {first} and {second} of family {family} share vertex {vertex}")]
    NonDisjoint {
        family: usize,
        first: usize,
        second: usize,
        vertex: VertexId,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// `|X_U|` as a multiset of per-vertex alphabet sizes. Exact and additive
/// over disjoint unions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PatternCount {
    factors: BTreeMap<usize, usize>,
}

impl PatternCount {
    pub fn of(space: &PatternSpace, region: &[VertexId]) -> Self {
        let mut c = PatternCount::default();
        for v in region {
            *c.factors.entry(space.allowed(v).len()).or_default() += 1;
        }
        c
    }

    /// Alphabet size to number of vertices with that many allowed symbols.
    pub fn factors(&self) -> &BTreeMap<usize, usize> {
        &self.factors
    }

    pub fn log2(&self) -> f64 {
        self.factors
            .iter()
            .map(|(&size, &mult)| mult as f64 * (size as f64).log2())
            .sum()
    }

    pub fn merged(&self, other: &PatternCount) -> PatternCount {
        let mut out = self.clone();
        for (&size, &mult) in &other.factors {
            *out.factors.entry(size).or_default() += mult;
        }
        out
    }

    /// Vertices with a single allowed symbol contribute nothing.
    fn informative(&self) -> BTreeMap<usize, usize> {
        self.factors
            .iter()
            .filter(|(&s, _)| s > 1)
            .map(|(&s, &m)| (s, m))
            .collect()
    }
}

/// `log₂|X_U|`.
pub fn pattern_log_count(space: &PatternSpace, region: &[VertexId]) -> f64 {
    let mut u = region.to_vec();
    u.sort();
    u.dedup();
    PatternCount::of(space, &u).log2()
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    pub vertex: VertexId,
    pub radii: Vec<usize>,
    pub log2_counts: Vec<f64>,
    pub ball_sizes: Vec<usize>,
    /// `log₂|X_{B(v,r)}| / |B(v,r)|`.
    pub ratios: Vec<f64>,
    /// Min and max ratio over the upper half of the window.
    pub lower_proxy: f64,
    pub upper_proxy: f64,
}

/// Ratios `log₂|X_{B(v,r)}| / |B(v,r)|` for `r ∈ [r_min, r_max]`.
pub fn ball_entropy(
    space: &PatternSpace,
    g: &dyn Digraph,
    v: &VertexId,
    r_min: usize,
    r_max: usize,
) -> Result<EntropyEstimate, EntropyError> {
    if r_min < 2 || r_min >= r_max {
        return Err(EntropyError::InvalidWindow(r_min, r_max));
    }
    let mut grower = BallGrower::new(g, std::slice::from_ref(v))?;
    let mut count = PatternCount::of(space, std::slice::from_ref(v));
    let mut radii = Vec::new();
    let mut log2_counts = Vec::new();
    let mut ball_sizes = Vec::new();
    let mut ratios = Vec::new();
    for r in 1..=r_max {
        grower.step()?;
        count = count.merged(&PatternCount::of(space, grower.frontier()));
        if r >= r_min {
            let l = count.log2();
            radii.push(r);
            log2_counts.push(l);
            ball_sizes.push(grower.size());
            ratios.push(l / grower.size() as f64);
        }
    }
    let tail = &ratios[ratios.len() / 2..];
    Ok(EntropyEstimate {
        vertex: v.clone(),
        lower_proxy: tail.iter().copied().fold(f64::INFINITY, f64::min),
        upper_proxy: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        radii,
        log2_counts,
        ball_sizes,
        ratios,
    })
}

/// Inf of lower proxies and sup of upper proxies over a finite probe set.
/// Bounded by the probe: nothing is claimed about vertices outside it.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntropyBounds {
    pub probes: Vec<VertexId>,
    pub lower: f64,
    pub upper: f64,
}

pub fn probe_entropy_bounds(
    space: &PatternSpace,
    g: &dyn Digraph,
    probes: &[VertexId],
    r_min: usize,
    r_max: usize,
) -> Result<ProbeEntropyBounds, EntropyError> {
    if probes.is_empty() {
        return Err(EntropyError::Invalid("empty probe set".into()));
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for v in probes {
        let e = ball_entropy(space, g, v, r_min, r_max)?;
        lower = lower.min(e.lower_proxy);
        upper = upper.max(e.upper_proxy);
    }
    Ok(ProbeEntropyBounds {
        probes: probes.to_vec(),
        lower,
        upper,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyIndependence {
    pub balls: Vec<(VertexId, usize)>,
    pub union_log2: f64,
    pub sum_log2: f64,
    /// `log₂|X_{⊔B}| / Σ log₂|X_B|`, or 1 when every ball is trivial.
    pub ratio: f64,
    /// The factor multisets agree, so additivity holds exactly.
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakIndependenceReport {
    pub families: Vec<FamilyIndependence>,
    /// Least ratio over the tested families.
    pub epsilon: f64,
    pub all_exact: bool,
}

/// Checks `|X_{⊔B}| ≥ (∏|X_B|)^ε` over each family of pairwise disjoint balls.
pub fn weak_independence_report(
    space: &PatternSpace,
    g: &dyn Digraph,
    families: &[Vec<(VertexId, usize)>],
) -> Result<WeakIndependenceReport, EntropyError> {
    let mut out = Vec::with_capacity(families.len());
    for (fi, family) in families.iter().enumerate() {
        let mut owner: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut sum = PatternCount::default();
        for (bi, (center, r)) in family.iter().enumerate() {
            let mut grower = BallGrower::new(g, std::slice::from_ref(center))?;
            grower.grow_to(*r)?;
            let members = grower.members();
            for u in &members {
                if let Some(&first) = owner.get(u) {
                    return Err(EntropyError::NonDisjoint {
                        family: fi,
                        first,
                        second: bi,
                        vertex: u.clone(),
                    });
                }
                owner.insert(u.clone(), bi);
            }
            sum = sum.merged(&PatternCount::of(space, &members));
        }
        let union: Vec<VertexId> = owner.into_keys().collect();
        let joint = PatternCount::of(space, &union);
        let (union_log2, sum_log2) = (joint.log2(), sum.log2());
        let exact = joint.informative() == sum.informative();
        let ratio = if exact || sum_log2 == 0.0 {
            1.0
        } else {
            union_log2 / sum_log2
        };
        out.push(FamilyIndependence {
            balls: family.clone(),
            union_log2,
            sum_log2,
            ratio,
            exact,
        });
    }
    Ok(WeakIndependenceReport {
        epsilon: out.iter().map(|f| f.ratio).fold(1.0, f64::min),
        all_exact: out.iter().all(|f| f.exact),
        families: out,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TauEntropyProfile {
    pub tau: String,
    /// `N = 1..=N_max`.
    pub n: Vec<usize>,
    /// `|F(N)|` with `F(N) = ⋃_{n ≤ N} τⁿ(F)`.
    pub set_sizes: Vec<usize>,
    pub log2_counts: Vec<f64>,
    /// `log₂|X_{F(N)}| / N`.
    pub values: Vec<f64>,
}

pub fn tau_entropy_profile(
    space: &PatternSpace,
    tau: &Subisometry,
    f: &[VertexId],
    n_max: usize,
) -> Result<TauEntropyProfile, EntropyError> {
    if f.is_empty() || n_max == 0 {
        return Err(EntropyError::Invalid("need a nonempty F and N_max >= 1".into()));
    }
    let mut current: Vec<VertexId> = f.to_vec();
    let mut union: BTreeSet<VertexId> = current.iter().cloned().collect();
    let mut count = PatternCount::of(space, &union.iter().cloned().collect::<Vec<_>>());
    let mut profile = TauEntropyProfile {
        tau: tau.label().to_string(),
        n: Vec::new(),
        set_sizes: Vec::new(),
        log2_counts: Vec::new(),
        values: Vec::new(),
    };
    for n in 1..=n_max {
        current = current.iter().map(|v| tau.apply(v)).collect();
        let fresh: Vec<VertexId> = current.iter().filter(|v| union.insert((*v).clone())).cloned().collect();
        count = count.merged(&PatternCount::of(space, &fresh));
        let l = count.log2();
        profile.n.push(n);
        profile.set_sizes.push(union.len());
        profile.log2_counts.push(l);
        profile.values.push(l / n as f64);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::{cex_system, counterexample_graph};
    use crate::netgraph::{cayley_zd, in_ball};
    use crate::symsys::{Alphabet, PatternSpace};
    use proptest::prelude::*;

    fn binary() -> PatternSpace {
        PatternSpace::full(&Alphabet::new(2).unwrap())
    }

    fn idx(v: impl IntoIterator<Item = i64>) -> Vec<VertexId> {
        v.into_iter().map(VertexId::index).collect()
    }

    #[test]
    fn log_counts() {
        assert_eq!(pattern_log_count(&binary(), &idx(0..7)), 7.0);
        let (_, cex) = cex_system();
        // Seven a-bits plus b-bits at boxes 0, 2 and 6.
        assert_eq!(pattern_log_count(&cex, &idx(0..7)), 10.0);
        let frozen = PatternSpace::new("frozen", |_| vec![0]);
        assert_eq!(pattern_log_count(&frozen, &idx(0..7)), 0.0);
    }

    #[test]
    fn full_shift_ratios_are_one() {
        let e = ball_entropy(&binary(), &cayley_zd(2), &VertexId::from([0, 0]), 2, 8).unwrap();
        assert!(e.ratios.iter().all(|&r| r == 1.0));
        assert_eq!(e.ball_sizes[0], 13);
    }

    #[test]
    fn counterexample_ratios_thin_out() {
        let (_, cex) = cex_system();
        let e = ball_entropy(&cex, &counterexample_graph(), &VertexId::index(0), 2, 40).unwrap();
        // Five cells, three of them boxes.
        assert_eq!(e.ratios[0], 1.6);
        assert_eq!(e.ratios[1], 1.5);
        assert!(e.ratios[1..].iter().all(|&r| r > 1.0 && r <= 1.5));
        assert!(e.ratios.windows(2).all(|w| w[1] <= w[0]));
        assert!((e.ratios[3] - 1.375).abs() < 1e-12);
    }

    #[test]
    fn frozen_space_has_zero_ratios() {
        let frozen = PatternSpace::new("frozen", |_| vec![1]);
        let e = ball_entropy(&frozen, &cayley_zd(1), &VertexId::index(0), 2, 5).unwrap();
        assert!(e.ratios.iter().all(|&r| r == 0.0));
        assert!(matches!(
            ball_entropy(&frozen, &cayley_zd(1), &VertexId::index(0), 1, 5),
            Err(EntropyError::InvalidWindow(1, 5))
        ));
    }

    #[test]
    fn probe_bounds_bracket_the_ratios() {
        let (_, cex) = cex_system();
        let b = probe_entropy_bounds(&cex, &counterexample_graph(), &idx([0, 1, 5]), 4, 20).unwrap();
        assert!(1.0 < b.lower && b.lower <= b.upper && b.upper <= 2.0);
    }

    #[test]
    fn overlapping_balls_are_rejected() {
        let fam = vec![vec![(VertexId::index(0), 2), (VertexId::index(3), 2)]];
        assert!(matches!(
            weak_independence_report(&binary(), &cayley_zd(1), &fam),
            Err(EntropyError::NonDisjoint {
                family: 0,
                first: 0,
                second: 1,
                ..
            })
        ));
    }

    #[test]
    fn product_spaces_are_additive() {
        let (_, cex) = cex_system();
        let fam = vec![
            vec![(VertexId::index(0), 1)],
            vec![(VertexId::index(0), 1), (VertexId::index(20), 3)],
        ];
        let r = weak_independence_report(&cex, &counterexample_graph(), &fam).unwrap();
        assert!(r.all_exact);
        assert_eq!(r.epsilon, 1.0);
    }

    #[test]
    fn line_shift_profile() {
        let tau = Subisometry::translation("+1", &[1]);
        let p = tau_entropy_profile(&binary(), &tau, &idx([0]), 10).unwrap();
        for (n, v) in p.n.iter().zip(&p.values) {
            assert!((v - (*n as f64 + 1.0) / *n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_orbit_profile_decays() {
        let tau = Subisometry::new("swap", |v| VertexId::index(1 - v.as_index().unwrap()));
        let p = tau_entropy_profile(&binary(), &tau, &idx([0, 1]), 8).unwrap();
        assert!(p.set_sizes.iter().all(|&s| s == 2));
        assert_eq!(p.values[7], 2.0 / 8.0);
    }

    #[test]
    fn lattice_profile_counts_the_swept_band() {
        let tau = Subisometry::translation("(1,0)", &[1, 0]);
        let f = in_ball(&cayley_zd(2), &[VertexId::from([0, 0])], 2).unwrap().members;
        let p = tau_entropy_profile(&binary(), &tau, &f, 20).unwrap();
        for (n, s) in p.n.iter().zip(&p.set_sizes) {
            assert_eq!(*s, 13 + 5 * n);
        }
        // A ball of radius r has log₂|X_B| = 13 here; with speed 1 and ε = 1
        // the averaged count stays above 13/(4r).
        assert!(p.values.iter().all(|&v| v > 13.0 / 8.0));
    }

    proptest! {
        #[test]
        fn counts_are_additive(a in 0i64..30, len_a in 1i64..10, gap in 0i64..5, len_b in 1i64..10) {
            let (_, cex) = cex_system();
            let u = idx(a..a + len_a);
            let w = idx(a + len_a + gap..a + len_a + gap + len_b);
            let both: Vec<VertexId> = u.iter().chain(&w).cloned().collect();
            let lhs = pattern_log_count(&cex, &both);
            let rhs = pattern_log_count(&cex, &u) + pattern_log_count(&cex, &w);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn translated_counts_agree(x in -10i64..10, y in -10i64..10, k in 0usize..6) {
            let tau = Subisometry::translation("(1,0)", &[1, 0]);
            let f = in_ball(&cayley_zd(2), &[VertexId::from([x, y])], 2).unwrap().members;
            let moved: Vec<VertexId> = f.iter().map(|v| tau.iterate(v, k)).collect();
            prop_assert_eq!(PatternCount::of(&binary(), &f), PatternCount::of(&binary(), &moved));
        }
    }
}
