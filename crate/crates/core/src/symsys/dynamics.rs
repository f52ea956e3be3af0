use std::collections::{BTreeSet, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{light_cone, sorted_set, ConeProgram, Configuration, PatternSpace, Symbol, SymbolicSystem, SysError};
use crate::netgraph::{in_ball, BallGrower, Subisometry, SubisometryReport, VertexId};

type TrajectorySet = HashSet<Vec<Vec<Symbol>>>;

/// A cell entering the light cone of `v` at time `t` from outside `B(v, R)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SensitivityCertificate {
    pub t: usize,
    pub w: VertexId,
}

/// Least `t ≤ t_max` (then least `w`) with `w ∈ Φ^t_in(v) ∖ B(v, R)`.
pub fn sensitivity_certificate(
    sys: &SymbolicSystem,
    v: &VertexId,
    radius: usize,
    t_max: usize,
) -> Result<Option<SensitivityCertificate>, SysError> {
    let ball = in_ball(sys.graph(), std::slice::from_ref(v), radius)?;
    let cone = light_cone(sys, std::slice::from_ref(v), t_max)?;
    for (t, layer) in cone.layers.iter().enumerate() {
        if let Some(w) = layer.iter().find(|w| !ball.contains(w)) {
            return Ok(Some(SensitivityCertificate { t, w: w.clone() }));
        }
    }
    Ok(None)
}

/// Outcome of the envelope search for a window.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub window: Vec<VertexId>,
    pub probe_horizon: usize,
    /// `|Φ^{[0..t]}_in(W)|` for `t = 0..=probe_horizon`.
    pub cone_sizes: Vec<usize>,
    /// The stable cone, closed under rule inputs, when one was found.
    pub envelope: Option<Vec<VertexId>>,
    /// Largest in-distance from `W` to a cone cell, if within the cap.
    pub reach: Option<usize>,
    /// Distinct trajectories over `[0..probe_horizon]` from all patterns on
    /// the envelope.
    pub trajectories: Option<usize>,
}

impl Envelope {
    pub fn certified(&self) -> bool {
        self.envelope.is_some()
    }
}

fn stable_cone(sizes: &[usize]) -> bool {
    let h = sizes.len() - 1;
    sizes[h / 2..].iter().all(|&s| s == sizes[h])
}

/// Searches for the envelope of `W`: a finite set `U` whose pattern fixes the
/// whole forward trajectory of `W`.
///
/// A certificate is issued only when the cone stops growing over the second
/// half of the probe window and is closed under rule inputs; the latter makes
/// `U` valid for every horizon, not just the probed one.
pub fn equicontinuity_envelope(
    sys: &SymbolicSystem,
    space: &PatternSpace,
    window: &[VertexId],
    probe_horizon: usize,
    reach_cap: usize,
    cap: u128,
) -> Result<Envelope, SysError> {
    let window = sorted_set(window);
    let cone = light_cone(sys, &window, probe_horizon)?;
    let cone_sizes: Vec<usize> = cone.cumulative.iter().map(Vec::len).collect();
    let top = cone.cone().to_vec();

    let mut grower = BallGrower::new(sys.graph(), &window)?;
    grower.grow_to(reach_cap)?;
    let reach = top
        .iter()
        .map(|v| grower.depth_of(v))
        .collect::<Option<Vec<usize>>>()
        .map(|d| d.into_iter().max().unwrap_or(0));

    let mut envelope = Envelope {
        window: window.clone(),
        probe_horizon,
        cone_sizes,
        envelope: None,
        reach,
        trajectories: None,
    };
    if !stable_cone(&envelope.cone_sizes) {
        return Ok(envelope);
    }
    let closed: BTreeSet<VertexId> = top.iter().cloned().collect();
    for v in &top {
        if sys.rule_at(v)?.inputs().iter().any(|u| !closed.contains(u)) {
            return Ok(envelope);
        }
    }
    let y = trajectory_set(sys, space, &window, probe_horizon, cap)?;
    envelope.trajectories = Some(y.len());
    envelope.envelope = Some(top);
    Ok(envelope)
}

/// All trajectories of `W` over `[0..horizon]` from patterns on its cone.
fn trajectory_set(
    sys: &SymbolicSystem,
    space: &PatternSpace,
    window: &[VertexId],
    horizon: usize,
    cap: u128,
) -> Result<HashSet<Vec<Vec<Symbol>>>, SysError> {
    let prog = ConeProgram::compile(sys, window, horizon)?;
    let leaves = prog.leaves();
    let required = space.pattern_count(leaves);
    if required > cap {
        return Err(SysError::CapExceeded { required, cap });
    }
    let allowed: Vec<Vec<Symbol>> = leaves.iter().map(|v| space.allowed(v)).collect();
    let mut digits = vec![0usize; leaves.len()];
    let mut buf = vec![0; prog.slot_count()];
    let mut out = HashSet::new();
    loop {
        for (i, a) in allowed.iter().enumerate() {
            buf[i] = a[digits[i]];
        }
        prog.run(&mut buf);
        out.insert(prog.read(&buf));
        let mut p = 0;
        loop {
            if p == leaves.len() {
                return Ok(out);
            }
            digits[p] += 1;
            if digits[p] < allowed[p].len() {
                break;
            }
            digits[p] = 0;
            p += 1;
        }
    }
}

/// One level `(Y_n, σ_n)` of the finite-horizon inverse-limit check.
#[derive(Debug, Clone, Serialize)]
pub struct FactorLevel {
    pub window: Vec<VertexId>,
    pub envelope: Vec<VertexId>,
    /// `|Y_n|`: distinct trajectories over `[0..horizon]`.
    pub y_size: usize,
    /// `σ_n` maps `Y_n` bijectively onto its truncation to `[0..horizon-1]`.
    pub sigma_is_permutation: bool,
    /// Projection from this level onto the previous one is onto; `None` at the first level.
    pub projection_onto_previous: Option<bool>,
    /// `|Y_n|` is a multiple of the previous `|Y_{n-1}|`.
    pub multiple_of_previous: Option<bool>,
}

pub fn odometer_factor_chain(
    sys: &SymbolicSystem,
    space: &PatternSpace,
    windows: &[Vec<VertexId>],
    horizon: usize,
    cap: u128,
) -> Result<Vec<FactorLevel>, SysError> {
    if horizon < 1 {
        return Err(SysError::Invalid("horizon must be at least 1".into()));
    }
    let mut levels: Vec<FactorLevel> = Vec::new();
    let mut previous: Option<(Vec<VertexId>, TrajectorySet)> = None;
    for w in windows {
        let w = sorted_set(w);
        if let Some((pw, _)) = &previous {
            if !pw.iter().all(|v| w.binary_search(v).is_ok()) {
                return Err(SysError::Invalid("windows must be nested".into()));
            }
        }
        let probe = horizon.max(4);
        let env = equicontinuity_envelope(sys, space, &w, probe, probe, cap)?;
        let Some(envelope) = env.envelope else {
            return Err(SysError::NotEquicontinuous(w));
        };
        let y = trajectory_set(sys, space, &w, horizon, cap)?;
        let truncated: HashSet<Vec<Vec<Symbol>>> = y.iter().map(|t| t[..horizon].to_vec()).collect();
        let shifted: HashSet<Vec<Vec<Symbol>>> = y.iter().map(|t| t[1..].to_vec()).collect();
        let sigma_is_permutation = truncated.len() == y.len() && shifted == truncated;
        let (projection_onto_previous, multiple_of_previous) = match &previous {
            None => (None, None),
            Some((pw, py)) => {
                let pos: Vec<usize> = pw.iter().map(|v| w.binary_search(v).unwrap()).collect();
                let projected: HashSet<Vec<Vec<Symbol>>> = y
                    .iter()
                    .map(|t| t.iter().map(|row| pos.iter().map(|&i| row[i]).collect()).collect())
                    .collect();
                (Some(&projected == py), Some(y.len() % py.len() == 0))
            }
        };
        levels.push(FactorLevel {
            window: w.clone(),
            envelope,
            y_size: y.len(),
            sigma_is_permutation,
            projection_onto_previous,
            multiple_of_previous,
        });
        previous = Some((w, y));
    }
    Ok(levels)
}

/// Violations of the subsymmetry conditions on a probe.
#[derive(Debug, Clone, Serialize)]
pub struct SubsymmetryReport {
    pub network: SubisometryReport,
    /// Probe vertices with `allowed(v) ≠ allowed(τ(v))`.
    pub allowed_mismatch: Vec<VertexId>,
    /// `(sample, v)` with `Φ(x)_{τ(v)} ≠ φ_v(x ∘ τ)`.
    pub commutation_failures: Vec<(usize, VertexId)>,
    pub samples: usize,
}

impl SubsymmetryReport {
    pub fn passed(&self) -> bool {
        self.network.passed() && self.allowed_mismatch.is_empty() && self.commutation_failures.is_empty()
    }
}

/// With `τ_*(x)_v = x_{τ(v)}`, checks `τ_* ∘ Φ = Φ ∘ τ_*` at each probe vertex
/// on random patterns, plus the network and pattern-space conditions.
pub fn subsymmetry_check(
    sys: &SymbolicSystem,
    tau: &Subisometry,
    probe: &[VertexId],
    space: &PatternSpace,
    samples: usize,
    seed: u64,
) -> Result<SubsymmetryReport, SysError> {
    let probe = sorted_set(probe);
    let network = tau.check(sys.graph(), &probe)?;
    let graph = sys.graph();
    let allowed_mismatch = probe
        .iter()
        .filter(|v| {
            let tv = tau.apply(v);
            !graph.contains(&tv) || space.allowed(v) != space.allowed(&tv)
        })
        .cloned()
        .collect();

    let live: Vec<VertexId> = probe
        .iter()
        .filter(|v| graph.contains(&tau.apply(v)))
        .cloned()
        .collect();
    let mut domain = BTreeSet::new();
    let mut plans = Vec::new();
    for v in &live {
        let tv = tau.apply(v);
        let image_rule = sys.rule_at(&tv)?;
        let rule = sys.rule_at(v)?;
        let moved: Vec<VertexId> = rule.inputs().iter().map(|u| tau.apply(u)).collect();
        if moved.iter().any(|u| !graph.contains(u)) {
            continue;
        }
        domain.extend(image_rule.inputs().iter().cloned());
        domain.extend(moved.iter().cloned());
        plans.push((v.clone(), image_rule, rule, moved));
    }
    let domain: Vec<VertexId> = domain.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut commutation_failures = Vec::new();
    for k in 0..samples {
        let x: Configuration = space.sample(&domain, &mut rng);
        for (v, image_rule, rule, moved) in &plans {
            let lhs_args: Vec<Symbol> = image_rule.inputs().iter().map(|u| x.get(u).unwrap()).collect();
            let rhs_args: Vec<Symbol> = moved.iter().map(|u| x.get(u).unwrap()).collect();
            if image_rule.apply(&lhs_args) != rule.apply(&rhs_args) {
                commutation_failures.push((k, v.clone()));
            }
        }
    }
    Ok(SubsymmetryReport {
        network,
        allowed_mismatch,
        commutation_failures,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symsys::{full_shift, odometer_system, shift_extension, DEFAULT_PATTERN_CAP};

    fn idx(v: &[i64]) -> Vec<VertexId> {
        v.iter().map(|&n| VertexId::index(n)).collect()
    }

    #[test]
    fn shift_certificate() {
        let sys = full_shift(2, false).unwrap();
        let c = sensitivity_certificate(&sys, &VertexId::index(0), 3, 10).unwrap();
        assert_eq!(
            c,
            Some(SensitivityCertificate {
                t: 4,
                w: VertexId::index(4)
            })
        );
    }

    #[test]
    fn odometer_has_no_certificate() {
        let (sys, _) = odometer_system(&[2]).unwrap();
        for r in 0..4 {
            assert_eq!(sensitivity_certificate(&sys, &VertexId::index(0), r, 20).unwrap(), None);
        }
    }

    #[test]
    fn odometer_envelope_is_the_window() {
        let (sys, space) = odometer_system(&[2]).unwrap();
        let env = equicontinuity_envelope(&sys, &space, &idx(&[0, 1]), 16, 16, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(env.envelope, Some(idx(&[0, 1])));
        assert_eq!(env.trajectories, Some(4));
        assert_eq!(env.reach, Some(0));
    }

    #[test]
    fn shift_has_no_envelope() {
        let sys = full_shift(2, false).unwrap();
        let space = PatternSpace::full(sys.alphabet());
        let env = equicontinuity_envelope(&sys, &space, &idx(&[0]), 8, 8, DEFAULT_PATTERN_CAP).unwrap();
        assert!(!env.certified());
        assert_eq!(env.cone_sizes, (1..=9).collect::<Vec<_>>());
    }

    #[test]
    fn binary_odometer_chain() {
        let (sys, space) = odometer_system(&[2]).unwrap();
        let levels = odometer_factor_chain(&sys, &space, &[idx(&[0]), idx(&[0, 1])], 8, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(levels[0].y_size, 2);
        assert_eq!(levels[1].y_size, 4);
        assert!(levels.iter().all(|l| l.sigma_is_permutation));
        assert_eq!(levels[1].projection_onto_previous, Some(true));
        assert_eq!(levels[1].multiple_of_previous, Some(true));
    }

    #[test]
    fn mixed_radix_odometer_chain() {
        let (sys, space) = odometer_system(&[3, 2]).unwrap();
        let levels = odometer_factor_chain(&sys, &space, &[idx(&[0, 1])], 12, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(levels[0].y_size, 6);
        assert!(levels[0].sigma_is_permutation);
    }

    #[test]
    fn shift_is_not_an_odometer_bundle() {
        let sys = full_shift(2, false).unwrap();
        let space = PatternSpace::full(sys.alphabet());
        let err = odometer_factor_chain(&sys, &space, &[idx(&[0])], 6, DEFAULT_PATTERN_CAP).unwrap_err();
        assert!(matches!(err, SysError::NotEquicontinuous(_)));
    }

    #[test]
    fn two_sided_shift_commutes_with_translation() {
        let sys = full_shift(2, true).unwrap();
        let space = PatternSpace::full(sys.alphabet());
        let tau = Subisometry::translation("+1", &[1]);
        let probe: Vec<VertexId> = (-5..=5).map(VertexId::index).collect();
        let rep = subsymmetry_check(&sys, &tau, &probe, &space, 50, 9).unwrap();
        assert!(rep.passed(), "{rep:?}");
        let rep = subsymmetry_check(&sys, &Subisometry::identity(), &probe, &space, 10, 9).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn shift_extension_commutes_with_vertical_translation() {
        let base = full_shift(2, true).unwrap();
        let ext = shift_extension(&base, vec![0, 1, 1, 0]).unwrap();
        let space = PatternSpace::full(ext.alphabet());
        let tau = Subisometry::new("n + 1", |v| {
            let (base, n) = v.split_last().unwrap();
            base.extended(n + 1)
        });
        let probe: Vec<VertexId> = (-3..=3)
            .flat_map(|z| (-2..=2).map(move |n| VertexId::from([z, n])))
            .collect();
        let rep = subsymmetry_check(&ext, &tau, &probe, &space, 100, 4).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }
}
