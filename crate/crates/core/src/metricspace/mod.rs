//! Cantor metrics based at an estuary, Lipschitz and Hölder checks on
//! sampled pairs, and cylinder-cover estimates of metric dimension.
//!
//! `d_{v,λ}(x, y) = λ^{-R}` where `R` is the largest radius with `x = y` on
//! `B(v, R)`. When `x` and `y` already differ at `v` the value is 1.
//! `d_{c,λ} = Σ_j c_j d_{u_j,λ}`. Configurations are finite, so every
//! distance is returned as an interval.

mod scheme;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::entropydim::pattern_log_count;
use crate::netgraph::{ols_slope, BallGrower, Digraph, GraphError, SharedGraph, VertexId};
use crate::symsys::{Configuration, PatternSpace, SymbolicSystem, SysError};

pub use scheme::{CoefficientScheme, DecayReport, EstuarySpec, MetricSpec, SchemeKind, SchemeName};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sys(#[from] SysError),
    #[error("configurations have different domains")]
    DomainMismatch,
    #[error("estuary vertex {0} lies outside the configuration domain")]
    Unreachable(VertexId),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Closed interval `[lo, hi]` containing a distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceBound {
    pub lo: f64,
    pub hi: f64,
}

impl DistanceBound {
    pub fn point(x: f64) -> Self {
        DistanceBound { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn scaled(self, c: f64) -> Self {
        DistanceBound {
            lo: self.lo * c,
            hi: self.hi * c,
        }
    }

    fn plus(self, o: DistanceBound) -> Self {
        DistanceBound {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
    }
}

/// `d_{c,λ}` on the pattern space over `graph`.
#[derive(Clone)]
pub struct BasedMetric {
    pub scheme: CoefficientScheme,
    pub lambda: f64,
    pub graph: SharedGraph,
    /// Largest radius examined per estuary vertex.
    pub radius_cap: usize,
    /// Estuary tail mass that may be left out of a distance.
    pub tolerance: f64,
}

impl std::fmt::Debug for BasedMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BasedMetric")
            .field("scheme", &self.scheme)
            .field("lambda", &self.lambda)
            .field("graph", &self.graph.describe())
            .finish()
    }
}

impl BasedMetric {
    pub fn new(scheme: CoefficientScheme, lambda: f64, graph: SharedGraph) -> Result<Self, MetricError> {
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(MetricError::Invalid(format!("lambda must exceed 1, got {lambda}")));
        }
        Ok(BasedMetric {
            scheme,
            lambda,
            graph,
            radius_cap: 256,
            tolerance: 1e-12,
        })
    }

    pub fn with_radius_cap(mut self, cap: usize) -> Self {
        self.radius_cap = cap;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    /// `λ^{-r}`.
    pub fn decay(&self, r: usize) -> f64 {
        self.lambda.powi(-(r as i32))
    }
}

/// Layers of `B(v, ·)` inside a fixed domain.
#[derive(Debug, Clone)]
struct BallFrame {
    layers: Vec<Vec<VertexId>>,
    /// The in-closure of `v` fits in the domain, so agreement on every layer
    /// means agreement everywhere upstream.
    closed: bool,
}

impl BallFrame {
    fn new(g: &dyn Digraph, v: &VertexId, domain: &BTreeSet<VertexId>, cap: usize) -> Result<Self, MetricError> {
        if !domain.contains(v) {
            return Err(MetricError::Unreachable(v.clone()));
        }
        let mut grower = BallGrower::new(g, std::slice::from_ref(v))?;
        let mut layers = vec![vec![v.clone()]];
        while layers.len() <= cap {
            grower.step()?;
            let frontier = grower.frontier();
            if frontier.is_empty() {
                return Ok(BallFrame { layers, closed: true });
            }
            if frontier.iter().any(|u| !domain.contains(u)) {
                break;
            }
            layers.push(frontier.to_vec());
        }
        Ok(BallFrame { layers, closed: false })
    }

    fn r_cap(&self) -> usize {
        self.layers.len() - 1
    }

    fn pseudo_dist(&self, lambda: f64, x: &Configuration, y: &Configuration) -> DistanceBound {
        for (r, layer) in self.layers.iter().enumerate() {
            if layer.iter().any(|u| x.get(u) != y.get(u)) {
                // Agreement holds on B(v, r - 1) only.
                return DistanceBound::point(if r == 0 { 1.0 } else { lambda.powi(1 - r as i32) });
            }
        }
        if self.closed {
            DistanceBound::point(0.0)
        } else {
            DistanceBound {
                lo: 0.0,
                hi: lambda.powi(-(self.r_cap() as i32)),
            }
        }
    }
}

fn common_domain(x: &Configuration, y: &Configuration) -> Result<BTreeSet<VertexId>, MetricError> {
    let dx = x.domain();
    if dx != y.domain() {
        return Err(MetricError::DomainMismatch);
    }
    Ok(dx.into_iter().collect())
}

/// `d_{v,λ}(x, y)`.
pub fn pseudo_dist(
    metric: &BasedMetric,
    v: &VertexId,
    x: &Configuration,
    y: &Configuration,
) -> Result<DistanceBound, MetricError> {
    let domain = common_domain(x, y)?;
    let frame = BallFrame::new(metric.graph.as_ref(), v, &domain, metric.radius_cap)?;
    Ok(frame.pseudo_dist(metric.lambda, x, y))
}

/// Precomputed ball layers for every estuary vertex in the summed prefix,
/// for repeated distance evaluation on one domain.
#[derive(Debug, Clone)]
pub struct MetricFrame {
    lambda: f64,
    coeffs: Vec<f64>,
    frames: Vec<BallFrame>,
    tail: f64,
}

impl MetricFrame {
    pub fn new(metric: &BasedMetric, domain: &[VertexId]) -> Result<Self, MetricError> {
        let domain: BTreeSet<VertexId> = domain.iter().cloned().collect();
        let len = metric.scheme.prefix_len(metric.tolerance)?;
        let mut frames = Vec::with_capacity(len);
        let mut coeffs = Vec::with_capacity(len);
        for j in 0..len {
            frames.push(BallFrame::new(
                metric.graph.as_ref(),
                &metric.scheme.vertex(j),
                &domain,
                metric.radius_cap,
            )?);
            coeffs.push(metric.scheme.coeff(j));
        }
        Ok(MetricFrame {
            lambda: metric.lambda,
            coeffs,
            frames,
            tail: metric.scheme.tail_from(len),
        })
    }

    pub fn dist(&self, x: &Configuration, y: &Configuration) -> DistanceBound {
        let mut total = DistanceBound { lo: 0.0, hi: self.tail };
        for (f, &c) in self.frames.iter().zip(&self.coeffs) {
            total = total.plus(f.pseudo_dist(self.lambda, x, y).scaled(c));
        }
        total
    }

    /// Deepest complete radius around each estuary vertex.
    pub fn radii(&self) -> Vec<usize> {
        self.frames.iter().map(BallFrame::r_cap).collect()
    }

    fn layers(&self, j: usize) -> &[Vec<VertexId>] {
        &self.frames[j].layers
    }
}

/// `d_{c,λ}(x, y)`; the estuary tail beyond the tolerance is added to `hi`.
pub fn dist(metric: &BasedMetric, x: &Configuration, y: &Configuration) -> Result<DistanceBound, MetricError> {
    let domain: Vec<VertexId> = common_domain(x, y)?.into_iter().collect();
    Ok(MetricFrame::new(metric, &domain)?.dist(x, y))
}

/// `⋃_j B(u_j, r)` over the summed estuary prefix.
pub fn estuary_ball(metric: &BasedMetric, r: usize) -> Result<Vec<VertexId>, MetricError> {
    let len = metric.scheme.prefix_len(metric.tolerance)?;
    let centers: Vec<VertexId> = (0..len).map(|j| metric.scheme.vertex(j)).collect();
    let mut g = BallGrower::new(metric.graph.as_ref(), &centers)?;
    g.grow_to(r)?;
    Ok(g.members())
}

/// Random pairs on `domain` that first differ at a random depth below a
/// random estuary vertex. Past that depth `y` is resampled with probability ½.
pub fn sample_pairs(
    space: &PatternSpace,
    frame: &MetricFrame,
    domain: &[VertexId],
    n: usize,
    seed: u64,
) -> Vec<(Configuration, Configuration)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = space.sample(domain, &mut rng);
        let mut y = x.clone();
        let j = rng.gen_range(0..frame.frames.len());
        let layers = frame.layers(j);
        let depth = rng.gen_range(0..layers.len());
        let v = &layers[depth][rng.gen_range(0..layers[depth].len())];
        let choices: Vec<_> = space.allowed(v).into_iter().filter(|&s| Some(s) != x.get(v)).collect();
        if choices.is_empty() {
            continue;
        }
        y.insert(v.clone(), choices[rng.gen_range(0..choices.len())]);
        if rng.gen_bool(0.5) {
            for layer in &layers[depth + 1..] {
                for u in layer {
                    let allowed = space.allowed(u);
                    y.insert(u.clone(), allowed[rng.gen_range(0..allowed.len())]);
                }
            }
        }
        out.push((x, y));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub lambda: f64,
    pub seed: u64,
    pub samples: usize,
    /// Pairs whose `d(x, y)` interval touches 0.
    pub skipped: usize,
    /// Largest `hi(d(Φx, Φy)) / lo(d(x, y))`.
    pub max_ratio: f64,
    /// Sample index of the largest ratio.
    pub worst_sample: Option<usize>,
    /// Pairs with ratio above `λ`.
    pub exceeding: usize,
}

/// Samples pairs on `B(U, radius + 1)` and compares `d(Φx, Φy)` on
/// `B(U, radius)` against `d(x, y)`.
pub fn lipschitz_report(
    sys: &SymbolicSystem,
    space: &PatternSpace,
    metric: &BasedMetric,
    radius: usize,
    samples: usize,
    seed: u64,
) -> Result<LipschitzReport, MetricError> {
    let inner = estuary_ball(metric, radius)?;
    let outer = estuary_ball(metric, radius + 1)?;
    let frame_in = MetricFrame::new(metric, &outer)?;
    let frame_out = MetricFrame::new(metric, &inner)?;
    let pairs = sample_pairs(space, &frame_in, &outer, samples, seed);
    let mut report = LipschitzReport {
        lambda: metric.lambda,
        seed,
        samples,
        skipped: 0,
        max_ratio: 0.0,
        worst_sample: None,
        exceeding: 0,
    };
    for (i, (x, y)) in pairs.iter().enumerate() {
        let before = frame_in.dist(x, y);
        if before.lo <= 0.0 {
            report.skipped += 1;
            continue;
        }
        let after = frame_out.dist(&sys.step_on(x, &inner)?, &sys.step_on(y, &inner)?);
        let ratio = after.hi / before.lo;
        if ratio > metric.lambda {
            report.exceeding += 1;
        }
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst_sample = Some(i);
        }
    }
    Ok(report)
}

/// Pair that breaks a Hölder bound.
#[derive(Debug, Clone, Serialize)]
pub struct HolderWitness {
    pub sample: usize,
    pub d_in: DistanceBound,
    pub d_out: DistanceBound,
    /// `constant · lo(d_in)^η`.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    pub eta: f64,
    pub constant: f64,
    pub seed: u64,
    pub samples: usize,
    pub skipped: usize,
    pub passed: bool,
    /// Pair with the largest `hi(d') / (C·lo(d)^η)`.
    pub worst: Option<HolderWitness>,
    pub violations: usize,
}

/// A map between configurations, e.g. one step of a system or a recoding.
pub type ConfigMap<'a> = dyn Fn(&Configuration) -> Result<Configuration, MetricError> + 'a;

/// Checks `d'(Γx, Γy) ≤ C · d(x, y)^η` on sampled pairs. Pairs live on
/// `domain_in`; `Γ` must return configurations on `domain_out`.
#[allow(clippy::too_many_arguments)]
pub fn holder_report(
    map: &ConfigMap<'_>,
    space: &PatternSpace,
    d_in: &BasedMetric,
    d_out: &BasedMetric,
    domain_in: &[VertexId],
    domain_out: &[VertexId],
    eta: f64,
    constant: f64,
    samples: usize,
    seed: u64,
) -> Result<HolderReport, MetricError> {
    let frame_in = MetricFrame::new(d_in, domain_in)?;
    let frame_out = MetricFrame::new(d_out, domain_out)?;
    let pairs = sample_pairs(space, &frame_in, domain_in, samples, seed);
    let mut report = HolderReport {
        eta,
        constant,
        seed,
        samples,
        skipped: 0,
        passed: true,
        worst: None,
        violations: 0,
    };
    let mut worst_excess = f64::NEG_INFINITY;
    for (i, (x, y)) in pairs.iter().enumerate() {
        let a = frame_in.dist(x, y);
        if a.lo <= 0.0 {
            report.skipped += 1;
            continue;
        }
        let b = frame_out.dist(&map(x)?, &map(y)?);
        let bound = constant * a.lo.powf(eta);
        let excess = b.hi / bound;
        if b.hi > bound {
            report.violations += 1;
        }
        if excess > worst_excess {
            worst_excess = excess;
            report.worst = Some(HolderWitness {
                sample: i,
                d_in: a,
                d_out: b,
                bound,
            });
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

/// How the upper cover picks its radius.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverRadius {
    /// Least `r` with `S_J λ^{-r} + Σ_{j>J} c_j ≤ ε`.
    #[default]
    Tight,
    /// `⌈log_λ(2S/ε)⌉`.
    Conservative,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverRow {
    pub eps: f64,
    pub j_eps: usize,
    /// `log₂` of the separated-cylinder count, a lower bound on `log₂ N_ε`.
    pub lower_log_cover: f64,
    /// `log₂` of the covering-cylinder count, an upper bound on `log₂ N_ε`.
    pub upper_log_cover: f64,
    pub upper_radius: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricDimEstimate {
    pub lambda: f64,
    pub cover: CoverRadius,
    pub rows: Vec<CoverRow>,
    /// Slopes of `ln(log₂ N)` against `ln(−log_λ ε)`.
    pub lower_slope: f64,
    pub upper_slope: f64,
}

/// Largest `r ≥ 0` with `ε·λ^r ≤ c`, if any.
fn lower_radius(c: f64, eps: f64, lambda: f64) -> Option<usize> {
    if c < eps {
        return None;
    }
    let mut r = 0;
    let mut v = eps;
    while v * lambda <= c {
        v *= lambda;
        r += 1;
    }
    Some(r)
}

fn union_of_balls(g: &dyn Digraph, balls: &[(VertexId, usize)]) -> Result<Vec<VertexId>, MetricError> {
    let mut all = BTreeSet::new();
    for (v, r) in balls {
        let mut grower = BallGrower::new(g, std::slice::from_ref(v))?;
        grower.grow_to(*r)?;
        all.extend(grower.members());
    }
    Ok(all.into_iter().collect())
}

/// Cylinder-cover bounds on `log₂ N_ε` for each `ε` in a decreasing grid.
pub fn metric_dim_estimate(
    space: &PatternSpace,
    metric: &BasedMetric,
    eps_grid: &[f64],
    cover: CoverRadius,
) -> Result<MetricDimEstimate, MetricError> {
    if eps_grid.len() < 2
        || eps_grid.windows(2).any(|w| w[1] >= w[0])
        || eps_grid[0] >= 1.0
        || eps_grid[eps_grid.len() - 1] <= 0.0
    {
        return Err(MetricError::Invalid(
            "eps grid must be strictly decreasing inside (0, 1)".into(),
        ));
    }
    let g = metric.graph.as_ref();
    let lambda = metric.lambda;
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let j = metric.scheme.j_eps(eps)?;
        let lower: Vec<(VertexId, usize)> = (0..=j)
            .filter_map(|i| lower_radius(metric.scheme.coeff(i), eps, lambda).map(|r| (metric.scheme.vertex(i), r)))
            .collect();
        let head: f64 = (0..=j).map(|i| metric.scheme.coeff(i)).sum();
        let tail = metric.scheme.tail_from(j + 1);
        let r = match cover {
            CoverRadius::Tight => {
                let mut r = 0usize;
                let mut d = 1.0;
                while head * d + tail > eps {
                    d /= lambda;
                    r += 1;
                }
                r
            }
            CoverRadius::Conservative => {
                let target = 2.0 * metric.scheme.total_mass() / eps;
                let mut r = 0usize;
                let mut p = 1.0;
                while p < target {
                    p *= lambda;
                    r += 1;
                }
                r
            }
        };
        let upper: Vec<(VertexId, usize)> = (0..=j).map(|i| (metric.scheme.vertex(i), r)).collect();
        rows.push(CoverRow {
            eps,
            j_eps: j,
            lower_log_cover: pattern_log_count(space, &union_of_balls(g, &lower)?),
            upper_log_cover: pattern_log_count(space, &union_of_balls(g, &upper)?),
            upper_radius: r,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (-r.eps.ln() / lambda.ln()).ln()).collect();
    let slope = |f: fn(&CoverRow) -> f64| ols_slope(&xs, &rows.iter().map(|r| f(r).ln()).collect::<Vec<_>>());
    Ok(MetricDimEstimate {
        lambda,
        cover,
        lower_slope: slope(|r| r.lower_log_cover),
        upper_slope: slope(|r| r.upper_log_cover),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformDimRow {
    pub r: usize,
    /// `sup_{u ∈ U} ln|B(u, r)| / ln r`.
    pub sup_exponent: f64,
    pub argmax: VertexId,
}

/// Inner supremum of the uniform-dimension condition, per radius.
pub fn uniform_dim_profile(
    g: &dyn Digraph,
    set: &[VertexId],
    r_grid: &[usize],
) -> Result<Vec<UniformDimRow>, MetricError> {
    if set.is_empty() || r_grid.iter().any(|&r| r < 2) {
        return Err(MetricError::Invalid("need a nonempty set and radii >= 2".into()));
    }
    let mut grid = r_grid.to_vec();
    grid.sort();
    grid.dedup();
    let mut rows: Vec<UniformDimRow> = Vec::new();
    for u in set {
        let mut grower = BallGrower::new(g, std::slice::from_ref(u))?;
        for (i, &r) in grid.iter().enumerate() {
            grower.grow_to(r)?;
            let e = (grower.size() as f64).ln() / (r as f64).ln();
            match rows.get_mut(i) {
                Some(row) if e > row.sup_exponent => {
                    row.sup_exponent = e;
                    row.argmax = u.clone();
                }
                Some(_) => {}
                None => rows.push(UniformDimRow {
                    r,
                    sup_exponent: e,
                    argmax: u.clone(),
                }),
            }
        }
    }
    Ok(rows)
}
