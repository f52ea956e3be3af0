use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::{BallGrower, Digraph, GraphError, Subisometry, VertexId};

/// Undirected path length, with two distinct infinity markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Finite(u64),
    /// The component of one endpoint was exhausted without meeting the other.
    Disconnected,
    /// No path of length at most the cap.
    BeyondCap,
}

impl Distance {
    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(d) => Some(d),
            _ => None,
        }
    }
}

/// Three-valued answer for searches bounded by a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reach {
    Yes,
    No,
    Unknown,
}

fn undirected_neighbors(g: &dyn Digraph, v: &VertexId) -> Result<Vec<VertexId>, GraphError> {
    let mut n = g.in_neighbors(v)?;
    n.extend(g.out_neighbors(v)?);
    n.sort();
    n.dedup();
    Ok(n)
}

/// Shortest undirected path length between `v` and `w`, searched up to `cap`
/// by bidirectional BFS.
pub fn undirected_distance(g: &dyn Digraph, v: &VertexId, w: &VertexId, cap: u64) -> Result<Distance, GraphError> {
    if !g.has_out_neighbors() {
        return Err(GraphError::MissingOutNeighbors(g.describe()));
    }
    if v == w {
        return Ok(Distance::Finite(0));
    }
    let mut seen = [HashMap::new(), HashMap::new()];
    seen[0].insert(v.clone(), 0u64);
    seen[1].insert(w.clone(), 0u64);
    let mut frontier = [vec![v.clone()], vec![w.clone()]];
    let mut depth = [0u64, 0u64];
    while depth[0] + depth[1] < cap {
        let side = usize::from(frontier[1].len() < frontier[0].len());
        if frontier[side].is_empty() {
            return Ok(Distance::Disconnected);
        }
        depth[side] += 1;
        let mut next = Vec::new();
        let mut best: Option<u64> = None;
        for x in &frontier[side] {
            for y in undirected_neighbors(g, x)? {
                if seen[side].contains_key(&y) {
                    continue;
                }
                if let Some(&dy) = seen[1 - side].get(&y) {
                    let total = depth[side] + dy;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                seen[side].insert(y.clone(), depth[side]);
                next.push(y);
            }
        }
        if let Some(d) = best {
            return Ok(if d <= cap {
                Distance::Finite(d)
            } else {
                Distance::BeyondCap
            });
        }
        frontier[side] = next;
    }
    if frontier[0].is_empty() || frontier[1].is_empty() {
        return Ok(Distance::Disconnected);
    }
    Ok(Distance::BeyondCap)
}

/// Finite-window growth data for `|B(v, r)|`.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionEstimate {
    pub radii: Vec<usize>,
    pub ball_sizes: Vec<usize>,
    /// `ln|B(v,r)| / ln r` per radius.
    pub pointwise_exponents: Vec<f64>,
    /// Minimum of the pointwise exponents over the last half of the window.
    pub lower_proxy: f64,
    /// Maximum of the pointwise exponents over the last half of the window.
    pub upper_proxy: f64,
    /// Least-squares slope of `ln|B|` against `ln r` over the whole window.
    pub fit_slope: f64,
}

pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Ball sizes at `v` for every radius in `[r_min, r_max]`.
pub fn ball_size_profile(g: &dyn Digraph, v: &VertexId, r_min: usize, r_max: usize) -> Result<Vec<usize>, GraphError> {
    let mut grower = BallGrower::new(g, std::slice::from_ref(v))?;
    let mut sizes = Vec::with_capacity(r_max + 1 - r_min);
    for r in r_min..=r_max {
        grower.grow_to(r)?;
        sizes.push(grower.size());
    }
    Ok(sizes)
}

pub fn dim_estimate(
    g: &dyn Digraph,
    v: &VertexId,
    r_min: usize,
    r_max: usize,
) -> Result<DimensionEstimate, GraphError> {
    if r_min < 2 || r_min >= r_max {
        return Err(GraphError::InvalidWindow(format!(
            "need 2 <= r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    let radii: Vec<usize> = (r_min..=r_max).collect();
    let ball_sizes = ball_size_profile(g, v, r_min, r_max)?;
    let log_r: Vec<f64> = radii.iter().map(|&r| (r as f64).ln()).collect();
    let log_b: Vec<f64> = ball_sizes.iter().map(|&b| (b as f64).ln()).collect();
    let pointwise_exponents: Vec<f64> = log_b.iter().zip(&log_r).map(|(b, r)| b / r).collect();
    let tail = &pointwise_exponents[pointwise_exponents.len() / 2..];
    Ok(DimensionEstimate {
        lower_proxy: tail.iter().copied().fold(f64::INFINITY, f64::min),
        upper_proxy: tail.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        fit_slope: ols_slope(&log_r, &log_b),
        radii,
        ball_sizes,
        pointwise_exponents,
    })
}

/// Ratios `|B(v,r)|/r` and a finite-window divergence heuristic.
#[derive(Debug, Clone, Serialize)]
pub struct SuperlinearReport {
    pub radii: Vec<usize>,
    pub ratios: Vec<f64>,
    pub first_quartile_max: f64,
    pub last_quartile_min: f64,
    /// Heuristic only: the last quartile of ratios sits above the first.
    pub divergent: bool,
}

pub fn superlinear_check(g: &dyn Digraph, v: &VertexId, r_max: usize) -> Result<SuperlinearReport, GraphError> {
    if r_max < 4 {
        return Err(GraphError::InvalidWindow(format!("need r_max >= 4, got {r_max}")));
    }
    let radii: Vec<usize> = (1..=r_max).collect();
    let sizes = ball_size_profile(g, v, 1, r_max)?;
    let ratios: Vec<f64> = sizes.iter().zip(&radii).map(|(&b, &r)| b as f64 / r as f64).collect();
    let q = r_max / 4;
    let first_quartile_max = ratios[..q].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last_quartile_min = ratios[r_max - q..].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SuperlinearReport {
        divergent: last_quartile_min > first_quartile_max,
        radii,
        ratios,
        first_quartile_max,
        last_quartile_min,
    })
}

/// Whether `v ⇝ w`: a directed path from `v` to `w` of length at most `cap`.
///
/// Answers `No` when the in-closure of `w` is exhausted before the cap.
pub fn upstream(g: &dyn Digraph, v: &VertexId, w: &VertexId, cap: usize) -> Result<Reach, GraphError> {
    let mut grower = BallGrower::new(g, std::slice::from_ref(w))?;
    grower.grow_to(cap)?;
    Ok(reach_in(&grower, v))
}

fn reach_in<G: Digraph + ?Sized>(grower: &BallGrower<'_, G>, v: &VertexId) -> Reach {
    if grower.contains(v) {
        Reach::Yes
    } else if grower.closed() {
        Reach::No
    } else {
        Reach::Unknown
    }
}

/// Classes of a finite probe set under mutual reachability.
#[derive(Debug, Clone, Serialize)]
pub struct BiconnectedProbe {
    pub classes: Vec<Vec<VertexId>>,
    /// Ordered pairs `(v, w)` where `v ⇝ w` could not be decided within the cap.
    pub unknown_pairs: Vec<(VertexId, VertexId)>,
}

pub fn biconnected_probe(g: &dyn Digraph, probe: &[VertexId], cap: usize) -> Result<BiconnectedProbe, GraphError> {
    let mut s = probe.to_vec();
    s.sort();
    s.dedup();
    let mut balls = Vec::with_capacity(s.len());
    for w in &s {
        let mut grower = BallGrower::new(g, std::slice::from_ref(w))?;
        grower.grow_to(cap)?;
        balls.push(grower);
    }
    // reach[i][j]: s[i] ⇝ s[j]
    let reach: Vec<Vec<Reach>> = s
        .iter()
        .map(|v| balls.iter().map(|b| reach_in(b, v)).collect())
        .collect();
    let mut parent: Vec<usize> = (0..s.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut unknown_pairs = Vec::new();
    for i in 0..s.len() {
        for j in 0..s.len() {
            if reach[i][j] == Reach::Unknown {
                unknown_pairs.push((s[i].clone(), s[j].clone()));
            }
            if i < j && reach[i][j] == Reach::Yes && reach[j][i] == Reach::Yes {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<VertexId>> = vec![Vec::new(); s.len()];
    for (i, v) in s.iter().enumerate() {
        let root = find(&mut parent, i);
        groups[root].push(v.clone());
    }
    Ok(BiconnectedProbe {
        classes: groups.into_iter().filter(|c| !c.is_empty()).collect(),
        unknown_pairs,
    })
}

/// `d(v, τⁿ(v))` for `n = 1..=n_max` and the running infimum of `d/n`.
#[derive(Debug, Clone, Serialize)]
pub struct SpeedEstimate {
    pub n: Vec<u64>,
    pub distances: Vec<Distance>,
    /// `d(v,τⁿ(v))/n`, or `None` when the distance exceeded the cap.
    pub values: Vec<Option<f64>>,
    /// Minimum over known values; an upper bound on the speed.
    pub inf_proxy: Option<f64>,
}

pub fn speed_estimate(
    g: &dyn Digraph,
    tau: &Subisometry,
    v: &VertexId,
    n_max: u64,
    cap: u64,
) -> Result<SpeedEstimate, GraphError> {
    if n_max < 1 {
        return Err(GraphError::InvalidWindow("need n_max >= 1".into()));
    }
    let mut n = Vec::new();
    let mut distances = Vec::new();
    let mut values = Vec::new();
    let mut image = v.clone();
    for k in 1..=n_max {
        image = tau.apply(&image);
        let d = undirected_distance(g, v, &image, cap)?;
        n.push(k);
        values.push(d.finite().map(|d| d as f64 / k as f64));
        distances.push(d);
    }
    let inf_proxy = values.iter().flatten().copied().reduce(f64::min);
    Ok(SpeedEstimate {
        n,
        distances,
        values,
        inf_proxy,
    })
}

/// Whether every probe vertex is upstream of some member of `U` within `cap`.
/// A `Yes` only certifies the probe set.
pub fn is_estuary(g: &dyn Digraph, estuary: &[VertexId], probes: &[VertexId], cap: usize) -> Result<Reach, GraphError> {
    let mut grower = BallGrower::new(g, estuary)?;
    grower.grow_to(cap)?;
    let mut verdict = Reach::Yes;
    let mut seen = HashSet::new();
    for p in probes {
        if !seen.insert(p) {
            continue;
        }
        match reach_in(&grower, p) {
            Reach::No => return Ok(Reach::No),
            Reach::Unknown => verdict = Reach::Unknown,
            Reach::Yes => {}
        }
    }
    Ok(verdict)
}
