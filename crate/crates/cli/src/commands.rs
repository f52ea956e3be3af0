use serde::Serialize;
use serde_json::{json, Value};
use symdyn::counterexample::{cex_propagation_profile, cex_roundtrip, trial_seed, TraceSimulator};
use symdyn::entropydim::{ball_entropy, tau_entropy_profile};
use symdyn::metricspace::{
    estuary_ball, holder_report, lipschitz_report, metric_dim_estimate, BasedMetric, MetricError,
};
use symdyn::netgraph::{dim_estimate, speed_estimate, BallGrower, Distance, Subisometry, VertexId};
use symdyn::symsys::{
    equicontinuity_envelope, odometer_factor_chain, panorama, posexpansive_window_check, propagation, Alphabet,
    Configuration, PatternSpace,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::args::*;
use crate::report::Report;
use crate::CliError;

fn config<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn join(vs: &[VertexId]) -> Value {
    Value::String(vs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
}

fn distance(d: Distance) -> Value {
    match d {
        Distance::Finite(n) => json!(n),
        Distance::Disconnected => json!("disconnected"),
        Distance::BeyondCap => json!("beyond_cap"),
    }
}

/// Base vertex of a system built from the flags: the lattice origin for `ca`,
/// index 0 otherwise.
fn system_origin(a: &SystemArgs) -> VertexId {
    match a.system {
        Some(SystemName::Ca) if a.system_file.is_none() => VertexId::new(&vec![0; a.d]),
        _ => VertexId::index(0),
    }
}

pub fn graph_ball(a: &GraphBallArgs) -> Result<Report, CliError> {
    let g = a.graph.build()?;
    let v = a.vertex.clone().unwrap_or_else(|| a.graph.origin());
    let mut rep = Report::new("graph-ball", config(a), &["vertex", "r", "ball_size", "closed"]);
    let mut grower = BallGrower::new(g.as_ref(), std::slice::from_ref(&v))?;
    for r in 0..=a.r {
        grower.grow_to(r)?;
        rep.row(vec![
            json!(v.to_string()),
            json!(r),
            json!(grower.size()),
            json!(grower.closed()),
        ]);
    }
    rep.summary = if a.members {
        json!({ "members": join(&grower.members()) })
    } else {
        json!({ "ball_size": grower.size() })
    };
    Ok(rep)
}

pub fn graph_dim(a: &GraphDimArgs) -> Result<Report, CliError> {
    let g = a.graph.build()?;
    let v = a.vertex.clone().unwrap_or_else(|| a.graph.origin());
    let est = dim_estimate(g.as_ref(), &v, a.rmin, a.rmax)?;
    let mut rep = Report::new("graph-dim", config(a), &["rmin", "rmax", "r", "ball_size", "exponent"]);
    for ((r, b), e) in est.radii.iter().zip(&est.ball_sizes).zip(&est.pointwise_exponents) {
        rep.row(vec![json!(a.rmin), json!(a.rmax), json!(r), json!(b), json!(e)]);
    }
    rep.summary = json!({
        "vertex": v.to_string(),
        "fit_slope": est.fit_slope,
        "lower_proxy": est.lower_proxy,
        "upper_proxy": est.upper_proxy,
    });
    if let Some(target) = a.expect {
        rep.passed = (est.fit_slope - target).abs() <= a.tol;
    }
    Ok(rep)
}

pub fn graph_speed(a: &GraphSpeedArgs) -> Result<Report, CliError> {
    let g = a.graph.build()?;
    let v = a.vertex.clone().unwrap_or_else(|| a.graph.origin());
    let tau = Subisometry::translation(format!("+{}", a.translate), a.translate.coords());
    if v.dim() != a.translate.dim() {
        return Err(CliError::Usage(format!(
            "translation {} does not match vertex {v}",
            a.translate
        )));
    }
    let est = speed_estimate(g.as_ref(), &tau, &v, a.nmax, a.cap)?;
    let mut rep = Report::new("graph-speed", config(a), &["n_max", "cap", "n", "distance", "value"]);
    for ((n, d), val) in est.n.iter().zip(&est.distances).zip(&est.values) {
        rep.row(vec![json!(a.nmax), json!(a.cap), json!(n), distance(*d), json!(val)]);
    }
    rep.summary = json!({ "vertex": v.to_string(), "tau": tau.label(), "inf_proxy": est.inf_proxy });
    Ok(rep)
}

pub fn sys_propagation(a: &SysPropagationArgs) -> Result<Report, CliError> {
    let (sys, _) = a.system.build()?;
    let rho = propagation(&sys, &a.vertex, a.t)?;
    let mut rep = Report::new("sys-propagation", config(a), &["horizon", "t", "rho"]);
    for (t, r) in rho.iter().enumerate() {
        rep.row(vec![json!(a.t), json!(t), json!(r)]);
    }
    rep.summary = json!({ "system": sys.name(), "vertex": a.vertex.to_string(), "rho_T": rho.last() });
    Ok(rep)
}

pub fn sys_panorama(a: &SysPanoramaArgs) -> Result<Report, CliError> {
    let (sys, space) = a.system.build()?;
    let mut rep = Report::new("sys-panorama", config(a), &["horizon", "t", "layer_size", "layer"]);
    if a.target.is_empty() {
        let p = panorama(&sys, &space, &a.window, a.t, a.cap)?;
        for (t, layer) in p.layers.iter().enumerate() {
            rep.row(vec![json!(a.t), json!(t), json!(layer.len()), join(layer)]);
        }
        rep.summary = json!({
            "system": sys.name(),
            "cone_size": p.cone.len(),
            "patterns": p.patterns.to_string(),
            "distinct_trajectories": p.distinct_trajectories,
        });
    } else {
        let check = posexpansive_window_check(&sys, &space, &a.window, a.t, &a.target, a.cap)?;
        for (t, layer) in check.layers.iter().enumerate() {
            rep.row(vec![json!(a.t), json!(t), json!(layer.len()), join(layer)]);
        }
        rep.summary = json!({
            "system": sys.name(),
            "covered": check.covered,
            "first_t": check.first_t,
            "missing": join(&check.missing),
        });
        rep.passed = check.covered;
    }
    Ok(rep)
}

pub fn sys_equicontinuity(a: &SysEquicontinuityArgs) -> Result<Report, CliError> {
    let (sys, space) = a.system.build()?;
    let env = equicontinuity_envelope(&sys, &space, &a.window, a.probe_horizon, a.reach_cap, a.cap)?;
    let mut rep = Report::new("sys-equicontinuity", config(a), &["probe_horizon", "t", "cone_size"]);
    for (t, s) in env.cone_sizes.iter().enumerate() {
        rep.row(vec![json!(a.probe_horizon), json!(t), json!(s)]);
    }
    rep.summary = json!({
        "system": sys.name(),
        "certified": env.certified(),
        "envelope": env.envelope.as_deref().map(join),
        "reach": env.reach,
        "trajectories": env.trajectories,
    });
    rep.passed = env.certified();
    Ok(rep)
}

pub fn sys_odometer_chain(a: &SysOdometerChainArgs) -> Result<Report, CliError> {
    if a.levels == 0 || a.levels > 16 {
        return Err(CliError::Usage("--levels must be in 1..=16".into()));
    }
    let (sys, space) = a.system.build()?;
    let horizon = a.horizon.unwrap_or(1 << (a.levels + 1));
    let windows: Vec<Vec<VertexId>> = (0..a.levels)
        .map(|n| (0..=n as i64).map(VertexId::index).collect())
        .collect();
    let levels = odometer_factor_chain(&sys, &space, &windows, horizon, a.cap)?;
    let mut rep = Report::new(
        "sys-odometer-chain",
        config(a),
        &[
            "horizon",
            "level",
            "window",
            "envelope",
            "y_size",
            "sigma_is_permutation",
            "onto_previous",
            "multiple_of_previous",
        ],
    );
    let mut ok = true;
    for (n, l) in levels.iter().enumerate() {
        ok &= l.sigma_is_permutation
            && l.projection_onto_previous != Some(false)
            && l.multiple_of_previous != Some(false);
        rep.row(vec![
            json!(horizon),
            json!(n),
            join(&l.window),
            join(&l.envelope),
            json!(l.y_size),
            json!(l.sigma_is_permutation),
            json!(l.projection_onto_previous),
            json!(l.multiple_of_previous),
        ]);
    }
    rep.summary = json!({ "system": sys.name(), "levels": levels.len() });
    rep.passed = ok;
    Ok(rep)
}

pub fn entropy_ball(a: &EntropyBallArgs) -> Result<Report, CliError> {
    let (sys, space) = a.system.build()?;
    let est = ball_entropy(&space, sys.graph().as_ref(), &a.vertex, a.rmin, a.rmax)?;
    let mut rep = Report::new(
        "entropy-ball",
        config(a),
        &["rmin", "rmax", "r", "ball_size", "log2_count", "ratio"],
    );
    for i in 0..est.radii.len() {
        rep.row(vec![
            json!(a.rmin),
            json!(a.rmax),
            json!(est.radii[i]),
            json!(est.ball_sizes[i]),
            json!(est.log2_counts[i]),
            json!(est.ratios[i]),
        ]);
    }
    rep.summary = json!({ "system": sys.name(), "lower_proxy": est.lower_proxy, "upper_proxy": est.upper_proxy });
    Ok(rep)
}

pub fn entropy_tau(a: &EntropyTauArgs) -> Result<Report, CliError> {
    let g = a.graph.build()?;
    let center = a.center.clone().unwrap_or_else(|| a.graph.origin());
    if center.dim() != a.translate.dim() {
        return Err(CliError::Usage(format!(
            "translation {} does not match vertex {center}",
            a.translate
        )));
    }
    let space = PatternSpace::full(&Alphabet::new(a.k)?);
    let mut grower = BallGrower::new(g.as_ref(), std::slice::from_ref(&center))?;
    grower.grow_to(a.radius)?;
    let tau = Subisometry::translation(format!("+{}", a.translate), a.translate.coords());
    let prof = tau_entropy_profile(&space, &tau, &grower.members(), a.nmax)?;
    let mut rep = Report::new(
        "entropy-tau",
        config(a),
        &["n_max", "n", "set_size", "log2_count", "value"],
    );
    for i in 0..prof.n.len() {
        rep.row(vec![
            json!(a.nmax),
            json!(prof.n[i]),
            json!(prof.set_sizes[i]),
            json!(prof.log2_counts[i]),
            json!(prof.values[i]),
        ]);
    }
    rep.summary = json!({ "tau": prof.tau, "f_size": grower.size(), "value_at_n_max": prof.values.last() });
    Ok(rep)
}

pub fn cex_roundtrip_cmd(a: &CexRoundtripArgs) -> Result<Report, CliError> {
    if a.trace {
        let sim = TraceSimulator::new(a.j)?;
        let x0 = sim.random_configuration(&mut ChaCha8Rng::seed_from_u64(trial_seed(a.seed, 0)));
        let tr = sim.simulate(&x0)?;
        let mut rep = Report::new("cex-roundtrip", config(a), &["horizon", "t", "a", "b"]);
        for t in 0..=tr.horizon {
            rep.row(vec![json!(tr.horizon), json!(t), json!(tr.a[t]), json!(tr.b[t])]);
        }
        rep.summary = json!({ "trial_seed": trial_seed(a.seed, 0), "cone_size": sim.cone().len() });
        return Ok(rep);
    }
    let r = cex_roundtrip(a.j, a.trials, a.seed)?;
    let mut rep = Report::new(
        "cex-roundtrip",
        config(a),
        &["horizon", "trial", "trial_seed", "recovered"],
    );
    for i in 0..a.trials {
        let s = trial_seed(a.seed, i);
        rep.row(vec![
            json!(r.horizon),
            json!(i),
            json!(s),
            json!(!r.failing_seeds.contains(&s)),
        ]);
    }
    rep.summary = json!({
        "depth": r.depth,
        "horizon": r.horizon,
        "cone_size": r.cone_size,
        "trials": r.trials,
        "failures": r.failing_seeds.len(),
    });
    rep.passed = r.passed;
    Ok(rep)
}

pub fn cex_propagation(a: &CexPropagationArgs) -> Result<Report, CliError> {
    let p = cex_propagation_profile(a.t)?;
    let mut rep = Report::new(
        "cex-propagation",
        config(a),
        &["horizon", "t", "rho", "lower_bound", "ok"],
    );
    for (t, (r, b)) in p.rho.iter().zip(&p.lower_bound).enumerate() {
        rep.row(vec![json!(a.t), json!(t), json!(r), json!(b), json!(r >= b)]);
    }
    rep.summary = json!({ "lower_bound_ok": p.lower_bound_ok, "first_violation": p.first_violation });
    rep.passed = p.lower_bound_ok;
    Ok(rep)
}

pub fn metric_dim(a: &MetricDimArgs) -> Result<Report, CliError> {
    if a.kmin < 1 || a.kmin >= a.kmax {
        return Err(CliError::Usage("need 1 <= --kmin < --kmax".into()));
    }
    let (graph, space, base) = match a.system {
        Some(name) => {
            let sa = SystemArgs {
                system: Some(name),
                m: vec![2],
                k: a.k,
                two_sided: a.graph.two_sided,
                d: a.graph.d,
                neighborhood: Vec::new(),
                table: Vec::new(),
                table_seed: None,
                system_file: None,
            };
            let (sys, space) = sa.build()?;
            (sys.graph().clone(), space, VertexId::index(0))
        }
        None => (
            a.graph.build()?,
            PatternSpace::full(&Alphabet::new(a.k)?),
            a.graph.origin(),
        ),
    };
    let metric = a.metric.build(graph, base)?;
    let eps: Vec<f64> = (a.kmin..=a.kmax).map(|k| 2f64.powi(-k)).collect();
    let est = metric_dim_estimate(&space, &metric, &eps, a.cover.into())?;
    let mut rep = Report::new(
        "metric-dim",
        config(a),
        &[
            "kmin",
            "kmax",
            "eps",
            "j_eps",
            "lower_log_cover",
            "upper_log_cover",
            "upper_radius",
        ],
    );
    for row in &est.rows {
        rep.row(vec![
            json!(a.kmin),
            json!(a.kmax),
            json!(row.eps),
            json!(row.j_eps),
            json!(row.lower_log_cover),
            json!(row.upper_log_cover),
            json!(row.upper_radius),
        ]);
    }
    rep.summary = json!({ "lambda": est.lambda, "lower_slope": est.lower_slope, "upper_slope": est.upper_slope });
    Ok(rep)
}

pub fn metric_lipschitz(a: &MetricLipschitzArgs) -> Result<Report, CliError> {
    let (sys, space) = a.system.build()?;
    let metric = a.metric.build(sys.graph().clone(), system_origin(&a.system))?;
    let r = lipschitz_report(&sys, &space, &metric, a.radius, a.samples, a.seed)?;
    let mut rep = Report::new(
        "metric-lipschitz",
        config(a),
        &["radius", "samples", "skipped", "max_ratio", "exceeding"],
    );
    rep.row(vec![
        json!(a.radius),
        json!(r.samples),
        json!(r.skipped),
        json!(r.max_ratio),
        json!(r.exceeding),
    ]);
    rep.summary = json!({ "lambda": r.lambda, "worst_sample": r.worst_sample });
    rep.passed = r.exceeding == 0;
    Ok(rep)
}

pub fn holder_check(a: &HolderCheckArgs) -> Result<Report, CliError> {
    let (sys, space) = a.system.build()?;
    let d_in = a.metric.build(sys.graph().clone(), system_origin(&a.system))?;
    let d_out = BasedMetric::new(d_in.scheme.clone(), a.lambda_out, sys.graph().clone())?;
    let inner = estuary_ball(&d_in, a.radius)?;
    let outer = estuary_ball(&d_in, a.radius + 1)?;
    let step = |x: &Configuration| sys.step_on(x, &inner).map_err(MetricError::from);
    let r = holder_report(
        &step, &space, &d_in, &d_out, &outer, &inner, a.eta, a.constant, a.samples, a.seed,
    )?;
    let mut rep = Report::new(
        "holder-check",
        config(a),
        &["radius", "samples", "skipped", "violations"],
    );
    rep.row(vec![
        json!(a.radius),
        json!(r.samples),
        json!(r.skipped),
        json!(r.violations),
    ]);
    rep.summary = json!({ "eta": r.eta, "constant": r.constant, "worst": r.worst });
    rep.passed = r.passed;
    Ok(rep)
}
