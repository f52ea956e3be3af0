//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symdyn::counterexample::{cex_propagation_profile, cex_roundtrip, cex_system, counterexample_graph, m};
use symdyn::entropydim::{tau_entropy_profile, weak_independence_report};
use symdyn::metricspace::{lipschitz_report, metric_dim_estimate, BasedMetric, CoefficientScheme, CoverRadius};
use symdyn::netgraph::{
    cayley_zd, dim_estimate, in_ball, odometer_graph, shortcut_graph, speed_estimate, unit_shift_graph, Subisometry,
    VertexId,
};
use symdyn::symsys::{
    ca_on_zd, equicontinuity_envelope, full_shift, odometer_factor_chain, odometer_system, panorama, Alphabet,
    PatternSpace,
};

type Check = Result<String, String>;

/// Name, check and runtime budget.
type Criterion = (&'static str, fn() -> Check, Duration);

fn idx(range: std::ops::RangeInclusive<i64>) -> Vec<VertexId> {
    range.map(VertexId::index).collect()
}

fn binary() -> PatternSpace {
    PatternSpace::full(&Alphabet::new(2).unwrap())
}

fn ols(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Collects failed parts so every part of a criterion is reported.
#[derive(Default)]
struct Parts {
    notes: Vec<String>,
    failed: bool,
}

impl Parts {
    fn check(&mut self, ok: bool, note: String) {
        self.failed |= !ok;
        self.notes.push(if ok { note } else { format!("[x] {note}") });
    }

    fn finish(self) -> Check {
        let s = self.notes.join("; ");
        if self.failed {
            Err(s)
        } else {
            Ok(s)
        }
    }
}

fn roundtrip() -> Check {
    let r = cex_roundtrip(4, 200, 1).map_err(|e| e.to_string())?;
    let mut p = Parts::default();
    p.check(r.horizon == 20, format!("horizon {}", r.horizon));
    p.check(
        r.passed,
        format!(
            "{} of {} trials recovered exactly",
            r.trials - r.failing_seeds.len(),
            r.trials
        ),
    );
    p.check((0..=4).map(m).eq([0, 2, 6, 12, 20]), "boxes 0,2,6,12,20".into());
    p.finish()
}

fn propagation() -> Check {
    let prof = cex_propagation_profile(40).map_err(|e| e.to_string())?;
    let mut p = Parts::default();
    p.check(
        prof.lower_bound_ok,
        format!(
            "rho(T) >= (T+1)+T(T-1)/2 for T <= 40, first violation {:?}",
            prof.first_violation
        ),
    );
    let ts: Vec<f64> = (10..=40).map(|t| (t as f64).ln()).collect();
    let rs: Vec<f64> = (10..=40).map(|t| (prof.rho[t] as f64).ln()).collect();
    let slope = ols(&ts, &rs);
    p.check(
        (1.8..=2.1).contains(&slope),
        format!("log-log slope over [10,40] = {slope:.3} in [1.8,2.1]"),
    );
    p.finish()
}

fn dimensions() -> Check {
    let mut p = Parts::default();
    for d in 1..=3 {
        let g = cayley_zd(d);
        let e = dim_estimate(&g, &VertexId::new(&vec![0; d]), 16, 64).map_err(|e| e.to_string())?;
        p.check(
            (e.fit_slope - d as f64).abs() <= 0.15,
            format!("Z^{d} slope {:.3}", e.fit_slope),
        );
    }
    for n in [0, 1] {
        let e = dim_estimate(&odometer_graph(), &VertexId::index(n), 16, 64).map_err(|e| e.to_string())?;
        let last = *e.pointwise_exponents.last().unwrap();
        p.check(last <= 0.25, format!("odometer at {n}: exponent at r=64 {last:.3}"));
    }
    let e = dim_estimate(&counterexample_graph(), &VertexId::index(0), 16, 64).map_err(|e| e.to_string())?;
    p.check(
        (1.7..=2.2).contains(&e.fit_slope),
        format!("counterexample slope {:.3} in [1.7,2.2]", e.fit_slope),
    );
    p.finish()
}

fn panoramas() -> Check {
    let mut p = Parts::default();
    let shift = full_shift(2, false).map_err(|e| e.to_string())?;
    let shift_ok = (0..=6).all(|t| {
        panorama(&shift, &binary(), &idx(0..=0), t, 1 << 24)
            .map(|r| r.layers.iter().enumerate().all(|(s, l)| *l == idx(0..=s as i64)))
            .unwrap_or(false)
    });
    p.check(shift_ok, "one-sided shift W^t = [0..t] for t <= 6".into());
    let (odo, odo_space) = odometer_system(&[2]).map_err(|e| e.to_string())?;
    let r = panorama(&odo, &odo_space, &idx(0..=0), 10, 1 << 24).map_err(|e| e.to_string())?;
    p.check(
        r.layers.iter().all(|l| *l == idx(0..=0)),
        "odometer W^t = {0} for t <= 10".into(),
    );
    let (cex, cex_space) = cex_system();
    let r = panorama(&cex, &cex_space, &idx(0..=0), 6, 1 << 28).map_err(|e| e.to_string())?;
    let top = r.layers.last().unwrap();
    let covered = idx(0..=6).iter().all(|v| top.contains(v));
    p.check(
        covered,
        format!("counterexample W^6 covers 0..6 ({} patterns)", r.patterns),
    );
    p.finish()
}

fn odometer_bundle() -> Check {
    let (sys, space) = odometer_system(&[2]).map_err(|e| e.to_string())?;
    let windows: Vec<Vec<VertexId>> = (0..3).map(|n| idx(0..=n)).collect();
    let mut p = Parts::default();
    for n in 0..3 {
        let env = equicontinuity_envelope(&sys, &space, &windows[n], 8, 64, 1 << 24).map_err(|e| e.to_string())?;
        p.check(
            env.envelope.as_ref() == Some(&windows[n]),
            format!("envelope of {{0..{n}}} is the window"),
        );
        let chain =
            odometer_factor_chain(&sys, &space, &windows[..=n], 1 << (n + 2), 1 << 24).map_err(|e| e.to_string())?;
        let level = chain.last().unwrap();
        p.check(level.y_size == 1 << (n + 1), format!("|Y_{n}| = {}", level.y_size));
        p.check(
            level.sigma_is_permutation,
            format!("sigma_{n} permutes Y_{n} at horizon {}", 1 << (n + 2)),
        );
    }
    p.finish()
}

fn speed() -> Check {
    let mut p = Parts::default();
    let tau = Subisometry::translation("(1,0)", &[1, 0]);
    let s = speed_estimate(&cayley_zd(2), &tau, &VertexId::from([0, 0]), 8, 64).map_err(|e| e.to_string())?;
    p.check(s.inf_proxy == Some(1.0), format!("Z^2 inf_proxy {:?}", s.inf_proxy));
    let s = speed_estimate(&shortcut_graph(), &tau, &VertexId::from([0, 0]), 16, 64).map_err(|e| e.to_string())?;
    let v16 = s.values[15];
    p.check(
        v16.is_some_and(|v| v <= 9.0 / 16.0),
        format!("shortcut value at n=16 {v16:?} <= 9/16"),
    );
    p.finish()
}

fn lipschitz() -> Check {
    let nbhd = vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]];
    let metric = BasedMetric::new(
        CoefficientScheme::single(VertexId::from([0, 0])),
        2.0,
        Arc::new(cayley_zd(2)),
    )
    .map_err(|e| e.to_string())?;
    let mut p = Parts::default();
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2)).collect();
        let sys = ca_on_zd(2, 2, nbhd.clone(), table).map_err(|e| e.to_string())?;
        let r = lipschitz_report(&sys, &binary(), &metric, 6, 10_000, seed).map_err(|e| e.to_string())?;
        p.check(
            r.exceeding == 0,
            format!(
                "table {seed}: max ratio {} over {} pairs",
                r.max_ratio,
                r.samples - r.skipped
            ),
        );
    }
    p.finish()
}

fn metric_dimension() -> Check {
    let eps: Vec<f64> = (8..=32).map(|k| 2f64.powi(-k)).collect();
    let mut p = Parts::default();
    let cases = [
        (
            "A^Z2",
            Arc::new(cayley_zd(2)) as symdyn::netgraph::SharedGraph,
            VertexId::from([0, 0]),
            1.8..=2.1,
        ),
        ("A^N", Arc::new(unit_shift_graph(false)), VertexId::index(0), 0.9..=1.1),
    ];
    for (name, g, o, range) in cases {
        let metric = BasedMetric::new(CoefficientScheme::single(o), 2.0, g).map_err(|e| e.to_string())?;
        let est = metric_dim_estimate(&binary(), &metric, &eps, CoverRadius::Tight).map_err(|e| e.to_string())?;
        p.check(
            range.contains(&est.lower_slope) && range.contains(&est.upper_slope),
            format!(
                "{name} slopes [{:.3}, {:.3}] in [{}, {}]",
                est.lower_slope,
                est.upper_slope,
                range.start(),
                range.end()
            ),
        );
    }
    p.finish()
}

fn independence_and_tau() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let families: Vec<Vec<(VertexId, usize)>> = (0..100)
        .map(|_| {
            let k = rng.gen_range(1..=4);
            (0..k)
                .map(|i| {
                    let c = VertexId::from([20 * i + rng.gen_range(0..5), rng.gen_range(-5..=5)]);
                    (c, rng.gen_range(0..=4))
                })
                .collect()
        })
        .collect();
    let mut p = Parts::default();
    let r = weak_independence_report(&binary(), &cayley_zd(2), &families).map_err(|e| e.to_string())?;
    p.check(
        r.all_exact && r.epsilon == 1.0 && r.families.len() == 100,
        format!("100 disjoint ball families additive, least ratio {}", r.epsilon),
    );
    let f = in_ball(&cayley_zd(2), &[VertexId::from([0, 0])], 2).map_err(|e| e.to_string())?;
    let tau = Subisometry::translation("(1,0)", &[1, 0]);
    let prof = tau_entropy_profile(&binary(), &tau, &f.members, 20).map_err(|e| e.to_string())?;
    let increasing = prof.values.windows(2).all(|w| w[1] > w[0]);
    p.check(
        increasing,
        format!(
            "averaged profile increasing in N <= 20 (N=1: {}, N=20: {})",
            prof.values[0], prof.values[19]
        ),
    );
    p.check(
        prof.values[19] > 4.0,
        format!("value at N=20 is {} > 4", prof.values[19]),
    );
    p.finish()
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "counterexample round trip at depth 4",
            roundtrip,
            Duration::from_secs(1),
        ),
        ("quadratic propagation", propagation, Duration::from_secs(1)),
        ("network dimensions", dimensions, Duration::from_secs(30)),
        ("panorama oracles", panoramas, Duration::from_secs(10)),
        (
            "equicontinuity and odometer chain",
            odometer_bundle,
            Duration::from_secs(5),
        ),
        ("speed", speed, Duration::from_secs(5)),
        ("Lipschitz bound", lipschitz, Duration::from_secs(10)),
        ("metric dimension", metric_dimension, Duration::from_secs(10)),
        (
            "weak independence and tau-entropy",
            independence_and_tau,
            Duration::from_secs(5),
        ),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; [x] over budget {budget:?}")),
            Err(d) => (false, d),
        };
        failures += usize::from(!ok);
        println!(
            "criterion {}: {} {name} ({:.2}s): {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
