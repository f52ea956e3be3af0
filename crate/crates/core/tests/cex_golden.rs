//! Frozen traces for two seeded configurations, checked against both the
//! library simulator and a plain array simulator written out here.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use symdyn::counterexample::{decode_trace, is_box, m, CexState, DecodeResult, Trace, TraceSimulator};
use symdyn::netgraph::VertexId;
use symdyn::symsys::Configuration;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Golden {
    depth: u32,
    seed: u64,
    /// `[cell, a, b]` over the light cone of cell 0.
    x0: Vec<(i64, u8, u8)>,
    trace: Trace,
    decoded: DecodeResult,
}

const CASES: [(u32, u64); 2] = [(1, 42), (2, 7)];

fn fixture_path(depth: u32, seed: u64) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("cex_trace_j{depth}_seed{seed}.json"))
}

/// Steps every cell of a finite prefix in lockstep. Reads past the end see
/// zero; those cells lie outside the cone of cell 0 for `t ≤ m_J`.
fn array_trace(x0: &[(i64, u8, u8)], horizon: usize) -> Trace {
    let len = x0.iter().map(|c| c.0).max().unwrap() as usize + 1;
    let mut a = vec![0u8; len];
    let mut b = vec![0u8; len];
    for &(n, an, bn) in x0 {
        a[n as usize] = an;
        b[n as usize] = bn;
    }
    let get = |v: &[u8], n: usize| v.get(n).copied().unwrap_or(0);
    let mut tr = Trace::zeros(horizon);
    for t in 0..=horizon {
        tr.a[t] = a[0];
        tr.b[t] = b[0];
        let mut na = vec![0u8; len];
        let mut nb = vec![0u8; len];
        for n in 0..len {
            na[n] = get(&a, n + 1);
            if let Some(k) = (0..).take_while(|&k| m(k) <= n as i64).find(|&k| m(k) == n as i64) {
                let next = m(k + 1) as usize;
                nb[n] = get(&a, next) ^ get(&b, next);
            }
        }
        a = na;
        b = nb;
    }
    tr
}

fn generate(depth: u32, seed: u64) -> Golden {
    let sim = TraceSimulator::new(depth).unwrap();
    let x = sim.random_configuration(&mut ChaCha8Rng::seed_from_u64(seed));
    let x0: Vec<(i64, u8, u8)> = x
        .iter()
        .map(|(v, s)| {
            let st = CexState::from_symbol(s);
            (v.as_index().unwrap(), st.a, st.b)
        })
        .collect();
    let trace = array_trace(&x0, m(depth) as usize);
    let decoded = DecodeResult::project(&x, depth).unwrap();
    Golden {
        depth,
        seed,
        x0,
        trace,
        decoded,
    }
}

fn configuration(g: &Golden) -> Configuration {
    g.x0.iter()
        .map(|&(n, a, b)| (VertexId::index(n), CexState { a, b }.symbol()))
        .collect()
}

#[test]
fn sampled_circles_carry_no_b() {
    let g = generate(2, 3);
    assert!(g.x0.iter().all(|&(n, _, b)| is_box(n) || b == 0));
}

#[test]
fn fixtures_match_library() {
    for (depth, seed) in CASES {
        let text = std::fs::read_to_string(fixture_path(depth, seed)).expect("fixture present");
        let golden: Golden = serde_json::from_str(&text).unwrap();
        assert_eq!((golden.depth, golden.seed), (depth, seed));
        let x = configuration(&golden);
        let sim = TraceSimulator::new(depth).unwrap();
        assert_eq!(sim.simulate(&x).unwrap(), golden.trace, "J={depth} seed={seed}");
        assert_eq!(array_trace(&golden.x0, m(depth) as usize), golden.trace);
        assert_eq!(decode_trace(&golden.trace, depth).unwrap(), golden.decoded);
    }
}

#[test]
fn sampler_still_produces_fixture_inputs() {
    for (depth, seed) in CASES {
        let text = std::fs::read_to_string(fixture_path(depth, seed)).unwrap();
        let golden: Golden = serde_json::from_str(&text).unwrap();
        assert_eq!(generate(depth, seed), golden);
    }
}

#[test]
#[ignore = "rewrites the fixture files"]
fn regenerate_fixtures() {
    for (depth, seed) in CASES {
        let g = generate(depth, seed);
        std::fs::write(
            fixture_path(depth, seed),
            serde_json::to_string_pretty(&g).unwrap() + "\n",
        )
        .unwrap();
    }
}
