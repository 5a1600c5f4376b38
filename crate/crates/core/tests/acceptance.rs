//! Acceptance criteria, one line each. Runs as a plain binary so the lines
//! always show up in `cargo test` output; exits non-zero if any fails.

use std::time::{Duration, Instant};

use ramsey_locc::protocol::{
    epsilon_schedule, exclusion_schedule, parse_epsilon, plan_distinguish, synthesize_exclusion, DEFAULT_MAX_THRESHOLD,
};
use ramsey_locc::ramsey::{
    brute_force_ramsey, check_exclusion_conditions, BruteForceOptions, BruteForceOutcome, ConditionQuery, Deriver,
    Ledger, RamseyQuery, Status,
};
use ramsey_locc::simulate::{verify_exclusion, verify_identification};
use ramsey_locc::states::{extract_coloring, random_coloring, realize, ProductStateSet, RealizeOptions, StateSetFile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

/// Name, optional runtime budget, check.
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(n: usize, r: usize, seed: u64) -> ProductStateSet {
    realize(&random_coloring(n, r, seed).unwrap(), seed, &RealizeOptions::default()).unwrap()
}

fn ledger_fidelity() -> Check {
    let ledger = Ledger::builtin();
    let mut d = Deriver::new(&ledger);
    let mut exact = |t: &[u32]| {
        let b = d.derive(&RamseyQuery::new(t).unwrap());
        (b.lower, b.upper, b.exact)
    };
    for (l, want) in (3..=9).zip([6, 9, 14, 18, 23, 28, 36]) {
        let got = exact(&[3, l]);
        ensure(got == (want, Some(want), true), || {
            format!("R(3,{l}) = {got:?}, want {want}")
        })?;
    }
    ensure(exact(&[4, 4]) == (18, Some(18), true), || "R(4,4) != 18".into())?;
    ensure(exact(&[4, 5]) == (25, Some(25), true), || "R(4,5) != 25".into())?;
    let r55 = exact(&[5, 5]);
    ensure(r55 == (43, Some(48), false), || format!("R(5,5) = {r55:?}"))?;
    Ok("R(3,3..9) = 6 9 14 18 23 28 36, R(4,4) = 18, R(4,5) = 25, R(5,5) in [43, 48]".into())
}

fn has_mono_triangle(n: usize, color: impl Fn(usize, usize) -> bool) -> bool {
    (0..n).any(|a| {
        (a + 1..n).any(|b| {
            (b + 1..n).any(|c| {
                let x = color(a, b);
                color(a, c) == x && color(b, c) == x
            })
        })
    })
}

/// Colorings of `K_n` without a monochromatic triangle, by direct enumeration.
fn triangle_free_colorings(n: usize) -> usize {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    (0u32..1 << edges.len())
        .filter(|mask| {
            let color = |a: usize, b: usize| {
                let e = edges.iter().position(|&x| x == (a.min(b), a.max(b))).unwrap();
                mask >> e & 1 == 1
            };
            !has_mono_triangle(n, color)
        })
        .count()
}

fn brute_force_oracle() -> Check {
    let rep = brute_force_ramsey(&[3, 3], 8, BruteForceOptions::default()).map_err(|e| e.to_string())?;
    ensure(rep.outcome == BruteForceOutcome::Exact(6), || {
        format!("outcome {:?}", rep.outcome)
    })?;
    let k5 = rep.sizes.iter().find(|s| s.n == 5).ok_or("no K5 record")?;
    let k6 = rep.sizes.iter().find(|s| s.n == 6).ok_or("no K6 record")?;
    ensure(k5.avoiding_coloring.is_some(), || "K5 has no avoiding coloring".into())?;
    ensure(k6.avoiding_coloring.is_none() && k6.visited == 1 << 15, || {
        format!("K6 visited {} colorings", k6.visited)
    })?;
    let free5 = triangle_free_colorings(5);
    let free6 = triangle_free_colorings(6);
    ensure(free5 == 12 && free6 == 0, || {
        format!("independent count K5 {free5}, K6 {free6}")
    })?;
    Ok(format!(
        "R(3,3) = 6; K5 counterexample after {} of 1024 colorings (12 triangle-free in all), K6 none of 32768",
        k5.visited
    ))
}

fn certification_regression() -> Check {
    let ledger = Ledger::builtin();
    let mut d = Deriver::new(&ledger);
    let mut check = |r, m, k| check_exclusion_conditions(&mut d, ConditionQuery::new(r, m, k).unwrap()).unwrap();
    let v = check(2, 4, 6);
    let lines: Vec<String> = v.witness.iter().map(|l| l.render()).collect();
    ensure(v.status == Status::Certified, || format!("(2,4,6) is {:?}", v.status))?;
    ensure(lines == ["14 >= 14", "13 >= 6", "12 >= 1"], || {
        format!("(2,4,6) lines {lines:?}")
    })?;
    let v = check(2, 3, 4);
    ensure(v.status == Status::Refuted, || format!("(2,3,4) is {:?}", v.status))?;
    let v = check(3, 3, 3);
    ensure(
        v.status == Status::Certified && v.certified_threshold == Some(17),
        || format!("(3,3,3) is {:?} with N* {:?}", v.status, v.certified_threshold),
    )?;
    Ok(format!(
        "(2,4,6) certified by {}; (2,3,4) refuted; (3,3,3) certified, N* = 17",
        lines.join(", ")
    ))
}

fn exclusion_batch(
    n: usize,
    r: usize,
    m: u32,
    k: u32,
    seeds: std::ops::Range<u64>,
) -> std::result::Result<u64, String> {
    let ledger = Ledger::builtin();
    let mut d = Deriver::new(&ledger);
    let cert = check_exclusion_conditions(&mut d, ConditionQuery::new(r, m, k).unwrap()).unwrap();
    let count = seeds.end - seeds.start;
    for seed in seeds {
        let s = fixture(n, r, seed);
        let tree = synthesize_exclusion(&s, k as usize, &cert).map_err(|e| format!("N={n} seed {seed}: {e}"))?;
        let rep = verify_exclusion(&tree, &s, k as usize).map_err(|e| e.to_string())?;
        ensure(rep.pass, || format!("N={n} seed {seed}: {:?}", rep.counterexample))?;
    }
    Ok(count)
}

fn bipartite_exclusion() -> Check {
    let a = exclusion_batch(6, 2, 3, 3, 0..200)?;
    let b = exclusion_batch(18, 2, 4, 6, 0..50)?;
    Ok(format!("{a} sets at N=6 exclude 3, {b} sets at N=18 exclude 6"))
}

fn tripartite_exclusion() -> Check {
    let a = exclusion_batch(17, 3, 3, 3, 0..20)?;
    Ok(format!("{a} sets at N=17, r=3 exclude 3"))
}

fn identification() -> Check {
    let ledger = Ledger::builtin();
    let mut d = Deriver::new(&ledger);
    let sched = exclusion_schedule(&mut d, 2, DEFAULT_MAX_THRESHOLD).unwrap();
    let g = sched.guarantee_table(30);
    ensure(
        g[18] == 18usize.div_ceil(6) + 2 && g[24] == 24usize.div_ceil(6) + 2,
        || format!("g(18) = {}, g(24) = {}", g[18], g[24]),
    )?;
    let mut summary = Vec::new();
    for n in [6, 12, 18, 24, 30] {
        let mut worst = 0;
        for seed in 0..20 {
            let s = fixture(n, 2, seed);
            let plan = plan_distinguish(&s, &sched).map_err(|e| format!("N={n} seed {seed}: {e}"))?;
            let rep = verify_identification(&plan, &s).map_err(|e| e.to_string())?;
            ensure(rep.pass, || format!("N={n} seed {seed}: {:?}", rep.counterexample))?;
            let used = rep.max_copies.unwrap_or(0);
            ensure(used <= g[n], || {
                format!("N={n} seed {seed}: {used} copies > g = {}", g[n])
            })?;
            worst = worst.max(used);
        }
        summary.push(format!("N={n} {worst}/{}", g[n]));
    }
    Ok(format!("worst copies/g: {}; g(18) = 5, g(24) = 6", summary.join(", ")))
}

fn scheduler_scan() -> Check {
    let ledger = Ledger::builtin();
    let mut d = Deriver::new(&ledger);
    let g = exclusion_schedule(&mut d, 2, DEFAULT_MAX_THRESHOLD)
        .unwrap()
        .guarantee_table(200);
    for q in 3..=10 {
        ensure(g[6 * q] <= q + 2, || format!("g({}) = {} > {}", 6 * q, g[6 * q], q + 2))?;
    }
    let mut tight = 0;
    for (n, &gn) in g.iter().enumerate().skip(18) {
        ensure(gn <= n.div_ceil(6) + 4, || {
            format!("g({n}) = {gn} > {}", n.div_ceil(6) + 4)
        })?;
        tight += usize::from(gn <= n.div_ceil(6) + 2);
    }
    Ok(format!(
        "g(6q) <= q+2 for q=3..10; g(N) <= ceil(N/6)+4 on 18..200 ({tight} of 183 within ceil(N/6)+2)"
    ))
}

fn bound_arithmetic() -> Check {
    let mut equal = Vec::new();
    for n in 25..=10_000usize {
        let (f2, shu) = (n.div_ceil(6) + 2, n.div_ceil(4));
        ensure(f2 <= shu, || format!("N={n}: {f2} > {shu}"))?;
        if f2 == shu {
            equal.push(n);
        }
    }
    ensure(equal == [25, 26, 27, 28, 31, 32], || format!("equality at {equal:?}"))?;
    Ok(format!(
        "ceil(N/6)+2 <= ceil(N/4) on 25..10^4, equality only at {equal:?}"
    ))
}

fn epsilon_fifth() -> Check {
    let ledger = Ledger::builtin();
    let mut d = Deriver::new(&ledger);
    let eps = parse_epsilon("0.2").map_err(|e| e.to_string())?;
    let s = epsilon_schedule(&mut d, eps, 2, 10_000).map_err(|e| e.to_string())?;
    let got = (s.m, s.threshold_proxy, s.q0, s.m_eps);
    ensure(got == (5, 48, 8, 7), || format!("(m, proxy, q0, M) = {got:?}"))?;
    let n0 = s.n0.ok_or("no N0 within scan")?;
    for n in n0..=10_000u64 {
        ensure(n / 6 + 7 <= n.div_ceil(5), || format!("N={n} fails"))?;
    }
    Ok(format!(
        "m=5, proxy 48, q0=8, M=7; (N div 6)+7 <= ceil(N/5) for N in {n0}..10^4"
    ))
}

fn realization_soundness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut max_zero, mut min_gap) = (0f64, f64::INFINITY);
    for i in 0..1000u64 {
        let n = rng.random_range(2..=20);
        let r = rng.random_range(2..=3);
        let seed = rng.random();
        let c = random_coloring(n, r, seed).unwrap();
        let s = realize(&c, seed, &RealizeOptions::default()).map_err(|e| format!("#{i} N={n} r={r}: {e}"))?;
        let back = extract_coloring(&s).map_err(|e| e.to_string())?;
        ensure(back == c, || format!("#{i}: extracted coloring differs"))?;
        let text = serde_json::to_string(&s.to_file()).unwrap();
        let file: StateSetFile = serde_json::from_str(&text).unwrap();
        let reread = ProductStateSet::from_file(&file).map_err(|e| e.to_string())?;
        ensure(reread == s, || format!("#{i}: JSON round trip differs"))?;
        for u in 0..n {
            for v in u + 1..n {
                for j in 0..r {
                    let ov = s.overlap(u, v, j).norm();
                    if c.orthogonal_in(u, v, j) {
                        max_zero = max_zero.max(ov);
                    } else {
                        min_gap = min_gap.min(ov);
                    }
                }
            }
        }
    }
    ensure(max_zero <= 1e-9, || format!("zero overlap {max_zero:e} > 1e-9"))?;
    ensure(min_gap >= 1e-4, || format!("nonzero overlap {min_gap:e} < 1e-4"))?;
    Ok(format!(
        "1000 sets round-trip; max zero overlap {max_zero:.1e}, min nonzero {min_gap:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("ledger fidelity", Some(Duration::from_secs(1)), ledger_fidelity),
        ("brute-force oracle", Some(Duration::from_secs(5)), brute_force_oracle),
        (
            "certification regression",
            Some(Duration::from_secs(1)),
            certification_regression,
        ),
        ("bipartite exclusion", None, bipartite_exclusion),
        ("tripartite exclusion", None, tripartite_exclusion),
        ("end-to-end identification", None, identification),
        ("scheduler bound scan", Some(Duration::from_secs(1)), scheduler_scan),
        ("bound arithmetic", Some(Duration::from_secs(1)), bound_arithmetic),
        ("epsilon schedule", Some(Duration::from_secs(1)), epsilon_fifth),
        ("realization soundness", None, realization_soundness),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut result = run();
        let took = start.elapsed();
        if let (Ok(_), Some(b)) = (&result, budget) {
            if took > b {
                result = Err(format!("took {:.2} s, budget {} s", took.as_secs_f64(), b.as_secs()));
            }
        }
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {:>2} {tag} {name} ({:.2} s): {detail}",
            i + 1,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
