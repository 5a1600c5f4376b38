use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ramsey_locc::cliques::{mono_max_clique, orthogonality_summary};
use ramsey_locc::protocol::{exclusion_schedule, plan_distinguish, synthesize_exclusion, DEFAULT_MAX_THRESHOLD};
use ramsey_locc::ramsey::{check_exclusion_conditions, ConditionQuery, Deriver, Ledger, RamseyQuery};
use ramsey_locc::simulate::{verify_exclusion, verify_identification};
use ramsey_locc::states::{random_coloring, realize, ProductStateSet, RealizeOptions};

fn fixture(n: usize, r: usize, seed: u64) -> ProductStateSet {
    realize(&random_coloring(n, r, seed).unwrap(), seed, &RealizeOptions::default()).unwrap()
}

fn cliques(c: &mut Criterion) {
    let mut g = c.benchmark_group("max_clique");
    for n in [20, 60, 150] {
        let col = random_coloring(n, 2, 1).unwrap();
        g.bench_with_input(BenchmarkId::new("color0", n), &col, |b, col| {
            b.iter(|| mono_max_clique(black_box(col), 0))
        });
    }
    let col = random_coloring(60, 3, 1).unwrap();
    g.bench_function("summary_60x3", |b| b.iter(|| orthogonality_summary(black_box(&col))));
    g.finish();
}

fn derive(c: &mut Criterion) {
    let ledger = Ledger::builtin();
    c.bench_function("derive_r55", |b| {
        b.iter(|| Deriver::new(&ledger).derive(black_box(&RamseyQuery::new(&[5, 5]).unwrap())))
    });
    c.bench_function("schedule_r2", |b| {
        b.iter(|| exclusion_schedule(&mut Deriver::new(&ledger), 2, DEFAULT_MAX_THRESHOLD).unwrap())
    });
}

fn realize_states(c: &mut Criterion) {
    let col = random_coloring(20, 3, 3).unwrap();
    c.bench_function("realize_20x3", |b| {
        b.iter(|| realize(black_box(&col), 3, &RealizeOptions::default()).unwrap())
    });
}

fn synthesis_and_verification(c: &mut Criterion) {
    let ledger = Ledger::builtin();
    let mut d = Deriver::new(&ledger);
    let cert = check_exclusion_conditions(&mut d, ConditionQuery::new(2, 4, 6).unwrap()).unwrap();
    let s = fixture(18, 2, 2);
    c.bench_function("synthesize_18_k6", |b| {
        b.iter(|| synthesize_exclusion(black_box(&s), 6, &cert).unwrap())
    });
    let tree = synthesize_exclusion(&s, 6, &cert).unwrap();
    c.bench_function("verify_exclusion_18_k6", |b| {
        b.iter(|| verify_exclusion(black_box(&tree), &s, 6).unwrap())
    });

    let sched = exclusion_schedule(&mut d, 2, DEFAULT_MAX_THRESHOLD).unwrap();
    let s = fixture(30, 2, 2);
    let mut g = c.benchmark_group("identify_30");
    g.sample_size(10);
    g.bench_function("plan", |b| b.iter(|| plan_distinguish(black_box(&s), &sched).unwrap()));
    let plan = plan_distinguish(&s, &sched).unwrap();
    g.bench_function("verify", |b| {
        b.iter(|| verify_identification(black_box(&plan), &s).unwrap())
    });
    g.finish();
}

criterion_group!(benches, cliques, derive, realize_states, synthesis_and_verification);
criterion_main!(benches);
