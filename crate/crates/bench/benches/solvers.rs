use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairvote::experiments::Mode;
use fairvote::solvers::bmatching::b_matching;
use fairvote::{
    continuous_greedy, swap_round, GreedyConfig, Polytope, Rule, Scorer, SolveOptions, Strategy,
};
use fairvote_bench::{euclidean, overlapping, planted_b_matching};

fn exact_solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact");
    let inst = euclidean(Mode::PropVoters, 1);
    for rule in [Rule::Sntv, Rule::KBorda] {
        g.bench_function(BenchmarkId::new("modular-delta1", rule.name()), |b| {
            b.iter(|| fairvote::solve(black_box(&inst), &rule, &SolveOptions::default()).unwrap())
        });
    }
    let d2 = overlapping(60, 200, 10, 6, 2, 3);
    g.bench_function("sntv-delta2/m60", |b| {
        b.iter(|| fairvote::solvers::sntv_delta2(black_box(&d2)).unwrap())
    });
    let small = overlapping(18, 50, 6, 3, 2, 4);
    let brute = SolveOptions {
        strategy: Strategy::BruteForce,
        ..SolveOptions::default()
    };
    let cp = SolveOptions {
        strategy: Strategy::ConstantP,
        ..SolveOptions::default()
    };
    g.bench_function("brute-force/m18", |b| {
        b.iter(|| fairvote::solve(&small, &Rule::Sntv, &brute).unwrap())
    });
    g.bench_function("constant-p/m18", |b| {
        b.iter(|| fairvote::solve(&small, &Rule::Sntv, &cp).unwrap())
    });
    g.finish();
}

fn fractional(c: &mut Criterion) {
    let mut g = c.benchmark_group("fractional");
    g.sample_size(10);
    let inst = euclidean(Mode::PropVoters, 2);
    let poly = Polytope::from_instance(&inst);
    let cfg = GreedyConfig {
        steps: Some(40),
        ..GreedyConfig::default()
    };
    g.bench_function("continuous-greedy/beta-cc/T40", |b| {
        b.iter(|| continuous_greedy(&Rule::BetaCc, black_box(&inst), &poly, &cfg).unwrap())
    });
    let scorer = Scorer::new(&Rule::BetaCc, &inst).unwrap();
    let y = vec![inst.k() as f64 / inst.m() as f64; inst.m()];
    g.bench_function("multilinear-exact/beta-cc", |b| {
        b.iter(|| scorer.multilinear_exact(black_box(&y)).unwrap())
    });
    g.bench_function("multilinear-grad-exact/beta-cc", |b| {
        b.iter(|| scorer.multilinear_grad_exact(black_box(&y)).unwrap())
    });

    let over = overlapping(80, 100, 12, 6, 3, 5);
    let trace =
        continuous_greedy(&Rule::AlphaCc, &over, &Polytope::from_instance(&over), &cfg).unwrap();
    let mut seed = 0u64;
    g.bench_function("swap-round/m80", |b| {
        b.iter(|| {
            seed += 1;
            swap_round(&trace.y, &over, seed).unwrap()
        })
    });
    g.finish();
}

fn matching(c: &mut Criterion) {
    let mut g = c.benchmark_group("b-matching");
    for (v, e) in [(20, 60), (60, 240)] {
        let prob = planted_b_matching(v, e, 7);
        g.bench_function(BenchmarkId::from_parameter(format!("{v}v-{e}e")), |b| {
            b.iter(|| b_matching(black_box(&prob)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, exact_solvers, fractional, matching);
criterion_main!(benches);
