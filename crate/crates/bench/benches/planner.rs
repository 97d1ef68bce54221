use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eubrl_bench::random_mdp;
use eubrl_core::envs::EnvSpec;
use eubrl_core::planner::{solve, value_iteration, SolveMethod, SolverOptions};
use std::hint::black_box;

fn random(c: &mut Criterion) {
    let mut g = c.benchmark_group("random_mdp");
    for states in [10, 50, 200] {
        let mdp = random_mdp(states as u64, states, 4, 0.95);
        g.bench_with_input(BenchmarkId::new("value_iteration", states), &mdp, |b, m| {
            b.iter(|| value_iteration(black_box(m), 1e-8, 100_000).unwrap())
        });
        let pi = SolverOptions {
            method: SolveMethod::PolicyIteration,
            ..SolverOptions::default()
        };
        g.bench_with_input(
            BenchmarkId::new("policy_iteration", states),
            &mdp,
            |b, m| b.iter(|| solve(black_box(m), &pi, None).unwrap()),
        );
    }
    g.finish();
}

fn deep_sea(c: &mut Criterion) {
    let mut g = c.benchmark_group("deep_sea_ground_truth");
    for size in [10, 20, 40] {
        let spec = EnvSpec::DeepSea {
            size,
            stochastic: true,
        };
        g.bench_with_input(BenchmarkId::from_parameter(size), &spec, |b, s| {
            b.iter(|| s.optimal_policy_and_value(0.99).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, random, deep_sea);
criterion_main!(benches);
